/**
 * Thin client over the diagnosis service HTTP API. All inference happens
 * server-side; this module only moves JSON.
 */

import type { DiagnosisRecord, ModelInfo } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorFromResponse(response: Response): Promise<ApiError> {
  let code = "RequestFailed";
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (typeof body.error === "string") code = body.error;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export async function submitDiagnosis(
  patientName: string,
  birthYear: string,
  imageFile: File,
): Promise<DiagnosisRecord> {
  const form = new FormData();
  form.append("patient_name", patientName);
  form.append("birth_year", birthYear);
  form.append("image", imageFile);
  const response = await fetch("/api/diagnose", { method: "POST", body: form });
  if (!response.ok) {
    throw await errorFromResponse(response);
  }
  return (await response.json()) as DiagnosisRecord;
}

export async function fetchRecords(
  page = 0,
  pageSize = 20,
): Promise<DiagnosisRecord[]> {
  const response = await fetch(`/api/records?page=${page}&page_size=${pageSize}`);
  if (!response.ok) {
    throw await errorFromResponse(response);
  }
  return (await response.json()) as DiagnosisRecord[];
}

export async function fetchRecord(recordId: string): Promise<DiagnosisRecord> {
  const response = await fetch(`/api/records/${encodeURIComponent(recordId)}`);
  if (!response.ok) {
    throw await errorFromResponse(response);
  }
  return (await response.json()) as DiagnosisRecord;
}

export async function fetchModelInfo(): Promise<ModelInfo> {
  const response = await fetch("/api/model");
  if (!response.ok) {
    throw await errorFromResponse(response);
  }
  return (await response.json()) as ModelInfo;
}
