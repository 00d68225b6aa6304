/** Shared types mirroring the diagnosis service API. */

export const CLASS_NAMES = ["Normal", "Benign", "InSitu", "Invasive"] as const;

export type ClassName = (typeof CLASS_NAMES)[number];

/**
 * Fixed per-class legend, keyed by class order. Okabe-Ito palette:
 * distinguishable under the common color-vision deficiencies.
 */
export const CLASS_COLORS: Record<ClassName, string> = {
  Normal: "#009e73",
  Benign: "#56b4e9",
  InSitu: "#e69f00",
  Invasive: "#cc79a7",
};

export interface GridShape {
  rows: number;
  cols: number;
}

export interface DiagnosisRecord {
  record_id: string;
  created_at: string;
  patient_name: string;
  birth_year: number;
  image_hash: string;
  model_id: string;
  predicted: ClassName;
  vote_counts: Record<ClassName, number>;
  prob_sums: Record<ClassName, number>;
  patch_labels: number[];
  grid: GridShape;
}

export interface ModelInfo {
  model_id: string;
  kind: string;
  input_resolution: number;
  num_classes: number;
  weight_file_digest: string | null;
  tile_window: number;
  overlap: number;
  classes: string[];
}

export type SubmitState = "idle" | "pending" | "done" | "error";

export interface DiagnoseFormState {
  patientName: string;
  birthYear: string;
  imageFile: File | null;
  submitState: SubmitState;
}
