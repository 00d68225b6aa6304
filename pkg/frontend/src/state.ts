/**
 * Pure view logic: form validation and the view-models derived from a
 * diagnosis record. No DOM and no network in this module, which is what
 * makes the behavior unit-testable.
 */

import {
  CLASS_COLORS,
  CLASS_NAMES,
  type ClassName,
  type DiagnoseFormState,
  type DiagnosisRecord,
} from "./types.js";

export const MIN_BIRTH_YEAR = 1900;

export interface ValidationResult {
  valid: boolean;
  errors: { patientName?: string; birthYear?: string; imageFile?: string };
}

/** Mirrors the server-side rules so problems surface before any request. */
export function validateForm(
  form: Pick<DiagnoseFormState, "patientName" | "birthYear" | "imageFile">,
  currentYear: number = new Date().getFullYear(),
): ValidationResult {
  const errors: ValidationResult["errors"] = {};
  if (form.patientName.trim().length === 0) {
    errors.patientName = "Patient name is required.";
  }
  const year = Number(form.birthYear);
  if (
    form.birthYear.trim() === "" ||
    !Number.isInteger(year) ||
    year < MIN_BIRTH_YEAR ||
    year > currentYear
  ) {
    errors.birthYear = `Birth year must be a whole number between ${MIN_BIRTH_YEAR} and ${currentYear}.`;
  }
  if (form.imageFile === null) {
    errors.imageFile = "Choose a tissue image to upload.";
  }
  return { valid: Object.keys(errors).length === 0, errors };
}

export interface VoteBar {
  label: ClassName;
  count: number;
  fraction: number;
  color: string;
}

/** Bars for every class in fixed order; fractions of the total patch count. */
export function voteBarModel(record: DiagnosisRecord): VoteBar[] {
  const total = voteTotal(record);
  return CLASS_NAMES.map((label) => {
    const count = record.vote_counts[label] ?? 0;
    return {
      label,
      count,
      fraction: total > 0 ? count / total : 0,
      color: CLASS_COLORS[label],
    };
  });
}

export function voteTotal(record: DiagnosisRecord): number {
  return CLASS_NAMES.reduce((sum, label) => sum + (record.vote_counts[label] ?? 0), 0);
}

export interface OverlayCell {
  row: number;
  col: number;
  classIndex: number;
  className: ClassName;
  color: string;
}

/** Row-major patch grid; cell count is always rows * cols. */
export function overlayModel(record: DiagnosisRecord): OverlayCell[] {
  const { rows, cols } = record.grid;
  if (record.patch_labels.length !== rows * cols) {
    throw new Error(
      `patch_labels length ${record.patch_labels.length} does not match grid ${rows}x${cols}`,
    );
  }
  return record.patch_labels.map((classIndex, i) => {
    const className = CLASS_NAMES[classIndex];
    if (className === undefined) {
      throw new Error(`patch label ${classIndex} is not a class index`);
    }
    return {
      row: Math.floor(i / cols),
      col: i % cols,
      classIndex,
      className,
      color: CLASS_COLORS[className],
    };
  });
}

/** The class holding the most overlay cells (display-side sanity check). */
export function overlayMajority(record: DiagnosisRecord): ClassName {
  const counts = new Array(CLASS_NAMES.length).fill(0);
  for (const label of record.patch_labels) {
    counts[label] += 1;
  }
  let best = 0;
  for (let c = 1; c < counts.length; c += 1) {
    if (counts[c] > counts[best]) {
      best = c;
    }
  }
  return CLASS_NAMES[best] as ClassName;
}

export function formatTimestamp(iso: string): string {
  const date = new Date(iso);
  return Number.isNaN(date.getTime()) ? iso : date.toLocaleString();
}
