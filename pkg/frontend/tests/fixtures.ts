import type { DiagnosisRecord } from "../src/types.js";

/** Record shaped like a 2048x1536 upload: 5x7 grid, 35 patches. */
export function standardRecord(overrides: Partial<DiagnosisRecord> = {}): DiagnosisRecord {
  const patchLabels: number[] = [];
  // 20 InSitu, 8 Benign, 5 Normal, 2 Invasive = 35 patches
  const votes: Array<[number, number]> = [[2, 20], [1, 8], [0, 5], [3, 2]];
  for (const [cls, count] of votes) {
    for (let i = 0; i < count; i += 1) patchLabels.push(cls);
  }
  return {
    record_id: "rec-0001",
    created_at: "2026-03-02T09:30:00+00:00",
    patient_name: "Le Thi Hoa",
    birth_year: 1969,
    image_hash: "c0ffee".padEnd(64, "0"),
    model_id: "compact-8x16",
    predicted: "InSitu",
    vote_counts: { Normal: 5, Benign: 8, InSitu: 20, Invasive: 2 },
    prob_sums: { Normal: 5.2, Benign: 7.9, InSitu: 19.6, Invasive: 2.3 },
    patch_labels: patchLabels,
    grid: { rows: 5, cols: 7 },
    ...overrides,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function pngFile(name = "tissue.png"): File {
  return new File([new Uint8Array([0x89, 0x50, 0x4e, 0x47])], name, {
    type: "image/png",
  });
}
