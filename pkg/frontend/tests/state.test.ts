import { describe, expect, it } from "vitest";

import {
  MIN_BIRTH_YEAR,
  overlayMajority,
  overlayModel,
  validateForm,
  voteBarModel,
  voteTotal,
} from "../src/state.js";
import { CLASS_COLORS, CLASS_NAMES } from "../src/types.js";
import { pngFile, standardRecord } from "./fixtures.js";

const CURRENT_YEAR = 2026;

describe("validateForm", () => {
  const valid = { patientName: "Ana", birthYear: "1980", imageFile: pngFile() };

  it("accepts a complete form", () => {
    const result = validateForm(valid, CURRENT_YEAR);
    expect(result.valid).toBe(true);
    expect(result.errors).toEqual({});
  });

  it("rejects an empty or whitespace name", () => {
    for (const name of ["", "   "]) {
      const result = validateForm({ ...valid, patientName: name }, CURRENT_YEAR);
      expect(result.valid).toBe(false);
      expect(result.errors.patientName).toBeTruthy();
    }
  });

  it("rejects out-of-range or non-integer birth years", () => {
    for (const year of ["1899", "2027", "abc", "19.5", ""]) {
      const result = validateForm({ ...valid, birthYear: year }, CURRENT_YEAR);
      expect(result.valid).toBe(false);
      expect(result.errors.birthYear).toContain(String(MIN_BIRTH_YEAR));
    }
  });

  it("accepts boundary years", () => {
    for (const year of ["1900", String(CURRENT_YEAR)]) {
      expect(validateForm({ ...valid, birthYear: year }, CURRENT_YEAR).valid).toBe(true);
    }
  });

  it("requires an image file", () => {
    const result = validateForm({ ...valid, imageFile: null }, CURRENT_YEAR);
    expect(result.valid).toBe(false);
    expect(result.errors.imageFile).toBeTruthy();
  });
});

describe("voteBarModel", () => {
  it("emits one bar per class in fixed order with correct fractions", () => {
    const record = standardRecord();
    const bars = voteBarModel(record);
    expect(bars.map((b) => b.label)).toEqual([...CLASS_NAMES]);
    expect(bars.map((b) => b.count)).toEqual([5, 8, 20, 2]);
    expect(bars.reduce((s, b) => s + b.count, 0)).toBe(35);
    expect(bars[2]!.fraction).toBeCloseTo(20 / 35, 10);
    expect(bars[0]!.color).toBe(CLASS_COLORS.Normal);
  });

  it("total matches the vote counts", () => {
    expect(voteTotal(standardRecord())).toBe(35);
  });
});

describe("overlayModel", () => {
  it("yields rows * cols cells in row-major order", () => {
    const record = standardRecord();
    const cells = overlayModel(record);
    expect(cells).toHaveLength(35);
    expect(cells[0]).toMatchObject({ row: 0, col: 0 });
    expect(cells[7]).toMatchObject({ row: 1, col: 0 });
    expect(cells[34]).toMatchObject({ row: 4, col: 6 });
    for (const cell of cells) {
      expect(cell.color).toBe(CLASS_COLORS[cell.className]);
    }
  });

  it("rejects a label list that does not fill the grid", () => {
    const record = standardRecord({ patch_labels: [0, 1, 2] });
    expect(() => overlayModel(record)).toThrow(/does not match grid/);
  });

  it("rejects out-of-range class indices", () => {
    const bad = standardRecord();
    bad.patch_labels[0] = 9;
    expect(() => overlayModel(bad)).toThrow(/not a class index/);
  });
});

describe("overlayMajority", () => {
  it("matches the predicted class on the standard record", () => {
    const record = standardRecord();
    expect(overlayMajority(record)).toBe(record.predicted);
  });
});
