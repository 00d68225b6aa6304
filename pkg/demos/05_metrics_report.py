"""Evaluation metrics: confusion matrix, per-class P/R/F1, row-normalization.

Uses a 40-image evaluation (10 per true class) where Normal absorbs two
Benign mistakes and InSitu absorbs one Invasive mistake: 37/40 correct.
"""

import numpy as np

from histopatch.metrics import accuracy, normalize_rows, report_dict, report_text

MATRIX = np.array(
    [
        [10, 0, 0, 0],   # true Normal
        [2, 8, 0, 0],    # true Benign
        [0, 0, 10, 0],   # true InSitu
        [0, 0, 1, 9],    # true Invasive
    ],
    dtype=np.int64,
)


def main():
    print("confusion matrix (rows = true, columns = predicted):")
    print(MATRIX, "\n")

    print(report_text(MATRIX), "\n")

    print("row-normalized (per-class recall on the diagonal):")
    with np.printoptions(precision=2, suppress=True):
        print(normalize_rows(MATRIX), "\n")

    report = report_dict(MATRIX)
    print(f"accuracy: {accuracy(MATRIX):.4f} "
          f"(macro F1 {report['macro']['f1']:.4f})")
    print("full-precision JSON report keys:", sorted(report))


if __name__ == "__main__":
    main()
