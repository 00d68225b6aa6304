"""The four tissue classes and their fixed ordering.

The integer values double as confusion-matrix axes and as the
tie-breaking order for majority voting, so they must never change.
"""

from enum import IntEnum

from .errors import UnknownLabel


class ClassLabel(IntEnum):
    Normal = 0
    Benign = 1
    InSitu = 2
    Invasive = 3


LABELS = tuple(ClassLabel)
LABEL_NAMES = tuple(label.name for label in LABELS)
NUM_CLASSES = len(LABELS)

# accepted spellings, lowercased; covers the common "in situ" variants
_ALIASES = {
    "normal": ClassLabel.Normal,
    "n": ClassLabel.Normal,
    "benign": ClassLabel.Benign,
    "b": ClassLabel.Benign,
    "insitu": ClassLabel.InSitu,
    "in situ": ClassLabel.InSitu,
    "in_situ": ClassLabel.InSitu,
    "is": ClassLabel.InSitu,
    "invasive": ClassLabel.Invasive,
    "iv": ClassLabel.Invasive,
}


def parse_label(text: str) -> ClassLabel:
    """Parse a label name (case-insensitive) into a ClassLabel."""
    key = str(text).strip().lower()
    try:
        return _ALIASES[key]
    except KeyError:
        raise UnknownLabel(f"unknown class label: {text!r}") from None
