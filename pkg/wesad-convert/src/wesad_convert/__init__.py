"""Converter from WESAD per-subject records to the columnar store layout."""

from .convert import (
    CHEST_RATE_HZ,
    LABEL_RATE_HZ,
    SUBJECT_IDS,
    WRIST_RATES_HZ,
    ConversionError,
    ConversionReport,
    FileEntry,
    SubjectReport,
    convert,
)

__version__ = "0.1.0"

__all__ = [
    "CHEST_RATE_HZ",
    "LABEL_RATE_HZ",
    "SUBJECT_IDS",
    "WRIST_RATES_HZ",
    "ConversionError",
    "ConversionReport",
    "FileEntry",
    "SubjectReport",
    "convert",
    "__version__",
]
