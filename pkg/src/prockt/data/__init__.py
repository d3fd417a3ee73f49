from .schema import (
    DIMENSIONS,
    QUESTION_TYPES,
    InteractionRecord,
    MPRatios,
    Problem,
    StudentSequence,
    ValidationError,
)
from .io import Dataset, DatasetFormatError, load_dataset, load_problems, save_dataset
from .preprocess import (
    MIN_PROCESS_LINES,
    PreprocessReport,
    SplitError,
    count_process_lines,
    preprocess,
    split,
)
from .batches import MP_IMPUTE, Batch, Vocab, make_batches

__all__ = [
    "Batch", "DIMENSIONS", "Dataset", "DatasetFormatError",
    "InteractionRecord", "MIN_PROCESS_LINES", "MPRatios", "MP_IMPUTE",
    "PreprocessReport", "Problem", "QUESTION_TYPES", "SplitError",
    "StudentSequence", "ValidationError", "Vocab", "count_process_lines",
    "load_dataset", "load_problems", "make_batches", "preprocess",
    "save_dataset", "split",
]
