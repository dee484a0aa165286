"""Flow-record ingestion, cleaning, balancing and splitting."""

from .balance import downsample
from .cache import load_dataset, provenance_path, save_dataset
from .dataset import Dataset, SplitPair
from .ingest import RawTable, ingest
from .preprocess import apply_minmax, fit_minmax, preprocess, scale_split
from .schema import DDOS2019_COLUMNS, IDS2018_COLUMNS, KINDS, DatasetKind, get_kind
from .split import split

__all__ = [
    "Dataset",
    "SplitPair",
    "RawTable",
    "DatasetKind",
    "KINDS",
    "DDOS2019_COLUMNS",
    "IDS2018_COLUMNS",
    "get_kind",
    "ingest",
    "preprocess",
    "downsample",
    "split",
    "fit_minmax",
    "apply_minmax",
    "scale_split",
    "save_dataset",
    "load_dataset",
    "provenance_path",
]
