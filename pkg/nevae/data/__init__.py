from nevae.data.idx import IMAGES_MAGIC, LABELS_MAGIC, load_idx, read_idx, save_idx, write_idx
from nevae.data.synthetic import make_synthetic, synthetic_factors, synthetic_mapping
from nevae.data.transforms import binarize, dataset_fingerprint, subsample_per_class, take_subset
from nevae.data.types import BinarizeMode, Dataset, SyntheticSpec

__all__ = [
    "BinarizeMode",
    "Dataset",
    "IMAGES_MAGIC",
    "LABELS_MAGIC",
    "SyntheticSpec",
    "binarize",
    "dataset_fingerprint",
    "load_idx",
    "make_synthetic",
    "read_idx",
    "save_idx",
    "subsample_per_class",
    "synthetic_factors",
    "synthetic_mapping",
    "take_subset",
    "write_idx",
]
