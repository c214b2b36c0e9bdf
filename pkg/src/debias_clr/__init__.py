"""Contrastive-learning debiaser for per-record feature vectors.

Records carry a sensitive attribute (gender or ethnicity). The pipeline
selects the feature columns most predictive of that attribute, builds a
counterfactual positive for every record by swapping those columns to the
opposite class's means, and trains a small encoder with an in-batch
contrastive loss so the learned representation stops encoding the
attribute. Fairness is audited with a single-category embedding-association
effect size against clinical-phenotype targets; representativeness is
checked by a five-classifier stay-length benchmark.
"""

from ._kernels import BACKEND as kernel_backend
from .dataset import FeatureTable, Record, SynthConfig, binarize_los, generate_synthetic, load_table, split, write_table
from .errors import DebiasClrError
from .fairness import association, sc_weat_effect_size, weat_statistic
from .numerics import RandomStream, cosine_similarity
from .preprocess import SensitiveProfile, mutual_information, select_sensitive_features, smote
from .trainer import EncoderParams, TrainConfig, embed, nt_xent_loss, train

__version__ = "0.1.0"

__all__ = [
    "kernel_backend",
    "FeatureTable",
    "Record",
    "SynthConfig",
    "binarize_los",
    "generate_synthetic",
    "load_table",
    "split",
    "write_table",
    "DebiasClrError",
    "association",
    "sc_weat_effect_size",
    "weat_statistic",
    "RandomStream",
    "cosine_similarity",
    "SensitiveProfile",
    "mutual_information",
    "select_sensitive_features",
    "smote",
    "EncoderParams",
    "TrainConfig",
    "embed",
    "nt_xent_loss",
    "train",
    "__version__",
]
