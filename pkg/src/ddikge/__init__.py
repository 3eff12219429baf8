"""Knowledge-graph embeddings for drug-drug interaction prediction.

Train TransE/DistMult/ComplEx/SimplE/RotatE embedding models with
uniform, self-adversarial, or adversarial-autoencoder negative sampling,
and evaluate them with filtered ranking and interaction-type
classification. See the README for the CLI workflow.
"""

__version__ = "0.1.0"

from .backend import BACKEND
from .data import (
    DatasetSplit,
    FilterIndex,
    Triplet,
    Vocab,
    build_filter_index,
    load_tsv,
    save_tsv,
    split,
    synth_kg,
)
from .evaluation import (
    MetricsReport,
    RankResult,
    ddi_classification,
    filtered_rank,
    link_prediction_metrics,
    rank_oracle,
)
from .rng import RngStream
from .scorers import (
    SCORERS,
    EmbeddingModel,
    init_model,
    load_checkpoint,
    save_checkpoint,
    score,
    score_all_candidates,
    score_gradients,
)
from .training import TrainConfig, TrainResult, train

__all__ = [
    "BACKEND",
    "DatasetSplit",
    "EmbeddingModel",
    "FilterIndex",
    "MetricsReport",
    "RankResult",
    "RngStream",
    "SCORERS",
    "TrainConfig",
    "TrainResult",
    "Triplet",
    "Vocab",
    "__version__",
    "build_filter_index",
    "ddi_classification",
    "filtered_rank",
    "init_model",
    "link_prediction_metrics",
    "load_checkpoint",
    "load_tsv",
    "rank_oracle",
    "save_checkpoint",
    "save_tsv",
    "score",
    "score_all_candidates",
    "score_gradients",
    "split",
    "synth_kg",
    "train",
]
