"""Desk-scale training framework for time-sensitive question answering.

Pipeline: tag temporal expressions, build dilated temporal masks, fuse
them with text embeddings, mine granularity-based negative answers, and
train a small selection policy in two stages (supervised, then PPO with
a contrastive temporal reward).
"""

from .config import FeatureConfig, RunConfig
from .corpus import QARecord, QuestionType, SyntheticConfig, generate_synthetic
from .facts import FactIndex, TimeFact
from .intervals import MonthInterval
from .reward import RewardParams, score_prediction
from .trainer import PPOConfig, SFTConfig, train_ppo, train_sft

__version__ = "0.1.0"

__all__ = [
    "FactIndex",
    "FeatureConfig",
    "MonthInterval",
    "PPOConfig",
    "QARecord",
    "QuestionType",
    "RewardParams",
    "RunConfig",
    "SFTConfig",
    "SyntheticConfig",
    "TimeFact",
    "generate_synthetic",
    "score_prediction",
    "train_ppo",
    "train_sft",
    "__version__",
]
