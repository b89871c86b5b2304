"""Model and training hyperparameter containers."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass
class ModelConfig:
    vocab_size: int
    layers: int = 2
    heads: int = 4
    embed_dim: int = 128
    ffn_dim: int = 512
    max_seq_len: int = 1024
    dropout: float = 0.1

    def __post_init__(self):
        if self.embed_dim % self.heads != 0:
            raise ValueError("embed_dim must be divisible by heads")
        if self.max_seq_len < 1:
            raise ValueError("max_seq_len must be >= 1")

    def to_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_obj(cls, obj: dict) -> "ModelConfig":
        return cls(**obj)


@dataclass
class TrainConfig:
    learning_rate: float = 1.5e-3
    batch_size: int = 16
    epochs: int = 22
    seed: int = 0
    recommend_weight: float = 2.0  # per-token weight on entity-recommendation act tokens
    weighted_act_types: tuple[str, ...] = ("recommend", "inform")
    grad_clip_norm: float = 1.0
    weight_decay: float = 0.01
    lr_decay: float = 0.1  # linear per-epoch decay down to this fraction of learning_rate
    chit_warmup_epochs: int = 8  # chat-model-first curriculum before the mixed corpus
    pos_jitter: int = 256  # max random position offset per batch (depth invariance)
    word_dropout: float = 0.0  # optional whole-token embedding dropout
    intro_oversample: int = 3  # duplication factor for turn-0 and domain-switch examples
    supervise_context: bool = False  # True trains on every token, not just the final turn

    def __post_init__(self):
        if self.recommend_weight < 1:
            raise ValueError("recommend_weight must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        self.weighted_act_types = tuple(self.weighted_act_types)

    def to_obj(self) -> dict:
        obj = asdict(self)
        obj["weighted_act_types"] = list(self.weighted_act_types)
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "TrainConfig":
        obj = dict(obj)
        obj["weighted_act_types"] = tuple(obj.get("weighted_act_types", ("recommend", "inform")))
        return cls(**obj)
