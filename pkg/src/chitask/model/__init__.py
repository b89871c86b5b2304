from .config import ModelConfig, TrainConfig
from .net import SequenceTooLong, TransformerLM
from .sequences import TokenSequence, build_training_sequence, pad_batch
from .optim import AdamW, clip_grad_norm
from .generate import DecodeSession, GenerationResult, continue_until, generate_until
from .checkpoint import (CheckpointError, CheckpointMismatch, load_checkpoint,
                         read_header, save_checkpoint)
from .train import DivergedLoss, TrainResult, build_examples, train

__all__ = [
    "ModelConfig", "TrainConfig", "TransformerLM", "SequenceTooLong",
    "TokenSequence", "build_training_sequence", "pad_batch",
    "AdamW", "clip_grad_norm",
    "DecodeSession", "GenerationResult", "continue_until", "generate_until",
    "CheckpointError", "CheckpointMismatch", "load_checkpoint", "read_header",
    "save_checkpoint",
    "DivergedLoss", "TrainResult", "build_examples", "train",
]
