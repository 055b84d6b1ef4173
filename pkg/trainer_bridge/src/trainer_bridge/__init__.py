"""Training bridge: real deep models in, toolkit score files out."""

from .bridge import TrainConfig, train_and_export

__all__ = ["TrainConfig", "train_and_export"]
