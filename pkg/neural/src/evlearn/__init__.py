"""Learned joint transmission and deblurring of blurry images with event
side information, at toy scale."""

from .channel import Channel, mean_symbol_power, power_normalize
from .config import Budget, ModelConfig, TrainConfig
from .data import (dataset_size, load_manifest_dataset, make_jump_dataset)
from .evaluate import evaluate, format_table, psnr, ssim
from .formats import read_etns, read_image_gray, read_manifest
from .model import (CrossAttention, DeblurDecoder, EncoderStack, JointModel,
                    TransmitResult)
from .training import (GROUP_NAMES, group_hashes, load_checkpoint,
                       save_checkpoint, train)

__version__ = "0.1.0"

__all__ = [
    "Budget", "Channel", "CrossAttention", "DeblurDecoder", "EncoderStack",
    "GROUP_NAMES", "JointModel", "ModelConfig", "TrainConfig",
    "TransmitResult", "dataset_size", "evaluate", "format_table",
    "group_hashes", "load_checkpoint", "load_manifest_dataset",
    "make_jump_dataset", "mean_symbol_power", "power_normalize", "psnr",
    "read_etns", "read_image_gray", "read_manifest", "save_checkpoint",
    "ssim", "train",
]
