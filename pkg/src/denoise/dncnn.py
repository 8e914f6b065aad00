# =========================================
# 📄 File: src/denoise/dncnn.py
# Purpose: Residual-learning CNN denoiser (conv+ReLU, D-2 x conv+BN+ReLU, conv)
# - ResidualDenoiser: torch module predicting the noise map R(y)
# - DenoiserWeights: framework-free numpy snapshot of every layer
# - WDN1 weight files (little-endian f32, byte-exact layout)
# - cnn_forward: inference helper returning R(img)
# =========================================

import os
import struct
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import torch
from torch import nn

log = logging.getLogger(__name__)

WEIGHTS_MAGIC = b"WDN1"
FLAG_BATCH_NORM = 0x01
FLAG_KNOWN_VARIANCE = 0x02
BN_EPS = 1e-5
KERNEL_SIZE = 3


class ResidualDenoiser(nn.Module):
    """
    Predicts the noise component of a [0, 1] CIR image; the clean estimate is img - R(img).
    With known_variance the input gets a second, constant channel holding sigma (image units).
    Every conv uses zero padding 1 so the output size equals the input size.
    """

    def __init__(self, depth: int = 7, channels: int = 32, batch_norm: bool = True,
                 known_variance: bool = False, seed: Optional[int] = 0):
        super().__init__()
        if depth < 2:
            raise ValueError(f"depth must be >= 2 (got {depth})")
        if channels < 1:
            raise ValueError(f"channels must be >= 1 (got {channels})")
        self.depth = depth
        self.channels = channels
        self.batch_norm = batch_norm
        self.known_variance = known_variance
        self._bn_frozen = False

        in_ch = 2 if known_variance else 1
        widths = [in_ch] + [channels] * (depth - 1) + [1]
        self.convs = nn.ModuleList(
            nn.Conv2d(widths[i], widths[i + 1], KERNEL_SIZE, padding=1, bias=True) for i in range(depth)
        )
        self.norms = nn.ModuleList(
            nn.BatchNorm2d(channels, eps=BN_EPS) for _ in range(depth - 2)
        ) if batch_norm else nn.ModuleList()
        self.reset_parameters(seed)

    def reset_parameters(self, seed: Optional[int] = 0) -> None:
        """He fan-in normal init for kernels, zero biases; deterministic for a fixed seed."""
        gen = torch.Generator().manual_seed(seed) if seed is not None else None
        with torch.no_grad():
            for conv in self.convs:
                fan_in = conv.in_channels * KERNEL_SIZE * KERNEL_SIZE
                conv.weight.normal_(0.0, float(np.sqrt(2.0 / fan_in)), generator=gen)
                conv.bias.zero_()
            for bn in self.norms:
                bn.reset_parameters()

    @property
    def in_channels(self) -> int:
        return self.convs[0].in_channels

    def forward(self, x: torch.Tensor, noise_level: Optional[torch.Tensor] = None) -> torch.Tensor:
        """x: (B, 1, H, W). Returns the residual R(x) with the same shape."""
        if self.known_variance:
            if noise_level is None:
                raise ValueError("known-variance denoiser needs a noise_level per sample")
            level = torch.as_tensor(noise_level, dtype=x.dtype).reshape(-1, 1, 1, 1)
            x = torch.cat([x, level.expand(x.shape[0], 1, x.shape[2], x.shape[3])], dim=1)
        out = torch.relu(self.convs[0](x))
        for i in range(1, self.depth - 1):
            out = self.convs[i](out)
            if self.batch_norm:
                out = self.norms[i - 1](out)
            out = torch.relu(out)
        return self.convs[-1](out)

    def freeze_batchnorm(self) -> None:
        """Keep BN layers on running statistics (and their affine params fixed) even in train mode."""
        self._bn_frozen = True
        for bn in self.norms:
            bn.eval()
            for p in bn.parameters():
                p.requires_grad_(False)

    def train(self, mode: bool = True) -> "ResidualDenoiser":
        super().train(mode)
        if self._bn_frozen:
            for bn in self.norms:
                bn.eval()
        return self


# -----------------------
# Framework-free weights
# -----------------------


@dataclass
class BatchNormParams:
    scale: np.ndarray
    shift: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray


@dataclass
class LayerWeights:
    kernel: np.ndarray  # (out_ch, in_ch, 3, 3)
    bias: np.ndarray  # (out_ch,)
    bn: Optional[BatchNormParams] = None


@dataclass
class DenoiserWeights:
    depth: int
    channels: int
    batch_norm: bool = True
    known_variance: bool = False
    layers: List[LayerWeights] = field(default_factory=list)

    def expected_kernel_shapes(self) -> List[tuple]:
        in_ch = 2 if self.known_variance else 1
        widths = [in_ch] + [self.channels] * (self.depth - 1) + [1]
        return [(widths[i + 1], widths[i], KERNEL_SIZE, KERNEL_SIZE) for i in range(self.depth)]

    def has_bn(self, index: int) -> bool:
        return self.batch_norm and 0 < index < self.depth - 1

    def validate(self) -> None:
        """Raise ValueError when any tensor disagrees with the architecture descriptor."""
        if len(self.layers) != self.depth:
            raise ValueError(f"weights carry {len(self.layers)} layers but depth is {self.depth}")
        for i, (layer, shape) in enumerate(zip(self.layers, self.expected_kernel_shapes())):
            if tuple(layer.kernel.shape) != shape:
                raise ValueError(f"layer {i}: kernel shape {tuple(layer.kernel.shape)} != expected {shape}")
            if tuple(layer.bias.shape) != (shape[0],):
                raise ValueError(f"layer {i}: bias shape {tuple(layer.bias.shape)} != ({shape[0]},)")
            if self.has_bn(i) != (layer.bn is not None):
                raise ValueError(f"layer {i}: batch-norm parameters {'missing' if self.has_bn(i) else 'unexpected'}")
            if layer.bn is not None:
                for name in ("scale", "shift", "running_mean", "running_var"):
                    if getattr(layer.bn, name).shape != (self.channels,):
                        raise ValueError(f"layer {i}: batch-norm {name} must have shape ({self.channels},)")


def weights_from_module(model: ResidualDenoiser) -> DenoiserWeights:
    def arr(t: torch.Tensor) -> np.ndarray:
        return t.detach().cpu().numpy().astype(np.float32).copy()

    layers = []
    for i, conv in enumerate(model.convs):
        bn = None
        if model.batch_norm and 0 < i < model.depth - 1:
            norm = model.norms[i - 1]
            bn = BatchNormParams(arr(norm.weight), arr(norm.bias), arr(norm.running_mean), arr(norm.running_var))
        layers.append(LayerWeights(kernel=arr(conv.weight), bias=arr(conv.bias), bn=bn))
    return DenoiserWeights(model.depth, model.channels, model.batch_norm, model.known_variance, layers)


def module_from_weights(weights: DenoiserWeights) -> ResidualDenoiser:
    weights.validate()
    model = ResidualDenoiser(weights.depth, weights.channels, weights.batch_norm, weights.known_variance, seed=None)
    with torch.no_grad():
        for i, layer in enumerate(weights.layers):
            model.convs[i].weight.copy_(torch.from_numpy(np.asarray(layer.kernel, dtype=np.float32)))
            model.convs[i].bias.copy_(torch.from_numpy(np.asarray(layer.bias, dtype=np.float32)))
            if layer.bn is not None:
                norm = model.norms[i - 1]
                norm.weight.copy_(torch.from_numpy(np.asarray(layer.bn.scale, dtype=np.float32)))
                norm.bias.copy_(torch.from_numpy(np.asarray(layer.bn.shift, dtype=np.float32)))
                norm.running_mean.copy_(torch.from_numpy(np.asarray(layer.bn.running_mean, dtype=np.float32)))
                norm.running_var.copy_(torch.from_numpy(np.asarray(layer.bn.running_var, dtype=np.float32)))
    model.eval()
    return model


# -----------------------
# WDN1 files
# -----------------------


def encode_weights(weights: DenoiserWeights) -> bytes:
    """
    magic WDN1, u32 depth, u32 channels, u8 flags (bit0 batch-norm, bit1 known-variance input),
    then per layer: kernel, bias and, for hidden layers with BN, scale, shift, running mean, running var.
    All tensors little-endian f32 in C order.
    """
    weights.validate()
    flags = (FLAG_BATCH_NORM if weights.batch_norm else 0) | (FLAG_KNOWN_VARIANCE if weights.known_variance else 0)
    chunks = [WEIGHTS_MAGIC, struct.pack("<IIB", weights.depth, weights.channels, flags)]
    for layer in weights.layers:
        tensors = [layer.kernel, layer.bias]
        if layer.bn is not None:
            tensors += [layer.bn.scale, layer.bn.shift, layer.bn.running_mean, layer.bn.running_var]
        chunks += [np.ascontiguousarray(t, dtype="<f4").tobytes() for t in tensors]
    return b"".join(chunks)


def decode_weights(blob: bytes) -> DenoiserWeights:
    if len(blob) < 13 or blob[:4] != WEIGHTS_MAGIC:
        raise ValueError("not a WDN1 weights file (bad magic)")
    depth, channels, flags = struct.unpack("<IIB", blob[4:13])
    if flags & ~(FLAG_BATCH_NORM | FLAG_KNOWN_VARIANCE):
        raise ValueError(f"unknown WDN1 flag bits: {flags:#04x}")
    weights = DenoiserWeights(depth, channels, bool(flags & FLAG_BATCH_NORM), bool(flags & FLAG_KNOWN_VARIANCE))
    offset = 13

    def take(shape) -> np.ndarray:
        nonlocal offset
        count = int(np.prod(shape))
        end = offset + 4 * count
        if end > len(blob):
            raise ValueError("WDN1 payload truncated")
        out = np.frombuffer(blob, dtype="<f4", count=count, offset=offset).reshape(shape).astype(np.float32)
        offset = end
        return out

    for i, shape in enumerate(weights.expected_kernel_shapes()):
        kernel, bias = take(shape), take((shape[0],))
        bn = BatchNormParams(*(take((channels,)) for _ in range(4))) if weights.has_bn(i) else None
        weights.layers.append(LayerWeights(kernel, bias, bn))
    if offset != len(blob):
        raise ValueError(f"WDN1 payload has {len(blob) - offset} trailing bytes")
    return weights


def save_weights(path: Union[str, os.PathLike], weights: DenoiserWeights) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_weights(weights))
    log.info(f"✅ Denoiser weights saved: {path} (D={weights.depth}, C={weights.channels})")


def load_weights(path: Union[str, os.PathLike]) -> DenoiserWeights:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Denoiser weights not found: {path} (run `denoise-train` first)")
    return decode_weights(path.read_bytes())


# -----------------------
# Inference
# -----------------------


def cnn_forward(img: np.ndarray, weights: Union[DenoiserWeights, ResidualDenoiser],
                noise_level: Optional[float] = None) -> np.ndarray:
    """
    Residual estimate R(img) for a single (H, W) image or a (B, H, W) stack.
    Runs with running batch-norm statistics; a passed module keeps its train/eval mode afterwards.
    """
    model = module_from_weights(weights) if isinstance(weights, DenoiserWeights) else weights
    img = np.asarray(img)
    single = img.ndim == 2
    if img.ndim not in (2, 3):
        raise ValueError(f"expected an (H, W) or (B, H, W) image (got shape {img.shape})")
    dtype = next(model.parameters()).dtype
    x = torch.as_tensor(img[None] if single else img, dtype=dtype).unsqueeze(1)
    level = None
    if model.known_variance:
        if noise_level is None:
            raise ValueError("known-variance denoiser needs noise_level")
        level = torch.full((x.shape[0],), float(noise_level), dtype=dtype)

    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            residual = model(x, level).squeeze(1).cpu().numpy().astype(float)
    finally:
        model.train(was_training)
    return residual[0] if single else residual
