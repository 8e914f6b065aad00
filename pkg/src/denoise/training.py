# =========================================
# 📄 File: src/denoise/training.py
# Purpose: Patch corpus from simulated frames and residual-loss training of the CNN
# - make_training_set: (noisy, clean) image crops sharing the noisy frame's normalization
# - cnn_train: seeded mini-batch Adam on 0.5 * ||R(y) - (y - x)||^2 / batch
# =========================================

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from src.channel_model import SystemConfig, draw_random_scene, synthesize_channel
from src.denoise.dncnn import DenoiserWeights, ResidualDenoiser, module_from_weights, weights_from_module
from src.denoise.image_equivalent import apply_normalization, to_image
from src.link_sim import apply_channel_awgn, generate_preamble, ls_estimate
from src.transform import to_delay_angle

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 10.0


class TrainingDivergedError(RuntimeError):
    """Loss exceeded DIVERGENCE_FACTOR x the initial loss."""


@dataclass(frozen=True)
class TrainConfig:
    patch_size: int = 32
    patch_count: int = 2000
    patches_per_frame: int = 1
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    snr_range_db: Tuple[float, float] = (-25.0, 0.0)
    seed: int = 7
    freeze_batchnorm: bool = False

    def __post_init__(self):
        if self.patch_size < 1 or self.patch_count < 1 or self.patches_per_frame < 1:
            raise ValueError("patch_size, patch_count and patches_per_frame must be >= 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0 (got {self.learning_rate})")
        if self.snr_range_db[0] > self.snr_range_db[1]:
            raise ValueError(f"snr_range_db must be (low, high) with low <= high (got {self.snr_range_db})")

    def check_receptive_field(self, depth: int) -> None:
        """A patch must cover the (2D+1)-pixel receptive field of a depth-D net."""
        if self.patch_size < 2 * depth + 1:
            raise ValueError(
                f"patch_size {self.patch_size} is smaller than the receptive field 2*D+1 = {2 * depth + 1}"
            )

    @classmethod
    def from_dict(cls, section: Dict[str, Any]) -> "TrainConfig":
        return cls(
            patch_size=int(section["patch_size"]),
            patch_count=int(section["patch_count"]),
            patches_per_frame=int(section.get("patches_per_frame", 1)),
            epochs=int(section["epochs"]),
            batch_size=int(section["batch_size"]),
            learning_rate=float(section["learning_rate"]),
            snr_range_db=tuple(float(s) for s in section["snr_range_db"]),
            seed=int(section["seed"]),
            freeze_batchnorm=bool(section.get("freeze_batchnorm", False)),
        )


@dataclass
class TrainingSet:
    noisy: np.ndarray  # (P, h, w) images in the noisy frame's normalization
    clean: np.ndarray  # (P, h, w) clean crops, same normalization
    noise_level: np.ndarray  # (P,) noise std in image units
    snr_db: np.ndarray  # (P,) Rx SNR of the source frame

    def __len__(self) -> int:
        return int(self.noisy.shape[0])


@dataclass
class TrainResult:
    weights: DenoiserWeights
    final_loss: float
    history: List[float] = field(default_factory=list)  # mean loss per epoch


def make_training_set(
    rng: np.random.Generator,
    cfg: SystemConfig,
    count: int,
    snr_range: Sequence[float],
    patch_size: int,
    patches_per_frame: int = 1,
    path_range: Sequence[int] = (2, 4),
    min_separation_bins: float = 2.0,
) -> TrainingSet:
    """
    Simulate frames at Rx SNR ~ U(snr_range) and crop `count` aligned patches.
    Both crops use the noisy frame's min/max record so each pair shares one scale.
    """
    M, N = cfg.shape
    if patch_size > min(M, N):
        raise ValueError(f"patch_size {patch_size} exceeds the {M}x{N} delay-angle grid")
    lo, hi = float(snr_range[0]), float(snr_range[1])

    noisy, clean, levels, snrs = [], [], [], []
    while len(noisy) < count:
        realization = draw_random_scene(rng, cfg, path_range, min_separation_bins)
        H = synthesize_channel(realization, cfg)
        preamble = generate_preamble(rng, N)
        snr_db = rng.uniform(lo, hi)
        frame = apply_channel_awgn(H, preamble, snr_db, rng)

        noisy_img = to_image(to_delay_angle(ls_estimate(frame, preamble)))
        clean_img = apply_normalization(np.abs(to_delay_angle(H)), noisy_img.norm)
        level = 0.0 if noisy_img.norm.degenerate else math.sqrt(frame.sigma2) / noisy_img.norm.span

        for _ in range(min(patches_per_frame, count - len(noisy))):
            i = int(rng.integers(0, M - patch_size + 1))
            j = int(rng.integers(0, N - patch_size + 1))
            noisy.append(noisy_img.img[i:i + patch_size, j:j + patch_size])
            clean.append(clean_img[i:i + patch_size, j:j + patch_size])
            levels.append(level)
            snrs.append(snr_db)

    log.info(f"Training set: {count} patches of {patch_size}x{patch_size}, SNR in [{lo}, {hi}] dB")
    return TrainingSet(np.stack(noisy), np.stack(clean), np.asarray(levels), np.asarray(snrs))


def residual_loss(residual: torch.Tensor, noisy: torch.Tensor, clean: torch.Tensor) -> torch.Tensor:
    """J = 1/(2B) * sum_i ||R(y_i) - (y_i - x_i)||^2 over a batch of B patches."""
    batch = residual.shape[0]
    return 0.5 * torch.sum((residual - (noisy - clean)) ** 2) / batch


def cnn_train(
    dataset: TrainingSet,
    train_cfg: TrainConfig,
    depth: int = 7,
    channels: int = 32,
    batch_norm: bool = True,
    known_variance: bool = False,
    initial: Optional[DenoiserWeights] = None,
) -> TrainResult:
    """
    Mini-batch Adam on the residual loss; deterministic for a fixed train_cfg.seed.
    Raises TrainingDivergedError when a batch loss exceeds 10x the first batch loss.
    """
    if len(dataset) == 0:
        raise ValueError("training set is empty")
    train_cfg.check_receptive_field(depth)

    if initial is not None:
        model = module_from_weights(initial)
    else:
        model = ResidualDenoiser(depth, channels, batch_norm, known_variance, seed=train_cfg.seed)
    if train_cfg.freeze_batchnorm:
        model.freeze_batchnorm()
    model.train()

    noisy = torch.as_tensor(dataset.noisy, dtype=torch.float32).unsqueeze(1)
    clean = torch.as_tensor(dataset.clean, dtype=torch.float32).unsqueeze(1)
    levels = torch.as_tensor(dataset.noise_level, dtype=torch.float32)
    optimizer = torch.optim.Adam([p for p in model.parameters() if p.requires_grad], lr=train_cfg.learning_rate)
    order_rng = np.random.default_rng(train_cfg.seed)

    initial_loss: Optional[float] = None
    history: List[float] = []
    for epoch in range(train_cfg.epochs):
        order = order_rng.permutation(len(dataset))
        epoch_losses = []
        for b, start in enumerate(range(0, len(order), train_cfg.batch_size)):
            idx = torch.as_tensor(order[start:start + train_cfg.batch_size])
            y, x = noisy[idx], clean[idx]
            optimizer.zero_grad()
            loss = residual_loss(model(y, levels[idx] if model.known_variance else None), y, x)
            value = float(loss.item())
            if initial_loss is None:
                initial_loss = value
            elif initial_loss > 0 and (not math.isfinite(value) or value > DIVERGENCE_FACTOR * initial_loss):
                raise TrainingDivergedError(
                    f"training diverged at epoch {epoch + 1}, batch {b + 1}: "
                    f"loss {value:.4g} > {DIVERGENCE_FACTOR:g} x initial {initial_loss:.4g}; "
                    "lower training.learning_rate"
                )
            loss.backward()
            optimizer.step()
            epoch_losses.append(value)
        history.append(float(np.mean(epoch_losses)))
        log.info(f"Epoch {epoch + 1}/{train_cfg.epochs}: loss {history[-1]:.6g}")

    model.eval()
    return TrainResult(weights=weights_from_module(model), final_loss=history[-1], history=history)
