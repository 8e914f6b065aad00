# =========================================
# 📄 File: src/io_formats.py
# Purpose: File formats shared by the CLI and tests
# - Scene files: `theta tau_seconds alpha_re alpha_im` per line, '#' comments
# - WSG1 binary complex matrices (golden files, frame dumps)
# - CSV/TSV writers with a fixed float format (byte-identical reruns)
# - Cluster exports: `i,j,w,label`
# =========================================

import os
import struct
import logging
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import pandas as pd

from src.channel_model import ChannelRealization, PathSignature
from src.clustering.types import ClusterDataset, Clustering

log = logging.getLogger(__name__)

MATRIX_MAGIC = b"WSG1"
FLOAT_FORMAT = "%.10g"

PathLike = Union[str, os.PathLike]


def _ensure_parent(path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except PermissionError as e:
        log.error(f"No permission to create output directory {path.parent}")
        raise OSError(f"Output directory is not writable: {path.parent}") from e
    return path


# -----------------------
# Scene files
# -----------------------


def save_scene(path: PathLike, realization: ChannelRealization, comment: str = "") -> None:
    """Write one path per line: theta tau_seconds alpha_re alpha_im."""
    path = _ensure_parent(path)
    rows = np.array([[p.theta, p.tau, p.alpha.real, p.alpha.imag] for p in realization.paths])
    header = "theta tau_seconds alpha_re alpha_im"
    if comment:
        header = f"{comment}\n{header}"
    np.savetxt(path, rows, fmt="%.17g", header=header, comments="# ")
    log.info(f"✅ Scene saved: {path} ({realization.L} paths)")


def load_scene(path: PathLike) -> ChannelRealization:
    """Read a scene file; '#' starts a comment anywhere on a line."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scene file not found: {path}")
    rows = np.loadtxt(path, comments="#", ndmin=2)
    if rows.size == 0:
        raise ValueError(f"{path}: scene file contains no paths")
    if rows.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns (theta tau alpha_re alpha_im), got {rows.shape[1]}")
    paths = tuple(PathSignature(theta=float(t), tau=float(d), alpha=complex(re, im)) for t, d, re, im in rows)
    return ChannelRealization(paths)


# -----------------------
# WSG1 complex matrices
# -----------------------


def encode_matrix(matrix: np.ndarray) -> bytes:
    """magic WSG1, u32 rows, u32 cols, then row-major interleaved little-endian f64 (re, im)."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2:
        raise ValueError(f"only 2-D matrices can be encoded (got ndim={matrix.ndim})")
    rows, cols = matrix.shape
    payload = np.ascontiguousarray(matrix).astype("<c16").tobytes()  # c16 is (re, im) f64 pairs
    return MATRIX_MAGIC + struct.pack("<II", rows, cols) + payload


def decode_matrix(blob: bytes) -> np.ndarray:
    if len(blob) < 12 or blob[:4] != MATRIX_MAGIC:
        raise ValueError("not a WSG1 matrix (bad magic)")
    rows, cols = struct.unpack("<II", blob[4:12])
    expected = 12 + rows * cols * 16
    if len(blob) != expected:
        raise ValueError(f"WSG1 payload size mismatch: expected {expected} bytes, got {len(blob)}")
    return np.frombuffer(blob, dtype="<c16", offset=12).reshape(rows, cols).astype(complex)


def save_matrix(path: PathLike, matrix: np.ndarray) -> None:
    path = _ensure_parent(path)
    path.write_bytes(encode_matrix(matrix))
    log.info(f"✅ Matrix saved: {path} {np.shape(matrix)}")


def load_matrix(path: PathLike) -> np.ndarray:
    return decode_matrix(Path(path).read_bytes())


# -----------------------
# Tables
# -----------------------


def save_table(df: pd.DataFrame, path: PathLike, sep: str = ",", header_lines: Iterable[str] = ()) -> None:
    """Write a DataFrame with optional '# ' header comment lines (gnuplot-friendly)."""
    path = _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        df.to_csv(f, sep=sep, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    log.info(f"✅ Table saved: {path} ({len(df)} rows)")


def export_clustering(path: PathLike, dataset: ClusterDataset, clustering: Clustering) -> None:
    """Cluster dataset plus labels as `i,j,w,label` CSV (label -1 = noise)."""
    pts = dataset.bins()
    df = pd.DataFrame({"i": pts[:, 0], "j": pts[:, 1], "w": dataset.weights, "label": clustering.labels})
    save_table(df, path)
