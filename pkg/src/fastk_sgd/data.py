"""Dataset generation and ingestion."""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .numerics import DataSet

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


def gen_synthetic(m: int, d: int, rng: np.random.Generator, noise_sd: float = 1.0):
    """Planted linear-regression data.

    Rows are uniform on {1..10}^d, the planted weights are uniform on
    {1..100}^d and ``y ~ N(<x, w_bar>, noise_sd^2)``.

    Returns:
        ``(DataSet, w_bar)``
    """
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    X = rng.integers(1, 11, size=(m, d)).astype(np.float64)
    w_bar = rng.integers(1, 101, size=d).astype(np.float64)
    mean = X @ w_bar
    y = mean + noise_sd * rng.standard_normal(m) if noise_sd > 0 else mean
    return DataSet(X, y), w_bar


class IDXFormatError(ValueError):
    pass


def _read_idx(path, magic: int, what: str):
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise IDXFormatError(f"{path}: truncated {what} header")
    found, count = struct.unpack(">II", raw[:8])
    if found != magic:
        raise IDXFormatError(f"{path}: bad magic 0x{found:08x} for {what} file (expected 0x{magic:08x})")
    return raw, count


def load_idx(images_path, labels_path, limit: int | None = None) -> DataSet:
    """First ``limit`` images flattened row-major and scaled to [0, 1]."""
    raw_img, n_img = _read_idx(images_path, IDX_IMAGE_MAGIC, "image")
    raw_lab, n_lab = _read_idx(labels_path, IDX_LABEL_MAGIC, "label")
    if n_img != n_lab:
        raise IDXFormatError(f"{n_img} images but {n_lab} labels")
    if len(raw_img) < 16:
        raise IDXFormatError(f"{images_path}: truncated image header")
    rows, cols = struct.unpack(">II", raw_img[8:16])
    if limit is None:
        limit = n_img
    if not 1 <= limit <= n_img:
        raise ValueError(f"limit {limit} outside 1..{n_img}")
    pix = rows * cols
    if len(raw_img) < 16 + n_img * pix:
        raise IDXFormatError(f"{images_path}: truncated pixel data")
    if len(raw_lab) < 8 + n_lab:
        raise IDXFormatError(f"{labels_path}: truncated label data")
    images = np.frombuffer(raw_img, dtype=np.uint8, count=limit * pix, offset=16)
    labels = np.frombuffer(raw_lab, dtype=np.uint8, count=limit, offset=8)
    if labels.max() > 9:
        raise IDXFormatError(f"{labels_path}: label out of range 0..9")
    return DataSet(images.reshape(limit, pix) / 255.0, labels.astype(np.int64))


def write_idx(images_path, labels_path, images: np.ndarray, labels: np.ndarray):
    """Write uint8 images of shape (count, rows, cols) and their labels as IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    count, rows, cols = images.shape
    if labels.shape != (count,):
        raise ValueError("one label per image required")
    Path(images_path).write_bytes(struct.pack(">IIII", IDX_IMAGE_MAGIC, count, rows, cols) + images.tobytes())
    Path(labels_path).write_bytes(struct.pack(">II", IDX_LABEL_MAGIC, count) + labels.tobytes())


def save_dataset_csv(path, data: DataSet):
    """Columns x0..x{d-1}, y; floats written with round-trip precision."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"x{i}" for i in range(data.d)] + ["y"])
        for row, y in zip(data.features, data.labels):
            w.writerow([repr(float(v)) for v in row] + [repr(float(y))])


def load_dataset_csv(path) -> DataSet:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if not header or header[-1] != "y":
            raise ValueError(f"{path}: last column must be 'y'")
        rows = [[float(v) for v in r] for r in reader if r]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.array(rows)
    return DataSet(arr[:, :-1], arr[:, -1])
