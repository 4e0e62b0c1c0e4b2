"""Desk-scale datasets: synthetic generators, IDX ingestion, and transforms.

Everything here is a pure function of its inputs and seeds; calling twice
with the same arguments produces identical arrays.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import IdxFormatError, LengthError
from .network import Batch

IDX_LABEL_MAGIC = 0x00000801
IDX_IMAGE_MAGIC = 0x00000803


@dataclass(frozen=True)
class Dataset:
    """Features (n, d) float64, integer class labels (n,), and class count."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=np.float64))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.features.shape[0] != self.labels.shape[0]:
            raise LengthError(
                f"{self.features.shape[0]} feature rows vs {self.labels.shape[0]} labels",
                expected=self.features.shape[0],
                found=self.labels.shape[0],
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError(
                f"labels must lie in [0, {self.n_classes}), "
                f"found range [{self.labels.min()}, {self.labels.max()}]"
            )

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def as_batch(self) -> Batch:
        return Batch(self.features, self.labels)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        return Dataset(self.features[idx], self.labels[idx], self.n_classes)


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/test partition: fraction of examples kept for training."""

    train_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def gen_two_moons(n: int, noise_sd: float, seed: int) -> Dataset:
    """Two interleaved half-circle classes, balanced to within one example.

    Class 0 sits on the upper unit half-circle, class 1 on a lower half-circle
    shifted right by 1 and up by 0.5. Gaussian noise with the given standard
    deviation is added to both coordinates.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be >= 0, got {noise_sd}")
    n0 = (n + 1) // 2
    n1 = n // 2
    t0 = np.linspace(0.0, np.pi, n0)
    t1 = np.linspace(0.0, np.pi, n1)
    outer = np.column_stack([np.cos(t0), np.sin(t0)])
    inner = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    features = np.vstack([outer, inner])
    if noise_sd > 0:
        rng = np.random.default_rng(seed)
        features = features + rng.normal(0.0, noise_sd, size=features.shape)
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    return Dataset(features, labels, n_classes=2)


def gen_gaussian_blobs(n: int, centers, sd: float, seed: int) -> Dataset:
    """Balanced isotropic Gaussian clusters, one class per center."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] < 2:
        raise ValueError(f"need >= 2 centers of equal dimension, got shape {centers.shape}")
    if sd < 0:
        raise ValueError(f"sd must be >= 0, got {sd}")
    k = centers.shape[0]
    counts = [n // k + (1 if i < n % k else 0) for i in range(k)]
    rng = np.random.default_rng(seed)
    chunks, labels = [], []
    for i, count in enumerate(counts):
        points = np.tile(centers[i], (count, 1))
        if sd > 0:
            points = points + rng.normal(0.0, sd, size=points.shape)
        chunks.append(points)
        labels.append(np.full(count, i, dtype=np.int64))
    return Dataset(np.vstack(chunks), np.concatenate(labels), n_classes=k)


def _read_exact(f, count: int, path: str) -> bytes:
    data = f.read(count)
    if len(data) != count:
        raise LengthError(
            f"{path}: truncated file, wanted {count} bytes, got {len(data)}",
            expected=count,
            found=len(data),
        )
    return data


def load_idx(images_path: str, labels_path: str) -> Dataset:
    """Load an IDX image/label file pair as a flat-feature dataset.

    Format: 4-byte big-endian magic (0x00000803 for 3-D image files,
    0x00000801 for label files), big-endian 4-byte dimension sizes, then raw
    unsigned bytes. Pixels are scaled to [0, 1].
    """
    with open(images_path, "rb") as f:
        (magic,) = struct.unpack(">I", _read_exact(f, 4, images_path))
        if magic != IDX_IMAGE_MAGIC:
            raise IdxFormatError(
                f"{images_path}: bad magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}"
            )
        n, rows, cols = struct.unpack(">III", _read_exact(f, 12, images_path))
        raw = _read_exact(f, n * rows * cols, images_path)
        pixels = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / 255.0
        features = pixels.reshape(n, rows * cols)
    with open(labels_path, "rb") as f:
        (magic,) = struct.unpack(">I", _read_exact(f, 4, labels_path))
        if magic != IDX_LABEL_MAGIC:
            raise IdxFormatError(
                f"{labels_path}: bad magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}"
            )
        (n_labels,) = struct.unpack(">I", _read_exact(f, 4, labels_path))
        labels = np.frombuffer(_read_exact(f, n_labels, labels_path), dtype=np.uint8).astype(np.int64)
    if n_labels != n:
        raise LengthError(
            f"{n} images but {n_labels} labels",
            expected=n,
            found=n_labels,
        )
    n_classes = int(labels.max()) + 1 if labels.size else 1
    return Dataset(features, labels, n_classes=n_classes)


def inject_label_noise(dataset: Dataset, fraction: float, seed: int) -> Dataset:
    """Resample exactly round(fraction * n) labels to a uniformly chosen wrong class.

    Features are untouched; only the chosen labels change.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    n = len(dataset)
    k = int(round(fraction * n))
    if k == 0 or dataset.n_classes < 2:
        return dataset
    rng = np.random.default_rng(seed)
    picked = rng.choice(n, size=k, replace=False)
    labels = dataset.labels.copy()
    # Uniform over the n_classes - 1 wrong labels: draw an offset in
    # [1, n_classes) and rotate.
    offsets = rng.integers(1, dataset.n_classes, size=k)
    labels[picked] = (labels[picked] + offsets) % dataset.n_classes
    return Dataset(dataset.features, labels, dataset.n_classes)


def split(dataset: Dataset, spec: SplitSpec):
    """Disjoint, exhaustive train/test partition, deterministic per seed."""
    n = len(dataset)
    n_train = int(round(spec.train_fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    perm = np.random.default_rng(_u64(spec.seed)).permutation(n)
    return dataset.subset(perm[:n_train]), dataset.subset(perm[n_train:])


def minibatches(dataset: Dataset, batch_size: int, seed: int, epoch: int):
    """Yield shuffled batches; order is a pure function of (seed, epoch).

    The final short batch is kept.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    n = len(dataset)
    perm = np.random.default_rng([_u64(seed), _u64(epoch)]).permutation(n)
    for start in range(0, n, batch_size):
        idx = perm[start:start + batch_size]
        yield Batch(dataset.features[idx], dataset.labels[idx])


def _u64(seed: int) -> int:
    """Mask a (possibly negative) integer seed into unsigned 64-bit space."""
    return int(seed) & 0xFFFFFFFFFFFFFFFF
