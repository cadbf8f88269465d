"""Long-tailed dataset construction, synthesis, downsampling, subset tagging,
and the on-disk CSV format.

Train splits follow an imbalance profile; test splits are always balanced.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .mathutils import Rng

FORMAT_MAGIC = "longtail-csv v1"

MANY = "many"
MEDIUM = "medium"
FEW = "few"


@dataclass(frozen=True)
class ImbalanceProfile:
    """Shape of a long-tailed count profile.

    ``rho`` is the imbalance ratio: most frequent class count over least
    frequent. ``kind`` is "exponential" (geometric decay across classes) or
    "step" (head half at n_max, tail half at n_max / rho).
    """

    kind: str = "exponential"
    rho: float = 100.0
    n_max: int = 500
    num_classes: int = 10

    def __post_init__(self):
        if self.kind not in ("exponential", "step"):
            raise ValueError(f"profile kind must be 'exponential' or 'step', got {self.kind!r}")
        if not (isinstance(self.rho, (int, float)) and self.rho >= 1.0):
            raise ValueError(f"imbalance ratio must be >= 1, got {self.rho!r}")
        if self.n_max < 1:
            raise ValueError("n_max must be a positive integer")
        if self.num_classes < 1:
            raise ValueError("num_classes must be a positive integer")
        if self.num_classes < 2 and self.rho > 1.0:
            raise ValueError("an imbalanced profile (rho > 1) needs at least 2 classes")


@dataclass
class LabeledDataset:
    """Feature matrix with integer labels; class counts derive from labels."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be an (N, d) matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must be a vector matching the feature rows")
        if not np.isfinite(self.features).all():
            raise ValueError("features must be finite")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError("labels must lie in [0, num_classes)")

    @property
    def dimension(self):
        return self.features.shape[1]

    @property
    def class_counts(self):
        return np.bincount(self.labels, minlength=self.num_classes).astype(np.int64)

    def __len__(self):
        return self.features.shape[0]


@dataclass(frozen=True)
class SubsetTags:
    """Per-class many/medium/few tag derived from training counts."""

    tags: tuple
    many_thresh: int = 100
    few_thresh: int = 20

    def classes_tagged(self, tag):
        return np.array([i for i, t in enumerate(self.tags) if t == tag], dtype=np.int64)


def make_longtail_counts(profile):
    """Per-class training counts for a profile, sorted nonincreasing.

    Exponential: n_i = round(n_max * rho^(-i / (C - 1))) for i = 0..C-1.
    Step: first ceil(C / 2) classes at n_max, the rest at round(n_max / rho).
    Counts are clamped to at least 1.
    """
    if not isinstance(profile, ImbalanceProfile):
        raise ValueError("profile must be an ImbalanceProfile")
    C, n_max, rho = profile.num_classes, profile.n_max, float(profile.rho)
    if profile.kind == "exponential":
        if C == 1:
            counts = np.array([n_max], dtype=np.int64)
        else:
            i = np.arange(C, dtype=np.float64)
            raw = n_max * rho ** (-i / (C - 1))
            counts = np.floor(raw + 0.5).astype(np.int64)
    else:
        head = (C + 1) // 2
        tail_count = int(math.floor(n_max / rho + 0.5))
        counts = np.array([n_max] * head + [tail_count] * (C - head), dtype=np.int64)
    return np.maximum(counts, 1)


def _orthonormalish_rows(rng, num_rows, dim):
    """Rows of a seeded random frame: orthonormal while num_rows <= dim,
    merely unit-norm beyond that."""
    g = rng.normal((num_rows, dim))
    out = np.zeros_like(g)
    for r in range(num_rows):
        v = g[r].copy()
        for prev in range(min(r, dim)):
            v -= (v @ out[prev]) * out[prev]
        norm = np.linalg.norm(v)
        if norm < 1e-12:  # degenerate draw; keep the raw direction
            v = g[r]
            norm = np.linalg.norm(v)
        out[r] = v / norm
    return out


def synth_gaussian_mixture(counts, dim, separation, seed, per_class_test):
    """Synthesize a Gaussian-mixture classification problem.

    Class means are a seeded orthonormal-ish frame scaled to radius
    ``separation``; samples are unit-variance isotropic around them. The
    train split follows ``counts`` per class, the test split is balanced
    with ``per_class_test`` samples per class. Identical seeds reproduce
    the datasets bit for bit.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 1 or counts.size == 0 or np.any(counts < 1):
        raise ValueError("counts must be a non-empty vector of positive integers")
    if dim < 2:
        raise ValueError("feature dimension must be at least 2")
    if not (isinstance(separation, (int, float)) and math.isfinite(separation) and separation >= 0):
        raise ValueError(f"separation must be a nonnegative real, got {separation!r}")
    if per_class_test < 1:
        raise ValueError("per_class_test must be a positive integer")

    C = counts.size
    rng = Rng(seed)
    means = separation * _orthonormalish_rows(rng, C, dim)

    train_feats = [means[c] + rng.normal((int(counts[c]), dim)) for c in range(C)]
    test_feats = [means[c] + rng.normal((per_class_test, dim)) for c in range(C)]
    train_labels = np.repeat(np.arange(C, dtype=np.int64), counts)
    test_labels = np.repeat(np.arange(C, dtype=np.int64), per_class_test)
    train = LabeledDataset(np.vstack(train_feats), train_labels, C)
    test = LabeledDataset(np.vstack(test_feats), test_labels, C)
    return train, test


def downsample_to_profile(data, counts, seed):
    """Uniform per-class subsample (without replacement) down to ``counts``.

    Selected rows keep their original order. Raises if any class has fewer
    rows than requested.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (data.num_classes,):
        raise ValueError(f"counts must have one entry per class ({data.num_classes})")
    available = data.class_counts
    for c in range(data.num_classes):
        if counts[c] > available[c]:
            raise ValueError(
                f"class {c}: requested {int(counts[c])} samples but only {int(available[c])} available"
            )
    rng = Rng(seed)
    keep = []
    for c in range(data.num_classes):
        rows = np.flatnonzero(data.labels == c)
        keep.append(rows[rng.subset(rows.size, int(counts[c]))])
    keep = np.sort(np.concatenate(keep))
    return LabeledDataset(data.features[keep], data.labels[keep], data.num_classes)


def subset_tags(counts, many_thresh=100, few_thresh=20):
    """Tag classes by training count: many (> many_thresh), few
    (< few_thresh), medium otherwise (both boundaries inclusive)."""
    if not (isinstance(many_thresh, (int, np.integer)) and isinstance(few_thresh, (int, np.integer))):
        raise ValueError("thresholds must be integers")
    if not many_thresh > few_thresh > 0:
        raise ValueError(f"need many_thresh > few_thresh > 0, got {many_thresh}, {few_thresh}")
    counts = np.asarray(counts, dtype=np.int64)
    tags = []
    for n in counts:
        if n > many_thresh:
            tags.append(MANY)
        elif n < few_thresh:
            tags.append(FEW)
        else:
            tags.append(MEDIUM)
    return SubsetTags(tuple(tags), int(many_thresh), int(few_thresh))


def save_dataset(data, path):
    """Write the on-disk format: a header line
    ``longtail-csv v1, C=<int>, d=<int>`` then one ``label,f_1,...,f_d``
    row per sample with shortest round-trip float representations."""
    lines = [f"{FORMAT_MAGIC}, C={data.num_classes}, d={data.dimension}"]
    for row in range(len(data)):
        feats = ",".join(repr(float(v)) for v in data.features[row])
        lines.append(f"{int(data.labels[row])},{feats}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path):
    """Read a file written by ``save_dataset``; counts derive from labels."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        parts = [p.strip() for p in header.split(",")]
        if (
            len(parts) != 3
            or parts[0] != FORMAT_MAGIC
            or not parts[1].startswith("C=")
            or not parts[2].startswith("d=")
        ):
            raise ValueError(f"{path}: not a {FORMAT_MAGIC} file (header {header!r})")
        try:
            num_classes = int(parts[1][2:])
            dim = int(parts[2][2:])
        except ValueError:
            raise ValueError(f"{path}: malformed header {header!r}") from None
        labels = []
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != dim + 1:
                raise ValueError(f"{path}:{lineno}: expected {dim + 1} fields, got {len(cells)}")
            labels.append(int(cells[0]))
            rows.append([float(v) for v in cells[1:]])
    features = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return LabeledDataset(features, np.array(labels, dtype=np.int64), num_classes)
