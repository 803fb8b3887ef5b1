"""PCA feature extraction.

Images are flattened to raw 0-255 intensity vectors, centered on the
training mean, and projected onto the top principal directions of the
sample covariance (15 by default). There is no variance scaling. The
eigensolve runs on the full covariance matrix, so the result is
deterministic for a given training set; the ``seed`` argument is part of
the fitting contract but unused by this solver.

Sign convention: within each component the entry of largest magnitude
(lowest index on ties) is made positive, so serialized extractors are
reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Image, flatten, flatten_many
from .errors import DegenerateDataError, DimensionError, InsufficientDataError

DEFAULT_COMPONENTS = 15


@dataclass(frozen=True)
class FeatureExtractor:
    mean: np.ndarray                # (D,) float64
    components: np.ndarray          # (k, D) float64, orthonormal rows
    explained_variance: np.ndarray  # (k,) float64, nonincreasing

    def __post_init__(self):
        for name in ("mean", "components", "explained_variance"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def input_dim(self) -> int:
        return self.components.shape[1]

    def tobytes(self) -> bytes:
        """Canonical byte serialization (used for determinism checks)."""
        return (self.mean.tobytes() + self.components.tobytes()
                + self.explained_variance.tobytes())


def _fix_signs(components: np.ndarray) -> np.ndarray:
    fixed = components.copy()
    for row in fixed:
        anchor = int(np.argmax(np.abs(row)))
        if row[anchor] < 0:
            row *= -1.0
    return fixed


def fit_pca(train_images, n_components: int = DEFAULT_COMPONENTS,
            seed: int = 0) -> FeatureExtractor:
    """Fit a PCA extractor on a list of equally-shaped images."""
    n = len(train_images)
    if n < n_components + 1:
        raise InsufficientDataError(
            f"need at least {n_components + 1} images to fit {n_components} "
            f"components, got {n}"
        )
    x = flatten_many(train_images)
    mean = x.mean(axis=0)
    centered = x - mean
    if not np.any(centered):
        raise DegenerateDataError("training images have zero variance")
    cov = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues, kind="stable")[::-1][:n_components]
    components = _fix_signs(eigenvectors[:, order].T)
    variance = np.clip(eigenvalues[order], 0.0, None)
    return FeatureExtractor(mean=mean, components=components,
                            explained_variance=variance)


def project(extractor: FeatureExtractor, image: Image) -> np.ndarray:
    """Project one image into feature space: components @ (x - mean)."""
    x = flatten(image)
    if x.size != extractor.input_dim:
        raise DimensionError(
            f"image has {x.size} values but extractor expects {extractor.input_dim}"
        )
    return extractor.components @ (x - extractor.mean)


def project_pixels(extractor: FeatureExtractor, pixel_matrix: np.ndarray) -> np.ndarray:
    """Project an (m, D) matrix of flattened images to (m, k) features."""
    pixel_matrix = np.asarray(pixel_matrix, dtype=np.float64)
    if pixel_matrix.shape[-1] != extractor.input_dim:
        raise DimensionError(
            f"pixel rows have {pixel_matrix.shape[-1]} values but extractor "
            f"expects {extractor.input_dim}"
        )
    return (pixel_matrix - extractor.mean) @ extractor.components.T
