"""Image -> PCA features -> decision tree, bundled for attack and test runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Image, flatten
from .features import FeatureExtractor, project_pixels
from .tree import DecisionTreeModel, predict_batch


@dataclass(frozen=True)
class Pipeline:
    extractor: FeatureExtractor
    model: DecisionTreeModel

    def predict_pixels(self, pixel_matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Classes and class distributions for (m, D) flattened images."""
        feats = project_pixels(self.extractor, pixel_matrix)
        return predict_batch(self.model, feats)

    def predict_image(self, image: Image) -> tuple[int, np.ndarray]:
        classes, dists = self.predict_pixels(flatten(image)[None, :])
        return int(classes[0]), dists[0]

    def predict_images(self, images) -> tuple[np.ndarray, np.ndarray]:
        pixels = np.stack([flatten(img) for img in images])
        return self.predict_pixels(pixels)
