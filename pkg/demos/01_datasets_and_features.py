"""Load image data, inspect it, and build the PCA feature space.

Everything here runs on the bundled synthetic generator so no real
dataset is required; swap in `load_idx` / `load_cifar10` paths to use
MNIST, Fashion-MNIST or CIFAR-10 files.
"""

import numpy as np

from pixelbench.data import flatten
from pixelbench.features import fit_pca, project
from pixelbench.synthetic import make_synthetic_dataset

dataset = make_synthetic_dataset(n_train=150, n_test=60, seed=7)
print(f"dataset {dataset.name!r}: {len(dataset.train)} train / "
      f"{len(dataset.test)} test images of shape {dataset.image_shape}")
print(f"classes: {dataset.class_names}")

image, label = dataset.train[0]
print(f"\nfirst training image (class {dataset.class_names[label]}):")
print(image.as_array()[:, :, 0])
print(f"flattened to a vector of length {flatten(image).size}")

extractor = fit_pca([img for img, _ in dataset.train], n_components=15, seed=7)
print(f"\nfitted PCA: {extractor.n_components} components over "
      f"{extractor.input_dim} pixels")
print("explained variance (top 5):",
      np.round(extractor.explained_variance[:5], 1))

features = project(extractor, image)
print("feature vector of the first image:", np.round(features, 2))
