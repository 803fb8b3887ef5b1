import numpy as np
import pytest

from pixelbench.data import Image
from pixelbench.errors import (DegenerateDataError, DimensionError,
                               InsufficientDataError)
from pixelbench.features import fit_pca, project, project_pixels


def gray_images(matrix):
    """Wrap an (n, d) integer matrix as 1 x d grayscale images."""
    matrix = np.asarray(matrix, dtype=np.uint8)
    return [Image(width=matrix.shape[1], height=1, channels=1, pixels=row)
            for row in matrix]


def covariance_eigensolve(matrix, k):
    """Independent oracle: np.cov + full symmetric eigendecomposition."""
    matrix = np.asarray(matrix, dtype=np.float64)
    cov = np.cov(matrix, rowvar=False, ddof=1)
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(values)[::-1][:k]
    return values[order], vectors[:, order].T


class TestFitPca:
    def test_zero_variance_is_degenerate(self):
        images = gray_images(np.full((100, 4), 9))
        with pytest.raises(DegenerateDataError):
            fit_pca(images, n_components=2)

    def test_too_few_samples(self):
        images = gray_images(np.arange(8).reshape(2, 4))
        with pytest.raises(InsufficientDataError):
            fit_pca(images, n_components=2)

    def test_perfect_correlation_gives_diagonal_component(self):
        images = gray_images([[0, 0], [1, 1], [2, 2], [3, 3]])
        extractor = fit_pca(images, n_components=1)
        expected = np.array([1.0, 1.0]) / np.sqrt(2.0)
        assert np.allclose(extractor.components[0], expected, atol=1e-12)
        assert (extractor.components[0] > 0).all()

    def test_matches_covariance_eigensolve_oracle(self):
        rng = np.random.default_rng(42)
        matrix = rng.integers(0, 256, size=(50, 10))
        extractor = fit_pca(gray_images(matrix), n_components=5)
        oracle_values, oracle_vectors = covariance_eigensolve(matrix, 5)
        assert np.allclose(extractor.explained_variance, oracle_values, rtol=1e-9)
        for fitted, reference in zip(extractor.components, oracle_vectors):
            # compare up to sign
            assert min(np.abs(fitted - reference).max(),
                       np.abs(fitted + reference).max()) < 1e-6

    def test_components_are_orthonormal(self):
        rng = np.random.default_rng(3)
        matrix = rng.integers(0, 256, size=(40, 12))
        extractor = fit_pca(gray_images(matrix), n_components=6)
        gram = extractor.components @ extractor.components.T
        assert np.abs(gram - np.eye(6)).max() < 1e-8

    def test_explained_variance_is_nonincreasing(self):
        rng = np.random.default_rng(4)
        matrix = rng.integers(0, 256, size=(30, 8))
        extractor = fit_pca(gray_images(matrix), n_components=4)
        assert (np.diff(extractor.explained_variance) <= 0).all()

    def test_deterministic_serialization(self):
        rng = np.random.default_rng(9)
        matrix = rng.integers(0, 256, size=(25, 6))
        a = fit_pca(gray_images(matrix), n_components=3, seed=1)
        b = fit_pca(gray_images(matrix), n_components=3, seed=1)
        assert a.tobytes() == b.tobytes()

    def test_largest_magnitude_entry_is_positive(self):
        rng = np.random.default_rng(10)
        matrix = rng.integers(0, 256, size=(30, 7))
        extractor = fit_pca(gray_images(matrix), n_components=5)
        for row in extractor.components:
            assert row[np.argmax(np.abs(row))] > 0


class TestProject:
    def test_mean_image_projects_to_zero(self):
        # data chosen so the mean image is integral, hence representable
        matrix = np.array([[10, 20], [30, 40], [50, 60], [10, 40]])
        extractor = fit_pca(gray_images(matrix), n_components=1)
        mean_img = Image(width=2, height=1, channels=1,
                         pixels=matrix.mean(axis=0).astype(np.uint8))
        assert np.abs(project(extractor, mean_img)).max() < 1e-10

    def test_toy_projection_value(self):
        images = gray_images([[0, 0], [1, 1], [2, 2], [3, 3]])
        extractor = fit_pca(images, n_components=1)
        point = Image(width=2, height=1, channels=1,
                      pixels=np.array([5, 5], dtype=np.uint8))
        value = project(extractor, point)[0]
        assert value == pytest.approx(3.5 * np.sqrt(2.0), abs=1e-9)

    def test_shape_mismatch(self):
        images = gray_images([[0, 0], [1, 1], [2, 2], [3, 3]])
        extractor = fit_pca(images, n_components=1)
        wrong = Image(width=3, height=1, channels=1,
                      pixels=np.zeros(3, dtype=np.uint8))
        with pytest.raises(DimensionError):
            project(extractor, wrong)
        with pytest.raises(DimensionError):
            project_pixels(extractor, np.zeros((2, 3)))

    def test_reconstruction_beats_other_orthonormal_projections(self):
        rng = np.random.default_rng(77)
        matrix = rng.integers(0, 256, size=(20, 6)).astype(np.float64)
        k = 3
        extractor = fit_pca(gray_images(matrix.astype(np.uint8)), n_components=k)
        centered = matrix - matrix.mean(axis=0)

        def reconstruction_error(basis):
            projected = centered @ basis.T
            return float(((centered - projected @ basis) ** 2).sum())

        fitted_error = reconstruction_error(extractor.components)
        # the exhaustive eigensolve oracle achieves the same optimum
        _, oracle_vectors = covariance_eigensolve(matrix, k)
        assert fitted_error == pytest.approx(reconstruction_error(oracle_vectors),
                                             rel=1e-9)
        # and no random orthonormal projection does better
        for trial in range(200):
            q, _ = np.linalg.qr(rng.normal(size=(6, k)))
            assert fitted_error <= reconstruction_error(q.T) + 1e-9
