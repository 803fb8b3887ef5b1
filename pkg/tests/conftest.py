import numpy as np
import pytest

from pixelbench.data import Image
from pixelbench.features import FeatureExtractor
from pixelbench.pipeline import Pipeline
from pixelbench.tree import DecisionTreeModel, TreeNode, TreeParams


def identity_extractor(dim: int, n_components: int) -> FeatureExtractor:
    """Feature j is pixel j: mean zero, standard-basis components."""
    return FeatureExtractor(
        mean=np.zeros(dim),
        components=np.eye(dim)[:n_components],
        explained_variance=np.ones(n_components),
    )


def manual_tree(nodes_spec, feature_count, class_count,
                params=None) -> DecisionTreeModel:
    """Build a tree from (feature, threshold, left, right, counts) tuples."""
    nodes = [
        TreeNode(counts=np.array(counts, dtype=np.int64), feature_index=f,
                 threshold=t, left=l, right=r)
        for f, t, l, r, counts in nodes_spec
    ]
    return DecisionTreeModel(nodes=nodes, feature_count=feature_count,
                             class_count=class_count,
                             params=params or TreeParams())


@pytest.fixture
def attackable_pipeline():
    """4x4 grayscale fixture: flipping pixel 0 or pixel 5 above 100 breaches.

    The tree routes on features 0 and 5 (identity features = pixels), so an
    all-zero image is classified 0 and exactly the writes (0,0,v>100) and
    (1,1,v>100) change the prediction.
    """
    extractor = identity_extractor(16, 15)
    model = manual_tree(
        [
            (0, 100.0, 1, 4, [20, 10]),
            (5, 100.0, 2, 3, [20, 5]),
            (-1, float("nan"), -1, -1, [20, 0]),
            (-1, float("nan"), -1, -1, [0, 5]),
            (-1, float("nan"), -1, -1, [0, 5]),
        ],
        feature_count=15, class_count=2,
    )
    image = Image(width=4, height=4, channels=1,
                  pixels=np.zeros(16, dtype=np.uint8))
    return Pipeline(extractor=extractor, model=model), image


@pytest.fixture
def single_leaf_pipeline():
    """A stump that predicts class 0 regardless of input: unattackable."""
    extractor = identity_extractor(16, 15)
    model = manual_tree(
        [(-1, float("nan"), -1, -1, [7, 0])],
        feature_count=15, class_count=2,
    )
    image = Image(width=4, height=4, channels=1,
                  pixels=np.full(16, 50, dtype=np.uint8))
    return Pipeline(extractor=extractor, model=model), image
