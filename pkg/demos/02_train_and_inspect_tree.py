"""Train a CART model and inspect its structure, flows and statistics."""

import numpy as np

from pixelbench.session import Session, train_model
from pixelbench.synthetic import make_synthetic_dataset
from pixelbench.tree import (TreeParams, aggregate_flows, feature_importance,
                             feature_usage, trace_path)
from pixelbench.features import project

dataset = make_synthetic_dataset(seed=7)
session = Session.create(dataset, base_seed=1)
entry = train_model(session, TreeParams(max_depth=4, seed=1), name="demo")
model = entry.model
print(f"model {entry.name}: {len(model.nodes)} nodes, depth {model.depth()}, "
      f"test accuracy {entry.accuracy:.3f}")

print("\nnodes (index: rule, class counts):")
for idx, node in enumerate(model.nodes):
    if node.is_leaf:
        print(f"  {idx}: leaf {node.counts.tolist()}")
    else:
        print(f"  {idx}: feature[{node.feature_index}] <= {node.threshold:.2f} "
              f"-> {node.left}/{node.right}  {node.counts.tolist()}")

print("\nfeature importance:", np.round(feature_importance(model), 3))
print("feature usage:     ", feature_usage(model).tolist())

# data flows: how correct and wrong test samples traverse the tree
pipeline = session.pipeline_for("demo")
tagged = []
for image, label in dataset.test[:30]:
    feats = project(session.extractor, image)
    predicted, _ = pipeline.predict_image(image)
    tagged.append((feats, "correct" if predicted == label else "wrong"))
print("\nsample decision path:", trace_path(model, tagged[0][0]))
print("edge flows (parent->child: counts per tag):")
for (parent, child), counts in sorted(aggregate_flows(model, tagged).items()):
    print(f"  {parent}->{child}: {counts}")
