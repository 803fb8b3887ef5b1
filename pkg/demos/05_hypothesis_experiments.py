"""Run the stock hypothesis experiments at desk scale and read the curves.

H1 varies tree depth, H2 the minimum sample split, H3 the number of
features considered per split, H4 compares class vulnerability. The same
targets and attack seeds are reused for every model in a grid, so the
curves compare paired runs.
"""

from pixelbench.session import execute_script, script_preset
from pixelbench.synthetic import make_synthetic_dataset

# noisier four-class data, so model capacity actually changes the outcome
dataset = make_synthetic_dataset(n_train=200, n_test=100, class_count=4,
                                 noise=60.0, seed=7)

for name in ("H1", "H4"):
    script = script_preset(name, dataset_name=dataset.name, scale="desk", seed=1)
    report = execute_script(script, dataset, base_seed=1)
    print(f"\n=== {name}: models {report.model_names} ===")
    print("accuracy:", {m: round(a, 3) for m, a in report.accuracy.items()})
    for model in report.model_names:
        breach = report.curves[model]["attack-breach rate"]
        print(f"  {model} attack-breach rate by iteration: "
              f"{[round(v, 2) if v is not None else None for v in breach]}")
    if name == "H4":
        matrix = report.class_matrices[report.model_names[0]]
        print("  per-class breached-object counts (rows = classes):")
        for c, row in enumerate(matrix):
            print(f"    {dataset.class_names[c]}: {row}")
