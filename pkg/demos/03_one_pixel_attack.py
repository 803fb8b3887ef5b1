"""Attack one image with multiple differential-evolution runs and study
the progression traces.
"""

from pixelbench.attack import AttackConfig
from pixelbench.session import Session, run_campaign, select_targets, train_model
from pixelbench.synthetic import make_synthetic_dataset
from pixelbench.tree import TreeParams

dataset = make_synthetic_dataset(seed=7)
session = Session.create(dataset, base_seed=1)
train_model(session, TreeParams(seed=1), name="victim")
pipeline = session.pipeline_for("victim")

# pick one correctly-classified target from the test split
targets = select_targets(dataset, pipeline, "random", count=5, seed=3)
target_id = next(i for i, correct in targets if correct)
print(f"attacking test image {target_id} "
      f"(true class {dataset.test[target_id][1]}) with 4 independent runs")

config = AttackConfig(pop_size=16, iterations=12, num_attacks=4, seed=5,
                      early_stop=False)
campaign = run_campaign(session, "victim", [target_id], config)

for trace, record in zip(campaign.traces, campaign.records):
    print(f"\nrun {trace.run_index}: "
          f"{'BREACHED at iteration ' + str(trace.success_iteration) if trace.succeeded else 'model held'}")
    print(f"  original prediction {record.pred_original} -> "
          f"attacked prediction {record.pred_attacked}")
    print("  iter  best(x,y,v)      fitness  success")
    for step in trace.records[:6]:
        x, y, values = step.best_candidate.pixels[0]
        print(f"  {step.iteration:4d}  ({x},{y},{values[0]:3d})"
              f"{step.best_fitness:13.4f}  {step.success}")
    if len(trace.records) > 6:
        print(f"  ... {len(trace.records) - 6} more iterations")
