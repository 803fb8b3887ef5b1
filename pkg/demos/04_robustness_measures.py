"""Outcome triples, tallies and the six robustness measures.

Shows the three testing contexts and the display convention, then
computes a full report for an actual campaign.
"""

from pixelbench.attack import AttackConfig
from pixelbench.measures import (OutcomeRecord, classify_outcome, format_measure,
                                 metrics_report, robustness_rates, tally,
                                 tally_from_binary_cells)
from pixelbench.session import (Session, campaign_tally, run_campaign,
                                select_targets, train_model)
from pixelbench.synthetic import make_synthetic_dataset
from pixelbench.tree import TreeParams

# --- outcome triples ------------------------------------------------------
record = OutcomeRecord(object_id=0, true_class=0, pred_original=0,
                       pred_attacked=1)
outcome = classify_outcome(record, positive_class=0)
print(f"truth=0, original=0, attacked=1  ->  code {outcome.code}, "
      f"transition {outcome.transition}")

# --- a hand tally and the six measures ------------------------------------
cells = {"PPP": 4, "PPN": 2, "PNP": 1, "PNN": 1, "NNN": 1, "NNP": 1}
measures = robustness_rates(tally_from_binary_cells(cells))["general"]
print("\nhand tally", cells)
for name, value in measures.items():
    print(f"  {name}: {value if value is not None else '—'}")

# --- the display convention for the three contexts ------------------------
print()
print(format_measure("adversarial-impact rate", "boxast", 1000, 10, 0.52))
print(format_measure("attack-breach rate", "boxdot", 50, 1, 0.1))
print(format_measure("model-robustness rate", "circledast", 1, 10, 0.7))

# --- a real campaign end to end -------------------------------------------
dataset = make_synthetic_dataset(seed=7)
session = Session.create(dataset, base_seed=1)
train_model(session, TreeParams(seed=1), name="m")
pipeline = session.pipeline_for("m")
targets = [i for i, _ in select_targets(dataset, pipeline, "random",
                                        count=8, seed=2)]
campaign = run_campaign(session, "m", targets,
                        AttackConfig(pop_size=12, iterations=10, num_attacks=3,
                                     seed=4, early_stop=False))
report = metrics_report(campaign_tally(session, campaign))
print(f"\ncampaign over {len(targets)} objects x 3 attacks "
      f"{report.context_label}:")
print(f"  original accuracy {report.original['accuracy']:.3f}, "
      f"attacked accuracy {report.attacking['accuracy']:.3f}")
for line in report.display:
    print(" ", line)
