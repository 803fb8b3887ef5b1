"""pixelbench: test decision-tree image classifiers against one-pixel attacks."""

from .attack import (AttackConfig, AttackTrace, PixelBounds, PixelPerturbation,
                     apply_perturbation, de_attack, fitness, success)
from .data import (CIFAR10_CLASS_NAMES, DEFAULT_CLASS_NAMES,
                   FASHION_MNIST_CLASS_NAMES, MNIST_CLASS_NAMES, Dataset, Image,
                   flatten, load_cifar10, load_idx)
from .features import FeatureExtractor, fit_pca, project
from .measures import (MetricsReport, Outcome, OutcomeRecord, OutcomeTally,
                       classify_outcome, evolving_stats, format_measure,
                       metrics_report, standard_stats, robustness_rates, tally)
from .pipeline import Pipeline
from .session import (Campaign, ExperimentReport, ExperimentScript, ModelEntry,
                      RunSpec, Session, execute_script, load_session,
                      run_campaign, save_session, script_preset, select_targets,
                      train_model)
from .tree import (DecisionTreeModel, TreeNode, TreeParams, aggregate_flows,
                   feature_importance, feature_usage, fit_tree, predict,
                   trace_path)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
