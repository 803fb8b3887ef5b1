"""Experiment sessions: orchestration, scripted runs, persistence.

A session bundles a dataset reference (checksum always, pixels optionally
embedded), one fitted feature extractor, trained models, attack campaigns
with their full traces and outcome records, and computed reports. A saved
session replays every metric and curve without re-running attacks.

File format: a STORED zip archive with fixed timestamps containing a
canonical-JSON ``manifest.json`` plus content-addressed binary blocks
under ``blobs/<sha256>``. Numeric payloads round-trip bit-exactly; saving
a freshly loaded session reproduces the file byte for byte. The manifest
embeds a schema version; loaders refuse unknown major versions.

Seeding: scripts use one base seed. The extractor uses the base seed, the
grid's trees reuse their params' seeds, and target ``j`` of a campaign
attacks with base seed ``mix64(config.seed, j)`` so every model in a grid
faces identical targets and identical attack randomness (paired
comparisons).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import zipfile
from dataclasses import dataclass, field

import numpy as np

from .attack import (AttackConfig, AttackTrace, IterationRecord, PixelBounds,
                     PixelPerturbation, de_attack, with_seed)
from .data import Dataset, Image, flatten_many
from .errors import ConfigError, ConsistencyError, IntegrityError, VersionError
from .features import DEFAULT_COMPONENTS, FeatureExtractor, fit_pca, project_pixels
from .measures import (MEASURE_NAMES, OutcomeRecord, OutcomeTally, evolving_stats,
                       metrics_report, robustness_measures, tally, transition_of)
from .pipeline import Pipeline
from .rng import child_generator, mix64
from .tree import DecisionTreeModel, TreeNode, TreeParams, fit_tree, predict_batch

SCHEMA_MAJOR = 1
SCHEMA_MINOR = 0

DATASET_PREFIXES = {"cifar10": "c", "mnist": "m", "fashion-mnist": "f"}

SCALE_PRESETS = {
    # population / iterations sized after the published attack scale
    "full": {"pop_size": 400, "iterations": 75, "num_attacks": 10,
              "target_count": 100, "targets_per_class": 100},
    # small enough for a laptop test cycle
    "desk": {"pop_size": 12, "iterations": 10, "num_attacks": 2,
             "target_count": 12, "targets_per_class": 2},
}


@dataclass
class TargetRef:
    object_id: int        # index into the dataset's test split
    true_class: int
    pred_original: int
    image: Image

    @property
    def originally_correct(self) -> bool:
        return self.pred_original == self.true_class


@dataclass
class ModelEntry:
    model_id: str
    name: str
    params: TreeParams
    model: DecisionTreeModel
    accuracy: float | None = None


@dataclass
class Campaign:
    campaign_id: str
    model_id: str
    config: AttackConfig
    targets: list[TargetRef]
    traces: list[AttackTrace]
    trace_targets: list[int]  # target ordinal per trace
    records: list[OutcomeRecord]
    status: str = "complete"  # "complete" | "cancelled"


@dataclass
class Session:
    dataset_name: str
    dataset_checksum: str
    class_names: tuple[str, ...]
    source_format: str
    image_shape: tuple[int, int, int]
    base_seed: int
    dataset: Dataset | None = None
    extractor: FeatureExtractor | None = None
    models: list[ModelEntry] = field(default_factory=list)
    campaigns: list[Campaign] = field(default_factory=list)
    reports: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @staticmethod
    def create(dataset: Dataset, base_seed: int = 0, metadata: dict | None = None) -> "Session":
        # fixed modelling choices, recorded so saved experiments are
        # self-describing: PCA is fitted on the full training split over
        # raw 0-255 intensities
        defaults = {"pca_training_split": "full-train",
                    "pixel_scale": "raw-0-255"}
        return Session(
            dataset_name=dataset.name,
            dataset_checksum=dataset.checksum(),
            class_names=tuple(dataset.class_names),
            source_format=dataset.source_format,
            image_shape=dataset.image_shape,
            base_seed=base_seed,
            dataset=dataset,
            metadata={**defaults, **(metadata or {})},
        )

    def model_entry(self, model_id: str) -> ModelEntry:
        for entry in self.models:
            if entry.model_id == model_id or entry.name == model_id:
                return entry
        raise ConsistencyError(f"unknown model {model_id!r}")

    def pipeline_for(self, model_id: str) -> Pipeline:
        if self.extractor is None:
            raise ConsistencyError("session has no fitted feature extractor")
        return Pipeline(extractor=self.extractor, model=self.model_entry(model_id).model)


DEFAULT_FLOW_TAGS = {
    "original-correct": "original-correct",
    "original-wrong": "original-wrong",
    "attacked": "attacked",
}


@dataclass
class RunSpec:
    """Which images feed a test run, against which model.

    ``tags`` relabels the three flow categories (original-correct,
    original-wrong, attacked) for the tree's data-flow display.
    """

    model_id: str
    target_ids: tuple[int, ...] = ()      # test-split indices shown as originals
    campaign_ids: tuple[str, ...] = ()    # include these campaigns' attack images
    test_indices: tuple[int, ...] = ()    # extra test-split images
    tags: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.target_ids or self.campaign_ids or self.test_indices):
            raise ConfigError("run spec selects no data")
        unknown = set(self.tags) - set(DEFAULT_FLOW_TAGS)
        if unknown:
            raise ConfigError(f"unknown flow categories: {sorted(unknown)}")

    def tag(self, category: str) -> str:
        return self.tags.get(category, DEFAULT_FLOW_TAGS[category])


@dataclass
class ExperimentScript:
    name: str
    model_grid: list[tuple[str, TreeParams]]
    attack: AttackConfig
    target_strategy: str = "random"  # "random" | "per-class"
    target_count: int = 12
    targets_per_class: int = 2
    n_components: int = DEFAULT_COMPONENTS

    def __post_init__(self):
        if not self.model_grid:
            raise ConfigError("experiment script needs a nonempty model grid")


@dataclass
class ExperimentReport:
    script_name: str
    model_names: list[str]
    accuracy: dict[str, float]
    curves: dict[str, dict[str, list[float | None]]]
    cumulative_successes: dict[str, list[int]]
    class_matrices: dict[str, list[list[int]]]
    iterations: list[int]
    session: Session


def ensure_extractor(session: Session, n_components: int = DEFAULT_COMPONENTS) -> FeatureExtractor:
    """Fit (once) the session's PCA extractor on the full training split."""
    if session.extractor is None:
        if session.dataset is None:
            raise ConsistencyError("session carries no dataset pixels to fit on")
        images = [img for img, _ in session.dataset.train]
        session.extractor = fit_pca(images, n_components=n_components,
                                    seed=session.base_seed)
    return session.extractor


def evaluate_accuracy(pipeline: Pipeline, split) -> float:
    if not split:
        raise ConsistencyError("cannot evaluate accuracy on an empty split")
    labels = np.array([label for _, label in split])
    feats = project_pixels(pipeline.extractor, flatten_many([img for img, _ in split]))
    predicted, _ = predict_batch(pipeline.model, feats)
    return float((predicted == labels).mean())


def train_model(session: Session, params: TreeParams, name: str | None = None,
                n_components: int = DEFAULT_COMPONENTS) -> ModelEntry:
    """Fit a tree on the session's training split and record test accuracy."""
    if session.dataset is None:
        raise ConsistencyError("session carries no dataset pixels to train on")
    extractor = ensure_extractor(session, n_components)
    feats = project_pixels(extractor, flatten_many([img for img, _ in session.dataset.train]))
    labels = [label for _, label in session.dataset.train]
    model = fit_tree(feats, labels, params, class_count=session.dataset.class_count)
    entry = ModelEntry(
        model_id=f"m{len(session.models):04d}",
        name=name or f"model-{len(session.models)}",
        params=params,
        model=model,
    )
    pipeline = Pipeline(extractor=extractor, model=model)
    if session.dataset.test:
        entry.accuracy = evaluate_accuracy(pipeline, session.dataset.test)
    session.models.append(entry)
    return entry


def select_targets(dataset: Dataset, pipeline: Pipeline, strategy: str,
                   count: int = 0, seed: int = 0,
                   ids=None) -> list[tuple[int, bool]]:
    """Pick attack targets from the test split.

    Returns ``(object_id, correctly_classified)`` pairs. ``random`` draws
    ``count`` distinct indices; ``per-class`` draws ``count`` per class
    (all members when a class is smaller); ``manual`` echoes ``ids``.
    """
    split = dataset.test
    labels = np.array([label for _, label in split])
    if strategy == "manual":
        chosen = [int(i) for i in (ids or [])]
        for i in chosen:
            if not 0 <= i < len(split):
                raise ConsistencyError(f"target id {i} outside the test split")
    elif strategy == "random":
        if count > len(split):
            raise ConsistencyError(f"cannot sample {count} of {len(split)} test images")
        rng = child_generator(seed, 0)
        chosen = sorted(int(i) for i in
                        rng.choice(len(split), size=count, replace=False))
    elif strategy == "per-class":
        chosen = []
        for c in range(dataset.class_count):
            members = np.nonzero(labels == c)[0]
            take = min(count, members.size)
            rng = child_generator(seed, c + 1)
            picked = rng.choice(members.size, size=take, replace=False)
            chosen.extend(int(members[i]) for i in picked)
        chosen.sort()
    else:
        raise ConfigError(f"unknown target strategy {strategy!r}")

    if not chosen:
        return []
    predicted, _ = pipeline.predict_images([split[i][0] for i in chosen])
    return [(i, bool(predicted[j] == split[i][1])) for j, i in enumerate(chosen)]


def run_campaign(session: Session, model_id: str, target_ids,
                 config: AttackConfig, on_event=None,
                 cancelled=None) -> Campaign:
    """Attack each target ``config.num_attacks`` times and record outcomes.

    Target ordinal ``j`` uses attack base seed ``mix64(config.seed, j)``.
    ``on_event(target_ordinal, run_index, record)`` streams progress.
    """
    if session.dataset is None:
        raise ConsistencyError("session carries no dataset pixels to attack")
    pipeline = session.pipeline_for(model_id)
    split = session.dataset.test
    targets: list[TargetRef] = []
    for object_id in target_ids:
        image, true_class = split[object_id]
        pred, _ = pipeline.predict_image(image)
        targets.append(TargetRef(object_id=int(object_id), true_class=int(true_class),
                                 pred_original=int(pred), image=image))

    campaign = Campaign(
        campaign_id=f"c{len(session.campaigns):04d}",
        model_id=session.model_entry(model_id).model_id,
        config=config,
        targets=targets,
        traces=[],
        trace_targets=[],
        records=[],
    )
    for ordinal, target in enumerate(targets):
        if cancelled is not None and cancelled():
            campaign.status = "cancelled"
            break
        run_config = with_seed(config, mix64(config.seed, ordinal))
        sink = None
        if on_event is not None:
            sink = lambda run_index, record, _ordinal=ordinal: on_event(
                _ordinal, run_index, record)
        traces = de_attack(pipeline, target.image, target.true_class, run_config,
                           on_event=sink, cancelled=cancelled)
        for trace in traces:
            pred_attacked, _ = pipeline.predict_image(trace.final_image)
            campaign.traces.append(trace)
            campaign.trace_targets.append(ordinal)
            campaign.records.append(OutcomeRecord(
                object_id=target.object_id,
                true_class=target.true_class,
                pred_original=target.pred_original,
                pred_attacked=int(pred_attacked),
                attack_run_index=trace.run_index,
            ))
        if cancelled is not None and cancelled():
            campaign.status = "cancelled"
            break
    session.campaigns.append(campaign)
    return campaign


def campaign_context(campaign: Campaign) -> str:
    n_objects = len({r.object_id for r in campaign.records})
    k = campaign.config.num_attacks
    if n_objects == 1 and k > 1:
        return "circledast"
    if k == 1:
        return "boxdot"
    return "boxast"


def campaign_tally(session: Session, campaign: Campaign) -> OutcomeTally:
    return tally(campaign.records, campaign_context(campaign),
                 class_count=len(session.class_names))


def measure_curves(campaign: Campaign, class_count: int) -> dict[str, list[float | None]]:
    """Per-iteration general measure values from recorded predictions.

    The attacked prediction at iteration t is the best candidate's class
    recorded at t, carried forward once a run stops early; runs that
    succeed in the initial population contribute their final prediction
    from iteration 1 on.
    """
    horizon = max((len(t.records) for t in campaign.traces), default=0)
    curves: dict[str, list[float | None]] = {name: [] for name in MEASURE_NAMES}
    for t in range(1, horizon + 1):
        counts = {name: 0 for name in
                  ("correct_correct", "correct_wrong", "wrong_correct",
                   "wrong_wrong_same", "wrong_wrong_different")}
        for trace, record in zip(campaign.traces, campaign.records):
            if trace.records:
                idx = min(t, len(trace.records)) - 1
                pred = trace.records[idx].predicted_class
            else:
                pred = record.pred_attacked
            snapshot = OutcomeRecord(
                object_id=record.object_id, true_class=record.true_class,
                pred_original=record.pred_original, pred_attacked=pred,
                attack_run_index=record.attack_run_index,
            )
            counts[transition_of(snapshot)] += 1
        values = robustness_measures(
            counts["correct_correct"], counts["correct_wrong"],
            counts["wrong_correct"], counts["wrong_wrong_same"],
            counts["wrong_wrong_different"],
        )
        for name in MEASURE_NAMES:
            v = float(values[name])
            curves[name].append(None if np.isnan(v) else v)
    return curves


def script_preset(name: str, dataset_name: str = "", scale: str = "desk",
                  seed: int = 0, n_components: int = DEFAULT_COMPONENTS) -> ExperimentScript:
    """Build one of the four stock hypothesis scripts.

    Model names follow the case-study convention: dataset prefix, rank,
    then the varied hyperparameter (depth D, min-split S, max-features F).
    Max-features values larger than the feature count mean "use all
    features".
    """
    if scale not in SCALE_PRESETS:
        raise ConfigError(f"unknown scale preset {scale!r}")
    preset = SCALE_PRESETS[scale]
    prefix = DATASET_PREFIXES.get(dataset_name, "")
    attack = AttackConfig(
        pop_size=preset["pop_size"], iterations=preset["iterations"],
        num_attacks=preset["num_attacks"], seed=seed, early_stop=False,
    )
    common = dict(attack=attack, target_count=preset["target_count"],
                  targets_per_class=preset["targets_per_class"],
                  n_components=n_components)
    if name == "H1":
        grid = [(f"{prefix}M{i + 1}D{d}", TreeParams(max_depth=d, seed=seed))
                for i, d in enumerate((8, 6, 4, 2))]
        return ExperimentScript(name=name, model_grid=grid,
                                target_strategy="random", **common)
    if name == "H2":
        grid = [(f"{prefix}M{i + 1}S{s}", TreeParams(min_samples_split=s, seed=seed))
                for i, s in enumerate((2, 5, 10, 20))]
        return ExperimentScript(name=name, model_grid=grid,
                                target_strategy="random", **common)
    if name == "H3":
        grid = [(f"{prefix}M{i + 1}F{f}",
                 TreeParams(max_features=min(f, n_components), seed=seed))
                for i, f in enumerate((2, 5, 10, 40))]
        return ExperimentScript(name=name, model_grid=grid,
                                target_strategy="random", **common)
    if name == "H4":
        grid = [(f"{prefix}M1", TreeParams(seed=seed))]
        return ExperimentScript(name=name, model_grid=grid,
                                target_strategy="per-class", **common)
    raise ConfigError(f"unknown script {name!r} (expected H1..H4)")


def execute_script(script: ExperimentScript, dataset: Dataset,
                   base_seed: int = 0, metadata: dict | None = None) -> ExperimentReport:
    """Train the model grid and run identical campaigns against each model."""
    session = Session.create(dataset, base_seed=base_seed, metadata={
        "script": script.name, **(metadata or {})})
    ensure_extractor(session, script.n_components)
    entries = [train_model(session, params, name=name, n_components=script.n_components)
               for name, params in script.model_grid]

    # shared targets, selected against the first model of the grid
    first_pipeline = session.pipeline_for(entries[0].model_id)
    if script.target_strategy == "per-class":
        targets = select_targets(dataset, first_pipeline, "per-class",
                                 count=script.targets_per_class, seed=base_seed)
    else:
        targets = select_targets(dataset, first_pipeline, "random",
                                 count=min(script.target_count, len(dataset.test)),
                                 seed=base_seed)
    target_ids = [i for i, _ in targets]

    accuracy: dict[str, float] = {}
    curves: dict[str, dict[str, list[float | None]]] = {}
    cumulative: dict[str, list[int]] = {}
    matrices: dict[str, list[list[int]]] = {}
    iterations: list[int] = []
    for entry in entries:
        campaign = run_campaign(session, entry.model_id, target_ids, script.attack)
        session.reports.append(report_to_dict(
            metrics_report(campaign_tally(session, campaign)),
            model_name=entry.name, campaign_id=campaign.campaign_id))
        accuracy[entry.name] = entry.accuracy if entry.accuracy is not None else float("nan")
        curves[entry.name] = measure_curves(campaign, dataset.class_count)
        stats = evolving_stats(campaign.traces, campaign.records,
                               class_count=dataset.class_count)
        cumulative[entry.name] = stats.cumulative_successes
        matrices[entry.name] = stats.per_class_breaches.tolist()
        iterations = stats.iterations
    return ExperimentReport(
        script_name=script.name,
        model_names=[e.name for e in entries],
        accuracy=accuracy,
        curves=curves,
        cumulative_successes=cumulative,
        class_matrices=matrices,
        iterations=iterations,
        session=session,
    )


def report_to_dict(report, model_name: str | None = None,
                   campaign_id: str | None = None) -> dict:
    payload = dataclasses.asdict(report)
    payload["context_label"] = report.context_label
    if model_name is not None:
        payload["model_name"] = model_name
    if campaign_id is not None:
        payload["campaign_id"] = campaign_id
    return payload


# --- persistence ---------------------------------------------------------


class _BlobWriter:
    def __init__(self):
        self.blobs: dict[str, bytes] = {}

    def add(self, array: np.ndarray) -> dict:
        array = np.ascontiguousarray(array)
        data = array.tobytes()
        digest = hashlib.sha256(data).hexdigest()
        self.blobs[digest] = data
        return {"blob": digest, "dtype": str(array.dtype), "shape": list(array.shape)}


class _BlobReader:
    def __init__(self, blobs: dict[str, bytes]):
        self.blobs = blobs

    def get(self, ref: dict) -> np.ndarray:
        data = self.blobs.get(ref["blob"])
        if data is None:
            raise IntegrityError(f"missing binary block {ref['blob']}")
        arr = np.frombuffer(data, dtype=np.dtype(ref["dtype"]))
        return arr.reshape(ref["shape"]).copy()


def _image_ref(writer: _BlobWriter, image: Image) -> dict:
    ref = writer.add(image.pixels)
    ref["width"] = image.width
    ref["height"] = image.height
    ref["channels"] = image.channels
    return ref


def _image_from_ref(reader: _BlobReader, ref: dict) -> Image:
    return Image(width=ref["width"], height=ref["height"], channels=ref["channels"],
                 pixels=reader.get(ref))


def _config_to_dict(config: AttackConfig) -> dict:
    d = dataclasses.asdict(config)
    if config.bounds is not None:
        d["bounds"] = {"x": list(config.bounds.x), "y": list(config.bounds.y),
                       "values": [list(v) for v in config.bounds.values]}
    return d


def _config_from_dict(d: dict) -> AttackConfig:
    bounds = d.get("bounds")
    if bounds is not None:
        bounds = PixelBounds(x=tuple(bounds["x"]), y=tuple(bounds["y"]),
                             values=tuple(tuple(v) for v in bounds["values"]))
    return AttackConfig(
        pop_size=d["pop_size"], iterations=d["iterations"],
        num_pixels=d["num_pixels"], num_attacks=d["num_attacks"],
        target_class=d["target_class"], seed=d["seed"],
        early_stop=d["early_stop"], bounds=bounds,
        differential_weight=d["differential_weight"],
        crossover_rate=d["crossover_rate"],
    )


def _trace_payload(writer: _BlobWriter, trace: AttackTrace, ordinal: int) -> dict:
    n = len(trace.records)
    if n:
        candidates = np.stack([r.best_candidate.to_vector() for r in trace.records])
    else:
        candidates = np.zeros((0, trace.final_perturbation.to_vector().size),
                              dtype=np.int64)
    return {
        "run_index": trace.run_index,
        "target_ordinal": ordinal,
        "succeeded": trace.succeeded,
        "success_iteration": trace.success_iteration,
        "final_image": _image_ref(writer, trace.final_image),
        "final_perturbation": [int(v) for v in trace.final_perturbation.to_vector()],
        "iterations": writer.add(np.array([r.iteration for r in trace.records],
                                          dtype=np.int64)),
        "candidates": writer.add(candidates.astype(np.int64)),
        "fitness": writer.add(np.array([r.best_fitness for r in trace.records],
                                       dtype=np.float64)),
        "predicted": writer.add(np.array([r.predicted_class for r in trace.records],
                                         dtype=np.int64)),
        "success_flags": writer.add(np.array([int(r.success) for r in trace.records],
                                             dtype=np.int64)),
    }


def _trace_from_payload(reader: _BlobReader, payload: dict, channels: int) -> AttackTrace:
    iterations = reader.get(payload["iterations"])
    candidates = reader.get(payload["candidates"])
    fitness = reader.get(payload["fitness"])
    predicted = reader.get(payload["predicted"])
    success_flags = reader.get(payload["success_flags"])
    records = tuple(
        IterationRecord(
            iteration=int(iterations[i]),
            best_candidate=PixelPerturbation.from_vector(candidates[i], channels),
            best_fitness=float(fitness[i]),
            predicted_class=int(predicted[i]),
            success=bool(success_flags[i]),
        )
        for i in range(iterations.shape[0])
    )
    return AttackTrace(
        run_index=payload["run_index"],
        records=records,
        final_image=_image_from_ref(reader, payload["final_image"]),
        succeeded=payload["succeeded"],
        success_iteration=payload["success_iteration"],
        final_perturbation=PixelPerturbation.from_vector(
            np.array(payload["final_perturbation"], dtype=np.int64), channels),
    )


def _split_payload(writer: _BlobWriter, split) -> dict:
    pixels = np.stack([img.pixels for img, _ in split]) if split else \
        np.zeros((0, 0), dtype=np.uint8)
    labels = np.array([label for _, label in split], dtype=np.int64)
    return {"pixels": writer.add(pixels.astype(np.uint8)),
            "labels": writer.add(labels), "count": len(split)}


def _split_from_payload(reader: _BlobReader, payload: dict, shape) -> list:
    h, w, c = shape
    pixels = reader.get(payload["pixels"])
    labels = reader.get(payload["labels"])
    return [
        (Image(width=w, height=h, channels=c, pixels=pixels[i]), int(labels[i]))
        for i in range(payload["count"])
    ]


def save_session(session: Session, path, embed_dataset: bool = True) -> None:
    """Write the session archive. See the module docstring for the layout."""
    writer = _BlobWriter()
    manifest = {
        "kind": "pixelbench-session",
        "schema_version": {"major": SCHEMA_MAJOR, "minor": SCHEMA_MINOR},
        "base_seed": session.base_seed,
        "metadata": session.metadata,
        "dataset": {
            "name": session.dataset_name,
            "checksum": session.dataset_checksum,
            "class_names": list(session.class_names),
            "source_format": session.source_format,
            "image_shape": list(session.image_shape),
            "embedded": bool(embed_dataset and session.dataset is not None),
        },
    }
    if manifest["dataset"]["embedded"]:
        manifest["dataset"]["train"] = _split_payload(writer, session.dataset.train)
        manifest["dataset"]["test"] = _split_payload(writer, session.dataset.test)

    if session.extractor is not None:
        manifest["extractor"] = {
            "mean": writer.add(session.extractor.mean),
            "components": writer.add(session.extractor.components),
            "explained_variance": writer.add(session.extractor.explained_variance),
        }
    else:
        manifest["extractor"] = None

    manifest["models"] = []
    for entry in session.models:
        model = entry.model
        manifest["models"].append({
            "model_id": entry.model_id,
            "name": entry.name,
            "params": dataclasses.asdict(entry.params),
            "accuracy": entry.accuracy,
            "feature_count": model.feature_count,
            "class_count": model.class_count,
            "root": model.root,
            "feature": writer.add(model._feature),
            "threshold": writer.add(model._threshold),
            "left": writer.add(model._left),
            "right": writer.add(model._right),
            "counts": writer.add(model._counts),
        })

    manifest["campaigns"] = []
    for campaign in session.campaigns:
        channels = session.image_shape[2]
        manifest["campaigns"].append({
            "campaign_id": campaign.campaign_id,
            "model_id": campaign.model_id,
            "status": campaign.status,
            "config": _config_to_dict(campaign.config),
            "targets": [
                {"object_id": t.object_id, "true_class": t.true_class,
                 "pred_original": t.pred_original,
                 "image": _image_ref(writer, t.image)}
                for t in campaign.targets
            ],
            "traces": [
                _trace_payload(writer, trace, ordinal)
                for trace, ordinal in zip(campaign.traces, campaign.trace_targets)
            ],
            "records": [dataclasses.asdict(r) for r in campaign.records],
        })
    manifest["reports"] = session.reports

    entries = {"manifest.json": json.dumps(
        manifest, sort_keys=True, separators=(",", ":")).encode()}
    for digest, data in writer.blobs.items():
        entries[f"blobs/{digest}"] = data
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(entries):
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            info.external_attr = 0o644 << 16
            zf.writestr(info, entries[name])


def load_session(path) -> Session:
    """Read a session archive, verifying every binary block's checksum."""
    try:
        with zipfile.ZipFile(path, "r") as zf:
            names = zf.namelist()
            raw = {name: zf.read(name) for name in names}
    except (zipfile.BadZipFile, OSError) as exc:
        raise IntegrityError(f"{path}: not a readable session archive: {exc}") from exc
    if "manifest.json" not in raw:
        raise IntegrityError(f"{path}: archive has no manifest")
    try:
        manifest = json.loads(raw["manifest.json"])
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"{path}: manifest is not valid JSON") from exc
    if manifest.get("kind") != "pixelbench-session":
        raise IntegrityError(f"{path}: not a pixelbench session archive")
    version = manifest.get("schema_version", {})
    if version.get("major") != SCHEMA_MAJOR:
        raise VersionError(
            f"{path}: schema major version {version.get('major')} is not supported "
            f"(expected {SCHEMA_MAJOR})"
        )

    blobs = {}
    for name, data in raw.items():
        if not name.startswith("blobs/"):
            continue
        digest = name.split("/", 1)[1]
        if hashlib.sha256(data).hexdigest() != digest:
            raise IntegrityError(f"{path}: binary block {digest} fails its checksum")
        blobs[digest] = data
    reader = _BlobReader(blobs)

    ds = manifest["dataset"]
    shape = tuple(ds["image_shape"])
    dataset = None
    if ds["embedded"]:
        dataset = Dataset(
            name=ds["name"], class_names=tuple(ds["class_names"]),
            train=_split_from_payload(reader, ds["train"], shape),
            test=_split_from_payload(reader, ds["test"], shape),
            source_format=ds["source_format"],
        )
        if dataset.checksum() != ds["checksum"]:
            raise IntegrityError(f"{path}: embedded dataset fails its checksum")

    session = Session(
        dataset_name=ds["name"], dataset_checksum=ds["checksum"],
        class_names=tuple(ds["class_names"]), source_format=ds["source_format"],
        image_shape=shape, base_seed=manifest["base_seed"],
        dataset=dataset, metadata=manifest.get("metadata", {}),
        reports=manifest.get("reports", []),
    )

    if manifest["extractor"] is not None:
        ex = manifest["extractor"]
        session.extractor = FeatureExtractor(
            mean=reader.get(ex["mean"]),
            components=reader.get(ex["components"]),
            explained_variance=reader.get(ex["explained_variance"]),
        )

    for m in manifest["models"]:
        feature = reader.get(m["feature"])
        threshold = reader.get(m["threshold"])
        left = reader.get(m["left"])
        right = reader.get(m["right"])
        counts = reader.get(m["counts"])
        nodes = [
            TreeNode(counts=counts[i], feature_index=int(feature[i]),
                     threshold=float(threshold[i]), left=int(left[i]),
                     right=int(right[i]))
            for i in range(feature.shape[0])
        ]
        params = TreeParams(**m["params"])
        session.models.append(ModelEntry(
            model_id=m["model_id"], name=m["name"], params=params,
            model=DecisionTreeModel(nodes=nodes, feature_count=m["feature_count"],
                                    class_count=m["class_count"], params=params,
                                    root=m["root"]),
            accuracy=m["accuracy"],
        ))

    channels = shape[2]
    for c in manifest["campaigns"]:
        traces = [_trace_from_payload(reader, t, channels) for t in c["traces"]]
        session.campaigns.append(Campaign(
            campaign_id=c["campaign_id"], model_id=c["model_id"],
            config=_config_from_dict(c["config"]),
            targets=[
                TargetRef(object_id=t["object_id"], true_class=t["true_class"],
                          pred_original=t["pred_original"],
                          image=_image_from_ref(reader, t["image"]))
                for t in c["targets"]
            ],
            traces=traces,
            trace_targets=[t["target_ordinal"] for t in c["traces"]],
            records=[OutcomeRecord(**r) for r in c["records"]],
            status=c["status"],
        ))
    return session
