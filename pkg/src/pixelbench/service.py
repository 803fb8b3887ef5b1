"""HTTP service: datasets, models, attack campaigns, test runs, sessions.

One store entry per loaded dataset; the entry id doubles as the session
id. Reads are unrestricted; mutations serialize on a per-entry lock.
Attack campaigns run on a background thread and publish ordered progress
events; clients consume them as a server-sent-event stream
(``data: {json}`` frames), each run's iterations arriving in order and a
terminal frame carrying the outcome records. Mutating endpoints honor an
``Idempotency-Key`` header: retries with the same key return the stored
response instead of repeating the work.

Configuration comes from environment variables (``PIXELBENCH_DATA_DIR``,
``PIXELBENCH_SESSION_DIR``, ``PIXELBENCH_PORT``, ``PIXELBENCH_HOST``) or
the CLI ``serve`` flags. Relative file paths in requests resolve against
the data directory (datasets) or the session directory (sessions).
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from . import measures
from .attack import AttackConfig, PixelBounds
from .data import DEFAULT_CLASS_NAMES, Dataset, Image, load_cifar10, load_idx
from .errors import ConfigError, PixelbenchError
from .features import DEFAULT_COMPONENTS, project
from .measures import OutcomeRecord, evolving_stats, metrics_report, tally
from .session import (Campaign, RunSpec, Session, campaign_context,
                      load_session, run_campaign, save_session, select_targets,
                      train_model)
from .tree import TreeParams, aggregate_flows, feature_importance, feature_usage


@dataclass
class ServiceConfig:
    data_dir: Path = field(default_factory=Path.cwd)
    session_dir: Path = field(default_factory=Path.cwd)
    host: str = "127.0.0.1"
    port: int = 8870

    @staticmethod
    def from_env() -> "ServiceConfig":
        return ServiceConfig(
            data_dir=Path(os.environ.get("PIXELBENCH_DATA_DIR", ".")),
            session_dir=Path(os.environ.get("PIXELBENCH_SESSION_DIR", ".")),
            host=os.environ.get("PIXELBENCH_HOST", "127.0.0.1"),
            port=int(os.environ.get("PIXELBENCH_PORT", "8870")),
        )


class NotFoundError(PixelbenchError):
    code = "not-found"


@dataclass
class CampaignJob:
    campaign_id: str
    events: list[dict] = field(default_factory=list)
    condition: threading.Condition = field(default_factory=threading.Condition)
    finished: bool = False
    cancel_event: threading.Event = field(default_factory=threading.Event)

    def publish(self, event: dict) -> None:
        with self.condition:
            self.events.append(event)
            self.condition.notify_all()

    def finish(self, event: dict) -> None:
        with self.condition:
            self.events.append(event)
            self.finished = True
            self.condition.notify_all()


@dataclass
class StoreEntry:
    session: Session
    write_lock: threading.Lock = field(default_factory=threading.Lock)
    jobs: dict[str, CampaignJob] = field(default_factory=dict)


class Store:
    """Session registry with per-session write locks and idempotency cache."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: dict[str, StoreEntry] = {}
        self._idempotency: dict[tuple[str, str], dict] = {}

    def add(self, session: Session) -> str:
        with self._lock:
            entry_id = f"d{len(self._entries):04d}"
            self._entries[entry_id] = StoreEntry(session=session)
            return entry_id

    def get(self, entry_id: str) -> StoreEntry:
        with self._lock:
            entry = self._entries.get(entry_id)
        if entry is None:
            raise NotFoundError(f"unknown dataset {entry_id!r}")
        return entry

    def cached(self, endpoint: str, key: str | None):
        if key is None:
            return None
        return self._idempotency.get((endpoint, key))

    def remember(self, endpoint: str, key: str | None, response: dict) -> None:
        if key is not None:
            self._idempotency[(endpoint, key)] = response


# --- request bodies -------------------------------------------------------


class DatasetRequest(BaseModel):
    name: str = "dataset"
    format: str  # "idx" | "cifar10-binary" | "synthetic" | "session"
    class_names: list[str] | None = None
    train_images: str | None = None
    train_labels: str | None = None
    test_images: str | None = None
    test_labels: str | None = None
    train_batches: list[str] = []
    test_batches: list[str] = []
    session_path: str | None = None
    seed: int = 0


class TreeParamsBody(BaseModel):
    max_depth: int | None = None
    min_samples_split: int = 2
    max_features: int | None = None
    seed: int = 0


class TrainRequest(BaseModel):
    dataset_id: str
    params: TreeParamsBody = TreeParamsBody()
    name: str | None = None
    n_components: int = DEFAULT_COMPONENTS


class BoundsBody(BaseModel):
    x: tuple[int, int]
    y: tuple[int, int]
    values: list[tuple[int, int]]


class AttackConfigBody(BaseModel):
    pop_size: int = 40
    iterations: int = 30
    num_pixels: int = 1
    num_attacks: int = 1
    target_class: int | None = None
    seed: int = 0
    early_stop: bool = True
    bounds: BoundsBody | None = None
    differential_weight: float = 0.5
    crossover_rate: float = 1.0

    def to_config(self) -> AttackConfig:
        bounds = None
        if self.bounds is not None:
            bounds = PixelBounds(x=self.bounds.x, y=self.bounds.y,
                                 values=tuple(self.bounds.values))
        return AttackConfig(
            pop_size=self.pop_size, iterations=self.iterations,
            num_pixels=self.num_pixels, num_attacks=self.num_attacks,
            target_class=self.target_class, seed=self.seed,
            early_stop=self.early_stop, bounds=bounds,
            differential_weight=self.differential_weight,
            crossover_rate=self.crossover_rate,
        )


class AttackRequest(BaseModel):
    dataset_id: str
    model_id: str
    target_ids: list[int]
    config: AttackConfigBody = AttackConfigBody()


class TargetRequest(BaseModel):
    dataset_id: str
    model_id: str
    strategy: str = "random"
    count: int = 1
    seed: int = 0
    ids: list[int] | None = None


class RunRequest(BaseModel):
    dataset_id: str
    model_id: str
    target_ids: list[int] = []
    campaign_ids: list[str] = []
    test_indices: list[int] = []
    tags: dict[str, str] = {}


class SaveRequest(BaseModel):
    dataset_id: str
    path: str
    embed_dataset: bool = True


# --- payload helpers ------------------------------------------------------


def image_payload(image: Image, label: int | None = None) -> dict:
    payload = {
        "width": image.width,
        "height": image.height,
        "channels": image.channels,
        "channel_order": "interleaved-rgb" if image.channels == 3 else "grayscale",
        "value_range": [0, 255],
        "pixels": image.pixels.tolist(),
    }
    if label is not None:
        payload["label"] = label
    return payload


def dataset_summary(entry_id: str, session: Session) -> dict:
    dataset = session.dataset
    per_class_train = [0] * len(session.class_names)
    per_class_test = [0] * len(session.class_names)
    thumbnails = []
    if dataset is not None:
        for _, label in dataset.train:
            per_class_train[label] += 1
        for _, label in dataset.test:
            per_class_test[label] += 1
        thumbnails = [image_payload(img, label) for img, label in dataset.test[:8]]
    return {
        "dataset_id": entry_id,
        "name": session.dataset_name,
        "source_format": session.source_format,
        "checksum": session.dataset_checksum,
        "class_names": list(session.class_names),
        "image_shape": list(session.image_shape),
        "train_count": len(dataset.train) if dataset else 0,
        "test_count": len(dataset.test) if dataset else 0,
        "per_class_train": per_class_train,
        "per_class_test": per_class_test,
        "thumbnails": thumbnails,
        "models": [model_summary(session, m.model_id) for m in session.models],
        "campaigns": [c.campaign_id for c in session.campaigns],
    }


def tree_payload(session: Session, model_id: str) -> dict:
    entry = session.model_entry(model_id)
    nodes = []
    for idx, node in enumerate(entry.model.nodes):
        nodes.append({
            "index": idx,
            "leaf": node.is_leaf,
            "feature": None if node.is_leaf else node.feature_index,
            "threshold": None if node.is_leaf else node.threshold,
            "left": None if node.is_leaf else node.left,
            "right": None if node.is_leaf else node.right,
            "counts": node.counts.tolist(),
        })
    return {"root": entry.model.root, "nodes": nodes,
            "depth": entry.model.depth()}


def model_summary(session: Session, model_id: str) -> dict:
    entry = session.model_entry(model_id)
    return {
        "model_id": entry.model_id,
        "name": entry.name,
        "params": {
            "max_depth": entry.params.max_depth,
            "min_samples_split": entry.params.min_samples_split,
            "max_features": entry.params.max_features,
            "seed": entry.params.seed,
        },
        "accuracy": entry.accuracy,
        "feature_count": entry.model.feature_count,
        "class_count": entry.model.class_count,
    }


def model_payload(session: Session, model_id: str) -> dict:
    entry = session.model_entry(model_id)
    payload = model_summary(session, model_id)
    payload["tree"] = tree_payload(session, model_id)
    payload["feature_importance"] = feature_importance(entry.model).tolist()
    payload["feature_usage"] = feature_usage(entry.model).tolist()
    return payload


def trace_payload(campaign: Campaign, trace_index: int) -> dict:
    trace = campaign.traces[trace_index]
    ordinal = campaign.trace_targets[trace_index]
    return {
        "run_index": trace.run_index,
        "target_ordinal": ordinal,
        "object_id": campaign.targets[ordinal].object_id,
        "succeeded": trace.succeeded,
        "success_iteration": trace.success_iteration,
        "final_image": image_payload(trace.final_image),
        "final_perturbation": [
            {"x": x, "y": y, "values": list(values)}
            for x, y, values in trace.final_perturbation.pixels
        ],
        "path": [
            {"iteration": r.iteration,
             "pixels": [{"x": x, "y": y, "values": list(values)}
                        for x, y, values in r.best_candidate.pixels],
             "fitness": r.best_fitness,
             "predicted_class": r.predicted_class,
             "success": r.success}
            for r in trace.records
        ],
    }


def record_payload(record: OutcomeRecord) -> dict:
    return {
        "object_id": record.object_id,
        "true_class": record.true_class,
        "pred_original": record.pred_original,
        "pred_attacked": record.pred_attacked,
        "attack_run_index": record.attack_run_index,
    }


def report_payload(session: Session, campaign: Campaign) -> dict:
    context = campaign_context(campaign)
    t = tally(campaign.records, context, class_count=len(session.class_names))
    report = metrics_report(t)
    return {
        "context": report.context,
        "context_label": report.context_label,
        "n_objects": report.n_objects,
        "k_attacks": report.k_attacks,
        "original": report.original,
        "attacking": report.attacking,
        "measures": report.measures,
        "display": report.display,
    }


def sse_frame(event: dict) -> str:
    return f"data: {json.dumps(event, separators=(',', ':'))}\n\n"


# --- application ----------------------------------------------------------


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    app = FastAPI(title="pixelbench", version="0.1.0")
    store = Store()
    app.state.store = store
    app.state.config = config

    @app.exception_handler(PixelbenchError)
    async def pixelbench_error(request: Request, exc: PixelbenchError):
        status = 404 if isinstance(exc, NotFoundError) else 400
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(
            status_code=404,
            content={"error": {"code": "not-found", "message": str(exc)}},
        )

    def resolve(base: Path, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else base / p

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/datasets")
    def create_dataset(body: DatasetRequest,
                       idempotency_key: str | None = Header(default=None)):
        cached = store.cached("datasets", idempotency_key)
        if cached is not None:
            return cached
        class_names = tuple(body.class_names) if body.class_names else None
        if body.format == "idx":
            if not all([body.train_images, body.train_labels,
                        body.test_images, body.test_labels]):
                raise ConfigError("idx datasets need train/test image and label paths")
            names = class_names or DEFAULT_CLASS_NAMES.get(
                body.name, DEFAULT_CLASS_NAMES["mnist"])
            train = load_idx(resolve(config.data_dir, body.train_images),
                             resolve(config.data_dir, body.train_labels), names)
            test = load_idx(resolve(config.data_dir, body.test_images),
                            resolve(config.data_dir, body.test_labels), names)
            dataset = Dataset(name=body.name, class_names=names, train=train,
                              test=test, source_format="idx")
            session = Session.create(dataset, base_seed=body.seed)
        elif body.format == "cifar10-binary":
            names = class_names or DEFAULT_CLASS_NAMES["cifar10"]
            if not body.train_batches or not body.test_batches:
                raise ConfigError("cifar datasets need train and test batch paths")
            train = load_cifar10(
                [resolve(config.data_dir, p) for p in body.train_batches], names)
            test = load_cifar10(
                [resolve(config.data_dir, p) for p in body.test_batches], names)
            dataset = Dataset(name=body.name, class_names=names, train=train,
                              test=test, source_format="cifar10-binary")
            session = Session.create(dataset, base_seed=body.seed)
        elif body.format == "synthetic":
            from .synthetic import make_synthetic_dataset
            dataset = make_synthetic_dataset(name=body.name, seed=body.seed)
            session = Session.create(dataset, base_seed=body.seed)
        elif body.format == "session":
            if not body.session_path:
                raise ConfigError("session loads need session_path")
            session = load_session(resolve(config.session_dir, body.session_path))
        else:
            raise ConfigError(f"unknown dataset format {body.format!r}")
        entry_id = store.add(session)
        response = dataset_summary(entry_id, session)
        store.remember("datasets", idempotency_key, response)
        return response

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        entry = store.get(dataset_id)
        return dataset_summary(dataset_id, entry.session)

    @app.get("/datasets/{dataset_id}/images")
    def get_images(dataset_id: str, split: str = "test", indices: str = ""):
        entry = store.get(dataset_id)
        dataset = entry.session.dataset
        if dataset is None:
            raise NotFoundError("session holds no embedded dataset pixels")
        rows = dataset.test if split == "test" else dataset.train
        wanted = [int(i) for i in indices.split(",") if i != ""]
        payloads = []
        for i in wanted:
            if not 0 <= i < len(rows):
                raise NotFoundError(f"image {i} outside the {split} split")
            img, label = rows[i]
            payload = image_payload(img, label)
            payload["index"] = i
            payloads.append(payload)
        return {"split": split, "images": payloads}

    @app.post("/models")
    def train(body: TrainRequest,
              idempotency_key: str | None = Header(default=None)):
        cached = store.cached("models", idempotency_key)
        if cached is not None:
            return cached
        entry = store.get(body.dataset_id)
        params = TreeParams(max_depth=body.params.max_depth,
                            min_samples_split=body.params.min_samples_split,
                            max_features=body.params.max_features,
                            seed=body.params.seed)
        with entry.write_lock:
            model_entry = train_model(entry.session, params, name=body.name,
                                      n_components=body.n_components)
        response = model_payload(entry.session, model_entry.model_id)
        store.remember("models", idempotency_key, response)
        return response

    @app.get("/datasets/{dataset_id}/models/{model_id}")
    def get_model(dataset_id: str, model_id: str):
        entry = store.get(dataset_id)
        try:
            return model_payload(entry.session, model_id)
        except PixelbenchError:
            raise NotFoundError(f"unknown model {model_id!r}")

    @app.post("/targets/select")
    def pick_targets(body: TargetRequest):
        entry = store.get(body.dataset_id)
        session = entry.session
        pipeline = session.pipeline_for(body.model_id)
        targets = select_targets(session.dataset, pipeline, body.strategy,
                                 count=body.count, seed=body.seed, ids=body.ids)
        return {"targets": [
            {"object_id": i, "correct": correct} for i, correct in targets]}

    @app.post("/attacks")
    def start_attack(body: AttackRequest,
                     idempotency_key: str | None = Header(default=None)):
        cached = store.cached("attacks", idempotency_key)
        if cached is not None:
            return cached
        entry = store.get(body.dataset_id)
        session = entry.session
        session.model_entry(body.model_id)  # validate before spawning
        config_obj = body.config.to_config()
        campaign_id = f"c{len(session.campaigns) + len(entry.jobs):04d}"
        job = CampaignJob(campaign_id=campaign_id)
        entry.jobs[campaign_id] = job

        def emit(ordinal: int, run_index: int, record) -> None:
            job.publish({
                "type": "iteration",
                "target": ordinal,
                "run": run_index,
                "iteration": record.iteration,
                "fitness": record.best_fitness,
                "success": record.success,
            })

        def work() -> None:
            try:
                with entry.write_lock:
                    campaign = run_campaign(
                        session, body.model_id, body.target_ids, config_obj,
                        on_event=emit, cancelled=job.cancel_event.is_set)
                    campaign.campaign_id = campaign_id
                job.finish({
                    "type": "cancelled" if campaign.status == "cancelled" else "done",
                    "campaign_id": campaign_id,
                    "records": [record_payload(r) for r in campaign.records],
                })
            except Exception as exc:  # surfaced to stream consumers
                job.finish({"type": "error", "message": str(exc)})

        threading.Thread(target=work, daemon=True).start()
        response = {"campaign_id": campaign_id}
        store.remember("attacks", idempotency_key, response)
        return response

    def find_campaign(session: Session, campaign_id: str) -> Campaign:
        for campaign in session.campaigns:
            if campaign.campaign_id == campaign_id:
                return campaign
        raise NotFoundError(f"unknown campaign {campaign_id!r}")

    @app.get("/datasets/{dataset_id}/attacks/{campaign_id}/events")
    def attack_events(dataset_id: str, campaign_id: str):
        entry = store.get(dataset_id)
        job = entry.jobs.get(campaign_id)
        if job is None:
            raise NotFoundError(f"unknown campaign {campaign_id!r}")

        def stream():
            index = 0
            while True:
                with job.condition:
                    while index >= len(job.events) and not job.finished:
                        job.condition.wait(timeout=30.0)
                    events = job.events[index:]
                    index = len(job.events)
                    finished = job.finished
                for event in events:
                    yield sse_frame(event)
                if finished and index >= len(job.events):
                    return

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/datasets/{dataset_id}/attacks/{campaign_id}/cancel")
    def cancel_attack(dataset_id: str, campaign_id: str):
        entry = store.get(dataset_id)
        job = entry.jobs.get(campaign_id)
        if job is None:
            raise NotFoundError(f"unknown campaign {campaign_id!r}")
        job.cancel_event.set()
        return {"campaign_id": campaign_id, "status": "cancelling"}

    @app.get("/datasets/{dataset_id}/attacks/{campaign_id}")
    def get_attack(dataset_id: str, campaign_id: str):
        entry = store.get(dataset_id)
        session = entry.session
        job = entry.jobs.get(campaign_id)
        if job is not None and not job.finished:
            return {"campaign_id": campaign_id, "status": "running"}
        campaign = find_campaign(session, campaign_id)
        stats = evolving_stats(campaign.traces, campaign.records,
                               class_count=len(session.class_names))
        return {
            "campaign_id": campaign_id,
            "status": campaign.status,
            "model_id": campaign.model_id,
            "targets": [
                {"object_id": t.object_id, "true_class": t.true_class,
                 "pred_original": t.pred_original,
                 "image": image_payload(t.image)}
                for t in campaign.targets
            ],
            "traces": [trace_payload(campaign, i)
                       for i in range(len(campaign.traces))],
            "records": [record_payload(r) for r in campaign.records],
            "report": report_payload(session, campaign) if campaign.records else None,
            "evolving": {
                "iterations": stats.iterations,
                "cumulative_successes": stats.cumulative_successes,
                "breach_rate": stats.breach_rate,
                "adversarial_impact_rate": stats.adversarial_impact_rate,
                "per_class_breaches": stats.per_class_breaches.tolist(),
            },
        }

    @app.post("/runs")
    def run_test(body: RunRequest):
        spec = RunSpec(model_id=body.model_id,
                       target_ids=tuple(body.target_ids),
                       campaign_ids=tuple(body.campaign_ids),
                       test_indices=tuple(body.test_indices),
                       tags=dict(body.tags))
        entry = store.get(body.dataset_id)
        session = entry.session
        pipeline = session.pipeline_for(spec.model_id)
        dataset = session.dataset
        class_count = len(session.class_names)

        originals = []  # (ref, image, label)
        for i in sorted(set(spec.target_ids) | set(spec.test_indices)):
            if dataset is None or not 0 <= i < len(dataset.test):
                raise NotFoundError(f"image {i} outside the test split")
            img, label = dataset.test[i]
            originals.append((f"test:{i}", img, label))

        attacked = []  # (ref, image, label, record)
        records = []
        for campaign_id in spec.campaign_ids:
            campaign = find_campaign(session, campaign_id)
            for idx, trace in enumerate(campaign.traces):
                target = campaign.targets[campaign.trace_targets[idx]]
                ref = f"{campaign_id}:{idx}"
                attacked.append((ref, trace.final_image, target.true_class,
                                 campaign.records[idx]))
                records.append(campaign.records[idx])

        response: dict = {"selection": {
            "originals": len(originals), "attacked": len(attacked)}}

        flows_input = []
        feature_rows = []
        if originals:
            labels = [label for _, _, label in originals]
            predicted, _ = pipeline.predict_images([img for _, img, _ in originals])
            response["original"] = measures.simple_stats(labels, predicted,
                                                         class_count)
            for (ref, img, label), pred in zip(originals, predicted):
                feats = project(pipeline.extractor, img)
                tag = spec.tag("original-correct") if pred == label \
                    else spec.tag("original-wrong")
                flows_input.append((feats, tag))
                feature_rows.append({
                    "id": ref, "kind": "original", "label": label,
                    "predicted": int(pred), "features": feats.tolist(),
                })
        else:
            response["original"] = None

        if attacked:
            labels = [label for _, _, label, _ in attacked]
            predicted, _ = pipeline.predict_images([img for _, img, _, _ in attacked])
            response["attacking"] = measures.simple_stats(labels, predicted,
                                                          class_count)
            for (ref, img, label, _), pred in zip(attacked, predicted):
                feats = project(pipeline.extractor, img)
                flows_input.append((feats, spec.tag("attacked")))
                feature_rows.append({
                    "id": ref, "kind": "attacked", "label": label,
                    "predicted": int(pred), "features": feats.tolist(),
                })
            contexts = {len([r for r in records if r.object_id == oid])
                        for oid in {r.object_id for r in records}}
            k = contexts.pop() if len(contexts) == 1 else None
            n_objects = len({r.object_id for r in records})
            if n_objects == 1 and (k or 0) > 1:
                context = "circledast"
            elif k == 1:
                context = "boxdot"
            else:
                context = "boxast"
            t = tally(records, context, class_count=class_count)
            report = metrics_report(t)
            response["measures"] = {
                "context": report.context,
                "context_label": report.context_label,
                "n_objects": report.n_objects,
                "k_attacks": report.k_attacks,
                "values": report.measures,
                "display": report.display,
                "original_stats": report.original,
                "attacking_stats": report.attacking,
            }
        else:
            response["attacking"] = None
            response["measures"] = None

        flows = aggregate_flows(pipeline.model, flows_input)
        response["flows"] = [
            {"parent": parent, "child": child, "counts": counts}
            for (parent, child), counts in sorted(flows.items())
        ]
        response["tree"] = tree_payload(session, spec.model_id)
        response["feature_rows"] = feature_rows
        response["feature_count"] = pipeline.model.feature_count
        return response

    @app.post("/sessions/save")
    def save(body: SaveRequest,
             idempotency_key: str | None = Header(default=None)):
        cached = store.cached("sessions/save", idempotency_key)
        if cached is not None:
            return cached
        entry = store.get(body.dataset_id)
        path = resolve(config.session_dir, body.path)
        with entry.write_lock:
            save_session(entry.session, path, embed_dataset=body.embed_dataset)
        response = {"path": str(path)}
        store.remember("sessions/save", idempotency_key, response)
        return response

    return app
