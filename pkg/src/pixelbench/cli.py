"""Headless driver.

Commands: ``train`` (fit a model into a session file), ``attack`` (run a
campaign against a saved session and print the robustness summary),
``script`` (run one of the stock H1..H4 experiments and emit report
files), ``serve`` (start the HTTP service).

Every command exits non-zero on failure after printing a single
machine-parsable line ``ERROR:<code>: <message>`` to stderr. All
randomness flows from ``--seed`` (default 0, never wall clock), so
repeated invocations write byte-identical outputs.

Report files follow ``<script>-<model>-<measure>.tsv``; the accuracy
table lands in ``<script>-accuracy.tsv`` and per-class breach matrices in
``<script>-<model>-class-matrix.tsv``.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from .attack import AttackConfig, PixelBounds
from .data import DEFAULT_CLASS_NAMES, Dataset, load_cifar10, load_idx
from .errors import ConfigError, PixelbenchError
from .features import DEFAULT_COMPONENTS
from .measures import metrics_report
from .session import (Session, campaign_tally, execute_script, load_session,
                      run_campaign, save_session, script_preset, select_targets,
                      train_model)
from .synthetic import make_synthetic_dataset
from .tree import TreeParams


def fail_cleanly(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except PixelbenchError as exc:
            click.echo(f"ERROR:{exc.code}: {exc}", err=True)
            sys.exit(1)
        except FileNotFoundError as exc:
            click.echo(f"ERROR:not-found: {exc}", err=True)
            sys.exit(1)
    return wrapper


def dataset_options(command):
    options = [
        click.option("--dataset-format", type=click.Choice(
            ["idx", "cifar10", "synthetic"]), default="synthetic",
            show_default=True),
        click.option("--dataset-name", default=None,
                     help="Dataset name; picks built-in class names when it "
                          "matches mnist / fashion-mnist / cifar10."),
        click.option("--train-images", type=click.Path(exists=True), default=None),
        click.option("--train-labels", type=click.Path(exists=True), default=None),
        click.option("--test-images", type=click.Path(exists=True), default=None),
        click.option("--test-labels", type=click.Path(exists=True), default=None),
        click.option("--train-batch", "train_batches", multiple=True,
                     type=click.Path(exists=True)),
        click.option("--test-batch", "test_batches", multiple=True,
                     type=click.Path(exists=True)),
        click.option("--class-names", default=None,
                     help="Comma-separated class names."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def load_dataset_from_flags(dataset_format, dataset_name, train_images,
                            train_labels, test_images, test_labels,
                            train_batches, test_batches, class_names,
                            seed) -> Dataset:
    names = tuple(class_names.split(",")) if class_names else None
    if dataset_format == "idx":
        if not all([train_images, train_labels, test_images, test_labels]):
            raise ConfigError(
                "idx datasets need --train-images/--train-labels/"
                "--test-images/--test-labels")
        name = dataset_name or "mnist"
        names = names or DEFAULT_CLASS_NAMES.get(name, DEFAULT_CLASS_NAMES["mnist"])
        return Dataset(
            name=name, class_names=names,
            train=load_idx(train_images, train_labels, names),
            test=load_idx(test_images, test_labels, names),
            source_format="idx",
        )
    if dataset_format == "cifar10":
        if not train_batches or not test_batches:
            raise ConfigError("cifar10 datasets need --train-batch/--test-batch")
        name = dataset_name or "cifar10"
        names = names or DEFAULT_CLASS_NAMES["cifar10"]
        return Dataset(
            name=name, class_names=names,
            train=load_cifar10(list(train_batches), names),
            test=load_cifar10(list(test_batches), names),
            source_format="cifar10-binary",
        )
    return make_synthetic_dataset(name=dataset_name or "synthetic", seed=seed)


@click.group()
def main():
    """Test decision-tree image classifiers against one-pixel attacks."""


@main.command()
@dataset_options
@click.option("--max-depth", type=int, default=None)
@click.option("--min-samples-split", type=int, default=2, show_default=True)
@click.option("--max-features", type=int, default=None)
@click.option("--n-components", type=int, default=DEFAULT_COMPONENTS,
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--model-name", default="model")
@click.option("--out", type=click.Path(), required=True,
              help="Session file to write.")
@fail_cleanly
def train(dataset_format, dataset_name, train_images, train_labels, test_images,
          test_labels, train_batches, test_batches, class_names, max_depth,
          min_samples_split, max_features, n_components, seed, model_name, out):
    """Train a tree on a dataset and write a session file."""
    dataset = load_dataset_from_flags(
        dataset_format, dataset_name, train_images, train_labels, test_images,
        test_labels, train_batches, test_batches, class_names, seed)
    session = Session.create(dataset, base_seed=seed,
                             metadata={"command": "train"})
    params = TreeParams(max_depth=max_depth, min_samples_split=min_samples_split,
                        max_features=max_features, seed=seed)
    entry = train_model(session, params, name=model_name,
                        n_components=n_components)
    save_session(session, out)
    click.echo(f"model {entry.name}: test accuracy = {entry.accuracy:.6g}")
    click.echo(f"session written to {out}")


def parse_bounds(text: str | None) -> PixelBounds | None:
    if text is None:
        return None
    parts = [int(v) for v in text.split(",")]
    if len(parts) < 6 or len(parts) % 2 != 0:
        raise ConfigError(
            "--bounds takes x0,x1,y0,y1 then lo,hi per channel")
    values = tuple((parts[i], parts[i + 1]) for i in range(4, len(parts), 2))
    return PixelBounds(x=(parts[0], parts[1]), y=(parts[2], parts[3]),
                       values=values)


@main.command()
@click.option("--session", "session_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", type=click.Path(), default=None,
              help="Path for the updated session (defaults to --session).")
@click.option("--model", "model_id", default=None,
              help="Model name or id (defaults to the last trained model).")
@click.option("--targets", default=None, help="Comma-separated test indices.")
@click.option("--random-targets", type=int, default=None,
              help="Sample this many targets from the test split.")
@click.option("--per-class-targets", type=int, default=None,
              help="Sample this many targets per class.")
@click.option("--pop-size", type=int, default=40, show_default=True)
@click.option("--iterations", type=int, default=30, show_default=True)
@click.option("--num-pixels", type=int, default=1, show_default=True)
@click.option("--num-attacks", type=int, default=1, show_default=True)
@click.option("--target-class", type=int, default=None,
              help="Targeted attack class (untargeted when omitted).")
@click.option("--bounds", default=None,
              help="x0,x1,y0,y1,lo,hi[,lo,hi...] inclusive search bounds.")
@click.option("--early-stop/--no-early-stop", default=True, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@fail_cleanly
def attack(session_path, out, model_id, targets, random_targets,
           per_class_targets, pop_size, iterations, num_pixels, num_attacks,
           target_class, bounds, early_stop, seed):
    """Attack targets in a saved session and print the robustness summary."""
    session = load_session(session_path)
    if not session.models:
        raise ConfigError("session has no trained model")
    model = model_id or session.models[-1].name
    pipeline = session.pipeline_for(model)
    if targets:
        pairs = select_targets(session.dataset, pipeline, "manual",
                               ids=[int(v) for v in targets.split(",")])
    elif random_targets is not None:
        pairs = select_targets(session.dataset, pipeline, "random",
                               count=random_targets, seed=seed)
    elif per_class_targets is not None:
        pairs = select_targets(session.dataset, pipeline, "per-class",
                               count=per_class_targets, seed=seed)
    else:
        raise ConfigError(
            "choose targets via --targets, --random-targets or "
            "--per-class-targets")
    config = AttackConfig(
        pop_size=pop_size, iterations=iterations, num_pixels=num_pixels,
        num_attacks=num_attacks, target_class=target_class, seed=seed,
        early_stop=early_stop, bounds=parse_bounds(bounds),
    )
    campaign = run_campaign(session, model, [i for i, _ in pairs], config)
    report = metrics_report(campaign_tally(session, campaign))
    session.reports.append({
        "campaign_id": campaign.campaign_id,
        "model": model,
        "display": report.display,
    })
    save_session(session, out or session_path)
    succeeded = sum(t.succeeded for t in campaign.traces)
    click.echo(f"campaign {campaign.campaign_id}: {len(campaign.traces)} runs, "
               f"{succeeded} successful")
    for line in report.display:
        click.echo(line)


@main.command()
@dataset_options
@click.option("--name", "script_name", type=click.Choice(["H1", "H2", "H3", "H4"]),
              required=True)
@click.option("--scale", type=click.Choice(["desk", "full"]), default="desk",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-components", type=int, default=DEFAULT_COMPONENTS,
              show_default=True)
@click.option("--out-dir", type=click.Path(), default=".", show_default=True)
@fail_cleanly
def script(dataset_format, dataset_name, train_images, train_labels, test_images,
           test_labels, train_batches, test_batches, class_names, script_name,
           scale, seed, n_components, out_dir):
    """Run a stock hypothesis experiment and emit TSV report files."""
    dataset = load_dataset_from_flags(
        dataset_format, dataset_name, train_images, train_labels, test_images,
        test_labels, train_batches, test_batches, class_names, seed)
    preset = script_preset(script_name, dataset_name=dataset.name, scale=scale,
                           seed=seed, n_components=n_components)
    report = execute_script(preset, dataset, base_seed=seed,
                            metadata={"scale": scale})
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    accuracy_path = out / f"{script_name}-accuracy.tsv"
    lines = ["model\taccuracy"]
    lines += [f"{name}\t{report.accuracy[name]!r}" for name in report.model_names]
    accuracy_path.write_text("\n".join(lines) + "\n")

    for name in report.model_names:
        for measure, series in report.curves[name].items():
            slug = measure.replace(" ", "-")
            path = out / f"{script_name}-{name}-{slug}.tsv"
            rows = ["iteration\tvalue"]
            for iteration, value in zip(report.iterations, series):
                rows.append(f"{iteration}\t{'' if value is None else repr(value)}")
            path.write_text("\n".join(rows) + "\n")
        successes = report.cumulative_successes[name]
        path = out / f"{script_name}-{name}-cumulative-successes.tsv"
        rows = ["iteration\tsuccesses"]
        rows += [f"{it}\t{v}" for it, v in zip(report.iterations, successes)]
        path.write_text("\n".join(rows) + "\n")
        matrix = report.class_matrices[name]
        path = out / f"{script_name}-{name}-class-matrix.tsv"
        rows = ["class\t" + "\t".join(str(i) for i in report.iterations)]
        for c, row in enumerate(matrix):
            rows.append(f"{c}\t" + "\t".join(str(v) for v in row))
        path.write_text("\n".join(rows) + "\n")

    session_path = out / f"{script_name}-session.pxb"
    save_session(report.session, session_path)
    click.echo(f"{script_name} ({scale}): {len(report.model_names)} models, "
               f"{len(report.iterations)} iterations")
    for name in report.model_names:
        click.echo(f"  Acc({name}) = {report.accuracy[name]:.6g}")
    click.echo(f"reports written to {out}")


@main.command()
@click.option("--host", default=None, help="Bind address.")
@click.option("--port", type=int, default=None)
@click.option("--data-dir", type=click.Path(), default=None)
@click.option("--session-dir", type=click.Path(), default=None)
@fail_cleanly
def serve(host, port, data_dir, session_dir):
    """Start the HTTP service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_env()
    if host is not None:
        config.host = host
    if port is not None:
        config.port = port
    if data_dir is not None:
        config.data_dir = Path(data_dir)
    if session_dir is not None:
        config.session_dir = Path(session_dir)
    import socket

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((config.host, config.port))
    except OSError as exc:
        click.echo(f"ERROR:startup: {exc}", err=True)
        sys.exit(1)
    finally:
        probe.close()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


if __name__ == "__main__":
    main()
