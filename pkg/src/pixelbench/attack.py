"""One-pixel attacks driven by differential evolution.

Each attack run is an independent DE/rand/1 optimization over candidate
vectors that concatenate one ``(x, y, value...)`` block per perturbed
pixel. Defaults follow the published one-pixel setup: differential weight
F = 0.5 and crossover rate CR = 1.0, i.e. the trial vector is the pure
mutant. Mutants are rounded to integers (round-half-to-even) and clipped
to the per-dimension bounds before evaluation, so every evaluated
candidate is a displayable image. Selection is greedy and strict: a trial
replaces its parent only when its fitness is strictly lower, which keeps
parents on the frequent ties produced by piecewise-constant tree
fitness.

Run ``i`` of a multi-attack simulation draws its seed as ``mix64(seed, i)``
(see :mod:`pixelbench.rng`), so runs are reproducible independently of
execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Image, flatten
from .errors import BoundsError, ConfigError, DimensionError
from .pipeline import Pipeline
from .rng import child_generator

DEFAULT_DIFFERENTIAL_WEIGHT = 0.5
DEFAULT_CROSSOVER_RATE = 1.0


@dataclass(frozen=True)
class PixelBounds:
    """Inclusive search ranges for one perturbed pixel."""

    x: tuple[int, int]
    y: tuple[int, int]
    values: tuple[tuple[int, int], ...]  # one (lo, hi) per channel

    @staticmethod
    def full(width: int, height: int, channels: int) -> "PixelBounds":
        return PixelBounds(x=(0, width - 1), y=(0, height - 1),
                           values=((0, 255),) * channels)

    def validate(self, width: int, height: int, channels: int) -> None:
        if len(self.values) != channels:
            raise ConfigError(
                f"bounds define {len(self.values)} channel ranges for a "
                f"{channels}-channel image"
            )
        ranges = [("x", self.x, width - 1), ("y", self.y, height - 1)]
        ranges += [(f"value[{i}]", v, 255) for i, v in enumerate(self.values)]
        for name, (lo, hi), limit in ranges:
            if not (0 <= lo <= hi <= limit):
                raise ConfigError(f"bound {name}=({lo}, {hi}) outside [0, {limit}]")

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = [self.x, self.y, *self.values]
        lo = np.array([p[0] for p in pairs], dtype=np.int64)
        hi = np.array([p[1] for p in pairs], dtype=np.int64)
        return lo, hi


@dataclass(frozen=True)
class AttackConfig:
    pop_size: int = 40
    iterations: int = 30
    num_pixels: int = 1
    num_attacks: int = 1
    target_class: int | None = None  # None = untargeted
    seed: int = 0
    early_stop: bool = True
    bounds: PixelBounds | None = None  # None = full image extent, 0-255
    differential_weight: float = DEFAULT_DIFFERENTIAL_WEIGHT
    crossover_rate: float = DEFAULT_CROSSOVER_RATE

    def __post_init__(self):
        if self.pop_size < 4:
            raise ConfigError("pop_size must be >= 4 (DE/rand/1 needs 4 members)")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.num_pixels < 1:
            raise ConfigError("num_pixels must be >= 1")
        if self.num_attacks < 1:
            raise ConfigError("num_attacks must be >= 1")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError("crossover_rate must be in [0, 1]")


@dataclass(frozen=True)
class PixelPerturbation:
    """Pixels to overwrite: ((x, y, (value per channel)), ...)."""

    pixels: tuple[tuple[int, int, tuple[int, ...]], ...]

    @staticmethod
    def from_vector(vector: np.ndarray, channels: int) -> "PixelPerturbation":
        block = 2 + channels
        vec = np.asarray(vector, dtype=np.int64)
        pixels = []
        for start in range(0, vec.size, block):
            x, y = int(vec[start]), int(vec[start + 1])
            values = tuple(int(v) for v in vec[start + 2:start + block])
            pixels.append((x, y, values))
        return PixelPerturbation(pixels=tuple(pixels))

    def to_vector(self) -> np.ndarray:
        flat = []
        for x, y, values in self.pixels:
            flat.extend([x, y, *values])
        return np.array(flat, dtype=np.int64)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    best_candidate: PixelPerturbation
    best_fitness: float
    predicted_class: int
    success: bool


@dataclass(frozen=True)
class AttackTrace:
    run_index: int
    records: tuple[IterationRecord, ...]
    final_image: Image
    succeeded: bool
    success_iteration: int | None  # 0 = initial population
    final_perturbation: PixelPerturbation

    def tobytes(self) -> bytes:
        """Canonical serialization of the numeric payload."""
        parts = [np.int64(self.run_index).tobytes()]
        for rec in self.records:
            parts.append(np.int64(rec.iteration).tobytes())
            parts.append(rec.best_candidate.to_vector().tobytes())
            parts.append(np.float64(rec.best_fitness).tobytes())
            parts.append(np.int64(rec.predicted_class).tobytes())
            parts.append(np.int64(int(rec.success)).tobytes())
        parts.append(self.final_image.pixels.tobytes())
        return b"".join(parts)


def apply_perturbation(image: Image, perturbation: PixelPerturbation) -> Image:
    """Copy of ``image`` with the listed pixels overwritten."""
    arr = image.as_array().copy()
    for x, y, values in perturbation.pixels:
        if not (0 <= x < image.width and 0 <= y < image.height):
            raise BoundsError(
                f"pixel ({x}, {y}) outside {image.width}x{image.height} image"
            )
        if len(values) != image.channels:
            raise BoundsError(
                f"{len(values)} channel values for a {image.channels}-channel image"
            )
        for v in values:
            if not 0 <= v <= 255:
                raise BoundsError(f"intensity {v} outside [0, 255]")
        arr[y, x, :] = values
    return Image(width=image.width, height=image.height, channels=image.channels,
                 pixels=arr.reshape(-1))


def fitness(pipeline: Pipeline, image: Image, true_class: int,
            target_class: int | None = None) -> float:
    """Quantity the attack minimizes.

    Untargeted: the predicted probability of the true class. Targeted:
    one minus the predicted probability of the target class.
    """
    _, dist = pipeline.predict_image(image)
    if target_class is None:
        return float(dist[true_class])
    return 1.0 - float(dist[target_class])


def success(pipeline: Pipeline, image: Image, true_class: int,
            target_class: int | None = None) -> bool:
    """Untargeted: prediction differs from truth. Targeted: equals target."""
    predicted, _ = pipeline.predict_image(image)
    if target_class is None:
        return predicted != true_class
    return predicted == target_class


class _Evaluator:
    """Batched fitness/success evaluation of candidate vectors."""

    def __init__(self, pipeline: Pipeline, image: Image, true_class: int,
                 target_class: int | None):
        self.pipeline = pipeline
        self.image = image
        self.base = flatten(image)
        self.true_class = true_class
        self.target_class = target_class
        self.channels = image.channels
        self.width = image.width
        self.block = 2 + image.channels

    def perturbed_pixels(self, candidates: np.ndarray) -> np.ndarray:
        m = candidates.shape[0]
        out = np.repeat(self.base[None, :], m, axis=0)
        rows = np.arange(m)
        for start in range(0, candidates.shape[1], self.block):
            xs = candidates[:, start]
            ys = candidates[:, start + 1]
            base_offset = (ys * self.width + xs) * self.channels
            for ch in range(self.channels):
                out[rows, base_offset + ch] = candidates[:, start + 2 + ch]
        return out

    def __call__(self, candidates: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(fitness, predicted class, success flag) per candidate row."""
        classes, dists = self.pipeline.predict_pixels(self.perturbed_pixels(candidates))
        if self.target_class is None:
            fit = dists[:, self.true_class]
            succ = classes != self.true_class
        else:
            fit = 1.0 - dists[:, self.target_class]
            succ = classes == self.target_class
        return fit, classes, succ


def _resolve_bounds(config: AttackConfig, image: Image) -> tuple[np.ndarray, np.ndarray]:
    bounds = config.bounds or PixelBounds.full(image.width, image.height, image.channels)
    bounds.validate(image.width, image.height, image.channels)
    lo, hi = bounds.as_arrays()
    return np.tile(lo, config.num_pixels), np.tile(hi, config.num_pixels)


def _single_run(evaluator: _Evaluator, config: AttackConfig, run_index: int,
                on_event=None, cancelled=None) -> AttackTrace:
    lo, hi = _resolve_bounds(config, evaluator.image)
    dims = lo.size
    rng = child_generator(config.seed, run_index)
    f_weight = config.differential_weight
    cr = config.crossover_rate

    population = rng.integers(lo, hi + 1, size=(config.pop_size, dims), dtype=np.int64)
    pop_fitness, _, pop_success = evaluator(population)

    succeeded = bool(pop_success.any())
    success_iteration = 0 if succeeded else None
    best_success_vec = None
    best_success_fit = np.inf
    if succeeded:
        hits = np.nonzero(pop_success)[0]
        pick = hits[np.argmin(pop_fitness[hits])]
        best_success_vec = population[pick].copy()
        best_success_fit = float(pop_fitness[pick])

    records: list[IterationRecord] = []
    recorded_success = False
    stop = succeeded and config.early_stop
    iteration = 0
    while iteration < config.iterations and not stop:
        iteration += 1
        if cancelled is not None and cancelled():
            break
        # DE/rand/1: three distinct partners, none equal to the parent
        partners = np.empty((config.pop_size, 3), dtype=np.int64)
        for i in range(config.pop_size):
            choices = rng.choice(config.pop_size - 1, size=3, replace=False)
            choices[choices >= i] += 1
            partners[i] = choices
        mutants = (population[partners[:, 0]].astype(np.float64)
                   + f_weight * (population[partners[:, 1]]
                                 - population[partners[:, 2]]))
        trials = np.clip(np.rint(mutants).astype(np.int64), lo, hi)
        if cr < 1.0:
            keep_from_mutant = rng.random((config.pop_size, dims)) < cr
            forced = rng.integers(0, dims, size=config.pop_size)
            keep_from_mutant[np.arange(config.pop_size), forced] = True
            trials = np.where(keep_from_mutant, trials, population)

        trial_fitness, _, trial_success = evaluator(trials)
        if trial_success.any():
            if not succeeded:
                succeeded = True
                success_iteration = iteration
            hits = np.nonzero(trial_success)[0]
            pick = hits[np.argmin(trial_fitness[hits])]
            if trial_fitness[pick] < best_success_fit or best_success_vec is None:
                best_success_vec = trials[pick].copy()
                best_success_fit = float(trial_fitness[pick])

        improved = trial_fitness < pop_fitness
        population[improved] = trials[improved]
        pop_fitness[improved] = trial_fitness[improved]

        best_idx = int(np.argmin(pop_fitness))
        best_vec = population[best_idx]
        best_fit, best_cls, best_succ = evaluator(best_vec[None, :])
        recorded_success = recorded_success or bool(best_succ[0])
        record = IterationRecord(
            iteration=iteration,
            best_candidate=PixelPerturbation.from_vector(best_vec, evaluator.channels),
            best_fitness=float(best_fit[0]),
            predicted_class=int(best_cls[0]),
            success=recorded_success,
        )
        records.append(record)
        if on_event is not None:
            on_event(run_index, record)
        if succeeded and config.early_stop:
            stop = True

    if best_success_vec is not None:
        final_vec = best_success_vec
    else:
        final_vec = population[int(np.argmin(pop_fitness))]
    final_perturbation = PixelPerturbation.from_vector(final_vec, evaluator.channels)
    final_image = apply_perturbation(evaluator.image, final_perturbation)
    return AttackTrace(
        run_index=run_index,
        records=tuple(records),
        final_image=final_image,
        succeeded=succeeded,
        success_iteration=success_iteration,
        final_perturbation=final_perturbation,
    )


def de_attack(pipeline: Pipeline, image: Image, true_class: int,
              config: AttackConfig, on_event=None, cancelled=None) -> list[AttackTrace]:
    """Run ``config.num_attacks`` independent DE attacks against one image.

    ``on_event(run_index, record)`` is called after each recorded
    generation, in order. ``cancelled()`` is polled between generations;
    when it returns True the current run stops with the records gathered
    so far and no further runs start.

    The final image of a successful run applies the lowest-fitness
    successful candidate seen; a failed run applies the best candidate of
    the final population.
    """
    img_flat = flatten(image)
    if img_flat.size != pipeline.extractor.input_dim:
        raise DimensionError(
            f"image has {img_flat.size} values but pipeline expects "
            f"{pipeline.extractor.input_dim}"
        )
    if config.target_class is not None and not (
            0 <= config.target_class < pipeline.model.class_count):
        raise ConfigError(f"target_class {config.target_class} out of range")
    evaluator = _Evaluator(pipeline, image, true_class, config.target_class)
    traces = []
    for run_index in range(config.num_attacks):
        if cancelled is not None and cancelled():
            break
        traces.append(_single_run(evaluator, config, run_index,
                                  on_event=on_event, cancelled=cancelled))
    return traces


def with_seed(config: AttackConfig, seed: int) -> AttackConfig:
    """Copy of ``config`` with a different base seed."""
    return replace(config, seed=seed)
