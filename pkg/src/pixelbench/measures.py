"""Outcome classification and robustness measures.

Every attacked object yields an outcome triple: ground truth, the
prediction on the original object, and the prediction on the attacked
object. For binary tasks the triple is a three-letter code over P/N
(``PPN`` = truth positive, original prediction correct, attacked
prediction flipped). For any class count the triple reduces to a
correctness transition:

* ``correct_correct``       prediction unchanged, was correct
* ``correct_wrong``         correct before, wrong after (the damaging case)
* ``wrong_correct``         a breach that accidentally fixed an error
* ``wrong_wrong_same``      wrong and unchanged
* ``wrong_wrong_different`` wrong before and after, but a different wrong

Six measures summarize a tally of transitions; ``lateral-perturbation
rate`` extends the set so the three perturbation rates partition the
breaches in the multiclass case (it is identically zero for two classes,
where the transition arithmetic reduces exactly to the binary formulas).

Rates with a zero denominator are *undefined*: ``None`` in reports, NaN in
the array-valued helpers, rendered as an em-dash-free "—" placeholder.
They are never silently coerced to 0 or 1.

Testing contexts carry an arity tag: ``boxdot`` (n objects, one attack
each), ``circledast`` (one object, k attacks), ``boxast`` (n objects, k
attacks each). Display strings spell the arity out, e.g.
``adversarial-impact rate(⊠ 1000 objects, 10 attacks) = 0.52``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ConsistencyError

BINARY_CELLS = ("PPP", "PPN", "PNP", "PNN", "NPP", "NPN", "NNP", "NNN")

CORRECT_CORRECT = "correct_correct"
CORRECT_WRONG = "correct_wrong"
WRONG_CORRECT = "wrong_correct"
WRONG_WRONG_SAME = "wrong_wrong_same"
WRONG_WRONG_DIFFERENT = "wrong_wrong_different"
TRANSITIONS = (CORRECT_CORRECT, CORRECT_WRONG, WRONG_CORRECT,
               WRONG_WRONG_SAME, WRONG_WRONG_DIFFERENT)

# binary code -> transition (wrong->wrong-different cannot occur with 2 classes)
_BINARY_TRANSITION = {
    "PPP": CORRECT_CORRECT, "NNN": CORRECT_CORRECT,
    "PPN": CORRECT_WRONG, "NNP": CORRECT_WRONG,
    "PNP": WRONG_CORRECT, "NPN": WRONG_CORRECT,
    "PNN": WRONG_WRONG_SAME, "NPP": WRONG_WRONG_SAME,
}

CONTEXT_SYMBOLS = {"boxdot": "⊡", "circledast": "⊛", "boxast": "⊠"}

MEASURE_NAMES = (
    "model-robustness rate",
    "attack-breach rate",
    "adversarial-impact rate",
    "attack-failure rate",
    "intended-perturbation rate",
    "unintended-perturbation rate",
)
LATERAL_NAME = "lateral-perturbation rate"


@dataclass(frozen=True)
class OutcomeRecord:
    object_id: int
    true_class: int
    pred_original: int
    pred_attacked: int
    attack_run_index: int = 0


@dataclass(frozen=True)
class Outcome:
    code: str        # P/N triple under the one-vs-rest projection
    transition: str  # one of TRANSITIONS


def classify_outcome(record: OutcomeRecord, positive_class: int) -> Outcome:
    """Binary code (one-vs-rest on ``positive_class``) plus transition."""
    code = "".join(
        "P" if value == positive_class else "N"
        for value in (record.true_class, record.pred_original, record.pred_attacked)
    )
    return Outcome(code=code, transition=transition_of(record))


def transition_of(record: OutcomeRecord) -> str:
    orig_correct = record.pred_original == record.true_class
    att_correct = record.pred_attacked == record.true_class
    if orig_correct:
        return CORRECT_CORRECT if att_correct else CORRECT_WRONG
    if att_correct:
        return WRONG_CORRECT
    if record.pred_attacked == record.pred_original:
        return WRONG_WRONG_SAME
    return WRONG_WRONG_DIFFERENT


def transitions_from_binary_cells(cells):
    """Transition counts (cc, cw, wc, wws, wwd) from eight binary cells.

    Works elementwise, so the cell values may be ints or numpy arrays.
    """
    get = lambda k: cells.get(k, 0)
    cc = get("PPP") + get("NNN")
    cw = get("PPN") + get("NNP")
    wc = get("PNP") + get("NPN")
    wws = get("PNN") + get("NPP")
    wwd = cc * 0  # zero of the same (array or scalar) type
    return cc, cw, wc, wws, wwd


def _rate(numerator, denominator):
    """Elementwise numerator/denominator with NaN where undefined."""
    num = np.asarray(numerator, dtype=np.float64)
    den = np.asarray(denominator, dtype=np.float64)
    out = np.full(np.broadcast(num, den).shape, np.nan)
    np.divide(num, den, out=out, where=den > 0)
    return out


def robustness_measures(cc, cw, wc, wws, wwd):
    """The six measures (plus lateral) from transition counts.

    Works elementwise on scalars or aligned numpy arrays; undefined rates
    come back as NaN. ``attack-failure rate`` is computed as
    ``(total - cw) / total`` so that, with two classes, every value equals
    the literal binary-cell formula bit for bit.
    """
    total = cc + cw + wc + wws + wwd
    changed = cw + wc + wwd
    return {
        "model-robustness rate": _rate(cc + wws, total),
        "attack-breach rate": _rate(changed, total),
        "adversarial-impact rate": _rate(cw, total),
        "attack-failure rate": _rate(total - cw, total),
        "intended-perturbation rate": _rate(cw, changed),
        "unintended-perturbation rate": _rate(wc, changed),
        LATERAL_NAME: _rate(wwd, changed),
    }


def _value(x) -> float | None:
    x = float(x)
    return None if np.isnan(x) else x


@dataclass
class OutcomeTally:
    """Counts of outcome transitions in one testing context.

    ``transitions`` aggregates every record; ``per_class_transitions[c]``
    restricts to records whose ground truth is class ``c`` (the
    class-specific measures); ``ovr_cells[c]`` are the eight binary cell
    counts after projecting one-vs-rest onto class ``c``.
    """

    context: str  # "boxdot" | "circledast" | "boxast"
    class_count: int
    n_objects: int
    k_attacks: int | None  # None when per-object attack counts differ
    transitions: dict[str, int]
    per_class_transitions: list[dict[str, int]]
    ovr_cells: list[dict[str, int]]
    per_object_attacks: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.transitions.values())

    def merge(self, other: "OutcomeTally") -> "OutcomeTally":
        """Cellwise sum; contexts must agree."""
        if self.context != other.context or self.class_count != other.class_count:
            raise ConsistencyError("cannot merge tallies from different contexts")
        per_object = dict(self.per_object_attacks)
        for obj, k in other.per_object_attacks.items():
            per_object[obj] = per_object.get(obj, 0) + k
        ks = set(per_object.values())
        return OutcomeTally(
            context=self.context,
            class_count=self.class_count,
            n_objects=len(per_object),
            k_attacks=ks.pop() if len(ks) == 1 else None,
            transitions=_sum_cells(self.transitions, other.transitions),
            per_class_transitions=[
                _sum_cells(a, b) for a, b in
                zip(self.per_class_transitions, other.per_class_transitions)
            ],
            ovr_cells=[
                _sum_cells(a, b) for a, b in zip(self.ovr_cells, other.ovr_cells)
            ],
            per_object_attacks=per_object,
        )


def _sum_cells(a: dict[str, int], b: dict[str, int]) -> dict[str, int]:
    return {k: a.get(k, 0) + b.get(k, 0) for k in set(a) | set(b)}


def _empty_transitions() -> dict[str, int]:
    return {t: 0 for t in TRANSITIONS}


def _empty_cells() -> dict[str, int]:
    return {c: 0 for c in BINARY_CELLS}


def tally(records, context: str, class_count: int | None = None) -> OutcomeTally:
    """Count outcome transitions and one-vs-rest cells for a record set."""
    if context not in CONTEXT_SYMBOLS:
        raise ConfigError(f"unknown context {context!r}")
    records = list(records)
    if class_count is None:
        class_count = 1 + max(
            (max(r.true_class, r.pred_original, r.pred_attacked) for r in records),
            default=1,
        )
    transitions = _empty_transitions()
    per_class = [_empty_transitions() for _ in range(class_count)]
    cells = [_empty_cells() for _ in range(class_count)]
    per_object: dict[int, int] = {}
    for rec in records:
        for value in (rec.true_class, rec.pred_original, rec.pred_attacked):
            if not 0 <= value < class_count:
                raise ConsistencyError(
                    f"class {value} out of range for {class_count} classes"
                )
        t = transition_of(rec)
        transitions[t] += 1
        per_class[rec.true_class][t] += 1
        for c in range(class_count):
            cells[c][classify_outcome(rec, c).code] += 1
        per_object[rec.object_id] = per_object.get(rec.object_id, 0) + 1

    n_objects = len(per_object)
    ks = set(per_object.values())
    k_attacks = ks.pop() if len(ks) == 1 else None
    if context == "circledast" and n_objects > 1:
        raise ConsistencyError("circledast context requires a single object")
    if context == "boxdot" and records and k_attacks != 1:
        raise ConsistencyError("boxdot context requires one attack per object")
    return OutcomeTally(
        context=context, class_count=class_count,
        n_objects=n_objects, k_attacks=k_attacks,
        transitions=transitions, per_class_transitions=per_class,
        ovr_cells=cells, per_object_attacks=per_object,
    )


def tally_from_binary_cells(cells, context: str = "boxdot",
                            positive_class: int = 0,
                            n_objects: int | None = None,
                            k_attacks: int | None = None) -> OutcomeTally:
    """Build a two-class tally directly from eight P/N cell counts.

    Class ``positive_class`` plays P; the other class plays N. Arity
    defaults assume the context: one attack per object for ``boxdot``, one
    object for ``circledast``.
    """
    cells = {**_empty_cells(), **dict(cells)}
    unknown = set(cells) - set(BINARY_CELLS)
    if unknown:
        raise ConfigError(f"unknown binary cells: {sorted(unknown)}")
    total = sum(cells.values())
    if context == "circledast":
        n_objects = 1 if n_objects is None else n_objects
        k_attacks = total if k_attacks is None else k_attacks
    else:
        n_objects = total if n_objects is None else n_objects
        k_attacks = (total // n_objects if n_objects else 0) \
            if k_attacks is None else k_attacks

    def flip(code: str) -> str:
        return "".join("P" if ch == "N" else "N" for ch in code)

    transitions = _empty_transitions()
    pos_transitions = _empty_transitions()
    neg_transitions = _empty_transitions()
    for code, count in cells.items():
        t = _BINARY_TRANSITION[code]
        transitions[t] += count
        (pos_transitions if code[0] == "P" else neg_transitions)[t] += count

    flipped = {flip(code): count for code, count in cells.items()}
    if positive_class == 0:
        per_class = [pos_transitions, neg_transitions]
        ovr = [dict(cells), flipped]
    else:
        per_class = [neg_transitions, pos_transitions]
        ovr = [flipped, dict(cells)]
    return OutcomeTally(
        context=context, class_count=2,
        n_objects=n_objects, k_attacks=k_attacks,
        transitions=transitions, per_class_transitions=per_class,
        ovr_cells=ovr,
    )


def _cells_get(cells, *codes) -> int:
    return sum(cells.get(code, 0) for code in codes)


def standard_stats_from_cells(cells, which: str) -> dict[str, float | None]:
    """Accuracy / precision / recall / F1 from eight binary cells.

    ``which="original"`` ignores the attacked letter; ``which="attacking"``
    ignores the original letter.
    """
    p = _cells_get(cells, "PPP", "PPN", "PNP", "PNN")
    n = _cells_get(cells, "NPP", "NPN", "NNP", "NNN")
    if which == "original":
        tp = _cells_get(cells, "PPP", "PPN")
        pred_p = _cells_get(cells, "PPP", "PPN", "NPP", "NPN")
        correct = _cells_get(cells, "PPP", "PPN", "NNP", "NNN")
    elif which == "attacking":
        tp = _cells_get(cells, "PPP", "PNP")
        pred_p = _cells_get(cells, "PPP", "PNP", "NPP", "NNP")
        correct = _cells_get(cells, "PPP", "PNP", "NPN", "NNN")
    else:
        raise ConfigError(f"which must be 'original' or 'attacking', got {which!r}")
    return {
        "accuracy": _value(_rate(correct, p + n)),
        "precision": _value(_rate(tp, pred_p)),
        "recall": _value(_rate(tp, p)),
        "f1": _value(_rate(2 * tp, p + pred_p)),
    }


def standard_stats(t: OutcomeTally, which: str) -> dict:
    """Per-class one-vs-rest statistics plus macro average and plain accuracy.

    The headline ``accuracy`` is the plain multiclass fraction correct;
    for two classes it coincides with every one-vs-rest accuracy.
    """
    per_class = [standard_stats_from_cells(cells, which) for cells in t.ovr_cells]
    if which == "original":
        correct = (t.transitions[CORRECT_CORRECT] + t.transitions[CORRECT_WRONG])
    else:
        correct = (t.transitions[CORRECT_CORRECT] + t.transitions[WRONG_CORRECT])
    macro = {}
    for key in ("precision", "recall", "f1"):
        defined = [s[key] for s in per_class if s[key] is not None]
        macro[key] = sum(defined) / len(defined) if defined else None
    return {
        "accuracy": _value(_rate(correct, t.total)),
        "per_class": per_class,
        "macro": macro,
    }


def simple_stats(labels, predictions, class_count: int) -> dict:
    """Accuracy, per-class one-vs-rest P/R/F1, macro average, confusion matrix.

    Used for test runs that score a single prediction set (no attack
    pairing). Confusion rows are ground truth, columns predictions.
    """
    labels = np.asarray(labels, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    if labels.shape != predictions.shape:
        raise ConsistencyError("labels and predictions must align")
    confusion = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(confusion, (labels, predictions), 1)
    total = int(confusion.sum())
    per_class = []
    for c in range(class_count):
        tp = int(confusion[c, c])
        actual = int(confusion[c].sum())
        predicted = int(confusion[:, c].sum())
        per_class.append({
            "precision": _value(_rate(tp, predicted)),
            "recall": _value(_rate(tp, actual)),
            "f1": _value(_rate(2 * tp, actual + predicted)),
        })
    macro = {}
    for key in ("precision", "recall", "f1"):
        defined = [s[key] for s in per_class if s[key] is not None]
        macro[key] = sum(defined) / len(defined) if defined else None
    return {
        "accuracy": _value(_rate(int(np.trace(confusion)), total)),
        "per_class": per_class,
        "macro": macro,
        "confusion": confusion.tolist(),
    }


def _measures_from_transitions(transitions: dict[str, int]) -> dict[str, float | None]:
    values = robustness_measures(
        transitions[CORRECT_CORRECT], transitions[CORRECT_WRONG],
        transitions[WRONG_CORRECT], transitions[WRONG_WRONG_SAME],
        transitions[WRONG_WRONG_DIFFERENT],
    )
    return {name: _value(v) for name, v in values.items()}


def robustness_rates(t: OutcomeTally) -> dict:
    """All robustness measures: general plus class-specific columns.

    For two classes the class-specific columns are exactly the
    positive-/negative-specific formulas of the binary definition.
    """
    return {
        "general": _measures_from_transitions(t.transitions),
        "per_class": [
            _measures_from_transitions(tr) for tr in t.per_class_transitions
        ],
    }


def format_measure(name: str, context: str, n_objects: int, k_attacks: int,
                   value: float | None = None) -> str:
    """Render a measure with its context symbol and arity.

    >>> format_measure("adversarial-impact rate", "boxast", 1000, 10, 0.52)
    'adversarial-impact rate(⊠ 1000 objects, 10 attacks) = 0.52'
    """
    if context not in CONTEXT_SYMBOLS:
        raise ConfigError(f"unknown context {context!r}")
    if context == "boxdot":
        k_attacks = 1
    if context == "circledast":
        n_objects = 1
    objects = f"{n_objects} object" + ("" if n_objects == 1 else "s")
    attacks = f"{k_attacks} attack" + ("" if k_attacks == 1 else "s")
    head = f"{name}({CONTEXT_SYMBOLS[context]} {objects}, {attacks})"
    if value is None:
        return head
    return f"{head} = {format_rate(value)}"


def format_rate(value: float | None) -> str:
    """Short numeric rendering; undefined rates become an em dash."""
    if value is None:
        return "—"
    return f"{value:.6g}"


@dataclass
class MetricsReport:
    """Everything a test run reports for one tally."""

    context: str
    n_objects: int
    k_attacks: int | None
    class_count: int
    original: dict
    attacking: dict
    measures: dict
    display: list[str]

    @property
    def context_label(self) -> str:
        if self.k_attacks is None:
            return (f"({CONTEXT_SYMBOLS[self.context]} {self.n_objects} objects, "
                    f"mixed attacks)")
        return format_measure("", self.context, self.n_objects, self.k_attacks)


def metrics_report(t: OutcomeTally) -> MetricsReport:
    measures = robustness_rates(t)
    k = t.k_attacks if t.k_attacks is not None else 0
    display = [
        format_measure(name, t.context, t.n_objects, k, measures["general"][name])
        for name in MEASURE_NAMES
    ]
    return MetricsReport(
        context=t.context,
        n_objects=t.n_objects,
        k_attacks=t.k_attacks,
        class_count=t.class_count,
        original=standard_stats(t, "original"),
        attacking=standard_stats(t, "attacking"),
        measures=measures,
        display=display,
    )


@dataclass
class EvolvingStats:
    """Per-iteration curves derived from attack traces."""

    iterations: list[int]
    cumulative_successes: list[int]
    breach_rate: list[float]
    adversarial_impact_rate: list[float]
    per_class_breaches: np.ndarray  # (class_count, iterations) int64
    n_runs: int


def evolving_stats(traces, records, class_count: int | None = None) -> EvolvingStats:
    """Success/breach progressions over iterations.

    ``traces[i]`` and ``records[i]`` must describe the same attack run.
    A run counts as a success at iteration t when its first success
    happened at or before t; it counts as a breach when, additionally for
    originally-misclassified objects, the recorded prediction changed from
    the original prediction by t. Per-class breach counts tally distinct
    objects (not runs) whose prediction was changed by t, keyed by ground
    truth class.
    """
    traces = list(traces)
    records = list(records)
    if len(traces) != len(records):
        raise ConsistencyError("traces and records must align one-to-one")
    if class_count is None:
        class_count = 1 + max(
            (max(r.true_class, r.pred_original, r.pred_attacked) for r in records),
            default=0,
        )
    horizon = max((len(t.records) for t in traces), default=0)
    iterations = list(range(1, horizon + 1))
    n_runs = len(traces)

    success_at = np.full(n_runs, np.inf)
    breach_at = np.full(n_runs, np.inf)
    impact_at = np.full(n_runs, np.inf)
    object_class = {}
    object_breach_at: dict[int, float] = {}
    for i, (trace, rec) in enumerate(zip(traces, records)):
        if trace.succeeded and trace.success_iteration is not None:
            success_at[i] = trace.success_iteration
        for r in trace.records:
            if r.predicted_class != rec.pred_original:
                breach_at[i] = r.iteration
                if rec.pred_original == rec.true_class:
                    impact_at[i] = r.iteration
                break
        object_class[rec.object_id] = rec.true_class
        prev = object_breach_at.get(rec.object_id, np.inf)
        object_breach_at[rec.object_id] = min(prev, breach_at[i])

    cumulative, breach_rate, impact_rate = [], [], []
    per_class = np.zeros((class_count, horizon), dtype=np.int64)
    for t in iterations:
        cumulative.append(int((success_at <= t).sum()))
        breach_rate.append(float((breach_at <= t).sum()) / n_runs if n_runs else 0.0)
        impact_rate.append(float((impact_at <= t).sum()) / n_runs if n_runs else 0.0)
        for obj, first in object_breach_at.items():
            if first <= t:
                per_class[object_class[obj], t - 1] += 1
    return EvolvingStats(
        iterations=iterations,
        cumulative_successes=cumulative,
        breach_rate=breach_rate,
        adversarial_impact_rate=impact_rate,
        per_class_breaches=per_class,
        n_runs=n_runs,
    )
