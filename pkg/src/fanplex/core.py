"""Category-agnostic machinery: arrow metrics, inverse sequences, the task
log witnessing the realization condition, metric-category law checks, and
the approximate back-and-forth engine between two sequences.

Arrows are immutable values supplied by a concrete category (fans or
simplices); sequences are append-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from .rationals import (
    INFINITY,
    Distance,
    Q0,
    dist_le,
    dist_lt,
    dist_max,
)


class InvariantError(AssertionError):
    """An internal guarantee failed; never expected on engine-built data."""


def arrow_distance(f, g, point_metric: Callable[[Any, Any, Any], Fraction]) -> Distance:
    """Generic arrow metric over the cod's finite witness set.

    The categories guarantee the max of d(p(y), q(y)) over the whole cod is
    attained on end-points / vertices, so the stored p tuples are enough.
    point_metric receives (dom object, point, point).
    """
    if f.dom != g.dom or f.cod != g.cod:
        raise ValueError("arrow distance needs a shared dom and cod")
    if f.e != g.e:
        return INFINITY
    return dist_max(point_metric(f.dom, x, y) for x, y in zip(f.p, g.p))


@dataclass(frozen=True)
class Category:
    """Bundle of operations the generic machinery needs from a category."""

    name: str
    identity: Callable[[Any], Any]
    compose: Callable[[Any, Any], Any]
    distance: Callable[[Any, Any], Distance]
    laws_distance: Callable[[Any, Any], Distance]
    eval_p: Callable[[Any, Any], Any]
    validate: Callable[[Any], list[str]]
    arrows_equal: Callable[[Any, Any], bool]
    amalgamate: Callable[[Any, Any], tuple[Any, Any]]
    seed_object: Callable[[Any], Any]
    task_arrow: Callable[[Any, Any, int, int], Any]
    try_match: Callable[[Any, Any, Distance], Optional[tuple[Any, Distance]]]
    obj_summary: Callable[[Any], dict]
    obj_to_json: Callable[[Any], dict]
    obj_from_json: Callable[[dict], Any]
    arrow_to_json: Callable[[Any], dict]
    arrow_from_json: Callable[[dict, Any, Any], Any]


class InverseSequence:
    """Objects U_0..U_N with bonds U_n -> U_{n+1}; append-only."""

    def __init__(self, category: Category, objects, bonds=()):
        self.category = category
        self.objects = list(objects)
        self.bonds = list(bonds)
        if not self.objects:
            raise ValueError("a sequence needs at least one object")
        if len(self.bonds) != len(self.objects) - 1:
            raise ValueError("bond count must be one less than object count")
        for n, bond in enumerate(self.bonds):
            if bond.dom != self.objects[n] or bond.cod != self.objects[n + 1]:
                raise ValueError(f"bond {n} does not join stages {n} and {n + 1}")

    @property
    def depth(self) -> int:
        return len(self.objects) - 1

    def append(self, obj, bond) -> None:
        if bond.dom != self.objects[-1] or bond.cod != obj:
            raise ValueError("bond must join the current top stage to the new object")
        self.objects.append(obj)
        self.bonds.append(bond)

    def composite_bond(self, m: int, n: int):
        """Exact composition of bonds m..n; the identity when m == n."""
        if not (0 <= m <= n <= self.depth):
            raise ValueError(f"stages ({m}, {n}) out of range 0..{self.depth}")
        arrow = self.category.identity(self.objects[m])
        for s in range(m, n):
            arrow = self.category.compose(self.bonds[s], arrow)
        return arrow


class RunningComposites:
    """Lazy cache of composites u_m^n, extended bond by bond.

    Composites into a fixed low stage stay small, so extending them one bond
    at a time keeps the budget-scale builds cheap.
    """

    def __init__(self, seq: InverseSequence):
        self.seq = seq
        self._state: dict[int, tuple[int, Any]] = {}

    def get(self, m: int, n: int):
        if not (0 <= m <= n <= self.seq.depth):
            raise ValueError(f"stages ({m}, {n}) out of range 0..{self.seq.depth}")
        upto, arrow = self._state.get(m, (m, self.seq.category.identity(self.seq.objects[m])))
        if upto > n:
            return self.seq.composite_bond(m, n)
        while upto < n:
            arrow = self.seq.category.compose(self.seq.bonds[upto], arrow)
            upto += 1
        self._state[m] = (upto, arrow)
        return arrow


@dataclass(frozen=True)
class TaskEntry:
    """One realized task: the arrow f out of stage m was completed by g into
    stage n with the recorded error."""

    m: int
    target: Any
    f: Any
    n: int
    g: Any
    eps: Fraction
    achieved: Distance


@dataclass
class TaskLog:
    entries: list[TaskEntry] = field(default_factory=list)

    def append(self, entry: TaskEntry) -> None:
        if entry.n <= entry.m:
            raise ValueError("realization stage must exceed the source stage")
        if not dist_lt(entry.achieved, entry.eps):
            raise ValueError("achieved error must stay below eps")
        self.entries.append(entry)


def fraisse_failures(seq: InverseSequence, log: TaskLog) -> list[dict]:
    """Recompute every logged realization; return the entries that fail."""
    cat = seq.category
    running = RunningComposites(seq)
    failures = []
    for idx, entry in enumerate(log.entries):
        if not (0 <= entry.m <= seq.depth and 0 <= entry.n <= seq.depth):
            raise ValueError(f"log entry {idx} references stages outside the sequence")
        problem = None
        if entry.n <= entry.m:
            problem = "realization stage does not exceed source stage"
        else:
            composite = running.get(entry.m, entry.n)
            recomputed = cat.distance(cat.compose(entry.g, entry.f), composite)
            if recomputed != entry.achieved:
                problem = f"recorded error {entry.achieved} != recomputed {recomputed}"
            elif not dist_lt(recomputed, entry.eps):
                problem = f"error {recomputed} is not below eps {entry.eps}"
        if problem is not None:
            failures.append({"index": idx, "m": entry.m, "n": entry.n, "problem": problem})
    return failures


def check_fraisse_condition(seq: InverseSequence, log: TaskLog) -> bool:
    return not fraisse_failures(seq, log)


@dataclass(frozen=True)
class MetricLawViolation:
    index: int
    law: str
    lhs: Distance
    rhs: Distance


@dataclass(frozen=True)
class MetricLawReport:
    checked: int
    violations: tuple[MetricLawViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_metric_category(samples, compose, distance) -> MetricLawReport:
    """Verify both contraction laws on composable (f0, f1, g, h) samples.

    f0, f1: F -> G share dom and cod, g: X -> F, h: G -> H. Violations are
    reported with the exact offending values, never raised.
    """
    violations = []
    count = 0
    for idx, (f0, f1, g, h) in enumerate(samples):
        count += 1
        base = distance(f0, f1)
        lhs_pre = distance(compose(f0, g), compose(f1, g))
        if not dist_le(lhs_pre, base):
            violations.append(MetricLawViolation(idx, "precompose", lhs_pre, base))
        lhs_post = distance(compose(h, f0), compose(h, f1))
        if not dist_le(lhs_post, base):
            violations.append(MetricLawViolation(idx, "postcompose", lhs_post, base))
    return MetricLawReport(checked=count, violations=tuple(violations))


# --- back and forth ---------------------------------------------------------


@dataclass(frozen=True)
class CrossStep:
    """One half-round: a cross arrow together with its verified round trip."""

    index: int
    direction: str  # "ab": A-stage -> B-stage, "ba": B-stage -> A-stage
    dom_stage: int
    cod_stage: int
    arrow: Any
    eps: Fraction
    roundtrip_error: Distance


@dataclass
class BackAndForthResult:
    steps: list[CrossStep]
    complete: bool
    reason: str = ""

    @property
    def total_error(self) -> Distance:
        return sum((s.roundtrip_error for s in self.steps), Q0)

    def last_step(self, direction: Optional[str] = None) -> Optional[CrossStep]:
        for step in reversed(self.steps):
            if direction is None or step.direction == direction:
                return step
        return None


def _advance(
    category: Category,
    seq: InverseSequence,
    composites: RunningComposites,
    cross,
    dom_stage: int,
    eps: Fraction,
):
    """Find the next cross arrow out of cross.cod, landing in seq.

    Searches stages above dom_stage for an exact-structure match whose
    verified round trip stays within eps; returns (arrow, stage, error).
    """
    for target in range(dom_stage + 1, seq.depth + 1):
        bond = composites.get(dom_stage, target)
        found = category.try_match(cross, bond, eps)
        if found is None:
            continue
        arrow, err = found
        verified = category.distance(category.compose(arrow, cross), bond)
        if verified != err:
            raise InvariantError("matcher reported a different round-trip error")
        return arrow, target, err
    return None


def back_and_forth(
    seqA: InverseSequence,
    seqB: InverseSequence,
    eps_schedule,
    budget: int,
    start: Optional[tuple[Any, int, int]] = None,
) -> BackAndForthResult:
    """Alternating cross arrows between two sequences of one category.

    Each half-round realizes the current cross arrow against the opposite
    sequence, with the round trip verified exactly against the composite
    bond. Runs until the schedule is consumed, the budget is exhausted, or
    no admissible match exists at any remaining stage.
    """
    if seqA.category is not seqB.category:
        raise ValueError("sequences must share a category")
    category = seqA.category
    schedule = [Fraction(e) for e in eps_schedule]
    comp_a = RunningComposites(seqA)
    comp_b = RunningComposites(seqB)

    if start is None:
        if seqA.objects[0] != seqB.objects[0]:
            raise ValueError("sequences with different seed objects need a start arrow")
        cross = category.identity(seqA.objects[0])
        stage_a, stage_b = 0, 0
    else:
        cross, stage_a, stage_b = start
    direction = "ab"

    steps: list[CrossStep] = []
    for k, eps in enumerate(schedule):
        if len(steps) >= budget:
            return BackAndForthResult(steps, False, "budget exhausted before schedule consumed")
        if direction == "ab":
            # cross: A_stage_a -> B_stage_b; build B_stage_b -> A_next.
            found = _advance(category, seqA, comp_a, cross, stage_a, eps)
            if found is None:
                return BackAndForthResult(steps, False, f"no match within eps at round {k}")
            arrow, stage_a_next, err = found
            steps.append(CrossStep(k, "ba", stage_b, stage_a_next, arrow, eps, err))
            cross, stage_a = arrow, stage_a_next
            direction = "ba"
        else:
            found = _advance(category, seqB, comp_b, cross, stage_b, eps)
            if found is None:
                return BackAndForthResult(steps, False, f"no match within eps at round {k}")
            arrow, stage_b_next, err = found
            steps.append(CrossStep(k, "ab", stage_a, stage_b_next, arrow, eps, err))
            cross, stage_b = arrow, stage_b_next
            direction = "ab"
    return BackAndForthResult(steps, True)
