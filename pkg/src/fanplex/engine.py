"""Sequence builder and experiments.

build_fraisse_sequence dovetails enumerated extension tasks over the stages
and realizes each one exactly by strict amalgamation with the composite
bond, so every logged error is zero. On top of that sit the finite-depth
experiments: limit threads, density reports, the approximate homogeneity
isomorphism, and the end-point swap renormalization.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from . import fans, simplices
from .categories import CATEGORY_TAGS, FAN, flavor, get_category
from .core import (
    BackAndForthResult,
    InvariantError,
    InverseSequence,
    RunningComposites,
    TaskEntry,
    TaskLog,
    back_and_forth,
    check_fraisse_condition,
)
from .rationals import Distance, Q0, Q1, ceil_frac, dist_lt


@dataclass(frozen=True)
class DenseFamilyConfig:
    """Deterministic description of the countable dense family.

    The denominator bound caps every enumerated level and coordinate, the
    size bound caps the stage window visible to the enumeration, and the
    seed permutes members within each coarseness class.
    """

    category: str
    denom_bound: int = 8
    size_bound: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.category not in CATEGORY_TAGS:
            raise ValueError(f"unknown category {self.category!r}")
        if self.denom_bound < 1 or self.size_bound < 1:
            raise ValueError("bounds must be at least 1")


def _nu2(n: int) -> int:
    return (n & -n).bit_length() - 1


def task_schedule(index: int) -> tuple[int, int]:
    """Ruler-order dovetail over (stage, arrow index) pairs.

    Stage m is visited with frequency 2^-(m+1), so half the budget lands on
    stage 0; the k-th visit to a stage realizes the k-th enumerated arrow.
    """
    m = _nu2(index + 1)
    k = (index + 1) >> (m + 1)
    return m, k


def default_eps(index: int) -> Fraction:
    # Exponents are capped to keep serialized bundles readable; realization
    # is exact, so any positive tolerance is satisfied regardless.
    return Fraction(1, 2 ** min(index, 30))


@dataclass
class BuildReport:
    config: DenseFamilyConfig
    budget: int
    sequence: InverseSequence
    log: TaskLog
    summaries: list[dict]
    stage_seconds: list[float] = field(default_factory=list)

    @property
    def build_seconds(self) -> float:
        return sum(self.stage_seconds)


def build_fraisse_sequence(
    cfg: DenseFamilyConfig,
    task_budget: int,
    eps_exponents: Optional[Sequence[int]] = None,
) -> BuildReport:
    """Build a sequence realizing the first task_budget enumerated tasks.

    Each task (m, f: U_m -> F) is amalgamated with the composite bond
    u_m^N, the pushout becomes stage N+1, and the amalgamation arrow out of
    F realizes the task with error exactly zero. Fully deterministic for a
    fixed configuration.
    """
    if task_budget < 0:
        raise ValueError("task budget must be nonnegative")
    category = get_category(cfg.category)
    seq = InverseSequence(category, [category.seed_object(cfg)])
    composites = RunningComposites(seq)
    log = TaskLog()
    summaries = [category.obj_summary(seq.objects[0])]
    seconds: list[float] = []
    for i in range(task_budget):
        started = time.monotonic()
        m, k = task_schedule(i)
        f = category.task_arrow(cfg, seq.objects[m], m, k)
        bond_to_top = composites.get(m, seq.depth)
        f2, g2 = category.amalgamate(f, bond_to_top)
        seq.append(f2.cod, g2)
        n = seq.depth
        if eps_exponents is not None:
            eps = Fraction(1, 2 ** eps_exponents[i])
        else:
            eps = default_eps(i)
        achieved = category.distance(
            category.compose(f2, f), composites.get(m, n)
        )
        if achieved != Q0:
            raise InvariantError(
                f"strict amalgamation of task {i} left error {achieved}"
            )
        log.append(TaskEntry(m=m, target=f.cod, f=f, n=n, g=f2, eps=eps, achieved=achieved))
        summaries.append(category.obj_summary(seq.objects[-1]))
        seconds.append(time.monotonic() - started)
    report = BuildReport(cfg, task_budget, seq, log, summaries, seconds)
    if not check_fraisse_condition(seq, log):
        raise InvariantError("freshly built sequence failed its own log check")
    return report


def limit_thread(seq: InverseSequence, n: int, x) -> list:
    """The compatible thread (x_0, ..., x_n) of a stage-n point."""
    if not (0 <= n <= seq.depth):
        raise ValueError(f"stage {n} out of range 0..{seq.depth}")
    thread = [x]
    current = x
    for s in range(n - 1, -1, -1):
        current = seq.category.eval_p(seq.bonds[s], current)
        thread.append(current)
    thread.reverse()
    return thread


# --- density ----------------------------------------------------------------


@dataclass(frozen=True)
class DensityWitness:
    grid_point: Any
    gap: Fraction
    nearest: Any


@dataclass(frozen=True)
class DensityReport:
    category: str
    stage: int
    mesh: Fraction
    step: Fraction
    horizon: int
    metric: str
    worst_gap: Fraction
    witnesses: tuple[DensityWitness, ...]
    candidate_count: int


def _verification_threads() -> int:
    raw = os.environ.get("FRAISSE_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError as exc:
        raise ValueError(f"FRAISSE_THREADS must be an integer, got {raw!r}") from exc
    if threads < 1:
        raise ValueError("FRAISSE_THREADS must be at least 1")
    return threads


def _min_gap(metric, obj, grid_chunk, candidates):
    out = []
    for g in grid_chunk:
        best = None
        nearest = None
        for c in candidates:
            d = metric(obj, g, c)
            if best is None or d < best:
                best, nearest = d, c
        out.append(DensityWitness(g, best, nearest))
    return out


def density_report(
    seq: InverseSequence, m: int, mesh: Fraction, horizon: int
) -> DensityReport:
    """Exact max-min gap between a mesh grid on stage m and the projected
    end-points (or vertices) of stages m..horizon."""
    mesh = Fraction(mesh)
    if not (0 <= m <= horizon <= seq.depth):
        raise ValueError("need 0 <= stage <= horizon <= depth")
    if mesh <= 0:
        raise ValueError("mesh must be positive")
    if mesh > 1:
        raise ValueError("mesh too large: the grid would be empty")
    steps = ceil_frac(1 / mesh)
    step = Fraction(1, steps)
    obj = seq.objects[m]
    kind = flavor(seq.category)

    if kind == FAN:
        metric = fans.fan_distance
        grid = [fans.FanPoint.apex()]
        for j in range(obj.size):
            for i in range(1, steps + 1):
                grid.append(fans.FanPoint(j, Fraction(i, steps)))
    else:
        metric = lambda _obj, x, y: simplices.sq_dist(x, y)
        if obj.dim > 8:
            raise ValueError("density grid too large for this stage dimension")
        grid = [
            tuple(Fraction(a, steps) for a in combo)
            for combo in simplices._compositions(steps, obj.dim + 1)
        ]

    composites = RunningComposites(seq)
    seen = set()
    candidates = []
    for s in range(m, horizon + 1):
        arrow = composites.get(m, s)
        for value in arrow.p:
            if value not in seen:
                seen.add(value)
                candidates.append(value)

    threads = _verification_threads()
    if threads == 1 or len(grid) < 4:
        witnesses = _min_gap(metric, obj, grid, candidates)
    else:
        chunk = (len(grid) + threads - 1) // threads
        parts = [grid[i : i + chunk] for i in range(0, len(grid), chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(
                lambda part: _min_gap(metric, obj, part, candidates), parts
            )
        witnesses = [w for part in results for w in part]

    worst = max(w.gap for w in witnesses)
    return DensityReport(
        category=seq.category.name,
        stage=m,
        mesh=mesh,
        step=step,
        horizon=horizon,
        metric="path" if kind == FAN else "squared_euclidean",
        worst_gap=worst,
        witnesses=tuple(witnesses),
        candidate_count=len(candidates),
    )


def density_gap_curve(
    seq: InverseSequence, m: int, mesh: Fraction, horizons: Sequence[int]
) -> list[tuple[int, Fraction]]:
    return [(h, density_report(seq, m, mesh, h).worst_gap) for h in horizons]


# --- homogeneity ------------------------------------------------------------


@dataclass
class HomogeneityResult:
    achieved: Distance
    eps: Fraction
    ok: bool
    seed_error: Distance
    final_dom_stage: int
    final_cod_stage: int
    final_arrow: Any
    result: BackAndForthResult


def find_stage(seq: InverseSequence, obj) -> int:
    for s, candidate in enumerate(seq.objects):
        if candidate == obj:
            return s
    raise ValueError("object is not a stage of the sequence")


def homogeneity_iso(
    seqA: InverseSequence,
    seqB: InverseSequence,
    i_arrow,
    j_arrow,
    eps: Fraction,
    budget: int,
    schedule: Optional[Sequence[Fraction]] = None,
) -> HomogeneityResult:
    """Approximate isomorphism between two builds relating i to j.

    Seeds the back-and-forth with a cross arrow a0 satisfying
    d(a0 . i, j) <= schedule[0] exactly, alternates realizations, and
    reports the exact verified error d(j_lifted, H . i_lifted) of the final
    stage map H.
    """
    eps = Fraction(eps)
    category = seqA.category
    if category is not seqB.category:
        raise ValueError("builds must share a category")
    bad = category.validate(i_arrow) + category.validate(j_arrow)
    if bad:
        raise ValueError(f"invalid anchor arrows: {bad}")
    if i_arrow.dom != j_arrow.dom:
        raise ValueError("anchor arrows must share their finite source object")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if schedule is None:
        if eps <= 0:
            schedule = [Q0] * budget
        else:
            schedule = [eps / 4 * Fraction(1, 2**k) for k in range(budget)]
    schedule = [Fraction(s) for s in schedule]

    stage_i = find_stage(seqA, i_arrow.cod)
    stage_j = find_stage(seqB, j_arrow.cod)

    comp_b = RunningComposites(seqB)
    seed = None
    for n0 in range(stage_j, seqB.depth + 1):
        j_lifted = category.compose(comp_b.get(stage_j, n0), j_arrow)
        found = category.try_match(i_arrow, j_lifted, schedule[0])
        if found is not None:
            a0, seed_error = found
            seed = (a0, stage_i, n0, seed_error)
            break
    if seed is None:
        return HomogeneityResult(
            achieved=Q0,
            eps=eps,
            ok=False,
            seed_error=Q0,
            final_dom_stage=stage_i,
            final_cod_stage=stage_j,
            final_arrow=None,
            result=BackAndForthResult([], False, "no seed arrow within the schedule"),
        )
    a0, stage_a, stage_b, seed_error = seed

    result = back_and_forth(
        seqA, seqB, schedule[1:], budget - 1, start=(a0, stage_a, stage_b)
    )
    last_ab = result.last_step("ab")
    if last_ab is None:
        H, dom_stage, cod_stage = a0, stage_a, stage_b
    else:
        H, dom_stage, cod_stage = last_ab.arrow, last_ab.dom_stage, last_ab.cod_stage

    comp_a = RunningComposites(seqA)
    i_lifted = category.compose(comp_a.get(stage_i, dom_stage), i_arrow)
    j_lifted = category.compose(comp_b.get(stage_j, cod_stage), j_arrow)
    achieved = category.distance(category.compose(H, i_lifted), j_lifted)
    return HomogeneityResult(
        achieved=achieved,
        eps=eps,
        ok=dist_lt(achieved, eps),
        seed_error=seed_error,
        final_dom_stage=dom_stage,
        final_cod_stage=cod_stage,
        final_arrow=H,
        result=result,
    )


def canonical_arrow_into(seq: InverseSequence, obj, from_stage: int = 0) -> tuple[Any, int]:
    """Deterministic anchor arrow from a finite object into the earliest
    admitting stage at or above from_stage; used by the homogeneity command
    and tests."""
    category = seq.category
    if flavor(category) == FAN:
        for s, stage_obj in enumerate(seq.objects):
            if s < from_stage:
                continue
            e = []
            used: set[int] = set()
            ok = True
            for i in range(obj.size):
                pick = None
                for c in range(stage_obj.size):
                    if c not in used and stage_obj.level(c) == obj.level(i):
                        pick = c
                        break
                if pick is None:
                    ok = False
                    break
                used.add(pick)
                e.append(pick)
            if not ok:
                continue
            anchor = max(range(obj.size), key=lambda i: (obj.level(i), -i))
            p = []
            for c in range(stage_obj.size):
                if c in used:
                    p.append(fans.FanPoint(e.index(c), Q1))
                else:
                    t = min(Q1, stage_obj.level(c) / obj.level(anchor))
                    p.append(fans.FanPoint(anchor, t))
            arrow = fans.FanArrow(dom=obj, cod=stage_obj, e=tuple(e), p=tuple(p))
            if not fans.validate_arrow(arrow):
                return arrow, s
        raise ValueError("no stage admits a level-exact embedding of the object")
    for s, stage_obj in enumerate(seq.objects):
        if s < from_stage or stage_obj.dim < obj.dim:
            continue
        e = tuple(range(obj.n_vertices))
        barycenter = tuple(
            Fraction(1, obj.n_vertices) for _ in range(obj.n_vertices)
        )
        p = [simplices.vertex(obj.dim, i) for i in range(obj.n_vertices)]
        p += [barycenter] * (stage_obj.n_vertices - obj.n_vertices)
        arrow = simplices.SimplexArrow(dom=obj, cod=stage_obj, e=e, p=tuple(p))
        if not simplices.validate_simplex_arrow(arrow):
            return arrow, s
    raise ValueError("no stage admits a stable embedding of the object")


# --- end-point swap renormalization ----------------------------------------


@dataclass
class SwapIsoReport:
    depth: int
    s_level: Fraction
    t_level: Fraction
    s_index: int
    t_index: int
    rebased_error: Distance
    stage_metric_bound: Distance
    homogeneity: HomogeneityResult
    renormalized_s: fans.FiniteFan
    renormalized_t: fans.FiniteFan


def embedded_index(seq: InverseSequence, ref: tuple[int, int], depth: int) -> int:
    stage, idx = ref
    if not (0 <= stage <= depth <= seq.depth):
        raise ValueError("end-point reference outside the sequence")
    current = idx
    for s in range(stage, depth):
        current = seq.bonds[s].e[current]
    return current


def endpoint_swap_iso(
    seq: InverseSequence,
    s_ref: tuple[int, int],
    t_ref: tuple[int, int],
    depth: int,
    b: Fraction = Fraction(1, 2),
    eps: Fraction = Fraction(1, 8),
    budget: int = 8,
) -> SwapIsoReport:
    """Two swap renormalizations plus a homogeneity run between them.

    Both end-points are rescaled to tips of maximal (unit) level at the
    given depth; the rebased two-stage sequences are compared by the
    homogeneity engine, and the verified error is reported along with its
    translation back to the stage metric.
    """
    if flavor(seq.category) != FAN:
        raise ValueError("end-point swap applies to fan builds")
    fan_d = seq.objects[depth]
    sides = {}
    for label, ref in (("s", s_ref), ("t", t_ref)):
        idx = embedded_index(seq, ref, depth)
        try:
            swapped, _scales = fans.swap_homeomorphism(fan_d, idx, b)
        except ValueError as exc:
            raise ValueError(
                f"depth {depth} insufficient for swap bound b={b}: {exc}"
            ) from exc
        level = swapped.level(idx)
        unit = fans.FiniteFan(
            tuple(
                fans.EndPoint(ep.address, ep.level / level)
                for ep in swapped.endpoints
            ),
            swapped.skeleton,
        )
        spike = fans.FiniteFan((unit.endpoints[idx],), None)
        base = fans.FiniteFan(
            unit.endpoints,
            None,
        )
        bond = fans.FanArrow(
            dom=spike,
            cod=base,
            e=(idx,),
            p=tuple(fans.FanPoint(0, base.level(c)) for c in range(base.size)),
        )
        mini = InverseSequence(seq.category, [spike, base], [bond])
        sides[label] = (mini, fan_d.level(idx), idx)

    mini_s, s_level, s_idx = sides["s"]
    mini_t, t_level, t_idx = sides["t"]
    i_arrow = seq.category.identity(mini_s.objects[0])
    j_arrow = fans.FanArrow(
        dom=mini_s.objects[0],
        cod=mini_t.objects[0],
        e=(0,),
        p=(fans.FanPoint(0, Q1),),
    )
    homog = homogeneity_iso(mini_s, mini_t, i_arrow, j_arrow, eps, budget)
    bound = homog.achieved * s_level
    return SwapIsoReport(
        depth=depth,
        s_level=s_level,
        t_level=t_level,
        s_index=s_idx,
        t_index=t_idx,
        rebased_error=homog.achieved,
        stage_metric_bound=bound,
        homogeneity=homog,
        renormalized_s=mini_s.objects[1],
        renormalized_t=mini_t.objects[1],
    )
