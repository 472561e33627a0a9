from fractions import Fraction as F

import pytest

from fanplex import fans
from fanplex.categories import get_category
from fanplex.core import InverseSequence, check_fraisse_condition
from fanplex.engine import (
    DenseFamilyConfig,
    build_fraisse_sequence,
    canonical_arrow_into,
    default_eps,
    density_gap_curve,
    density_report,
    endpoint_swap_iso,
    homogeneity_iso,
    limit_thread,
    task_schedule,
)
from fanplex.jsonio import bundle_to_json, canonical_dumps
from fanplex.rationals import Q1


def test_task_schedule_ruler_order():
    first = [task_schedule(i) for i in range(8)]
    assert first == [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (0, 3), (3, 0)]
    # Stage m receives roughly half the visits of stage m-1.
    stages = [task_schedule(i)[0] for i in range(200)]
    assert stages.count(0) == 100
    assert stages.count(1) == 50


def test_build_budget_zero():
    for category in ("fan", "simplex", "fan-paired"):
        report = build_fraisse_sequence(DenseFamilyConfig(category), 0)
        assert report.sequence.depth == 0
        assert report.log.entries == []


def test_build_is_deterministic():
    cfg = DenseFamilyConfig("fan", seed=9)
    a = build_fraisse_sequence(cfg, 30)
    b = build_fraisse_sequence(cfg, 30)
    assert canonical_dumps(bundle_to_json(a)) == canonical_dumps(bundle_to_json(b))


def test_build_seeds_differ():
    a = build_fraisse_sequence(DenseFamilyConfig("fan", seed=1), 30)
    b = build_fraisse_sequence(DenseFamilyConfig("fan", seed=2), 30)
    assert canonical_dumps(bundle_to_json(a)) != canonical_dumps(bundle_to_json(b))


def test_fan_build_realizes_tasks_exactly():
    report = build_fraisse_sequence(DenseFamilyConfig("fan", seed=3), 50)
    assert len(report.log.entries) == 50
    assert all(entry.achieved == 0 for entry in report.log.entries)
    assert check_fraisse_condition(report.sequence, report.log)
    for i, entry in enumerate(report.log.entries):
        assert entry.eps == default_eps(i)
        assert entry.n == i + 1


def test_simplex_build_dimension_arithmetic():
    report = build_fraisse_sequence(DenseFamilyConfig("simplex", seed=3), 50)
    dims = [obj.dim for obj in report.sequence.objects]
    assert dims == list(range(51))
    for entry in report.log.entries:
        # One single-vertex extension amalgamated over stage m into the top.
        ell = entry.target.dim
        assert ell == entry.m + 1
        assert report.sequence.objects[entry.n].dim == ell + (entry.n - 1) - entry.m


def test_limit_thread_singleton_and_coherence():
    report = build_fraisse_sequence(DenseFamilyConfig("fan", seed=5), 12)
    seq = report.sequence
    x0 = fans.FanPoint(0, Q1)
    assert limit_thread(seq, 0, x0) == [x0]
    x = fans.FanPoint(seq.objects[6].size - 1, F(3, 4))
    thread = limit_thread(seq, 6, x)
    assert len(thread) == 7
    for m in range(6):
        assert thread[m] == fans.eval_p(seq.bonds[m], thread[m + 1])
    direct = fans.eval_p(seq.bonds[0], fans.eval_p(seq.bonds[1], thread[2]))
    assert thread[0] == direct


def test_limit_thread_stage_out_of_range():
    report = build_fraisse_sequence(DenseFamilyConfig("fan"), 3)
    with pytest.raises(ValueError):
        limit_thread(report.sequence, 9, fans.FanPoint.apex())


def test_limit_thread_simplex_coherence():
    from fanplex import simplices

    report = build_fraisse_sequence(DenseFamilyConfig("simplex", seed=5), 10)
    seq = report.sequence
    x = simplices.vertex(seq.objects[6].dim, seq.objects[6].dim)
    thread = limit_thread(seq, 6, x)
    assert len(thread) == 7
    for m in range(6):
        assert thread[m] == simplices.apply_projection(seq.bonds[m], thread[m + 1])
    assert thread[0] == (Q1,)


def test_density_horizon_equals_stage():
    report = build_fraisse_sequence(DenseFamilyConfig("fan", seed=5), 8)
    rep = density_report(report.sequence, 0, F(1, 8), 0)
    assert rep.worst_gap <= report.sequence.objects[0].max_level()
    assert rep.candidate_count == report.sequence.objects[0].size


def test_density_monotone_in_horizon():
    report = build_fraisse_sequence(DenseFamilyConfig("fan", seed=5), 60)
    curve = density_gap_curve(report.sequence, 0, F(1, 8), [5, 20, 40, 60])
    gaps = [g for _, g in curve]
    assert all(a >= b for a, b in zip(gaps, gaps[1:]))


def test_density_rejects_bad_mesh():
    report = build_fraisse_sequence(DenseFamilyConfig("fan"), 4)
    with pytest.raises(ValueError):
        density_report(report.sequence, 0, F(0), 2)
    with pytest.raises(ValueError):
        density_report(report.sequence, 0, F(3, 2), 2)
    with pytest.raises(ValueError):
        density_report(report.sequence, 3, F(1, 2), 1)


def test_density_flags_unrefined_spike():
    # A two-stage sequence whose only projection target is the apex leaves
    # the middle of the seed spike uncovered: the gap stays at 1/2.
    cat = get_category("fan")
    seed = fans.FiniteFan((fans.EndPoint("", Q1),))
    top = fans.FiniteFan((fans.EndPoint("0", Q1), fans.EndPoint("1", F(1, 2))))
    bond = fans.FanArrow(
        dom=seed, cod=top, e=(0,), p=(fans.FanPoint(0, Q1), fans.FanPoint.apex())
    )
    seq = InverseSequence(cat, [seed, top], [bond])
    rep = density_report(seq, 0, F(1, 8), 1)
    assert rep.worst_gap == F(1, 2)
    assert rep.worst_gap > F(1, 8)


def test_density_simplex_stage_zero_trivial():
    report = build_fraisse_sequence(DenseFamilyConfig("simplex", seed=5), 20)
    rep = density_report(report.sequence, 0, F(1, 8), 20)
    assert rep.worst_gap == 0
    assert rep.metric == "squared_euclidean"


def test_density_simplex_nontrivial_stage():
    report = build_fraisse_sequence(DenseFamilyConfig("simplex", seed=5), 40)
    rep = density_report(report.sequence, 1, F(1, 4), 40)
    assert rep.metric == "squared_euclidean"
    assert rep.worst_gap < F(1, 16)
    coarse = density_report(report.sequence, 1, F(1, 4), 2)
    assert coarse.worst_gap >= rep.worst_gap


def test_homogeneity_identity_is_exact():
    report = build_fraisse_sequence(DenseFamilyConfig("fan", seed=6), 40)
    fan = fans.FiniteFan((fans.EndPoint("0", Q1), fans.EndPoint("1", F(1, 2))))
    i_arrow, _ = canonical_arrow_into(report.sequence, fan)
    res = homogeneity_iso(report.sequence, report.sequence, i_arrow, i_arrow, F(1, 8), 8)
    assert res.achieved == 0
    assert res.ok


def test_homogeneity_eps_zero_is_unreachable_between_runs():
    a = build_fraisse_sequence(DenseFamilyConfig("fan", seed=6), 40)
    b = build_fraisse_sequence(DenseFamilyConfig("fan", seed=7), 40)
    fan = fans.FiniteFan((fans.EndPoint("0", Q1), fans.EndPoint("1", F(1, 2))))
    i_arrow, _ = canonical_arrow_into(a.sequence, fan)
    j_arrow, _ = canonical_arrow_into(b.sequence, fan)
    res = homogeneity_iso(a.sequence, b.sequence, i_arrow, j_arrow, F(0), 8)
    assert not res.ok


def test_homogeneity_error_bookkeeping():
    a = build_fraisse_sequence(DenseFamilyConfig("fan", seed=6), 60)
    b = build_fraisse_sequence(DenseFamilyConfig("fan", seed=7), 60)
    fan = fans.FiniteFan((fans.EndPoint("0", Q1), fans.EndPoint("1", F(1, 2))))
    i_arrow, _ = canonical_arrow_into(a.sequence, fan)
    j_arrow, _ = canonical_arrow_into(b.sequence, fan)
    eps = F(1, 8)
    res = homogeneity_iso(a.sequence, b.sequence, i_arrow, j_arrow, eps, 12)
    for step in res.result.steps:
        assert step.roundtrip_error <= step.eps
    # The schedule is a geometric series below eps/2, and the verified bound
    # stays below the consumed total.
    assert res.seed_error + res.result.total_error <= eps / 2
    assert res.achieved <= eps / 2
    assert res.ok


def test_homogeneity_simplex_squared_threshold(poulsen200_s1, poulsen200_s2):
    from fanplex.simplices import Simplex

    obj = Simplex(1)
    i_arrow, si = canonical_arrow_into(poulsen200_s1.sequence, obj)
    j_arrow, _ = canonical_arrow_into(poulsen200_s2.sequence, obj, from_stage=si + 1)
    assert i_arrow != j_arrow
    res = homogeneity_iso(
        poulsen200_s1.sequence, poulsen200_s2.sequence, i_arrow, j_arrow, F(1, 64), 24
    )
    # Achieved error is a squared Euclidean quantity; 1/64 is the squared
    # threshold.
    assert res.ok and res.achieved < F(1, 64)


def test_density_strictly_improves_between_mid_horizons(lelek200_s1):
    gaps = dict(density_gap_curve(lelek200_s1.sequence, 0, F(1, 8), [50, 200]))
    assert gaps[200] < gaps[50]


def test_canonical_arrow_into_requires_matching_levels():
    report = build_fraisse_sequence(DenseFamilyConfig("fan", seed=6), 10)
    weird = fans.FiniteFan((fans.EndPoint("0", F(153, 154)),))
    with pytest.raises(ValueError):
        canonical_arrow_into(report.sequence, weird)


def test_paired_build_skeleton_coherence(paired60):
    seq = paired60.sequence
    assert check_fraisse_condition(seq, paired60.log)
    for bond in seq.bonds:
        assert bond.dom.skeleton is not None and bond.cod.skeleton is not None
        for i in bond.dom.skeleton:
            assert bond.e[i] in bond.cod.skeleton
        assert fans.skeleton_reflecting(bond)
    top = seq.objects[-1]
    assert 0 < len(top.skeleton) < top.size


def test_endpoint_swap_iso_identity(paired60):
    rep = endpoint_swap_iso(paired60.sequence, (2, 0), (2, 0), depth=12, b=F(1, 100))
    assert rep.rebased_error == 0
    assert rep.stage_metric_bound == 0


def test_endpoint_swap_iso_distinct_endpoints(paired60):
    rep = endpoint_swap_iso(
        paired60.sequence, (2, 0), (4, 1), depth=12, b=F(1, 100), eps=F(1, 8)
    )
    assert rep.rebased_error < F(1, 8)
    assert rep.stage_metric_bound <= rep.rebased_error
    # The renormalized distinguished spikes sit at unit, maximal level.
    assert rep.renormalized_s.level(rep.s_index) == Q1
    assert rep.renormalized_t.level(rep.t_index) == Q1
    assert rep.renormalized_s.max_level() == Q1
    assert rep.renormalized_t.max_level() == Q1


def test_endpoint_swap_requires_enough_depth(paired60):
    seq = paired60.sequence
    depth = 12
    top_level = seq.objects[depth].max_level()
    low = None
    from fanplex.engine import embedded_index

    for stage in range(1, depth + 1):
        for idx in range(seq.objects[stage].size):
            at_depth = embedded_index(seq, (stage, idx), depth)
            if seq.objects[depth].level(at_depth) < top_level * F(99, 100):
                low = (stage, idx)
                break
        if low:
            break
    assert low is not None
    with pytest.raises(ValueError):
        endpoint_swap_iso(seq, low, low, depth=depth, b=F(99, 100))


def test_fraisse_threads_env_changes_nothing(monkeypatch):
    report = build_fraisse_sequence(DenseFamilyConfig("fan", seed=5), 30)
    base = density_report(report.sequence, 0, F(1, 8), 30)
    monkeypatch.setenv("FRAISSE_THREADS", "3")
    threaded = density_report(report.sequence, 0, F(1, 8), 30)
    assert threaded.worst_gap == base.worst_gap
    assert [w.gap for w in threaded.witnesses] == [w.gap for w in base.witnesses]
    monkeypatch.setenv("FRAISSE_THREADS", "zero")
    with pytest.raises(ValueError):
        density_report(report.sequence, 0, F(1, 8), 30)
