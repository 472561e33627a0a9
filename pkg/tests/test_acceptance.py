"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside the pytest verdicts. All tolerances are exact rationals.
"""

import time
from fractions import Fraction as F

from fanplex import fans, simplices
from fanplex.cli import counterexample_report, main
from fanplex.core import back_and_forth, check_fraisse_condition, check_metric_category
from fanplex.engine import canonical_arrow_into, density_gap_curve, homogeneity_iso
from fanplex.generators import (
    make_rng,
    random_fan,
    random_fan_amalgamation_instance,
    random_fan_triple,
    random_simplex_amalgamation_instance,
    random_simplex_triple,
)
from fanplex.rationals import Q0, Q1


def _verdict(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_acceptance_category_axioms():
    started = time.monotonic()
    rng = make_rng(101)
    fan_samples = [random_fan_triple(rng) for _ in range(1000)]
    fan_report = check_metric_category(
        fan_samples, fans.compose_fan_arrows, fans.fan_arrow_distance
    )
    simplex_samples = [random_simplex_triple(rng) for _ in range(1000)]
    simplex_report = check_metric_category(
        simplex_samples, simplices.compose_simplex_arrows, simplices.simplex_arrow_distance_l1
    )
    composition_ok = True
    for f0, _f1, g, h in fan_samples[:250]:
        ident_d, ident_c = fans.identity_arrow(f0.dom), fans.identity_arrow(f0.cod)
        composition_ok &= fans.fan_arrows_equal(fans.compose_fan_arrows(f0, ident_d), f0)
        composition_ok &= fans.fan_arrows_equal(fans.compose_fan_arrows(ident_c, f0), f0)
        left = fans.compose_fan_arrows(h, fans.compose_fan_arrows(f0, g))
        right = fans.compose_fan_arrows(fans.compose_fan_arrows(h, f0), g)
        composition_ok &= fans.fan_arrows_equal(left, right)
    for f0, _f1, g, h in simplex_samples[:250]:
        left = simplices.compose_simplex_arrows(h, simplices.compose_simplex_arrows(f0, g))
        right = simplices.compose_simplex_arrows(simplices.compose_simplex_arrows(h, f0), g)
        composition_ok &= simplices.simplex_arrows_equal(left, right)
    elapsed = time.monotonic() - started
    ok = (
        fan_report.ok
        and simplex_report.ok
        and composition_ok
        and fan_report.checked == simplex_report.checked == 1000
        and elapsed < 30
    )
    _verdict(
        "category-axioms",
        ok,
        f"1000 triples per category, 0 violations, {elapsed:.1f}s",
    )


def test_acceptance_strict_amalgamation():
    started = time.monotonic()
    rng = make_rng(102)
    ok = True
    for _ in range(100):
        f, g = random_fan_amalgamation_instance(rng)
        f2, g2 = fans.amalgamate_fans(f, g)
        ok &= fans.fan_arrows_equal(
            fans.compose_fan_arrows(f2, f), fans.compose_fan_arrows(g2, g)
        )
        ok &= not fans.validate_arrow(f2) and not fans.validate_arrow(g2)
    for _ in range(100):
        f, g = random_simplex_amalgamation_instance(rng)
        f2, g2 = simplices.amalgamate_simplices(f, g)
        ok &= simplices.simplex_arrows_equal(
            simplices.compose_simplex_arrows(f2, f),
            simplices.compose_simplex_arrows(g2, g),
        )
        ok &= f2.cod.dim == f.cod.dim + g.cod.dim - f.dom.dim
    elapsed = time.monotonic() - started
    ok = ok and elapsed < 10
    _verdict("strict-amalgamation", ok, f"100 instances per category, {elapsed:.1f}s")


def test_acceptance_retraction_correctness():
    rng = make_rng(103)
    sampled = 0
    ok = True
    while sampled < 1000:
        fan = random_fan(rng, max_endpoints=6)
        decomposition = fans.triangular_decomposition(fan, F(1, 2))
        members = decomposition.members()
        reps = tuple(
            max(group, key=lambda i: (fan.level(i), -i)) for group in members
        )
        arrow = fans.level_preserving_retraction(fan, decomposition, reps)
        ok &= fans.validate_arrow(arrow) == []
        for b in range(fan.size):
            ok &= fans.point_level(arrow.dom, arrow.p[b]) == fan.level(b)
        for _ in range(40):
            x = fans.FanPoint(rng.randrange(fan.size), F(rng.randint(0, 24), 24))
            ok &= fans.point_level(arrow.dom, fans.eval_p(arrow, x)) == fans.point_level(
                fan, x
            )
            sampled += 1
    _verdict("retraction-correctness", ok, f"{sampled} sampled points")


def test_acceptance_fraisse_witness(lelek200_s1, poulsen200_s1):
    ok = True
    details = []
    for label, build in (("lelek", lelek200_s1), ("poulsen", poulsen200_s1)):
        zero_errors = all(e.achieved == 0 for e in build.log.entries)
        started = time.monotonic()
        passes = check_fraisse_condition(build.sequence, build.log)
        check_seconds = time.monotonic() - started
        ok &= zero_errors and passes
        ok &= build.seconds < 60 and check_seconds < 60
        details.append(f"{label}: build {build.seconds:.1f}s check {check_seconds:.1f}s")
    _verdict("fraisse-witness", ok, "; ".join(details))


def test_acceptance_density(lelek200_s1, poulsen200_s1):
    started = time.monotonic()
    horizons = [10, 50, 100, 200]
    lelek_curve = density_gap_curve(lelek200_s1.sequence, 0, F(1, 8), horizons)
    lelek_gaps = [gap for _, gap in lelek_curve]
    lelek_ok = lelek_gaps[-1] < F(1, 8) and all(
        a >= b for a, b in zip(lelek_gaps, lelek_gaps[1:])
    )
    poulsen_curve = density_gap_curve(poulsen200_s1.sequence, 0, F(1, 8), horizons)
    poulsen_gaps = [gap for _, gap in poulsen_curve]
    poulsen_ok = poulsen_gaps[-1] < F(1, 64) and all(
        a >= b for a, b in zip(poulsen_gaps, poulsen_gaps[1:])
    )
    elapsed = time.monotonic() - started
    ok = lelek_ok and poulsen_ok and elapsed < 60
    _verdict(
        "density",
        ok,
        f"lelek gaps {[str(g) for g in lelek_gaps]}, poulsen worst {poulsen_gaps[-1]}, "
        f"{elapsed:.1f}s",
    )


def test_acceptance_uniqueness_back_and_forth(
    lelek200_s1, lelek200_s2, poulsen200_s1, poulsen200_s2
):
    threshold = F(1, 64)
    ok = True
    details = []
    for label, a, b in (
        ("lelek", lelek200_s1, lelek200_s2),
        ("poulsen", poulsen200_s1, poulsen200_s2),
    ):
        schedule = [F(1, 2**k) for k in range(20)]
        result = back_and_forth(a.sequence, b.sequence, schedule, 20)
        deep = [s for s in result.steps if max(s.dom_stage, s.cod_stage) >= 3]
        reached = bool(deep)
        small = all(s.roundtrip_error < threshold for s in deep)
        ok &= reached and small
        worst = max((s.roundtrip_error for s in deep), default=Q0)
        details.append(f"{label}: {len(result.steps)} rounds, worst deep error {worst}")
    _verdict("uniqueness-back-and-forth", ok, "; ".join(details))


def test_acceptance_almost_homogeneity(lelek200_s1, lelek200_s2):
    started = time.monotonic()
    two_spike = fans.FiniteFan(
        (fans.EndPoint("0", Q1), fans.EndPoint("1", F(1, 2)))
    )
    i_arrow, stage_i = canonical_arrow_into(lelek200_s1.sequence, two_spike)
    j_arrow, _ = canonical_arrow_into(
        lelek200_s2.sequence, two_spike, from_stage=stage_i + 1
    )
    distinct = i_arrow != j_arrow
    result = homogeneity_iso(
        lelek200_s1.sequence, lelek200_s2.sequence, i_arrow, j_arrow, F(1, 8), 24
    )
    elapsed = time.monotonic() - started
    ok = distinct and result.ok and result.achieved < F(1, 8) and elapsed < 60
    _verdict(
        "almost-homogeneity",
        ok,
        f"achieved {result.achieved}, {elapsed:.1f}s",
    )


def test_acceptance_counterexample():
    started = time.monotonic()
    report = counterexample_report(64)
    elapsed = time.monotonic() - started
    ok = (
        report["ok"]
        and report["first_coordinate_preserved"]
        and report["bottom_edge_fixed"]
        and report["strictly_monotone_off_center"]
        and report["center_collapse_pair"]["ok"]
        and elapsed < 5
    )
    _verdict("counterexample", ok, f"64x64 grid, {elapsed:.1f}s")


def test_acceptance_determinism(tmp_path, capsys):
    pairs = []
    for kind, budget in (("lelek", 60), ("poulsen", 40), ("lelek-paired", 40)):
        out1 = tmp_path / f"{kind}-1.json"
        out2 = tmp_path / f"{kind}-2.json"
        args = ["build", kind, "--budget", str(budget), "--seed", "5"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        pairs.append(out1.read_bytes() == out2.read_bytes())
        svg1 = tmp_path / f"{kind}-1.svg"
        svg2 = tmp_path / f"{kind}-2.svg"
        stage = str(budget // 2)
        assert main(["render", "--in", str(out1), "--stage", stage, "--svg", str(svg1)]) == 0
        assert main(["render", "--in", str(out2), "--stage", stage, "--svg", str(svg2)]) == 0
        pairs.append(svg1.read_bytes() == svg2.read_bytes())
    capsys.readouterr()
    _verdict("determinism", all(pairs), "byte-identical bundles and SVGs")
