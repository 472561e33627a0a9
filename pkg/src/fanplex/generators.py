"""Seeded random generators for fans, simplices, arrows, and law samples.

Used by the verification suites and the acceptance tests; everything is
driven by an explicit random.Random so runs reproduce exactly.
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import fans, simplices
from .rationals import Q1


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


def random_level(rng: random.Random, denom_bound: int = 8) -> Fraction:
    d = rng.randint(1, denom_bound)
    return Fraction(rng.randint(1, d), d)


def random_parameter(rng: random.Random, cap: Fraction, denom_bound: int = 8) -> Fraction:
    """Random t in [0, min(1, cap)] with bounded denominator."""
    cap = min(Q1, cap)
    d = rng.randint(1, denom_bound)
    top = (cap.numerator * d) // cap.denominator
    return Fraction(rng.randint(0, top), d)


def random_fan(
    rng: random.Random,
    max_endpoints: int = 5,
    denom_bound: int = 8,
    depth: int = 4,
    with_skeleton: bool = False,
) -> fans.FiniteFan:
    n = rng.randint(1, max_endpoints)
    addresses = rng.sample([format(i, f"0{depth}b") for i in range(2**depth)], n)
    endpoints = tuple(
        fans.EndPoint(addr, random_level(rng, denom_bound)) for addr in addresses
    )
    skeleton = None
    if with_skeleton:
        skeleton = frozenset(
            i for i in range(n) if rng.random() < 0.6
        ) or frozenset({0})
    return fans.FiniteFan(endpoints, skeleton)


def random_fan_extension(
    rng: random.Random, fan: fans.FiniteFan, spikes: int = 1, denom_bound: int = 8
) -> fans.FanArrow:
    """Arrow fan -> G where G adds fresh spikes with valid random targets."""
    cod = fan
    targets = []
    for _ in range(spikes):
        level = random_level(rng, denom_bound)
        cod = fans.extend_with_spike(cod, level)
        j = rng.randrange(fan.size)
        t = random_parameter(rng, level / fan.level(j), denom_bound)
        targets.append(fans.FanPoint(j, t))
    p = tuple(fans.FanPoint(i, Q1) for i in range(fan.size)) + tuple(targets)
    return fans.FanArrow(dom=fan, cod=cod, e=tuple(range(fan.size)), p=p)


def resample_free_targets(rng: random.Random, f: fans.FanArrow, denom_bound: int = 8) -> fans.FanArrow:
    """Same embedding and cod, fresh retraction targets off the image."""
    image = set(f.e)
    p = list(f.p)
    for b in range(f.cod.size):
        if b in image:
            continue
        j = rng.randrange(f.dom.size)
        t = random_parameter(rng, f.cod.level(b) / f.dom.level(j), denom_bound)
        p[b] = fans.FanPoint(j, t)
    return fans.FanArrow(dom=f.dom, cod=f.cod, e=f.e, p=tuple(p))


def random_subfan_arrow(
    rng: random.Random, fan: fans.FiniteFan, denom_bound: int = 8
) -> fans.FanArrow:
    """Arrow X -> fan from the sub-fan on a random end-point subset."""
    k = rng.randint(1, fan.size)
    chosen = sorted(rng.sample(range(fan.size), k))
    dom = fans.FiniteFan(tuple(fan.endpoints[i] for i in chosen))
    p = []
    for b in range(fan.size):
        if b in chosen:
            p.append(fans.FanPoint(chosen.index(b), Q1))
        else:
            j = rng.randrange(dom.size)
            t = random_parameter(rng, fan.level(b) / dom.level(j), denom_bound)
            p.append(fans.FanPoint(j, t))
    return fans.FanArrow(dom=dom, cod=fan, e=tuple(chosen), p=tuple(p))


def random_fan_triple(rng: random.Random):
    """(f0, f1, g, h) with f0, f1: F -> G sharing e, g: X -> F, h: G -> H."""
    F = random_fan(rng)
    f0 = random_fan_extension(rng, F, spikes=rng.randint(1, 2))
    f1 = resample_free_targets(rng, f0)
    g = random_subfan_arrow(rng, F)
    h = random_fan_extension(rng, f0.cod, spikes=1)
    return f0, f1, g, h


def random_fan_amalgamation_instance(rng: random.Random):
    C = random_fan(rng, max_endpoints=4)
    f = random_fan_extension(rng, C, spikes=rng.randint(1, 2))
    g = random_fan_extension(rng, C, spikes=rng.randint(1, 2))
    return f, g


def random_point(rng: random.Random, dim: int, denom_bound: int = 8) -> simplices.BPoint:
    q = rng.randint(1, denom_bound)
    cuts = sorted(rng.randint(0, q) for _ in range(dim))
    parts = []
    prev = 0
    for c in cuts + [q]:
        parts.append(c - prev)
        prev = c
    return tuple(Fraction(a, q) for a in parts)


def random_simplex_arrow(
    rng: random.Random, dom_dim: int, cod_dim: int, denom_bound: int = 8
) -> simplices.SimplexArrow:
    dom = simplices.Simplex(dom_dim)
    cod = simplices.Simplex(cod_dim)
    e = tuple(sorted(rng.sample(range(cod_dim + 1), dom_dim + 1)))
    p: list = [None] * (cod_dim + 1)
    for i, j in enumerate(e):
        p[j] = simplices.vertex(dom_dim, i)
    for j in range(cod_dim + 1):
        if p[j] is None:
            p[j] = random_point(rng, dom_dim, denom_bound)
    return simplices.SimplexArrow(dom=dom, cod=cod, e=e, p=tuple(p))


def resample_simplex_free(rng: random.Random, f: simplices.SimplexArrow, denom_bound: int = 8):
    image = set(f.e)
    p = list(f.p)
    for j in range(f.cod.n_vertices):
        if j not in image:
            p[j] = random_point(rng, f.dom.dim, denom_bound)
    return simplices.SimplexArrow(dom=f.dom, cod=f.cod, e=f.e, p=tuple(p))


def random_simplex_triple(rng: random.Random):
    dx = rng.randint(0, 2)
    df = dx + rng.randint(0, 2)
    dg = df + rng.randint(1, 2)
    dh = dg + rng.randint(1, 2)
    g = random_simplex_arrow(rng, dx, df)
    f0 = random_simplex_arrow(rng, df, dg)
    f1 = resample_simplex_free(rng, f0)
    h = random_simplex_arrow(rng, dg, dh)
    return f0, f1, g, h


def random_simplex_amalgamation_instance(rng: random.Random):
    k = rng.randint(0, 2)
    f = random_simplex_arrow(rng, k, k + rng.randint(0, 2))
    g = random_simplex_arrow(rng, k, k + rng.randint(0, 2))
    # A common dom requires identical dom objects, which Simplex(k) gives.
    return f, g
