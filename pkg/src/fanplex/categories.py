"""Concrete categories wired into the generic machinery.

Three instances: plain fans, fans with a marked skeleton, and simplices.
Each bundles composition, metrics, strict amalgamation, the deterministic
dense-arrow task stream used by the sequence builder, and the matcher the
back-and-forth engine uses to realize a cross arrow against an existing
sequence.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from . import fans, simplices
from .core import Category
from .rationals import Distance, Q0, Q1, dist_le, fmt_rat, parse_rat

FAN = "fan"
FAN_PAIRED = "fan-paired"
SIMPLEX = "simplex"

CATEGORY_TAGS = (FAN, FAN_PAIRED, SIMPLEX)


def _shuffle_key(cfg, stage: int, klass: int, label: str) -> str:
    text = f"{cfg.seed}|{stage}|{klass}|{label}"
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def _reduced_fractions(denominator: int, include_zero: bool, include_one: bool):
    """Fractions in [0, 1] whose reduced denominator is exactly the given one."""
    if denominator == 1:
        out = []
        if include_zero:
            out.append(Q0)
        if include_one:
            out.append(Q1)
        return out
    return [
        Fraction(n, denominator)
        for n in range(1, denominator)
        if gcd(n, denominator) == 1
    ]


# --- fan category -----------------------------------------------------------

_fan_stream_cache: dict = {}


def _fan_stream(cfg, fan: fans.FiniteFan, stage: int) -> list[tuple[Fraction, Fraction, int]]:
    """Deterministic (t, level, spike) stream for single-spike extension tasks.

    Members are grouped by the larger of the two reduced denominators, so
    coarse targets come first; the seed only permutes members inside each
    group. The constraint t * level(spike) <= level keeps the retraction
    1-Lipschitz.
    """
    key = (cfg, stage, tuple(ep.level for ep in fan.endpoints))
    cached = _fan_stream_cache.get(key)
    if cached is not None:
        return cached
    spikes = range(min(fan.size, cfg.size_bound))
    stream: list[tuple[Fraction, Fraction, int]] = []
    for klass in range(1, cfg.denom_bound + 1):
        members = []
        for dt in range(1, klass + 1):
            for t in _reduced_fractions(dt, include_zero=True, include_one=True):
                for dl in range(1, klass + 1):
                    if max(dt, dl) != klass:
                        continue
                    for lam in _reduced_fractions(dl, include_zero=False, include_one=True):
                        for j in spikes:
                            if t * fan.level(j) <= lam:
                                members.append((t, lam, j))
        members.sort(
            key=lambda m: _shuffle_key(cfg, stage, klass, f"{m[0]}|{m[1]}|{m[2]}")
        )
        stream.extend(members)
    _fan_stream_cache[key] = stream
    return stream


def _fan_task_arrow(cfg, fan: fans.FiniteFan, stage: int, k: int) -> fans.FanArrow:
    stream = _fan_stream(cfg, fan, stage)
    t, lam, j = stream[k % len(stream)]
    skeleton_member = fan.skeleton is not None and k % 2 == 0
    target = fans.extend_with_spike(fan, lam, skeleton_member=skeleton_member)
    p = tuple(fans.FanPoint(i, Q1) for i in range(fan.size)) + (fans.FanPoint(j, t),)
    return fans.FanArrow(dom=fan, cod=target, e=tuple(range(fan.size)), p=p)


def _bipartite_match(
    free: Sequence[int], adjacency: dict[int, list[int]]
) -> Optional[dict[int, int]]:
    """Deterministic augmenting-path matching; None unless every free node
    gets a distinct partner."""
    owner: dict[int, int] = {}

    def assign(y: int, banned: set[int]) -> bool:
        for c in adjacency[y]:
            if c in banned:
                continue
            banned.add(c)
            if c not in owner or assign(owner[c], banned):
                owner[c] = y
                return True
        return False

    for y in free:
        if not assign(y, set()):
            return None
    return {y: c for c, y in owner.items()}


def _fan_try_match(
    cross: fans.FanArrow, bond: fans.FanArrow, eps: Distance
) -> Optional[tuple[fans.FanArrow, Distance]]:
    """Realize cross: X -> Y against bond: X -> X2 as an arrow Y -> X2.

    The embedding is forced on the image of cross and matched level-exactly
    elsewhere; retraction targets transport the bond's targets through
    cross, so only matched end-points contribute round-trip error.
    """
    X, Y, X2 = cross.dom, cross.cod, bond.cod
    forced = {cross.e[i]: bond.e[i] for i in range(X.size)}
    free = [y for y in range(Y.size) if y not in forced]
    taken = set(bond.e)

    # A level multiset fast check before the full matching.
    needed: dict[Fraction, int] = {}
    for y in free:
        needed[Y.level(y)] = needed.get(Y.level(y), 0) + 1
    available: dict[Fraction, int] = {}
    for c in range(X2.size):
        if c not in taken:
            available[X2.level(c)] = available.get(X2.level(c), 0) + 1
    if any(available.get(level, 0) < n for level, n in needed.items()):
        return None

    errors: dict[tuple[int, int], Fraction] = {}
    adjacency: dict[int, list[int]] = {}
    for y in free:
        options = []
        for c in range(X2.size):
            if c in taken or X2.level(c) != Y.level(y):
                continue
            err = fans.fan_distance(X, cross.p[y], bond.p[c])
            if dist_le(err, eps):
                options.append((err, c))
                errors[(y, c)] = err
        options.sort()
        adjacency[y] = [c for _, c in options]
    matched = _bipartite_match(free, adjacency)
    if matched is None:
        return None

    e_b = [0] * Y.size
    for y, c in forced.items():
        e_b[y] = c
    for y, c in matched.items():
        e_b[y] = c
    inverse = {c: y for y, c in enumerate(e_b)}
    p_b = []
    for c in range(X2.size):
        if c in inverse:
            p_b.append(fans.FanPoint(inverse[c], Q1))
        else:
            target = bond.p[c]
            p_b.append(fans.FanPoint(cross.e[target.spike], target.t))
    arrow = fans.FanArrow(dom=Y, cod=X2, e=tuple(e_b), p=tuple(p_b))
    if fans.validate_arrow(arrow):
        return None
    err_max = Q0
    for y, c in matched.items():
        err_max = max(err_max, errors[(y, c)])
    return arrow, err_max


def _fan_point_metric(obj, x, y):
    return fans.fan_distance(obj, x, y)


def _fan_seed_object(cfg) -> fans.FiniteFan:
    endpoints = (fans.EndPoint("", Q1),)
    skeleton = frozenset({0}) if cfg.category == FAN_PAIRED else None
    return fans.FiniteFan(endpoints, skeleton)


def _fan_summary(fan: fans.FiniteFan) -> dict:
    return {
        "endpoints": fan.size,
        "max_level": fmt_rat(fan.max_level()),
        "skeleton": None if fan.skeleton is None else len(fan.skeleton),
    }


def _fan_to_json(fan: fans.FiniteFan) -> dict:
    data = {
        "endpoints": [
            {"address": ep.address, "level": fmt_rat(ep.level)}
            for ep in fan.endpoints
        ]
    }
    if fan.skeleton is not None:
        data["skeleton"] = sorted(fan.skeleton)
    return data


def _fan_from_json(data: dict) -> fans.FiniteFan:
    endpoints = tuple(
        fans.EndPoint(item["address"], parse_rat(item["level"]))
        for item in data["endpoints"]
    )
    skeleton = frozenset(data["skeleton"]) if "skeleton" in data else None
    return fans.FiniteFan(endpoints, skeleton)


def _fan_arrow_to_json(arrow: fans.FanArrow) -> dict:
    return {
        "e": list(arrow.e),
        "p": [{"spike": pt.spike, "t": fmt_rat(pt.t)} for pt in arrow.p],
    }


def _fan_arrow_from_json(data: dict, dom, cod) -> fans.FanArrow:
    return fans.FanArrow(
        dom=dom,
        cod=cod,
        e=tuple(data["e"]),
        p=tuple(fans.FanPoint(item["spike"], parse_rat(item["t"])) for item in data["p"]),
    )


def _make_fan_category(tag: str) -> Category:
    return Category(
        name=tag,
        identity=fans.identity_arrow,
        compose=fans.compose_fan_arrows,
        distance=fans.fan_arrow_distance,
        laws_distance=fans.fan_arrow_distance,
        eval_p=fans.eval_p,
        validate=fans.validate_arrow,
        arrows_equal=fans.fan_arrows_equal,
        amalgamate=fans.amalgamate_fans,
        seed_object=_fan_seed_object,
        task_arrow=_fan_task_arrow,
        try_match=_fan_try_match,
        obj_summary=_fan_summary,
        obj_to_json=_fan_to_json,
        obj_from_json=_fan_from_json,
        arrow_to_json=_fan_arrow_to_json,
        arrow_from_json=_fan_arrow_from_json,
    )


# --- simplex category -------------------------------------------------------

_simplex_stream_cache: dict = {}


def _simplex_stream(cfg, simp: simplices.Simplex, stage: int) -> list[simplices.BPoint]:
    """Deterministic retraction-target stream for single-vertex extensions.

    Targets are supported on the first size_bound coordinates and grouped by
    reduced common denominator, coarse first; the seed permutes within each
    group.
    """
    key = (cfg, stage, simp.dim)
    cached = _simplex_stream_cache.get(key)
    if cached is not None:
        return cached
    support_dim = min(simp.dim, cfg.size_bound - 1)
    stream: list[simplices.BPoint] = []
    pad = (Q0,) * (simp.dim - support_dim)
    for q in range(1, cfg.denom_bound + 1):
        members = [pt + pad for pt in simplices.rational_points_exact(support_dim, q)]
        members.sort(key=lambda pt: _shuffle_key(cfg, stage, q, repr(pt)))
        stream.extend(members)
    _simplex_stream_cache[key] = stream
    return stream


def _simplex_task_arrow(cfg, simp: simplices.Simplex, stage: int, k: int) -> simplices.SimplexArrow:
    stream = _simplex_stream(cfg, simp, stage)
    target_point = stream[k % len(stream)]
    target = simplices.Simplex(simp.dim + 1)
    p = tuple(simplices.vertex(simp.dim, i) for i in range(simp.n_vertices)) + (
        target_point,
    )
    return simplices.SimplexArrow(
        dom=simp, cod=target, e=tuple(range(simp.n_vertices)), p=p
    )


def _simplex_try_match(
    cross: simplices.SimplexArrow, bond: simplices.SimplexArrow, eps: Distance
) -> Optional[tuple[simplices.SimplexArrow, Distance]]:
    X, Y, X2 = cross.dom, cross.cod, bond.cod
    forced = {cross.e[i]: bond.e[i] for i in range(X.n_vertices)}
    free = [y for y in range(Y.n_vertices) if y not in forced]
    taken = set(bond.e)
    if len(free) > X2.n_vertices - len(taken):
        return None

    errors: dict[tuple[int, int], Fraction] = {}
    adjacency: dict[int, list[int]] = {}
    for y in free:
        options = []
        for c in range(X2.n_vertices):
            if c in taken:
                continue
            err = simplices.sq_dist(cross.p[y], bond.p[c])
            if dist_le(err, eps):
                options.append((err, c))
                errors[(y, c)] = err
        options.sort()
        adjacency[y] = [c for _, c in options]
    matched = _bipartite_match(free, adjacency)
    if matched is None:
        return None

    e_b = [0] * Y.n_vertices
    for y, c in forced.items():
        e_b[y] = c
    for y, c in matched.items():
        e_b[y] = c
    inverse = {c: y for y, c in enumerate(e_b)}
    p_b = []
    for c in range(X2.n_vertices):
        if c in inverse:
            p_b.append(simplices.vertex(Y.dim, inverse[c]))
        else:
            out = [Q0] * Y.n_vertices
            for i, weight in enumerate(bond.p[c]):
                if weight != 0:
                    out[cross.e[i]] += weight
            p_b.append(tuple(out))
    arrow = simplices.SimplexArrow(dom=Y, cod=X2, e=tuple(e_b), p=tuple(p_b))
    if simplices.validate_simplex_arrow(arrow):
        return None
    err_max = Q0
    for y, c in matched.items():
        err_max = max(err_max, errors[(y, c)])
    return arrow, err_max


def _simplex_seed_object(cfg) -> simplices.Simplex:
    return simplices.Simplex(0)


def _simplex_summary(simp: simplices.Simplex) -> dict:
    return {"dim": simp.dim}


def _simplex_to_json(simp: simplices.Simplex) -> dict:
    return {"dim": simp.dim}


def _simplex_from_json(data: dict) -> simplices.Simplex:
    return simplices.Simplex(int(data["dim"]))


def _simplex_arrow_to_json(arrow: simplices.SimplexArrow) -> dict:
    return {
        "dom": arrow.dom.dim,
        "cod": arrow.cod.dim,
        "e": list(arrow.e),
        "p": [[fmt_rat(c) for c in pt] for pt in arrow.p],
    }


def _simplex_arrow_from_json(data: dict, dom=None, cod=None) -> simplices.SimplexArrow:
    dom = dom if dom is not None else simplices.Simplex(int(data["dom"]))
    cod = cod if cod is not None else simplices.Simplex(int(data["cod"]))
    return simplices.SimplexArrow(
        dom=dom,
        cod=cod,
        e=tuple(data["e"]),
        p=tuple(tuple(parse_rat(c) for c in pt) for pt in data["p"]),
    )


_SIMPLEX_CATEGORY = Category(
    name=SIMPLEX,
    identity=simplices.identity_simplex_arrow,
    compose=simplices.compose_simplex_arrows,
    distance=simplices.simplex_arrow_distance,
    laws_distance=simplices.simplex_arrow_distance_l1,
    eval_p=lambda arrow, x: simplices.apply_projection(arrow, x),
    validate=simplices.validate_simplex_arrow,
    arrows_equal=simplices.simplex_arrows_equal,
    amalgamate=simplices.amalgamate_simplices,
    seed_object=_simplex_seed_object,
    task_arrow=_simplex_task_arrow,
    try_match=_simplex_try_match,
    obj_summary=_simplex_summary,
    obj_to_json=_simplex_to_json,
    obj_from_json=_simplex_from_json,
    arrow_to_json=_simplex_arrow_to_json,
    arrow_from_json=_simplex_arrow_from_json,
)

_FAN_CATEGORY = _make_fan_category(FAN)
_FAN_PAIRED_CATEGORY = _make_fan_category(FAN_PAIRED)

_BY_TAG = {
    FAN: _FAN_CATEGORY,
    FAN_PAIRED: _FAN_PAIRED_CATEGORY,
    SIMPLEX: _SIMPLEX_CATEGORY,
}


def get_category(tag: str) -> Category:
    if tag not in _BY_TAG:
        raise ValueError(f"unknown category {tag!r}; expected one of {CATEGORY_TAGS}")
    return _BY_TAG[tag]


def flavor(category: Category) -> str:
    """"fan" or "simplex", independent of the paired marking."""
    return SIMPLEX if category.name == SIMPLEX else FAN
