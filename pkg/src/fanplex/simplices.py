"""Finite-dimensional simplices with exact barycentric coordinates.

Points are tuples of nonnegative Fractions summing to one. Arrows pair a
vertex injection with per-vertex retraction targets; projections extend
affinely from vertices, so every max in the arrow metric is attained at a
vertex. Euclidean quantities are kept as exact squared rationals, and the
l1 vertex metric is provided alongside because all projections contract it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Sequence

from .rationals import INFINITY, Distance, Q0, Q1, dist_max

BPoint = tuple[Fraction, ...]


def bary(values: Sequence[Fraction | int | str]) -> BPoint:
    coords = tuple(Fraction(v) for v in values)
    if any(c < 0 for c in coords):
        raise ValueError(f"negative barycentric coordinate in {coords}")
    if sum(coords) != 1:
        raise ValueError(f"barycentric coordinates must sum to 1, got {coords}")
    return coords


def vertex(dim: int, i: int) -> BPoint:
    if not (0 <= i <= dim):
        raise ValueError(f"vertex {i} out of range for dimension {dim}")
    return tuple(Q1 if j == i else Q0 for j in range(dim + 1))


@dataclass(frozen=True)
class Simplex:
    dim: int

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("dimension must be nonnegative")

    @property
    def n_vertices(self) -> int:
        return self.dim + 1


@dataclass(frozen=True)
class SimplexArrow:
    dom: Simplex
    cod: Simplex
    e: tuple[int, ...]
    p: tuple[BPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "e", tuple(self.e))
        p = self.p
        if not (
            isinstance(p, tuple)
            and all(
                isinstance(pt, tuple) and all(type(c) is Fraction for c in pt)
                for pt in p
            )
        ):
            p = tuple(tuple(Fraction(c) for c in pt) for pt in p)
        object.__setattr__(self, "p", p)


def identity_simplex_arrow(s: Simplex) -> SimplexArrow:
    return SimplexArrow(
        dom=s,
        cod=s,
        e=tuple(range(s.n_vertices)),
        p=tuple(vertex(s.dim, i) for i in range(s.n_vertices)),
    )


def validate_simplex_arrow(f: SimplexArrow) -> list[str]:
    out: list[str] = []
    if len(f.e) != f.dom.n_vertices:
        out.append(f"e has {len(f.e)} entries for dom of dimension {f.dom.dim}")
        return out
    if len(f.p) != f.cod.n_vertices:
        out.append(f"p has {len(f.p)} entries for cod of dimension {f.cod.dim}")
        return out
    if any(not (0 <= j < f.cod.n_vertices) for j in f.e):
        out.append("e maps outside the cod vertex range")
        return out
    if len(set(f.e)) != len(f.e):
        out.append("e is not injective")
    for j, pt in enumerate(f.p):
        if len(pt) != f.dom.n_vertices:
            out.append(f"p[{j}] has {len(pt)} coordinates, expected {f.dom.n_vertices}")
            return out
        if any(c < 0 for c in pt):
            out.append(f"p[{j}] has a negative coordinate")
        if sum(pt) != 1:
            out.append(f"p[{j}] does not sum to 1")
    for i, j in enumerate(f.e):
        if f.p[j] != vertex(f.dom.dim, i):
            out.append(f"p(e({i})) is not vertex {i}")
    hit = {f.p[j] for j in range(f.cod.n_vertices)}
    for i in range(f.dom.n_vertices):
        if vertex(f.dom.dim, i) not in hit:
            out.append(f"surjectivity certificate missing: vertex {i} never hit exactly")
    return out


def _apply_unchecked(f: SimplexArrow, pt: BPoint) -> BPoint:
    # Hot path for composition: assumes pt is a valid point of cod. Most
    # bond targets are vertices, so the single-support case skips all
    # arithmetic and shares the stored tuple.
    support = [(idx, w) for idx, w in enumerate(pt) if w.numerator]
    if len(support) == 1 and support[0][1].numerator == support[0][1].denominator:
        return f.p[support[0][0]]
    out = [Q0] * f.dom.n_vertices
    for idx, weight in support:
        for k, c in enumerate(f.p[idx]):
            if c.numerator:
                out[k] += weight * c
    return tuple(out)


def apply_projection(f: SimplexArrow, x: Sequence[Fraction]) -> BPoint:
    """Affine extension of the vertex targets; exact on rational input."""
    pt = bary(x)
    if len(pt) != f.cod.n_vertices:
        raise ValueError(
            f"point has {len(pt)} coordinates, cod needs {f.cod.n_vertices}"
        )
    return _apply_unchecked(f, pt)


def compose_simplex_arrows(f: SimplexArrow, g: SimplexArrow) -> SimplexArrow:
    """Composite f . g for g: A -> B and f: B -> C."""
    if f.dom != g.cod:
        raise ValueError("arrows are not composable: f.dom differs from g.cod")
    e = tuple(f.e[j] for j in g.e)
    p = tuple(_apply_unchecked(g, f.p[c]) for c in range(f.cod.n_vertices))
    return SimplexArrow(dom=g.dom, cod=f.cod, e=e, p=p)


def sq_dist(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    return sum((a - b) ** 2 for a, b in zip(x, y))


def l1_dist(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    return sum(abs(a - b) for a, b in zip(x, y))


def simplex_arrow_distance(f: SimplexArrow, g: SimplexArrow) -> Distance:
    """Vertex max of squared Euclidean distances; compare against squared thresholds."""
    if f.dom != g.dom or f.cod != g.cod:
        raise ValueError("arrow distance needs a shared dom and cod")
    if f.e != g.e:
        return INFINITY
    return dist_max(sq_dist(a, b) for a, b in zip(f.p, g.p))


def simplex_arrow_distance_l1(f: SimplexArrow, g: SimplexArrow) -> Distance:
    """Vertex max of l1 distances; every projection is 1-Lipschitz for l1,
    so the metric-category contraction laws hold with this metric."""
    if f.dom != g.dom or f.cod != g.cod:
        raise ValueError("arrow distance needs a shared dom and cod")
    if f.e != g.e:
        return INFINITY
    return dist_max(l1_dist(a, b) for a, b in zip(f.p, g.p))


def simplex_arrows_equal(f: SimplexArrow, g: SimplexArrow) -> bool:
    return f.dom == g.dom and f.cod == g.cod and f.e == g.e and f.p == g.p


def amalgamate_simplices(
    f: SimplexArrow, g: SimplexArrow
) -> tuple[SimplexArrow, SimplexArrow]:
    """Strictly amalgamate f: C -> A and g: C -> B into the convex hull.

    W has dimension dim(A) + dim(B) - dim(C); its vertices are those of A
    followed by the B vertices outside the image of C. The composites agree
    exactly.
    """
    if f.dom != g.dom:
        raise ValueError("amalgamation needs a common dom")
    bad = validate_simplex_arrow(f) + validate_simplex_arrow(g)
    if bad:
        raise ValueError(f"invalid input arrows: {bad}")
    A, B = f.cod, g.cod
    k = f.dom.dim
    W = Simplex(A.dim + B.dim - k)
    g_image = {j: i for i, j in enumerate(g.e)}
    new_b = [j for j in range(B.n_vertices) if j not in g_image]

    def transport(point: BPoint, through: tuple[int, ...], target_dim: int) -> BPoint:
        out = [Q0] * (target_dim + 1)
        for idx, c in enumerate(point):
            if c != 0:
                out[through[idx]] += c
        return tuple(out)

    # f2: A -> W.
    p_f2 = [vertex(A.dim, i) for i in range(A.n_vertices)]
    for j in new_b:
        p_f2.append(transport(g.p[j], f.e, A.dim))
    f2 = SimplexArrow(dom=A, cod=W, e=tuple(range(A.n_vertices)), p=tuple(p_f2))

    # g2: B -> W.
    e_g2 = []
    for j in range(B.n_vertices):
        if j in g_image:
            e_g2.append(f.e[g_image[j]])
        else:
            e_g2.append(A.n_vertices + new_b.index(j))
    p_g2 = []
    for i in range(A.n_vertices):
        p_g2.append(transport(f.p[i], g.e, B.dim))
    for j in new_b:
        p_g2.append(vertex(B.dim, j))
    g2 = SimplexArrow(dom=B, cod=W, e=tuple(e_g2), p=tuple(p_g2))
    return f2, g2


def right_inverse(f: SimplexArrow) -> SimplexArrow:
    """Stable embedding i with p . i = id, choosing the smallest cod vertex
    among exact preimages of each dom vertex; the stored e is ignored."""
    e2 = []
    for i in range(f.dom.n_vertices):
        target = vertex(f.dom.dim, i)
        found = None
        for j in range(f.cod.n_vertices):
            if f.p[j] == target:
                found = j
                break
        if found is None:
            raise ValueError(
                f"surjectivity certificate missing: vertex {i} has no exact preimage"
            )
        e2.append(found)
    return SimplexArrow(dom=f.dom, cod=f.cod, e=tuple(e2), p=f.p)


# --- rational enumeration ---------------------------------------------------


def rational_points_exact(dim: int, denominator: int) -> list[BPoint]:
    """Barycentric points whose reduced common denominator is exactly the
    given value, ordered lexicographically by numerator vector."""
    if denominator < 1:
        raise ValueError("denominator must be at least 1")
    out: list[BPoint] = []
    for combo in _compositions(denominator, dim + 1):
        if _reduced_lcm(combo, denominator) != denominator:
            continue
        out.append(tuple(Fraction(a, denominator) for a in combo))
    return out


def rational_points(dim: int, denominator_bound: int) -> list[BPoint]:
    """All barycentric points whose reduced common denominator is at most
    the bound, grouped by denominator and ordered lexicographically."""
    if denominator_bound < 1:
        raise ValueError("denominator bound must be at least 1")
    out: list[BPoint] = []
    for q in range(1, denominator_bound + 1):
        out.extend(rational_points_exact(dim, q))
    return out


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _reduced_lcm(combo: Sequence[int], q: int) -> int:
    denoms = [q // gcd(a, q) if a else 1 for a in combo]
    out = 1
    for d in denoms:
        out = out * d // gcd(out, d)
    return out


def _denominator_profile(arrow: SimplexArrow) -> tuple[int, ...]:
    profile = []
    for pt in arrow.p:
        lcm = 1
        for c in pt:
            lcm = lcm * c.denominator // gcd(lcm, c.denominator)
        profile.append(lcm)
    return tuple(profile)


def enumeration_key(arrow: SimplexArrow):
    flat = tuple(itertools.chain.from_iterable(arrow.p))
    return (_denominator_profile(arrow), flat, arrow.e)


def enumerate_rational_arrows(
    dom: Simplex, cod: Simplex, denominator_bound: int
) -> Iterator[SimplexArrow]:
    """Every valid arrow dom -> cod with p denominators within the bound,
    exactly once, ordered by (denominator profile, coordinates, e)."""
    if dom.dim > cod.dim:
        return iter(())
    points = rational_points(dom.dim, denominator_bound)
    arrows = []
    for e in itertools.permutations(range(cod.n_vertices), dom.n_vertices):
        free = [j for j in range(cod.n_vertices) if j not in set(e)]
        for assignment in itertools.product(points, repeat=len(free)):
            p: list[BPoint | None] = [None] * cod.n_vertices
            for i, j in enumerate(e):
                p[j] = vertex(dom.dim, i)
            for j, pt in zip(free, assignment):
                p[j] = pt
            arrows.append(SimplexArrow(dom=dom, cod=cod, e=e, p=tuple(p)))
    arrows.sort(key=enumeration_key)
    return iter(arrows)
