"""Finite geometric fans with exact rational geometry.

A finite fan is the cone over finitely many end-points. Each end-point
carries a binary address (a finite word locating its spike over the Cantor
set, pairwise prefix-incomparable within one fan) and a level in (0, 1].
The point at parameter t on spike i lies at distance t * level(i) from the
apex; shortest paths between different spikes run through the apex, so all
distances are exact rationals.

Arrows between fans are embedding / retraction pairs: an injection of
end-point indices together with a per-end-point retraction target, subject
to p(e(i)) = tip(i) and the per-end-point 1-Lipschitz criterion
apexdist(p(b)) <= level(b), which implies the global Lipschitz bound for
the path metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .rationals import INFINITY, Distance, Q0, Q1, ceil_frac, dist_max


def _check_bits(address: str) -> None:
    if not isinstance(address, str) or any(ch not in "01" for ch in address):
        raise ValueError(f"address must be a 0/1 string, got {address!r}")


def is_antichain(addresses: Sequence[str]) -> bool:
    """No address is a prefix of another.

    Prefix pairs are always lexicographically adjacent after sorting, so the
    sorted-neighbour scan is enough and stays O(n log n * len).
    """
    ordered = sorted(addresses)
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a):
            return False
    return True


@dataclass(frozen=True)
class EndPoint:
    address: str
    level: Fraction

    def __post_init__(self):
        _check_bits(self.address)
        object.__setattr__(self, "level", Fraction(self.level))
        if not (Q0 < self.level <= Q1):
            raise ValueError(f"level must lie in (0, 1], got {self.level}")


@dataclass(frozen=True)
class FiniteFan:
    endpoints: tuple[EndPoint, ...]
    skeleton: Optional[frozenset[int]] = None

    def __post_init__(self):
        object.__setattr__(self, "endpoints", tuple(self.endpoints))
        if not self.endpoints:
            raise ValueError("a finite fan needs at least one end-point")
        if not is_antichain([ep.address for ep in self.endpoints]):
            raise ValueError("end-point addresses must form an antichain")
        if len({ep.address for ep in self.endpoints}) != len(self.endpoints):
            raise ValueError("duplicate end-point addresses")
        if self.skeleton is not None:
            skel = frozenset(self.skeleton)
            if not all(0 <= i < len(self.endpoints) for i in skel):
                raise ValueError("skeleton indices out of range")
            object.__setattr__(self, "skeleton", skel)

    @property
    def size(self) -> int:
        return len(self.endpoints)

    def level(self, i: int) -> Fraction:
        return self.endpoints[i].level

    def max_level(self) -> Fraction:
        return max(ep.level for ep in self.endpoints)

    def with_skeleton(self, skeleton: Iterable[int]) -> "FiniteFan":
        return FiniteFan(self.endpoints, frozenset(skeleton))


@dataclass(frozen=True)
class FanPoint:
    """Point t * endpoint(spike); the apex is canonicalized to (0, t=0)."""

    spike: int
    t: Fraction

    def __post_init__(self):
        t = Fraction(self.t)
        if not (Q0 <= t <= Q1):
            raise ValueError(f"spike parameter must lie in [0, 1], got {t}")
        object.__setattr__(self, "t", t)
        if t == 0:
            object.__setattr__(self, "spike", 0)

    @classmethod
    def apex(cls) -> "FanPoint":
        return cls(0, Q0)

    @property
    def is_apex(self) -> bool:
        return self.t == 0


def _check_point(fan: FiniteFan, x: FanPoint) -> None:
    if not (0 <= x.spike < fan.size):
        raise ValueError(f"spike index {x.spike} invalid for fan of size {fan.size}")


def point_level(fan: FiniteFan, x: FanPoint) -> Fraction:
    """Distance from the apex, which equals the cone level of the point."""
    _check_point(fan, x)
    return x.t * fan.level(x.spike)


def scale_point(x: FanPoint, lam: Fraction) -> FanPoint:
    return FanPoint(x.spike, x.t * lam)


def fan_distance(fan: FiniteFan, x: FanPoint, y: FanPoint) -> Fraction:
    """Shortest-path distance: along the spike, or through the apex."""
    _check_point(fan, x)
    _check_point(fan, y)
    if x.spike == y.spike:
        return abs(x.t - y.t) * fan.level(x.spike)
    return point_level(fan, x) + point_level(fan, y)


@dataclass(frozen=True)
class FanArrow:
    """Arrow pair between finite fans.

    e sends end-point index i of dom to end-point index e[i] of cod; p sends
    each cod end-point to a point of dom. Invalid data is representable so
    that validate_arrow can act as a checker; use validate_arrow before
    trusting hand-built arrows.
    """

    dom: FiniteFan
    cod: FiniteFan
    e: tuple[int, ...]
    p: tuple[FanPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "e", tuple(self.e))
        object.__setattr__(self, "p", tuple(self.p))


def identity_arrow(fan: FiniteFan) -> FanArrow:
    return FanArrow(
        dom=fan,
        cod=fan,
        e=tuple(range(fan.size)),
        p=tuple(FanPoint(i, Q1) for i in range(fan.size)),
    )


def validate_arrow(f: FanArrow) -> list[str]:
    """Return the list of violations; empty means the arrow is valid."""
    out: list[str] = []
    if len(f.e) != f.dom.size:
        out.append(f"e has {len(f.e)} entries for dom of size {f.dom.size}")
        return out
    if len(f.p) != f.cod.size:
        out.append(f"p has {len(f.p)} entries for cod of size {f.cod.size}")
        return out
    if any(not (0 <= j < f.cod.size) for j in f.e):
        out.append("e maps outside cod end-point range")
        return out
    if len(set(f.e)) != len(f.e):
        out.append("e is not injective")
    for b, target in enumerate(f.p):
        if not (0 <= target.spike < f.dom.size):
            out.append(f"p[{b}] uses dom spike {target.spike} out of range")
            return out
    for i, j in enumerate(f.e):
        if f.p[j] != FanPoint(i, Q1):
            out.append(f"p(e({i})) is {f.p[j]}, not the tip of spike {i}")
    for b, target in enumerate(f.p):
        if point_level(f.dom, target) > f.cod.level(b):
            out.append(
                f"retraction expands at cod end-point {b}: "
                f"apex distance {point_level(f.dom, target)} > level {f.cod.level(b)}"
            )
    if f.dom.skeleton is not None and f.cod.skeleton is not None:
        for i in f.dom.skeleton:
            if f.e[i] not in f.cod.skeleton:
                out.append(f"e drops skeleton end-point {i} out of the skeleton")
    return out


def skeleton_reflecting(f: FanArrow) -> bool:
    """Skeleton membership agrees across e: skel(cod) meets im(e) exactly in e(skel(dom))."""
    if f.dom.skeleton is None or f.cod.skeleton is None:
        return True
    for i, j in enumerate(f.e):
        if (i in f.dom.skeleton) != (j in f.cod.skeleton):
            return False
    return True


def eval_p(f: FanArrow, x: FanPoint) -> FanPoint:
    """Apply the retraction part to a point of cod."""
    _check_point(f.cod, x)
    return scale_point(f.p[x.spike], x.t)


def eval_e(f: FanArrow, x: FanPoint) -> FanPoint:
    """Apply the embedding part to a point of dom."""
    _check_point(f.dom, x)
    return FanPoint(f.e[x.spike], x.t)


def compose_fan_arrows(f: FanArrow, g: FanArrow) -> FanArrow:
    """Composite f . g for g: A -> B and f: B -> C."""
    if f.dom != g.cod:
        raise ValueError("arrows are not composable: f.dom differs from g.cod")
    e = tuple(f.e[j] for j in g.e)
    p = tuple(eval_p(g, f.p[c]) for c in range(f.cod.size))
    return FanArrow(dom=g.dom, cod=f.cod, e=e, p=p)


def fan_arrow_distance(f: FanArrow, g: FanArrow) -> Distance:
    """Arrow metric: max over cod end-points, infinite when embeddings differ."""
    if f.dom != g.dom or f.cod != g.cod:
        raise ValueError("arrow distance needs a shared dom and cod")
    if f.e != g.e:
        return INFINITY
    return dist_max(
        fan_distance(f.dom, f.p[b], g.p[b]) for b in range(f.cod.size)
    )


def fan_arrows_equal(f: FanArrow, g: FanArrow) -> bool:
    return f.dom == g.dom and f.cod == g.cod and f.e == g.e and f.p == g.p


# --- triangles and level-preserving retractions ---------------------------


@dataclass(frozen=True)
class TriangularDecomposition:
    """Uniform-depth list of address prefixes plus the end-point assignment."""

    prefixes: tuple[str, ...]
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefixes", tuple(self.prefixes))
        object.__setattr__(self, "assignment", tuple(self.assignment))
        if any(len(p) < 1 for p in self.prefixes):
            raise ValueError("triangle prefixes must be nonempty")

    def sizes(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(1, len(p)) for p in self.prefixes)

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.prefixes]
        for idx, tri in enumerate(self.assignment):
            out[tri].append(idx)
        return out


def pad_address(address: str, depth: int) -> str:
    return address + "0" * (depth - len(address)) if depth > len(address) else address


def triangular_decomposition(
    fan: FiniteFan,
    max_size: Fraction,
    refine: Optional[TriangularDecomposition] = None,
) -> TriangularDecomposition:
    """Partition into triangles (prefix cones) of size at most max_size.

    Uses one uniform prefix depth, padding short addresses with zeros, so the
    result refines any decomposition whose prefixes are no deeper.
    """
    max_size = Fraction(max_size)
    if not (Q0 < max_size <= Q1):
        raise ValueError("triangle size bound must lie in (0, 1]")
    depth = ceil_frac(1 / max_size)
    if refine is not None:
        depth = max(depth, max(len(p) for p in refine.prefixes))
    seen: dict[str, int] = {}
    assignment = []
    for ep in fan.endpoints:
        prefix = pad_address(ep.address, depth)[:depth]
        if prefix not in seen:
            seen[prefix] = len(seen)
        assignment.append(seen[prefix])
    return TriangularDecomposition(tuple(seen.keys()), tuple(assignment))


def triangle_top_level(fan: FiniteFan, members: Sequence[int]) -> Fraction:
    return max(fan.level(i) for i in members)


def level_preserving_retraction(
    fan: FiniteFan,
    decomposition: TriangularDecomposition,
    reps: Sequence[int],
) -> FanArrow:
    """Retraction onto the sub-fan of representatives, keeping levels fixed.

    Each representative must attain the maximal level of its triangle; that
    is exactly what makes the level-preserving retraction exist.
    """
    members = decomposition.members()
    if len(reps) != len(decomposition.prefixes):
        raise ValueError("one representative per triangle required")
    for u, rep in enumerate(reps):
        if rep not in members[u]:
            raise ValueError(f"representative {rep} is not in triangle {u}")
        top = triangle_top_level(fan, members[u])
        if fan.level(rep) != top:
            raise ValueError(
                f"representative {rep} has level {fan.level(rep)}, "
                f"but triangle {u} tops out at {top}"
            )
    skeleton = None
    if fan.skeleton is not None:
        skeleton = frozenset(u for u, rep in enumerate(reps) if rep in fan.skeleton)
    dom = FiniteFan(tuple(fan.endpoints[rep] for rep in reps), skeleton)
    p = []
    for b in range(fan.size):
        u = decomposition.assignment[b]
        p.append(FanPoint(u, fan.level(b) / fan.level(reps[u])))
    return FanArrow(dom=dom, cod=fan, e=tuple(reps), p=tuple(p))


# --- strict amalgamation ---------------------------------------------------


def _strip_common_bits(addresses: list[str]) -> list[str]:
    if len(addresses) == 1:
        return [""]
    addrs = addresses
    while all(a for a in addrs) and len({a[0] for a in addrs}) == 1:
        addrs = [a[1:] for a in addrs]
    return addrs


def is_level_preserving_embedding(f: FanArrow) -> bool:
    return all(f.cod.level(j) == f.dom.level(i) for i, j in enumerate(f.e))


def amalgamate_fans(f: FanArrow, g: FanArrow) -> tuple[FanArrow, FanArrow]:
    """Strictly amalgamate f: C -> A and g: C -> B over their common dom.

    Returns (f2: A -> W, g2: B -> W) with compose(f2, f) == compose(g2, g)
    exactly. The end-point set of W is E(A) plus the end-points of B outside
    the image of C; transported retraction targets stay 1-Lipschitz because
    both embeddings preserve levels (required here, and all engine-built
    arrows satisfy it).
    """
    if f.dom != g.dom:
        raise ValueError("amalgamation needs a common dom")
    bad_f, bad_g = validate_arrow(f), validate_arrow(g)
    if bad_f or bad_g:
        raise ValueError(f"invalid input arrows: {bad_f + bad_g}")
    if not (is_level_preserving_embedding(f) and is_level_preserving_embedding(g)):
        raise ValueError("amalgamation requires level-preserving embeddings")

    A, B = f.cod, g.cod
    g_image = {j: k for k, j in enumerate(g.e)}
    new_b = [j for j in range(B.size) if j not in g_image]

    addresses = ["0" + A.endpoints[i].address for i in range(A.size)]
    addresses += ["1" + B.endpoints[j].address for j in new_b]
    addresses = _strip_common_bits(addresses)
    levels = [A.level(i) for i in range(A.size)] + [B.level(j) for j in new_b]

    skeleton = None
    if A.skeleton is not None or B.skeleton is not None:
        skel_a = A.skeleton or frozenset()
        skel_b = B.skeleton or frozenset()
        skeleton = frozenset(
            list(skel_a)
            + [A.size + idx for idx, j in enumerate(new_b) if j in skel_b]
        )
    W = FiniteFan(
        tuple(EndPoint(addr, lvl) for addr, lvl in zip(addresses, levels)),
        skeleton,
    )

    # f2: A -> W. New B end-points retract through g then transport along e_f.
    p_f2 = [FanPoint(i, Q1) for i in range(A.size)]
    for j in new_b:
        target = g.p[j]
        p_f2.append(FanPoint(f.e[target.spike], target.t))
    f2 = FanArrow(dom=A, cod=W, e=tuple(range(A.size)), p=tuple(p_f2))

    # g2: B -> W. A-part end-points retract through f then transport along e_g.
    e_g2 = []
    for j in range(B.size):
        if j in g_image:
            e_g2.append(f.e[g_image[j]])
        else:
            e_g2.append(A.size + new_b.index(j))
    p_g2 = []
    for i in range(A.size):
        target = f.p[i]
        p_g2.append(FanPoint(g.e[target.spike], target.t))
    for j in new_b:
        p_g2.append(FanPoint(j, Q1))
    g2 = FanArrow(dom=B, cod=W, e=tuple(e_g2), p=tuple(p_g2))
    return f2, g2


# --- the swap rescaling and skeleton normalization -------------------------


def _common_prefix_len(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def swap_scales(
    fan: FiniteFan,
    e_idx: int,
    b: Fraction,
    members: Optional[Sequence[int]] = None,
) -> dict[int, Fraction]:
    """Per-end-point compression ratios of the swap rescaling.

    Rings are indexed by the length of the common address prefix with the
    distinguished end-point; each ring is compressed by level(e) over the
    maximal level at that ring depth, leaving the distinguished spike fixed
    and making its level maximal afterwards.
    """
    b = Fraction(b)
    if members is None:
        members = range(fan.size)
    members = list(members)
    if e_idx not in members:
        raise ValueError("distinguished end-point must belong to the triangle")
    e_level = fan.level(e_idx)
    e_addr = fan.endpoints[e_idx].address
    top = max(fan.level(i) for i in members)
    if not e_level / top > b:
        raise ValueError(
            f"relative level {e_level}/{top} of the distinguished end-point "
            f"does not exceed b = {b}"
        )
    depth = {i: _common_prefix_len(fan.endpoints[i].address, e_addr) for i in members}
    scales: dict[int, Fraction] = {}
    for i in members:
        if i == e_idx:
            scales[i] = Q1
            continue
        ring = depth[i]
        l_n = max(
            fan.level(j) for j in members if j == e_idx or depth[j] >= ring
        )
        scales[i] = e_level / l_n
    return scales


def swap_homeomorphism(
    fan: FiniteFan, e_idx: int, b: Fraction
) -> tuple[FiniteFan, dict[int, Fraction]]:
    """Rescale the fan so the distinguished end-point has the maximal level.

    Addresses are untouched (every point stays on its spike) and every scale
    lies in (b, 1].
    """
    scales = swap_scales(fan, e_idx, b)
    endpoints = tuple(
        EndPoint(ep.address, ep.level * scales[i])
        for i, ep in enumerate(fan.endpoints)
    )
    return FiniteFan(endpoints, fan.skeleton), scales


def default_b_schedule(n: int) -> Fraction:
    """Ring compression lower bounds with a positive infinite product."""
    return Q1 - Fraction(1, 3 ** (n + 2))


def skeleton_normalize_step(
    fan: FiniteFan,
    decomposition: TriangularDecomposition,
    n: int,
    b: Optional[Fraction] = None,
) -> tuple[FiniteFan, TriangularDecomposition, tuple[int, ...]]:
    """One normalization step: subdivide, pick skeleton representatives, swap.

    Subdivides to triangles of size at most 1/(n+3), prefers the (n+1)-st
    skeleton point as representative of its own triangle, elsewhere takes the
    deepest-level skeleton point, and rescales each triangle so the chosen
    representative attains the triangle's maximal level exactly.
    """
    if fan.skeleton is None or not fan.skeleton:
        raise ValueError("skeleton normalization needs a nonempty skeleton")
    if b is None:
        b = default_b_schedule(n)
    refined = triangular_decomposition(fan, Fraction(1, n + 3), refine=decomposition)
    skeleton_order = sorted(fan.skeleton)
    preferred = skeleton_order[n + 1] if n + 1 < len(skeleton_order) else None

    members = refined.members()
    reps: list[int] = []
    for u, group in enumerate(members):
        candidates = [i for i in group if i in fan.skeleton]
        if not candidates:
            raise ValueError(
                f"triangle {u} contains no skeleton end-point; "
                f"b = {b} is too aggressive at this finite stage"
            )
        top = triangle_top_level(fan, group)
        if preferred is not None and preferred in group:
            choice = preferred
        else:
            choice = max(candidates, key=lambda i: (fan.level(i), -i))
        if not fan.level(choice) / top > b:
            raise ValueError(
                f"no skeleton end-point of relative level above b = {b} "
                f"in triangle {u}"
            )
        reps.append(choice)

    scales: dict[int, Fraction] = {}
    for u, group in enumerate(members):
        scales.update(swap_scales(fan, reps[u], b, members=group))
    endpoints = tuple(
        EndPoint(ep.address, ep.level * scales[i])
        for i, ep in enumerate(fan.endpoints)
    )
    rescaled = FiniteFan(endpoints, fan.skeleton)
    for u, group in enumerate(members):
        assert rescaled.level(reps[u]) == triangle_top_level(rescaled, group)
    return rescaled, refined, tuple(reps)


# --- plane coordinates and the end-point map counterexample ----------------


def cantor_x(address: str) -> Fraction:
    """Midpoint of the middle-thirds interval named by the address."""
    _check_bits(address)
    left = sum(
        (2 * int(bit)) * Fraction(1, 3 ** (i + 1)) for i, bit in enumerate(address)
    )
    return left + Fraction(1, 2 * 3 ** len(address))


def dyadic_x(address: str) -> Fraction:
    """Binary value of the zero-padded address; hits 1/2 at address "1"."""
    _check_bits(address)
    return sum(int(bit) * Fraction(1, 2 ** (i + 1)) for i, bit in enumerate(address))


def counterexample_g(x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
    """The end-point shear of the unit square.

    Fixes the bottom edge and every first coordinate, is strictly increasing
    in y on every column except x = 1/2, and collapses the lower half of the
    x = 1/2 column to the bottom point.
    """
    x, y = Fraction(x), Fraction(y)
    if not (Q0 <= x <= Q1 and Q0 <= y <= Q1):
        raise ValueError("inputs must lie in the unit square")
    alpha = Fraction(1, 2) - x if x <= Fraction(1, 2) else x - Fraction(1, 2)
    if y <= Fraction(1, 2):
        return (x, 2 * alpha * y)
    return (x, y + alpha - Fraction(1, 2))


@dataclass(frozen=True)
class LiftReport:
    images: tuple[tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]], ...]
    injective: bool
    distinguished: int
    collapse_witness: tuple[
        tuple[Fraction, Fraction], tuple[Fraction, Fraction], tuple[Fraction, Fraction]
    ]


def counterexample_lift(fan: FiniteFan) -> LiftReport:
    """Apply the shear to a fan's end-points via their dyadic coordinates.

    Requires the distinguished spike: an end-point of level 1 at dyadic
    coordinate 1/2. End-points map injectively while the interior of the
    distinguished spike collapses; the witness pair is returned explicitly.
    """
    half = Fraction(1, 2)
    coords = [dyadic_x(ep.address) for ep in fan.endpoints]
    distinguished = None
    for i, ep in enumerate(fan.endpoints):
        if coords[i] == half and ep.level == Q1:
            distinguished = i
            break
    if distinguished is None:
        raise ValueError("missing distinguished spike at coordinate 1/2, level 1")
    images = tuple(
        ((coords[i], ep.level), counterexample_g(coords[i], ep.level))
        for i, ep in enumerate(fan.endpoints)
    )
    injective = len({img for _, img in images}) == fan.size
    w1 = counterexample_g(half, Fraction(1, 4))
    w2 = counterexample_g(half, Fraction(1, 8))
    assert w1 == w2 == (half, Q0)
    return LiftReport(
        images=images,
        injective=injective,
        distinguished=distinguished,
        collapse_witness=((half, Fraction(1, 4)), (half, Fraction(1, 8)), w1),
    )


# --- deterministic address helpers used by the task streams ----------------


def fresh_address(existing: Sequence[str]) -> str:
    """Shortest lexicographically-first word prefix-incomparable with all given."""
    length = 1
    limit = max((len(a) for a in existing), default=0) + 1
    while length <= limit:
        for i in range(2 ** length):
            cand = format(i, f"0{length}b")
            if all(
                not cand.startswith(a) and not a.startswith(cand) for a in existing
            ):
                return cand
        length += 1
    raise ValueError("address space exhausted; extend addresses first")


def extend_with_spike(
    fan: FiniteFan, level: Fraction, skeleton_member: bool = False
) -> FiniteFan:
    """The fan plus one fresh spike; existing addresses gain a trailing 0."""
    extended = [ep.address + "0" for ep in fan.endpoints]
    new_addr = fresh_address(extended)
    endpoints = tuple(
        EndPoint(addr, ep.level) for addr, ep in zip(extended, fan.endpoints)
    ) + (EndPoint(new_addr, level),)
    skeleton = None
    if fan.skeleton is not None:
        skeleton = frozenset(
            list(fan.skeleton) + ([fan.size] if skeleton_member else [])
        )
    return FiniteFan(endpoints, skeleton)
