"""Exact rational scalars: parsing, formatting, and the infinite distance value."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

Q0 = Fraction(0)
Q1 = Fraction(1)


class _Infinity:
    """Distance reported for arrow pairs whose embedding parts disagree.

    Kept as a tagged singleton, never a large number. Absorbing under max
    and addition, and strictly above every rational.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __hash__(self):
        return hash("fanplex.INFINITY")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __mul__(self, other):
        return self

    __rmul__ = __mul__


INFINITY = _Infinity()

Distance = Union[Fraction, _Infinity]


def is_finite(d: Distance) -> bool:
    return d is not INFINITY


def dist_le(a: Distance, b: Distance) -> bool:
    """a <= b with INFINITY above every rational."""
    if a is INFINITY:
        return b is INFINITY
    if b is INFINITY:
        return True
    return a <= b


def dist_lt(a: Distance, b: Distance) -> bool:
    if b is INFINITY:
        return a is not INFINITY
    if a is INFINITY:
        return False
    return a < b


def dist_max(values) -> Distance:
    best: Distance = Q0
    for v in values:
        if v is INFINITY:
            return INFINITY
        if v > best:
            best = v
    return best


_RAT_SHAPE = re.compile(r"^-?\d+(/[1-9]\d*)?$")


def parse_rat(text: str) -> Fraction:
    """Parse "p/q" or "p" into an exact Fraction; no decimal forms."""
    if not isinstance(text, str) or not _RAT_SHAPE.match(text):
        raise ValueError(f"malformed rational {text!r}")
    return Fraction(text)


def fmt_rat(q: Fraction) -> str:
    return str(Fraction(q))


def fmt_dist(d: Distance) -> str:
    return "inf" if d is INFINITY else fmt_rat(d)


def parse_dist(text: str) -> Distance:
    return INFINITY if text == "inf" else parse_rat(text)


def ceil_frac(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)
