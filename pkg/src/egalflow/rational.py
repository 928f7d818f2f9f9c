"""Exact rational helpers: parsing, formatting and recovery after bisection."""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import NotFound

Rat = Fraction


def to_rat(x) -> Fraction:
    """Parse an int, a Fraction or a ``"p/q"`` / ``"7"`` string.

    Floats are refused: they would smuggle rounding into every algorithm.
    """
    if isinstance(x, bool):
        raise TypeError(f"not a rational: {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if "." in s or "e" in s.lower():
            raise ValueError(f"decimal notation not allowed, use p/q: {x!r}")
        return Fraction(s)
    raise TypeError(f"not a rational: {x!r}")


def fmt_rat(q: Fraction) -> str:
    """``"3"`` for integers, ``"-7/2"`` otherwise."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def common_denominator(values) -> int:
    d = 1
    for v in values:
        if v is not None:
            d = math.lcm(d, Fraction(v).denominator)
    return d


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    # Smallest-denominator rational in [lo, hi], 0 <= lo <= hi, via the
    # continued-fraction walk down the Stern-Brocot tree.
    fl = lo.numerator // lo.denominator
    if Fraction(fl) == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    # lo and hi share the integer part; recurse on reciprocals of the tails.
    inner = _simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / inner


def simplest_rational(lo: Fraction, hi: Fraction) -> Fraction:
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -_simplest_between(-hi, -lo)
    return _simplest_between(lo, hi)


def rational_recover(lo, hi, den_bound: int) -> Fraction:
    """Return the rational in ``[lo, hi]`` whose denominator is at most ``den_bound``.

    When ``hi - lo < 1/den_bound**2`` there is at most one such number, so this
    turns the bracket left by a bisection back into an exact answer.

    >>> rational_recover(Fraction(333, 1000), Fraction(334, 1000), 3)
    Fraction(1, 3)
    """
    if den_bound < 1:
        raise ValueError("den_bound must be positive")
    q = simplest_rational(lo, hi)
    if q.denominator > den_bound:
        raise NotFound(
            f"no rational with denominator <= {den_bound} in [{fmt_rat(lo)}, {fmt_rat(hi)}]"
        )
    return q
