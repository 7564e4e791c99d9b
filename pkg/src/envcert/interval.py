"""Rational interval arithmetic and interval evaluation of polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

from .exact import fmt, q
from .poly import Polynomial


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", q(self.lo))
        object.__setattr__(self, "hi", q(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(x, x)

    @classmethod
    def sym(cls, r) -> "Interval":
        r = q(r)
        return cls(-r, r)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other) -> "Interval":
        if not isinstance(other, Interval):
            s = q(other)
            return Interval(min(s * self.lo, s * self.hi), max(s * self.lo, s * self.hi))
        prods = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(prods), max(prods))

    __rmul__ = __mul__

    def __contains__(self, x) -> bool:
        return self.lo <= q(x) <= self.hi

    def subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def strictly_inside(self, other: "Interval") -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def rad(self) -> Fraction:
        """Full width hi - lo (not the half-width)."""
        return self.hi - self.lo

    def to_json(self):
        return {"lo": fmt(self.lo), "hi": fmt(self.hi)}

    @classmethod
    def from_json(cls, data) -> "Interval":
        return cls(q(data["lo"]), q(data["hi"]))

    def __str__(self):
        return f"[{fmt(self.lo)}, {fmt(self.hi)}]"


ZERO = Interval(0, 0)


def iv_arith(a: Interval, b: Interval, op: str) -> Interval:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown interval operation {op!r}")


def iv_power(a: Interval, k: int) -> Interval:
    """Exact range of x**k over a."""
    if k < 0:
        raise ValueError("negative exponent")
    if k == 0:
        return Interval(1, 1)
    lo, hi = a.lo ** k, a.hi ** k
    if k % 2 == 1:
        return Interval(lo, hi)
    if a.lo >= 0:
        return Interval(lo, hi)
    if a.hi <= 0:
        return Interval(hi, lo)
    return Interval(0, max(lo, hi))


def mid_rad(a: Interval) -> tuple[Fraction, Fraction]:
    return a.mid, a.rad


Box = dict  # variable name -> Interval


def _split(iv: Interval, parts: int):
    w = iv.rad / parts
    return [Interval(iv.lo + w * i, iv.lo + w * (i + 1) if i + 1 < parts else iv.hi) for i in range(parts)]


def _eval_monomialwise(p: Polynomial, ivs) -> Interval:
    total = Interval(0, 0)
    cache: dict = {}
    for exps, c in p.terms.items():
        term = Interval(c, c)
        for i, k in enumerate(exps):
            if k:
                key = (i, k)
                if key not in cache:
                    cache[key] = iv_power(ivs[i], k)
                term = term * cache[key]
        total = total + term
    return total


def iv_eval_poly(p: Polynomial, domain: Mapping[str, Interval], subdivide: int = 0) -> Interval:
    """Sound enclosure of p over the box ``domain`` (monomial-wise evaluation).

    ``subdivide`` splits every occurring variable's interval into 2**subdivide
    pieces and returns the hull over all sub-boxes.
    """
    used = p.variables()
    ivs = []
    for name in p.space.names:
        if name in used:
            if name not in domain:
                raise KeyError(f"domain does not cover variable {name!r}")
            ivs.append(domain[name])
        else:
            ivs.append(Interval(0, 0))
    if subdivide <= 0 or not used:
        return _eval_monomialwise(p, ivs)
    parts = 2 ** subdivide
    idx = [i for i, n in enumerate(p.space.names) if n in used]
    pieces = [_split(ivs[i], parts) for i in idx]
    result = None
    for combo in product(*pieces):
        sub = list(ivs)
        for i, iv in zip(idx, combo):
            sub[i] = iv
        r = _eval_monomialwise(p, sub)
        result = r if result is None else result.hull(r)
    return result


@dataclass(frozen=True)
class AffineIntervalFn:
    """I(t) = a + b*t for t >= 0."""

    a: Interval
    b: Interval

    @classmethod
    def slope(cls, s) -> "AffineIntervalFn":
        return cls(Interval(0, 0), Interval.sym(s))

    def at(self, t) -> Interval:
        t = q(t)
        if t < 0:
            raise ValueError("affine interval functions are only defined for t >= 0")
        return self.a + self.b * t

    def to_json(self):
        return {"a": self.a.to_json(), "b": self.b.to_json()}

    @classmethod
    def from_json(cls, data) -> "AffineIntervalFn":
        return cls(Interval.from_json(data["a"]), Interval.from_json(data["b"]))


def affine_hull(fn: AffineIntervalFn, t_range: Interval) -> Interval:
    if t_range.lo < 0:
        raise ValueError("t_range must be non-negative")
    return fn.a + fn.b * t_range
