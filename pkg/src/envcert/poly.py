"""Multivariate polynomials with exact rational coefficients.

A :class:`Polynomial` lives over a :class:`VarSpace` (an ordered list of
named variables with roles) and stores a dense exponent tuple per term.
Terms are kept in graded-lexicographic order so that printing and
serialization are reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact import fmt, q

DEFAULT_DEGREE_CAP = 12

ROLES = ("time", "param", "remainder", "disturbance", "state")


class DegreeCapExceeded(ArithmeticError):
    pass


class VarSpaceMismatch(ValueError):
    pass


@dataclass(frozen=True)
class VarSpace:
    names: tuple
    roles: tuple

    def __post_init__(self):
        if len(self.names) != len(self.roles):
            raise ValueError("names and roles differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for r in self.roles:
            if r not in ROLES:
                raise ValueError(f"unknown variable role {r!r}")
        if self.roles.count("time") > 1:
            raise ValueError("at most one time variable is allowed")

    @classmethod
    def build(cls, time: str | None = "t", params: Sequence[str] = (), remainders: Sequence[str] = (),
              disturbances: Sequence[str] = (), states: Sequence[str] = ()) -> "VarSpace":
        names, roles = [], []
        if time is not None:
            names.append(time)
            roles.append("time")
        for role, group in (("param", params), ("remainder", remainders),
                            ("disturbance", disturbances), ("state", states)):
            names.extend(group)
            roles.extend([role] * len(group))
        return cls(tuple(names), tuple(roles))

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"variable {name!r} not in {self.names}") from None

    @property
    def time(self) -> str | None:
        for n, r in zip(self.names, self.roles):
            if r == "time":
                return n
        return None

    def of_role(self, role: str) -> tuple:
        return tuple(n for n, r in zip(self.names, self.roles) if r == role)

    def to_json(self):
        return {"names": list(self.names), "roles": list(self.roles)}

    @classmethod
    def from_json(cls, data) -> "VarSpace":
        return cls(tuple(data["names"]), tuple(data["roles"]))


def _order_key(exps):
    return (sum(exps), tuple(-e for e in exps))


class Polynomial:
    """Immutable sparse polynomial; ``terms`` maps exponent tuples to nonzero Fractions."""

    __slots__ = ("space", "terms", "cap")

    def __init__(self, space: VarSpace, terms: Mapping | None = None, cap: int = DEFAULT_DEGREE_CAP):
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(space):
                raise ValueError(f"exponent {exps} does not match {space.names}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = q(c)
            if c != 0:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if clean[exps] == 0:
                    del clean[exps]
        if clean and max(sum(e) for e in clean) > cap:
            raise DegreeCapExceeded(f"degree {max(sum(e) for e in clean)} exceeds cap {cap}")
        self.space = space
        self.terms = dict(sorted(clean.items(), key=lambda kv: _order_key(kv[0])))
        self.cap = cap

    # construction helpers
    @classmethod
    def zero(cls, space: VarSpace) -> "Polynomial":
        return cls(space)

    @classmethod
    def const(cls, space: VarSpace, c) -> "Polynomial":
        return cls(space, {(0,) * len(space): q(c)})

    @classmethod
    def var(cls, space: VarSpace, name: str) -> "Polynomial":
        e = [0] * len(space)
        e[space.index(name)] = 1
        return cls(space, {tuple(e): Fraction(1)})

    def _new(self, terms, cap: int | None = None) -> "Polynomial":
        return Polynomial(self.space, terms, self.cap if cap is None else cap)

    def _check(self, other: "Polynomial"):
        if other.space != self.space:
            raise VarSpaceMismatch(f"{self.space.names} vs {other.space.names}")

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.const(self.space, other)

    # arithmetic
    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return self._new(out, max(self.cap, other.cap))

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            s = q(other)
            return self._new({e: c * s for e, c in self.terms.items()})
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return self._new(out, max(self.cap, other.cap))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Polynomial(self.space, {(0,) * len(self.space): 1}, self.cap)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.space == other.space and self.terms == other.terms
        try:
            return self == Polynomial.const(self.space, other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.space, tuple(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, names: Iterable[str]) -> int:
        idx = [self.space.index(n) for n in names]
        return max((sum(e[i] for i in idx) for e in self.terms), default=0)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.space), Fraction(0))

    def coeff(self, monomial: Mapping[str, int]) -> Fraction:
        e = [0] * len(self.space)
        for n, k in monomial.items():
            e[self.space.index(n)] = k
        return self.terms.get(tuple(e), Fraction(0))

    def variables(self) -> set:
        used = set()
        for e in self.terms:
            used.update(self.space.names[i] for i, k in enumerate(e) if k)
        return used

    # calculus
    def diff(self, name: str) -> "Polynomial":
        i = self.space.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return self._new(out)

    def integrate(self, name: str) -> "Polynomial":
        """Antiderivative in ``name`` with zero constant of integration."""
        i = self.space.index(name)
        out = {}
        for e, c in self.terms.items():
            ne = list(e)
            ne[i] += 1
            out[tuple(ne)] = c / ne[i]
        return self._new(out)

    def truncate(self, max_degree: int, names: Iterable[str] | None = None) -> "Polynomial":
        """Drop terms whose degree (in ``names``, default all variables) exceeds max_degree."""
        idx = range(len(self.space)) if names is None else [self.space.index(n) for n in names]
        return self._new({e: c for e, c in self.terms.items() if sum(e[i] for i in idx) <= max_degree})

    # evaluation and substitution
    def substitute(self, bindings: Mapping[str, object], target: VarSpace | None = None) -> "Polynomial":
        """Replace variables by rationals or polynomials over ``target``.

        Unbound variables pass through and must exist in ``target``.
        """
        target = target or self.space
        images = []
        for name in self.space.names:
            b = bindings.get(name)
            if b is None:
                images.append(Polynomial.var(target, name) if name in target.names else None)
            elif isinstance(b, Polynomial):
                if b.space != target:
                    raise VarSpaceMismatch(f"binding for {name} lives over {b.space.names}")
                images.append(b)
            else:
                images.append(Polynomial(target, {(0,) * len(target): q(b)}, self.cap))
        powers: dict = {}

        def power(i, k):
            key = (i, k)
            if key not in powers:
                if images[i] is None:
                    raise KeyError(f"variable {self.space.names[i]!r} unbound and absent from target")
                powers[key] = images[i] ** k
            return powers[key]

        out = Polynomial(target, None, self.cap)
        for e, c in self.terms.items():
            term = Polynomial(target, {(0,) * len(target): c}, self.cap)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def evaluate(self, point: Mapping[str, object]) -> Fraction:
        vals = [q(point[n]) if any(e[i] for e in self.terms) else Fraction(0)
                for i, n in enumerate(self.space.names)]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for v, k in zip(vals, e):
                if k:
                    term *= v ** k
            total += term
        return total

    def embed(self, target: VarSpace) -> "Polynomial":
        """Re-express over a larger variable space (shared names keep their meaning)."""
        idx = [target.index(n) for n in self.space.names]
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(target)
            for i, k in zip(idx, e):
                ne[i] = k
            out[tuple(ne)] = c
        return Polynomial(target, out, self.cap)

    # text and json
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms.items():
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(self.space.names, e) if k)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = fmt(a)
            elif a == 1:
                body = mono
            else:
                body = f"{fmt(a)}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"Polynomial({self})"

    def to_json(self) -> list:
        return [{"exponents": list(e), "coeff": fmt(c)} for e, c in self.terms.items()]

    @classmethod
    def from_json(cls, space: VarSpace, data, cap: int = DEFAULT_DEGREE_CAP) -> "Polynomial":
        terms = {}
        for item in data:
            e = tuple(int(k) for k in item["exponents"])
            if e in terms:
                raise ValueError(f"duplicate monomial {e}")
            terms[e] = q(item["coeff"])
        return cls(space, terms, cap)


PolyVector = tuple  # tuple[Polynomial, ...]


def integrate_time(p: Polynomial) -> Polynomial:
    t = p.space.time
    if t is None:
        raise VarSpaceMismatch("variable space has no time variable")
    return p.integrate(t)


def substitute(p: Polynomial, bindings: Mapping[str, object], target: VarSpace | None = None) -> Polynomial:
    return p.substitute(bindings, target)


def gradient(p: Polynomial, names: Sequence[str]) -> PolyVector:
    return tuple(p.diff(n) for n in names)


def time_derivative(p: Polynomial) -> Polynomial:
    t = p.space.time
    if t is None:
        raise VarSpaceMismatch("variable space has no time variable")
    return p.diff(t)


# ---------------------------------------------------------------------------
# text parser: rational coefficients, + - * / ^ and parentheses

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


class ParseError(ValueError):
    pass


def _tokenize(text: str):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", Fraction(num)))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


def parse_polynomial(text: str, space: VarSpace, cap: int = DEFAULT_DEGREE_CAP) -> Polynomial:
    """Parse e.g. ``"-x2 - 3/2*x1^2 - 1/2*x1^3 + w1"`` over ``space``.

    Decimal literals are read exactly (``0.1`` is 1/10). Division is only
    allowed by constants.
    """
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def expr():
        node = term()
        while peek() in (("op", "+"), ("op", "-")):
            _, op = take()
            rhs = term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term():
        node = unary()
        while peek() in (("op", "*"), ("op", "/")):
            _, op = take()
            rhs = unary()
            if op == "*":
                node = node * rhs
            else:
                if rhs.degree != 0 or rhs.is_zero():
                    raise ParseError("division only by nonzero constants")
                node = node * (1 / rhs.constant_term())
        return node

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            kind, val = take()
            if kind != "num" or val.denominator != 1 or val < 0:
                raise ParseError("exponents must be non-negative integers")
            return base ** int(val)
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return Polynomial.const(space, val)
        if kind == "name":
            if val not in space.names:
                raise ParseError(f"unknown variable {val!r}; expected one of {space.names}")
            return Polynomial.var(space, val)
        if (kind, val) == ("op", "("):
            node = expr()
            if take() != ("op", ")"):
                raise ParseError("missing ')'")
            return node
        raise ParseError(f"unexpected token {val!r}")

    result = expr()
    if pos != len(toks):
        raise ParseError(f"trailing input near token {toks[pos][1]!r}")
    return Polynomial(space, result.terms, cap)
