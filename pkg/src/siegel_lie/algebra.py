"""
Sparse homogeneous polynomials and polynomial vector fields over C.

Everything is keyed by exponent tuples (multi-indices).  A homogeneous
polynomial of degree ``d`` is said to have *order* ``d - 1``; a vector field
of order ``s`` has ``n`` components of degree ``s + 1``.  The norm used
throughout is the sum of the moduli of the coefficients.

Canonical ordering of monomials is graded-lexicographic: lower degree first,
and within a degree ``x1`` before ``x2`` etc., so that for ``n = 2`` and
degree 2 the order is ``x1^2, x1 x2, x2^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Tuple, Union

import numpy as np

from .errors import DegreeMismatch
from .precision import is_mp, is_scalar, scalar_like

# Only underflow-scale coefficients are dropped: norm ledgers must reflect
# the actually computed values.
PRUNE = 1e-300

MultiIndex = Tuple[int, ...]


def degree(k: MultiIndex) -> int:
    return sum(k)


def graded_lex_key(k: MultiIndex):
    """Sort key realizing the canonical graded-lex order."""
    return (sum(k), tuple(-e for e in k))


def monomials(n: int, d: int) -> list:
    """All exponent tuples of length ``n`` and degree ``d``, canonically sorted."""
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in monomials(n - 1, d - first):
            out.append((first,) + rest)
    return out


def unit_index(n: int, j: int) -> MultiIndex:
    return tuple(1 if i == j else 0 for i in range(n))


class HomPoly:
    """Homogeneous polynomial in ``n`` complex variables.

    Parameters
    ----------
    n : int
        Number of variables.
    degree : int
        Polynomial degree; every stored exponent must have this degree.
    terms : dict, optional
        Mapping ``exponent tuple -> coefficient``.  Zeros are discarded.
    """

    __slots__ = ("n", "degree", "terms")

    def __init__(self, n: int, degree: int, terms=None):
        clean = {}
        if terms:
            for k, c in terms.items():
                k = tuple(int(e) for e in k)
                if len(k) != n:
                    raise ValueError(f"exponent {k} has wrong length for n={n}")
                if any(e < 0 for e in k):
                    raise ValueError(f"negative exponent in {k}")
                if sum(k) != degree:
                    raise DegreeMismatch(f"exponent {k} does not have degree {degree}")
                c = c if is_mp(c) else complex(c)
                if abs(c) >= PRUNE:
                    clean[k] = c
        self.n = n
        self.degree = degree
        self.terms = clean

    @classmethod
    def _raw(cls, n, degree, terms):
        # trusted constructor, used by the arithmetic kernels
        obj = cls.__new__(cls)
        obj.n = n
        obj.degree = degree
        obj.terms = {k: c for k, c in terms.items() if abs(c) >= PRUNE}
        return obj

    @classmethod
    def zero(cls, n: int, degree: int) -> "HomPoly":
        return cls._raw(n, degree, {})

    @classmethod
    def variable(cls, n: int, j: int) -> "HomPoly":
        return cls._raw(n, 1, {unit_index(n, j): 1.0 + 0j})

    @classmethod
    def monomial(cls, k: MultiIndex, coeff=1.0) -> "HomPoly":
        return cls(len(k), sum(k), {k: coeff})

    @property
    def order(self) -> int:
        return self.degree - 1

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        """Terms in canonical order."""
        for k in sorted(self.terms, key=graded_lex_key):
            yield k, self.terms[k]

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return f"HomPoly(n={self.n}, degree={self.degree}, 0)"
        body = " + ".join(f"({c:.6g})*x^{k}" for k, c in self.items())
        return f"HomPoly({body})"

    def _check(self, other):
        if not isinstance(other, HomPoly):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("polynomials live in different numbers of variables")
        if other.degree != self.degree:
            raise DegreeMismatch(f"degree {self.degree} vs {other.degree}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return HomPoly._raw(self.n, self.degree, {k: c for k, c in out.items() if c != 0})

    def __neg__(self):
        return HomPoly._raw(self.n, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, HomPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, HomPoly):
            return poly_mul(self, other)
        if not is_scalar(other):
            return NotImplemented
        if not self.terms:
            return self
        c = scalar_like(other, next(iter(self.terms.values())))
        return HomPoly._raw(self.n, self.degree, {k: c * v for k, v in self.terms.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        return self * (1 / other if is_mp(other) else 1.0 / complex(other))

    def __eq__(self, other):
        if not isinstance(other, HomPoly):
            return NotImplemented
        return self.n == other.n and self.degree == other.degree and self.terms == other.terms

    __hash__ = None

    def norm(self) -> float:
        return math.fsum(abs(c) for c in self.terms.values())

    def map_coefficients(self, fn) -> "HomPoly":
        """Apply ``fn`` to every coefficient (for instance a change of number type)."""
        return HomPoly._raw(self.n, self.degree, {k: fn(c) for k, c in self.terms.items()})

    def max_abs_diff(self, other: "HomPoly") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(k, 0) - other.terms.get(k, 0)) for k in keys), default=0.0)

    def derivative(self, j: int) -> "HomPoly":
        if self.degree == 0:
            return HomPoly.zero(self.n, 0)
        out = {}
        for k, c in self.terms.items():
            if k[j]:
                kk = k[:j] + (k[j] - 1,) + k[j + 1:]
                out[kk] = c * k[j]
        return HomPoly._raw(self.n, self.degree - 1, out)

    def evaluate(self, points) -> np.ndarray:
        """Evaluate at one point (shape ``(n,)``) or many (shape ``(..., n)``)."""
        pts = np.asarray(points, dtype=complex)
        if not self.terms:
            return np.zeros(pts.shape[:-1], dtype=complex)
        K = np.array(list(self.terms.keys()), dtype=int)
        c = np.array(list(self.terms.values()), dtype=complex)
        # powers cached per coordinate: pw[..., j, e] = x_j**e
        pw = pts[..., :, None] ** np.arange(self.degree + 1)
        vals = np.ones(pts.shape[:-1] + (len(c),), dtype=complex)
        for j in range(self.n):
            vals = vals * pw[..., j, :][..., K[:, j]]
        return vals @ c

    def to_rows(self) -> list:
        """Canonical text rows ``coeff_re coeff_im k1 ... kn``."""
        return [
            " ".join([repr(complex(c).real), repr(complex(c).imag)] + [str(e) for e in k])
            for k, c in self.items()
        ]

    @classmethod
    def from_rows(cls, n: int, rows: Iterable[str], degree: int | None = None) -> "HomPoly":
        terms = {}
        for row in rows:
            parts = row.split()
            if not parts:
                continue
            if len(parts) != n + 2:
                raise ValueError(f"expected {n + 2} fields, got {len(parts)}: {row!r}")
            k = tuple(int(p) for p in parts[2:])
            terms[k] = terms.get(k, 0) + complex(float(parts[0]), float(parts[1]))
            if degree is None:
                degree = sum(k)
        if degree is None:
            raise ValueError("cannot infer the degree of an empty polynomial")
        return cls(n, degree, terms)


def _mul_terms(a: dict, b: dict) -> dict:
    out: Dict[MultiIndex, complex] = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            out[k] = out.get(k, 0) + ca * cb
    return out


def poly_add(f: HomPoly, g: HomPoly) -> HomPoly:
    return f + g


def poly_mul(f: HomPoly, g: HomPoly) -> HomPoly:
    if f.n != g.n:
        raise ValueError("polynomials live in different numbers of variables")
    return HomPoly._raw(f.n, f.degree + g.degree, _mul_terms(f.terms, g.terms))


def poly_norm(f: HomPoly) -> float:
    return f.norm()


class HomVectorField:
    """Vector field whose ``n`` components are homogeneous of degree ``order + 1``.

    The same container is used for vector-valued polynomial maps (for
    instance the identity ``x`` is the order-0 field with components
    ``x_1, ..., x_n``); how it transforms is decided by the caller.
    """

    __slots__ = ("n", "order", "components")

    def __init__(self, components, order: int | None = None):
        components = tuple(components)
        if not components:
            raise ValueError("a vector field needs at least one component")
        n = components[0].n
        if order is None:
            order = components[0].degree - 1
        for c in components:
            if c.n != n:
                raise ValueError("components live in different numbers of variables")
            if c.degree != order + 1:
                raise DegreeMismatch(
                    f"component of degree {c.degree} in a field of order {order}")
        if len(components) != n:
            raise ValueError(f"need {n} components, got {len(components)}")
        self.n = n
        self.order = order
        self.components = components

    @classmethod
    def zero(cls, n: int, order: int) -> "HomVectorField":
        return cls([HomPoly.zero(n, order + 1) for _ in range(n)], order)

    @classmethod
    def identity(cls, n: int) -> "HomVectorField":
        return cls([HomPoly.variable(n, j) for j in range(n)], 0)

    @classmethod
    def from_terms(cls, n: int, order: int, terms) -> "HomVectorField":
        """Build from a mapping ``(j, k) -> coefficient`` with 0-based ``j``."""
        comp = [dict() for _ in range(n)]
        for (j, k), c in terms.items():
            comp[j][tuple(k)] = comp[j].get(tuple(k), 0) + c
        return cls([HomPoly(n, order + 1, t) for t in comp], order)

    @property
    def degree(self) -> int:
        return self.order + 1

    def __getitem__(self, j) -> HomPoly:
        return self.components[j]

    def __iter__(self) -> Iterator[HomPoly]:
        return iter(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def items(self):
        """Triples ``(j, k, coeff)`` in canonical order (component-major)."""
        for j, c in enumerate(self.components):
            for k, v in c.items():
                yield j, k, v

    def __repr__(self):
        return f"HomVectorField(order={self.order}, {list(self.components)!r})"

    def _zip(self, other, op):
        if not isinstance(other, HomVectorField):
            return NotImplemented
        if other.order != self.order:
            raise DegreeMismatch(f"order {self.order} vs {other.order}")
        return HomVectorField([op(a, b) for a, b in zip(self.components, other.components)],
                              self.order)

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return HomVectorField([-c for c in self.components], self.order)

    def __mul__(self, other):
        if is_scalar(other) and not isinstance(other, (HomPoly, HomVectorField)):
            return HomVectorField([c * other for c in self.components], self.order)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / other if is_mp(other) else 1.0 / complex(other))

    def __eq__(self, other):
        if not isinstance(other, HomVectorField):
            return NotImplemented
        return self.order == other.order and self.components == other.components

    __hash__ = None

    def norm(self) -> float:
        return math.fsum(c.norm() for c in self.components)

    def map_coefficients(self, fn) -> "HomVectorField":
        return HomVectorField([c.map_coefficients(fn) for c in self.components], self.order)

    def max_abs_diff(self, other: "HomVectorField") -> float:
        return max(a.max_abs_diff(b) for a, b in zip(self.components, other.components))

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        return np.stack([c.evaluate(pts) for c in self.components], axis=-1)

    def to_rows(self) -> list:
        rows = []
        for j, c in enumerate(self.components):
            rows.append(f"order {self.order} component {j + 1}")
            rows.extend(c.to_rows())
        return rows


def vf_norm(X: HomVectorField) -> float:
    return X.norm()


def sup_norm_bound(obj: Union[HomPoly, HomVectorField], rho: float) -> float:
    """Upper bound ``||obj|| * rho**degree`` for the sup norm on the polydisk of radius rho."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    return obj.norm() * rho ** obj.degree


Part = Union[HomPoly, HomVectorField]

KINDS = ("function", "map", "field")


def zero_part(n: int, order: int, kind: str) -> Part:
    if kind == "function":
        return HomPoly.zero(n, order + 1)
    return HomVectorField.zero(n, order)


@dataclass
class PolySeries:
    """Graded expansion truncated at order ``N``.

    ``kind`` records how the parts transform: ``"function"`` parts are
    :class:`HomPoly`; ``"map"`` parts are vectors of functions and
    ``"field"`` parts are vector fields, both stored as
    :class:`HomVectorField`.  Parts beyond ``N`` are never kept.
    """

    n: int
    N: int
    kind: str = "map"
    parts: Dict[int, Part] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        parts = {}
        for s, p in self.parts.items():
            if p.order != s:
                raise DegreeMismatch(f"slot {s} holds a part of order {p.order}")
            if s <= self.N and not p.is_zero():
                parts[s] = p
        self.parts = parts

    @classmethod
    def identity(cls, n: int, N: int) -> "PolySeries":
        return cls(n, N, "map", {0: HomVectorField.identity(n)})

    @classmethod
    def coordinate(cls, n: int, j: int, N: int) -> "PolySeries":
        return cls(n, N, "function", {0: HomPoly.variable(n, j)})

    def part(self, s: int) -> Part:
        p = self.parts.get(s)
        return p if p is not None else zero_part(self.n, s, self.kind)

    def orders(self) -> list:
        return sorted(self.parts)

    def accumulate(self, s: int, p: Part):
        """In-place ``parts[s] += p`` (dropped if ``s > N``)."""
        if s > self.N:
            return
        cur = self.parts.get(s)
        new = p if cur is None else cur + p
        if new.is_zero():
            self.parts.pop(s, None)
        else:
            self.parts[s] = new

    def copy(self) -> "PolySeries":
        return PolySeries(self.n, self.N, self.kind, dict(self.parts))

    def truncate(self, N: int) -> "PolySeries":
        return PolySeries(self.n, min(N, self.N), self.kind,
                          {s: p for s, p in self.parts.items() if s <= N})

    def _binary(self, other, sign):
        if not isinstance(other, PolySeries) or other.kind != self.kind or other.n != self.n:
            return NotImplemented
        out = PolySeries(self.n, min(self.N, other.N), self.kind,
                         {s: p for s, p in self.parts.items() if s <= min(self.N, other.N)})
        for s, p in other.parts.items():
            out.accumulate(s, p if sign > 0 else -p)
        return out

    def __add__(self, other):
        return self._binary(other, +1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __mul__(self, c):
        return PolySeries(self.n, self.N, self.kind, {s: p * c for s, p in self.parts.items()})

    __rmul__ = __mul__

    def norms(self) -> dict:
        return {s: self.part(s).norm() for s in range(0, self.N + 1)}

    def map_coefficients(self, fn) -> "PolySeries":
        return PolySeries(self.n, self.N, self.kind,
                          {s: p.map_coefficients(fn) for s, p in self.parts.items()})

    def coefficient_sample(self):
        """Some stored coefficient (``None`` for the zero series); reveals the number type."""
        for p in self.parts.values():
            comps = [p] if isinstance(p, HomPoly) else p.components
            for c in comps:
                for v in c.terms.values():
                    return v
        return None

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        shape = pts.shape[:-1] + (() if self.kind == "function" else (self.n,))
        out = np.zeros(shape, dtype=complex)
        for p in self.parts.values():
            out = out + p.evaluate(pts)
        return out

    def max_abs_diff(self, other: "PolySeries") -> float:
        orders = set(self.parts) | set(other.parts)
        return max((self.part(s).max_abs_diff(other.part(s)) for s in orders), default=0.0)

    def component(self, j: int) -> "PolySeries":
        """The ``j``-th coordinate function of a map-kind series."""
        if self.kind == "function":
            raise ValueError("a function series has no components")
        return PolySeries(self.n, self.N, "function",
                          {s: p.components[j] for s, p in self.parts.items()})


# -- truncated substitution -------------------------------------------------

def _series_mul(a: dict, b: dict, n: int, max_degree: int) -> dict:
    """Product of two degree-indexed term dictionaries, truncated."""
    out: Dict[int, Dict[MultiIndex, complex]] = {}
    for da, ta in a.items():
        for db, tb in b.items():
            d = da + db
            if d > max_degree:
                continue
            acc = out.setdefault(d, {})
            for k, c in _mul_terms(ta, tb).items():
                acc[k] = acc.get(k, 0) + c
    return out


def substitute(outer: PolySeries, inner: PolySeries, N: int | None = None) -> PolySeries:
    """Composition ``outer(inner(x))`` truncated at order ``N``.

    ``inner`` must be a map-kind series without constant term (every part has
    order >= 0), so that the result is well defined order by order.
    ``outer`` may be of function or map kind.
    """
    if inner.kind != "map":
        raise ValueError("inner series must be a map")
    if outer.n != inner.n:
        raise ValueError("dimension mismatch")
    n = inner.n
    N = min(outer.N, inner.N) if N is None else N
    max_degree = N + 1
    coords = [{s + 1: dict(p.components[j].terms) for s, p in inner.parts.items()}
              for j in range(n)]
    powers = [[{0: {(0,) * n: 1.0 + 0j}}] for _ in range(n)]
    cache: Dict[MultiIndex, dict] = {(0,) * n: {0: {(0,) * n: 1.0 + 0j}}}

    def power(j, e):
        while len(powers[j]) <= e:
            powers[j].append(_series_mul(powers[j][-1], coords[j], n, max_degree))
        return powers[j][e]

    def mono(k):
        if k in cache:
            return cache[k]
        # peel off the last nonzero exponent
        j = max(i for i, e in enumerate(k) if e)
        rest = k[:j] + (0,) + k[j + 1:]
        val = _series_mul(mono(rest), power(j, k[j]), n, max_degree)
        cache[k] = val
        return val

    def subst_poly(p: HomPoly) -> dict:
        acc: Dict[int, Dict[MultiIndex, complex]] = {}
        for k, c in p.terms.items():
            for d, t in mono(k).items():
                slot = acc.setdefault(d, {})
                for kk, v in t.items():
                    slot[kk] = slot.get(kk, 0) + c * v
        return acc

    if outer.kind == "function":
        acc: Dict[int, Dict[MultiIndex, complex]] = {}
        for p in outer.parts.values():
            for d, t in subst_poly(p).items():
                slot = acc.setdefault(d, {})
                for kk, v in t.items():
                    slot[kk] = slot.get(kk, 0) + v
        parts = {d - 1: HomPoly._raw(n, d, t) for d, t in acc.items() if 1 <= d <= max_degree}
        return PolySeries(n, N, "function", parts)

    comps = []
    for j in range(n):
        acc = {}
        for p in outer.parts.values():
            for d, t in subst_poly(p.components[j]).items():
                slot = acc.setdefault(d, {})
                for kk, v in t.items():
                    slot[kk] = slot.get(kk, 0) + v
        comps.append(acc)
    parts = {}
    for d in range(1, max_degree + 1):
        if any(d in c for c in comps):
            parts[d - 1] = HomVectorField(
                [HomPoly._raw(n, d, c.get(d, {})) for c in comps], d - 1)
    return PolySeries(n, N, outer.kind, parts)
