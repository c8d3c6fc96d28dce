"""
Lie derivatives, Lie series and Lie transforms on graded polynomial objects.

Operators act on three kinds of targets (see :class:`~siegel_lie.algebra.PolySeries`):
scalar functions, vector-valued maps (each component transformed as a
function) and vector fields (transformed through the Lie bracket).

Point-map convention: for an operator ``T`` the functions ``T x_j`` are the
components of a point map ``phi`` with ``T f = f o phi``.  Composition of
operators reverses the order of the point maps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import HomPoly, HomVectorField, PolySeries, Part, zero_part


def _lie_terms(X: HomVectorField, f: HomPoly) -> dict:
    out: Dict[tuple, complex] = {}
    for j, Xj in enumerate(X.components):
        if not Xj.terms:
            continue
        for kb, cb in f.terms.items():
            e = kb[j]
            if not e:
                continue
            base = kb[:j] + (e - 1,) + kb[j + 1:]
            w = cb * e
            for ka, ca in Xj.terms.items():
                k = tuple(a + b for a, b in zip(ka, base))
                out[k] = out.get(k, 0) + ca * w
    return out


def lie_derivative_fn(X: HomVectorField, f: HomPoly) -> HomPoly:
    """``L_X f = sum_j X_j df/dx_j``; degree is ``deg f + order(X)``."""
    if X.n != f.n:
        raise ValueError("dimension mismatch")
    return HomPoly._raw(f.n, f.degree + X.order, _lie_terms(X, f))


def lie_derivative_vf(X: HomVectorField, v: HomVectorField) -> HomVectorField:
    """Lie bracket ``(L_X v)_j = sum_l (X_l dv_j/dx_l - v_l dX_j/dx_l)``."""
    if X.n != v.n:
        raise ValueError("dimension mismatch")
    comps = []
    d = v.degree + X.order
    for j in range(v.n):
        t = _lie_terms(X, v.components[j])
        for k, c in _lie_terms(v, X.components[j]).items():
            t[k] = t.get(k, 0) - c
        comps.append(HomPoly._raw(v.n, d, t))
    return HomVectorField(comps, X.order + v.order)


def lie_derivative(X: HomVectorField, target: Part, kind: str) -> Part:
    """Dispatch on how ``target`` transforms."""
    if kind == "function":
        return lie_derivative_fn(X, target)
    if kind == "map":
        return HomVectorField([lie_derivative_fn(X, c) for c in target.components],
                              X.order + target.order)
    if kind == "field":
        return lie_derivative_vf(X, target)
    raise ValueError(f"unknown kind {kind!r}")


@dataclass
class GeneratingSequence:
    """Sequence ``X_1, ..., X_N`` of vector fields, ``X_r`` of order ``r``.

    Missing slots are zero fields.
    """

    n: int
    N: int
    fields: Dict[int, HomVectorField] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for r, X in self.fields.items():
            if r < 1 or r > self.N:
                raise ValueError(f"slot {r} outside 1..{self.N}")
            if X.order != r:
                raise ValueError(f"slot {r} holds a field of order {X.order}")
            if not X.is_zero():
                clean[r] = X
        self.fields = clean

    @classmethod
    def from_list(cls, fields: Sequence[Optional[HomVectorField]], n: int | None = None,
                  N: int | None = None) -> "GeneratingSequence":
        if n is None:
            n = next(X.n for X in fields if X is not None)
        N = len(fields) if N is None else N
        return cls(n, N, {r: X for r, X in enumerate(fields, start=1) if X is not None})

    def __getitem__(self, r: int) -> HomVectorField:
        X = self.fields.get(r)
        return X if X is not None else HomVectorField.zero(self.n, r)

    def get(self, r: int) -> Optional[HomVectorField]:
        """The field in slot ``r`` or ``None`` when it is zero."""
        return self.fields.get(r)

    def __neg__(self):
        return GeneratingSequence(self.n, self.N, {r: -X for r, X in self.fields.items()})

    def norms(self) -> Dict[int, float]:
        return {r: self[r].norm() for r in range(1, self.N + 1)}

    def lowest_nonzero(self) -> Optional[int]:
        return min(self.fields) if self.fields else None


def _order_of(part: Part) -> int:
    return part.order


def lie_series_apply(X: HomVectorField, target: PolySeries, N: int | None = None) -> PolySeries:
    """Apply ``exp(L_X) = sum_j L_X^j / j!`` to ``target``, truncated at order ``N``."""
    if X.order < 1:
        raise ValueError("Lie series generator must have order >= 1")
    N = target.N if N is None else N
    out = PolySeries(target.n, N, target.kind)
    if X.is_zero():
        for s, p in target.parts.items():
            out.accumulate(s, p)
        return out
    for m, p in target.parts.items():
        term = p
        k = 0
        while m + k * X.order <= N:
            out.accumulate(m + k * X.order, term)
            k += 1
            if m + k * X.order > N:
                break
            term = lie_derivative(X, term, target.kind) * Fraction(1, k)
    return out


def lie_transform_parts(X: GeneratingSequence, target: Part, kind: str, smax: int,
                        min_index: int = 1) -> List[Part]:
    """``[E_0 target, ..., E_smax target]`` through the recursion
    ``E_s = sum_{j=1}^{s} (j/s) L_{X_j} E_{s-j}``.

    ``min_index`` skips slots known to vanish (``X_1 = ... = X_{r-1} = 0``).
    """
    E = [target]
    for s in range(1, smax + 1):
        acc = None
        for j in range(max(1, min_index), s + 1):
            Xj = X.get(j)
            if Xj is None:
                continue
            prev = E[s - j]
            if prev.is_zero():
                continue
            term = lie_derivative(Xj, prev, kind) * Fraction(j, s)
            acc = term if acc is None else acc + term
        E.append(acc if acc is not None else zero_part(X.n, target.order + s, kind))
    return E


def lie_transform_E(X: GeneratingSequence, s: int, target: Part, kind: str) -> Part:
    """The graded operator ``E^X_s`` applied to a homogeneous ``target``."""
    if s < 0:
        raise ValueError("s must be non-negative")
    result = lie_transform_parts(X, target, kind, s)[s]
    assert result.order == target.order + s
    return result


def _composition_weight(js: Sequence[int]) -> Fraction:
    num = 1
    den = 1
    partial = 0
    for j in js:
        partial += j
        num *= j
        den *= partial
    return Fraction(num, den)


def lie_transform_E_nonrecursive(X: GeneratingSequence, s: int, target: Part, kind: str,
                                 min_index: int = 1) -> Part:
    """Closed form of ``E^X_s`` as a weighted sum over compositions of ``s``.

    Each composition ``(j_1, ..., j_k)`` contributes
    ``j_k...j_1 / ((j_1+...+j_k)...(j_1)) * L_{X_{j_k}} ... L_{X_{j_1}}`` with
    ``L_{X_{j_1}}`` applied first.  Test-only: the number of terms grows as
    ``2**(s-1)``.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    acc = zero_part(X.n, target.order + s, kind)

    # depth-first over composition prefixes; a prefix carries L...L target
    def walk(prefix, value, total):
        nonlocal acc
        if total == s:
            acc = acc + value * _composition_weight(prefix)
            return
        for j in range(max(1, min_index), s - total + 1):
            Xj = X.get(j)
            if Xj is None:
                continue
            walk(prefix + (j,), lie_derivative(Xj, value, kind), total + j)

    walk((), target, 0)
    return acc


def apply_transform(X: GeneratingSequence, target: PolySeries, N: int | None = None) -> PolySeries:
    """``T_X target = sum_s E^X_s target`` truncated at order ``N``."""
    N = min(target.N, X.N) if N is None else N
    out = PolySeries(target.n, N, target.kind)
    for m, p in target.parts.items():
        if m > N:
            continue
        for s, e in enumerate(lie_transform_parts(X, p, target.kind, N - m)):
            if not e.is_zero():
                out.accumulate(m + s, e)
    return out


def compose_transforms(X: GeneratingSequence, Y: GeneratingSequence) -> GeneratingSequence:
    """Generating sequence ``Z`` with ``T_X o T_Y = T_Z``.

    ``Z_s = X_s + Y_s + sum_{j<s} (j/s) E^X_{s-j} Y_j``.
    """
    if X.n != Y.n or X.N != Y.N:
        raise ValueError("sequences must share n and N")
    N = X.N
    Z: Dict[int, HomVectorField] = {}
    for s in range(1, N + 1):
        Z[s] = X[s] + Y[s]
    for j in range(1, N):
        Yj = Y.get(j)
        if Yj is None:
            continue
        E = lie_transform_parts(X, Yj, "field", N - j)
        for m in range(1, N - j + 1):
            s = j + m
            Z[s] = Z[s] + E[m] * Fraction(j, s)
    return GeneratingSequence(X.n, N, Z)


class LieSeriesChain:
    """Composition of Lie series ``exp(L_{X_r}) o ... o exp(L_{X_1})``.

    Parameters
    ----------
    fields : sequence
        ``X_1, ..., X_r`` (``None`` or zero entries allowed); ``X_i`` must have
        order ``i``-like positive order.
    N : int
        Truncation order for series work.

    Notes
    -----
    ``apply_series`` applies ``exp(L_{X_1})`` first.  The corresponding point
    map is ``phi_{X_1} o ... o phi_{X_r}`` (time-one flows), i.e. the flow of
    ``X_r`` acts on a point first.  :meth:`inverse` returns the chain
    ``exp(L_{-X_1}) o ... o exp(L_{-X_r})``.
    """

    def __init__(self, fields: Sequence[Optional[HomVectorField]], N: int,
                 _ops: Optional[list] = None):
        self.N = N
        if _ops is None:
            _ops = [X for X in fields if X is not None and not X.is_zero()]
        # _ops[0] is applied first to a series
        self._ops = list(_ops)
        self._flow_cache: Dict[tuple, PolySeries] = {}

    @property
    def operators(self) -> list:
        return list(self._ops)

    def inverse(self) -> "LieSeriesChain":
        return LieSeriesChain((), self.N, [-X for X in reversed(self._ops)])

    def apply_series(self, target: PolySeries, N: int | None = None) -> PolySeries:
        N = min(self.N, target.N) if N is None else N
        out = target.truncate(N)
        for X in self._ops:
            out = lie_series_apply(X, out, N)
        return out

    def _flow_series(self, idx: int, order: int) -> PolySeries:
        key = (idx, order)
        if key not in self._flow_cache:
            n = self._ops[idx].n
            self._flow_cache[key] = lie_series_apply(self._ops[idx], PolySeries.identity(n, order))
        return self._flow_cache[key]

    def apply_point(self, points, order: int | None = None, method: str = "series") -> np.ndarray:
        """Evaluate the point map of the chain.

        ``method="series"`` evaluates each time-one flow by its Lie series
        truncated at ``order`` (default ``N``); ``method="ode"`` integrates
        the flows numerically.
        """
        pts = np.array(points, dtype=complex)
        order = self.N if order is None else order
        for idx in reversed(range(len(self._ops))):
            if method == "series":
                pts = self._flow_series(idx, order).evaluate(pts)
            elif method == "ode":
                pts = flow_ode(self._ops[idx], pts)
            else:
                raise ValueError(f"unknown method {method!r}")
        return pts


def compose_lie_series_chain(fields: Sequence[Optional[HomVectorField]], N: int) -> LieSeriesChain:
    return LieSeriesChain(fields, N)


def flow_ode(X: HomVectorField, points, t: float = 1.0, rtol: float = 1e-12,
             atol: float = 1e-15) -> np.ndarray:
    """Time-``t`` flow of ``dx/dt = X(x)`` by numerical integration (any batch shape)."""
    pts = np.array(points, dtype=complex)
    shape = pts.shape
    flat = pts.reshape(-1, X.n)
    m = flat.shape[0]

    def rhs(_, y):
        return X.evaluate(y.reshape(m, X.n)).reshape(-1)

    sol = solve_ivp(rhs, (0.0, t), flat.reshape(-1), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    return sol.y[:, -1].reshape(shape)


def random_field(n: int, order: int, rng: np.random.Generator, scale: float = 1.0,
                 density: float = 1.0) -> HomVectorField:
    """Random complex field, normalized to have norm ``scale``."""
    from .algebra import monomials

    terms = {}
    for j in range(n):
        for k in monomials(n, order + 1):
            if rng.random() < density:
                terms[(j, k)] = complex(rng.normal(), rng.normal())
    X = HomVectorField.from_terms(n, order, terms)
    nrm = X.norm()
    return X * (scale / nrm) if nrm > 0 else X


def random_poly(n: int, degree: int, rng: np.random.Generator, scale: float = 1.0) -> HomPoly:
    from .algebra import monomials

    f = HomPoly(n, degree, {k: complex(rng.normal(), rng.normal()) for k in monomials(n, degree)})
    return f * (scale / f.norm())
