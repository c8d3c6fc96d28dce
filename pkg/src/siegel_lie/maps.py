"""
Spectra, the linear operators R and D = R - 1, and the Lie-transform
representation of a map ``x' = Lambda x + v_1(x) + v_2(x) + ...``.

A map is represented as ``x' = T_W o R x`` where ``R f = f(Lambda x)``: the
point map of ``T_W`` is ``psi_W = Lambda^{-1} F``, so ``W`` is found order by
order from the coordinate functions without any divisor other than the
eigenvalues themselves.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union

from fractions import Fraction

import gmpy2
import numpy as np

from .algebra import HomPoly, HomVectorField, PolySeries
from .errors import RepresentationObstruction, ResonantDivisor
from .precision import is_mp
from .lie import GeneratingSequence, apply_transform, lie_derivative

# divisors at or below this modulus are treated as exact resonances
EPS_RES = 1e-14

TWO_PI = 2.0 * math.pi


def _wrap(phase):
    """Reduce phases into (-pi, pi]."""
    return np.pi - np.mod(np.pi - phase, TWO_PI)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues ``lambda_j = exp(mu_j + i omega_j)`` of a diagonal linear part."""

    mu: Tuple[float, ...]
    omega: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        if len(self.mu) != len(self.omega) or not self.mu:
            raise ValueError("mu and omega must be non-empty and of equal length")

    @classmethod
    def from_lambda(cls, lam) -> "Spectrum":
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        for j, l in enumerate(lam):
            if l == 0:
                raise RepresentationObstruction(j, l)
        return cls(tuple(np.log(np.abs(lam))), tuple(np.angle(lam)))

    @classmethod
    def rotation(cls, *rotation_numbers: float) -> "Spectrum":
        """Unit-circle eigenvalues ``exp(2 pi i gamma_j)``."""
        return cls(tuple(0.0 for _ in rotation_numbers),
                   tuple(TWO_PI * g for g in rotation_numbers))

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def log_lambda(self) -> np.ndarray:
        return np.array(self.mu) + 1j * np.array(self.omega)

    @property
    def lam(self) -> np.ndarray:
        return np.exp(self.log_lambda)

    def is_poincare(self) -> bool:
        return all(m > 0 for m in self.mu) or all(m < 0 for m in self.mu)

    def is_siegel(self) -> bool:
        return not self.is_poincare()

    def exponent(self, k) -> complex:
        """``<k, mu + i omega>``."""
        return complex(np.dot(np.asarray(k, dtype=float), self.log_lambda))

    def _mp_exponent(self, k, j=None):
        # exact sums of the stored doubles, evaluated at the working precision
        z = gmpy2.mpc(0)
        for e, m, w in zip(k, self.mu, self.omega):
            if e:
                z += e * gmpy2.mpc(m, w)
        if j is not None:
            z -= gmpy2.mpc(self.mu[j], self.omega[j])
        return z

    def power(self, k, mp: bool = False) -> complex:
        """``lambda**k`` computed in the log domain."""
        if mp:
            return gmpy2.exp(self._mp_exponent(k))
        z = self.exponent(k)
        return cmath.exp(complex(z.real, float(_wrap(z.imag))))

    def field_factor(self, k, j: int, mp: bool = False) -> complex:
        """Eigenvalue ``lambda**k / lambda_j`` of R on ``x**k e_j``."""
        if mp:
            return gmpy2.exp(self._mp_exponent(k, j))
        z = self.exponent(k) - self.log_lambda[j]
        return cmath.exp(complex(z.real, float(_wrap(z.imag))))

    def eigenvalue(self, j: int, mp: bool = False) -> complex:
        if mp:
            return gmpy2.exp(gmpy2.mpc(self.mu[j], self.omega[j]))
        return complex(self.lam[j])


def d_eigenvalue(spec: Spectrum, k, j: int, mp: bool = False) -> complex:
    """Eigenvalue ``exp(<k, mu + i omega> - mu_j - i omega_j) - 1`` of D on ``x**k e_j``."""
    if mp:
        return spec.field_factor(k, j, mp=True) - 1
    z = spec.exponent(k) - spec.log_lambda[j]
    return complex(np.expm1(complex(z.real, float(_wrap(z.imag)))))


def r_apply(spec: Spectrum, target: Union[HomPoly, HomVectorField]):
    """``(R f)(x) = f(Lambda x)`` and ``(R V)(x) = Lambda^{-1} V(Lambda x)``."""
    if isinstance(target, HomPoly):
        return HomPoly._raw(target.n, target.degree,
                            {k: c * spec.power(k, is_mp(c)) for k, c in target.terms.items()})
    return HomVectorField(
        [HomPoly._raw(target.n, target.degree,
                      {k: c * spec.field_factor(k, j, is_mp(c)) for k, c in comp.terms.items()})
         for j, comp in enumerate(target.components)],
        target.order)


def r_inverse(spec: Spectrum, target: Union[HomPoly, HomVectorField]):
    if isinstance(target, HomPoly):
        return HomPoly._raw(target.n, target.degree,
                            {k: c / spec.power(k, is_mp(c)) for k, c in target.terms.items()})
    return HomVectorField(
        [HomPoly._raw(target.n, target.degree,
                      {k: c / spec.field_factor(k, j, is_mp(c)) for k, c in comp.terms.items()})
         for j, comp in enumerate(target.components)],
        target.order)


def d_apply(spec: Spectrum, X: HomVectorField) -> HomVectorField:
    return HomVectorField(
        [HomPoly._raw(X.n, X.degree,
                      {k: c * d_eigenvalue(spec, k, j, is_mp(c)) for k, c in comp.terms.items()})
         for j, comp in enumerate(X.components)],
        X.order)


def solve_homological(spec: Spectrum, rhs: HomVectorField, eps_res: float = EPS_RES) -> HomVectorField:
    """Solve ``D X = rhs`` monomial by monomial.

    Raises
    ------
    ResonantDivisor
        If some needed divisor has modulus ``<= eps_res``.
    """
    comps = []
    for j, comp in enumerate(rhs.components):
        out = {}
        for k, w in comp.terms.items():
            d = d_eigenvalue(spec, k, j, is_mp(w))
            if abs(d) <= eps_res:
                raise ResonantDivisor(k, j, complex(d))
            out[k] = w / d
        comps.append(HomPoly._raw(rhs.n, rhs.degree, out))
    return HomVectorField(comps, rhs.order)


@dataclass
class AnalyticMap:
    """``x' = Lambda x + v_1(x) + ... + v_N(x)`` with ``v_s`` of order ``s``."""

    spectrum: Spectrum
    nonlinear: PolySeries

    def __post_init__(self):
        if self.nonlinear.kind != "map":
            raise ValueError("nonlinear part must be a map-kind series")
        if self.nonlinear.n != self.spectrum.n:
            raise ValueError("dimension mismatch")
        if 0 in self.nonlinear.parts:
            raise ValueError("the linear part is carried by the spectrum")

    @classmethod
    def from_parts(cls, spectrum: Spectrum, parts: Dict[int, HomVectorField], N: int) -> "AnalyticMap":
        return cls(spectrum, PolySeries(spectrum.n, N, "map", dict(parts)))

    @classmethod
    def quadratic_1d(cls, lam: complex, N: int, coeff: complex = 1.0) -> "AnalyticMap":
        """``x' = lam x + coeff x**2``."""
        spec = Spectrum.from_lambda([lam])
        return cls.from_parts(spec, {1: HomVectorField([HomPoly(1, 2, {(2,): coeff})])}, N)

    @property
    def n(self) -> int:
        return self.spectrum.n

    @property
    def N(self) -> int:
        return self.nonlinear.N

    def linear_part(self) -> HomVectorField:
        lam = self.spectrum.lam
        return HomVectorField([HomPoly.variable(self.n, j) * lam[j] for j in range(self.n)], 0)

    def full_series(self) -> PolySeries:
        out = self.nonlinear.copy()
        out.accumulate(0, self.linear_part())
        return out

    def evaluate(self, points) -> np.ndarray:
        return self.full_series().evaluate(points)


def map_to_generating_sequence(amap: AnalyticMap) -> Tuple[GeneratingSequence, GeneratingSequence]:
    """Generating sequences ``W`` (``x' = T_W o R x``) and ``V = R^{-1} W``.

    Order ``s`` reads ``E_s x = Lambda^{-1} v_s``; the only new unknown in
    ``E_s x`` is ``L_{W_s} x = W_s``, so the extraction is triangular.
    """
    spec, n, N = amap.spectrum, amap.n, amap.N
    lam = spec.lam
    for j, l in enumerate(lam):
        if abs(l) <= EPS_RES:
            raise RepresentationObstruction(j, l)
    mp = is_mp(amap.nonlinear.coefficient_sample())
    inv_lam = [1 / spec.eigenvalue(j, mp) for j in range(n)]
    W: Dict[int, HomVectorField] = {}
    # Ex[m] = E_m applied to the identity map
    Ex = [HomVectorField.identity(n)]
    for s in range(1, N + 1):
        v = amap.nonlinear.part(s)
        target = HomVectorField([v.components[j] * inv_lam[j] for j in range(n)], s)
        known = HomVectorField.zero(n, s)
        for i in range(1, s):
            Wi = W.get(i)
            if Wi is None:
                continue
            known = known + lie_derivative(Wi, Ex[s - i], "map") * Fraction(i, s)
        Ws = target - known
        if not Ws.is_zero():
            W[s] = Ws
        # E_s x = sum_i (i/s) L_{W_i} E_{s-i} x, now including i = s
        Ex.append(known + Ws)
    V = GeneratingSequence(n, N, {s: r_inverse(spec, X) for s, X in W.items()})
    return GeneratingSequence(n, N, W), V


def generating_sequence_to_map(W: GeneratingSequence, spec: Spectrum, N: int | None = None) -> AnalyticMap:
    """Taylor expansion of ``x' = T_W o R x``."""
    N = W.N if N is None else N
    lin = HomVectorField([HomPoly.variable(spec.n, j) * spec.lam[j] for j in range(spec.n)], 0)
    img = apply_transform(W, PolySeries(spec.n, N, "map", {0: lin}), N)
    parts = {s: p for s, p in img.parts.items() if s >= 1}
    return AnalyticMap.from_parts(spec, parts, N)


# -- map files ---------------------------------------------------------------

def format_map(amap: AnalyticMap) -> str:
    """Map file text: ``n N`` header, spectrum line, then grouped monomial rows."""
    lines = [f"{amap.n} {amap.N}",
             " ".join(f"{m!r} {w!r}" for m, w in zip(amap.spectrum.mu, amap.spectrum.omega))]
    for s in amap.nonlinear.orders():
        lines.extend(amap.nonlinear.part(s).to_rows())
    return "\n".join(lines) + "\n"


def parse_map(text: str) -> AnalyticMap:
    rows = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise ValueError("map file needs a header and a spectrum line")
    head = rows[0].split()
    if len(head) != 2:
        raise ValueError(f"bad header {rows[0]!r}; expected 'n N'")
    n, N = int(head[0]), int(head[1])
    spec_vals = [float(x) for x in rows[1].split()]
    if len(spec_vals) != 2 * n:
        raise ValueError(f"spectrum line needs {2 * n} numbers")
    spec = Spectrum(tuple(spec_vals[0::2]), tuple(spec_vals[1::2]))
    terms: Dict[int, dict] = {}
    cur = None
    for r in rows[2:]:
        tok = r.split()
        if tok[0] == "order":
            if len(tok) != 4 or tok[2] != "component":
                raise ValueError(f"bad block header {r!r}")
            s, j = int(tok[1]), int(tok[3]) - 1
            if not 0 <= j < n or s < 1:
                raise ValueError(f"bad block header {r!r}")
            cur = (s, j)
            continue
        if cur is None:
            raise ValueError(f"monomial row before any block header: {r!r}")
        if len(tok) != n + 2:
            raise ValueError(f"expected {n + 2} fields: {r!r}")
        k = tuple(int(x) for x in tok[2:])
        if sum(k) != cur[0] + 1:
            raise ValueError(f"row {r!r} has degree {sum(k)}, block order {cur[0]}")
        c = complex(float(tok[0]), float(tok[1]))
        slot = terms.setdefault(cur[0], {})
        slot[(cur[1], k)] = slot.get((cur[1], k), 0) + c
    parts = {s: HomVectorField.from_terms(n, s, t) for s, t in terms.items() if s <= N}
    return AnalyticMap.from_parts(spec, parts, N)


def read_map(path) -> AnalyticMap:
    return parse_map(Path(path).read_text())


def write_map(amap: AnalyticMap, path) -> None:
    Path(path).write_text(format_map(amap))


def random_map(spec: Spectrum, N: int, rng: np.random.Generator, scale: float = 1.0,
               decay: float = 1.0) -> AnalyticMap:
    """Map with random complex nonlinear parts; ``||v_s|| = scale * decay**(s-1)``."""
    from .lie import random_field

    parts = {s: random_field(spec.n, s, rng, scale * decay ** (s - 1)) for s in range(1, N + 1)}
    return AnalyticMap.from_parts(spec, parts, N)
