"""
Independent checks of a computed normal form.

:func:`koenigs_oracle` solves the one-dimensional Schröder equation
``sigma(F(x)) = lam sigma(x)`` by back-substitution on plain coefficient
arrays; it uses numpy only and shares no code with the Lie-transform modules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.stats import qmc

from .errors import InsufficientData, ResonantDivisor

DEFAULT_SEED = 20240101


# -- conjugacy residual ------------------------------------------------------------

@dataclass
class ResidualReport:
    """Residual of ``S o F - Lambda S`` for a normalizing transform ``S``.

    Attributes
    ----------
    order_norms : dict
        ``s -> ||[S o F - Lambda S]_s||`` for ``0 <= s <= N``.
    scale : float
        ``max(1, largest norm in the W ledger)``; tolerances are relative to it.
    point_residuals : ndarray or None
        ``max_j |S(F(x))_j - lam_j S(x)_j|`` at each sample point.
    """

    N: int
    order_norms: Dict[int, float]
    scale: float
    point_radius: Optional[float] = None
    point_residuals: Optional[np.ndarray] = None
    seed: Optional[int] = None

    @property
    def max_order_norm(self) -> float:
        return max(self.order_norms.values(), default=0.0)

    @property
    def max_relative(self) -> float:
        return self.max_order_norm / self.scale

    def within(self, tol: float) -> bool:
        return all(v <= tol * self.scale for v in self.order_norms.values())

    def table(self) -> List[str]:
        rows = [f"s,residual_norm,N={self.N}"]
        rows += [f"{s},{v:.17g}" for s, v in sorted(self.order_norms.items())]
        return rows


def conjugacy_residual(amap, result, radius: float | None = None, samples: int = 64,
                       seed: int = DEFAULT_SEED) -> ResidualReport:
    """Graded parts of ``S(F(x)) - Lambda S(x)`` and, optionally, sampled point residuals.

    Points are scrambled Halton samples in the polydisk of the given radius.
    """
    from .algebra import HomVectorField, substitute

    S = result.transform
    lam = amap.spectrum.lam
    lhs = substitute(S, amap.full_series(), result.N)
    rhs_parts = {s: HomVectorField([p.components[j] * lam[j] for j in range(amap.n)], s)
                 for s, p in S.parts.items()}
    norms = {}
    for s in range(result.N + 1):
        d = lhs.part(s) - rhs_parts.get(s, lhs.part(s) * 0)
        norms[s] = d.norm()
    report = ResidualReport(result.N, norms, result.max_w_norm(), seed=seed)
    if radius is not None:
        pts = quasi_random_polydisk(amap.n, radius, samples, seed)
        img = S.evaluate(amap.evaluate(pts))
        lin = S.evaluate(pts) * lam
        report.point_radius = radius
        report.point_residuals = np.abs(img - lin).max(axis=-1)
    return report


def quasi_random_polydisk(n: int, radius: float, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """``count`` scrambled Halton points in the polydisk (area-uniform per coordinate)."""
    u = qmc.Halton(d=2 * n, scramble=True, seed=seed).random(count)
    mod = radius * np.sqrt(u[:, :n])
    return mod * np.exp(2j * np.pi * u[:, n:])


# -- the Koenigs / Schröder recursion ------------------------------------------------

def koenigs_oracle(lam: complex, coeffs, N: int, eps_res: float = 1e-14) -> np.ndarray:
    """Coefficients ``a_1 .. a_{N+1}`` of ``sigma`` with ``sigma(F(x)) = lam sigma(x)``.

    Parameters
    ----------
    lam : complex
        Multiplier at the fixed point.
    coeffs : mapping or sequence
        ``coeffs[d]`` is the coefficient of ``x**d`` in ``F`` for ``d >= 2``.
    N : int
        Highest order; the result has degrees up to ``N + 1``.

    Returns
    -------
    ndarray
        Index ``d`` holds ``a_d`` (``a_0 = 0``, ``a_1 = 1``).

    Notes
    -----
    At degree ``d`` the equation reads
    ``a_d (lam - lam**d) = sum_{m<d} a_m [x^d] F**m``.
    """
    D = N + 1
    F = np.zeros(D + 1, dtype=complex)
    F[1] = lam
    items = coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs)
    for d, c in items:
        if 2 <= d <= D:
            F[d] = c
    # powers[m] = F**m truncated at degree D
    powers = [np.zeros(D + 1, dtype=complex) for _ in range(D + 1)]
    powers[0][0] = 1.0
    for m in range(1, D + 1):
        powers[m] = np.convolve(powers[m - 1], F)[:D + 1]
    a = np.zeros(D + 1, dtype=complex)
    a[1] = 1.0
    for d in range(2, D + 1):
        div = lam - lam ** d
        if abs(div) <= eps_res * max(1.0, abs(lam)):
            raise ResonantDivisor((d,), 0, div)
        rhs = sum(a[m] * powers[m][d] for m in range(1, d))
        a[d] = rhs / div
    return a


def transform_coefficients_1d(result) -> np.ndarray:
    """Coefficients ``a_d`` of a one-dimensional normalizing transform."""
    if result.n != 1:
        raise ValueError("only for n = 1")
    a = np.zeros(result.N + 2, dtype=complex)
    for s, p in result.transform.parts.items():
        a[s + 1] = p.components[0].terms.get((s + 1,), 0.0)
    return a


def map_coefficients_1d(amap) -> Dict[int, complex]:
    return {s + 1: p.components[0].terms.get((s + 1,), 0.0)
            for s, p in amap.nonlinear.parts.items()}


# -- empirical radius -----------------------------------------------------------------

@dataclass(frozen=True)
class RootTestResult:
    radius: float
    uncertainty: float
    slope: float
    orders: tuple
    statistical: float = 0.0
    window: float = 0.0

    def __str__(self):
        return f"{self.radius:.6g} +/- {self.uncertainty:.2g} (orders {self.orders[0]}..{self.orders[-1]})"


def _fit_slope(x: np.ndarray, y: np.ndarray):
    (slope, icpt), cov = np.polyfit(x, y, 1, cov="unscaled")
    resid = y - (slope * x + icpt)
    dof = len(x) - 2
    var = float(resid @ resid) / dof if dof > 0 else 0.0
    return float(slope), math.sqrt(max(cov[0, 0] * var, 0.0))


def root_test_radius(transform, min_orders: int = 5) -> RootTestResult:
    """Radius ``exp(-slope)`` from regressing ``ln ||psi_s||`` on ``s``.

    Uses the nonlinear orders ``s >= 1`` with nonzero norm, keeping the top
    ``ceil(count / 2)`` of them (but at least ``min_orders``).

    The uncertainty adds two parts: the regression scatter
    ``radius * stderr(slope)``, and the shift of the estimate when only the
    upper half of the window is fitted.  The second part captures the bias
    from sub-exponential prefactors, which makes ``ln ||psi_s||`` slightly
    curved and which the scatter alone does not see.

    Raises
    ------
    InsufficientData
        With fewer than ``min_orders`` nonzero orders.
    """
    pts = [(s, p.norm()) for s, p in sorted(transform.parts.items()) if s >= 1 and p.norm() > 0]
    if len(pts) < min_orders:
        raise InsufficientData(f"{len(pts)} nonzero orders, need {min_orders}")
    keep = max(min_orders, math.ceil(len(pts) / 2))
    pts = pts[-keep:]
    x = np.array([s for s, _ in pts], dtype=float)
    y = np.log([v for _, v in pts])
    slope, se = _fit_slope(x, y)
    radius = math.exp(-slope)
    half = max(3, keep // 2)
    slope_half, _ = _fit_slope(x[-half:], y[-half:])
    window = abs(math.exp(-slope_half) - radius)
    stat = radius * se
    return RootTestResult(radius, stat + window, slope, tuple(int(s) for s in x), stat, window)


# -- exchange of substitution and transform ---------------------------------------------

def exchange_check(X, f, samples, N: int | None = None) -> float:
    """``max |f(y(x)) - (T_X f)(x)|`` over sample points, ``y(x) = T_X x``.

    Both sides are truncated at order ``N`` (default ``X.N``).
    """
    from .algebra import HomPoly, PolySeries
    from .lie import apply_transform

    N = X.N if N is None else N
    n = X.n
    if isinstance(f, HomPoly):
        f = PolySeries(n, N, "function", {f.degree - 1: f})
    y_series = apply_transform(X, PolySeries.identity(n, N), N)
    Tf = apply_transform(X, f, N)
    pts = np.asarray(samples, dtype=complex)
    y = y_series.evaluate(pts)
    return float(np.abs(f.evaluate(y) - Tf.evaluate(pts)).max()) if len(pts) else 0.0
