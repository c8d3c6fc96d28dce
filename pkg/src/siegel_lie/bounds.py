"""
Quantitative estimates for the normalizing transformation.

The chain of constants is

* hypothesis constants ``A, C0`` with ``||W^(0)_s|| <= C0**(s-1) A / s``;
* ``C_1 = 2 C0 + 16 A`` and ``C_r = (1 + 1/r**2)**(1/r) (1 + 1/r)**(1/r) C_{r-1}``;
* the iteration bounds ``||X_r|| <= T_{r-1,r} C_{r-1}**(r-1) A / (r alpha_r)`` and
  ``||W^(r)_s|| <= T_{r,s} C_r**(s-1) A / s``;
* ``||X_r|| <= eta**r exp(r Gamma) K / r`` with ``eta = gamma C_inf`` and
  ``K = A / C_inf``, where ``gamma = exp(a)`` bounds the divisor products;
* the convergence condition ``sum_r |X_r|_rho < rho / (4 e)`` for the composed
  Lie series, using ``|X_r|_rho <= ||X_r|| rho**(r+1)``.

Sup norms of vector fields are ``|X|_rho = sum_j sup |X_j|`` over the polydisk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import HomPoly, HomVectorField, PolySeries, sup_norm_bound
from .divisors import (DiophantineFloor, DivisorTable, log_constant, t_greedy, t_sharp)
from .errors import GammaDiverged
from .lie import LieSeriesChain, flow_ode, lie_series_apply

E = math.e


# -- hypothesis constants and the C sequence ----------------------------------

def fit_hypothesis_constants(w0_norms: Dict[int, float]) -> Tuple[float, float]:
    """Fit ``(A, C0)`` so that ``||W_s|| <= C0**(s-1) A / s`` for every ``s``.

    ``C0`` comes from a least-squares fit of ``ln(s ||W_s||)`` against
    ``s - 1``; ``A`` is then the smallest value making every inequality hold.

    Returns
    -------
    (A, C0) : tuple of float
        ``(0, 0)`` for a linear map.
    """
    pts = [(s, v) for s, v in sorted(w0_norms.items()) if v > 0]
    if not pts:
        return 0.0, 0.0
    if len(pts) == 1:
        s, _ = pts[0]
        C0 = 0.0 if s == 1 else 1.0
    else:
        x = np.array([s - 1 for s, _ in pts], dtype=float)
        y = np.array([math.log(s * v) for s, v in pts])
        C0 = math.exp(np.polyfit(x, y, 1)[0])
    A = max(s * v / C0 ** (s - 1) for s, v in pts)
    return A, C0


def c_factor(r: int) -> float:
    return (1.0 + 1.0 / r ** 2) ** (1.0 / r) * (1.0 + 1.0 / r) ** (1.0 / r)


@dataclass(frozen=True)
class CSequence:
    """``C_0 .. C_R`` and a rigorous upper bound for ``C_inf = lim C_r``."""

    values: np.ndarray
    C_inf_upper: float

    def __getitem__(self, r: int) -> float:
        return float(self.values[r])

    @property
    def r_max(self) -> int:
        return len(self.values) - 1


def c_sequence(C0: float, A: float, r_max: int) -> CSequence:
    """The recursively defined sequence ``C_r``.

    ``ln C_inf - ln C_R = sum_{r>R} (ln(1+1/r**2) + ln(1+1/r)) / r``, which is
    below ``sum_{r>R} (1/r**3 + 1/r**2) < 1/(2 R**2) + 1/R``.
    """
    if A < 0 or C0 < 0:
        raise ValueError("A and C0 must be non-negative")
    r_max = max(r_max, 1)
    C = np.empty(r_max + 1)
    C[0] = C0
    C[1] = 2.0 * C0 + 16.0 * A
    for r in range(2, r_max + 1):
        C[r] = c_factor(r) * C[r - 1]
    upper = C[r_max] * math.exp(1.0 / (2 * r_max ** 2) + 1.0 / r_max)
    return CSequence(C, upper)


# -- the iteration lemma --------------------------------------------------------

def _T(r: int, s: int, table: DivisorTable, t_mode: str) -> float:
    if r == 0:
        return 1.0
    if t_mode == "sharp":
        return t_sharp(s, table.sigma)
    if t_mode == "exact":
        return t_greedy(r, s, table.sigma)
    raise ValueError("t_mode must be 'sharp' or 'exact'")


def iteration_bounds(A: float, C: CSequence, table: DivisorTable, r: int, s: int,
                     t_mode: str = "sharp") -> Tuple[float, float]:
    """``(bound_X_r, bound_W^(r)_s)``.

    ``t_mode="sharp"`` uses the product over ``{s} u I*_s``, which dominates
    ``T_{r,s}``; ``"exact"`` uses the maximal admissible product itself.
    """
    bx = _T(r - 1, r, table, t_mode) * C[r - 1] ** (r - 1) * A / (r * table.alpha[r])
    bw = _T(r, s, table, t_mode) * C[r] ** (s - 1) * A / s
    return bx, bw


@dataclass
class IterationAudit:
    A: float
    C0: float
    C: CSequence
    t_mode: str
    rows: List[tuple]  # (r, s, norm_X, norm_W, bound_X, bound_W)
    hypothesis_ok: bool
    violations: List[tuple] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.hypothesis_ok and not self.violations


def audit_iteration_lemma(result, table: DivisorTable, t_mode: str = "sharp",
                          rtol: float = 1e-12) -> IterationAudit:
    """Compare the norm ledger of a :class:`NormalFormResult` with the bounds.

    A violation is recorded when a computed norm exceeds its bound by more
    than the relative round-off allowance ``rtol``.
    """
    N = result.N
    if table.R_max < N:
        raise ValueError(f"divisor table has R_max={table.R_max} < N={N}")
    w0 = {s: result.w_norms[(0, s)] for s in range(1, N + 1)}
    A, C0 = fit_hypothesis_constants(w0)
    C = c_sequence(C0, A, N)
    hyp = all(v <= C0 ** (s - 1) * A / s * (1 + rtol) for s, v in w0.items())
    rows, bad = [], []
    for r in range(1, N + 1):
        nx = result.x_norms.get(r, 0.0)
        for s in range(r, N + 1):
            nw = result.w_norms.get((r, s), 0.0)
            bx, bw = iteration_bounds(A, C, table, r, s, t_mode)
            rows.append((r, s, nx, nw, bx, bw))
            if s == r and nx > bx * (1 + rtol):
                bad.append(("X", r, nx, bx))
            if s > r and nw > bw * (1 + rtol):
                bad.append(("W", r, s, nw, bw))
    return IterationAudit(A, C0, C, t_mode, rows, hyp, bad)


# -- Cauchy estimates for Lie derivatives ----------------------------------------

def cauchy_lie_bound(normX_rho: float, f_rho: float, rho: float, delta: float, s: int) -> float:
    """``(s!/e) (e |X|_rho / delta)**s |f|_rho`` bounding ``|L_X^s f|_{rho-delta}``.

    ``s = 0`` returns ``|f|_rho``.
    """
    if not 0 < delta < rho:
        raise ValueError("need 0 < delta < rho")
    if s == 0:
        return f_rho
    return math.factorial(s) / E * (E * normX_rho / delta) ** s * f_rho


def cauchy_lie_bound_first(normX_rho: float, f_rho_inner: float, rho: float,
                           delta: float, delta_prime: float = 0.0) -> float:
    """``|X|_rho |f|_{rho-delta'} / (delta - delta')`` bounding ``|L_X f|_{rho-delta}``."""
    if not 0 <= delta_prime < delta < rho:
        raise ValueError("need 0 <= delta' < delta < rho")
    return normX_rho * f_rho_inner / (delta - delta_prime)


def torus_samples(n: int, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points with every coordinate of modulus ``radius`` (the distinguished boundary)."""
    return radius * np.exp(2j * np.pi * rng.random((count, n)))


def polydisk_samples(n: int, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points uniformly spread (in area) inside the polydisk of the given radius."""
    mod = radius * np.sqrt(rng.random((count, n)))
    return mod * np.exp(2j * np.pi * rng.random((count, n)))


def sampled_sup(values_fn, n: int, radius: float, count: int, rng) -> float:
    """Max modulus of ``values_fn`` on sampled torus points (a lower estimate of the sup)."""
    vals = np.asarray(values_fn(torus_samples(n, radius, count, rng)))
    if vals.ndim == 2:
        return float(np.abs(vals).sum(axis=-1).max())
    return float(np.abs(vals).max())


# -- analyticity of a single Lie series ----------------------------------------

@dataclass
class DomainCertificate:
    """Outcome of a domain check, with the hypothesis values that decided it."""

    kind: str
    passed: bool
    rho: float
    delta: float
    lhs: float
    threshold: float
    inclusions: Optional[str] = None
    details: Dict[str, object] = field(default_factory=dict)

    def lines(self) -> List[str]:
        status = "pass" if self.passed else "fail"
        out = [f"{self.kind}: {status} (lhs={self.lhs:.6e} threshold={self.threshold:.6e} "
               f"rho={self.rho:.6e} delta={self.delta:.6e})"]
        if self.passed and self.inclusions:
            out.append(f"  certified: {self.inclusions}")
        for k, v in self.details.items():
            out.append(f"  {k}: {v}")
        return out


def explie_threshold(delta: float) -> float:
    return delta * (E - 1.0) / E ** 2


def explie_domain_check(X, rho: float, delta: float) -> DomainCertificate:
    """Check ``|X|_rho < delta (e-1)/e**2`` for a field or a list of fields.

    The sup norm is bounded from above by ``||X|| rho**(order+1)``; a list is
    treated as the sum of its homogeneous parts.
    """
    if not 0 < delta <= rho / 2:
        raise ValueError("need 0 < delta <= rho/2")
    fields = X if isinstance(X, (list, tuple)) else [X]
    lhs = math.fsum(sup_norm_bound(Y, rho) for Y in fields if Y is not None)
    thr = explie_threshold(delta)
    ok = lhs < thr
    return DomainCertificate(
        "single Lie series", ok, rho, delta, lhs, thr,
        f"D({rho - 2 * delta:.6e}) in phi(D({rho - delta:.6e})) in D({rho:.6e})",
        {"displacement bound on D(rho-delta)": f"{delta / E ** 2:.6e}"})


@dataclass
class DisplacementAudit:
    max_series: float
    max_ode: float
    bound: float
    samples: int
    seed: int

    @property
    def ok(self) -> bool:
        return self.max_series <= self.bound and self.max_ode <= self.bound


def explie_displacement_audit(X: HomVectorField, rho: float, delta: float, order: int = 24,
                              samples: int = 64, seed: int = 0) -> DisplacementAudit:
    """Measure ``max_j |exp(L_X) x_j - x_j|`` on ``D(rho - delta)``.

    Two evaluations: the Lie series truncated at ``order`` and a numerical
    integration of the time-one flow.  Sample points sit on the
    distinguished boundary, where holomorphic functions attain their maximum.
    """
    rng = np.random.default_rng(seed)
    pts = torus_samples(X.n, rho - delta, samples, rng)
    flow = lie_series_apply(X, PolySeries.identity(X.n, order))
    d_series = np.abs(flow.evaluate(pts) - pts).max()
    d_ode = np.abs(flow_ode(X, pts) - pts).max()
    return DisplacementAudit(float(d_series), float(d_ode), delta / E ** 2, samples, seed)


# -- analyticity of composed Lie series -------------------------------------------

def composed_series_certificate(norms_rho: Sequence[float], rho: float,
                                delta: float) -> DomainCertificate:
    """Check ``sum_r |X_r|_rho < rho / (4 e)`` for the chain ``exp(L_{X_r}) o ... o exp(L_{X_1})``.

    ``norms_rho[i]`` is (an upper bound of) ``|X_{i+1}|_rho``.  On pass the
    inclusions hold for the limit map and for its inverse.  The details record
    the split ``delta_s = |X_s|_rho delta / sum_r |X_r|_rho`` with the nested
    radii it induces, and whether each field satisfies the single-series
    hypothesis with its own ``delta_s``; the latter is diagnostic only and
    does not affect the verdict.
    """
    if not 0 < delta < rho / 2:
        raise ValueError("need 0 < delta < rho/2")
    norms = [float(v) for v in norms_rho]
    total = math.fsum(norms)
    thr = rho / (4 * E)
    ok = total < thr
    details: Dict[str, object] = {}
    if total > 0:
        split = [v * delta / total for v in norms]
        details["delta_s"] = " ".join(f"{d:.3e}" for d in split)
        details["inner radii"] = f"{rho - delta:.6e} -> {rho - delta - math.fsum(split):.6e}"
        details["outer radii"] = f"{rho - delta:.6e} -> {rho - delta + math.fsum(split):.6e}"
        per_field = [v < explie_threshold(d) for v, d in zip(norms, split) if d > 0]
        details["per-field single-series hypothesis (diagnostic)"] = \
            f"{sum(per_field)}/{len(per_field)} fields"
    return DomainCertificate(
        "composed Lie series", ok, rho, delta, total, thr,
        f"D({rho - 2 * delta:.6e}) in S(D({rho - delta:.6e})) in D({rho:.6e}), same for the inverse",
        details)


def chain_sup_norms(chain: LieSeriesChain, rho: float) -> List[float]:
    return [sup_norm_bound(X, rho) for X in chain.operators]


@dataclass
class InclusionAudit:
    roundtrip_error: float
    forward_max_modulus: float
    inverse_max_modulus: float
    preimage_max_modulus: float
    rho: float
    delta: float
    samples: int
    seed: int

    @property
    def ok(self) -> bool:
        tol = 1e-12 * self.rho
        return (self.roundtrip_error <= 1e-9
                and self.forward_max_modulus <= self.rho + tol
                and self.inverse_max_modulus <= self.rho + tol
                and self.preimage_max_modulus <= self.rho - self.delta + tol)


def composed_series_audit(chain: LieSeriesChain, rho: float, delta: float, order: int | None = None,
                          samples: int = 64, seed: int = 0) -> InclusionAudit:
    """Point audit of the inclusions for a composed chain.

    * images of ``D(rho - delta)`` under the chain and its inverse stay in ``D(rho)``;
    * preimages of ``D(rho - 2 delta)`` lie in ``D(rho - delta)``;
    * forward then inverse returns the sample points.
    """
    rng = np.random.default_rng(seed)
    n = chain.operators[0].n if chain.operators else 1
    inv = chain.inverse()
    x = np.vstack([torus_samples(n, rho - delta, samples // 2, rng),
                   polydisk_samples(n, rho - delta, samples - samples // 2, rng)])
    fwd = chain.apply_point(x, order)
    back = inv.apply_point(fwd, order)
    bwd = inv.apply_point(x, order)
    y = torus_samples(n, rho - 2 * delta, samples, rng)
    pre = inv.apply_point(y, order)
    return InclusionAudit(float(np.abs(back - x).max()), float(np.abs(fwd).max()),
                          float(np.abs(bwd).max()), float(np.abs(pre).max()),
                          rho, delta, samples, seed)


# -- the radius of the normalizing transformation -----------------------------------

@dataclass
class RadiusCertificate:
    """Certified radius with every constant that produced it."""

    rho_bar: float
    delta: float
    B: float
    eta: float
    K: float
    gamma_const: float
    Gamma: float
    A: float
    C0: float
    C_inf: float
    x_star: float
    R_max: int
    chain: List[str]

    def lines(self) -> List[str]:
        return list(self.chain)


def radius_from_constants(eta: float, K: float, Gamma: float) -> Tuple[float, float]:
    """Solve ``rho sum_r (eta e^Gamma rho)**r K / r < rho / (4 e)`` for the largest ``rho``.

    With ``x = eta e^Gamma rho`` the sum is ``-K ln(1 - x)``, so the supremum is
    ``x* = 1 - exp(-1/(4 e K))`` and ``rho_bar = x* / (eta e^Gamma)``.

    Returns
    -------
    (rho_bar, x_star)
    """
    if K <= 0:
        return math.inf, 1.0
    x_star = -math.expm1(-1.0 / (4 * E * K))
    return x_star / (eta * math.exp(Gamma)), x_star


def radius_lower_bound(table: DivisorTable, A: float, C0: float,
                       gamma_override: float | None = None,
                       delta: float | None = None) -> RadiusCertificate:
    """Certified lower bound ``rho_bar`` for the radius of analyticity.

    ``Gamma`` is the upper end of the table's interval (partial sum plus
    tail bound) unless ``gamma_override`` is given.  ``B`` is defined by
    ``rho_bar = (3/2) B**-1 exp(-Gamma)``; ``delta`` defaults to ``rho_bar / 3``.

    Raises
    ------
    GammaDiverged
        When no tail bound is available and no override is given.
    """
    Gamma = table.gamma.upper if gamma_override is None else gamma_override
    if not math.isfinite(Gamma):
        raise GammaDiverged("Gamma has no tail bound; supply a Diophantine floor")
    a = log_constant()
    gamma_const = math.exp(a.upper)
    C = c_sequence(C0, A, table.R_max)
    C_inf = C.C_inf_upper
    if A == 0:
        eta, K = gamma_const * max(C_inf, 1.0), 0.0
    else:
        eta, K = gamma_const * C_inf, A / C_inf
    rho_bar, x_star = radius_from_constants(eta, K, Gamma)
    B = 1.5 * eta / x_star
    d = rho_bar / 3 if delta is None else delta
    chain = [
        f"A = {A:.12g} (hypothesis constant, fitted)",
        f"C0 = {C0:.12g} (hypothesis constant, fitted)",
        f"C_1 = 2 C0 + 16 A = {C[1]:.12g}",
        f"C_inf <= {C_inf:.12g} (C_{C.r_max} = {C[C.r_max]:.12g} times the log tail bound)",
        f"a = sum 2 ln k/(k(k+1)) in {a} ; gamma = e^a <= {gamma_const:.12g}",
        f"Gamma = {Gamma:.12g} (R_max = {table.R_max}"
        + (", override)" if gamma_override is not None else
           f", partial {table.gamma.lower:.12g} + tail)"),
        f"eta = gamma C_inf = {eta:.12g}",
        f"K = A / C_inf = {K:.12g}",
        f"x* = 1 - exp(-1/(4 e K)) = {x_star:.12g}",
        f"rho_bar = x* / (eta e^Gamma) = {rho_bar:.12g}",
        f"B = (3/2) eta / x* = {B:.12g}",
        f"delta = {d:.12g}" + (" (rho_bar / 3)" if delta is None else " (override)"),
    ]
    return RadiusCertificate(rho_bar, d, B, eta, K, gamma_const, Gamma, A, C0, C_inf, x_star,
                             table.R_max, chain)


def empirical_floor(alpha: Sequence[float], tau: float = 2.0) -> DiophantineFloor:
    """Largest ``c`` with ``alpha_r >= c / r**tau`` on the tabulated range.

    Extending it beyond the table is an assumption, not a proof.
    """
    alpha = np.asarray(alpha, dtype=float)
    r = np.arange(1, len(alpha), dtype=float)
    c = float(np.min(alpha[1:] * r ** tau))
    return DiophantineFloor(min(c, 1.0), tau)
