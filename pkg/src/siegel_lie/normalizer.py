"""
Order-by-order conjugation of ``x' = T_W o R x`` to its linear part.

At stage ``r`` the generator ``X_r`` solves ``D X_r = W^{(r-1)}_r``; the
auxiliary sequence ``V^{(r)}`` and the new sequence ``W^{(r)}`` follow from the
composition rule for Lie transforms::

    V_r = W_r - R X_r
    V_s = W_s - (r/s) E^{(r-1)}_{s-r} R X_r                         (s > r)
    W'_s = V_s + (1/s) sum_{k=1}^{floor(s/r)-1} (s-kr)/k! L_{X_r}^k V_{s-kr}

so that ``W'_r = V_r + X_r = 0``.

The normalizing coordinates are ``y = sigma(x)`` with
``sigma = phi_{-X_N} o ... o phi_{-X_1}`` (time-one flows), obtained by
applying ``exp(L_{-X_1}) o ... o exp(L_{-X_N})`` to the coordinate functions;
then ``sigma(F(x)) = Lambda sigma(x)`` through order ``N``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .algebra import HomPoly, HomVectorField, PolySeries, substitute
from .errors import ResonantDivisor
from .lie import (GeneratingSequence, LieSeriesChain, compose_lie_series_chain,
                  lie_derivative_vf, lie_transform_parts)
from .maps import (EPS_RES, AnalyticMap, Spectrum, map_to_generating_sequence, r_apply,
                   solve_homological)
from .precision import to_complex, to_mp, working_precision

log = logging.getLogger(__name__)

# relative size of W^{(r)}_r tolerated before a stage is declared broken
ANNIHILATION_TOL = 1e-12


@dataclass
class StageOutput:
    X: HomVectorField
    W: GeneratingSequence
    V: Dict[int, HomVectorField]
    annihilation: float


def normalize_step(W_prev: GeneratingSequence, r: int, spec: Spectrum,
                   eps_res: float = EPS_RES) -> StageOutput:
    """One stage of the normal form construction.

    Parameters
    ----------
    W_prev : GeneratingSequence
        ``W^{(r-1)}``, in normal form up to order ``r - 1``.
    r : int
        Stage index.
    spec : Spectrum

    Returns
    -------
    StageOutput
        ``X_r``, ``W^{(r)}`` (slot ``r`` set to zero), ``V^{(r)}`` and the
        norm of the computed ``V_r + X_r`` before it was discarded.
    """
    n, N = W_prev.n, W_prev.N
    low = W_prev.lowest_nonzero()
    if low is not None and low < r:
        raise ValueError(f"W^(r-1) has a nonzero slot {low} < r={r}")
    Wr = W_prev.get(r)
    if Wr is None:
        return StageOutput(HomVectorField.zero(n, r), W_prev, {}, 0.0)
    try:
        X = solve_homological(spec, Wr, eps_res)
    except ResonantDivisor as exc:
        raise ResonantDivisor(exc.k, exc.j, exc.value, r=r) from None
    RX = r_apply(spec, X)

    V: Dict[int, HomVectorField] = {r: Wr - RX}
    # E^{(r-1)}_m R X_r for m = 0..N-r; slots below r of W_prev vanish
    E = lie_transform_parts(W_prev, RX, "field", N - r, min_index=r)
    for s in range(r + 1, N + 1):
        V[s] = W_prev[s] - E[s - r] * Fraction(r, s)

    top = V[r] + X
    annihilation = top.norm()
    if annihilation > ANNIHILATION_TOL * max(1.0, Wr.norm()):
        raise ArithmeticError(f"stage {r}: W_r not annihilated ({annihilation:.3e})")

    Wn: Dict[int, HomVectorField] = {s: V[s] for s in range(r + 1, N + 1)}
    for q in range(r, N + 1):
        term = V[q]
        k = 0
        while True:
            k += 1
            s = q + k * r
            if s > N:
                break
            term = lie_derivative_vf(X, term)
            Wn[s] = Wn[s] + term * Fraction(q, s * factorial(k))
    return StageOutput(X, GeneratingSequence(n, N, Wn), V, annihilation)


@dataclass
class NormalFormResult:
    """Everything produced by :func:`normalize`.

    Attributes
    ----------
    transform : PolySeries
        ``y = x + psi(x)``, the normalizing coordinates (map kind).
    inverse_transform : PolySeries
        ``x`` as a function of ``y``.
    w_norms : dict
        ``(r, s) -> ||W^{(r)}_s||`` for ``0 <= r < s <= N``.
    x_norms : dict
        ``r -> ||X_r||``.
    annihilation : dict
        ``r -> ||V^{(r)}_r + X_r||`` as computed (should be round-off).
    """

    spectrum: Spectrum
    N: int
    generators: GeneratingSequence
    W0: GeneratingSequence
    transform: PolySeries
    inverse_transform: PolySeries
    w_norms: Dict[Tuple[int, int], float]
    x_norms: Dict[int, float]
    annihilation: Dict[int, float]

    @property
    def n(self) -> int:
        return self.spectrum.n

    def chain(self) -> LieSeriesChain:
        """Chain whose point map is ``x = h(y)`` (old coordinates from new)."""
        return compose_lie_series_chain([self.generators.get(r) for r in range(1, self.N + 1)],
                                        self.N)

    def max_w_norm(self) -> float:
        return max([1.0] + list(self.w_norms.values()))

    def truncated(self, r: int) -> "NormalFormResult":
        """The same result with generators beyond ``r`` dropped."""
        gens = GeneratingSequence(self.n, self.N,
                                  {s: X for s, X in self.generators.fields.items() if s <= r})
        chain = compose_lie_series_chain([gens.get(s) for s in range(1, self.N + 1)], self.N)
        ident = PolySeries.identity(self.n, self.N)
        return NormalFormResult(self.spectrum, self.N, gens, self.W0,
                                chain.inverse().apply_series(ident), chain.apply_series(ident),
                                {k: v for k, v in self.w_norms.items() if k[0] <= r},
                                {k: v for k, v in self.x_norms.items() if k <= r},
                                {k: v for k, v in self.annihilation.items() if k <= r})


def normalize(amap: AnalyticMap, N: int | None = None, eps_res: float = EPS_RES,
              precision: int | None = None) -> NormalFormResult:
    """Conjugate ``amap`` to its linear part through order ``N``.

    Parameters
    ----------
    amap : AnalyticMap
    N : int, optional
        Truncation order (default: that of ``amap``).
    eps_res : float
        Divisors of modulus at most this are treated as resonances.
    precision : int, optional
        Working precision in bits.  By default the computation runs in double
        precision.  The generators can be far larger than the transform they
        produce (in the Poincare domain ``||X_r||`` grows like ``8**r`` for
        ``lambda = 1/2`` while the transform grows like ``2**r``), so the
        high orders of the transform lose correspondingly many digits; a
        larger precision removes this loss.  The stored result always holds
        double-precision coefficients.
    """
    if N is not None and N != amap.N:
        amap = AnalyticMap(amap.spectrum, amap.nonlinear.truncate(N)) if N < amap.N else \
            AnalyticMap(amap.spectrum, PolySeries(amap.n, N, "map", dict(amap.nonlinear.parts)))
    if precision is not None:
        with working_precision(precision):
            mp_map = AnalyticMap(amap.spectrum, amap.nonlinear.map_coefficients(to_mp))
            return _to_double(_normalize(mp_map, eps_res))
    return _normalize(amap, eps_res)


def _to_double(res: NormalFormResult) -> NormalFormResult:
    def gen(seq):
        return GeneratingSequence(seq.n, seq.N,
                                  {r: X.map_coefficients(to_complex) for r, X in seq.fields.items()})
    return NormalFormResult(res.spectrum, res.N, gen(res.generators), gen(res.W0),
                            res.transform.map_coefficients(to_complex),
                            res.inverse_transform.map_coefficients(to_complex),
                            res.w_norms, res.x_norms, res.annihilation)


def _normalize(amap: AnalyticMap, eps_res: float) -> NormalFormResult:
    N = amap.N
    spec = amap.spectrum
    W0, _ = map_to_generating_sequence(amap)
    W = W0
    gens: Dict[int, HomVectorField] = {}
    w_norms = {(0, s): W0[s].norm() for s in range(1, N + 1)}
    x_norms: Dict[int, float] = {}
    annihilation: Dict[int, float] = {}
    for r in range(1, N + 1):
        out = normalize_step(W, r, spec, eps_res)
        W = out.W
        x_norms[r] = out.X.norm()
        annihilation[r] = out.annihilation
        if not out.X.is_zero():
            gens[r] = out.X
        for s in range(r + 1, N + 1):
            w_norms[(r, s)] = W[s].norm()
        log.debug("stage %d: ||X|| = %.3e", r, x_norms[r])
    generators = GeneratingSequence(amap.n, N, gens)
    chain = compose_lie_series_chain([generators.get(r) for r in range(1, N + 1)], N)
    ident = PolySeries.identity(amap.n, N)
    return NormalFormResult(spec, N, generators, W0,
                            chain.inverse().apply_series(ident), chain.apply_series(ident),
                            w_norms, x_norms, annihilation)


def transform_coordinates(result: NormalFormResult, direction: str, x, radius: float | None = None):
    """Apply the normalizing transformation (``"forward"``) or its inverse.

    ``x`` may be points (array of shape ``(..., n)``) or a map-kind
    :class:`PolySeries`, in which case the truncated composition is returned.
    If ``radius`` is given, points outside the polydisk of that radius
    trigger a warning.
    """
    if direction == "forward":
        series = result.transform
    elif direction == "inverse":
        series = result.inverse_transform
    else:
        raise ValueError("direction must be 'forward' or 'inverse'")
    if isinstance(x, PolySeries):
        return substitute(series, x)
    pts = np.asarray(x, dtype=complex)
    if radius is not None and np.any(np.abs(pts) > radius):
        warnings.warn("point outside the certified polydisk", RuntimeWarning, stacklevel=2)
    return series.evaluate(pts)


# -- archives ----------------------------------------------------------------

def _vf_text(X: HomVectorField) -> str:
    return "\n".join(X.to_rows()) + "\n"


def write_archive(result: NormalFormResult, amap: AnalyticMap, outdir, ledger_rows=None) -> Path:
    """Write map, generators, transform and ledger into ``outdir``."""
    from .maps import format_map

    out = Path(outdir)
    (out / "generators").mkdir(parents=True, exist_ok=True)
    (out / "map.txt").write_text(format_map(amap))
    n, N = result.n, result.N
    for r in range(1, N + 1):
        X = result.generators[r]
        (out / "generators" / f"X_{r:03d}.txt").write_text(
            f"# generator X_{r}, n={n}, N={N}\n" + _vf_text(X))
    rows = [f"# normalizing transform y = x + psi(x), n={n}, N={N}"]
    for s in result.transform.orders():
        rows.extend(result.transform.part(s).to_rows())
    (out / "transform.txt").write_text("\n".join(rows) + "\n")
    if ledger_rows is not None:
        lines = ["r,s,norm_X,norm_W,bound_X,bound_W"]
        for row in ledger_rows:
            lines.append(",".join(_fmt(v) for v in row))
        (out / "ledger.csv").write_text("\n".join(lines) + "\n")
    return out


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(v)
    if v is None:
        return ""
    return f"{float(v):.17g}"


def read_generators(outdir, n: int, N: int) -> GeneratingSequence:
    gens = {}
    for r in range(1, N + 1):
        path = Path(outdir) / "generators" / f"X_{r:03d}.txt"
        if not path.exists():
            continue
        terms = {}
        cur = None
        for ln in path.read_text().splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            tok = ln.split()
            if tok[0] == "order":
                cur = int(tok[3]) - 1
                continue
            k = tuple(int(t) for t in tok[2:])
            terms[(cur, k)] = complex(float(tok[0]), float(tok[1]))
        X = HomVectorField.from_terms(n, r, terms)
        if not X.is_zero():
            gens[r] = X
    return GeneratingSequence(n, N, gens)
