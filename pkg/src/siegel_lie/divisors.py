"""
Small divisors and the combinatorics of their accumulation.

Sequences
    ``beta_r``  smallest divisor ``|lambda^k / lambda_j - 1|`` over ``|k| = r + 1``
    ``alpha_r`` running minimum of ``beta``
    ``sigma_r`` ``alpha_r / r**2``
Sums
    ``Gamma = -sum_{r>=1} ln(alpha_r) / (r (r+1))``
    Bruno   ``-sum_{k>=1} ln(alpha_{2^k - 1}) / 2^k``

Index sets are sorted tuples of non-negative integers.  ``I <| I'`` holds when,
after padding the shorter one with zeros and sorting both, ``I`` is
elementwise below ``I'``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import binom

from .errors import EnumerationTooLarge, NonResonanceViolated
from .maps import EPS_RES, Spectrum, _wrap

ENUMERATION_LIMIT = 10 ** 7


# -- divisor sequences -------------------------------------------------------

def _compositions_array(n: int, total: int) -> np.ndarray:
    """All exponent vectors of length ``n`` summing to ``total`` (rows)."""
    if n == 1:
        return np.array([[total]], dtype=float)
    if n == 2:
        a = np.arange(total, -1, -1)
        return np.stack([a, total - a], axis=1).astype(float)
    rows = []
    for first in range(total, -1, -1):
        rest = _compositions_array(n - 1, total - first)
        rows.append(np.hstack([np.full((len(rest), 1), first, dtype=float), rest]))
    return np.vstack(rows)


def beta_seq(spec: Spectrum, R_max: int, eps_res: float = EPS_RES) -> np.ndarray:
    """``beta_0 .. beta_{R_max}``, exact minima over every ``(k, j)``.

    Raises
    ------
    NonResonanceViolated
        If some ``beta_r`` (``r >= 1``) is ``<= eps_res``.
    """
    if R_max < 1:
        raise ValueError("R_max must be >= 1")
    loglam = spec.log_lambda
    beta = np.empty(R_max + 1)
    beta[0] = 1.0
    for r in range(1, R_max + 1):
        K = _compositions_array(spec.n, r + 1)
        z = K @ loglam  # <k, mu + i omega>
        z = z[:, None] - loglam[None, :]
        z = z.real + 1j * _wrap(z.imag)
        beta[r] = np.abs(np.expm1(z)).min()
        if beta[r] <= eps_res:
            raise NonResonanceViolated(r, beta[r])
    return beta


def alpha_seq(beta: Sequence[float]) -> np.ndarray:
    return np.minimum.accumulate(np.asarray(beta, dtype=float))


def sigma_seq(alpha: Sequence[float]) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    r = np.arange(len(alpha), dtype=float)
    r[0] = 1.0
    return alpha / r ** 2


@dataclass(frozen=True)
class Interval:
    """``[lower, upper]``; ``upper`` is ``inf`` when no tail bound is known."""

    lower: float
    upper: float
    truncation: int

    @property
    def value(self) -> float:
        return self.lower

    def __str__(self):
        return f"[{self.lower:.12g}, {self.upper:.12g}] (truncation {self.truncation})"


@dataclass(frozen=True)
class DiophantineFloor:
    """Assumed lower bound ``alpha_r >= c / r**tau`` for ``r`` beyond the table."""

    c: float
    tau: float

    def holds_on(self, alpha: np.ndarray) -> bool:
        r = np.arange(1, len(alpha))
        return bool(np.all(alpha[1:] >= np.minimum(1.0, self.c / r ** self.tau) * (1 - 1e-12)))


def gamma_sum(alpha: Sequence[float], R_max: int | None = None,
              floor: DiophantineFloor | None = None) -> Interval:
    """Partial sum ``-sum_{r=1}^{R} ln(alpha_r) / (r (r+1))`` with optional tail bound.

    With ``alpha_r >= c / r**tau`` the tail beyond ``R`` is at most
    ``tau (ln R + 1) / R - ln(c) / (R + 1)`` (using ``1/(r(r+1)) < 1/r**2``
    and the integral of ``ln x / x**2``).
    """
    alpha = np.asarray(alpha, dtype=float)
    R = len(alpha) - 1 if R_max is None else R_max
    r = np.arange(1, R + 1, dtype=float)
    partial = math.fsum(-np.log(alpha[1:R + 1]) / (r * (r + 1)))
    upper = math.inf
    if floor is not None:
        tail = floor.tau * (math.log(R) + 1.0) / R + max(0.0, -math.log(floor.c)) / (R + 1)
        upper = partial + max(tail, 0.0)
    return Interval(partial, upper, R)


def bruno_sum(alpha: Sequence[float], K_max: int | None = None,
              floor: DiophantineFloor | None = None) -> Interval:
    """Partial dyadic sum ``-sum_{k=1}^{K} ln(alpha_{2^k - 1}) / 2^k``.

    The tail under ``alpha_r >= c / r**tau`` is bounded by
    ``tau ln2 (K+2) / 2^K - ln(c) / 2^K``.
    """
    alpha = np.asarray(alpha, dtype=float)
    if K_max is None:
        K_max = int(math.floor(math.log2(len(alpha))))
    if 2 ** K_max - 1 >= len(alpha):
        raise ValueError(f"alpha too short for K_max={K_max}")
    partial = math.fsum(-math.log(alpha[2 ** k - 1]) / 2 ** k for k in range(1, K_max + 1))
    upper = math.inf
    if floor is not None:
        tail = (floor.tau * math.log(2) * (K_max + 2) + max(0.0, -math.log(floor.c))) / 2 ** K_max
        upper = partial + tail
    return Interval(partial, upper, K_max)


def bruno_slack(alpha: Sequence[float], K_max: int) -> float:
    """Truncation slack for ``Bruno_K <= 2 Gamma_{2^K - 1}``: the last dyadic term.

    The block ``2^K - 1 <= r <= 2^{K+1} - 2`` that would dominate the last
    Bruno term lies beyond the partial Gamma sum except for its first element.
    """
    return -math.log(alpha[2 ** K_max - 1]) / 2 ** K_max


@dataclass
class DivisorTable:
    spectrum: Spectrum
    R_max: int
    beta: np.ndarray
    alpha: np.ndarray
    sigma: np.ndarray
    gamma: Interval
    bruno: Interval
    floor: Optional[DiophantineFloor] = None

    @property
    def gamma_partial_seq(self) -> np.ndarray:
        """Running partial sums of Gamma, index ``r`` holding the sum up to ``r``."""
        r = np.arange(1, self.R_max + 1, dtype=float)
        terms = -np.log(self.alpha[1:]) / (r * (r + 1))
        return np.concatenate([[0.0], np.cumsum(terms)])

    def check_invariants(self) -> None:
        assert self.beta[0] == self.alpha[0] == self.sigma[0] == 1.0
        assert np.all(np.diff(self.alpha) <= 0)
        assert np.all(self.alpha <= self.beta)
        r = np.arange(1, self.R_max + 1)
        assert np.allclose(self.sigma[1:], self.alpha[1:] / r ** 2, rtol=0, atol=0)


def divisor_table(spec: Spectrum, R_max: int, floor: DiophantineFloor | None = None,
                  eps_res: float = EPS_RES) -> DivisorTable:
    beta = beta_seq(spec, R_max, eps_res)
    alpha = alpha_seq(beta)
    sigma = sigma_seq(alpha)
    if floor is not None and not floor.holds_on(alpha):
        raise ValueError(f"alpha violates the assumed floor c/r^tau with {floor}")
    K = int(math.floor(math.log2(R_max + 1)))
    return DivisorTable(spec, R_max, beta, alpha, sigma,
                        gamma_sum(alpha, R_max, floor), bruno_sum(alpha, K, floor), floor)


def table_from_alpha(alpha: Sequence[float], spec: Spectrum | None = None,
                     floor: DiophantineFloor | None = None) -> DivisorTable:
    """Divisor table from a given (non-increasing) alpha sequence."""
    alpha = np.asarray(alpha, dtype=float)
    R = len(alpha) - 1
    K = int(math.floor(math.log2(R + 1)))
    return DivisorTable(spec, R, alpha.copy(), alpha, sigma_seq(alpha),
                        gamma_sum(alpha, R, floor), bruno_sum(alpha, K, floor), floor)


# -- the constant a = sum 2 ln k / (k (k+1)) ----------------------------------

@lru_cache(maxsize=None)
def log_constant(terms: int = 10 ** 7) -> Interval:
    """``a = sum_{k>=1} 2 ln k / (k (k+1))`` with the tail ``2 (ln M + 1) / M``."""
    total = 0.0
    chunk = 10 ** 6
    for start in range(1, terms + 1, chunk):
        k = np.arange(start, min(start + chunk, terms + 1), dtype=float)
        total += math.fsum(2.0 * np.log(k) / (k * (k + 1.0)))
    return Interval(total, total + 2.0 * (math.log(terms) + 1.0) / terms, terms)


# -- index sets ----------------------------------------------------------------

def istar(s: int) -> Tuple[int, ...]:
    """``I*_s = (floor(s/s), floor(s/(s-1)), ..., floor(s/2))`` (sorted)."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return tuple(s // m for m in range(s, 1, -1))


def triangle_order(I: Sequence[int], J: Sequence[int]) -> bool:
    """``I <| J``: pad with zeros, sort, compare elementwise."""
    a, b = sorted(I), sorted(J)
    if len(a) < len(b):
        a = [0] * (len(b) - len(a)) + a
    elif len(b) < len(a):
        b = [0] * (len(a) - len(b)) + b
    a.sort()
    b.sort()
    return all(x <= y for x, y in zip(a, b))


def _jset_top(r: int, s: int) -> int:
    return min(r, s // 2)


def in_jset(I: Sequence[int], r: int, s: int) -> bool:
    """Membership in ``J_{r,s}``."""
    if len(I) != s - 1:
        return False
    top = _jset_top(r, s)
    return all(0 <= j <= top for j in I) and triangle_order(I, istar(s))


def jset_count(r: int, s: int) -> int:
    """Number of elements of ``J_{r,s}`` (dynamic programming, no enumeration)."""
    top = _jset_top(r, s)
    caps = [min(c, top) for c in istar(s)]
    if not caps:
        return 1
    # counts[v]: non-decreasing prefixes ending with value v
    counts = [1 if v <= caps[0] else 0 for v in range(top + 1)]
    for cap in caps[1:]:
        run = 0
        new = [0] * (top + 1)
        for v in range(top + 1):
            run += counts[v]
            if v <= cap:
                new[v] = run
        counts = new
    return sum(counts)


def jset_enumerate(r: int, s: int, limit: int = ENUMERATION_LIMIT) -> List[Tuple[int, ...]]:
    """All index sets in ``J_{r,s}`` (sorted tuples of length ``s - 1``)."""
    if s < 1 or r < 0:
        raise ValueError("need s >= 1 and r >= 0")
    count = jset_count(r, s)
    if count > limit:
        raise EnumerationTooLarge(count, limit)
    caps = [min(c, _jset_top(r, s)) for c in istar(s)]
    out: List[Tuple[int, ...]] = []

    def rec(pos, lo, prefix):
        if pos == len(caps):
            out.append(tuple(prefix))
            return
        for v in range(lo, caps[pos] + 1):
            prefix.append(v)
            rec(pos + 1, v, prefix)
            prefix.pop()

    rec(0, 0, [])
    return out


def _product_inverse(sigma, I) -> float:
    # canonical (sorted) multiplication order: equal multisets give equal floats
    p = 1.0
    for j in sorted(I):
        p /= sigma[j]
    return p


def t_exact(r: int, s: int, sigma: Sequence[float], limit: int = ENUMERATION_LIMIT) -> float:
    """``T_{r,s} = max_{I in J_{r,s}} prod 1/sigma_j`` by enumeration (``T_{0,s} = 1``)."""
    if r == 0:
        return 1.0
    return max(_product_inverse(sigma, I) for I in jset_enumerate(r, s, limit))


def t_greedy(r: int, s: int, sigma: Sequence[float]) -> float:
    """Product over ``I*_s`` with indices capped at ``min(r, s/2)``.

    Equals :func:`t_exact` whenever ``1/sigma_j`` is non-decreasing in ``j``,
    which holds for every sequence built from a monotone ``alpha``.
    """
    if r == 0:
        return 1.0
    top = _jset_top(r, s)
    return _product_inverse(sigma, [min(j, top) for j in istar(s)])


@dataclass(frozen=True)
class TBound:
    sharp: float
    closed: float


def t_sharp(s: int, sigma: Sequence[float]) -> float:
    """``prod_{j in {s} u I*_s} 1/sigma_j``; bounds ``T_{r,s}`` and ``T_{r,s}/sigma_s``."""
    return _product_inverse(sigma, (s,) + istar(s))


def t_bound(r: int, s: int, table: DivisorTable, gamma_upper: float | None = None) -> TBound:
    """Sharp product and closed form ``gamma**s * exp(s Gamma)`` bounding ``T_{r,s}``."""
    a = log_constant()
    G = table.gamma.upper if gamma_upper is None else gamma_upper
    closed = math.exp(s * (a.upper + G)) if math.isfinite(G) else math.inf
    return TBound(t_sharp(s, table.sigma), closed)


# -- the Theta sums ------------------------------------------------------------

def theta_exact(r: int, s: int, k: int, m: float) -> float:
    """``Theta(r, s, k)`` summed exactly over compositions ``j_1+...+j_k = s``, ``j_i >= r``.

    The summand depends only on the partial sums ``P_1 < ... < P_k = s``
    (``prod (P_i + r + m) / P_i``), so the sum is a chain recursion over them.
    """
    if k < 1 or r < 1:
        raise ValueError("need k >= 1 and r >= 1")
    if s < k * r:
        return 0.0

    def f(P):
        return (P + r + m) / P

    # D[P]: sum over chains of length i ending at P
    D = {P: f(P) for P in range(r, s + 1)}
    for _ in range(k - 1):
        new = {}
        for P in range(r, s + 1):
            acc = math.fsum(v for Q, v in D.items() if Q <= P - r)
            if acc:
                new[P] = f(P) * acc
        D = new
    return D.get(s, 0.0)


def compositions(total: int, k: int, minimum: int) -> Iterator[Tuple[int, ...]]:
    """Compositions of ``total`` into ``k`` parts, each ``>= minimum``."""
    if k == 0:
        if total == 0:
            yield ()
        return
    for first in range(minimum, total - minimum * (k - 1) + 1):
        for rest in compositions(total - first, k - 1, minimum):
            yield (first,) + rest


def theta_enumerate(r: int, s: int, k: int, m: float) -> float:
    """Direct sum over compositions; reference for :func:`theta_exact`."""
    total = 0.0
    for js in compositions(s, k, r):
        P = 0
        prod = 1.0
        for j in js:
            P += j
            prod *= (P + r + m) / P
        total += prod
    return total


def theta_bound(r: int, s: int, k: int, m: float) -> float:
    """``r**(k-1) (2 + m/r)**k binom(s/r - 1, k - 1)`` with a real binomial."""
    return r ** (k - 1) * (2 + m / r) ** k * float(binom(s / r - 1, k - 1))


# -- exhaustive lemma checks ----------------------------------------------------

@dataclass
class LemmaReport:
    name: str
    checked: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.checked} cases, {len(self.counterexamples)} counterexamples"


def istar_properties_check(s_max: int) -> List[LemmaReport]:
    """Maximal index, multiplicities and ``{r} u I*_r u I*_s <| I*_{r+s}``."""
    top = LemmaReport("I*_s maximal index is floor(s/2)")
    mult = LemmaReport("index k appears floor(s/k) - floor(s/(k+1)) times in I*_s")
    union = LemmaReport("({r} u I*_r u I*_s) <| I*_{r+s}")
    for s in range(2, s_max + 1):
        I = istar(s)
        top.checked += 1
        if max(I) != s // 2:
            top.counterexamples.append(s)
        for k in range(1, s // 2 + 1):
            mult.checked += 1
            if I.count(k) != s // k - s // (k + 1):
                mult.counterexamples.append((s, k))
    for s in range(1, s_max + 1):
        for r in range(1, s + 1):
            if r + s > s_max:
                break
            union.checked += 1
            if not triangle_order((r,) + istar(r) + istar(s), istar(r + s)):
                union.counterexamples.append((r, s))
    return [top, mult, union]


def jset_lemmas_check(total_max: int, sigma: Sequence[float] | None = None) -> List[LemmaReport]:
    """Inclusion and closure of the ``J`` sets; monotonicity and product rule for ``T``.

    Cases are ``1 <= r <= s`` with ``r + s <= total_max``.
    """
    incl = LemmaReport("J_{r-1,s} subset J_{r,s}")
    closure = LemmaReport("I in J_{r-1,r}, I' in J_{r,s} => {r} u I u I' in J_{r,r+s}")
    mono = LemmaReport("T_{r-1,s} <= T_{r,s}")
    prod = LemmaReport("(1/sigma_r) T_{r-1,r} T_{r,s} <= T_{r,r+s}")
    cache: Dict[Tuple[int, int], List[Tuple[int, ...]]] = {}

    def J(r, s):
        if (r, s) not in cache:
            cache[(r, s)] = jset_enumerate(r, s)
        return cache[(r, s)]

    for s in range(1, total_max):
        for r in range(1, s + 1):
            if r + s > total_max:
                break
            big = set(J(r, s))
            incl.checked += 1
            missing = [I for I in J(r - 1, s) if I not in big]
            if missing:
                incl.counterexamples.append((r, s, missing[0]))
            target = set(J(r, r + s))
            for I in J(r - 1, r):
                for Ip in J(r, s):
                    closure.checked += 1
                    U = tuple(sorted((r,) + I + Ip))
                    if U not in target:
                        closure.counterexamples.append((r, s, I, Ip))
            if sigma is not None:
                T = lambda rr, ss: max(_product_inverse(sigma, I) for I in J(rr, ss)) if rr else 1.0
                mono.checked += 1
                if T(r - 1, s) > T(r, s):
                    mono.counterexamples.append((r, s))
                prod.checked += 1
                # the left side is the product over one multiset of J_{r,r+s};
                # multiplying in sorted order makes the comparison exact
                best_pair = max(((r,) + I + Ip for I in J(r - 1, r) for Ip in J(r, s)),
                                key=lambda U: _product_inverse(sigma, U))
                lhs = _product_inverse(sigma, best_pair)
                rhs = T(r, r + s)
                if lhs > rhs:
                    prod.counterexamples.append((r, s, lhs, rhs))
    reports = [incl, closure]
    if sigma is not None:
        reports += [mono, prod]
    return reports
