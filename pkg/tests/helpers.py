"""Small utilities shared by the test modules (not fixtures)."""
import numpy as np

from siegel_lie import HomPoly, PolySeries
from siegel_lie.lie import GeneratingSequence, lie_derivative_vf, random_field


def random_sequence(n, N, rng, scale=1.0, start=1):
    return GeneratingSequence(n, N, {r: random_field(n, r, rng, scale) for r in range(start, N + 1)})


def series_product(a: PolySeries, b: PolySeries, N: int) -> PolySeries:
    """Truncated product of two function series."""
    out = PolySeries(a.n, N, "function")
    for s, p in a.parts.items():
        for t, q in b.parts.items():
            out.accumulate(s + t + 1, p * q)
    return out


def series_bracket(a: PolySeries, b: PolySeries, N: int) -> PolySeries:
    """Truncated ``L_a b`` for two field series."""
    out = PolySeries(a.n, N, "field")
    for s, p in a.parts.items():
        for t, q in b.parts.items():
            out.accumulate(s + t, lie_derivative_vf(p, q))
    return out


def single(part, N):
    kind = "function" if isinstance(part, HomPoly) else "field"
    return PolySeries(part.n, N, kind, {part.order: part})


def rel_close(a: PolySeries, b: PolySeries) -> float:
    scale = 1.0 + max(max(a.norms().values(), default=0.0), max(b.norms().values(), default=0.0))
    return a.max_abs_diff(b) / scale
