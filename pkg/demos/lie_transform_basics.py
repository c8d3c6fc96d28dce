"""Lie series and Lie transforms on a one-dimensional example.

The flow of ``X = x**2 d/dx`` for unit time sends ``x`` to ``x / (1 - x)``.
A Lie series reproduces that expansion, and a Lie transform with a single
nonzero generator collapses to the same series.
"""
import numpy as np

from siegel_lie import HomPoly, HomVectorField, PolySeries, apply_transform, lie_series_apply
from siegel_lie.lie import GeneratingSequence

N = 8
X = HomVectorField([HomPoly(1, 2, {(2,): 1.0})])
x = PolySeries.identity(1, N)

flow = lie_series_apply(X, x, N)
coeffs = [flow.part(s).components[0].terms.get((s + 1,), 0.0).real for s in range(N + 1)]
print("exp(L_X) x coefficients:", np.round(coeffs, 12))

T = apply_transform(GeneratingSequence(1, N, {1: X}), x, N)
print("same through the transform:", T.max_abs_diff(flow) == 0)

pts = np.array([[0.1], [0.25 + 0.1j]])
print("series vs closed form at two points:",
      np.abs(flow.evaluate(pts)[:, 0] - pts[:, 0] / (1 - pts[:, 0])))
