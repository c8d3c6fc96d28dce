"""Acceptance criteria 1 to 10, one test each.

Every test prints a single ``CRITERION <k> PASS|FAIL`` line with the measured
quantity, the tolerance and the runtime, then asserts the verdict.
"""
import cmath
import math
import time

import numpy as np
import pytest

from siegel_lie import (AnalyticMap, HomPoly, HomVectorField, Spectrum, audit_iteration_lemma,
                        composed_series_certificate, conjugacy_residual, explie_domain_check,
                        koenigs_oracle, lie_transform_E, lie_transform_E_nonrecursive, normalize,
                        radius_lower_bound, root_test_radius, solve_homological)
from siegel_lie.bounds import (chain_sup_norms, composed_series_audit, empirical_floor,
                               explie_displacement_audit, explie_threshold)
from siegel_lie.divisors import (bruno_slack, divisor_table, istar_properties_check,
                                 jset_lemmas_check, table_from_alpha, theta_bound, theta_exact)
from siegel_lie.lie import LieSeriesChain, lie_derivative_fn, lie_derivative_vf, random_field, random_poly
from siegel_lie.maps import d_apply, r_apply, random_map
from siegel_lie.verify import map_coefficients_1d, transform_coefficients_1d

from conftest import GOLDEN, rotation_pair
from helpers import random_sequence


def verdict(capsys, k, ok, detail, start, limit=None):
    elapsed = time.perf_counter() - start
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
    with capsys.disabled():
        print(f"\nCRITERION {k} {'PASS' if ok else 'FAIL'}: {detail}; runtime {timing}")
    return ok and (limit is None or elapsed < limit)


@pytest.fixture(scope="module")
def golden_run():
    amap = AnalyticMap.quadratic_1d(cmath.exp(2j * math.pi * GOLDEN), 15)
    return amap, normalize(amap)


@pytest.fixture(scope="module")
def siegel_runs():
    rng = np.random.default_rng(2024)
    runs = []
    for _ in range(5):
        spec = rotation_pair(rng)
        amap = random_map(spec, 10, rng, scale=1.0, decay=0.7)
        runs.append((amap, normalize(amap)))
    return runs


def test_criterion_1_combinatorial_lemmas(capsys, golden_run):
    start = time.perf_counter()
    sigma = divisor_table(golden_run[1].spectrum, 12).sigma
    reports = istar_properties_check(12) + jset_lemmas_check(12, sigma)
    bad = sum(len(r.counterexamples) for r in reports)
    cases = sum(r.checked for r in reports)
    detail = f"{len(reports)} statements, {cases} cases, {bad} counterexamples (r <= s, r+s <= 12)"
    assert verdict(capsys, 1, bad == 0, detail, start, limit=60)


def test_criterion_2_theta_bound(capsys):
    start = time.perf_counter()
    checked, bad = 0, []
    for m in (0, 2):
        for r in range(1, 5):
            for s in range(r, 21):
                for k in range(1, s // r + 1):
                    checked += 1
                    exact, bound = theta_exact(r, s, k, m), theta_bound(r, s, k, m)
                    if exact > bound * (1 + 1e-12):
                        bad.append((r, s, k, m, exact, bound))
    detail = f"{checked} cases (r <= 4, s <= 20, m in {{0, 2}}), {len(bad)} violations"
    assert verdict(capsys, 2, not bad, detail, start, limit=10)


def test_criterion_3_E_operator_forms(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for trial in range(50):
        n = 1 + trial % 2
        X = random_sequence(n, 8, rng, scale=rng.uniform(0.2, 2.0))
        targets = [("function", random_poly(n, int(rng.integers(1, 4)), rng)),
                   ("field", random_field(n, int(rng.integers(0, 3)), rng))]
        for kind, target in targets:
            for s in range(1, 9):
                a = lie_transform_E(X, s, target, kind)
                b = lie_transform_E_nonrecursive(X, s, target, kind)
                # in one dimension [X_1, v_1] = 0, so some E_s vanish exactly;
                # those are measured against a crude size of the summands instead
                size = a.norm() or target.norm() * (s + 4) ** s * (1 + max(X.norms().values())) ** s
                worst = max(worst, (a - b).norm() / size)
    detail = f"50 sequences, orders <= 8, max relative difference {worst:.2e} (tol 1e-12)"
    assert verdict(capsys, 3, worst <= 1e-12, detail, start)


def test_criterion_4_koenigs_oracle(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(10):
        lam = 0.5 * cmath.exp(2j * math.pi * rng.random())
        spec = Spectrum.from_lambda([lam])
        parts = {s: HomVectorField([HomPoly.monomial((s + 1,), complex(*rng.normal(size=2)))])
                 for s in range(1, 16)}
        amap = AnalyticMap.from_parts(spec, parts, 15)
        a = transform_coefficients_1d(normalize(amap, precision=128))
        b = koenigs_oracle(lam, map_coefficients_1d(amap), 15)
        worst = max(worst, float(np.max(np.abs(a - b)[1:] / np.abs(b)[1:])))
    res = normalize(AnalyticMap.quadratic_1d(0.5, 15))
    psi2 = res.transform.part(1).components[0].terms[(2,)]
    ok = worst <= 1e-12 and abs(psi2 - 4.0) <= 1e-14
    detail = (f"10 maps |lam| = 0.5, N = 15, max relative coefficient error {worst:.2e} (tol 1e-12); "
              f"psi_2 = {psi2.real:.17g} (|psi_2 - 4| = {abs(psi2 - 4):.1e}, tol 1e-14)")
    assert verdict(capsys, 4, ok, detail, start)


def test_criterion_5_golden_residual(capsys):
    start = time.perf_counter()
    amap = AnalyticMap.quadratic_1d(cmath.exp(2j * math.pi * GOLDEN), 15)
    rep = conjugacy_residual(amap, normalize(amap))
    detail = (f"N = 15, max graded residual {rep.max_order_norm:.2e}, scale {rep.scale:.4g}, "
              f"relative {rep.max_relative:.2e} (tol 1e-10)")
    assert verdict(capsys, 5, rep.within(1e-10), detail, start, limit=30)


def test_criterion_6_iteration_audit(capsys, golden_run, siegel_runs):
    start = time.perf_counter()
    runs = [golden_run[1]] + [res for _, res in siegel_runs]
    audits = [audit_iteration_lemma(res, divisor_table(res.spectrum, res.N)) for res in runs]
    bad = sum(len(a.violations) for a in audits)
    hyp = all(a.hypothesis_ok for a in audits)
    rows = sum(len(a.rows) for a in audits)
    detail = f"golden N = 15 plus 5 random n = 2 maps N = 10, {rows} bounds, {bad} violations"
    assert verdict(capsys, 6, bad == 0 and hyp, detail, start)


def _norm_lemmas(rng):
    bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 4))
        r, s = int(rng.integers(1, 5)), int(rng.integers(0, 5))
        X = random_field(n, r, rng, rng.uniform(0.1, 2))
        f = random_poly(n, s + 1, rng, rng.uniform(0.1, 2))
        v = random_field(n, s, rng, rng.uniform(0.1, 2))
        bad += lie_derivative_fn(X, f).norm() > (s + 1) * X.norm() * f.norm() * (1 + 1e-12)
        bad += lie_derivative_vf(X, v).norm() > (r + s + 2) * X.norm() * v.norm() * (1 + 1e-12)
    return bad


def _homological(rng):
    bad = 0
    for _ in range(200):
        spec = rotation_pair(rng) if rng.random() < 0.5 else Spectrum.from_lambda(
            list(rng.uniform(0.3, 0.9, 2) * np.exp(2j * np.pi * rng.random(2))))
        r = int(rng.integers(1, 6))
        rhs = random_field(2, r, rng)
        alpha = divisor_table(spec, r).alpha[r]
        X = solve_homological(spec, rhs)
        bad += (d_apply(spec, X) - rhs).norm() > 1e-10 * rhs.norm()
        bad += X.norm() * alpha > rhs.norm() * (1 + 1e-10)
        bad += r_apply(spec, X).norm() > (1 + alpha) * rhs.norm() / alpha * (1 + 1e-10)
    return bad


def _displacements(rng):
    bad = 0
    for _ in range(50):
        rho = rng.uniform(0.2, 1.0)
        delta = rng.uniform(0.05, 0.45) * rho
        X = random_field(2, int(rng.integers(1, 3)), rng, 1.0)
        X = X * (rng.uniform(0.2, 0.95) * explie_threshold(delta) / (X.norm() * rho ** (X.order + 1)))
        assert explie_domain_check(X, rho, delta).passed
        bad += not explie_displacement_audit(X, rho, delta, seed=int(rng.integers(10 ** 6))).ok
    return bad


def _inclusions(rng):
    bad, worst = 0, 0.0
    for _ in range(50):
        rho = rng.uniform(0.2, 1.0)
        delta = rng.uniform(0.05, 0.3) * rho
        fields = [random_field(2, r, rng, 1.0) for r in range(1, 5)]
        weights = rng.dirichlet(np.ones(4)) * rng.uniform(0.2, 0.9) * rho / (4 * math.e)
        fields = [X * (w / (X.norm() * rho ** (X.order + 1))) for X, w in zip(fields, weights)]
        chain = LieSeriesChain(fields, 20)
        assert composed_series_certificate(chain_sup_norms(chain, rho), rho, delta).passed
        audit = composed_series_audit(chain, rho, delta, order=40, seed=int(rng.integers(10 ** 6)))
        worst = max(worst, audit.roundtrip_error)
        bad += not audit.ok
    return bad, worst


def test_criterion_7_norm_lemmas(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    lie_bad, hom_bad = _norm_lemmas(rng), _homological(rng)
    disp_bad = _displacements(rng)
    inc_bad, worst = _inclusions(rng)
    total = lie_bad + hom_bad + disp_bad + inc_bad
    detail = (f"Lie-derivative norms 200 instances ({lie_bad} fail), homological bounds 200 "
              f"({hom_bad} fail), displacement <= delta/e^2 on 50 ({disp_bad} fail), inclusion "
              f"round trips on 50 ({inc_bad} fail, max error {worst:.1e}, tol 1e-9)")
    assert verdict(capsys, 7, total == 0, detail, start)


def test_criterion_8_gamma_bruno(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    bad, shown = 0, []
    for i in range(20):
        if i % 2:
            spec = rotation_pair(rng)
        else:
            spec = Spectrum.rotation(rng.uniform(0.05, 0.95))
        table = divisor_table(spec, 1023)
        G, B = table.gamma.lower, table.bruno.lower
        slack = bruno_slack(table.alpha, table.bruno.truncation)
        bad += not (G <= B <= 2 * G + slack)
        shown.append(B / G if G else 1.0)
    detail = (f"20 spectra at R_max = 1023, {bad} violations of Gamma <= B <= 2 Gamma + slack, "
              f"B/Gamma in [{min(shown):.3f}, {max(shown):.3f}]")
    assert verdict(capsys, 8, bad == 0, detail, start)


def test_criterion_9_gamma_slope(capsys):
    start = time.perf_counter()
    alpha = np.concatenate([[1.0], 0.5 / np.arange(1, 256) ** 2])
    table = table_from_alpha(alpha)
    worst = 0.0
    for A, C0 in [(1.0, 2.0), (0.3, 5.0), (4.0, 1.5)]:
        for G in (0.0, 0.37, 2.5):
            a = radius_lower_bound(table, A, C0, gamma_override=G).rho_bar
            b = radius_lower_bound(table, A, C0, gamma_override=G + 1.0).rho_bar
            worst = max(worst, abs(math.log(b) - math.log(a) + 1.0))
    detail = f"d ln rho_bar / d Gamma = -1 with max deviation {worst:.1e} (tol 1e-12)"
    assert verdict(capsys, 9, worst <= 1e-12, detail, start)


def test_criterion_10_radii_consistent(capsys, golden_run, siegel_runs):
    start = time.perf_counter()
    runs = [("golden", golden_run[1]),
            ("lambda 1/2", normalize(AnalyticMap.quadratic_1d(0.5, 15), precision=128))]
    runs += [(f"random n=2 #{i}", res) for i, (_, res) in enumerate(siegel_runs)]
    parts, ok = [], True
    for name, res in runs:
        plain = divisor_table(res.spectrum, 1023)
        table = divisor_table(res.spectrum, 1023, floor=empirical_floor(plain.alpha))
        audit = audit_iteration_lemma(res, table)
        cert = radius_lower_bound(table, audit.A, audit.C0)
        rt = root_test_radius(res.transform)
        ok &= rt.radius >= cert.rho_bar
        parts.append(f"{name}: root test {rt.radius:.3g} vs rho_bar {cert.rho_bar:.3g}")
    assert verdict(capsys, 10, ok, "; ".join(parts), start)
