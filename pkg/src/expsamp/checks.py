"""Randomized verification suites behind ``expsamp verify``.

Every suite returns a :class:`CheckResult`. ``max_violation`` is the
largest amount by which a checked inequality failed (0 when none did), or
the largest disagreement for equality checks.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import bounds, oracle
from .walk import (
    WalkOperator,
    indicator_marking,
    make_two_state_chain,
    marks_for,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    instances: int
    max_violation: float
    passed: bool


def random_symmetric_operator(n_vertices, rng, max_lam=0.999):
    """Mixture of the identity and symmetrized random permutations."""
    while True:
        k = int(rng.integers(1, 4))
        weights = rng.dirichlet(np.ones(k + 1))
        a = weights[0] * np.eye(n_vertices)
        for wgt in weights[1:]:
            p = np.eye(n_vertices)[rng.permutation(n_vertices)]
            a += wgt * 0.5 * (p + p.T)
        # Symmetrize and rebalance rounding so the invariants hold to 1e-12.
        a = 0.5 * (a + a.T)
        a[np.diag_indices(n_vertices)] += 1.0 - a.sum(axis=1)
        op = WalkOperator(a)
        if op.lam < max_lam:
            return op


def random_marking(op, n_steps, rng):
    return marks_for(op, rng.random((n_steps, op.n_vertices)))


def random_instance(rng, max_vertices=6, max_steps=8, max_paths=200_000):
    n_vertices = int(rng.integers(2, max_vertices + 1))
    n_steps = int(rng.integers(1, max_steps + 1))
    while n_vertices**n_steps > max_paths:
        n_steps -= 1
    op = random_symmetric_operator(n_vertices, rng)
    return op, random_marking(op, n_steps, rng)


def probe_alphas(lam):
    """Midpoint and 0.9-quantile of (1, 1/lam); fixed values when lam = 0."""
    if lam < 1e-9:
        return (1.5, 3.0)
    hi = 1.0 / lam
    return (1.0 + 0.5 * (hi - 1.0), 1.0 + 0.9 * (hi - 1.0))


def _result(name, instances, violations, tol):
    worst = max(violations, default=0.0)
    return CheckResult(name, instances, worst, worst <= tol)


def check_thm1_dominance(rng, trials=200, inject_bug=False):
    """exact MGF <= MGF bound, relative slack 1e-9."""
    violations = []
    for _ in range(trials):
        op, marks = random_instance(rng)
        for alpha in probe_alphas(op.lam):
            exact = oracle.exact_mgf(op, marks, alpha)
            bound = bounds.mgf_bound_thm1(op.lam, alpha, marks.phi)
            if inject_bug:
                exact, bound = bound, exact
            violations.append(max(0.0, exact / bound - 1.0))
    return _result("thm1_dominance", trials, violations, 1e-9)


def check_oracle_agreement(rng, trials=200):
    """Transfer-matrix MGF equals the enumerated MGF, relative 1e-9."""
    diffs = []
    for _ in range(trials):
        op, marks = random_instance(rng, max_paths=10_000)
        dist = oracle.brute_force_distribution(op, marks)
        for alpha in (1.1, 1.5) + probe_alphas(op.lam):
            exact = oracle.exact_mgf(op, marks, alpha)
            diffs.append(abs(exact - dist.mgf(alpha)) / exact)
    return _result("oracle_agreement", trials, diffs, 1e-9)


def check_monomial_dominance(rng, trials=500):
    violations = []
    for _ in range(trials):
        op, marks = random_instance(rng, max_steps=10)
        k = int(rng.integers(1, 6))
        w = np.sort(rng.integers(0, marks.n_steps, size=k))
        exact = oracle.exact_monomial_expectation(op, marks, w)
        bound = bounds.monomial_bound(op.lam, marks.mus, w)
        violations.append(max(0.0, exact - bound))
    return _result("monomial_dominance", trials, violations, 1e-9)


def check_increasing_tuple_dominance(rng, trials=100):
    violations = []
    for _ in range(trials):
        op, marks = random_instance(rng)
        for k in range(1, marks.n_steps + 1):
            exact = oracle.increasing_tuple_exact_sum(op, marks, k)
            bound = bounds.increasing_tuple_bound(k, op.lam, marks.phi)
            violations.append(max(0.0, exact - bound))
    return _result("increasing_tuple_dominance", trials, violations, 1e-9)


def check_moment_dominance(rng, trials=100, max_q=6):
    """Enumerated moments <= moment bound; equality with phi at q = 1."""
    violations = []
    for _ in range(trials):
        op, marks = random_instance(rng, max_paths=20_000)
        dist = oracle.brute_force_distribution(op, marks)
        for q in range(1, max_q + 1):
            exact = dist.moment(q)
            bound = bounds.moment_bound(q, op.lam, marks.phi)
            violations.append(max(0.0, exact - bound))
        violations.append(abs(bounds.moment_bound(1, op.lam, marks.phi) - dist.moment(1)))
    return _result("moment_dominance", trials, violations, 1e-9)


def check_two_state_equality(rng, trials=500):
    diffs = []
    for _ in range(trials):
        lam = float(rng.uniform(0.0, 0.99))
        mu = float(rng.uniform(0.01, 0.99))
        n = int(rng.integers(1, 30))
        k = int(rng.integers(1, min(n, 8) + 1))
        w = np.sort(rng.integers(0, n, size=k))
        op = make_two_state_chain(lam, mu)
        marks = indicator_marking(op, n, [0])
        closed = oracle.two_state_exact_monomial(lam, mu, w)
        diffs.append(abs(closed - oracle.exact_monomial_expectation(op, marks, w)))
    return _result("two_state_equality", trials, diffs, 1e-12)


def check_claim_jbetween(rng, trials=1000):
    violations = []
    for _ in range(trials):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(1, 5))
        mats = [rng.uniform(-1, 1, size=(n, n)) for _ in range(k)]
        lhs, rhs = oracle.claim_jbetween_sides(mats)
        violations.append(max(0.0, lhs - rhs))
    return _result("claim_jbetween", trials, violations, 1e-9)


def check_claim_diag_norm(rng, trials=1000):
    violations = []
    for _ in range(trials):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(1, 5))
        us = [rng.random(n) for _ in range(k)]
        ts = [rng.uniform(-1, 1, size=(n, n)) for _ in range(k - 1)]
        lhs, rhs = oracle.claim_diag_norm_sides(us, ts)
        violations.append(max(0.0, lhs - rhs))
    return _result("claim_diag_norm", trials, violations, 1e-9)


def random_polynomial(rng, n_vars, max_degree=4, max_terms=6):
    coeffs = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        exps = [0] * n_vars
        for _ in range(int(rng.integers(0, max_degree + 1))):
            exps[int(rng.integers(n_vars))] += 1
        coeffs[tuple(exps)] = coeffs.get(tuple(exps), 0.0) + float(rng.uniform(0, 3))
    return coeffs


def check_claim_poly_cs(rng, trials=1000):
    violations = []
    for _ in range(trials):
        n_vars = int(rng.integers(1, 6))
        coeffs = random_polynomial(rng, n_vars)
        x = rng.uniform(-2, 2, n_vars)
        y = rng.uniform(-2, 2, n_vars)
        lhs, rhs = oracle.claim_poly_cs_sides(coeffs, x, y)
        violations.append(max(0.0, lhs - rhs))
    return _result("claim_poly_cs", trials, violations, 1e-9)


def check_cor2_consistency():
    """Tail bound equals alpha^(-t phi) * MGF bound at the optimal alpha."""
    diffs = []
    cases = 0
    for lam, mult, phi in itertools.product(np.arange(1, 10) / 10, (1.5, 2.0, 10.0), (0.5, 1.0, 5.0)):
        t = mult / lam
        alpha = bounds.optimal_alpha(lam, t)
        markov = -t * phi * math.log(alpha) + bounds.log_mgf_bound_thm1(lam, alpha, phi)
        direct = bounds.log_tail_bound_cor2(lam, t, phi)
        diffs.append(abs(math.expm1(direct - markov)))
        cases += 1
    return _result("cor2_consistency", cases, diffs, 1e-12)


def check_series(Q=40):
    """Series terms converge to their closed forms and stay below the MGF bound."""
    gaps = []
    for k, alpha in itertools.product((1, 2, 3), (1.1, 1.5, 2.0)):
        target = (alpha - 1.0) ** k / math.factorial(k)
        gaps.append(abs(bounds.stirling_partial_sum(k, alpha, Q) - target))
    for i, x in itertools.product((1, 2, 3), (0.0, 0.25, 0.5)):
        gaps.append(abs(bounds.negative_binomial_partial_sum(i, x, 60) - (1.0 - x) ** -i))
    cases = len(gaps)
    for lam, alpha, phi in itertools.product((0.0, 0.3, 0.5), (1.2, 1.5), (0.5, 2.0)):
        series = [bounds.mgf_series_truncated(lam, alpha, phi, q) for q in range(1, Q + 1)]
        limit = bounds.mgf_bound_thm1(lam, alpha, phi)
        gaps.extend(max(0.0, a - b) for a, b in zip(series, series[1:]))
        gaps.append(max(0.0, series[-1] - limit * (1 + 1e-9)))
        cases += 1
    return _result("series_pipeline", cases, gaps, 1e-8)


def sharpness_table(lam, phi, alpha, ns):
    """Rows (n, exact two-state MGF with mu = phi / n, limit, limit - exact)."""
    limit = oracle.two_state_limit_mgf(lam, phi, alpha)
    rows = []
    for n in ns:
        op = make_two_state_chain(lam, phi / n)
        marks = indicator_marking(op, n, [0])
        exact = oracle.exact_mgf(op, marks, alpha)
        rows.append((n, exact, limit, limit - exact))
    return rows


def check_sharpness():
    violations = []
    for lam in (0.3, 0.5, 0.8):
        alpha = 1.0 + 0.5 * (1.0 / lam - 1.0)
        gaps = [row[3] for row in sharpness_table(lam, 1.0, alpha, (8, 32, 128, 512))]
        violations.extend(max(0.0, b - a) for a, b in zip(gaps, gaps[1:]))
        violations.extend(max(0.0, -g) for g in gaps)
    return _result("sharpness_convergence", 3, violations, 0.0)


def run_all(seed=0, trials=200, inject_bug=False):
    """Run every suite. ``trials`` scales the randomized ones."""
    rng = np.random.default_rng(seed)
    scale = max(1, trials) / 200
    n = lambda base: max(1, int(round(base * scale)))  # noqa: E731
    return [
        check_thm1_dominance(rng, n(200), inject_bug=inject_bug),
        check_oracle_agreement(rng, n(100)),
        check_monomial_dominance(rng, n(500)),
        check_increasing_tuple_dominance(rng, n(50)),
        check_moment_dominance(rng, n(100)),
        check_two_state_equality(rng, n(500)),
        check_claim_jbetween(rng, n(1000)),
        check_claim_diag_norm(rng, n(1000)),
        check_claim_poly_cs(rng, n(1000)),
        check_cor2_consistency(),
        check_series(),
        check_sharpness(),
    ]
