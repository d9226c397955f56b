# Acceptance criteria with pinned seeds. Each criterion returns (passed, detail);
# self_test runs them (optionally filtered by name) and tabulates the verdicts.

import sys
import time

import numpy as np
import pandas as pd

import hilbert_counterexample as hc
import lattice_expr as le
import projectivity as pj
import quasi_lattice as ql
import stable_constants as sc
from free_norm import SearchBudget, SpaceSpec, norm_bracket
from lattice_errors import LatticeToolError
from seeding import derive_rng

SUITE_SEED = 7
CASES = 10_000
HILBERT_N = (1, 2, 4, 8, 16, 32, 64)
WEAK_L1_N = (2, 4, 8, 16, 32, 64)
ISOMETRY_BUDGET = SearchBudget(n_max=3, restarts=4, iters=40)


### Stable constants ###

def _monte_carlo_check(p, q, exact, seed=SUITE_SEED, n_samples=1_000_000):
    closed = sc.a_pq(p, q)
    mc = sc.a_pq_monte_carlo(p, q, sc.StableSpec(q, seed, n_samples))
    closed_ok = abs(closed - exact) <= 1e-9
    mc_ok = abs(mc.estimate - exact) <= 4.0 * mc.stderr
    detail = f"closed={closed!r} mc={mc.estimate:.8g}+-{mc.stderr:.2g}"
    return closed_ok and mc_ok, detail


def check_apq_cauchy():
    return _monte_carlo_check(0.5, 1.0, 2.0)


def check_apq_gaussian():
    return _monte_carlo_check(1.0, 2.0, 2.0 / np.sqrt(np.pi))


def check_apq_limit():
    gaps = {q: abs(sc.a_pq(1e-3, q) - sc.a_pq_limit(q)) for q in (0.5, 1.0, 1.5)}
    return all(g <= 1e-2 for g in gaps.values()), ', '.join(f"q={q}: {g:.3g}" for q, g in gaps.items())


def check_apq_uniform_scan():
    scan = sc.uniform_bound_scan(0.5, 1.0, np.linspace(1e-4, 0.499, 200))
    endpoint_ok = abs(scan.endpoint_ratio - 2.0) <= 0.01 * 2.0
    passed = bool(np.isfinite(scan.max_ratio) and scan.max_ratio <= 2.2 and endpoint_ok)
    return passed, f"max={scan.max_ratio:.6g} endpoint={scan.endpoint_ratio:.6g}"


### Hilbert counterexample ###

def check_hilbert_minima():
    worst = 0.0
    last = None
    for n in HILBERT_N:
        value = hc.refined_minimum(n, cells=10001)
        worst = max(worst, abs(value - np.log(2 * n - 1)))
        last = value
    return worst <= 1e-3 and last > 4.84, f"max |min - log(2n-1)| = {worst:.3g}, n=64 min = {last:.6g}"


def check_hilbert_lemma():
    failed = [n for n in range(1, 65) if not hc.f_n_lemma_check(n, seed=SUITE_SEED).passed]
    return not failed, f"failed n: {failed}" if failed else "n = 1..64 pass"


def check_hilbert_weak_l1():
    values = [hc.weak_l1_norm(hc.f_n_grid(n, 10001)) for n in WEAK_L1_N]
    bounds_ok = all(v >= np.log(2 * n - 1) - 0.01 for n, v in zip(WEAK_L1_N, values))
    increasing = all(b > a for a, b in zip(values, values[1:]))
    return bounds_ok and increasing, ', '.join(f"{v:.4f}" for v in values)


### Free norms ###

def check_delta_isometry(samples=50):
    failures = 0
    total = 0
    for r in (1.0, 2.0, np.inf):
        space = SpaceSpec.lp(r, 3)
        rng = derive_rng(SUITE_SEED, 'delta-isometry', int(min(r, 9)))
        for x in rng.standard_normal((samples, 3)):
            norm = space.norm(x)
            for p in (0.5, 1.0):
                total += 1
                bracket = norm_bracket(le.delta(x), space, p, budget=ISOMETRY_BUDGET, seed=SUITE_SEED)
                if not (bracket.contains(norm) and bracket.lower >= 0.99 * norm and bracket.upper == norm):
                    failures += 1
    return failures == 0, f"{failures} of {total} brackets failed"


def check_exact_closure():
    f = le.add(le.modulus(le.gen(0)), le.modulus(le.gen(1)))
    first = norm_bracket(f, SpaceSpec.lp(1, 2), 1.0, seed=SUITE_SEED)
    n = 8
    average = le.scale(1.0 / n, le.add(*[le.modulus(le.gen(k)) for k in range(n)]))
    second = norm_bracket(average, SpaceSpec.lp(1, n), 1.0, budget=SearchBudget(n_max=4, restarts=8, iters=100),
                          seed=SUITE_SEED)
    ok = (abs(first.lower - 2) <= 1e-6 and abs(first.upper - 2) <= 1e-6
          and abs(second.lower - 1) <= 1e-6 and abs(second.upper - 1) <= 1e-6)
    return ok, f"[{first.lower:.9g}, {first.upper:.9g}] and [{second.lower:.9g}, {second.upper:.9g}]"


### Quasi-lattices ###

def check_convexity_constants():
    details = []
    ok = True
    for p in (0.25, 0.5, 1.0):
        report = ql.p_convexity_lower_bound(ql.CoordinateLattice.lp_grid(p, 8), p, 500, SUITE_SEED)
        ok = ok and abs(report.bound - 1.0) <= 1e-9
        details.append(f"M({p})={report.bound:.12g}")
    basis = ql.convexity_ratio(ql.CoordinateLattice.weighted_lr(0.5, 4), np.eye(4), 1.0)
    ok = ok and abs(basis - 4.0) <= 1e-9
    scan = ql.convexity_monotonicity_scan(ql.CoordinateLattice.weighted_lr(0.5, 4), [0.25, 0.5, 1.0], 500, SUITE_SEED)
    bounds = [r.bound for r in scan]
    ok = ok and all(b >= a for a, b in zip(bounds, bounds[1:]))
    details.append(f"basis={basis:.12g} scan={bounds}")
    return ok, '; '.join(details)


### Projectivity ###

def check_projectivity(N=12, trials=CASES):
    verdicts = {}
    for p in (0.5, 1.0):
        report = pj.projectivity_report(N, p, trials, SUITE_SEED)
        verdicts[p] = report['passed']
    return all(verdicts.values()), ', '.join(f"p={p}: {'pass' if v else 'fail'}" for p, v in verdicts.items())


### Property suites ###

def _property_violations(cases=CASES):
    rng = derive_rng(SUITE_SEED, 'property-suites')
    counts = {}
    d = 6
    tol = 1e-12

    # quasi-norm p-inequality: ||x + y||^r <= ||x||^r + ||y||^r for r <= 1
    L = ql.CoordinateLattice.lp_grid(0.5, d)
    x, y = rng.standard_normal((cases, d)), rng.standard_normal((cases, d))
    lhs = ql._norms(L, x + y) ** 0.5
    rhs = ql._norms(L, x) ** 0.5 + ql._norms(L, y) ** 0.5
    counts['quasi_norm_p_inequality'] = int(np.count_nonzero(lhs > rhs * (1 + tol)))

    # lattice monotonicity: |x| <= |y| implies ||x|| <= ||y||
    y = rng.standard_normal((cases, d))
    x = y * rng.uniform(0.0, 1.0, (cases, d))
    counts['lattice_monotonicity'] = int(np.count_nonzero(ql._norms(L, x) > ql._norms(L, y) * (1 + tol)))

    # disjoint positive pairs: ||x - y|| >= ||x||
    mask = rng.random((cases, d)) < 0.5
    x = np.where(mask, rng.uniform(0.0, 2.0, (cases, d)), 0.0)
    y = np.where(~mask, rng.uniform(0.0, 2.0, (cases, d)), 0.0)
    counts['disjointness_criterion'] = int(np.count_nonzero(ql._norms(L, x - y) < ql._norms(L, x) * (1 - tol)))

    # Krivine evaluation agrees with scalar evaluation coordinate by coordinate
    expr = le.random_expression(rng, 3, depth=4)
    elements = rng.standard_normal((3, cases))
    lattice_values = le.evaluate_lattice(expr, {i: elements[i] for i in range(3)})
    scalar_values = np.array([le.evaluate_scalar(expr, elements[:, j]) for j in range(cases)])
    counts['krivine_pointwise'] = int(np.count_nonzero(lattice_values != scalar_values))

    # positive homogeneity at random functionals
    bad = 0
    for _ in range(10):
        expr = le.random_expression(rng, 4, depth=4)
        T = rng.standard_normal((cases // 10, 4))
        lam = rng.uniform(0.0, 10.0, (cases // 10, 1))
        scaled = le.evaluate_rows(expr, lam * T)
        plain = lam[:, 0] * le.evaluate_rows(expr, T)
        bad += int(np.count_nonzero(np.abs(scaled - plain) > 1e-12 * np.maximum(1.0, np.abs(plain))))
    counts['homogeneity'] = bad
    return counts


def check_property_suites():
    counts = _property_violations()
    return all(v == 0 for v in counts.values()), ', '.join(f"{k}={v}" for k, v in counts.items())


CRITERIA = (
    ('apq-cauchy-half-moment', check_apq_cauchy),
    ('apq-gaussian-mean', check_apq_gaussian),
    ('apq-limit', check_apq_limit),
    ('apq-uniform-scan', check_apq_uniform_scan),
    ('hilbert-minima', check_hilbert_minima),
    ('hilbert-lemma', check_hilbert_lemma),
    ('hilbert-weak-l1', check_hilbert_weak_l1),
    ('free-norm-delta-isometry', check_delta_isometry),
    ('free-norm-exact-closure', check_exact_closure),
    ('convexity-constants', check_convexity_constants),
    ('projectivity-suite', check_projectivity),
    ('property-suites', check_property_suites),
)


def self_test(filter=None, verbose=False):
    '''
    Run the acceptance criteria whose name contains `filter` (all if None).

    Returns:
        DataFrame with columns criterion, passed, detail, seconds
    '''
    rows = []
    for name, check in CRITERIA:
        if filter and filter not in name:
            continue
        start = time.time()
        try:
            passed, detail = check()
        except LatticeToolError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.time() - start
        rows.append({'criterion': name, 'passed': bool(passed), 'detail': detail, 'seconds': round(elapsed, 3)})
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'} {name} ({elapsed:.2f} s): {detail}", file=sys.stderr)
    return pd.DataFrame(rows, columns=['criterion', 'passed', 'detail', 'seconds'])
