# Lattice embedding alpha: l_p^N -> free p-convex lattice and the projection beta with beta(alpha(e_n)) = e_n,
# plus the ball-family lemma: two positive elements in one small ball are never disjoint.

import sys
from dataclasses import dataclass, field

import numpy as np

import lattice_expr as le
from free_norm import SearchBudget, SpaceSpec, fpbl_upper, norm_bracket
from lattice_errors import DimensionError, ParameterError, PropertyCheckError
from quasi_lattice import CoordinateLattice, _norms, disjointness_criterion, quasi_norm
from seeding import derive_rng, map_ordered

DISJOINT_TOLERANCE = 1e-12
SANDWICH_GAP = 0.05
BALL_LEVELS = (1, 2, 3)
BALL_CELLS = 16
BALL_FAMILY_MIN_P = 0.5


### Alpha family ###

@dataclass(frozen=True, eq=False)
class AlphaFamily:
    '''
    f_n = [ |delta_n| - 4^n ( sum_{j<n} |delta_j| + sum_{n<j<=N} 2^-j |delta_j| ) ]+  for n = 1..N,
    the tail truncated at N. Generator n - 1 stands for the basis vector e_n.
    '''
    N: int
    p: float
    exprs: tuple = field(repr=False)

    def f(self, n):
        if not 1 <= n <= self.N:
            raise ParameterError(f"n must be in 1..{self.N}. Got: {n}")
        return self.exprs[n - 1]


def _check_unit_p(p):
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not (0 < p <= 1):
        raise ParameterError(f"p must be in (0, 1]. Got: {p!r}")


def build_alpha(N, p):
    '''
    Build f_1..f_N (sharing the |delta_j| nodes) and verify f_n(e_m^*) = [n = m].
    '''
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise ParameterError(f"N must be a positive integer. Got: {N!r}")
    _check_unit_p(p)
    N = int(N)
    moduli = [le.modulus(le.gen(j)) for j in range(N)]

    exprs = []
    for n in range(1, N + 1):
        others = [moduli[j - 1] for j in range(1, n)]
        others += [le.scale(2.0 ** -j, moduli[j - 1]) for j in range(n + 1, N + 1)]
        if others:
            body = le.add(moduli[n - 1], le.scale(-(4.0 ** n), le.add(*others)))
        else:
            body = moduli[n - 1]
        exprs.append(le.positive_part(body))

    fam = AlphaFamily(N, float(p), tuple(exprs))
    for n, f in enumerate(exprs, start=1):
        if not np.array_equal(beta_eval(f, N), np.eye(N)[n - 1]):
            raise PropertyCheckError(f"f_{n} does not evaluate to the coordinate pattern e_{n}.",
                                     witness=beta_eval(f, N).tolist())
    return fam


def beta_eval(f, N):
    '''
    Component j of beta(f) is f evaluated at the coordinate functional e_{j+1}^*.
    '''
    for index in le.generators(f):
        if index >= N:
            raise DimensionError(f"Generator {index} is out of range for N = {N}.")
    return np.asarray(le.evaluate_rows(f, np.eye(N)), dtype=float)


def alpha_combination(fam, coeffs):
    '''
    sum_n a_n f_n as one expression.
    '''
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (fam.N,):
        raise DimensionError(f"Expected {fam.N} coefficients. Got shape: {coeffs.shape}")
    if not np.all(np.isfinite(coeffs)):
        raise ParameterError("Coefficients must be finite.")
    return le.add(*[le.scale(float(a), f) for a, f in zip(coeffs, fam.exprs)])


### Disjointness of the f_n ###

def _random_functionals(rng, trials, N):
    # coordinates spread over many orders of magnitude, so that every f_n is positive somewhere
    magnitude = 10.0 ** rng.uniform(-12.0, 12.0, (trials, N))
    sign = np.where(rng.random((trials, N)) < 0.5, -1.0, 1.0)
    return sign * magnitude * (rng.random((trials, N)) >= 0.2)


def alpha_disjointness_violations(fam, trials, seed, threads=1):
    '''
    Number of functionals x^* (coordinate functionals first, then random ones)
    at which two of the f_n are positive at the same time.
    '''
    if fam.N < 2:
        raise ParameterError("Disjointness needs N >= 2.")
    if isinstance(trials, bool) or not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ParameterError(f"trials must be a positive integer. Got: {trials!r}")

    blocks = [np.eye(fam.N)]
    chunks = [(k, min(4096, trials - start)) for k, start in enumerate(range(0, trials, 4096))]
    blocks += map_ordered(lambda job: _random_functionals(derive_rng(seed, 'alpha-disjoint', job[0]),
                                                          job[1], fam.N), chunks, threads)
    functionals = np.vstack(blocks)
    values = np.stack([le.evaluate_rows(f, functionals) for f in fam.exprs], axis=1)
    positive = (values > DISJOINT_TOLERANCE).sum(axis=1)
    return int(np.count_nonzero(positive > 1))


def alpha_disjointness(fam, trials, seed, threads=1):
    return alpha_disjointness_violations(fam, trials, seed, threads) == 0


### Norm sandwich ###

@dataclass
class SandwichCheck:
    lower_ok: bool
    upper_ok: bool
    target: float
    bracket: object

    def __iter__(self):
        # unpacks as (lower_ok, upper_ok)
        return iter((self.lower_ok, self.upper_ok))

    @property
    def gap(self):
        return self.bracket.upper - self.bracket.lower


def alpha_norm_sandwich(fam, coeffs, budget=None, seed=0, tol=1e-9):
    '''
    Bracket the free norm of sum a_n f_n over E = l_p^N and compare with (sum |a_n|^p)^(1/p):
        lower_ok: lower bound >= target - tol
        upper_ok: the domination certificate |sum a_n f_n| <= sum |a_n| |delta_n| gives upper <= target + tol
    The default budget searches tuples of up to N functionals, the coordinate tuple included.
    '''
    combo = alpha_combination(fam, coeffs)
    budget = budget or SearchBudget(n_max=fam.N, restarts=1, iters=8)
    if budget.n_max < fam.N:
        raise ParameterError(f"Sandwich budget needs n_max >= N = {fam.N}. Got: {budget.n_max}")
    coeffs = np.asarray(coeffs, dtype=float)
    target = float(np.power(np.sum(np.power(np.abs(coeffs), fam.p)), 1.0 / fam.p))
    space = SpaceSpec.lp(fam.p, fam.N)
    bracket = norm_bracket(combo, space, fam.p, budget=budget, seed=seed)
    scale = max(1.0, target)
    return SandwichCheck(bool(bracket.lower >= target - tol * scale),
                         bool(bracket.upper <= target + tol * scale), target, bracket)


def f_n_upper_certificates(fam, check_points=1000, seed=0):
    '''
    Certificate value of |f_n| <= |delta_n| for every n; each equals 1.
    '''
    space = SpaceSpec.lp(fam.p, fam.N)
    return [fpbl_upper(f, space, fam.p, [np.eye(fam.N)[n]], check_points, seed)
            for n, f in enumerate(fam.exprs)]


### Ball family ###

def _random_centre(rng, cells):
    # positive step function: a few random steps with values in [0.1, 2)
    breaks = np.sort(rng.choice(np.arange(1, cells), size=rng.integers(0, min(4, cells - 1) + 1), replace=False))
    levels = rng.uniform(0.1, 2.0, breaks.size + 1)
    return np.repeat(levels, np.diff(np.concatenate(([0], breaks, [cells]))))


def _ball_point(rng, L, b, radius):
    # x = max(b + rho v, 0) with ||v|| = 1 and rho < radius; clipping keeps ||x - b|| <= rho
    d = L.dimension
    if rng.random() < 0.5:
        v = rng.standard_normal(d)
    else:
        v = np.zeros(d)
        v[rng.integers(d)] = -1.0
    v = v / quasi_norm(L, v)
    rho = rng.random() * radius
    return np.maximum(b + rho * v, 0.0)


def _ball_trial(p, seed, k, cells):
    L = CoordinateLattice.lp_grid(p, cells)
    rng = derive_rng(seed, 'ball-family', k)
    b = np.ones(cells) if k == 0 else _random_centre(rng, cells)
    level = BALL_LEVELS[k % len(BALL_LEVELS)]
    radius = quasi_norm(L, b) / 4.0 ** level
    if k == 0:
        x = y = b
    else:
        x, y = _ball_point(rng, L, b, radius), _ball_point(rng, L, b, radius)
    inside = quasi_norm(L, x - b) < radius and quasi_norm(L, y - b) < radius
    disjoint = disjointness_criterion(L, x, y)
    # chain: ||x - y|| < ||x|| rules out disjointness
    chain = quasi_norm(L, x - y) < quasi_norm(L, x)
    return {'inside': inside, 'disjoint': disjoint, 'chain': chain,
            'chain_violation': chain and disjoint, 'x': x, 'y': y, 'b': b}


def ball_family_trials(p, trials, seed, cells=BALL_CELLS, threads=1):
    '''
    Random pairs x, y >= 0 in one ball B(b, ||b|| / 4^n), n in {1, 2, 3}, around positive step
    functions b on the L_p grid. Counts pairs with x ^ y = 0 (none exist for p >= 1/2) and checks
    that ||x - y|| < ||x|| never occurs for a disjoint pair.
    '''
    _check_unit_p(p)
    if isinstance(trials, bool) or not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ParameterError(f"trials must be a positive integer. Got: {trials!r}")
    results = map_ordered(lambda k: _ball_trial(p, seed, k, cells), range(trials), threads)
    violations = [r for r in results if r['inside'] and r['disjoint']]
    summary = {
        'trials': int(trials),
        'outside_ball': sum(1 for r in results if not r['inside']),
        'violations': len(violations),
        'chain_applicable': sum(1 for r in results if r['chain']),
        'chain_violations': sum(1 for r in results if r['chain_violation']),
        'witness': None,
    }
    if violations:
        v = violations[0]
        summary['witness'] = {'b': v['b'].tolist(), 'x': v['x'].tolist(), 'y': v['y'].tolist()}
    return summary


def ball_family_check(p, trials, seed, cells=BALL_CELLS, threads=1):
    summary = ball_family_trials(p, trials, seed, cells, threads)
    return summary['violations'] == 0 and summary['chain_violations'] == 0 and summary['outside_ball'] == 0


def disjoint_pairs_outside_balls(p, pairs, seed, cells=BALL_CELLS):
    '''
    Contrapositive check: random disjoint positive pairs (x, y) never lie in one ball
    B(b, ||b|| / 4) for the centres b in {x, y, (x + y) / 2, x v y} and a random positive b.
    Returns the number of pairs found inside a common ball.
    '''
    _check_unit_p(p)
    L = CoordinateLattice.lp_grid(p, cells)
    rng = derive_rng(seed, 'disjoint-pairs')
    found = 0
    for _ in range(pairs):
        mask = rng.random(cells) < 0.5
        if mask.all() or not mask.any():
            mask[rng.integers(cells)] = not mask[0]
        x = np.where(mask, rng.uniform(0.1, 2.0, cells), 0.0)
        y = np.where(~mask, rng.uniform(0.1, 2.0, cells), 0.0)
        centres = np.stack([x, y, (x + y) / 2.0, np.maximum(x, y), _random_centre(rng, cells)])
        radii = _norms(L, centres) / 4.0
        inside = (_norms(L, x[None, :] - centres) < radii) & (_norms(L, y[None, :] - centres) < radii)
        found += int(np.any(inside))
    return found


### Report ###

def projectivity_report(N, p, trials, seed, sandwich_vectors=20, threads=1, verbose=False):
    '''
    The five verdicts for the alpha family at (N, p):
    beta(alpha(e_n)) = e_n, pairwise disjointness, ||f_n|| <= 1 certificates,
    the norm sandwich on random coefficient vectors, and the ball family.
    '''
    fam = build_alpha(N, p)
    report = {'N': fam.N, 'p': fam.p, 'trials': int(trials), 'seed': int(seed)}

    identity = np.array([beta_eval(f, fam.N) for f in fam.exprs])
    report['beta_alpha_identity'] = bool(np.array_equal(identity, np.eye(fam.N)))

    if fam.N >= 2:
        violations = alpha_disjointness_violations(fam, trials, seed, threads)
    else:
        violations = 0
    report['pairwise_disjoint'] = violations == 0
    report['disjointness_violations'] = violations

    certificates = f_n_upper_certificates(fam, seed=seed)
    report['f_n_upper_bounds'] = certificates
    report['norm_upper_one'] = bool(all(abs(c - 1.0) <= 1e-12 for c in certificates))

    rng = derive_rng(seed, 'sandwich-coefficients')
    coefficient_rows = rng.standard_normal((sandwich_vectors, fam.N))
    gaps, sandwich_ok = [], True
    for k, coeffs in enumerate(coefficient_rows):
        check = alpha_norm_sandwich(fam, coeffs, seed=seed)
        upper = check.bracket.upper
        ok = check.lower_ok and check.upper_ok and -1e-9 <= check.gap <= SANDWICH_GAP * upper
        sandwich_ok = sandwich_ok and ok
        gaps.append(check.gap)
        if verbose:
            print(f"sandwich {k}: target {check.target:.10g}, bracket [{check.bracket.lower:.10g}, {upper:.10g}]",
                  file=sys.stderr)
    report['norm_sandwich'] = bool(sandwich_ok)
    report['sandwich_gaps'] = gaps

    balls = ball_family_trials(fam.p, trials, seed, threads=threads)
    report['ball_family_summary'] = balls
    verdicts = ['beta_alpha_identity', 'pairwise_disjoint', 'norm_upper_one', 'norm_sandwich']
    # the ball lemma is only asserted for p >= 1/2; below that the counts are reported as is
    if fam.p >= BALL_FAMILY_MIN_P:
        report['ball_family'] = (balls['violations'] == 0 and balls['chain_violations'] == 0
                                 and balls['outside_ball'] == 0)
        verdicts.append('ball_family')
    else:
        report['ball_family'] = None
    report['passed'] = all(report[key] for key in verdicts)
    return report
