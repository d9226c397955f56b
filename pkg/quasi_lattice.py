# Finite-dimensional quasi-Banach lattices R^d with a weighted l_r quasi-norm:
# quasi-norms, p-convexity constant estimation, L-convexity test, convexification, disjointness.

import sys
from dataclasses import dataclass, field

import numpy as np

from lattice_errors import DimensionError, ParameterError
from seeding import derive_rng, map_ordered

NORM_TOLERANCE = 1e-9
TUPLE_SIZES = (2, 4, 8)


@dataclass(frozen=True)
class CoordinateLattice:
    '''
    R^d with the coordinatewise order and the quasi-norm
        ||x|| = (sum_j w_j |x_j|^r)^(1/r)      (max_j |x_j| for r = inf).
    The grid discretization of L_r[0,1] on n cells is d = n, w_j = 1/n.
    '''
    exponent: float
    weights: tuple
    name: str = field(default='', compare=False)

    def __post_init__(self):
        r = self.exponent
        if isinstance(r, bool) or not isinstance(r, (int, float)) or np.isnan(r) or r <= 0:
            raise ParameterError(f"Lattice exponent r must be in (0, inf]. Got: {r!r}")
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise DimensionError("Lattice needs dimension d >= 1.")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ParameterError("Lattice weights must be finite and > 0.")
        object.__setattr__(self, 'exponent', float(r))
        object.__setattr__(self, 'weights', tuple(float(v) for v in w))

    @classmethod
    def lp_grid(cls, p, n):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ParameterError(f"Grid size n must be a positive integer. Got: {n!r}")
        return cls(p, (1.0 / n,) * int(n), name=f"lpgrid:{p}:{n}")

    @classmethod
    def weighted_lr(cls, r, d, weights=None):
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ParameterError(f"Dimension d must be a positive integer. Got: {d!r}")
        if weights is None:
            weights = (1.0,) * int(d)
        if len(weights) != d:
            raise DimensionError(f"Expected {d} weights. Got: {len(weights)}")
        return cls(r, tuple(weights), name=f"weightedlr:{r}:{d}")

    @property
    def dimension(self):
        return len(self.weights)

    @property
    def w(self):
        return np.asarray(self.weights)

    def describe(self):
        return self.name or f"weightedlr:{self.exponent}:{self.dimension}"


def _vector(L, x, name='x'):
    x = np.asarray(x, dtype=float)
    if x.shape != (L.dimension,):
        raise DimensionError(f"{name} must have dimension {L.dimension}. Got shape: {x.shape}")
    return x


def _norms(L, xs):
    # quasi-norm along the last axis
    a = np.abs(xs)
    if np.isinf(L.exponent):
        return a.max(axis=-1)
    r = L.exponent
    return np.power(np.sum(L.w * np.power(a, r), axis=-1), 1.0 / r)


def quasi_norm(L, x):
    '''
    Weighted r-quasi-norm of x; zero exactly at x = 0.
    '''
    return float(_norms(L, _vector(L, x)))


def quasi_norm_modulus(L):
    '''
    Constant Delta with ||x + y|| <= Delta (||x|| + ||y||): 2^(1/min(r,1) - 1).
    '''
    return 2.0 ** (1.0 / min(L.exponent, 1.0) - 1.0)


### p-convexity ###

@dataclass
class ConvexityReport:
    '''
    Lower bound on M^(p)(L). `witness` is an (n, d) array of lattice elements whose
    ratio at `witness_exponent` equals `bound`; for a plain estimate the witness
    exponent is the exponent itself (a monotonicity scan may carry over a witness
    found at a smaller exponent, since M^(r) <= M^(p) for r < p).
    '''
    exponent: float
    bound: float
    witness: np.ndarray
    trials: int
    witness_exponent: float = None

    def __post_init__(self):
        if self.witness_exponent is None:
            self.witness_exponent = self.exponent

    def to_dict(self):
        return {
            'exponent': self.exponent,
            'bound': self.bound,
            'witness_exponent': self.witness_exponent,
            'trials': self.trials,
            'witness': self.witness.tolist(),
        }


def _check_convexity_exponent(p):
    if isinstance(p, bool) or not isinstance(p, (int, float)) or np.isnan(p) or p <= 0:
        raise ParameterError(f"Convexity exponent p must be > 0. Got: {p!r}")


def convexity_ratio(L, xs, p):
    '''
    ||(sum_k |x_k|^p)^(1/p)|| / (sum_k ||x_k||^p)^(1/p) for the tuple xs (shape (n, d)).
    p = inf uses the sup-display: ||max_k |x_k||| / max_k ||x_k||.
    '''
    _check_convexity_exponent(p)
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != L.dimension:
        raise DimensionError(f"Tuple must have shape (n, {L.dimension}). Got: {xs.shape}")
    norms = _norms(L, xs)
    if np.isinf(p):
        numerator = _norms(L, np.abs(xs).max(axis=0))
        denominator = norms.max()
    else:
        numerator = _norms(L, np.power(np.sum(np.power(np.abs(xs), p), axis=0), 1.0 / p))
        denominator = np.power(np.sum(np.power(norms, p)), 1.0 / p)
    if denominator == 0:
        return 0.0
    return float(numerator / denominator)


def _heavy_tailed(rng, shape):
    # symmetric mixture of uniform and reciprocal-uniform magnitudes
    u = rng.uniform(1e-3, 1.0, size=shape)
    magnitude = np.where(rng.random(shape) < 0.5, u, 1.0 / u)
    sign = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
    # sparsify a quarter of the entries so that near-disjoint tuples are probed too
    return sign * magnitude * (rng.random(shape) >= 0.25)


def _tuple_pool(L, trials, seed, threads=1):
    '''
    Candidate tuples: the singleton (e_1), the canonical basis (e_1..e_d), then `trials`
    random tuples. Trial k uses its own stream, so the pool does not depend on threads.
    '''
    d = L.dimension
    pool = [np.eye(d)[:1], np.eye(d)]
    sizes = TUPLE_SIZES + (d,)

    def draw(k):
        rng = derive_rng(seed, 'convexity', k)
        return _heavy_tailed(rng, (sizes[k % len(sizes)], d))

    pool.extend(map_ordered(draw, range(trials), threads))
    return pool


def _best_in_pool(L, pool, p):
    best_value, best_index = -np.inf, 0
    for i, xs in enumerate(pool):
        value = convexity_ratio(L, xs, p)
        if value > best_value:
            best_value, best_index = value, i
    return best_value, best_index


def p_convexity_lower_bound(L, p, trials, seed, threads=1, verbose=False):
    '''
    Lower bound for the p-convexity constant M^(p)(L) by random search.
    The canonical basis tuple is always among the candidates.

    Returns:
        ConvexityReport with the best ratio and its witness tuple
    '''
    _check_convexity_exponent(p)
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ParameterError(f"trials must be a positive integer. Got: {trials!r}")
    pool = _tuple_pool(L, trials, seed, threads)
    value, index = _best_in_pool(L, pool, p)
    if verbose:
        print(f"M^({p}) lower bound on {L.describe()}: {value:.12g} over {len(pool)} tuples", file=sys.stderr)
    return ConvexityReport(float(p), float(value), pool[index], int(trials))


def convexity_monotonicity_scan(L, p_list, trials, seed, threads=1):
    '''
    Reports for every p in p_list from one shared tuple pool. The bound reported for p is the
    best ratio seen at any exponent <= p (valid because M^(r) <= M^(p)), so the bounds are
    nondecreasing in p.
    '''
    p_list = list(p_list)
    if not p_list:
        raise ParameterError("p_list must not be empty.")
    for p in p_list:
        _check_convexity_exponent(p)
    if any(b < a for a, b in zip(p_list, p_list[1:])):
        raise ParameterError("p_list must be sorted ascending.")
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ParameterError(f"trials must be a positive integer. Got: {trials!r}")

    pool = _tuple_pool(L, trials, seed, threads)
    reports = []
    carried = None
    for p in p_list:
        value, index = _best_in_pool(L, pool, p)
        report = ConvexityReport(float(p), float(value), pool[index], int(trials))
        if carried is not None and carried.bound > report.bound:
            report = ConvexityReport(float(p), carried.bound, carried.witness, int(trials),
                                     witness_exponent=carried.witness_exponent)
        reports.append(report)
        carried = report
    return reports


### L-convexity ###

def l_convexity_violation(L, u, xs, eps):
    '''
    True iff the family xs in [0, u] witnesses failure of the L-convexity condition at eps:
    its average dominates (1 - eps) u, yet every member has norm < eps.
    '''
    u = _vector(L, u, 'u')
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != L.dimension or xs.shape[0] < 1:
        raise DimensionError(f"Family must have shape (n, {L.dimension}) with n >= 1. Got: {xs.shape}")
    if not (0 < eps < 1):
        raise ParameterError(f"eps must be in (0, 1). Got: {eps}")
    if np.any(u < 0):
        raise ParameterError("u must be a positive element.")
    if abs(quasi_norm(L, u) - 1.0) > NORM_TOLERANCE:
        raise ParameterError(f"u must have norm 1. Got: {quasi_norm(L, u)}")
    if np.any(xs < 0) or np.any(xs > u):
        raise ParameterError("Every x_k must lie in the order interval [0, u].")

    average_dominates = bool(np.all(xs.mean(axis=0) >= (1.0 - eps) * u))
    return average_dominates and bool(_norms(L, xs).max() < eps)


def l_convexity_search(L, eps, trials, seed, family_size=8):
    '''
    Random search for an L-convexity violation. Returns the number of violating families found.
    '''
    rng = derive_rng(seed, 'lconvexity')
    d = L.dimension
    found = 0
    for _ in range(trials):
        u = rng.random(d) + 1e-3
        u = u / quasi_norm(L, u)
        # members concentrated on random supports, then lifted to satisfy the average condition
        xs = u * (rng.random((family_size, d)) < rng.uniform(0.05, 0.95)) * rng.uniform(0.0, 1.0, (family_size, d))
        deficit = np.maximum((1.0 - eps) * u - xs.mean(axis=0), 0.0)
        xs = np.minimum(xs + family_size * deficit * (rng.random((family_size, d)) < 0.5), u)
        if l_convexity_violation(L, u, xs, eps):
            found += 1
    return found


### Convexification ###

def _check_positive(x, name):
    if np.any(x < 0):
        raise ParameterError(f"{name} must be positive (all coordinates >= 0).")


def convexification_oplus(L, x, y, s):
    '''
    Addition of the s-convexification X^(s): (x^(1/s) + y^(1/s))^s, coordinatewise, any s > 0.
    '''
    _check_convexity_exponent(s)
    x, y = _vector(L, x), _vector(L, y, 'y')
    _check_positive(x, 'x')
    _check_positive(y, 'y')
    return np.power(np.power(x, 1.0 / s) + np.power(y, 1.0 / s), s)


def convexification_norm(L, x, s):
    _check_convexity_exponent(s)
    return quasi_norm(L, x) ** (1.0 / s)


def _check_unit_exponent(p):
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not (0 < p <= 1):
        raise ParameterError(f"Convexification exponent p must be in (0, 1]. Got: {p!r}")


def convexify_oplus(L, x, y, p):
    _check_unit_exponent(p)
    return convexification_oplus(L, x, y, p)


def convexify_norm(L, x, p):
    _check_unit_exponent(p)
    return convexification_norm(L, x, p)


### Disjointness ###

def disjointness_criterion(L, x, y):
    '''
    True iff x and y (both >= 0) are disjoint, i.e. x ^ y = 0.
    For disjoint pairs |x - y| = x v y, hence ||x - y|| >= ||x||.
    '''
    x, y = _vector(L, x), _vector(L, y, 'y')
    _check_positive(x, 'x')
    _check_positive(y, 'y')
    return bool(np.all(np.minimum(x, y) == 0))
