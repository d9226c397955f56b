# Moment constants of normalized symmetric q-stable variables X_q (E exp(itX) = exp(-|t|^q)):
#   A_{p,q} = ||X_q||_p in closed form, by quadrature and by Monte Carlo,
#   the p -> 0+ limit, and the factorization constant bound T_q * A_{r,q} / A_{p,q}.

import sys
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import integrate

from lattice_errors import DivergenceError, DomainError, ParameterError
from seeding import chunk_sizes, derive_rng, map_ordered

EULER_GAMMA = 0.57721566490153286

# Lanczos approximation, g = 671/128, 14 coefficients
LANCZOS_G = 5.2421875
LANCZOS_BASE = 0.999999999999997092
SQRT_2PI = 2.5066282746310005
LANCZOS_COEFFICIENTS = np.array([
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.33994649984811887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.26190838405184087e-4, 0.368991826595316234e-5,
])

SAMPLE_CHUNK = 65536
UNRELIABLE_RELATIVE_STDERR = 0.05
UNIFORM_SUP_POINTS = 200


### Log-gamma ###

def _lanczos(x):
    tmp = x + LANCZOS_G
    tmp = (x + 0.5) * np.log(tmp) - tmp
    ser = np.full_like(x, LANCZOS_BASE)
    y = x.copy()
    for c in LANCZOS_COEFFICIENTS:
        y = y + 1.0
        ser = ser + c / y
    return tmp + np.log(SQRT_2PI * ser / x)


def log_gamma(x):
    '''
    Natural log of the Gamma function for x > 0 (scalar or array).
    Lanczos series for x >= 1/2, reflection lnG(x) = ln(pi / sin(pi x)) - lnG(1 - x) below.
    '''
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("log_gamma needs finite arguments.")
    if np.any(arr <= 0):
        raise DomainError(f"log_gamma is only defined here for x > 0 (poles at 0, -1, ...). Got: {x!r}")
    flat = np.atleast_1d(arr).astype(float)
    result = np.empty_like(flat)
    low = flat < 0.5
    high = ~low
    if np.any(high):
        result[high] = _lanczos(flat[high])
    if np.any(low):
        xs = flat[low]
        result[low] = np.log(np.pi / np.sin(np.pi * xs)) - _lanczos(1.0 - xs)
    if arr.ndim == 0:
        return float(result[0])
    return result.reshape(arr.shape)


### Closed forms ###

def _check_q(q, allow_two=True):
    if isinstance(q, bool) or not isinstance(q, (int, float)) or not np.isfinite(q):
        raise DomainError(f"q must be a real number in (0, 2). Got: {q!r}")
    upper_ok = q <= 2 if allow_two else q < 2
    if q <= 0 or not upper_ok:
        raise DomainError(f"q must be in (0, 2{']' if allow_two else ')'}. Got: {q}")


def _check_pq(p, q):
    _check_q(q)
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not np.isfinite(p) or p <= 0:
        raise DomainError(f"p must be a real number > 0. Got: {p!r}")
    if p >= 2:
        raise DomainError(f"p must be < 2. Got: {p}")
    if p >= q:
        raise DivergenceError(f"p must be < q: X_q has no moment of order p = {p} >= q = {q}.")


def log_a_pq(p, q):
    _check_pq(p, q)
    total = (np.log(2.0) + log_gamma(p) + log_gamma(1.0 - p / q)
             - log_gamma(p / 2.0) - log_gamma(1.0 - p / 2.0))
    return total / p


def a_pq(p, q):
    '''
    A_{p,q} = [2 G(p) G(1 - p/q) / (G(p/2) G(1 - p/2))]^(1/p), evaluated in log space.
    Defined for 0 < p < q < 2; q = 2 (the Gaussian case) is accepted as well,
    see is_gaussian_extension.
    '''
    return float(np.exp(log_a_pq(p, q)))


def is_gaussian_extension(q):
    return q == 2


def a_pq_limit(q):
    '''
    lim_{p -> 0+} A_{p,q} = exp(gamma (1/q - 1)), gamma the Euler-Mascheroni constant.
    '''
    _check_q(q)
    return float(np.exp(EULER_GAMMA * (1.0 / q - 1.0)))


### Quadrature oracle ###

def stable_moment_integrals(p, q):
    '''
    The two integrals of the moment identity E|X|^p = J / I:
        J(p,q) = int_0^inf (1 - exp(-t^q)) t^(-p-1) dt = G(1 - p/q) / p
        I(p)   = int_0^inf (1 - cos t) t^(-p-1) dt     = G(p/2) G(1 - p/2) / (2 p G(p))
    Returns a dict with numeric values (scipy quad) and the closed forms.
    '''
    _check_pq(p, q)

    def j_integrand(t):
        return -np.expm1(-t ** q) * t ** (-p - 1.0)

    def i_integrand(t):
        return 2.0 * np.sin(t / 2.0) ** 2 * t ** (-p - 1.0)

    j_head, _ = integrate.quad(j_integrand, 0.0, 1.0, limit=200)
    j_tail, _ = integrate.quad(j_integrand, 1.0, np.inf, limit=200)
    i_head, _ = integrate.quad(i_integrand, 0.0, 1.0, limit=200)
    # int_1^inf (1 - cos t) t^(-p-1) = 1/p - int_1^inf cos(t) t^(-p-1) (Fourier integral)
    i_cos, _ = integrate.quad(lambda t: t ** (-p - 1.0), 1.0, np.inf, weight='cos', wvar=1.0)
    i_tail = 1.0 / p - i_cos

    return {
        'J': j_head + j_tail,
        'I': i_head + i_tail,
        'J_closed': float(np.exp(log_gamma(1.0 - p / q)) / p),
        'I_closed': float(np.exp(log_gamma(p / 2.0) + log_gamma(1.0 - p / 2.0) - log_gamma(p)) / (2.0 * p)),
    }


def a_pq_quadrature(p, q):
    '''
    A_{p,q} from the numerically integrated moment identity; independent of log_gamma.
    '''
    integrals = stable_moment_integrals(p, q)
    return float((integrals['J'] / integrals['I']) ** (1.0 / p))


### Sampling ###

@dataclass(frozen=True)
class StableSpec:
    '''
    q:         stability index in (0, 2]
    seed:      root seed of the sample stream
    n_samples: number of draws N >= 1
    chunk:     draws per derived stream; the sample depends on (seed, N, chunk) only
    '''
    q: float
    seed: int = 0
    n_samples: int = 1_000_000
    chunk: int = field(default=SAMPLE_CHUNK)

    def __post_init__(self):
        _check_q(self.q)
        for name in ('n_samples', 'chunk'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ParameterError(f"{name} must be a positive integer. Got: {value!r}")


def _stable_chunk(q, rng, size):
    v = rng.uniform(-np.pi / 2.0, np.pi / 2.0, size)
    if q == 1:
        return np.tan(v)
    w = rng.exponential(1.0, size)
    # Chambers-Mallows-Stuck, symmetric case, unit scale
    return (np.sin(q * v) / np.cos(v) ** (1.0 / q)
            * (np.cos((1.0 - q) * v) / w) ** ((1.0 - q) / q))


def sample_stable(spec, threads=1):
    '''
    N i.i.d. draws with characteristic function exp(-|t|^q).
    Chunk k uses the stream derived from (seed, 'stable', k); chunks are concatenated in order.
    '''
    sizes = chunk_sizes(spec.n_samples, spec.chunk)
    jobs = list(enumerate(sizes))
    parts = map_ordered(lambda job: _stable_chunk(spec.q, derive_rng(spec.seed, 'stable', job[0]), job[1]),
                        jobs, threads)
    return np.concatenate(parts)


@dataclass
class MonteCarloEstimate:
    estimate: float
    stderr: float
    n_samples: int
    unreliable: bool

    def __iter__(self):
        # unpacks as (estimate, stderr)
        return iter((self.estimate, self.stderr))


def a_pq_monte_carlo(p, q, spec, threads=1, verbose=False):
    '''
    ((1/N) sum |X_i|^p)^(1/p) with the delta-method standard error
        (1/p) m^(1/p - 1) sd(|X|^p) / sqrt(N).
    The estimate is flagged unreliable when q < 2 and 2p >= q (|X|^p has infinite variance)
    or the relative standard error exceeds 5 %.
    '''
    _check_pq(p, q)
    if spec.q != q:
        raise ParameterError(f"StableSpec has q = {spec.q}, expected q = {q}.")
    moments = np.power(np.abs(sample_stable(spec, threads)), p)
    n = moments.size
    m = float(np.mean(moments))
    sd = float(np.std(moments, ddof=1)) if n > 1 else 0.0
    estimate = m ** (1.0 / p)
    stderr = (1.0 / p) * m ** (1.0 / p - 1.0) * sd / np.sqrt(n)
    unreliable = bool((q < 2 and 2 * p >= q) or stderr > UNRELIABLE_RELATIVE_STDERR * estimate)
    if verbose:
        print(f"a_pq_monte_carlo: p={p} q={q} N={n} estimate={estimate:.10g} stderr={stderr:.3g}",
              file=sys.stderr)
    return MonteCarloEstimate(float(estimate), float(stderr), n, unreliable)


### Factorization bound ###

@dataclass
class MNBound:
    '''
    bound = T_q * A_{r,q} / A_{p,q}, the constant of a factorization through L_r
    by multiplication with g in L_s, 1/p = 1/r + 1/s.
    '''
    p: float
    r: float
    q: float
    type_constant: float
    ratio: float
    bound: float
    s: float
    uniform_sup: float = None

    def to_dict(self):
        return {'p': self.p, 'r': self.r, 'q': self.q, 'type_constant': self.type_constant,
                'ratio': self.ratio, 'bound': self.bound, 's': self.s, 'uniform_sup': self.uniform_sup,
                'gaussian_extension': is_gaussian_extension(self.q)}


def mn_constant_bound(p, r, q, T_q, uniform_sup=False):
    '''
    With uniform_sup, also estimates sup_p A_{r,q} / A_{p,q} over p in (0, r) (see uniform_bound_scan).
    '''
    errors = []
    for name, value in (('p', p), ('r', r), ('q', q), ('T_q', T_q)):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
            errors.append(f"{name} must be a finite real number. Got: {value!r}")
    if errors:
        raise ParameterError("\n".join(errors))
    if not (0 < p < r < q <= 2):
        raise ParameterError(f"Need 0 < p < r < q <= 2. Got: p={p}, r={r}, q={q}")
    if T_q < 1:
        raise ParameterError(f"Type constant T_q must be >= 1. Got: {T_q}")
    ratio = float(np.exp(log_a_pq(r, q) - log_a_pq(p, q)))
    s = 1.0 / (1.0 / p - 1.0 / r)
    sup = None
    if uniform_sup:
        sup = uniform_bound_scan(r, q, np.linspace(r * 1e-4, r * (1.0 - 1e-3), UNIFORM_SUP_POINTS)).max_ratio
    return MNBound(float(p), float(r), float(q), float(T_q), ratio, float(T_q) * ratio, s, sup)


@dataclass
class UniformBoundScan:
    max_ratio: float
    argmax_p: float
    endpoint_ratio: float
    limit_ratio: float
    table: pd.DataFrame


def uniform_bound_scan(r, q, p_grid):
    '''
    A_{r,q} / A_{p,q} over a grid of p in (0, r). As p -> 0+ the ratio tends to
    A_{r,q} / a_pq_limit(q), reported as limit_ratio next to the value at the smallest p.
    '''
    grid = np.asarray(list(p_grid), dtype=float)
    if grid.size == 0:
        raise ParameterError("p grid must not be empty.")
    if np.any(grid <= 0) or np.any(grid >= r):
        raise ParameterError(f"p grid must lie in (0, r) = (0, {r}).")
    log_r = log_a_pq(r, q)
    a_values = np.array([a_pq(p, q) for p in grid])
    ratios = np.array([np.exp(log_r - log_a_pq(p, q)) for p in grid])
    table = pd.DataFrame({'p': grid, 'a_pq': a_values, 'ratio': ratios})
    k = int(np.argmax(ratios))
    smallest = int(np.argmin(grid))
    return UniformBoundScan(
        max_ratio=float(ratios[k]),
        argmax_p=float(grid[k]),
        endpoint_ratio=float(ratios[smallest]),
        limit_ratio=float(np.exp(log_r) / a_pq_limit(q)),
        table=table,
    )
