# Two-sided estimates of free p-convex lattice norms over a finite-dimensional space E:
#   lower bounds from the sup-formula over admissible functional tuples,
#   upper bounds from domination certificates |f| <= sum_k |delta_{e_k}|.

import itertools
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

import lattice_expr as le
from lattice_errors import (CertificateRejectedError, ContractError, DimensionError,
                            ParameterError, PropertyCheckError)
from quasi_lattice import CoordinateLattice, _norms, quasi_norm
from seeding import derive_rng, map_ordered

BRACKET_TOLERANCE = 1e-9
MAX_SIGN_ROWS = 20
NUMERIC_RESTARTS = 32
STEP_TOLERANCE = 1e-8
NUMERIC_SEARCH = 'Nelder-Mead restarts over R^d (no projected ascent on the sphere), capped at the certified bound'


### Spaces and functionals ###

@dataclass(frozen=True)
class SpaceSpec:
    '''
    E = R^d whose unit ball is the unit ball of a weighted l_r quasi-norm.
    r = 1, 2, inf with unit weights are the l_1, l_2, l_inf balls.
    '''
    lattice: CoordinateLattice

    @classmethod
    def lp(cls, r, d, weights=None):
        return cls(CoordinateLattice.weighted_lr(r, d, weights))

    @property
    def dimension(self):
        return self.lattice.dimension

    @property
    def exponent(self):
        return self.lattice.exponent

    @property
    def ball_type(self):
        r = self.exponent
        unit = all(w == 1.0 for w in self.lattice.weights)
        if unit and r in (1.0, 2.0):
            return f"l{int(r)}"
        if np.isinf(r):
            return 'linf'
        return 'weighted-lr'

    def describe(self):
        r = 'inf' if np.isinf(self.exponent) else f"{self.exponent:g}"
        return f"lp:{r}:{self.dimension}"

    def norm(self, x):
        return quasi_norm(self.lattice, x)


def dual_norm(space, t):
    '''
    sup over the unit ball of |t . x|, along the last axis of t.
    For r < 1 the ball's convex hull is spanned by the scaled unit vectors.
    '''
    t = np.abs(np.asarray(t, dtype=float))
    r = space.exponent
    w = space.lattice.w
    if np.isinf(r):
        return t.sum(axis=-1)
    if r <= 1:
        return (t * w ** (-1.0 / r)).max(axis=-1)
    conjugate = r / (r - 1.0)
    return np.power(np.sum(np.power(t * w ** (-1.0 / r), conjugate), axis=-1), 1.0 / conjugate)


def norming_functional(space, x):
    '''
    Functional t with dual_norm(t) = 1 and t . x as large as possible
    (equal to ||x|| when the quasi-norm is a norm).
    '''
    x = np.asarray(x, dtype=float)
    t = np.zeros_like(x)
    if not np.any(x):
        return t
    r = space.exponent
    w = space.lattice.w
    if np.isinf(r):
        j = int(np.argmax(np.abs(x)))
        t[j] = np.sign(x[j])
    elif r == 1:
        t = np.sign(x) * w
    elif r < 1:
        j = int(np.argmax(np.abs(x) * w ** (1.0 / r)))
        t[j] = np.sign(x[j]) * w[j] ** (1.0 / r)
    else:
        t = w * np.sign(x) * np.power(np.abs(x) / space.norm(x), r - 1.0)
    scale = dual_norm(space, t)
    return t / scale if scale > 0 else t


@dataclass(frozen=True, eq=False)
class FunctionalTuple:
    '''
    n x d matrix; row i is the functional x_i^* on R^d.
    '''
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim == 1:
            m = m[None, :]
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DimensionError(f"Functional tuple must be an (n, d) matrix with n >= 1. Got shape: {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ParameterError("Functional tuple entries must be finite.")
        object.__setattr__(self, 'matrix', m)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def width(self):
        return self.matrix.shape[1]

    def scaled(self, c):
        return FunctionalTuple(c * self.matrix)

    def to_list(self):
        return self.matrix.tolist()


def _check_p(p):
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not (0 < p <= 1):
        raise ParameterError(f"p must be in (0, 1]. Got: {p!r}")


def _as_matrix(t, space):
    m = t.matrix if isinstance(t, FunctionalTuple) else FunctionalTuple(t).matrix
    if m.shape[1] != space.dimension:
        raise DimensionError(f"Functional tuple has width {m.shape[1]}, space has dimension {space.dimension}.")
    return m


### Admissibility ###

@dataclass
class Admissibility:
    '''
    value:       sup over B_E of sum_i |x_i^*(x)|^p (an estimate when exact is False)
    method:      'columns' | 'single' | 'signs' | 'numeric'
    exact:       whether value is the exact supremum
    upper_bound: certified upper bound (equal to value when exact)
    '''
    value: float
    method: str
    exact: bool
    upper_bound: float


def admissibility_method(space, p, n):
    if space.exponent <= p:
        return 'columns'
    if n == 1:
        return 'single'
    if p == 1 and n <= MAX_SIGN_ROWS:
        return 'signs'
    return 'numeric'


def _columns(space, p, T):
    # r <= p: sum_i |t_i . x|^p <= sum_j (sum_i |t_ij|^p) |x_j|^p, attained at unit vectors
    r = space.exponent
    weight = space.lattice.w ** (-p / r)
    return (np.power(np.abs(T), p).sum(axis=-2) * weight).max(axis=-1)


def _single(space, p, T):
    return np.power(dual_norm(space, T[..., 0, :]), p)


def _sign_patterns(n):
    # first sign fixed to +1: the objective is even in the whole pattern
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1))).reshape(-1, n - 1)
    return np.hstack([np.ones((rest.shape[0], 1)), rest])


def _signs(space, T):
    # p = 1: sum_i |t_i . x| = max_s (sum_i s_i t_i) . x, so the sup is max_s ||sum_i s_i t_i||_*
    n = T.shape[-2]
    patterns = _sign_patterns(n)
    best = None
    for start in range(0, patterns.shape[0], 4096):
        block = patterns[start:start + 4096]
        combos = np.einsum('sn,...nd->...sd', block, T)
        value = dual_norm(space, combos).max(axis=-1)
        best = value if best is None else np.maximum(best, value)
    return best


def _certified_bound(space, p, T):
    bound = np.power(dual_norm(space, T), p).sum(axis=-1)
    n = T.shape[-2]
    if n <= MAX_SIGN_ROWS:
        # Hoelder: sum_i |y_i|^p <= n^(1-p) (sum_i |y_i|)^p
        bound = np.minimum(bound, n ** (1.0 - p) * np.power(_signs(space, T), p))
    return bound


def _numeric(space, p, T, seed, restarts=NUMERIC_RESTARTS):
    d = space.dimension

    def ratio(x):
        nx = float(_norms(space.lattice, x))
        if nx == 0:
            return 0.0
        return float(np.sum(np.power(np.abs(T @ x), p)) / nx ** p)

    rng = derive_rng(seed, 'admissibility')
    starts = list(np.eye(d)) + list(T) + list(np.sign(T))
    starts += list(rng.standard_normal((restarts, d)))
    best = 0.0
    for x0 in starts:
        if not np.any(x0):
            continue
        best = max(best, ratio(x0))
        result = minimize(lambda x: -ratio(x), x0, method='Nelder-Mead',
                          options={'xatol': 1e-10, 'fatol': 1e-13, 'maxiter': 400 * d})
        best = max(best, -float(result.fun))
    return best


def admissibility_details(t, space, p, seed=0):
    '''
    Compute sup_{x in B_E} sum_i |x_i^*(x)|^p for the tuple t together with how it was obtained.
    Exact methods: 'columns' (ball exponent r <= p), 'single' (one functional),
    'signs' (p = 1, at most 20 functionals). Otherwise a restarted numeric search
    gives an estimate and the certified upper bound is reported alongside.
    '''
    _check_p(p)
    T = _as_matrix(t, space)
    method = admissibility_method(space, p, T.shape[0])
    if method == 'columns':
        value = float(_columns(space, p, T))
    elif method == 'single':
        value = float(_single(space, p, T))
    elif method == 'signs':
        value = float(_signs(space, T))
    else:
        bound = float(_certified_bound(space, p, T))
        estimate = min(_numeric(space, p, T, seed), bound)
        return Admissibility(estimate, method, False, bound)
    return Admissibility(value, method, True, value)


def admissibility_flags(method):
    '''
    Bracket flags describing how admissibility was obtained for the lower-bound tuple.
    '''
    flags = {
        'admissibility': 'exact' if method != 'numeric' else 'certified-bound',
        'admissibility_method': method,
    }
    if method == 'numeric':
        flags['admissibility_search'] = NUMERIC_SEARCH
    return flags


def admissibility(t, space, p):
    '''
    sup over the unit ball of sum_i |x_i^*(x)|^p. Exact except for the 'numeric' method
    (p < 1 with ball exponent r > p and several functionals), where it is a lower-confidence estimate.
    '''
    return admissibility_details(t, space, p).value


def _normalizer(space, p, T):
    # exact value when available, else the certified upper bound (keeps lower bounds valid)
    method = admissibility_method(space, p, T.shape[-2])
    if method == 'columns':
        return _columns(space, p, T), True
    if method == 'single':
        return _single(space, p, T), True
    if method == 'signs':
        return _signs(space, T), True
    return _certified_bound(space, p, T), False


def _objective(expr, space, p, T):
    values = le.evaluate_rows(expr, T)
    numerator = np.power(np.sum(np.power(np.abs(values), p), axis=-1), 1.0 / p)
    adm, _ = _normalizer(space, p, T)
    adm = np.asarray(adm, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        result = np.where(adm > 0, numerator / np.power(np.where(adm > 0, adm, 1.0), 1.0 / p), 0.0)
    return result


def tuple_objective(f, space, p, t):
    '''
    (sum_i |f(x_i^*)|^p)^(1/p) divided by admissibility^(1/p): the value the tuple certifies.
    Invariant under scaling the tuple by t > 0.
    '''
    _check_p(p)
    return float(_objective(f, space, p, _as_matrix(t, space)))


### Lower bound ###

@dataclass(frozen=True)
class SearchBudget:
    n_max: int = 8
    restarts: int = 32
    iters: int = 200

    def __post_init__(self):
        for name in ('n_max', 'restarts', 'iters'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ParameterError(f"Budget {name} must be a positive integer. Got: {value!r}")


def _check_generators(f, space):
    for index in le.generators(f):
        if index >= space.dimension:
            raise DimensionError(f"Generator {index} is out of range for dimension {space.dimension}.")


def _check_homogeneous(f, space, seed):
    rng = derive_rng(seed, 'homogeneity')
    T = rng.standard_normal((4, space.dimension))
    lam = 2.5
    scaled = le.evaluate_rows(f, lam * T)
    plain = le.evaluate_rows(f, T)
    if not np.allclose(scaled, lam * plain, rtol=1e-9, atol=1e-12):
        raise ContractError("Expression is not positively homogeneous of degree 1.")


def _ascend(expr, space, p, T0, iters):
    '''
    Steepest coordinate ascent: all single-entry moves of +-step are evaluated in one batch;
    the best improving move is taken, otherwise the step is halved.
    '''
    T = np.array(T0, dtype=float)
    peak = np.abs(T).max()
    if peak == 0:
        return 0.0, T
    T = T / peak
    best = float(_objective(expr, space, p, T))
    n, d = T.shape
    step = 0.25
    offsets = np.zeros((2 * n * d, n, d))
    for k in range(n * d):
        offsets[2 * k].flat[k] = 1.0
        offsets[2 * k + 1].flat[k] = -1.0

    for _ in range(iters):
        candidates = T[None] + step * offsets
        values = _objective(expr, space, p, candidates)
        k = int(np.argmax(values))
        if values[k] > best + 1e-14 * max(best, 1.0):
            best = float(values[k])
            T = candidates[k]
            # objective is scale invariant: renormalise the tuple
            T = T / np.abs(T).max()
        else:
            step /= 2.0
            if step < STEP_TOLERANCE:
                break
    return best, T


def _structured_starts(f, space, n_max):
    d = space.dimension
    starts = []
    vectors = le.domination_certificate(f, d) + [np.eye(d)[i] for i in le.generators(f)]
    for v in vectors:
        t = norming_functional(space, v)
        if np.any(t):
            starts.append(t[None, :])
    if d <= n_max:
        starts.append(np.eye(d))
    starts.append(np.ones((1, d)))
    return starts


def fbl_lower(f, space, p, budget=None, seed=0, threads=1, verbose=False):
    '''
    Best found value of (sum_i |f(x_i^*)|^p)^(1/p) over tuples with admissibility <= 1,
    searching tuples of at most budget.n_max functionals.

    Returns:
        (value, FunctionalTuple) with the tuple normalised to admissibility <= 1
    '''
    _check_p(p)
    budget = budget or SearchBudget()
    _check_generators(f, space)
    _check_homogeneous(f, space, seed)

    starts = _structured_starts(f, space, budget.n_max)
    for k in range(budget.restarts):
        rng = derive_rng(seed, 'fbl-restart', k)
        n = int(rng.integers(1, budget.n_max + 1))
        starts.append(rng.standard_normal((n, space.dimension)))

    results = map_ordered(lambda T: _ascend(f, space, p, T, budget.iters), starts, threads)

    # deterministic merge: highest value, earliest start on ties
    best_index = 0
    for i, (value, _) in enumerate(results):
        if value > results[best_index][0]:
            best_index = i
    value, T = results[best_index]

    adm, _ = _normalizer(space, p, T)
    adm = float(adm)
    if adm > 0:
        T = T / adm ** (1.0 / p)
    if verbose:
        print(f"fbl_lower: {value:.12g} from start {best_index} of {len(starts)} ({T.shape[0]} functionals)",
              file=sys.stderr)
    return float(value), FunctionalTuple(T)


### Upper bound ###

def _probe_functionals(d, check_points, seed):
    rng = derive_rng(seed, 'domination-probes')
    eye = np.eye(d)
    gaussian = rng.standard_normal((check_points, d))
    signs = rng.choice((-1.0, 1.0), size=(max(check_points // 4, 1), d))
    u = rng.uniform(1e-3, 1.0, size=(max(check_points // 4, 1), d))
    heavy = np.where(rng.random(u.shape) < 0.5, u, 1.0 / u) * rng.choice((-1.0, 1.0), size=u.shape)
    return np.vstack([eye, -eye, gaussian, signs, heavy])


def _certificate_value(space, p, vectors):
    norms = [space.norm(v) for v in vectors]
    if len(norms) == 1:
        return norms[0]
    return float(np.power(np.sum(np.power(norms, p)), 1.0 / p))


def fpbl_upper(f, space, p, certificate, check_points=1000, seed=0):
    '''
    Verify the domination |f(x^*)| <= sum_k |x^*(e_k)| at probe functionals
    (coordinate functionals, Gaussian, sign patterns, heavy-tailed) and return
    (sum_k ||e_k||^p)^(1/p), an upper bound for the norm of f.
    Raises CertificateRejectedError with the witness functional on a violation.
    '''
    _check_p(p)
    _check_generators(f, space)
    vectors = [np.asarray(v, dtype=float) for v in (certificate if certificate is not None else [])]
    if not vectors:
        raise ParameterError("Certificate must contain at least one vector.")
    for v in vectors:
        if v.shape != (space.dimension,):
            raise DimensionError(f"Certificate vectors must have dimension {space.dimension}. Got shape: {v.shape}")
    if isinstance(check_points, bool) or not isinstance(check_points, (int, np.integer)) or check_points < 1:
        raise ParameterError(f"check_points must be a positive integer. Got: {check_points!r}")

    probes = _probe_functionals(space.dimension, check_points, seed)
    lhs = np.abs(le.evaluate_rows(f, probes))
    rhs = np.abs(probes @ np.array(vectors).T).sum(axis=1)
    slack = rhs + 1e-9 * (1.0 + rhs + lhs) - lhs
    bad = np.flatnonzero(slack < 0)
    if bad.size:
        i = int(bad[0])
        raise CertificateRejectedError(
            f"Domination |f| <= sum |delta_e_k| fails at a probe functional: {lhs[i]:.6g} > {rhs[i]:.6g}",
            witness=probes[i].tolist(),
        )
    return _certificate_value(space, p, vectors)


### Bracket ###

@dataclass
class NormBracket:
    lower: float
    upper: float
    lower_certificate: FunctionalTuple
    upper_certificate: list
    p: float
    flags: dict = field(default_factory=dict)

    def contains(self, value, tol=BRACKET_TOLERANCE):
        return self.lower - tol <= value <= self.upper + tol

    def to_dict(self):
        return {
            'lower': self.lower,
            'upper': self.upper,
            'p': self.p,
            'certificates': {
                'lower': self.lower_certificate.to_list(),
                'upper': [np.asarray(v).tolist() for v in self.upper_certificate],
            },
            'flags': dict(self.flags),
        }


def norm_bracket(f, space, p, budget=None, seed=0, certificate=None, check_points=1000, threads=1):
    '''
    Certified interval [lower, upper] for the free norm of f.
    The upper side is the best accepted certificate among the structural one,
    the diagonal one and an optional user certificate.
    '''
    _check_p(p)
    budget = budget or SearchBudget()
    lower, lower_tuple = fbl_lower(f, space, p, budget, seed, threads)

    d = space.dimension
    candidates = [('structural', le.domination_certificate(f, d)),
                  ('diagonal', le.diagonal_certificate(f, d))]
    if certificate is not None:
        candidates.append(('user', [np.asarray(v, dtype=float) for v in certificate]))

    upper, upper_vectors, source = np.inf, None, None
    for name, vectors in candidates:
        try:
            value = fpbl_upper(f, space, p, vectors, check_points, seed)
        except CertificateRejectedError:
            if name == 'user':
                raise
            continue
        # earlier candidates win ties and last-bit differences
        if value < upper * (1.0 - 1e-12):
            upper, upper_vectors, source = value, vectors, name
    if upper_vectors is None:
        raise PropertyCheckError("No domination certificate was accepted.", witness=le.to_prefix(f))

    method = admissibility_method(space, p, lower_tuple.n)
    flags = {
        **admissibility_flags(method),
        'ball': space.ball_type,
        'upper_source': source,
        'probes': int(2 * d + check_points + 2 * max(check_points // 4, 1)),
        'n_max': budget.n_max,
        'lower_is_truncated_sup': True,
    }
    if lower > upper + BRACKET_TOLERANCE:
        raise PropertyCheckError(
            f"Bracket invariant violated: lower {lower!r} > upper {upper!r}",
            witness={'lower_certificate': lower_tuple.to_list()},
        )
    return NormBracket(lower, upper, lower_tuple, upper_vectors, float(p), flags)
