# Hilbert transforms of interval indicators and the functions
#   F_n(x) = sum_{k=1}^n | log | (x - (k-1)/n) / (x - k/n) | |,
# whose minimum over [0,1] is log(2n - 1): the weak-L1 quasi-norms of F_n are unbounded.

import sys
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import integrate

from lattice_errors import ParameterError, ResolutionError, SingularityError
from seeding import derive_rng, map_ordered

LEMMA_TOLERANCE = 1e-10
CELLS_PER_N = 16
REFINEMENT = 100
GRID_CHUNK = 8192
NODE_CLEARANCE = 1e-12


### Hilbert transform of indicators ###

def _check_interval(a, b):
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise ParameterError(f"Need a finite interval with a < b. Got: [{a}, {b}]")


def hilbert_indicator(a, b, x):
    '''
    Principal value of int I_[a,b](t) / (x - t) dt = log |(x - a) / (x - b)|.
    '''
    _check_interval(a, b)
    if x == a or x == b:
        raise SingularityError(f"H[I_[{a},{b}]] is singular at x = {x}.", x)
    return float(np.log(abs(x - a)) - np.log(abs(x - b)))


def hilbert_indicator_quadrature(a, b, x, method='cauchy', eps=1e-6):
    '''
    Numeric principal value, independent of the closed form.
        method='cauchy':   scipy quad with weight='cauchy' when x lies inside (a, b)
        method='excision': integrate over [a, b] minus (x - eps, x + eps)
    '''
    _check_interval(a, b)
    if x == a or x == b:
        raise SingularityError(f"H[I_[{a},{b}]] is singular at x = {x}.", x)
    if not a < x < b:
        value, _ = integrate.quad(lambda t: 1.0 / (x - t), a, b, limit=200)
        return float(value)
    if method == 'cauchy':
        # quad computes p.v. int f(t) / (t - x) dt
        value, _ = integrate.quad(lambda t: -1.0, a, b, weight='cauchy', wvar=x)
        return float(value)
    if method == 'excision':
        eps = min(eps, (x - a) / 2.0, (b - x) / 2.0)
        left, _ = integrate.quad(lambda t: 1.0 / (x - t), a, x - eps, limit=200)
        right, _ = integrate.quad(lambda t: 1.0 / (x - t), x + eps, b, limit=200)
        return float(left + right)
    raise ValueError(f"Unknown quadrature method '{method}'. Expected 'cauchy' or 'excision'.")


### F_n ###

def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be a positive integer. Got: {n!r}")


def _nodes(n):
    return np.arange(n + 1) / n


def _f_n_values(n, xs):
    # log|x - k/n| for all nodes, then the telescoping differences term by term
    logs = np.log(np.abs(xs[:, None] - _nodes(n)[None, :]))
    return np.abs(logs[:, :-1] - logs[:, 1:]).sum(axis=1)


def F_n(n, x):
    '''
    Direct sum of the n absolute log terms. x must avoid the nodes k/n, k = 0..n.
    Accepts a scalar or an array of points.
    '''
    _check_n(n)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    hits = np.isin(xs, _nodes(n))
    if np.any(hits):
        point = float(xs[np.argmax(hits)])
        raise SingularityError(f"F_{n} is singular at x = {point} (a node k/n).", point)
    values = _f_n_values(n, xs)
    return float(values[0]) if np.ndim(x) == 0 else values


def f_n_piecewise(n, x):
    '''
    Closed form of F_n by branches: with m/n the node nearest to x,
        F_n(x) = log( |x| |1 - x| / (x - m/n)^2 ).
    The outer branches are log((1 - x) / x) for x < 1/(2n) and log(x / (1 - x)) for x >= (2n-1)/(2n).
    '''
    _check_n(n)
    x = float(x)
    if x in _nodes(n):
        raise SingularityError(f"F_{n} is singular at x = {x} (a node k/n).", x)
    if x < 1.0 / (2 * n):
        return float(np.log(abs(1.0 - x) / abs(x)))
    if x >= (2 * n - 1) / (2.0 * n):
        return float(np.log(abs(x) / abs(1.0 - x)))
    m = int(np.clip(np.floor(x * n + 0.5), 0, n))
    return float(np.log(abs(x) * abs(1.0 - x) / (x - m / n) ** 2))


### Lemma checks ###

@dataclass
class LemmaReport:
    n: int
    symmetry: bool
    unimodal: bool
    minima_ordered: bool
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.symmetry and self.unimodal and self.minima_ordered

    def to_dict(self):
        return {'n': self.n, 'symmetry': self.symmetry, 'unimodal': self.unimodal,
                'minima_ordered': self.minima_ordered, 'passed': self.passed, 'details': dict(self.details)}


def _close(a, b, tol):
    return np.abs(a - b) <= tol * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def f_n_lemma_check(n, pairs=1000, samples_per_cell=64, seed=0, tol=LEMMA_TOLERANCE):
    '''
    Checks on [0,1]:
        (i)   F_n(x) = F_n(1 - x) at `pairs` random points
        (ii)  on each cell (k/n, (k+1)/n) F_n decreases up to the midpoint (2k+1)/(2n),
              increases after it, and is smallest there
        (iii) the cell minima F_n((2k-1)/(2n)) are nondecreasing for k <= ceil(n/2)
    '''
    _check_n(n)
    nodes = _nodes(n)

    ### (i) symmetry ###
    rng = derive_rng(seed, 'lemma-symmetry', n)
    xs = rng.uniform(0.0, 1.0, pairs)
    gap = np.min(np.abs(xs[:, None] - nodes[None, :]), axis=1)
    xs = xs[gap > 1e-6]
    left, right = _f_n_values(n, xs), _f_n_values(n, 1.0 - xs)
    symmetric = _close(left, right, tol)
    symmetry_gap = float(np.max(np.abs(left - right))) if xs.size else 0.0

    ### (ii) unimodality per cell ###
    half = samples_per_cell // 2
    offsets = (np.arange(samples_per_cell) + 0.5) / (samples_per_cell * n)
    unimodal = True
    bad_cell = None
    for k in range(n):
        points = k / n + offsets
        values = _f_n_values(n, points)
        diffs = np.diff(values)
        centre = _f_n_values(n, np.array([(2 * k + 1) / (2.0 * n)]))[0]
        ok = (np.all(diffs[:half - 1] < 0) and np.all(diffs[half:] > 0)
              and centre <= values.min() + tol * max(1.0, abs(centre)))
        if not ok:
            unimodal = False
            bad_cell = k
            break

    ### (iii) ordering of the minima ###
    upto = int(np.ceil(n / 2))
    minima = _f_n_values(n, (2 * np.arange(1, upto + 1) - 1) / (2.0 * n))
    steps = np.diff(minima)
    ordered = bool(np.all(steps >= -tol * np.maximum(1.0, np.abs(minima[1:])))) if steps.size else True

    details = {
        'pairs_checked': int(xs.size),
        'max_symmetry_gap': symmetry_gap,
        'failed_cell': bad_cell,
        'minima': minima.tolist(),
    }
    return LemmaReport(int(n), bool(np.all(symmetric)), bool(unimodal), ordered, details)


### Grid functions and weak quasi-norms ###

@dataclass(frozen=True, eq=False)
class GridFunction:
    '''
    Step function on [lo, hi]: one value per cell of n_cells equal cells, each of measure
    (hi - lo) / n_cells. Quasi-norms are those of the step function itself. f_n_grid fills
    the cells with midpoint samples; callers may use any other representative per cell
    (e.g. right endpoints), and the norms then describe that step function.
    '''
    lo: float
    hi: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ParameterError("A grid function needs at least one cell value.")
        if not np.all(np.isfinite(values)):
            raise ParameterError("Grid function values must be finite.")
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise ParameterError(f"Need a finite domain lo < hi. Got: [{self.lo}, {self.hi}]")
        object.__setattr__(self, 'values', values)

    @property
    def n_cells(self):
        return self.values.size

    @property
    def cell_width(self):
        return (self.hi - self.lo) / self.n_cells

    def midpoints(self):
        return midpoints(self.lo, self.hi, self.n_cells)

    def scaled(self, lam):
        return GridFunction(self.lo, self.hi, lam * self.values)


def midpoints(lo, hi, cells):
    return lo + (np.arange(cells) + 0.5) * ((hi - lo) / cells)


def weak_lp_norm(f, p=1.0):
    '''
    sup_{t>0} t * mu{|f| > t}^(1/p), exact on the grid:
    with the decreasing rearrangement v_(1) >= v_(2) >= ..., the value is max_j v_(j) (j * width)^(1/p).
    '''
    if not isinstance(f, GridFunction):
        raise TypeError("weak_lp_norm expects a GridFunction.")
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not p > 0:
        raise ParameterError(f"p must be > 0. Got: {p!r}")
    ordered = np.sort(np.abs(f.values))[::-1]
    measure = np.arange(1, ordered.size + 1) * f.cell_width
    return float(np.max(ordered * np.power(measure, 1.0 / p)))


def weak_l1_norm(f):
    return weak_lp_norm(f, 1.0)


def _clear_of_nodes(n, lo, hi, cells):
    mids = midpoints(lo, hi, cells)
    return float(np.min(np.abs(mids[:, None] - _nodes(n)[None, :]))) > NODE_CLEARANCE


def _evaluate_grid(n, points, threads):
    chunks = [points[i:i + GRID_CHUNK] for i in range(0, points.size, GRID_CHUNK)]
    return np.concatenate(map_ordered(lambda chunk: _f_n_values(n, chunk), chunks, threads))


def f_n_grid(n, cells, lo=0.0, hi=1.0, threads=1):
    '''
    F_n sampled at cell midpoints of [lo, hi]. The cell count is increased until
    no midpoint falls on a node k/n (e.g. 10000 cells become 10048 for n = 64).
    '''
    _check_n(n)
    if isinstance(cells, bool) or not isinstance(cells, (int, np.integer)) or cells < 1:
        raise ParameterError(f"cells must be a positive integer. Got: {cells!r}")
    cells = int(cells)
    while not _clear_of_nodes(n, lo, hi, cells):
        cells += 1
    values = _evaluate_grid(n, midpoints(lo, hi, cells), threads)
    return GridFunction(float(lo), float(hi), values)


def refined_minimum(n, grid=None, cells=10001, threads=1):
    '''
    Minimum of F_n over [0,1]: the grid minimum, then a 100x finer grid
    within 1/n of the grid argmin.
    '''
    _check_n(n)
    if grid is None:
        grid = f_n_grid(n, cells, threads=threads)
    x0 = grid.midpoints()[int(np.argmin(grid.values))]
    lo, hi = max(grid.lo, x0 - 1.0 / n), min(grid.hi, x0 + 1.0 / n)
    local = max(int(np.ceil((hi - lo) / grid.cell_width)) * REFINEMENT, 1)
    while not _clear_of_nodes(n, lo, hi, local):
        local += 1
    fine = _evaluate_grid(n, midpoints(lo, hi, local), threads)
    return float(min(grid.values.min(), fine.min()))


def divergence_table(n_list, cells=10001, threads=1, verbose=False):
    '''
    One row per n: refined grid minimum of F_n on [0,1], log(2n - 1) and the grid weak-L1 norm.
    Returns a DataFrame with columns n, grid_min, log_2n_minus_1, weak_l1_lb, cells_used.
    '''
    n_list = list(n_list)
    if not n_list:
        raise ParameterError("n list must not be empty.")
    for n in n_list:
        _check_n(n)
    if cells < CELLS_PER_N * max(n_list):
        raise ResolutionError(
            f"cells = {cells} is too coarse for n = {max(n_list)}; need at least {CELLS_PER_N * max(n_list)}."
        )

    rows = []
    for n in n_list:
        grid = f_n_grid(n, cells, threads=threads)
        row = {
            'n': int(n),
            'grid_min': refined_minimum(n, grid, threads=threads),
            'log_2n_minus_1': float(np.log(2 * n - 1)),
            'weak_l1_lb': weak_l1_norm(grid),
            'cells_used': grid.n_cells,
        }
        rows.append(row)
        if verbose:
            print(f"F_{n}: min {row['grid_min']:.10g}, log(2n-1) {row['log_2n_minus_1']:.10g}, "
                  f"weak-L1 {row['weak_l1_lb']:.10g}", file=sys.stderr)
    return pd.DataFrame(rows, columns=['n', 'grid_min', 'log_2n_minus_1', 'weak_l1_lb', 'cells_used'])
