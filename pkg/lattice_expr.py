# Lattice-linear expressions over formal generators delta_{e_i}:
# tree construction, scalar / coordinatewise evaluation, and structural domination certificates.

from dataclasses import dataclass
from numbers import Real

import numpy as np

from lattice_errors import DimensionError, ParameterError, UnassignedGeneratorError

KINDS = ('gen', 'scale', 'add', 'max', 'min', 'abs', 'pos', 'psum')
_ARITY = {'gen': 0, 'scale': 1, 'add': 2, 'max': 2, 'min': 2, 'abs': 1, 'pos': 1}


@dataclass(frozen=True, eq=False)
class LatticeExpr:
    '''
    Immutable expression node.
        kind:     one of KINDS
        children: child nodes (shared subtrees are fine)
        index:    generator index for kind 'gen'
        value:    scalar for 'scale', exponent s > 0 for 'psum'
    Nodes compare by identity; equality of expressions is only ever tested by evaluation.
    '''
    kind: str
    children: tuple = ()
    index: int = None
    value: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"Unknown expression kind '{self.kind}'. Expected one of {KINDS}.")
        if not all(isinstance(c, LatticeExpr) for c in self.children):
            raise TypeError("Expression children must be LatticeExpr nodes.")
        if self.kind == 'psum':
            if len(self.children) < 1:
                raise ParameterError("psum needs at least one term.")
            _check_exponent(self.value)
        elif len(self.children) != _ARITY[self.kind]:
            raise ParameterError(
                f"'{self.kind}' takes {_ARITY[self.kind]} children. Got: {len(self.children)}"
            )
        if self.kind == 'gen':
            if isinstance(self.index, bool) or not isinstance(self.index, (int, np.integer)) or self.index < 0:
                raise ParameterError(f"Generator index must be a non-negative integer. Got: {self.index!r}")
        if self.kind == 'scale':
            if not isinstance(self.value, Real) or not np.isfinite(self.value):
                raise ParameterError(f"Scale factor must be a finite real number. Got: {self.value!r}")

    # Operator sugar: + - * abs | (join) & (meet)
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return scale(-1.0, self)

    def __rmul__(self, c):
        return scale(c, self)

    def __abs__(self):
        return modulus(self)

    def __or__(self, other):
        return join(self, other)

    def __and__(self, other):
        return meet(self, other)

    def __repr__(self):
        return f"LatticeExpr{to_prefix(self)}"


def _check_exponent(s):
    if isinstance(s, bool) or not isinstance(s, Real) or not np.isfinite(s) or s <= 0:
        raise ParameterError(f"Power-sum exponent must be a finite number > 0. Got: {s!r}")


### Constructors ###

def gen(index):
    return LatticeExpr('gen', index=int(index) if isinstance(index, np.integer) else index)


def scale(c, expr):
    return LatticeExpr('scale', (expr,), value=float(c) if isinstance(c, Real) else c)


def add(*terms):
    if not terms:
        raise ParameterError("add needs at least one term.")
    result = terms[0]
    for term in terms[1:]:
        result = LatticeExpr('add', (result, term))
    return result


def sub(a, b):
    return add(a, scale(-1.0, b))


def join(*terms):
    if not terms:
        raise ParameterError("max needs at least one term.")
    result = terms[0]
    for term in terms[1:]:
        result = LatticeExpr('max', (result, term))
    return result


def meet(*terms):
    if not terms:
        raise ParameterError("min needs at least one term.")
    result = terms[0]
    for term in terms[1:]:
        result = LatticeExpr('min', (result, term))
    return result


def modulus(expr):
    return LatticeExpr('abs', (expr,))


def positive_part(expr):
    return LatticeExpr('pos', (expr,))


def power_sum(terms, s):
    '''
    (sum_k |term_k|^s)^(1/s), the Krivine-calculus node. Any s > 0 is allowed.
    '''
    return LatticeExpr('psum', tuple(terms), value=float(s) if isinstance(s, Real) else s)


def delta(vector):
    '''
    delta_x for a vector x of E, written as sum_j x_j * delta_{e_j}.
    '''
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.size == 0:
        raise DimensionError("delta needs a non-empty 1-D vector.")
    return add(*[scale(float(c), gen(j)) for j, c in enumerate(vector)])


### Traversal helpers ###

def _walk(expr):
    seen = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(node.children)


def generators(expr):
    '''
    Sorted tuple of generator indices occurring in the expression.
    '''
    return tuple(sorted({node.index for node in _walk(expr) if node.kind == 'gen'}))


def size(expr):
    return sum(1 for _ in _walk(expr))


### Evaluation ###

def _evaluate(expr, values, memo):
    key = id(expr)
    if key in memo:
        return memo[key]

    kind = expr.kind
    if kind == 'gen':
        try:
            result = values[expr.index]
        except KeyError:
            raise UnassignedGeneratorError(expr.index) from None
    elif kind == 'scale':
        result = expr.value * _evaluate(expr.children[0], values, memo)
    elif kind == 'add':
        result = _evaluate(expr.children[0], values, memo) + _evaluate(expr.children[1], values, memo)
    elif kind == 'max':
        result = np.maximum(_evaluate(expr.children[0], values, memo), _evaluate(expr.children[1], values, memo))
    elif kind == 'min':
        result = np.minimum(_evaluate(expr.children[0], values, memo), _evaluate(expr.children[1], values, memo))
    elif kind == 'abs':
        result = np.abs(_evaluate(expr.children[0], values, memo))
    elif kind == 'pos':
        result = np.maximum(_evaluate(expr.children[0], values, memo), 0.0)
    else:
        s = expr.value
        _check_exponent(s)
        total = np.power(np.abs(_evaluate(expr.children[0], values, memo)), s)
        for child in expr.children[1:]:
            total = total + np.power(np.abs(_evaluate(child, values, memo)), s)
        result = np.power(total, 1.0 / s)

    memo[key] = result
    return result


def _as_mapping(assignment):
    if isinstance(assignment, dict):
        return assignment
    if isinstance(assignment, (list, tuple, np.ndarray)):
        return dict(enumerate(assignment))
    raise TypeError("Assignment must be a dict {generator index: value} or a sequence.")


def evaluate_scalar(expr, assignment):
    '''
    Value of the expression when generator i takes the real value assignment[i].
    + is addition, max/min are the lattice operations, |.| the modulus, [.]+ = max(., 0)
    and psum is computed literally with 0^s = 0.
    '''
    assignment = _as_mapping(assignment)
    values = {}
    for index in generators(expr):
        if index not in assignment:
            raise UnassignedGeneratorError(index)
        values[index] = np.array([float(assignment[index])])
    return float(_evaluate(expr, values, {})[0])


def evaluate_lattice(expr, assignment, lattice=None):
    '''
    Coordinatewise (Krivine) evaluation: every assigned value is an element of one
    coordinate lattice and result[j] = evaluate_scalar(expr, {i: a[i][j]}).
    The same floating operations as evaluate_scalar are used, coordinate by coordinate.
    '''
    assignment = _as_mapping(assignment)
    values = {}
    shape = None
    for index in generators(expr):
        if index not in assignment:
            raise UnassignedGeneratorError(index)
        element = np.array(assignment[index], dtype=float)
        if element.ndim != 1:
            raise DimensionError(f"Lattice element for generator {index} must be a 1-D vector.")
        if shape is None:
            shape = element.shape
        elif element.shape != shape:
            raise DimensionError(
                f"Assigned elements live in different lattices: dimensions {shape[0]} and {element.shape[0]}."
            )
        values[index] = element
    if lattice is not None and shape[0] != lattice.dimension:
        raise DimensionError(f"Elements have dimension {shape[0]}, lattice has dimension {lattice.dimension}.")
    return _evaluate(expr, values, {})


def evaluate_rows(expr, matrix):
    '''
    Evaluate at every functional of a tuple at once. matrix[..., i] is the value x*(e_i);
    the result has shape matrix.shape[:-1]. Used by the free-norm optimizer.
    '''
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim < 1:
        raise DimensionError("Functional matrix must have at least one axis.")
    width = matrix.shape[-1]
    values = {}
    for index in generators(expr):
        if index >= width:
            raise DimensionError(f"Generator {index} is out of range for dimension {width}.")
        values[index] = matrix[..., index]
    return _evaluate(expr, values, {})


def scale_expr(expr, lam):
    '''
    Expression equal to lam * expr. Only lam >= 0 keeps degree-1 positive homogeneity.
    '''
    if isinstance(lam, bool) or not isinstance(lam, Real) or not np.isfinite(lam):
        raise ParameterError(f"Scale must be a finite real number. Got: {lam!r}")
    if lam < 0:
        raise ParameterError(f"Scale must be >= 0 (positive homogeneity). Got: {lam}")
    return scale(lam, expr)


### Sign and linearity analysis ###

def is_nonnegative(expr):
    '''
    Conservative syntactic test: True only if the expression is >= 0 at every assignment.
    '''
    kind = expr.kind
    if kind in ('abs', 'pos', 'psum'):
        return True
    if kind == 'scale':
        return expr.value >= 0 and is_nonnegative(expr.children[0])
    if kind in ('add', 'min'):
        return all(is_nonnegative(c) for c in expr.children)
    if kind == 'max':
        return any(is_nonnegative(c) for c in expr.children)
    return False


def linear_coefficients(expr, dimension):
    '''
    If the expression only uses gen / scale / add it equals delta_v for one vector v; return v.
    Otherwise return None.
    '''
    kind = expr.kind
    if kind == 'gen':
        if expr.index >= dimension:
            raise DimensionError(f"Generator {expr.index} is out of range for dimension {dimension}.")
        v = np.zeros(dimension)
        v[expr.index] = 1.0
        return v
    if kind == 'scale':
        inner = linear_coefficients(expr.children[0], dimension)
        return None if inner is None else expr.value * inner
    if kind == 'add':
        left = linear_coefficients(expr.children[0], dimension)
        if left is None:
            return None
        right = linear_coefficients(expr.children[1], dimension)
        return None if right is None else left + right
    return None


def _flatten_sum(expr, coef=1.0):
    if expr.kind == 'add':
        return _flatten_sum(expr.children[0], coef) + _flatten_sum(expr.children[1], coef)
    if expr.kind == 'scale':
        return _flatten_sum(expr.children[0], coef * expr.value)
    return [(coef, expr)]


def _psum_factor(expr):
    # (sum |a_k|^s)^(1/s) <= m^(1/s - 1) * sum |a_k| for s < 1, <= sum |a_k| for s >= 1
    m = len(expr.children)
    return max(1.0, m ** (1.0 / expr.value - 1.0))


def _structural(expr, dimension):
    coeffs = linear_coefficients(expr, dimension)
    if coeffs is not None:
        return [coeffs]

    kind = expr.kind
    if kind == 'scale':
        return [expr.value * v for v in _structural(expr.children[0], dimension)]
    if kind in ('add', 'max', 'min'):
        return _structural(expr.children[0], dimension) + _structural(expr.children[1], dimension)
    if kind == 'abs':
        return _structural(expr.children[0], dimension)
    if kind == 'pos':
        # [g - h]+ <= |g| whenever h >= 0: drop the terms that can never be positive
        kept = [(c, node) for c, node in _flatten_sum(expr.children[0])
                if not (c <= 0 and is_nonnegative(node))]
        if not kept:
            return [np.zeros(dimension)]
        return _structural(add(*[scale(c, node) for c, node in kept]), dimension)
    factor = _psum_factor(expr)
    vectors = []
    for child in expr.children:
        vectors.extend(factor * v for v in _structural(child, dimension))
    return vectors


def _clean(vectors, dimension):
    nonzero = [np.asarray(v, dtype=float) for v in vectors if np.any(v != 0)]
    return nonzero if nonzero else [np.zeros(dimension)]


def domination_certificate(expr, dimension):
    '''
    Vectors e_1..e_m of R^dimension with |f| <= sum_k |delta_{e_k}| built from the tree shape.
    Linear parts collapse to a single vector, so delta_x gets the certificate [x].
    '''
    for index in generators(expr):
        if index >= dimension:
            raise DimensionError(f"Generator {index} is out of range for dimension {dimension}.")
    return _clean(_structural(expr, dimension), dimension)


def _lipschitz(expr, dimension):
    kind = expr.kind
    if kind == 'gen':
        c = np.zeros(dimension)
        c[expr.index] = 1.0
        return c
    if kind == 'scale':
        return abs(expr.value) * _lipschitz(expr.children[0], dimension)
    if kind == 'add':
        return _lipschitz(expr.children[0], dimension) + _lipschitz(expr.children[1], dimension)
    if kind in ('max', 'min'):
        return np.maximum(_lipschitz(expr.children[0], dimension), _lipschitz(expr.children[1], dimension))
    if kind in ('abs', 'pos'):
        return _lipschitz(expr.children[0], dimension)
    return _psum_factor(expr) * sum(_lipschitz(c, dimension) for c in expr.children)


def diagonal_certificate(expr, dimension):
    '''
    Certificate of coordinate vectors c_i * e_i where |f(t)| <= sum_i c_i |t_i|.
    '''
    for index in generators(expr):
        if index >= dimension:
            raise DimensionError(f"Generator {index} is out of range for dimension {dimension}.")
    weights = _lipschitz(expr, dimension)
    return _clean([w * np.eye(dimension)[i] for i, w in enumerate(weights) if w > 0], dimension)


### Random expressions ###

def random_expression(rng, n_generators, depth=3):
    '''
    Random expression over generators 0..n_generators-1: unary or binary nodes
    while depth remains, generator leaves otherwise. Power-sum exponents are drawn from [0.25, 3].
    '''
    if depth <= 0 or rng.random() < 0.2:
        return gen(int(rng.integers(n_generators)))
    choice = rng.integers(7)
    if choice == 0:
        return scale(float(rng.uniform(-3.0, 3.0)), random_expression(rng, n_generators, depth - 1))
    if choice == 1:
        return modulus(random_expression(rng, n_generators, depth - 1))
    if choice == 2:
        return positive_part(random_expression(rng, n_generators, depth - 1))
    if choice == 6:
        terms = [random_expression(rng, n_generators, depth - 1) for _ in range(int(rng.integers(1, 4)))]
        return power_sum(terms, float(rng.uniform(0.25, 3.0)))
    left = random_expression(rng, n_generators, depth - 1)
    right = random_expression(rng, n_generators, depth - 1)
    return {3: add, 4: join, 5: meet}[int(choice)](left, right)


### Printing ###

def _number(x):
    return repr(float(x))


def to_prefix(expr):
    '''
    Canonical prefix notation; parses back (expr_parser.parse_expr) to an expression
    with identical evaluations.
    '''
    kind = expr.kind
    if kind == 'gen':
        return f"(gen {expr.index})"
    if kind == 'scale':
        return f"(scale {_number(expr.value)} {to_prefix(expr.children[0])})"
    if kind == 'psum':
        terms = ' '.join(to_prefix(c) for c in expr.children)
        return f"(psum {_number(expr.value)} {terms})"
    return '(' + kind + ' ' + ' '.join(to_prefix(c) for c in expr.children) + ')'
