import regex as re
import numpy as np

from free_norm import SearchBudget, SpaceSpec
from lattice_errors import ParameterError
from quasi_lattice import CoordinateLattice

NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
EXPONENT = rf"(?:{NUMBER}|inf)"

LATTICE_PATTERN = re.compile(
    rf"(?P<kind>lpgrid|weightedlr|lp):(?P<exponent>{EXPONENT}):(?P<size>\d+)(?::(?P<weights>[^:]+))?",
    flags=re.IGNORECASE,
)
BUDGET_ITEM = re.compile(r"\s*(?P<key>n|n_max|restarts|iters)\s*=\s*(?P<value>\d+)\s*")
ASSIGNMENT_ITEM = re.compile(rf"\s*(?P<index>\d+)\s*[=:]\s*(?P<value>{NUMBER})\s*")


def _number(text, name):
    text = text.strip()
    if text.lower() == 'inf':
        return float('inf')
    if not re.fullmatch(NUMBER, text):
        raise ParameterError(f"{name}: '{text}' is not a number.")
    return float(text)


###---- Lattices and spaces ----###
def parse_lattice_spec(text):
    '''
    Parse a lattice spec string:
        lpgrid:p:n                 L_p[0,1] on n cells (weights 1/n)
        weightedlr:r:d[:w1,...,wd] weighted l_r on R^d
        lp:r:d                     l_r^d with unit weights (r may be 'inf')
    '''
    if not isinstance(text, str):
        raise TypeError("Lattice spec must be a string.")
    match = LATTICE_PATTERN.fullmatch(text.strip())
    if not match:
        raise ParameterError(
            f"Invalid lattice spec '{text}'. Expected lpgrid:p:n, weightedlr:r:d[:w1,...] or lp:r:d."
        )
    kind = match.group('kind').lower()
    exponent = _number(match.group('exponent'), 'exponent')
    size = int(match.group('size'))
    if kind == 'lpgrid':
        if match.group('weights'):
            raise ParameterError("lpgrid specs take no weights.")
        return CoordinateLattice.lp_grid(exponent, size)
    weights = None
    if match.group('weights'):
        if kind == 'lp':
            raise ParameterError("lp specs take no weights; use weightedlr.")
        weights = tuple(parse_vector(match.group('weights')))
    return CoordinateLattice.weighted_lr(exponent, size, weights)


def parse_space_spec(text):
    '''
    Space E = R^d for the free-norm tools; same syntax as lattice specs, e.g. lp:2:3 or lp:inf:3.
    '''
    return SpaceSpec(parse_lattice_spec(text))


###---- Vectors and lists ----###
def parse_vector(text):
    '''
    "1, -2.5, 3e-1" or "[1, -2.5, 3e-1]" -> float array.
    '''
    if not isinstance(text, str):
        raise TypeError("Vector must be given as a string.")
    body = text.strip()
    if body.startswith('[') and body.endswith(']'):
        body = body[1:-1]
    items = [item for item in re.split(r"[,\s]+", body.strip()) if item]
    if not items:
        raise ParameterError(f"Empty vector '{text}'.")
    return np.array([_number(item, 'vector entry') for item in items])


def parse_vectors(text):
    '''
    Vectors separated by ';', e.g. "1,0;0,1".
    '''
    return [parse_vector(part) for part in text.split(';') if part.strip()]


def parse_int_list(text):
    values = []
    for item in (part.strip() for part in text.split(',')):
        if not re.fullmatch(r"\d+", item):
            raise ParameterError(f"'{item}' is not a non-negative integer (list '{text}').")
        values.append(int(item))
    if not values:
        raise ParameterError("Integer list must not be empty.")
    return values


def parse_float_list(text):
    values = [_number(part, 'list entry') for part in text.split(',') if part.strip()]
    if not values:
        raise ParameterError("Number list must not be empty.")
    return values


def parse_budget(text):
    '''
    "n=8,restarts=64,iters=200" -> SearchBudget. Keys left out keep their defaults.
    '''
    fields = {}
    for part in text.split(','):
        if not part.strip():
            continue
        match = BUDGET_ITEM.fullmatch(part)
        if not match:
            raise ParameterError(f"Invalid budget item '{part.strip()}'. Expected n=, restarts= or iters=.")
        key = 'n_max' if match.group('key') in ('n', 'n_max') else match.group('key')
        fields[key] = int(match.group('value'))
    return SearchBudget(**fields)


def parse_assignment(text):
    '''
    "0=3,1=-2.5" -> {0: 3.0, 1: -2.5}
    '''
    assignment = {}
    for part in text.split(','):
        if not part.strip():
            continue
        match = ASSIGNMENT_ITEM.fullmatch(part)
        if not match:
            raise ParameterError(f"Invalid assignment item '{part.strip()}'. Expected index=value.")
        assignment[int(match.group('index'))] = float(match.group('value'))
    return assignment
