# Parser for the prefix notation of lattice-linear expressions, e.g.
#   (pos (sub (abs (gen 2)) (scale 16 (add (abs (gen 0)) (abs (gen 1))))))

import regex as re

from lattice_errors import ExpressionSyntaxError, LatticeToolError
import lattice_expr as le

TOKEN_PATTERN = re.compile(
    r"(?P<lpar>\()|(?P<rpar>\))"
    r"|(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<word>[A-Za-z_]+)"
    r"|(?P<space>\s+)"
    r"|(?P<bad>.)"
)

# operator name -> canonical node kind
OPERATORS = {
    'gen': 'gen', 'scale': 'scale', 'add': 'add', 'sub': 'sub', 'neg': 'neg',
    'max': 'max', 'sup': 'max', 'join': 'max',
    'min': 'min', 'inf': 'min', 'meet': 'min',
    'abs': 'abs', 'pos': 'pos', 'psum': 'psum',
}


def tokenize(text):
    '''
    Split the text into (kind, value, position) tokens. Whitespace is skipped.
    '''
    if not isinstance(text, str):
        raise TypeError("Expression text must be a string.")
    tokens = []
    for match in TOKEN_PATTERN.finditer(text):
        kind = match.lastgroup
        if kind == 'space':
            continue
        if kind == 'bad':
            raise ExpressionSyntaxError(f"Unexpected character '{match.group()}'", match.start())
        tokens.append((kind, match.group(), match.start()))
    return tokens


class _Reader:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.pos = 0
        self.end = len(text)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ('eof', '', self.end)

    def take(self, kind=None):
        token = self.peek()
        if token[0] == 'eof':
            raise ExpressionSyntaxError("Unexpected end of expression", token[2])
        if kind is not None and token[0] != kind:
            raise ExpressionSyntaxError(f"Expected {kind}, found '{token[1]}'", token[2])
        self.pos += 1
        return token


def _number(reader):
    _, text, _ = reader.take('number')
    return float(text)


def _integer(reader):
    _, text, where = reader.take('number')
    value = float(text)
    if not value.is_integer() or value < 0:
        raise ExpressionSyntaxError(f"Generator index must be a non-negative integer, found '{text}'", where)
    return int(value)


def _node(reader):
    reader.take('lpar')
    _, word, where = reader.take('word')
    op = OPERATORS.get(word.lower())
    if op is None:
        raise ExpressionSyntaxError(f"Unknown operator '{word}'", where)

    try:
        if op == 'gen':
            result = le.gen(_integer(reader))
        elif op == 'scale':
            c = _number(reader)
            result = le.scale(c, _node(reader))
        elif op == 'psum':
            s = _number(reader)
            result = le.power_sum(_children(reader, 1), s)
        elif op in ('abs', 'pos', 'neg'):
            child = _node(reader)
            result = {'abs': le.modulus, 'pos': le.positive_part, 'neg': lambda e: le.scale(-1.0, e)}[op](child)
        elif op == 'sub':
            a, b = _node(reader), _node(reader)
            result = le.sub(a, b)
        else:
            terms = _children(reader, 1)
            result = {'add': le.add, 'max': le.join, 'min': le.meet}[op](*terms)
    except ExpressionSyntaxError:
        raise
    except LatticeToolError as e:
        raise ExpressionSyntaxError(str(e), where) from None

    reader.take('rpar')
    return result


def _children(reader, minimum):
    children = []
    while reader.peek()[0] == 'lpar':
        children.append(_node(reader))
    if len(children) < minimum:
        token = reader.peek()
        raise ExpressionSyntaxError("Missing operand", token[2])
    return children


def parse_expr(text):
    '''
    Parse prefix notation into a LatticeExpr. Raises ExpressionSyntaxError with the
    offending position on malformed input.
    '''
    tokens = tokenize(text)
    if not tokens:
        raise ExpressionSyntaxError("Empty expression", 0)
    reader = _Reader(tokens, text)
    expr = _node(reader)
    if reader.peek()[0] != 'eof':
        token = reader.peek()
        raise ExpressionSyntaxError(f"Trailing input '{token[1]}'", token[2])
    return expr
