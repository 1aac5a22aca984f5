"""Integrand expression language.

Sources are plain math over the variables ``x1..xd`` and named parameters::

    cos(k*(x1+x2+x3+x4)) + sin(k*(x1+x2+x3+x4))

The grammar, tightest binding last::

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := unary ('^' factor)?
    unary   := '-' unary | primary
    primary := NUMBER | IDENT '(' expr (',' expr)* ')' | IDENT | '(' expr ')'

``^`` is right-associative and means ``pow``. Unary minus is part of the
left operand of ``^``, so ``-x1^2`` is ``(-x1)^2``. ``pi`` and ``e`` are
constants; every other identifier that is neither a variable nor a function
is a parameter.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from mcbatch.error import ArityMismatch, ExprSyntaxError, UnknownFunction

VARIABLE_RE = re.compile(r'x([1-9][0-9]*)')
_TOKEN_RE = re.compile(r'''
    (?P<space>\s+)
  | (?P<num>[0-9]+(?:\.[0-9]*)?(?:[eE][+-]?[0-9]+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
''', re.VERBOSE)

UNARY_OPS = {
    '-': np.negative,
}

BINARY_OPS = {
    '+': np.add,
    '-': np.subtract,
    '*': np.multiply,
    '/': np.divide,
    '^': np.power,
}

# name -> (arity, implementation)
FUNCTIONS = {
    'sin': (1, np.sin),
    'cos': (1, np.cos),
    'tan': (1, np.tan),
    'asin': (1, np.arcsin),
    'acos': (1, np.arccos),
    'atan': (1, np.arctan),
    'exp': (1, np.exp),
    'log': (1, np.log),
    'sqrt': (1, np.sqrt),
    'abs': (1, np.abs),
    'floor': (1, np.floor),
    'pow': (2, np.power),
    'min': (2, np.minimum),
    'max': (2, np.maximum),
}

CONSTANTS = {
    'pi': math.pi,
    'e': math.e,
}

# parentheses, call arguments, unary minus and '^' each open one level
MAX_NESTING = 100

# printer precedence
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_POW = 3
_PREC_UNARY = 4
_PREC_ATOM = 5
_BINARY_PREC = {'+': _PREC_ADD, '-': _PREC_ADD, '*': _PREC_MUL, '/': _PREC_MUL, '^': _PREC_POW}


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    index: int


@dataclass(frozen=True)
class Parameter:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


class _Token:
    __slots__ = ('kind', 'text', 'offset')

    def __init__(self, kind, text, offset):
        self.kind = kind
        self.text = text
        self.offset = offset


def _byte_offset(source, index):
    return len(source[:index].encode('utf-8'))


def tokenize(source):
    tokens = list()
    index = 0
    while index < len(source):
        match = _TOKEN_RE.match(source, index)
        if not match:
            raise ExprSyntaxError(source, _byte_offset(source, index), 'a token')
        kind = match.lastgroup
        if kind != 'space':
            tokens.append(_Token(kind, match.group(), _byte_offset(source, index)))
        index = match.end()
    tokens.append(_Token('end', '', _byte_offset(source, len(source))))
    return tokens


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0
        self.depth = 0

    @property
    def token(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def accept(self, text):
        if self.token.kind == 'op' and self.token.text == text:
            return self.advance()
        return None

    def expect(self, text):
        token = self.accept(text)
        if not token:
            raise ExprSyntaxError(self.source, self.token.offset, repr(text))
        return token

    def enter(self, offset):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise ExprSyntaxError(self.source, offset, 'shallower nesting')

    def leave(self):
        self.depth -= 1

    def parse(self):
        expr = self.expr()
        if self.token.kind != 'end':
            raise ExprSyntaxError(self.source, self.token.offset, 'an operator or end of input')
        return expr

    def expr(self):
        left = self.term()
        while True:
            token = self.accept('+') or self.accept('-')
            if not token:
                return left
            left = Binary(token.text, left, self.term())

    def term(self):
        left = self.factor()
        while True:
            token = self.accept('*') or self.accept('/')
            if not token:
                return left
            left = Binary(token.text, left, self.factor())

    def factor(self):
        base = self.unary()
        token = self.accept('^')
        if token:
            self.enter(token.offset)
            exponent = self.factor()
            self.leave()
            return Binary('^', base, exponent)
        return base

    def unary(self):
        token = self.accept('-')
        if token:
            self.enter(token.offset)
            operand = self.unary()
            self.leave()
            return Unary('-', operand)
        return self.primary()

    def primary(self):
        token = self.token
        if token.kind == 'num':
            self.advance()
            return Number(float(token.text))
        if token.kind == 'ident':
            self.advance()
            if self.accept('('):
                return self.call(token)
            if token.text in FUNCTIONS:
                raise ExprSyntaxError(self.source, self.token.offset, "'(' after " + token.text)
            if token.text in CONSTANTS:
                return Number(CONSTANTS[token.text])
            match = VARIABLE_RE.fullmatch(token.text)
            if match:
                return Variable(int(match.group(1)) - 1)
            return Parameter(token.text)
        if self.accept('('):
            self.enter(token.offset)
            inner = self.expr()
            self.expect(')')
            self.leave()
            return inner
        raise ExprSyntaxError(self.source, token.offset, 'an expression')

    def call(self, name_token):
        name = name_token.text
        if name not in FUNCTIONS:
            raise UnknownFunction(name, name_token.offset)
        self.enter(name_token.offset)
        args = [self.expr()]
        while self.accept(','):
            args.append(self.expr())
        self.expect(')')
        self.leave()
        arity, _ = FUNCTIONS[name]
        if len(args) != arity:
            raise ArityMismatch(name, arity, len(args), name_token.offset)
        return Call(name, tuple(args))


def parse(source):
    if not source or not source.strip():
        raise ExprSyntaxError(source, 0, 'an expression')
    return _Parser(source).parse()


def free_variables(expr):
    """Return the set of 0-based variable indices used by ``expr``."""
    found = set()
    for node in walk(expr):
        if isinstance(node, Variable):
            found.add(node.index)
    return found


def free_parameters(expr):
    return {node.name for node in walk(expr) if isinstance(node, Parameter)}


def children(expr):
    if isinstance(expr, Unary):
        return (expr.operand,)
    if isinstance(expr, Binary):
        return (expr.left, expr.right)
    if isinstance(expr, Call):
        return expr.args
    return ()


def walk(expr):
    """Yield the nodes of ``expr`` in prefix order."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def postorder(expr):
    """Yield the nodes of ``expr`` with every child before its parent."""
    stack = [(expr, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        stack.append((node, True))
        stack.extend((child, False) for child in reversed(children(node)))


def fold(expr, visit):
    """Reduce ``expr`` bottom-up; ``visit(node, child_values)`` gives a node's value."""
    values = list()
    for node in postorder(expr):
        arity = len(children(node))
        args = values[len(values) - arity:]
        del values[len(values) - arity:]
        values.append(visit(node, args))
    return values[0]


def _precedence(expr):
    if isinstance(expr, Binary):
        return _BINARY_PREC[expr.op]
    if isinstance(expr, Unary):
        return _PREC_UNARY
    return _PREC_ATOM


def _wrap(text, needs_parens):
    return '(' + text + ')' if needs_parens else text


def _format_node(expr, args):
    if isinstance(expr, Number):
        return repr(float(expr.value))
    if isinstance(expr, Variable):
        return 'x{}'.format(expr.index + 1)
    if isinstance(expr, Parameter):
        return expr.name
    if isinstance(expr, Unary):
        return '-' + _wrap(args[0], _precedence(expr.operand) < _PREC_UNARY)
    if isinstance(expr, Call):
        return '{}({})'.format(expr.name, ', '.join(args))
    prec = _BINARY_PREC[expr.op]
    if expr.op == '^':
        left = _wrap(args[0], _precedence(expr.left) <= prec)
        right = _wrap(args[1], _precedence(expr.right) < prec)
        return '{}^{}'.format(left, right)
    left = _wrap(args[0], _precedence(expr.left) < prec)
    right = _wrap(args[1], _precedence(expr.right) <= prec)
    return '{} {} {}'.format(left, expr.op, right)


def format_expr(expr):
    """Print ``expr`` with the fewest parentheses that re-parse to the same tree."""
    return fold(expr, _format_node)


def evaluate_tree(expr, point, params):
    """Reference evaluation by walking the tree; ``params`` maps names to values."""
    def visit(node, args):
        if isinstance(node, Number):
            return np.float64(node.value)
        if isinstance(node, Variable):
            return np.float64(point[node.index])
        if isinstance(node, Parameter):
            return np.float64(params[node.name])
        if isinstance(node, Unary):
            return UNARY_OPS[node.op](*args)
        if isinstance(node, Binary):
            return BINARY_OPS[node.op](*args)
        _, function = FUNCTIONS[node.name]
        return function(*args)

    with np.errstate(all='ignore'):
        return float(fold(expr, visit))
