import numpy as np

from mcbatch.error import CompileError, DimensionError, UnboundParameter
from mcbatch.expr import BINARY_OPS, FUNCTIONS, UNARY_OPS, Binary, Call, Number, \
    Parameter, Unary, Variable, parse, postorder

OP_CONST = 0
OP_VAR = 1
OP_PARAM = 2
OP_APPLY = 3


class CompiledProgram:
    """Postfix form of an expression.

    Instances are immutable and may be shared between worker threads; each
    evaluation works on its own stack.
    """
    __slots__ = ('instructions', 'param_names', 'dim', 'max_depth', 'source')

    def __init__(self, instructions, param_names, dim, max_depth, source=None):
        object.__setattr__(self, 'instructions', tuple(instructions))
        object.__setattr__(self, 'param_names', tuple(param_names))
        object.__setattr__(self, 'dim', dim)
        object.__setattr__(self, 'max_depth', max_depth)
        object.__setattr__(self, 'source', source)

    def __setattr__(self, name, value):
        raise AttributeError('CompiledProgram is immutable')

    def __repr__(self):
        return 'CompiledProgram({!r}, dim={}, params={})'.format(
            self.source, self.dim, list(self.param_names))

    def evaluate(self, point, params=(), stack=None):
        if len(point) != self.dim:
            raise ValueError('point has {} coordinates, expected {}'.format(len(point), self.dim))
        if len(params) != len(self.param_names):
            raise ValueError('got {} parameters, expected {}'.format(len(params), len(self.param_names)))
        if stack is None:
            stack = list()
        else:
            stack.clear()
        with np.errstate(all='ignore'):
            for instruction in self.instructions:
                code, arg = instruction[0], instruction[1]
                if code == OP_CONST:
                    stack.append(arg)
                elif code == OP_VAR:
                    stack.append(np.float64(point[arg]))
                elif code == OP_PARAM:
                    stack.append(np.float64(params[arg]))
                else:
                    arity = instruction[2]
                    args = stack[-arity:]
                    del stack[-arity:]
                    stack.append(arg(*args))
        return float(stack.pop())

    def evaluate_batch(self, points, params=()):
        """Evaluate at every row of an ``(n, dim)`` array; returns ``n`` values."""
        count = points.shape[0]
        stack = list()
        with np.errstate(all='ignore'):
            for instruction in self.instructions:
                code, arg = instruction[0], instruction[1]
                if code == OP_CONST:
                    stack.append(arg)
                elif code == OP_VAR:
                    stack.append(points[:, arg])
                elif code == OP_PARAM:
                    stack.append(np.float64(params[arg]))
                else:
                    arity = instruction[2]
                    args = stack[-arity:]
                    del stack[-arity:]
                    stack.append(arg(*args))
        result = np.asarray(stack.pop(), dtype=np.float64)
        if result.shape != (count,):
            result = np.full(count, result, dtype=np.float64)
        return result


def _emit(expr, dim, slots, out):
    for node in postorder(expr):
        if isinstance(node, Number):
            out.append((OP_CONST, np.float64(node.value)))
        elif isinstance(node, Variable):
            if node.index >= dim:
                raise DimensionError(node.index, dim)
            out.append((OP_VAR, node.index))
        elif isinstance(node, Parameter):
            if node.name not in slots:
                raise UnboundParameter(node.name)
            out.append((OP_PARAM, slots[node.name]))
        elif isinstance(node, Unary):
            out.append((OP_APPLY, UNARY_OPS[node.op], 1))
        elif isinstance(node, Binary):
            out.append((OP_APPLY, BINARY_OPS[node.op], 2))
        elif isinstance(node, Call):
            arity, function = FUNCTIONS[node.name]
            out.append((OP_APPLY, function, arity))
        else:
            raise CompileError('unknown node', node)


def check_stack(instructions):
    """Return the maximum stack depth; raise if evaluation could underflow."""
    depth = 0
    max_depth = 0
    for instruction in instructions:
        if instruction[0] == OP_APPLY:
            arity = instruction[2]
            if depth < arity:
                raise CompileError('stack underflow', instruction)
            depth -= arity - 1
        else:
            depth += 1
        max_depth = max(max_depth, depth)
    if depth != 1:
        raise CompileError('final stack depth is {}'.format(depth))
    return max_depth


def compile_expr(expr, dim, param_names=(), source=None):
    if dim < 1:
        raise CompileError('dim must be positive, got {}'.format(dim))
    slots = dict()
    for slot, name in enumerate(param_names):
        slots.setdefault(name, slot)
    instructions = list()
    _emit(expr, dim, slots, instructions)
    max_depth = check_stack(instructions)
    return CompiledProgram(instructions, param_names, dim, max_depth, source)


def evaluate(program, point, params=(), stack=None):
    return program.evaluate(point, params, stack)


def build(source, dim, param_names=()):
    return compile_expr(parse(source), dim, param_names, source)
