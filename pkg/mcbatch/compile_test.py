import math
from random import Random
from unittest import main, TestCase

import numpy as np

from mcbatch.compile import OP_APPLY, OP_CONST, OP_VAR, build, check_stack, \
    compile_expr, evaluate
from mcbatch.error import CompileError, DimensionError, UnboundParameter
from mcbatch.expr import evaluate_tree
from mcbatch.expr_test import HARMONIC_BODY, PARAM_NAMES, random_expr


def same_float(a, b):
    return (math.isnan(a) and math.isnan(b)) or a == b


class CompileTest(TestCase):
    def test_examples(self):
        self.assertEqual(evaluate(build('2+3*4', 1), (0.5,)), 14.0)
        self.assertEqual(evaluate(build('2^3^2', 1), (0.5,)), 512.0)
        self.assertEqual(evaluate(build('x1*x2', 2), (3.0, 4.0)), 12.0)
        self.assertEqual(evaluate(build('a*x1', 1, ('a',)), (2.0,), (1.5,)), 3.0)
        self.assertEqual(evaluate(build('abs(x1+x2)', 2), (-1.0, -2.0)), 3.0)
        self.assertEqual(evaluate(build('x1', 1), (0.7,)), 0.7)
        self.assertEqual(evaluate(build('abs(x1+x2)', 2), (0.25, 0.5)), 0.75)
        self.assertEqual(evaluate(build('a*x1', 1, ('a',)), (0.5,), (3.0,)), 1.5)
        self.assertEqual(evaluate(build('sin(x1)', 1), (0.0,)), 0.0)
        self.assertEqual(evaluate(build('pi', 1), (0.0,)), math.pi)

    def test_harmonic_origin(self):
        program = build(HARMONIC_BODY, 4, ('k',))
        self.assertEqual(program.evaluate((0.0,) * 4, (51 / (2 * math.pi),)), 1.0)

    def test_dimension_error(self):
        with self.assertRaises(DimensionError) as context:
            build('x1 + x3', 2)
        self.assertEqual(context.exception.index, 2)
        self.assertEqual(str(context.exception), 'x3 exceeds dim=2')

    def test_unbound_parameter(self):
        with self.assertRaises(UnboundParameter) as context:
            build('k*x1', 1)
        self.assertEqual(context.exception.name, 'k')
        with self.assertRaises(UnboundParameter):
            build('x0', 1)

    def test_bad_dim(self):
        with self.assertRaises(CompileError):
            build('1', 0)

    def test_unused_parameters(self):
        program = build('x1', 1, ('a', 'b'))
        self.assertEqual(program.evaluate((0.25,), (1.0, 2.0)), 0.25)

    def test_max_depth(self):
        self.assertEqual(build('1', 1).max_depth, 1)
        self.assertEqual(build('1+2', 1).max_depth, 2)
        self.assertEqual(build('1+(2+(3+4))', 1).max_depth, 4)
        self.assertEqual(build('((1+2)+3)+4', 1).max_depth, 2)

    def test_check_stack(self):
        add = (OP_APPLY, np.add, 2)
        with self.assertRaises(CompileError):
            check_stack([(OP_CONST, 1.0), add])
        with self.assertRaises(CompileError):
            check_stack([(OP_CONST, 1.0), (OP_VAR, 0)])
        with self.assertRaises(CompileError):
            check_stack([])
        self.assertEqual(check_stack([(OP_CONST, 1.0), (OP_VAR, 0), add]), 2)

    def test_immutable(self):
        program = build('x1', 1)
        with self.assertRaises(AttributeError):
            program.dim = 2

    def test_argument_lengths(self):
        program = build('a*x1', 1, ('a',))
        with self.assertRaises(ValueError):
            program.evaluate((1.0, 2.0), (1.0,))
        with self.assertRaises(ValueError):
            program.evaluate((1.0,), ())

    def test_reused_stack(self):
        program = build('x1*x1 + 1', 1)
        stack = [99.0]
        self.assertEqual(program.evaluate((2.0,), (), stack), 5.0)
        self.assertEqual(program.evaluate((3.0,), (), stack), 10.0)

    def test_nonfinite_results(self):
        self.assertTrue(math.isnan(evaluate(build('log(-1)', 1), (0.0,))))
        self.assertEqual(evaluate(build('1/x1', 1), (0.0,)), math.inf)
        self.assertTrue(math.isnan(evaluate(build('sqrt(x1)', 1), (-1.0,))))

    def test_long_chain(self):
        program = build('x1' + ' + x1' * 5000, 1)
        self.assertEqual(program.max_depth, 2)
        self.assertEqual(program.evaluate((0.5,)), 2500.5)
        self.assertEqual(program.evaluate_batch(np.full((3, 1), 0.5)).tolist(), [2500.5] * 3)


class EquivalenceTest(TestCase):
    def test_matches_tree_evaluation(self):
        rng = Random(31337)
        for _ in range(10000):
            expr = random_expr(rng, rng.randint(0, 5))
            params = {name: rng.uniform(-3, 3) for name in PARAM_NAMES}
            point = tuple(rng.uniform(-2, 2) for _ in range(4))
            program = compile_expr(expr, 4, PARAM_NAMES)
            compiled = program.evaluate(point, tuple(params[name] for name in PARAM_NAMES))
            reference = evaluate_tree(expr, point, params)
            self.assertTrue(same_float(compiled, reference), (expr, compiled, reference))


class BatchTest(TestCase):
    def test_matches_scalar(self):
        rng = np.random.default_rng(5)
        points = rng.random((257, 4))
        for source in (HARMONIC_BODY, 'exp(-100*((x1-0.5)^2+(x2-0.5)^2))',
                       'abs(x1+x2-x3)', 'max(x1, x4)^2 - floor(3*x2)'):
            program = build(source, 4, ('k',))
            params = (23.87,)
            batch = program.evaluate_batch(points, params)
            scalar = np.array([program.evaluate(tuple(row), params) for row in points])
            np.testing.assert_allclose(batch, scalar, rtol=1e-12, atol=1e-15)

    def test_constant_broadcast(self):
        program = build('7', 2)
        values = program.evaluate_batch(np.zeros((5, 2)))
        self.assertEqual(values.shape, (5,))
        self.assertTrue(np.all(values == 7.0))

    def test_parameter_only(self):
        program = build('a*a', 1, ('a',))
        values = program.evaluate_batch(np.zeros((3, 1)), (3.0,))
        self.assertEqual(values.tolist(), [9.0, 9.0, 9.0])


if __name__ == '__main__':
    main()
