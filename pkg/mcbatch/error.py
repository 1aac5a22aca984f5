class FormatError(Exception):
    pass


class MalformedResults(FormatError):
    def __init__(self, path, reason):
        super().__init__(path, reason)
        self.path = path
        self.reason = reason


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, source, offset, expected):
        super().__init__(source, offset, expected)
        self.source = source
        self.offset = offset
        self.expected = expected

    def __str__(self):
        return 'syntax error at byte {}: expected {}'.format(self.offset, self.expected)


class UnknownFunction(ExprError):
    def __init__(self, name, offset):
        super().__init__(name, offset)
        self.name = name
        self.offset = offset

    def __str__(self):
        return 'unknown function {!r} at byte {}'.format(self.name, self.offset)


class ArityMismatch(ExprError):
    def __init__(self, name, expected, got, offset):
        super().__init__(name, expected, got, offset)
        self.name = name
        self.expected = expected
        self.got = got
        self.offset = offset

    def __str__(self):
        return '{}() takes {} argument(s), got {} (byte {})'.format(
            self.name, self.expected, self.got, self.offset)


class CompileError(Exception):
    pass


class DimensionError(CompileError):
    def __init__(self, index, dim):
        super().__init__(index, dim)
        self.index = index
        self.dim = dim

    def __str__(self):
        return 'x{} exceeds dim={}'.format(self.index + 1, self.dim)


class UnboundParameter(CompileError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return 'unbound parameter {!r}'.format(self.name)


class DomainError(ValueError):
    pass


class EstimationError(Exception):
    pass


class AllSamplesNonFinite(EstimationError):
    def __init__(self, n_samples):
        super().__init__(n_samples)
        self.n_samples = n_samples

    def __str__(self):
        return 'all {} samples were non-finite'.format(self.n_samples)


class CellBudgetExceeded(EstimationError):
    def __init__(self, cells, cap):
        super().__init__(cells, cap)
        self.cells = cells
        self.cap = cap

    def __str__(self):
        return '{} cells exceed the cap of {}'.format(self.cells, self.cap)


class TrialsFailed(EstimationError):
    def __init__(self, failures):
        super().__init__(failures)
        self.failures = failures

    def __str__(self):
        return '{} trial(s) failed: {}'.format(
            len(self.failures), '; '.join(str(e) for e in self.failures))


class ValidationError(Exception):
    def __init__(self, violations):
        super().__init__(violations)
        self.violations = list(violations)

    def __str__(self):
        return '\n'.join(str(v) for v in self.violations)
