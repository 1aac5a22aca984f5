import math
from asyncio import gather, Semaphore
from collections import namedtuple
from dataclasses import dataclass, field, replace
from time import perf_counter

from mcbatch.compile import compile_expr
from mcbatch.config import config
from mcbatch.error import ExprError, TrialsFailed, ValidationError
from mcbatch.estimator import RefineConfig, auto_cells_per_dim, direct_mc, \
    repeated_trials, stratified_mc, tree_refine
from mcbatch.expr import free_parameters, free_variables, parse
from mcbatch.log import logger
from mcbatch.pool import WorkerPool
from mcbatch.sampling import HyperRect, StreamKey
from mcbatch.status import STATUS_ERROR, STATUS_OK, STATUS_WARNING

METHOD_DIRECT = 'direct'
METHOD_STRATIFIED = 'stratified'
METHOD_TREE = 'tree'
METHOD_AUTO = 'auto'
METHODS = (METHOD_DIRECT, METHOD_STRATIFIED, METHOD_TREE, METHOD_AUTO)

# auto picks the tree method from this dimension on
AUTO_TREE_MIN_DIM = 8

JOB = '<job>'


class Violation(namedtuple('Violation', 'name reason')):
    def __str__(self):
        return '{}: {}'.format(self.name, self.reason)


class InvalidDomain:
    """Bounds that could not form a ``HyperRect``; kept so validation can report them."""

    def __init__(self, low, high, reason):
        self.low = tuple(low)
        self.high = tuple(high)
        self.reason = reason

    def __eq__(self, other):
        return (isinstance(other, InvalidDomain) and
                (self.low, self.high) == (other.low, other.high))

    def __repr__(self):
        return 'InvalidDomain({!r}, {!r})'.format(self.low, self.high)

    @property
    def dim(self):
        return len(self.low)


@dataclass(frozen=True)
class IntegrandSpec:
    name: str
    source: str
    dim: int
    domain: HyperRect
    params: dict = field(default_factory=dict)
    n_samples: int = 1000000
    method: str = METHOD_DIRECT
    method_config: RefineConfig = None
    analytic: float = None

    def resolved_method(self):
        if self.method == METHOD_AUTO:
            return METHOD_TREE if self.dim >= AUTO_TREE_MIN_DIM else METHOD_DIRECT
        return self.method


@dataclass(frozen=True)
class JobSpec:
    integrands: list
    seed: int = 0
    trials: int = 10
    workers: int = 0


@dataclass
class IntegrandResult:
    index: int
    spec: IntegrandSpec
    summary: object
    status: int
    warnings: tuple = ()
    error: str = None
    wall_seconds: float = 0.0

    @property
    def name(self):
        return self.spec.name


@dataclass
class BatchResult:
    results: list
    wall_seconds: float = 0.0

    def by_name(self):
        return {result.name: result for result in self.results}

    @property
    def summaries(self):
        return [result.summary for result in self.results]

    @property
    def failed(self):
        return [result for result in self.results if result.status == STATUS_ERROR]


def _validate_method_config(spec):
    violations = list()
    refine = spec.method_config
    if refine is None:
        return violations
    for name in ('cells_per_dim', 'samples_per_cell', 'max_depth', 'budget'):
        value = getattr(refine, name)
        minimum = 0 if name == 'max_depth' else (2 if name == 'samples_per_cell' else 1)
        if value is not None and (not isinstance(value, int) or value < minimum):
            violations.append(Violation(spec.name, '{} must be an integer >= {}'.format(name, minimum)))
    if refine.sigma_multiplier is not None and not math.isfinite(refine.sigma_multiplier):
        violations.append(Violation(spec.name, 'sigma_multiplier must be finite'))
    if (refine.cells_per_dim and isinstance(spec.dim, int) and spec.dim > 0 and
            refine.cells_per_dim ** spec.dim > config['cell_cap']):
        violations.append(Violation(spec.name, '{}^{} cells exceed the cap of {}'.format(
            refine.cells_per_dim, spec.dim, config['cell_cap'])))
    return violations


def validate_integrand(spec):
    violations = list()
    name = spec.name
    if not isinstance(spec.dim, int) or spec.dim < 1:
        violations.append(Violation(name, 'dim must be a positive integer'))
    if isinstance(spec.domain, InvalidDomain):
        violations.append(Violation(name, 'invalid domain: {}'.format(spec.domain.reason)))
    elif spec.domain.dim != spec.dim:
        violations.append(Violation(name, 'domain has {} dimension(s) but dim={}'.format(
            spec.domain.dim, spec.dim)))
    if not isinstance(spec.n_samples, int) or spec.n_samples < 2:
        violations.append(Violation(name, 'samples must be an integer >= 2'))
    if spec.method not in METHODS:
        violations.append(Violation(name, 'unknown method {!r}'.format(spec.method)))
    for param, value in spec.params.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            violations.append(Violation(name, 'parameter {!r} must be a finite real'.format(param)))
    violations.extend(_validate_method_config(spec))
    try:
        expr = parse(spec.source)
    except ExprError as e:
        violations.append(Violation(name, str(e)))
        return violations
    if isinstance(spec.dim, int):
        for index in sorted(free_variables(expr)):
            if index >= spec.dim:
                violations.append(Violation(name, 'x{} exceeds dim={}'.format(index + 1, spec.dim)))
    for param in sorted(free_parameters(expr) - set(spec.params)):
        violations.append(Violation(name, 'unbound parameter {!r}'.format(param)))
    return violations


def validate(job):
    """Return every violation in ``job``; an empty list means it can run."""
    violations = list()
    if not isinstance(job.trials, int) or job.trials < 1:
        violations.append(Violation(JOB, 'trials must be an integer >= 1'))
    if not isinstance(job.workers, int) or job.workers < 0:
        violations.append(Violation(JOB, 'workers must be an integer >= 0'))
    if not job.integrands:
        violations.append(Violation(JOB, 'no integrands'))
    seen = set()
    for spec in job.integrands:
        if not spec.name:
            violations.append(Violation(JOB, 'integrand with an empty name'))
        elif spec.name in seen:
            violations.append(Violation(spec.name, 'duplicate name'))
        seen.add(spec.name)
        violations.extend(validate_integrand(spec))
    return violations


def prepare(spec):
    """Compile ``spec``; returns (program, parameter vector)."""
    param_names = list(spec.params)
    program = compile_expr(parse(spec.source), spec.dim, param_names, spec.source)
    return program, tuple(float(spec.params[name]) for name in param_names)


def make_recipe(spec, program, params, pool):
    """Return a coroutine function running one trial of ``spec`` for a key."""
    method = spec.resolved_method()
    refine = spec.method_config or RefineConfig()
    if method == METHOD_DIRECT:
        async def recipe(key):
            return await direct_mc(program, params, spec.domain, spec.n_samples, key, pool)
    elif method == METHOD_STRATIFIED:
        k = refine.cells_per_dim or auto_cells_per_dim(
            spec.dim, spec.n_samples, refine.samples_per_cell or config['samples_per_cell'],
            config['initial_cell_cap'])
        samples_per_cell = refine.samples_per_cell or max(2, spec.n_samples // k ** spec.dim)

        async def recipe(key):
            estimate, _ = await stratified_mc(program, params, spec.domain, k,
                                              samples_per_cell, key, pool)
            return estimate
    else:
        refine = replace(refine, budget=refine.budget or spec.n_samples)

        async def recipe(key):
            return await tree_refine(program, params, spec.domain, refine, key, pool)
    return recipe


async def _run_integrand(job, index, spec, pool, limit):
    async with limit:
        start = perf_counter()
        try:
            program, params = prepare(spec)
            recipe = make_recipe(spec, program, params, pool)
            summary = await repeated_trials(recipe, job.trials, StreamKey(job.seed, index))
        except TrialsFailed as e:
            logger.warning('Integrand %d (%s) failed: %s', index, spec.name, e)
            return IntegrandResult(index, spec, None, STATUS_ERROR, (), str(e),
                                   perf_counter() - start)
        except Exception as e:
            logger.error('Integrand %d (%s) error', index, spec.name)
            logger.exception(e)
            return IntegrandResult(index, spec, None, STATUS_ERROR, (), repr(e),
                                   perf_counter() - start)
        wall_seconds = perf_counter() - start
    warnings = summary.flags
    for warning in warnings:
        logger.warning('Integrand %d (%s): %s', index, spec.name, warning)
    logger.info('Integrand %d (%s) done: mean %.10g, stddev %.3g, %.2f s',
                index, spec.name, summary.mean, summary.trial_stddev, wall_seconds)
    return IntegrandResult(index, spec, summary, STATUS_WARNING if warnings else STATUS_OK,
                           warnings, None, wall_seconds)


async def run_batch(job, pool=None):
    violations = validate(job)
    if violations:
        raise ValidationError(violations)
    own_pool = pool is None
    if own_pool:
        pool = WorkerPool(job.workers)
    try:
        logger.info('Batch started: %d integrands, %d trials, seed %d',
                    len(job.integrands), job.trials, job.seed)
        start = perf_counter()
        limit = Semaphore(pool.workers * config['inflight_per_worker'])
        results = await gather(*(_run_integrand(job, index, spec, pool, limit)
                                 for index, spec in enumerate(job.integrands)))
        wall_seconds = perf_counter() - start
    finally:
        if own_pool:
            pool.close()
    result = BatchResult(list(results), wall_seconds)
    logger.info('Batch finished in %.2f s, %d failed', wall_seconds, len(result.failed))
    return result


def expand_scan(template, param_name, values):
    if param_name not in template.params:
        raise ValidationError([Violation(template.name, 'parameter {!r} is not bound'.format(param_name))])
    if not values:
        raise ValidationError([Violation(template.name, 'no scan values')])
    return [replace(template,
                    name='{}[{}]'.format(template.name, index),
                    params={**template.params, param_name: float(value)})
            for index, value in enumerate(values)]


async def parameter_scan(template, param_name, values, trials, seed, workers=0, pool=None):
    """Run ``template`` once per value of ``param_name``; returns summaries in order."""
    job = JobSpec(expand_scan(template, param_name, values), seed, trials, workers)
    result = await run_batch(job, pool)
    return result.summaries


def numeric_payload(result):
    """Everything numeric in ``result`` except timings, as exact hex strings."""
    payload = list()
    for item in result.results:
        if item.summary is None:
            payload.append((item.name, None))
            continue
        payload.append((item.name, item.summary.mean.hex(), item.summary.trial_stddev.hex(),
                        tuple((e.value.hex(), e.std_error.hex(), e.n_samples, e.n_nonfinite)
                              for e in item.summary.per_trial)))
    return payload


def constant_cost_job(n_integrands=1000, samples=65536, trials=1, seed=0):
    """Integrands of identical cost, for measuring worker scaling."""
    domain = HyperRect.unit(4)
    integrands = [IntegrandSpec(name='cost-{:04d}'.format(n),
                                source='exp(-(x1^2 + x2^2 + x3^2 + x4^2))',
                                dim=4,
                                domain=domain,
                                n_samples=samples)
                  for n in range(n_integrands)]
    return JobSpec(integrands, seed, trials)


async def scale_benchmark(job, worker_counts):
    """Run ``job`` once per worker count; returns [(workers, seconds)] and
    whether every run produced the same numbers."""
    timings = list()
    reference = None
    identical = True
    for workers in worker_counts:
        with WorkerPool(workers) as pool:
            result = await run_batch(job, pool)
        logger.info('Scaling: %d worker(s) took %.2f s', workers, result.wall_seconds)
        timings.append((workers, result.wall_seconds))
        payload = numeric_payload(result)
        if reference is None:
            reference = payload
        elif payload != reference:
            logger.error('Scaling: results with %d worker(s) differ', workers)
            identical = False
    return timings, identical
