"""Monte Carlo estimators.

All estimators are coroutines: sampling work is pushed to a ``WorkerPool``
(or the loop's default executor) one chunk at a time, and partial results
are always reduced in chunk-index, then cell-index order so the result does
not depend on how many workers ran them.
"""

import math
from asyncio import gather
from collections import namedtuple
from dataclasses import dataclass, replace

import numpy as np

from mcbatch.config import config
from mcbatch.error import AllSamplesNonFinite, CellBudgetExceeded, TrialsFailed
from mcbatch.log import logger
from mcbatch.pool import run_all
from mcbatch.sampling import chunk_counts, sample_uniform, volume
from mcbatch.status import FLAG_BUDGET_EXHAUSTED, FLAG_NONFINITE, FLAG_TRIAL_FAILED

# share of a tree budget spent on the initial stratified pass
INITIAL_BUDGET_FRACTION = 0.25

Moments = namedtuple('Moments', 'n mean m2 n_nonfinite')
_EMPTY = Moments(0, 0.0, 0.0, 0)


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_samples: int
    n_nonfinite: int = 0
    flags: tuple = ()


@dataclass(frozen=True)
class TrialSummary:
    per_trial: tuple
    mean: float
    trial_stddev: float
    failures: tuple = ()

    @property
    def mean_std_error(self):
        return float(np.mean([estimate.std_error for estimate in self.per_trial]))

    @property
    def flags(self):
        flags = set()
        for estimate in self.per_trial:
            flags.update(estimate.flags)
        if self.failures:
            flags.add(FLAG_TRIAL_FAILED)
        return tuple(sorted(flags))


@dataclass(frozen=True)
class RefineConfig:
    cells_per_dim: int = None
    samples_per_cell: int = None
    max_depth: int = None
    sigma_multiplier: float = None
    budget: int = None

    def resolve(self, dim, n_samples=None):
        """Fill unset fields from the configuration defaults."""
        budget = self.budget or n_samples
        if not budget:
            raise ValueError('a sample budget is required')
        samples_per_cell = self.samples_per_cell or config['samples_per_cell']
        initial_budget = int(budget * INITIAL_BUDGET_FRACTION)
        if samples_per_cell > initial_budget:
            samples_per_cell = max(2, initial_budget)
        cells_per_dim = self.cells_per_dim or auto_cells_per_dim(
            dim, initial_budget, samples_per_cell, config['initial_cell_cap'])
        return RefineConfig(
            cells_per_dim=cells_per_dim,
            samples_per_cell=samples_per_cell,
            max_depth=config['max_depth'] if self.max_depth is None else self.max_depth,
            sigma_multiplier=(config['sigma_multiplier'] if self.sigma_multiplier is None
                              else self.sigma_multiplier),
            budget=budget)


class StratumNode:
    def __init__(self, cell, estimate, depth=0, cell_index=0, children=None):
        self.cell = cell
        self.estimate = estimate
        self.depth = depth
        self.cell_index = cell_index
        self.children = children or list()

    def __repr__(self):
        return 'StratumNode(depth={}, cell_index={}, value={!r})'.format(
            self.depth, self.cell_index, self.estimate.value)

    @property
    def is_leaf(self):
        return not self.children

    def leaves(self):
        if self.is_leaf:
            yield self
            return
        for child in self.children:
            yield from child.leaves()

    def refresh(self):
        """Make every internal estimate the sum of the leaves beneath it."""
        if not self.is_leaf:
            for child in self.children:
                child.refresh()
            self.estimate = combine([child.estimate for child in self.children])
        return self.estimate


def chunk_moments(program, params, rect, key, count):
    points = sample_uniform(rect, key, count)
    values = program.evaluate_batch(points, params)
    finite = np.isfinite(values)
    n = int(np.count_nonzero(finite))
    if n == 0:
        return Moments(0, 0.0, 0.0, count)
    if n < count:
        values = values[finite]
    mean = float(np.mean(values))
    m2 = float(np.sum(np.square(values - mean)))
    return Moments(n, mean, m2, count - n)


def merge(a, b):
    """Combine two sets of moments (Chan et al. parallel update)."""
    n_nonfinite = a.n_nonfinite + b.n_nonfinite
    if not a.n:
        return b._replace(n_nonfinite=n_nonfinite)
    if not b.n:
        return a._replace(n_nonfinite=n_nonfinite)
    n = a.n + b.n
    delta = b.mean - a.mean
    mean = a.mean + delta * b.n / n
    m2 = a.m2 + b.m2 + delta * delta * a.n * b.n / n
    return Moments(n, mean, m2, n_nonfinite)


def merge_all(moments):
    """Pairwise reduction in a fixed order."""
    moments = list(moments) or [_EMPTY]
    while len(moments) > 1:
        merged = [merge(moments[i], moments[i + 1]) for i in range(0, len(moments) - 1, 2)]
        if len(moments) % 2:
            merged.append(moments[-1])
        moments = merged
    return moments[0]


def _nonfinite_flags(n_nonfinite, n_samples):
    if n_samples and n_nonfinite / n_samples > config['nonfinite_warn_fraction']:
        return (FLAG_NONFINITE,)
    return ()


def to_estimate(moments, rect_volume, n_samples):
    if not moments.n:
        raise AllSamplesNonFinite(n_samples)
    if moments.n > 1:
        stddev = math.sqrt(moments.m2 / (moments.n - 1))
        std_error = rect_volume * stddev / math.sqrt(moments.n)
    else:
        std_error = math.inf
    return McEstimate(value=rect_volume * moments.mean,
                      std_error=std_error,
                      n_samples=n_samples,
                      n_nonfinite=moments.n_nonfinite,
                      flags=_nonfinite_flags(moments.n_nonfinite, n_samples))


def combine(estimates):
    """Sum independent estimates over disjoint regions."""
    estimates = list(estimates)
    n_samples = sum(estimate.n_samples for estimate in estimates)
    n_nonfinite = sum(estimate.n_nonfinite for estimate in estimates)
    flags = set(_nonfinite_flags(n_nonfinite, n_samples))
    for estimate in estimates:
        flags.update(estimate.flags)
    return McEstimate(value=math.fsum(estimate.value for estimate in estimates),
                      std_error=math.sqrt(math.fsum(estimate.std_error ** 2
                                                    for estimate in estimates)),
                      n_samples=n_samples,
                      n_nonfinite=n_nonfinite,
                      flags=tuple(sorted(flags)))


def auto_cells_per_dim(dim, n_samples, samples_per_cell, cap):
    """Largest k with k**dim <= cap and k**dim * samples_per_cell <= n_samples."""
    k = 1
    while (k + 1) ** dim <= cap and (k + 1) ** dim * samples_per_cell <= n_samples:
        k += 1
    return k


def _check_program(program, rect, n_samples):
    if program.dim != rect.dim:
        raise ValueError('program dim {} does not match domain dim {}'.format(program.dim, rect.dim))
    if n_samples < 2:
        raise ValueError('at least 2 samples are required')


async def direct_mc(program, params, rect, n_samples, key, pool=None):
    _check_program(program, rect, n_samples)
    params = tuple(params)
    moments = await run_all(pool, chunk_moments, [
        (program, params, rect, key.replace(chunk_index=chunk_index), count)
        for chunk_index, count in enumerate(chunk_counts(n_samples))])
    return to_estimate(merge_all(moments), volume(rect), n_samples)


async def stratified_mc(program, params, rect, cells_per_dim, samples_per_cell, key, pool=None):
    """Estimate over a ``cells_per_dim**dim`` grid; returns (estimate, leaves)."""
    _check_program(program, rect, samples_per_cell)
    if cells_per_dim < 1:
        raise ValueError('cells_per_dim must be positive')
    n_cells = cells_per_dim ** rect.dim
    if n_cells > config['cell_cap']:
        raise CellBudgetExceeded(n_cells, config['cell_cap'])
    cells = list(rect.grid(cells_per_dim))
    estimates = await gather(*(
        direct_mc(program, params, cell, samples_per_cell, key.replace(cell_index=index), pool)
        for index, cell in enumerate(cells)))
    leaves = [StratumNode(cell, estimate, 0, index)
              for index, (cell, estimate) in enumerate(zip(cells, estimates))]
    return combine(estimates), leaves


def _split_threshold(leaves, sigma_multiplier):
    # with two leaves mean + std is the larger error, so nothing would split
    if len(leaves) < 3:
        return 0.0
    errors = np.array([leaf.estimate.std_error for leaf in leaves])
    return float(np.mean(errors) + sigma_multiplier * np.std(errors))


async def build_tree(program, params, rect, refine, key, pool=None):
    """Stratify, then split high-error leaves until converged or out of budget.

    Returns the summed leaf estimate and the root nodes.
    """
    refine = refine.resolve(rect.dim)
    k = refine.cells_per_dim
    spc = refine.samples_per_cell
    _, roots = await stratified_mc(program, params, rect, k, spc, key, pool)
    used = spc * len(roots)
    next_index = len(roots)
    exhausted = False
    leaves = list(roots)
    while not exhausted:
        threshold = _split_threshold(leaves, refine.sigma_multiplier)
        candidates = [leaf for leaf in leaves
                      if leaf.estimate.std_error > threshold and leaf.depth < refine.max_depth]
        candidates.sort(key=lambda leaf: -leaf.estimate.std_error)
        chosen = list()
        for leaf in candidates:
            if used + 2 * spc > refine.budget:
                exhausted = True
                break
            chosen.append(leaf)
            used += 2 * spc
        if not chosen:
            break
        children = list()
        for leaf in chosen:
            for cell in leaf.cell.bisect(leaf.cell.longest_axis()):
                children.append((leaf, cell, next_index))
                next_index += 1
        estimates = await gather(*(
            direct_mc(program, params, cell, spc, key.replace(cell_index=index), pool)
            for _, cell, index in children))
        for (parent, cell, index), estimate in zip(children, estimates):
            parent.children.append(StratumNode(cell, estimate, parent.depth + 1, index))
        leaves = [leaf for root in roots for leaf in root.leaves()]
    if exhausted:
        logger.debug('Tree budget of %d samples exhausted with %d leaves', refine.budget, len(leaves))
    for root in roots:
        root.refresh()
    estimate = combine(leaf.estimate for leaf in leaves)
    if exhausted:
        estimate = replace(estimate, flags=tuple(sorted(set(estimate.flags) | {FLAG_BUDGET_EXHAUSTED})))
    return estimate, roots


async def tree_refine(program, params, rect, refine, key, pool=None):
    estimate, _ = await build_tree(program, params, rect, refine, key, pool)
    return estimate


def summarize(per_trial, failures=()):
    values = np.array([estimate.value for estimate in per_trial])
    mean = float(np.mean(values))
    if len(values) < 2:
        trial_stddev = math.nan
    elif np.all(values == values[0]):
        trial_stddev = 0.0
    else:
        trial_stddev = float(np.std(values, ddof=1))
    return TrialSummary(tuple(per_trial), mean, trial_stddev, tuple(failures))


async def repeated_trials(recipe, trials, key):
    """Run ``recipe(key)`` for trial indices ``0..trials-1``.

    ``recipe`` is a coroutine function taking a ``StreamKey``.
    """
    if trials < 1:
        raise ValueError('at least one trial is required')
    outcomes = await gather(*(recipe(key.replace(trial_index=trial))
                              for trial in range(trials)),
                            return_exceptions=True)
    per_trial = list()
    failures = list()
    for outcome in outcomes:
        if isinstance(outcome, AllSamplesNonFinite):
            failures.append(outcome)
        elif isinstance(outcome, BaseException):
            raise outcome
        else:
            per_trial.append(outcome)
    if len(per_trial) < min(trials, 2):
        raise TrialsFailed(failures)
    return summarize(per_trial, failures)
