"""Benchmark families with closed-form answers.

The harmonic family integrates

    f_n(x) = a*cos(k_n*(x1+...+x4)) + b*sin(k_n*(x1+...+x4)),  k_n = (n+50)/(2*pi)

over [0,1]^4. Writing phi = (e^{ik} - 1)/(ik), the integral of e^{ik*sum(x)}
over the unit d-cube is phi^d, so the exact answer is a*Re[phi^d] + b*Im[phi^d].

The mixed family alternates dimension: a*|x1+x2| on [0,1]^2 (integral 1) for
n < 50 and b*|x1+x2-x3| on [0,1]^3 (integral 7/12) from n = 50 on.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from mcbatch.batch import IntegrandSpec, JobSpec, METHOD_DIRECT
from mcbatch.error import MalformedResults
from mcbatch.results import read_results, write_plot_data
from mcbatch.sampling import HyperRect

HARMONIC_DIM = 4
HARMONIC_NAME_RE = re.compile(r'harmonic-0*([0-9]+)')
MIXED_SPLIT = 50
MIXED_2D_VALUE = 1.0
MIXED_3D_VALUE = 7.0 / 12.0
BAND_SIGMAS = 4.0


def harmonic_k(n):
    return (n + 50) / (2 * math.pi)


def harmonic_source(dim=HARMONIC_DIM):
    total = '+'.join('x{}'.format(i + 1) for i in range(dim))
    return 'a*cos(k*({0})) + b*sin(k*({0}))'.format(total)


def analytic_harmonic_k(k, dim=HARMONIC_DIM, a=1.0, b=1.0):
    # phi = sin(k)/k + i*(1 - cos(k))/k, written with sinc so k = 0 is exact
    re_phi = float(np.sinc(k / math.pi))
    im_phi = float(0.5 * k * np.sinc(k / (2 * math.pi)) ** 2)
    re_power, im_power = 1.0, 0.0
    for _ in range(dim):
        re_power, im_power = (re_power * re_phi - im_power * im_phi,
                              re_power * im_phi + im_power * re_phi)
    return a * re_power + b * im_power


def analytic_harmonic(n):
    return analytic_harmonic_k(harmonic_k(n))


def gen_harmonic(n_count=100, samples=1000000, trials=10, seed=0, workers=0,
                 method=METHOD_DIRECT):
    if n_count < 1:
        raise ValueError('n_count must be positive')
    source = harmonic_source()
    domain = HyperRect.unit(HARMONIC_DIM)
    integrands = [IntegrandSpec(name='harmonic-{:03d}'.format(n),
                                source=source,
                                dim=HARMONIC_DIM,
                                domain=domain,
                                params={'k': harmonic_k(n), 'a': 1.0, 'b': 1.0},
                                n_samples=samples,
                                method=method,
                                analytic=analytic_harmonic(n))
                  for n in range(1, n_count + 1)]
    return JobSpec(integrands, seed, trials, workers)


def gen_mixed(n_count=100, samples=1000000, trials=10, seed=0, workers=0):
    if n_count < 1:
        raise ValueError('n_count must be positive')
    integrands = list()
    for n in range(1, n_count + 1):
        if n < MIXED_SPLIT:
            spec = IntegrandSpec(name='mixed-{:03d}'.format(n),
                                 source='a*abs(x1+x2)',
                                 dim=2,
                                 domain=HyperRect.unit(2),
                                 params={'a': 1.0},
                                 n_samples=samples,
                                 analytic=MIXED_2D_VALUE)
        else:
            spec = IntegrandSpec(name='mixed-{:03d}'.format(n),
                                 source='b*abs(x1+x2-x3)',
                                 dim=3,
                                 domain=HyperRect.unit(3),
                                 params={'b': 1.0},
                                 n_samples=samples,
                                 analytic=MIXED_3D_VALUE)
        integrands.append(spec)
    return JobSpec(integrands, seed, trials, workers)


@dataclass
class CheckRow:
    name: str
    n: int
    mean: float
    trial_stddev: float
    analytic: float
    band: float
    passed: bool


@dataclass
class CheckReport:
    rows: list

    @property
    def total(self):
        return len(self.rows)

    @property
    def passed(self):
        return sum(1 for row in self.rows if row.passed)

    @property
    def failed(self):
        return [row for row in self.rows if not row.passed]

    def fraction(self):
        return self.passed / self.total


def _band(trial_stddev, mean_std_error):
    spreads = [v for v in (trial_stddev, mean_std_error) if v is not None and not math.isnan(v)]
    return BAND_SIGMAS * max(spreads) if spreads else math.nan


def check_harmonic(results_path, plot_out=None):
    """Compare every result row against its analytic value.

    A row passes when |mean - analytic| <= 4*max(trial_stddev, mean_std_error).
    """
    rows = list()
    for result in read_results(results_path):
        match = HARMONIC_NAME_RE.fullmatch(result.name)
        n = int(match.group(1)) if match else result.n
        analytic = result.analytic
        if analytic is None:
            if not match:
                raise MalformedResults(results_path, 'no analytic value for {}'.format(result.name))
            analytic = analytic_harmonic(n)
        band = _band(result.trial_stddev, result.mean_std_error)
        passed = (result.mean is not None and not math.isnan(band) and
                  abs(result.mean - analytic) <= band)
        rows.append(CheckRow(result.name, n, result.mean, result.trial_stddev,
                             analytic, band, passed))
    if plot_out:
        write_plot_data([(row.n, row.mean, row.trial_stddev, row.analytic) for row in rows],
                        plot_out)
    return CheckReport(rows)
