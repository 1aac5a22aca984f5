import argparse
import asyncio
from dataclasses import replace
from os import cpu_count, environ, path
from sys import exit

from mcbatch.batch import METHODS, METHOD_DIRECT, constant_cost_job, run_batch, \
    scale_benchmark, validate
from mcbatch.error import FormatError, MalformedResults
from mcbatch.harmonic import check_harmonic, gen_harmonic, gen_mixed
from mcbatch.jobfile import read_job, write_job
from mcbatch.log import logger
from mcbatch.results import rows_from_batch, write_results
from mcbatch.status import EXIT_CHECK_FAILED, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION
from mcbatch.util import parse_count

DEFAULT_MIN_PASS = 0.95

GEN_HARMONIC = 'gen-fig1'
GEN_MIXED = 'gen-mixed'
CHECK_HARMONIC = 'check-fig1'
ALIASES = {'gen-harmonic': GEN_HARMONIC, 'check-harmonic': CHECK_HARMONIC}


def default_results_path(job_path):
    return path.splitext(job_path)[0] + '.results.csv'


def _load_job(job_path):
    try:
        return read_job(job_path)
    except FileNotFoundError:
        logger.error('Job file %s not found', job_path)
    except FormatError as e:
        logger.error('Invalid job file %s: %s', job_path, ': '.join(map(str, e.args)))
    return None


def _report_violations(job_path, violations):
    for violation in violations:
        logger.error('Invalid integrand in %s: %s', job_path, violation)


def run_command(job_path, out_path=None, seed=None, trials=None, workers=None):
    job = _load_job(job_path)
    if job is None:
        return EXIT_VALIDATION
    overrides = {key: value for key, value in
                 (('seed', seed), ('trials', trials), ('workers', workers))
                 if value is not None}
    job = replace(job, **overrides)
    violations = validate(job)
    if violations:
        _report_violations(job_path, violations)
        return EXIT_VALIDATION
    try:
        result = asyncio.run(run_batch(job))
    except Exception as e:
        logger.error('Batch %s crashed', job_path)
        logger.exception(e)
        return EXIT_RUNTIME
    out_path = out_path or default_results_path(job_path)
    write_results(rows_from_batch(result, job.trials), out_path)
    logger.info('Results written to %s', out_path)
    if len(result.failed) == len(result.results):
        logger.error('Every integrand failed')
        return EXIT_RUNTIME
    return EXIT_OK


def validate_command(job_path):
    job = _load_job(job_path)
    if job is None:
        return EXIT_VALIDATION
    violations = validate(job)
    if violations:
        _report_violations(job_path, violations)
        return EXIT_VALIDATION
    logger.info('%s: %d integrand(s), no violations', job_path, len(job.integrands))
    return EXIT_OK


def check_command(results_path, plot_out=None, min_pass=DEFAULT_MIN_PASS):
    try:
        report = check_harmonic(results_path, plot_out)
    except MalformedResults as e:
        logger.error('Malformed results %s: %s', e.path, e.reason)
        return EXIT_VALIDATION
    for row in report.failed:
        logger.warning('%s: mean %r, analytic %r, band %r', row.name, row.mean,
                       row.analytic, row.band)
    print('passed {}/{}'.format(report.passed, report.total))
    return EXIT_OK if report.fraction() >= min_pass else EXIT_CHECK_FAILED


def _worker_counts(max_workers):
    counts = list()
    workers = 1
    while workers < max_workers:
        counts.append(workers)
        workers *= 2
    counts.append(max_workers)
    return counts


def scale_command(job_path=None, max_workers=None, integrands=1000, samples=65536):
    if job_path:
        job = _load_job(job_path)
        if job is None:
            return EXIT_VALIDATION
        violations = validate(job)
        if violations:
            _report_violations(job_path, violations)
            return EXIT_VALIDATION
    else:
        job = constant_cost_job(integrands, samples)
    timings, identical = asyncio.run(
        scale_benchmark(job, _worker_counts(max_workers or cpu_count() or 1)))
    for workers, seconds in timings:
        print('{}\t{:.3f}'.format(workers, seconds))
    return EXIT_OK if identical else EXIT_RUNTIME


def _count(text):
    try:
        return parse_count(text)
    except FormatError as e:
        raise argparse.ArgumentTypeError('invalid count: {}'.format(text)) from e


def _workers(text):
    try:
        workers = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError('invalid worker count: {!r}'.format(text)) from None
    if workers < 0:
        raise argparse.ArgumentTypeError('worker count must be >= 0, got {}'.format(workers))
    return workers


def _parser():
    parser = argparse.ArgumentParser(prog='mcbatch',
                                     description='Batched Monte Carlo integration')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='run a job file')
    run.add_argument('job')
    run.add_argument('--out', default=None, help='results CSV (default: <job>.results.csv)')
    run.add_argument('--seed', type=int, default=None)
    run.add_argument('--trials', type=int, default=None)
    run.add_argument('--workers', type=_workers,
                     default=environ.get('MCBATCH_WORKERS') or None,
                     help='worker threads, 0 = all (default: $MCBATCH_WORKERS or job file)')

    for name, aliases, description in (
            (GEN_HARMONIC, ['gen-harmonic'], 'write the harmonic benchmark job'),
            (GEN_MIXED, [], 'write the mixed-dimension benchmark job')):
        gen = commands.add_parser(name, aliases=aliases, help=description)
        gen.add_argument('--n', type=int, default=100, help='number of integrands')
        gen.add_argument('--samples', type=_count, default=1000000)
        gen.add_argument('--trials', type=int, default=10)
        gen.add_argument('--seed', type=int, default=0)
        if name == GEN_HARMONIC:
            gen.add_argument('--method', choices=METHODS, default=METHOD_DIRECT)
        gen.add_argument('--out', required=True)

    check = commands.add_parser(CHECK_HARMONIC, aliases=['check-harmonic'],
                                help='check results against analytic values')
    check.add_argument('results')
    check.add_argument('--plot-out', default=None)
    check.add_argument('--min-pass', type=float, default=DEFAULT_MIN_PASS)

    validate_parser = commands.add_parser('validate', help='validate a job file')
    validate_parser.add_argument('job')

    scale = commands.add_parser('scale', help='measure wall time against worker count')
    scale.add_argument('job', nargs='?', default=None)
    scale.add_argument('--max-workers', type=int, default=None)
    scale.add_argument('--integrands', type=int, default=1000)
    scale.add_argument('--samples', type=_count, default=65536)
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    command = ALIASES.get(args.command, args.command)
    if command == 'run':
        return run_command(args.job, args.out, args.seed, args.trials, args.workers)
    if command == GEN_HARMONIC:
        write_job(gen_harmonic(args.n, args.samples, args.trials, args.seed,
                               method=args.method), args.out)
        return EXIT_OK
    if command == GEN_MIXED:
        write_job(gen_mixed(args.n, args.samples, args.trials, args.seed), args.out)
        return EXIT_OK
    if command == CHECK_HARMONIC:
        return check_command(args.results, args.plot_out, args.min_pass)
    if command == 'validate':
        return validate_command(args.job)
    return scale_command(args.job, args.max_workers, args.integrands, args.samples)


if __name__ == '__main__':
    exit(main())
