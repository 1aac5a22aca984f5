import csv
import math
from dataclasses import dataclass

from mcbatch.error import FormatError, MalformedResults
from mcbatch.status import STATUS_NAMES
from mcbatch.util import format_real, parse_real

COLUMNS = ('name', 'n', 'dim', 'method', 'samples', 'trials', 'mean', 'trial_stddev',
           'mean_std_error', 'analytic', 'abs_error', 'status', 'warnings')
PLOT_COLUMNS = ('n', 'mean', 'trial_stddev', 'analytic')
_REAL_COLUMNS = ('mean', 'trial_stddev', 'mean_std_error', 'analytic', 'abs_error')
_INT_COLUMNS = ('n', 'dim', 'samples', 'trials')


@dataclass
class ResultRow:
    name: str
    n: int
    dim: int
    method: str
    samples: int
    trials: int
    mean: float = None
    trial_stddev: float = None
    mean_std_error: float = None
    analytic: float = None
    abs_error: float = None
    status: str = 'ok'
    warnings: tuple = ()


def rows_from_batch(result, trials):
    rows = list()
    for item in result.results:
        spec = item.spec
        summary = item.summary
        row = ResultRow(name=spec.name,
                        n=item.index + 1,
                        dim=spec.dim,
                        method=spec.resolved_method(),
                        samples=spec.n_samples,
                        trials=trials,
                        analytic=spec.analytic,
                        status=STATUS_NAMES[item.status],
                        warnings=tuple(item.warnings))
        if summary is not None:
            row.mean = summary.mean
            row.trial_stddev = summary.trial_stddev
            row.mean_std_error = summary.mean_std_error
            if spec.analytic is not None:
                row.abs_error = abs(summary.mean - spec.analytic)
        elif item.error:
            row.warnings = row.warnings + (item.error.replace('\n', ' '),)
        rows.append(row)
    return rows


def _format_cell(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return format_real(value)
    if isinstance(value, tuple):
        return ';'.join(value)
    return str(value)


def write_results(rows, file_path):
    with open(file_path, 'w', encoding='utf-8', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(getattr(row, column)) for column in COLUMNS])


def read_results(file_path):
    try:
        with open(file_path, encoding='utf-8', newline='') as file:
            records = list(csv.DictReader(file))
            header = records and list(records[0].keys())
    except FileNotFoundError:
        raise MalformedResults(file_path, 'file not found') from None
    except (csv.Error, UnicodeDecodeError) as e:
        raise MalformedResults(file_path, str(e)) from None
    if not records:
        raise MalformedResults(file_path, 'no result rows')
    missing = [column for column in ('name', 'mean', 'trial_stddev') if column not in header]
    if missing:
        raise MalformedResults(file_path, 'missing column(s): ' + ', '.join(missing))
    rows = list()
    for line, record in enumerate(records, 2):
        if None in record or any(value is None for value in record.values()):
            raise MalformedResults(file_path, 'line {} has the wrong number of fields'.format(line))
        values = dict()
        try:
            for column in _REAL_COLUMNS:
                text = record.get(column) or ''
                values[column] = parse_real(text) if text else None
            for column in _INT_COLUMNS:
                text = record.get(column) or ''
                values[column] = int(text) if text else None
        except (FormatError, ValueError) as e:
            raise MalformedResults(file_path, 'line {}: {}'.format(line, e)) from None
        warnings = record.get('warnings') or ''
        rows.append(ResultRow(name=record['name'],
                              method=record.get('method') or '',
                              status=record.get('status') or 'ok',
                              warnings=tuple(warnings.split(';')) if warnings else (),
                              **values))
    return rows


def write_plot_data(points, file_path):
    """``points`` are (n, mean, trial_stddev, analytic) tuples."""
    with open(file_path, 'w', encoding='utf-8', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(PLOT_COLUMNS)
        for point in points:
            writer.writerow([_format_cell(value) for value in point])


def is_missing(value):
    return value is None or math.isnan(value)
