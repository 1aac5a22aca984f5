"""Strict JSON job files.

::

    {"seed": 1, "trials": 10, "workers": 0,
     "integrands": [{"name": "g", "expr": "abs(x1+x2)", "dim": 2,
                     "low": [0, 0], "high": [1, 1], "params": {},
                     "samples": 1000000, "method": "direct"}]}

Unknown keys anywhere are an error.
"""

import json
from dataclasses import fields

from mcbatch.batch import InvalidDomain, IntegrandSpec, JobSpec, METHOD_DIRECT
from mcbatch.error import DomainError, FormatError
from mcbatch.estimator import RefineConfig
from mcbatch.sampling import HyperRect

_REFINE_KEYS = tuple(f.name for f in fields(RefineConfig))


def _pop_all(data, where, required, optional):
    if not isinstance(data, dict):
        raise FormatError(where, 'expected an object')
    missing = [key for key in required if key not in data]
    if missing:
        raise FormatError(where, 'missing key(s): ' + ', '.join(missing))
    unknown = sorted(set(data) - set(required) - set(optional))
    if unknown:
        raise FormatError(where, 'unknown key(s): ' + ', '.join(unknown))
    return data


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(where, 'expected a number, got {!r}'.format(value))
    return value


def _integer(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(where, 'expected an integer, got {!r}'.format(value))
    return value


def _read_refine(data, where):
    _pop_all(data, where, (), _REFINE_KEYS)
    values = dict()
    for key in _REFINE_KEYS:
        if data.get(key) is None:
            continue
        if key == 'sigma_multiplier':
            values[key] = float(_number(data[key], where + '.' + key))
        else:
            values[key] = _integer(data[key], where + '.' + key)
    return RefineConfig(**values)


def _read_integrand(data, where):
    _pop_all(data, where, ('name', 'expr', 'dim', 'low', 'high', 'samples'),
             ('params', 'method', 'method_config', 'analytic'))
    name = data['name']
    if not isinstance(name, str):
        raise FormatError(where, 'name must be a string')
    where = '{} ({})'.format(where, name)
    if not isinstance(data['expr'], str):
        raise FormatError(where, 'expr must be a string')
    low = data['low']
    high = data['high']
    if not isinstance(low, list) or not isinstance(high, list):
        raise FormatError(where, 'low and high must be lists')
    low = [_number(v, where + '.low') for v in low]
    high = [_number(v, where + '.high') for v in high]
    try:
        domain = HyperRect(tuple(low), tuple(high))
    except DomainError as e:
        domain = InvalidDomain(low, high, str(e))
    params = data.get('params', {})
    if not isinstance(params, dict):
        raise FormatError(where, 'params must be an object')
    for value in params.values():
        _number(value, where + '.params')
    method = data.get('method', METHOD_DIRECT)
    if not isinstance(method, str):
        raise FormatError(where, 'method must be a string')
    method_config = data.get('method_config')
    if method_config is not None:
        method_config = _read_refine(method_config, where + '.method_config')
    analytic = data.get('analytic')
    if analytic is not None:
        analytic = float(_number(analytic, where + '.analytic'))
    return IntegrandSpec(name=name,
                         source=data['expr'],
                         dim=_integer(data['dim'], where + '.dim'),
                         domain=domain,
                         params=dict(params),
                         n_samples=_integer(data['samples'], where + '.samples'),
                         method=method,
                         method_config=method_config,
                         analytic=analytic)


def parse_job(data, where='job'):
    _pop_all(data, where, ('integrands',), ('seed', 'trials', 'workers'))
    integrands = data['integrands']
    if not isinstance(integrands, list):
        raise FormatError(where, 'integrands must be a list')
    return JobSpec(integrands=[_read_integrand(item, 'integrands[{}]'.format(index))
                               for index, item in enumerate(integrands)],
                   seed=_integer(data.get('seed', 0), 'seed'),
                   trials=_integer(data.get('trials', 10), 'trials'),
                   workers=_integer(data.get('workers', 0), 'workers'))


def read_job(file_path):
    try:
        with open(file_path, encoding='utf-8') as file:
            data = json.load(file)
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as e:
        raise FormatError(file_path, 'invalid JSON: {}'.format(e)) from None
    except UnicodeDecodeError as e:
        raise FormatError(file_path, 'not UTF-8: {}'.format(e)) from None
    except OSError as e:
        raise FormatError(file_path, 'unreadable: {}'.format(e.strerror or e)) from None
    return parse_job(data, file_path)


def _refine_to_dict(refine):
    return {key: getattr(refine, key) for key in _REFINE_KEYS if getattr(refine, key) is not None}


def integrand_to_dict(spec):
    data = {
        'name': spec.name,
        'expr': spec.source,
        'dim': spec.dim,
        'low': list(spec.domain.low),
        'high': list(spec.domain.high),
        'params': dict(spec.params),
        'samples': spec.n_samples,
        'method': spec.method,
    }
    if spec.method_config is not None:
        data['method_config'] = _refine_to_dict(spec.method_config)
    if spec.analytic is not None:
        data['analytic'] = spec.analytic
    return data


def job_to_dict(job):
    return {
        'seed': job.seed,
        'trials': job.trials,
        'workers': job.workers,
        'integrands': [integrand_to_dict(spec) for spec in job.integrands],
    }


def write_job(job, file_path):
    with open(file_path, 'w', encoding='utf-8') as file:
        json.dump(job_to_dict(job), file, indent=2)
        file.write('\n')
