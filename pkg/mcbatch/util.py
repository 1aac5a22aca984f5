import re
from os import cpu_count

from mcbatch.error import FormatError

COUNT_RE = re.compile(r'([0-9]+(?:\.[0-9]*)?)(?:(e|\^)([0-9]+))?([km]?)')
COUNT_UNITS = {'': 1, 'k': 1000, 'm': 1000000}


def format_real(value):
    return '%.17g' % value


def parse_real(text):
    try:
        return float(text)
    except ValueError:
        raise FormatError(text, 'error parsing real') from None


def parse_count(count_str):
    """Parse sample counts such as ``1000000``, ``1e6``, ``10^6`` or ``1m``."""
    match = COUNT_RE.fullmatch(count_str.strip().lower())
    if not match:
        raise FormatError(count_str, 'error parsing count')
    mantissa, op, exponent, unit = match.groups()
    value = float(mantissa)
    if op == 'e':
        value *= 10 ** int(exponent)
    elif op == '^':
        value = value ** int(exponent)
    value *= COUNT_UNITS[unit]
    if value != int(value):
        raise FormatError(count_str, 'count is not an integer')
    return int(value)


def resolve_workers(workers):
    """Map a worker count to a thread count; 0 means every hardware thread."""
    if workers < 0:
        raise ValueError('workers must be non-negative')
    return workers or cpu_count() or 1
