from appdirs import user_config_dir
from os import environ, path
from ruamel.yaml import YAML

from mcbatch.log import logger

_CONFIG_DIR = user_config_dir('mcbatch')
_CONFIG_FILE = environ.get('MCBATCH_CONFIG', path.join(_CONFIG_DIR, 'config.yaml'))

DEFAULTS = {
    'cell_cap': 1000000,
    'initial_cell_cap': 4096,
    'samples_per_cell': 2048,
    'max_depth': 6,
    'sigma_multiplier': 1.0,
    'nonfinite_warn_fraction': 0.01,
    'inflight_per_worker': 4,
}


def _load_config():
    _config = dict(DEFAULTS)
    try:
        with open(_CONFIG_FILE, encoding='utf-8') as file:
            loaded = YAML(typ='safe').load(file) or {}
    except FileNotFoundError:
        logger.debug('Config file %s not found, using defaults', _CONFIG_FILE)
        return _config
    for key in loaded:
        if key not in DEFAULTS:
            logger.warning('Unknown key in config file %s: %s', _CONFIG_FILE, key)
    _config.update(loaded)
    return _config


config = _load_config()


if __name__ == '__main__':
    print(config)
