from asyncio import gather, get_running_loop, Semaphore
from concurrent.futures import ThreadPoolExecutor
from functools import partial

from mcbatch.config import config
from mcbatch.log import logger
from mcbatch.util import resolve_workers


class WorkerPool:
    """Thread pool shared by every integrand, trial and chunk of a batch.

    Blocking work units are submitted from coroutines; a semaphore bounds the
    number of units queued or running at once.
    """

    def __init__(self, workers=0):
        self.workers = resolve_workers(workers)
        self.executor = ThreadPoolExecutor(max_workers=self.workers,
                                           thread_name_prefix='mcbatch')
        self._loop = None
        self._semaphore = None
        logger.info('Using parallelism: %d', self.workers)

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        self.executor.shutdown(wait=True)

    def _get_semaphore(self):
        loop = get_running_loop()
        if self._loop is not loop:
            self._loop = loop
            self._semaphore = Semaphore(self.workers * config['inflight_per_worker'])
        return self._semaphore

    async def call(self, fn, *args):
        async with self._get_semaphore():
            return await get_running_loop().run_in_executor(self.executor, partial(fn, *args))


async def run_all(pool, fn, arg_lists):
    """Run ``fn(*args)`` for every entry; results keep the order of ``arg_lists``."""
    if pool is None:
        loop = get_running_loop()
        return await gather(*(loop.run_in_executor(None, partial(fn, *args))
                              for args in arg_lists))
    return await gather(*(pool.call(fn, *args) for args in arg_lists))
