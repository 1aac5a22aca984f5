from os import path
from tempfile import TemporaryDirectory
from unittest import TestCase, main

from mcbatch.cli import main as cli_main
from mcbatch.harmonic import MIXED_2D_VALUE, MIXED_3D_VALUE, check_harmonic
from mcbatch.log import logger
from mcbatch.results import read_results
from mcbatch.status import EXIT_OK


class PipelineTest(TestCase):
    """Generate, run and check the benchmark families at reduced size."""
    @classmethod
    def setUpClass(cls):
        cls.directory = TemporaryDirectory()

    @classmethod
    def tearDownClass(cls):
        cls.directory.cleanup()

    def file(self, name):
        return path.join(self.directory.name, name)

    def do_family(self, command, name, n, samples, method=None):
        job_path = self.file(name + '.json')
        results_path = self.file(name + '.csv')
        argv = [command, '--n', str(n), '--samples', samples, '--out', job_path]
        if method:
            argv += ['--method', method]
        self.assertEqual(cli_main(argv), EXIT_OK)
        self.assertEqual(cli_main(['run', job_path, '--out', results_path]), EXIT_OK)
        return results_path

    def test_harmonic(self):
        results_path = self.do_family('gen-harmonic', 'harmonic', 10, '1e5')
        report = check_harmonic(results_path, self.file('harmonic-plot.csv'))
        logger.info('Harmonic: passed %d/%d', report.passed, report.total)
        self.assertGreaterEqual(report.passed, 9)
        self.assertEqual(cli_main(['check-harmonic', results_path, '--min-pass', '0.9']), EXIT_OK)

    def test_harmonic_tree(self):
        results_path = self.do_family('gen-harmonic', 'harmonic-tree', 5, '2e5', 'tree')
        rows = read_results(results_path)
        self.assertEqual({row.method for row in rows}, {'tree'})
        self.assertGreaterEqual(check_harmonic(results_path).passed, 4)

    def test_mixed(self):
        results_path = self.do_family('gen-mixed', 'mixed', 60, '1e5')
        rows = read_results(results_path)
        self.assertEqual({row.dim for row in rows}, {2, 3})
        for row in rows:
            exact = MIXED_2D_VALUE if row.dim == 2 else MIXED_3D_VALUE
            self.assertEqual(row.analytic, exact)
            self.assertLessEqual(abs(row.mean - exact), 5 * max(row.trial_stddev, row.mean_std_error))
        self.assertGreaterEqual(check_harmonic(results_path).fraction(), 0.9)

    def test_reproducible(self):
        first = self.do_family('gen-harmonic', 'repeat-a', 4, '3e4')
        second = self.do_family('gen-harmonic', 'repeat-b', 4, '3e4')
        with open(first, encoding='utf-8') as a, open(second, encoding='utf-8') as b:
            self.assertEqual(a.read(), b.read())


if __name__ == '__main__':
    main()
