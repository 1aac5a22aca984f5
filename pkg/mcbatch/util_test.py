import math
from unittest import main, TestCase

from mcbatch.error import FormatError
from mcbatch.util import format_real, parse_count, parse_real, resolve_workers


class UtilTest(TestCase):
    def test_parse_count(self):
        self.assertEqual(parse_count('1000000'), 1000000)
        self.assertEqual(parse_count('1e6'), 1000000)
        self.assertEqual(parse_count('10^6'), 1000000)
        self.assertEqual(parse_count('1m'), 1000000)
        self.assertEqual(parse_count('2.5k'), 2500)
        self.assertEqual(parse_count(' 64K '), 64000)

    def test_parse_count_invalid(self):
        for text in ('', 'many', '1e', '0.5', '1g', '-3'):
            with self.subTest(text=text):
                with self.assertRaises(FormatError):
                    parse_count(text)

    def test_reals(self):
        for value in (math.pi, 1 / 3, 1e-300, -2.5e17):
            self.assertEqual(parse_real(format_real(value)), value)
        with self.assertRaises(FormatError):
            parse_real('1,5')

    def test_resolve_workers(self):
        self.assertEqual(resolve_workers(3), 3)
        self.assertGreaterEqual(resolve_workers(0), 1)
        with self.assertRaises(ValueError):
            resolve_workers(-1)


if __name__ == '__main__':
    main()
