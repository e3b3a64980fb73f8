from django.test import SimpleTestCase

from core.utils import float_repr, make_rng, run_slug


class UtilsTestCase(SimpleTestCase):
    def test_float_repr(self):
        self.assertEqual(float_repr(0.1), "0.1")
        self.assertEqual(float_repr(1), "1.0")
        self.assertEqual(float_repr(None), "")
        value = 0.1 + 0.2
        self.assertEqual(float(float_repr(value)), value)

    def test_make_rng_is_seeded(self):
        self.assertEqual(make_rng(7).normal(), make_rng(7).normal())

    def test_run_slug(self):
        self.assertEqual(run_slug("sb_tfi", "n10", "d3", "s7"), "sb_tfi-n10-d3-s7")
        self.assertEqual(run_slug("qaoa", None, "", "n4"), "qaoa-n4")
