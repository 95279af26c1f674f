"""
core tests - run configuration, report rendering and run records.
"""

import json
from fractions import Fraction

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, TestCase, override_settings

from .models import RunRecord
from .output import Report, ReportEncoder, format_cell, render, round_float
from .runconfig import RunConfig


def make_config(**overrides):
    options = {"seed": 11, "format": "json", "output": None, "exact": False, "record": False}
    options.update(overrides)
    return RunConfig.from_options(options)


class RunConfigTestCase(SimpleTestCase):
    """Test option parsing."""

    def test_default_seed_from_settings(self):
        """Test a missing seed falls back to KSBOX_DEFAULT_SEED."""
        with override_settings(KSBOX_DEFAULT_SEED=123):
            config = RunConfig.from_options({"seed": None})
        self.assertEqual(config.seed, 123)
        self.assertEqual(config.output_format, "json")
        self.assertEqual(config.numeric_mode, "float")

    def test_exact_rejected_when_unsupported(self):
        """Test eigenvalue commands refuse exact mode."""
        with self.assertRaises(ValidationError) as ctx:
            RunConfig.from_options({"exact": True}, allow_exact=False)
        self.assertEqual(ctx.exception.code, "exact_unsupported")

    def test_negative_seed_rejected(self):
        """Test seeds must be unsigned."""
        with self.assertRaises(ValidationError):
            make_config(seed=-1)

    def test_meta_block(self):
        """Test the metadata echoes the seed and names the generator."""
        meta = make_config(exact=True).meta()
        self.assertEqual(meta["seed"], 11)
        self.assertEqual(meta["generator"], "numpy.random.Philox")
        self.assertEqual(meta["numeric_mode"], "exact")

    @override_settings(KSBOX_RECORD_RUNS=True)
    def test_record_setting(self):
        """Test KSBOX_RECORD_RUNS turns recording on."""
        self.assertTrue(make_config().record)


class OutputTestCase(SimpleTestCase):
    """Test JSON and CSV rendering."""

    def test_twelve_significant_digits(self):
        """Test floats are cut to 12 significant digits."""
        self.assertEqual(round_float(2 ** 0.5), 1.41421356237)
        self.assertEqual(format_cell(1 / 3), "0.333333333333")

    def test_fraction_cells(self):
        """Test fractions stay rational in exact mode only."""
        self.assertEqual(format_cell(Fraction(21, 25)), "21/25")
        self.assertEqual(format_cell(Fraction(21, 25), exact=False), "0.84")
        self.assertEqual(format_cell(None), "")
        self.assertEqual(format_cell(True), "true")

    def test_encoder_handles_numpy(self):
        """Test numpy scalars and fractions serialize."""
        text = json.dumps(
            {"a": np.int64(3), "b": np.float64(0.5), "c": Fraction(1, 3), "d": np.bool_(True)},
            cls=ReportEncoder,
            sort_keys=True,
        )
        self.assertEqual(text, '{"a": 3, "b": 0.5, "c": "1/3", "d": true}')

    def test_json_report(self):
        """Test the JSON report carries meta and exact fractions."""
        report = Report({"value": Fraction(1, 2), "x": 0.1 + 0.2})
        data = json.loads(render(report, make_config(exact=True)))
        self.assertEqual(data["value"], "1/2")
        self.assertEqual(data["x"], 0.3)
        self.assertEqual(data["meta"]["seed"], 11)

    def test_json_float_mode(self):
        """Test fractions become floats in float mode."""
        data = json.loads(render(Report({"value": Fraction(1, 2)}), make_config()))
        self.assertEqual(data["value"], 0.5)

    def test_csv_rows(self):
        """Test the CSV header, '.' decimals and the seed column."""
        report = Report({}, columns=("n", "p"), rows=[(4, Fraction(1, 3)), (6, 0.4)])
        text = render(report, make_config(format="csv"))
        self.assertEqual(text, "n,p,seed\n4,0.333333333333,11\n6,0.4,11")

    def test_csv_fallback_to_key_value(self):
        """Test payload-only reports flatten to key,value rows ending with the seed."""
        report = Report({"n": 5, "threshold": 0.5, "nested": {"a": 1}})
        text = render(report, make_config(format="csv"))
        self.assertEqual(text, "key,value\nn,5\nthreshold,0.5\nseed,11")

    def test_csv_keeps_own_seed_column(self):
        """Test a report with its own seed column is not given a second one."""
        report = Report({}, columns=("n", "seed"), rows=[(4, 99)])
        text = render(report, make_config(format="csv"))
        self.assertEqual(text, "n,seed\n4,99")


class RunRecordTestCase(TestCase):
    """Test the run record model."""

    def test_str_and_ordering(self):
        """Test the newest record comes first."""
        RunRecord.objects.create(command="box", seed="1", output_format="json")
        latest = RunRecord.objects.create(
            command="sim", seed="2", output_format="csv", succeeded=False
        )
        self.assertEqual(RunRecord.objects.first(), latest)
        self.assertEqual(str(latest), "sim seed=2 (failed)")

    def test_full_width_seed_round_trips(self):
        """Test the largest unsigned 64-bit seed is stored without loss."""
        largest = 2**64 - 1
        created = RunRecord.objects.create(command="sim", seed=str(largest), output_format="json")
        self.assertEqual(RunRecord.objects.get(pk=created.pk).seed_value, largest)
