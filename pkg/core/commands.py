"""
Base class for the report-producing management commands.
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, NoReturn

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from .models import RunRecord
from .output import Report, prepare, render
from .runconfig import FORMATS, RunConfig

logger = logging.getLogger(__name__)

# Options every Django command receives; not worth recording.
BASE_OPTIONS = {
    "verbosity",
    "settings",
    "pythonpath",
    "traceback",
    "no_color",
    "force_color",
    "skip_checks",
    "stdout",
    "stderr",
}


def parse_probability(text: str, exact: bool):
    """'0.5' or '1/2' as a Fraction in exact mode, a float otherwise."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot read probability {text!r}", code="malformed") from exc
    return value if exact else float(value)


def error_code(exc: ValidationError) -> str:
    return getattr(exc, "code", None) or "invalid"


def error_message(exc: ValidationError) -> str:
    return "; ".join(exc.messages)


class ReportCommand(BaseCommand):
    """Adds the shared flags, renders the report and records the run.

    Subclasses implement ``add_report_arguments`` and ``build_report``.
    """

    default_format = "json"
    allow_exact = True

    def add_arguments(self, parser):
        self.add_report_arguments(parser)
        parser.add_argument("--seed", type=int, default=None, help="RNG seed (64-bit)")
        parser.add_argument(
            "--format",
            choices=FORMATS,
            default=None,
            help=f"Output format (default {self.default_format})",
        )
        parser.add_argument("--output", type=str, default=None, help="Write to this file")
        parser.add_argument(
            "--exact", action="store_true", help="Rational arithmetic where supported"
        )
        parser.add_argument(
            "--record", action="store_true", help="Store the run as a RunRecord"
        )

    def add_report_arguments(self, parser):
        pass

    def exact_supported(self, options: Dict[str, Any]) -> bool:
        return self.allow_exact

    def build_report(self, config: RunConfig, options: Dict[str, Any]) -> Report:
        raise NotImplementedError

    def handle(self, *args, **options):
        name = self.command_name()
        try:
            config = RunConfig.from_options(
                options,
                default_format=self.default_format,
                allow_exact=self.exact_supported(options),
            )
            report = self.build_report(config, options)
        except ValidationError as exc:
            self._fail(name, options, error_code(exc), error_message(exc), exc)
        except ArithmeticError as exc:
            self._fail(name, options, "numeric_failure", str(exc), exc)

        text = render(report, config)
        if config.output:
            Path(config.output).write_text(text + "\n", encoding="utf-8")
        else:
            self.stdout.write(text)

        if config.record:
            self._record(name, options, config, prepare(report.payload, exact=False), report.ok)
        if not report.ok:
            logger.error("%s tripwire: %s", name, report.failure)
            raise CommandError(report.failure)
        logger.info("%s finished (seed=%s, format=%s)", name, config.seed, config.output_format)

    def command_name(self) -> str:
        return self.__class__.__module__.rsplit(".", 1)[-1]

    def _fail(self, name, options, code, message, exc) -> NoReturn:
        logger.warning("%s failed: %s", name, code)
        if options.get("record") or settings.KSBOX_RECORD_RUNS:
            self._record(name, options, None, {"error": code, "message": message}, False)
        raise CommandError(f"{code}: {message}") from exc

    def _record(self, name, options, config, payload, succeeded) -> RunRecord:
        arguments = {
            key: value
            for key, value in sorted(options.items())
            if key not in BASE_OPTIONS and isinstance(value, (str, int, float, bool, type(None)))
        }
        return RunRecord.objects.create(
            command=name,
            arguments=arguments,
            seed=str(config.seed if config else self._requested_seed(options)),
            output_format=config.output_format if config else (options.get("format") or self.default_format),
            numeric_mode=config.numeric_mode if config else ("exact" if options.get("exact") else "float"),
            succeeded=succeeded,
            payload=payload,
        )

    @staticmethod
    def _requested_seed(options) -> int:
        seed = options.get("seed")
        return settings.KSBOX_DEFAULT_SEED if seed is None else seed
