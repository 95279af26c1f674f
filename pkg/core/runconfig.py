"""
Per-invocation settings shared by every command.
"""

from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

from django.conf import settings
from django.core.exceptions import ValidationError

GENERATOR = "numpy.random.Philox"
FORMATS = ("json", "csv")
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RunConfig:
    seed: int
    output_format: str
    output: Optional[str]
    numeric_mode: str
    record: bool = False

    @property
    def exact(self) -> bool:
        return self.numeric_mode == "exact"

    def meta(self) -> Dict[str, Any]:
        """Metadata echoed in every JSON report."""
        return {
            "seed": self.seed,
            "version": settings.KSBOX_VERSION,
            "generator": GENERATOR,
            "numeric_mode": self.numeric_mode,
        }

    @classmethod
    def from_options(
        cls,
        options: Mapping[str, Any],
        default_format: str = "json",
        allow_exact: bool = True,
    ) -> "RunConfig":
        seed = options.get("seed")
        if seed is None:
            seed = settings.KSBOX_DEFAULT_SEED
        if not 0 <= seed <= MAX_SEED:
            raise ValidationError(f"seed {seed} is not a 64-bit unsigned integer", code="malformed")

        output_format = options.get("format") or default_format
        if output_format not in FORMATS:
            raise ValidationError(f"unknown output format {output_format!r}", code="malformed")

        exact = bool(options.get("exact"))
        if exact and not allow_exact:
            raise ValidationError(
                "exact mode is not available for eigenvalue-based results",
                code="exact_unsupported",
            )
        record = bool(options.get("record")) or settings.KSBOX_RECORD_RUNS
        return cls(
            seed=seed,
            output_format=output_format,
            output=options.get("output"),
            numeric_mode="exact" if exact else "float",
            record=record,
        )
