from django.db import models


class NumericMode(models.TextChoices):
    """How a command computed its numbers"""

    EXACT = "exact", "Exact"
    FLOAT = "float", "Float"


class RunRecord(models.Model):
    """One command invocation and the report it emitted"""

    command = models.CharField(max_length=50)
    arguments = models.JSONField(default=dict)
    # unsigned 64-bit seed as decimal text
    seed = models.CharField(max_length=20)
    output_format = models.CharField(max_length=10)
    numeric_mode = models.CharField(
        max_length=10, choices=NumericMode.choices, default=NumericMode.FLOAT
    )
    succeeded = models.BooleanField(default=True)
    payload = models.JSONField(default=dict)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at", "-id"]
        indexes = [
            models.Index(fields=["command", "-created_at"], name="core_runrec_command_idx"),
        ]

    def __str__(self):
        status = "ok" if self.succeeded else "failed"
        return f"{self.command} seed={self.seed} ({status})"

    @property
    def seed_value(self) -> int:
        return int(self.seed)
