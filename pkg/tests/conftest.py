"""
Global pytest configuration and fixtures.
This file is automatically loaded by pytest.
"""

import json
from io import StringIO

import pytest
from django.core.management import call_command

from tests.factories import RunRecordFactory


# --- Command Fixtures ---

@pytest.fixture
def run_command():
    """Run a management command and return its stdout."""

    def _run(*args, **options):
        out = StringIO()
        call_command(*args, stdout=out, **options)
        return out.getvalue()

    return _run


@pytest.fixture
def run_json(run_command):
    """Run a command that emits JSON and return the parsed report."""

    def _run(*args, **options):
        return json.loads(run_command(*args, **options))

    return _run


@pytest.fixture
def singlet_file(tmp_path):
    """Density-matrix JSON file holding the two-qubit singlet."""
    path = tmp_path / "singlet.json"
    path.write_text(
        json.dumps(
            {
                "dim": 4,
                "re": [
                    [0, 0, 0, 0],
                    [0, 0.5, -0.5, 0],
                    [0, -0.5, 0.5, 0],
                    [0, 0, 0, 0],
                ],
            }
        )
    )
    return path


# --- Record Fixtures ---

@pytest.fixture
def stored_runs(db):
    """A few stored runs across two commands."""
    return [
        RunRecordFactory(command="box"),
        RunRecordFactory(command="box", succeeded=False),
        RunRecordFactory(command="sweep", output_format="csv"),
    ]
