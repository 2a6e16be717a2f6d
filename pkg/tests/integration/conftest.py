"""Fixtures for integration tests.

Integration tests run the installed ``periodscope`` console script in a
subprocess. They are skipped when the script is not on PATH.

Run with:
    pytest tests/integration -m integration
"""

import shutil
import subprocess

import pytest

pytestmark = pytest.mark.integration


@pytest.fixture(scope="session")
def console_script() -> str:
    """Path of the installed console script."""
    path = shutil.which("periodscope")
    if path is None:
        pytest.skip("periodscope console script not installed (run `poetry install`)")
    return path


@pytest.fixture
def run_cli(console_script: str):
    """Run the console script with arguments and return the completed process."""

    def run(*args: str) -> subprocess.CompletedProcess[str]:
        return subprocess.run(
            [console_script, *args],
            capture_output=True,
            text=True,
            timeout=300,
            env={"PERIODSCOPE_ENVIRONMENT": "production", "PATH": ""},
        )

    return run
