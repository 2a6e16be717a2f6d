"""Integration tests for the installed console script.

These run ``periodscope`` in a subprocess and are excluded by default:

    # Run only unit tests
    pytest -m "not integration"

    # Run only integration tests (requires `poetry install`)
    pytest -m integration
"""
