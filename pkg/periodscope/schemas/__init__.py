"""Pydantic models for configuration, table rows and output envelopes."""
