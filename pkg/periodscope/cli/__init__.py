"""Command implementations and table writers."""
