"""Clue-anchored vulnerability triage over code property graphs."""

__version__ = "0.1.0"
