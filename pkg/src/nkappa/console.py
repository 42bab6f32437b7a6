from __future__ import annotations

from . import config


def log(tag: str, msg: str):
    """Always log - summaries and results."""
    print(f"[{tag}] {msg}")


def log_verbose(tag: str, msg: str):
    """Only log in verbose mode"""
    if config.VERBOSE:
        print(f"[{tag}] {msg}")
