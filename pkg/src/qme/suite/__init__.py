"""Randomized verification of the entropy inequalities and identities."""

from .harness import (
    CheckReport,
    PropertyCheck,
    Trial,
    get_check,
    registered_ids,
    run_all,
    run_check,
)

__all__ = [
    "CheckReport",
    "PropertyCheck",
    "Trial",
    "get_check",
    "registered_ids",
    "run_all",
    "run_check",
]
