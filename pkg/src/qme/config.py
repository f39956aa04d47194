"""Numerical tolerances used across the package.

All values live in one frozen record.  ``configure`` swaps the active record
and ``overridden`` does the same for the duration of a ``with`` block.
"""

from __future__ import annotations

import contextlib
import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-9          # structural Hermiticity check, max-norm
    psd: float = 1e-9           # eigenvalues in [-psd, 0) are clipped to 0
    sqrt_residual: float = 1e-8
    ortho: float = 1e-10        # eigenvector unitarity
    reconstruction: float = 1e-9
    trace: float = 1e-9         # unit trace of states
    completeness: float = 1e-8  # sum of effects / Kraus channel condition
    eig_zero: float = 1e-12     # eigenvalues treated as zero in S(rho)
    prob_zero: float = 1e-12    # probabilities treated as zero in S_a(rho)
    degenerate: float = 1e-10   # eigenvalue grouping into spectral projections
    imag: float = 1e-10         # allowed imaginary part of a probability
    drop: float = 1e-12         # zero outcomes dropped from sequential products
    measures: float = 1e-8      # "instrument measures observable" check


_active = Tolerances()


def tolerances() -> Tolerances:
    return _active


def configure(**overrides: float) -> Tolerances:
    """Replace fields of the active tolerance record; returns the previous one."""
    global _active
    previous = _active
    _active = dataclasses.replace(_active, **overrides)
    return previous


@contextlib.contextmanager
def overridden(**overrides: float):
    previous = configure(**overrides)
    try:
        yield _active
    finally:
        _set(previous)


def _set(record: Tolerances) -> None:
    global _active
    _active = record
