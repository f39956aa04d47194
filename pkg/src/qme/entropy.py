"""Entropy functionals in nats.

``S_a(rho) = -tr(rho a) ln[tr(rho a) / tr(a)]`` is the building block; the
observable and instrument entropies are sums of it.  Terms with probability
at or below ``prob_zero`` contribute nothing, which is the continuous
extension ``0 ln 0 = 0``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import linalg as la
from .config import tolerances
from .errors import NumericalError, UndefinedBoundError
from .objects import Effect, Instrument, Observable, State, spectral_projections


class EffectEntropyBounds(NamedTuple):
    lower: float
    upper: float


def _clamp(value: float) -> float:
    if value < 0 and value >= -1e-12:
        return 0.0
    return float(value)


def probability(rho: State | np.ndarray, a: Effect | np.ndarray) -> float:
    """``tr(rho a)`` as a real number; the imaginary part must be negligible."""
    r = rho.rho if isinstance(rho, State) else rho
    m = a.a if isinstance(a, Effect) else a
    # tr(r m) without forming the product
    p = complex(np.sum(r * m.T))
    if abs(p.imag) > tolerances().imag:
        raise NumericalError(f"probability has imaginary part {p.imag:.3e}")
    return p.real


def _real_trace(m: np.ndarray) -> float:
    return float(np.trace(m).real)


def entropy_term(p: float, volume: float) -> float:
    """``-p ln(p / volume)`` with the zero-probability convention."""
    if p <= tolerances().prob_zero:
        return 0.0
    return -p * math.log(p / volume)


def von_neumann_entropy(rho: State) -> float:
    w = la.hermitian_eigvals(rho.rho)
    w = w[w > tolerances().eig_zero]
    return _clamp(float(-np.sum(w * np.log(w))))


def effect_entropy(a: Effect, rho: State) -> float:
    return _clamp(entropy_term(probability(rho, a), _real_trace(a.a)))


def effect_entropy_bounds(a: Effect, rho: State) -> EffectEntropyBounds:
    """Spectral lower bound and logarithmic upper bound on ``S_a(rho)``.

    Degenerate eigenvalues of ``rho`` are merged into one spectral projection
    before the lower bound is summed.
    """
    p = probability(rho, a)
    if p <= tolerances().prob_zero:
        raise UndefinedBoundError("bounds need tr(rho a) > 0")
    lower = 0.0
    for lam, proj in spectral_projections(la.hermitian_eig(rho.rho)):
        if lam > tolerances().eig_zero:
            lower -= probability(proj, a) * lam * math.log(lam)
    upper = math.log(_real_trace(a.a) / p)
    return EffectEntropyBounds(_clamp(lower), upper)


def observable_entropy(A: Observable, rho: State) -> float:
    return _clamp(sum(entropy_term(probability(rho, eff), _real_trace(eff.a)) for eff in A.effects))


def instrument_entropy(inst: Instrument, rho: State) -> float:
    """Entropy of an instrument evaluated from its operations directly:
    ``-sum_x tr[I_x(rho)] ln(tr[I_x(rho)] / tr[I_x(I)])``."""
    n = inst.dim
    eye = np.eye(n)
    total = 0.0
    for op in inst.operations:
        p = _real_trace(op(rho.rho))
        t = _real_trace(op(eye))
        total += entropy_term(p, t)
    return _clamp(total)
