"""Validated quantum objects and seeded random ensembles.

Every type validates itself on construction and holds read-only arrays, so a
value that exists is a value that satisfied its invariants.  Validation
rejects; nothing is ever renormalized or projected back into shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from . import linalg as la
from .config import tolerances
from .errors import (
    DimensionError,
    InvariantViolation,
    LabelError,
    NotHermitianError,
    ZeroEffectError,
)

Seed = Union[int, np.random.Generator, np.random.SeedSequence, None]


def _frozen(m) -> np.ndarray:
    arr = la.as_matrix(m)
    if arr is m or arr.base is not None:
        arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _frozen_spectrum(m, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Read-only copy of ``m`` and its ascending eigenvalues."""
    arr = _frozen(m)
    try:
        return arr, la.hermitian_eigvals(arr)
    except NotHermitianError as exc:
        raise InvariantViolation(f"{what} not Hermitian", str(exc), la.hermiticity_defect(arr)) from exc


# --------------------------------------------------------------------- types


@dataclass(frozen=True, eq=False)
class State:
    """Density operator: Hermitian, positive semidefinite, unit trace."""

    rho: np.ndarray

    def __post_init__(self):
        rho, w = _frozen_spectrum(self.rho, "state")
        object.__setattr__(self, "rho", rho)
        tol = tolerances()
        if w[0] < -tol.psd:
            raise InvariantViolation("state has negative eigenvalue", f"min eigenvalue {w[0]:.6g}", -tol.psd - w[0])
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > tol.trace:
            raise InvariantViolation("state trace != 1", f"trace {tr.real:.12g}", abs(tr - 1.0) - tol.trace)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True, eq=False)
class Effect:
    """Operator ``a`` with ``0 <= a <= I`` and ``a != 0``."""

    a: np.ndarray

    def __post_init__(self):
        a, w = _frozen_spectrum(self.a, "effect")
        object.__setattr__(self, "a", a)
        tol = tolerances()
        if w[0] < -tol.psd:
            raise InvariantViolation("effect has negative eigenvalue", f"min eigenvalue {w[0]:.6g}", -tol.psd - w[0])
        if w[-1] > 1 + tol.psd:
            raise InvariantViolation("effect exceeds identity", f"max eigenvalue {w[-1]:.12g}", w[-1] - 1 - tol.psd)
        if max(-w[0], w[-1]) <= tol.psd:
            raise InvariantViolation("effect is zero", "entropy is only defined for nonzero effects")

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class Observable:
    """Finite, ordered, labelled family of nonzero effects summing to I.

    ``dropped`` lists product labels whose operator vanished when the
    observable was built as a sequential product; it is informational only.
    """

    outcomes: tuple[tuple[str, Effect], ...]
    dropped: tuple[str, ...] = field(default=())

    def __post_init__(self):
        outcomes = tuple((str(lbl), eff) for lbl, eff in self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "dropped", tuple(self.dropped))
        if not outcomes:
            raise InvariantViolation("observable has no outcomes")
        _check_labels(lbl for lbl, _ in outcomes)
        dims = {eff.dim for _, eff in outcomes}
        if len(dims) != 1:
            raise InvariantViolation("observable effects differ in dimension", str(sorted(dims)))
        n = dims.pop()
        total = sum(eff.a for _, eff in outcomes)
        defect = la.max_norm(total - np.eye(n))
        tol = tolerances().completeness
        if defect > tol:
            raise InvariantViolation("observable effects do not sum to I", f"max-norm defect {defect:.3e}", defect - tol)

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].dim

    @property
    def labels(self) -> list[str]:
        return [lbl for lbl, _ in self.outcomes]

    @property
    def effects(self) -> list[Effect]:
        return [eff for _, eff in self.outcomes]

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self) -> Iterator[tuple[str, Effect]]:
        return iter(self.outcomes)

    def __getitem__(self, label: str) -> Effect:
        for lbl, eff in self.outcomes:
            if lbl == label:
                return eff
        raise LabelError(f"unknown outcome label {label!r}")


@dataclass(frozen=True, eq=False)
class KrausMap:
    """Completely positive map ``m -> sum K m K^dag``; no trace condition.

    Duals of operations land here, since ``sum K K^dag`` need not be bounded
    by the identity.
    """

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        items = self.kraus
        if isinstance(items, np.ndarray) and items.ndim == 3:
            stack = np.array(items, dtype=np.complex128)
        else:
            items = [la.as_matrix(k, "Kraus operator") for k in items]
            if not items:
                raise InvariantViolation("map has no Kraus operators")
            if len({k.shape for k in items}) != 1:
                raise InvariantViolation("Kraus operators differ in dimension")
            stack = np.array(items)
        if stack.shape[0] == 0:
            raise InvariantViolation("map has no Kraus operators")
        if stack.shape[1] != stack.shape[2]:
            raise InvariantViolation("Kraus operators must be square")
        if not np.isfinite(stack).all():
            raise ValueError("Kraus operator has non-finite entries")
        stack.setflags(write=False)
        object.__setattr__(self, "_stack", stack)
        object.__setattr__(self, "kraus", tuple(stack))

    @property
    def dim(self) -> int:
        return self._stack.shape[1]

    @property
    def gram(self) -> np.ndarray:
        """``sum K^dag K``."""
        s = self._stack
        return np.einsum("kji,kjl->il", s.conj(), s)

    def __call__(self, m: np.ndarray) -> np.ndarray:
        s = self._stack
        return (s @ m @ s.conj().transpose(0, 2, 1)).sum(axis=0)

    def dual(self, b: np.ndarray) -> np.ndarray:
        """Heisenberg-picture action ``B -> sum K^dag B K``."""
        s = self._stack
        return (s.conj().transpose(0, 2, 1) @ b @ s).sum(axis=0)


@dataclass(frozen=True, eq=False)
class Operation(KrausMap):
    """Completely positive trace-nonincreasing map in Kraus form."""

    def __post_init__(self):
        super().__post_init__()
        gram = self.gram
        w = la.hermitian_eigvals(np.eye(self.dim) - gram)
        tol = tolerances().completeness
        if w[0] < -tol:
            raise InvariantViolation("operation increases trace", f"min eigenvalue of I - sum K^dag K = {w[0]:.3e}", -tol - w[0])


@dataclass(frozen=True, eq=False)
class Instrument:
    """Ordered, labelled family of operations whose sum is a channel."""

    outcomes: tuple[tuple[str, Operation], ...]

    def __post_init__(self):
        outcomes = tuple((str(lbl), op) for lbl, op in self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        if not outcomes:
            raise InvariantViolation("instrument has no outcomes")
        _check_labels(lbl for lbl, _ in outcomes)
        if len({op.dim for _, op in outcomes}) != 1:
            raise InvariantViolation("instrument operations differ in dimension")
        gram = sum(op.gram for _, op in outcomes)
        defect = la.max_norm(gram - np.eye(self.dim))
        tol = tolerances().completeness
        if defect > tol:
            raise InvariantViolation("instrument is not trace preserving", f"max-norm defect {defect:.3e}", defect - tol)

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].dim

    @property
    def labels(self) -> list[str]:
        return [lbl for lbl, _ in self.outcomes]

    @property
    def operations(self) -> list[Operation]:
        return [op for _, op in self.outcomes]

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self) -> Iterator[tuple[str, Operation]]:
        return iter(self.outcomes)

    def __getitem__(self, label: str) -> Operation:
        for lbl, op in self.outcomes:
            if lbl == label:
                return op
        raise LabelError(f"unknown outcome label {label!r}")


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """System/probe apparatus ``(dim_h, dim_k, nu, sigma, probe)``.

    ``nu`` is a channel on ``H (x) K`` (system factor outer), ``sigma`` the
    initial probe state and ``probe`` the observable read out on ``K``.
    """

    dim_h: int
    dim_k: int
    nu: Operation
    sigma: State
    probe: Observable

    def __post_init__(self):
        if self.dim_h < 1:
            raise InvariantViolation("dimH must be positive", str(self.dim_h))
        if self.dim_k < 1:
            raise InvariantViolation("dimK must be positive", str(self.dim_k))
        if self.nu.dim != self.dim_h * self.dim_k:
            raise InvariantViolation("nu dimension mismatch", f"nu acts on {self.nu.dim}, expected dimH*dimK = {self.dim_h * self.dim_k}")
        if self.sigma.dim != self.dim_k:
            raise InvariantViolation("sigma dimension mismatch", f"sigma is {self.sigma.dim}-dimensional, dimK = {self.dim_k}")
        if self.probe.dim != self.dim_k:
            raise InvariantViolation("probe dimension mismatch", f"probe is {self.probe.dim}-dimensional, dimK = {self.dim_k}")
        defect = la.max_norm(self.nu.gram - np.eye(self.nu.dim))
        tol = tolerances().completeness
        if defect > tol:
            raise InvariantViolation("nu is not trace preserving", f"max-norm defect {defect:.3e}", defect - tol)


def kraus_gram(kraus: Sequence[np.ndarray]) -> np.ndarray:
    return sum(k.conj().T @ k for k in kraus)


def _check_labels(labels: Iterable[str]) -> None:
    seen: set[str] = set()
    for lbl in labels:
        if not lbl:
            raise InvariantViolation("empty outcome label")
        if lbl in seen:
            raise InvariantViolation("duplicate outcome label", repr(lbl))
        seen.add(lbl)


# ---------------------------------------------------------------- validators


def validate_state(m) -> State:
    return State(m)


def validate_effect(m) -> Effect:
    return m if isinstance(m, Effect) else Effect(m)


def effects_batch(mats: Sequence) -> list[Effect]:
    """``[Effect(m) for m in mats]`` with one stacked eigenvalue call.

    Same-shape inputs that pass every effect check in bulk skip the
    per-matrix validation; anything else goes through ``Effect`` one by one
    so the error raised is the usual one.
    """
    mats = list(mats)
    if not mats or any(isinstance(m, Effect) for m in mats):
        return [validate_effect(m) for m in mats]
    try:
        stack = np.array(mats, dtype=np.complex128)
    except ValueError:
        stack = None
    tol = tolerances()
    if stack is not None and stack.ndim == 3 and stack.shape[1] == stack.shape[2] and stack.shape[1] > 0 \
            and np.isfinite(stack).all():
        adj = stack.conj().transpose(0, 2, 1)
        if np.abs(stack - adj).max() <= tol.herm:
            w = np.linalg.eigvalsh((stack + adj) / 2)
            zero = np.abs(stack).reshape(len(mats), -1).max(axis=1) <= tol.psd
            if w[:, 0].min() >= -tol.psd and w[:, -1].max() <= 1 + tol.psd and not zero.any():
                stack.setflags(write=False)
                out = []
                for m in stack:
                    eff = object.__new__(Effect)
                    object.__setattr__(eff, "a", m)
                    out.append(eff)
                return out
    return [Effect(m) for m in mats]


def _pairs(items) -> list[tuple[str, object]]:
    if isinstance(items, Mapping):
        return list(items.items())
    pairs = []
    for i, item in enumerate(items):
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], str):
            pairs.append(item)
        else:
            pairs.append((str(i), item))
    return pairs


def validate_observable(items) -> Observable:
    """Build an Observable from ``{label: matrix}``, ``[(label, matrix)]`` or
    a bare list of matrices (labelled ``"0"``, ``"1"``, ...)."""
    pairs = _pairs(items)
    effects = effects_batch([m for _, m in pairs])
    return Observable(tuple((lbl, eff) for (lbl, _), eff in zip(pairs, effects)))


def validate_operation(kraus) -> Operation:
    if isinstance(kraus, Operation):
        return kraus
    return Operation(tuple(kraus))


def validate_instrument(items) -> Instrument:
    return Instrument(tuple((lbl, validate_operation(op)) for lbl, op in _pairs(items)))


def complement(a: Effect) -> Effect:
    """``I - a``; raises ZeroEffectError when ``a`` is the identity."""
    c = np.eye(a.dim) - a.a
    if la.max_norm(c) <= tolerances().psd:
        raise ZeroEffectError("complement of the identity is the zero operator")
    return Effect(c)


def trivial_observable(weights: Sequence[float], dim: int) -> Observable:
    return validate_observable([w * np.eye(dim) for w in weights])


def spectral_observable(state: State) -> Observable:
    """Observable made of the spectral projections of ``state``.

    Eigenvalues within the degeneracy tolerance share one projection; the
    kernel (if any) is a projection of its own so the family sums to I.
    """
    eig = la.hermitian_eig(state.rho)
    projections = [p for _, p in spectral_projections(eig)]
    return validate_observable(projections)


def spectral_projections(eig: la.EigenDecomposition) -> list[tuple[float, np.ndarray]]:
    """Group an eigendecomposition into ``(eigenvalue, projection)`` pairs."""
    tol = tolerances().degenerate
    w, u = eig.eigenvalues, eig.eigenvectors
    groups: list[list[int]] = []
    for i, lam in enumerate(w):
        if groups and abs(lam - w[groups[-1][0]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        v = u[:, g]
        out.append((float(np.mean(w[g])), v @ v.conj().T))
    return out


# ------------------------------------------------------------------ ensembles


def rng_from(seed: Seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_state(dim: int, rank: int | None = None, seed: Seed = None) -> State:
    """Ginibre ensemble state ``G G^dag / tr(G G^dag)`` with ``G`` of size ``dim x rank``."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise DimensionError(f"rank must be in [1, {dim}], got {rank}")
    g = la.ginibre(rng_from(seed), dim, rank)
    m = g @ g.conj().T
    return State(m / np.trace(m).real)


def random_effect(dim: int, seed: Seed = None) -> Effect:
    """Random Hermitian matrix with its spectrum mapped affinely onto ``[lo, hi]``."""
    rng = rng_from(seed)
    g = la.ginibre(rng, dim, dim)
    w, u = np.linalg.eigh((g + g.conj().T) / 2)
    lo, hi = np.sort(rng.uniform(size=2))
    if hi <= tolerances().psd:
        hi = 1.0
    spread = w[-1] - w[0]
    if spread > 0:
        w = lo + (hi - lo) * (w - w[0]) / spread
    else:
        w = np.full_like(w, hi)
    return Effect((u * w) @ u.conj().T)


def random_observable(dim: int, outcomes: int, seed: Seed = None) -> Observable:
    """Normalized Ginibre POVM ``S^{-1/2} B_x S^{-1/2}`` with ``B_x = G_x^dag G_x``."""
    if outcomes < 1:
        raise DimensionError("an observable needs at least one outcome")
    rng = rng_from(seed)
    bs = []
    for _ in range(outcomes):
        g = la.ginibre(rng, dim, dim)
        bs.append(g.conj().T @ g)
    s_inv = la.psd_inv_sqrt(sum(bs))
    return validate_observable([s_inv @ b @ s_inv for b in bs])


def random_instrument(dim: int, outcomes: int, kraus_per_outcome: int = 1, seed: Seed = None) -> Instrument:
    """Ginibre Kraus operators ``V_j T^{-1/2}`` split evenly among outcomes."""
    if outcomes < 1 or kraus_per_outcome < 1:
        raise DimensionError("outcomes and kraus_per_outcome must be positive")
    rng = rng_from(seed)
    vs = [la.ginibre(rng, dim, dim) for _ in range(outcomes * kraus_per_outcome)]
    t_inv = la.psd_inv_sqrt(kraus_gram(vs))
    ks = [v @ t_inv for v in vs]
    return validate_instrument(
        [tuple(ks[i * kraus_per_outcome:(i + 1) * kraus_per_outcome]) for i in range(outcomes)]
    )


def random_channel(dim: int, kraus: int = 2, seed: Seed = None) -> Operation:
    return random_instrument(dim, 1, kraus, seed).operations[0]


def random_atomic_observable(dim: int, seed: Seed = None) -> Observable:
    """Rank-one projections onto the columns of a Haar unitary."""
    u = la.random_unitary(rng_from(seed), dim)
    return validate_observable([np.outer(u[:, i], u[:, i].conj()) for i in range(dim)])

