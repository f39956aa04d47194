"""Operations, duals, sequential products, coarse-graining and measurement models."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import linalg as la
from .config import tolerances
from .entropy import entropy_term, observable_entropy, probability
from .errors import (
    DimensionError,
    InstrumentMismatchError,
    InvariantViolation,
    LabelError,
    NotSurjectiveError,
    NumericalError,
    ZeroEffectError,
)
from .objects import (
    Effect,
    Instrument,
    KrausMap,
    MeasurementModel,
    Observable,
    Operation,
    State,
    effects_batch,
    validate_instrument,
)


def product_label(x: str, y: str) -> str:
    return f"({x},{y})"


# ---------------------------------------------------------------- operations


def apply_operation(op: KrausMap, m: np.ndarray) -> np.ndarray:
    m = la.as_matrix(m)
    if m.shape[0] != op.dim:
        raise DimensionError(f"operation acts on dimension {op.dim}, input has {m.shape[0]}")
    return op(m)


def dual_operation(op: KrausMap) -> KrausMap:
    """The map ``B -> sum K^dag B K``, itself in Kraus form (adjoint list)."""
    return KrausMap(tuple(k.conj().T for k in op.kraus))


def measured_effect(op: KrausMap) -> Effect:
    """The effect ``op^*(I)`` that ``op`` measures."""
    m = op.dual(np.eye(op.dim))
    if la.max_norm(m) <= tolerances().psd:
        raise ZeroEffectError("operation measures the zero effect")
    return Effect(m)


def luders_operation(a: Effect) -> Operation:
    return Operation((la.psd_sqrt(a.a),))


def holevo_operation(a: Effect, alpha: State) -> Operation:
    """Kraus form of ``A -> tr(A a) alpha``.

    Kraus operators are ``sqrt(mu_j) |phi_j><e_i| a^{1/2}`` over the eigenpairs
    of ``alpha`` with ``mu_j > eig_zero`` and the standard basis ``e_i``.  The
    action is checked against the closed form on a fixed probe input.
    """
    if a.dim != alpha.dim:
        raise DimensionError(f"effect dimension {a.dim} != state dimension {alpha.dim}")
    n = a.dim
    root = la.psd_sqrt(a.a)
    eig = la.hermitian_eig(alpha.rho)
    keep = eig.eigenvalues > tolerances().eig_zero
    phis = eig.eigenvectors[:, keep] * np.sqrt(eig.eigenvalues[keep])
    # |phi_j><e_i| a^{1/2} = outer(phi_j, row i of a^{1/2})
    kraus = np.einsum("aj,ib->jiab", phis, root).reshape(-1, n, n)
    op = Operation(kraus)

    probe = la.ginibre(np.random.default_rng(0x5EED), n, n)
    expected = np.trace(probe @ a.a) * alpha.rho
    residual = la.max_norm(op(probe) - expected)
    if residual > 1e-10 * max(1.0, la.max_norm(expected)):
        raise NumericalError(f"Holevo Kraus form deviates from tr(Aa)alpha by {residual:.3e}")
    return op


def sequential_product_effect(op: KrausMap, b: Effect) -> Effect:
    """``a o b = op^*(b)`` where ``a`` is the effect measured by ``op``."""
    measured_effect(op)
    if b.dim != op.dim:
        raise DimensionError("effect and operation dimensions differ")
    m = op.dual(b.a)
    if la.max_norm(m) <= tolerances().drop:
        raise ZeroEffectError("sequential product is the zero operator")
    return Effect(m)


def iterated_sequential_product(ops: Sequence[KrausMap], last: Effect) -> Effect:
    """``a^1 o a^2 o ... o a^m = (I^1)^* (I^2)^* ... (I^{m-1})^*(a^m)``."""
    m = last.a
    for op in reversed(ops):
        m = op.dual(m)
    if la.max_norm(m) <= tolerances().drop:
        raise ZeroEffectError("sequential product is the zero operator")
    return Effect(m)


def holevo_chain(effects: Sequence[Effect], alphas: Sequence[State]) -> Effect:
    """Closed form of a chain of Holevo sequential products.

    ``a_1 o ... o a_m = tr(alpha_{m-1} a_m) ... tr(alpha_1 a_2) a_1`` where
    ``a_i`` is measured with the Holevo operation built from ``alpha_i``.
    """
    if not effects:
        raise ValueError("need at least one effect")
    if len(alphas) != len(effects) - 1:
        raise ValueError(f"need {len(effects) - 1} states, got {len(alphas)}")
    coeff = 1.0
    for alpha, nxt in zip(alphas, effects[1:]):
        coeff *= probability(alpha, nxt)
    out = coeff * effects[0].a
    if la.max_norm(out) <= tolerances().drop:
        raise ZeroEffectError("chain coefficient vanishes")
    return Effect(out)


# --------------------------------------------------------------- instruments


def measured_observable(inst: Instrument) -> Observable:
    """The unique observable with ``A_x = I_x^*(I)``; zero outcomes are dropped."""
    eye = np.eye(inst.dim)
    kept, dropped = [], []
    for lbl, op in inst:
        m = op.dual(eye)
        if la.max_norm(m) <= tolerances().drop:
            dropped.append(lbl)
        else:
            kept.append((lbl, m))
    return _observable(kept, dropped)


def _observable(pairs, dropped=()) -> Observable:
    effects = effects_batch([m for _, m in pairs])
    return Observable(tuple((lbl, e) for (lbl, _), e in zip(pairs, effects)), tuple(dropped))


def luders_instrument(A: Observable) -> Instrument:
    return Instrument(tuple((lbl, luders_operation(eff)) for lbl, eff in A))


def holevo_instrument(A: Observable, alphas: Mapping[str, State] | Sequence[State]) -> Instrument:
    if not isinstance(alphas, Mapping):
        alphas = dict(zip(A.labels, alphas))
    try:
        return Instrument(tuple((lbl, holevo_operation(eff, alphas[lbl])) for lbl, eff in A))
    except KeyError as exc:
        raise LabelError(f"no Holevo state for outcome {exc.args[0]!r}") from exc


@functools.lru_cache(maxsize=None)
def _measure_probes(n: int) -> tuple[np.ndarray, ...]:
    rng = np.random.default_rng(0xC0FFEE)
    probes = []
    for _ in range(3):
        g = la.ginibre(rng, n, n)
        r = g @ g.conj().T
        r = r / np.trace(r).real
        r.setflags(write=False)
        probes.append(r)
    return tuple(probes)


def check_measures(inst: Instrument, A: Observable) -> None:
    """Raise InstrumentMismatchError unless ``inst`` measures ``A``.

    Checked two ways: ``I_x^*(I) == A_x`` and ``tr[I_x(rho)] == tr(rho A_x)``
    on a few fixed random states.
    """
    tol = tolerances().measures
    if inst.dim != A.dim:
        raise InstrumentMismatchError(f"instrument dimension {inst.dim} != observable dimension {A.dim}")
    if set(inst.labels) != set(A.labels) or len(inst) != len(A):
        raise InstrumentMismatchError(f"outcome sets differ: {inst.labels} vs {A.labels}")
    eye = np.eye(A.dim)
    probes = _measure_probes(A.dim)
    for lbl, eff in A:
        op = inst[lbl]
        defect = la.max_norm(op.dual(eye) - eff.a)
        if defect > tol:
            raise InstrumentMismatchError(f"outcome {lbl!r}: I_x^*(I) differs from A_x by {defect:.3e}")
        for r in probes:
            gap = abs(np.trace(op(r)).real - probability(r, eff))
            if gap > tol:
                raise InstrumentMismatchError(f"outcome {lbl!r}: probabilities differ by {gap:.3e}")


def observable_sequential(A: Observable, inst: Instrument, B: Observable) -> Observable:
    """Sequential product observable ``(A o B)_(x,y) = I_x^*(B_y)``.

    Outcomes whose operator vanishes are left out and listed in ``dropped``.
    """
    check_measures(inst, A)
    if B.dim != A.dim:
        raise DimensionError("observables act on different spaces")
    kept, dropped = [], []
    for x in A.labels:
        op = inst[x]
        for y, b in B:
            m = op.dual(b.a)
            lbl = product_label(x, y)
            if la.max_norm(m) <= tolerances().drop:
                dropped.append(lbl)
            else:
                kept.append((lbl, m))
    return _observable(kept, dropped)


def compose_instruments(j: Instrument, i: Instrument) -> Instrument:
    """``j`` after ``i``: outcome ``(x,y)`` runs ``i_x`` then ``j_y``."""
    if i.dim != j.dim:
        raise DimensionError(f"instrument dimensions differ: {i.dim} vs {j.dim}")
    outcomes = []
    for x, first in i:
        for y, second in j:
            kraus = tuple(kj @ ki for ki in first.kraus for kj in second.kraus)
            outcomes.append((product_label(x, y), Operation(kraus)))
    return Instrument(tuple(outcomes))


# ------------------------------------------------------- observable algebra


def coarse_grain(A: Observable, assignment: Mapping[str, str], targets: Iterable[str] | None = None) -> Observable:
    """``B_y = sum{A_x : f(x) = y}`` for the map ``f`` given by ``assignment``.

    New outcomes are ordered by first appearance.  When ``targets`` is given
    it is the declared outcome space of ``B`` and must be covered.
    """
    missing = [x for x in A.labels if x not in assignment]
    if missing:
        raise LabelError(f"assignment is not total, missing {missing}")
    extra = [x for x in assignment if x not in A.labels]
    if extra:
        raise LabelError(f"assignment has unknown labels {extra}")
    fibers: dict[str, list[np.ndarray]] = {}
    for x, eff in A:
        fibers.setdefault(str(assignment[x]), []).append(eff.a)
    if targets is not None:
        targets = [str(t) for t in targets]
        empty = [t for t in targets if t not in fibers]
        if empty:
            raise NotSurjectiveError(f"empty fibers for {empty}")
        stray = [y for y in fibers if y not in targets]
        if stray:
            raise LabelError(f"assignment maps outside the declared outcome space: {stray}")
        order = targets
    else:
        order = list(fibers)
    return _observable([(y, sum(fibers[y])) for y in order])


@dataclass(frozen=True)
class Distribution:
    """Outcome probabilities ``tr(rho A_x)`` in outcome order."""

    weights: tuple[tuple[str, float], ...]

    def __getitem__(self, label: str) -> float:
        for lbl, p in self.weights:
            if lbl == label:
                return p
        raise LabelError(f"unknown outcome label {label!r}")

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.weights])

    def total(self) -> float:
        return float(sum(p for _, p in self.weights))


def distribution(A: Observable, rho: State) -> Distribution:
    return Distribution(tuple((lbl, probability(rho, eff)) for lbl, eff in A))


def distribution_of_subset(A: Observable, rho: State, subset: Iterable[str]) -> float:
    dist = distribution(A, rho)
    return float(sum(dist[lbl] for lbl in set(subset)))


def tensor_observable(A: Observable, B: Observable) -> Observable:
    return _observable([(product_label(x, y), np.kron(a.a, b.a)) for x, a in A for y, b in B])


# --------------------------------------------------------- measurement model


def _embedding_kraus(model: MeasurementModel) -> list[np.ndarray]:
    """Rectangular Kraus operators of ``rho -> rho (x) sigma``."""
    eig = la.hermitian_eig(model.sigma.rho)
    eye = np.eye(model.dim_h)
    out = []
    for s, psi in zip(eig.eigenvalues, eig.eigenvectors.T):
        if s > tolerances().eig_zero:
            out.append(math.sqrt(s) * np.kron(eye, psi.reshape(-1, 1)))
    return out


def model_instrument(model: MeasurementModel) -> Instrument:
    """Instrument ``I_x(rho) = tr_K[nu(rho (x) sigma)(I (x) P_x)]`` in Kraus form.

    Built by chaining the embedding ``rho -> rho (x) sigma``, the channel
    ``nu``, the two-sided root of ``I (x) P_x`` and a Kraus form of the
    partial trace over ``K``.
    """
    dh, dk = model.dim_h, model.dim_k
    eye_h = np.eye(dh)
    embed = _embedding_kraus(model)
    readout = [np.kron(eye_h, np.eye(dk)[l].reshape(1, -1)) for l in range(dk)]
    outcomes = []
    for lbl, eff in model.probe:
        root = np.kron(eye_h, la.psd_sqrt(eff.a))
        kraus = []
        for n_k in model.nu.kraus:
            middle = root @ n_k
            for e in embed:
                block = middle @ e
                kraus.extend(r @ block for r in readout)
        outcomes.append((lbl, Operation(tuple(kraus))))
    try:
        return validate_instrument(outcomes)
    except InvariantViolation as exc:
        raise InvariantViolation(f"model instrument: {exc.invariant}", exc.detail, exc.margin) from exc


def model_observable(model: MeasurementModel) -> Observable:
    """Observable ``A_x = tr_K[(I (x) sigma) nu^*(I (x) P_x)]`` measured by the model."""
    dh, dk = model.dim_h, model.dim_k
    eye_h = np.eye(dh)
    lift = np.kron(eye_h, model.sigma.rho)
    outcomes = []
    for lbl, eff in model.probe:
        heis = model.nu.dual(np.kron(eye_h, eff.a))
        outcomes.append((lbl, la.partial_trace(lift @ heis, dh, dk, over="K")))
    return _observable(outcomes)


def probe_state(model: MeasurementModel, rho: State) -> np.ndarray:
    """``nu(rho (x) sigma)`` on ``H (x) K``."""
    if rho.dim != model.dim_h:
        raise DimensionError(f"state dimension {rho.dim} != dimH {model.dim_h}")
    return model.nu(np.kron(rho.rho, model.sigma.rho))


class ModelEntropies(NamedTuple):
    observable: float   # S_A(rho)
    probe: float        # S_{I (x) P}[nu(rho (x) sigma)]
    gap: float          # sum_x tr(rho A_x) ln[tr(A_x) / (n tr(P_x))]


def model_entropy_gap(model: MeasurementModel, rho: State, A: Observable | None = None) -> float:
    """``sum_x tr(rho A_x) ln[tr(A_x) / (n tr(P_x))]``; nonpositive iff the
    model's observable is at least as informative as the probe readout."""
    A = model_observable(model) if A is None else A
    n = model.dim_h
    total = 0.0
    for lbl, eff in A:
        p = probability(rho, eff)
        if p <= tolerances().prob_zero:
            continue
        vol_p = float(np.trace(model.probe[lbl].a).real)
        total += p * math.log(float(np.trace(eff.a).real) / (n * vol_p))
    return total


def model_entropies(model: MeasurementModel, rho: State) -> ModelEntropies:
    """Both entropies and their gap, with ``probe == observable - gap`` enforced."""
    A = model_observable(model)
    s_a = observable_entropy(A, rho)
    out = probe_state(model, rho)
    eye_h = np.eye(model.dim_h)
    s_probe = 0.0
    for _, eff in model.probe:
        big = np.kron(eye_h, eff.a)
        s_probe += entropy_term(probability(out, big), float(np.trace(big).real))
    gap = model_entropy_gap(model, rho, A)
    if abs(s_probe - (s_a - gap)) > 1e-9:
        raise NumericalError(f"probe entropy identity off by {abs(s_probe - (s_a - gap)):.3e}")
    return ModelEntropies(s_a, s_probe, gap)
