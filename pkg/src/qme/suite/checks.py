"""The check registry.

One trial function per named result.  Inequality margins are ``rhs - lhs``,
equality margins ``-|lhs - rhs|``.  For "if and only if" and "for all"
statements the constructive direction is built exactly and the other is
sampled; ``PropertyCheck.sampled`` says which.

Witness searches (an instance that must be strictly away from a bound) use
``STRICT`` as the required separation.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .. import linalg as la
from ..entropy import (
    effect_entropy,
    effect_entropy_bounds,
    instrument_entropy,
    observable_entropy,
    probability,
    von_neumann_entropy,
)
from ..objects import (
    Effect,
    MeasurementModel,
    Observable,
    State,
    complement,
    random_atomic_observable,
    random_channel,
    random_effect,
    random_instrument,
    random_observable,
    random_state,
    spectral_observable,
    trivial_observable,
    validate_observable,
)
from ..sequential import (
    coarse_grain,
    compose_instruments,
    distribution,
    holevo_chain,
    holevo_instrument,
    holevo_operation,
    iterated_sequential_product,
    luders_instrument,
    luders_operation,
    measured_effect,
    measured_observable,
    model_entropy_gap,
    model_instrument,
    model_observable,
    observable_sequential,
    probe_state,
    sequential_product_effect,
    tensor_observable,
)
from .harness import PropertyCheck, Trial, register

STRICT = 1e-6


def eq(lhs: float, rhs: float) -> float:
    return -abs(lhs - rhs)


def le(lhs: float, rhs: float) -> float:
    return rhs - lhs


def close(m1: np.ndarray, m2: np.ndarray) -> float:
    return -la.max_norm(np.asarray(m1) - np.asarray(m2))


def ln(x: float) -> float:
    return math.log(x)


# ------------------------------------------------------------------ helpers


def _state(rng, n, full=False) -> State:
    rank = n if full else int(rng.integers(1, n + 1))
    return random_state(n, rank, rng)


def _obs(rng, n, lo=2, hi=4) -> Observable:
    return random_observable(n, int(rng.integers(lo, hi + 1)), rng)


def _weights(rng, m) -> np.ndarray:
    return rng.dirichlet(np.ones(m))


def _mixture(states, lam) -> State:
    return State(sum(w * s.rho for w, s in zip(lam, states)))


def _tr(m: np.ndarray) -> float:
    return float(np.trace(m).real)


def _maximally_mixed(n) -> State:
    return State(np.eye(n) / n)


def _some_operation(rng, n, kind: int):
    """An operation together with the effect it measures, cycling the three
    constructors: random instrument outcome, Lueders, Holevo."""
    kind %= 3
    if kind == 0:
        op = random_instrument(n, 2, int(rng.integers(1, 3)), rng).operations[0]
        return op, measured_effect(op)
    a = random_effect(n, rng)
    if kind == 1:
        return luders_operation(a), a
    return holevo_operation(a, _state(rng, n)), a


def _some_instrument(rng, n, A: Observable, kind: int):
    kind %= 3
    if kind == 0:
        return luders_instrument(A)
    if kind == 1:
        return holevo_instrument(A, [_state(rng, n) for _ in A.labels])
    # random instrument relabelled as measuring its own observable
    return None


def _random_measuring_pair(rng, n, k, kind: int):
    """``(A, inst)`` with ``inst`` measuring ``A``."""
    if kind % 3 == 2:
        inst = random_instrument(n, k, int(rng.integers(1, 3)), rng)
        return measured_observable(inst), inst
    A = random_observable(n, k, rng)
    return A, _some_instrument(rng, n, A, kind)


def _random_model(rng, n, atomic=False) -> MeasurementModel:
    k = int(rng.integers(2, 4))
    nu = random_channel(n * k, int(rng.integers(1, 4)), rng)
    sigma = _state(rng, k)
    probe = random_atomic_observable(k, rng) if atomic else _obs(rng, k, 2, 3)
    return MeasurementModel(n, k, nu, sigma, probe)


# ------------------------------------------------------------ effect results


@register(PropertyCheck("thm-2.1-bounds", "spectral lower bound <= S_a(rho) <= ln[tr(a)/tr(rho a)]"))
def thm_2_1_bounds(rng, n):
    a, rho = random_effect(n, rng), _state(rng, n)
    if probability(rho, a) <= 1e-12:
        return Trial({})
    s = effect_entropy(a, rho)
    b = effect_entropy_bounds(a, rho)
    return Trial({"lower": le(b.lower, s), "upper": le(s, b.upper)}, {"a": a, "rho": rho})


@register(PropertyCheck(
    "thm-2.1-upper-equality", "tr(rho a) = 1 gives S_a(rho) = ln tr(a) = upper bound",
    sampled="constructive only: a = P + (I-P)c(I-P) with rho supported in P"))
def thm_2_1_upper_equality(rng, n):
    u = la.random_unitary(rng, n)
    k = int(rng.integers(1, n + 1))
    spectrum = np.concatenate([np.ones(k), rng.uniform(0, 1, n - k)])
    a = Effect((u * spectrum) @ u.conj().T)
    inner = random_state(k, int(rng.integers(1, k + 1)), rng).rho
    block = np.zeros((n, n), dtype=complex)
    block[:k, :k] = inner
    rho = State(u @ block @ u.conj().T)
    s = effect_entropy(a, rho)
    upper = effect_entropy_bounds(a, rho).upper
    return Trial({"ln-tr-a": eq(s, ln(_tr(a.a))), "upper": eq(s, upper), "prob": eq(probability(rho, a), 1.0)},
                 {"a": a, "rho": rho})


@register(PropertyCheck(
    "thm-2.1-equal-projection-case", "tr(P_i a) constant over the spectral projections gives S_a = (tr a/m) ln m", sampled="constructive: full-rank nondegenerate rho, a = U(cI + h)U^dag with diag(h) = 0"))
def thm_2_1_equal_projection(rng, n):
    rho = _state(rng, n, full=True)
    eig = la.hermitian_eig(rho.rho)
    c = rng.uniform(0.05, 0.95)
    g = la.ginibre(rng, n, n)
    h = (g + g.conj().T) / 2
    np.fill_diagonal(h, 0)
    norm = np.linalg.norm(h, 2)
    if norm > 0:
        h *= rng.uniform(0, 0.99) * min(c, 1 - c) / norm
    u = eig.eigenvectors
    a = Effect(u @ (c * np.eye(n) + h) @ u.conj().T)
    m = n
    return Trial({"equal-projection": eq(effect_entropy(a, rho), _tr(a.a) / m * ln(m))}, {"a": a, "rho": rho})


@register(PropertyCheck("thm-2.2", "S_{a+b}(rho) >= S_a(rho) + S_b(rho) for a + b <= I"))
def thm_2_2(rng, n):
    A = random_observable(n, 3, rng)
    a, b = A.effects[0], A.effects[1]
    rho = _state(rng, n)
    ab = Effect(a.a + b.a)
    return Trial({"superadditive": le(effect_entropy(a, rho) + effect_entropy(b, rho), effect_entropy(ab, rho))},
                 {"a": a, "b": b, "rho": rho})


@register(PropertyCheck(
    "thm-2.2-equality", "b = lambda a satisfies the equality condition and gives equality",
    sampled="constructive: b = lambda a"))
def thm_2_2_equality(rng, n):
    lam = rng.uniform(0.05, 1.0)
    e = random_effect(n, rng)
    a = Effect(e.a / (1 + lam))
    b = Effect(lam * a.a)
    rho = _state(rng, n)
    cond = eq(_tr(b.a) * probability(rho, a), _tr(a.a) * probability(rho, b))
    total = effect_entropy(Effect(a.a + b.a), rho)
    return Trial({"condition": cond, "equality": eq(total, effect_entropy(a, rho) + effect_entropy(b, rho))},
                 {"a": a, "b": b, "rho": rho})


@register(PropertyCheck("cor-2.3", "S_a(rho) + S_{a'}(rho) <= ln n"))
def cor_2_3(rng, n):
    a, rho = random_effect(n, rng), _state(rng, n)
    total = effect_entropy(a, rho) + effect_entropy(complement(a), rho)
    return Trial({"bound": le(total, ln(n))}, {"a": a, "rho": rho})


@register(PropertyCheck(
    "cor-2.3-equality", "rho = I/n forces tr(a) = n tr(rho a) and S_a + S_{a'} = ln n",
    sampled="constructive: rho = I/n"))
def cor_2_3_equality(rng, n):
    a, rho = random_effect(n, rng), _maximally_mixed(n)
    total = effect_entropy(a, rho) + effect_entropy(complement(a), rho)
    return Trial({"condition": eq(_tr(a.a), n * probability(rho, a)), "equality": eq(total, ln(n))}, {"a": a})


@register(PropertyCheck("cor-2.4", "S_{a+b}(rho) >= max(S_a(rho), S_b(rho))"))
def cor_2_4(rng, n):
    A = random_observable(n, 3, rng)
    a, b = A.effects[0], A.effects[1]
    rho = _state(rng, n)
    s = effect_entropy(Effect(a.a + b.a), rho)
    return Trial({"a": le(effect_entropy(a, rho), s), "b": le(effect_entropy(b, rho), s)},
                 {"a": a, "b": b, "rho": rho})


@register(PropertyCheck("cor-2.5", "a <= b implies S_a(rho) <= S_b(rho)"))
def cor_2_5(rng, n):
    rho = _state(rng, n)
    if rng.uniform() < 0.5:
        A = random_observable(n, 3, rng)
        a, b = A.effects[0], Effect(A.effects[0].a + A.effects[1].a)
    else:
        b = random_effect(n, rng)
        a = Effect(rng.uniform(0.01, 1.0) * b.a)
    return Trial({"monotone": le(effect_entropy(a, rho), effect_entropy(b, rho))}, {"a": a, "b": b, "rho": rho})


@register(PropertyCheck(
    "cor-2.6", "S_{sum a_i}(rho) >= sum S_{a_i}(rho), with equality for proportional a_i",
    sampled="inequality random; equality constructive with a_i = w_i e"))
def cor_2_6(rng, n):
    m = int(rng.integers(2, 5))
    A = random_observable(n, m + 1, rng)
    parts = A.effects[:m]
    rho = _state(rng, n)
    total = Effect(sum(p.a for p in parts))
    ineq = le(sum(effect_entropy(p, rho) for p in parts), effect_entropy(total, rho))
    e = random_effect(n, rng)
    w = _weights(rng, m + 1)[:m]
    prop = [Effect(wi * e.a) for wi in w]
    equal = eq(sum(effect_entropy(p, rho) for p in prop), effect_entropy(Effect(sum(w) * e.a), rho))
    return Trial({"superadditive": ineq, "equality": equal}, {"parts": parts, "rho": rho})


@register(PropertyCheck("cor-2.7-scaling", "S_{lambda a}(rho) = lambda S_a(rho)"))
def cor_2_7_scaling(rng, n):
    a, rho = random_effect(n, rng), _state(rng, n)
    lam = rng.uniform(1e-3, 1.0)
    return Trial({"scaling": eq(effect_entropy(Effect(lam * a.a), rho), lam * effect_entropy(a, rho))},
                 {"a": a, "rho": rho, "lambda": lam})


@register(PropertyCheck(
    "cor-2.7-mixture", "S_{sum lambda_i a_i}(rho) >= sum lambda_i S_{a_i}(rho), equality for proportional a_i", sampled="inequality random; equality constructive with a_i = c_i e"))
def cor_2_7_mixture(rng, n):
    m = int(rng.integers(2, 5))
    effects = [random_effect(n, rng) for _ in range(m)]
    lam = _weights(rng, m)
    rho = _state(rng, n)
    mix = Effect(sum(l * e.a for l, e in zip(lam, effects)))
    ineq = le(sum(l * effect_entropy(e, rho) for l, e in zip(lam, effects)), effect_entropy(mix, rho))
    e = random_effect(n, rng)
    scaled = [Effect(c * e.a) for c in rng.uniform(0.05, 1.0, m)]
    pmix = Effect(sum(l * s.a for l, s in zip(lam, scaled)))
    equal = eq(effect_entropy(pmix, rho), sum(l * effect_entropy(s, rho) for l, s in zip(lam, scaled)))
    return Trial({"concave": ineq, "equality": equal}, {"effects": effects, "lambda": lam, "rho": rho})


@register(PropertyCheck("thm-2.8", "S_a(sum lambda_i rho_i) >= sum lambda_i S_a(rho_i)"))
def thm_2_8(rng, n):
    m = int(rng.integers(2, 5))
    a = random_effect(n, rng)
    states = [_state(rng, n) for _ in range(m)]
    lam = _weights(rng, m)
    lhs = sum(l * effect_entropy(a, s) for l, s in zip(lam, states))
    return Trial({"concave": le(lhs, effect_entropy(a, _mixture(states, lam)))},
                 {"a": a, "states": states, "lambda": lam})


@register(PropertyCheck(
    "thm-2.8-equality", "states with equal tr(rho_i a) give equality",
    sampled="constructive: rho_i = U_i rho_1 U_i^dag with U_i commuting with a"))
def thm_2_8_equality(rng, n):
    m = int(rng.integers(2, 5))
    a = random_effect(n, rng)
    v = la.hermitian_eig(a.a).eigenvectors
    base = _state(rng, n)
    states = [base]
    for _ in range(m - 1):
        u = (v * np.exp(1j * rng.uniform(0, 2 * np.pi, n))) @ v.conj().T
        states.append(State(u @ base.rho @ u.conj().T))
    lam = _weights(rng, m)
    lhs = sum(l * effect_entropy(a, s) for l, s in zip(lam, states))
    probs = [probability(s, a) for s in states]
    return Trial({"equality": eq(effect_entropy(a, _mixture(states, lam)), lhs),
                  "condition": -float(np.ptp(probs))},
                 {"a": a, "states": states, "lambda": lam})


@register(PropertyCheck("thm-2.9", "tensor effects: exact product formula and its upper bound"))
def thm_2_9(rng, n):
    n2 = int(rng.integers(2, 4))
    a1, r1 = random_effect(n, rng), _state(rng, n)
    a2, r2 = random_effect(n2, rng), _state(rng, n2)
    s1, s2 = effect_entropy(a1, r1), effect_entropy(a2, r2)
    lhs = effect_entropy(Effect(np.kron(a1.a, a2.a)), State(np.kron(r1.rho, r2.rho)))
    formula = probability(r2, a2) * s1 + probability(r1, a1) * s2
    return Trial({"formula": eq(lhs, formula), "bound": le(formula, s1 + s2)},
                 {"a1": a1, "rho1": r1, "a2": a2, "rho2": r2})


@register(PropertyCheck("thm-2.10-i", "a o (b + c) = a o b + a o c for b + c <= I"))
def thm_2_10_i(rng, n):
    op, _ = _some_operation(rng, n, int(rng.integers(3)))
    B = random_observable(n, 3, rng)
    b, c = B.effects[0], B.effects[1]
    lhs = op.dual(b.a + c.a)
    return Trial({"additive": close(lhs, op.dual(b.a) + op.dual(c.a))}, {"op": op, "b": b, "c": c})


@register(PropertyCheck("thm-2.10-ii", "a o I = a"))
def thm_2_10_ii(rng, n):
    op, a = _some_operation(rng, n, int(rng.integers(3)))
    return Trial({"unit": close(sequential_product_effect(op, Effect(np.eye(n))).a, a.a)}, {"op": op, "a": a})


@register(PropertyCheck("thm-2.10-iii", "a o b <= a"))
def thm_2_10_iii(rng, n):
    op, a = _some_operation(rng, n, int(rng.integers(3)))
    b = random_effect(n, rng)
    gap = la.hermitian_eigvals(a.a - op.dual(b.a))[0]
    return Trial({"below": float(gap)}, {"op": op, "a": a, "b": b})


@register(PropertyCheck(
    "thm-2.10-iv", "S_{a o b}(rho) <= S_a(rho); chains are monotone and have the sequential probability"))
def thm_2_10_iv(rng, n):
    rho = _state(rng, n)
    op, a = _some_operation(rng, n, int(rng.integers(3)))
    b = random_effect(n, rng)
    ab = sequential_product_effect(op, b)
    margins = {"pair": le(effect_entropy(ab, rho), effect_entropy(a, rho))}
    # chain a^1 o ... o a^m with operations I^1..I^{m-1}
    m = int(rng.integers(3, 5))
    ops = [_some_operation(rng, n, k)[0] for k in range(m - 1)]
    last = random_effect(n, rng)
    prev = effect_entropy(measured_effect(ops[0]), rho)
    for j in range(2, m + 1):
        eff = iterated_sequential_product(ops[: j - 1], last if j == m else measured_effect(ops[j - 1]))
        cur = effect_entropy(eff, rho)
        margins[f"chain-{j}"] = le(cur, prev)
        prev = cur
    state = rho.rho
    for o in ops:
        state = o(state)
    chain = iterated_sequential_product(ops, last)
    margins["chain-probability"] = eq(probability(rho, chain), probability(state, last))
    return Trial(margins, {"rho": rho, "op": op, "b": b, "chain_ops": ops, "last": last})


@register(PropertyCheck("ex-1-luders", "Lueders operation: self-dual, measures a, a o b = a^1/2 b a^1/2"))
def ex_1_luders(rng, n):
    a, b, rho = random_effect(n, rng), random_effect(n, rng), _state(rng, n)
    op = luders_operation(a)
    x = la.ginibre(rng, n, n)
    root = scipy.linalg.sqrtm(a.a)
    ab = sequential_product_effect(op, b)
    p = probability(rho, ab)
    formula = -p * ln(p / _tr(a.a @ b.a)) if p > 1e-12 else 0.0
    return Trial({
        "self-dual": close(op.dual(x), op(x)),
        "measures": close(measured_effect(op).a, a.a),
        "product": close(ab.a, root @ b.a @ root),
        "entropy": eq(effect_entropy(ab, rho), formula),
    }, {"a": a, "b": b, "rho": rho})


@register(PropertyCheck("ex-2-holevo", "Holevo operation: action, dual, measured effect and a o b = tr(alpha b) a"))
def ex_2_holevo(rng, n):
    a, alpha, b, rho = random_effect(n, rng), _state(rng, n), random_effect(n, rng), _state(rng, n)
    op = holevo_operation(a, alpha)
    x = la.ginibre(rng, n, n)
    ab = sequential_product_effect(op, b)
    return Trial({
        "action": close(op(x), np.trace(x @ a.a) * alpha.rho),
        "dual": close(op.dual(x), np.trace(alpha.rho @ x) * a.a),
        "measures": close(measured_effect(op).a, a.a),
        "product": close(ab.a, probability(alpha, b) * a.a),
        "entropy": eq(effect_entropy(ab, rho), probability(alpha, b) * effect_entropy(a, rho)),
    }, {"a": a, "alpha": alpha, "b": b, "rho": rho})


@register(PropertyCheck("ex-2-chain", "Holevo chains collapse to a scalar multiple of a_1"))
def ex_2_chain(rng, n):
    m = int(rng.integers(2, 5))
    effects = [random_effect(n, rng) for _ in range(m)]
    alphas = [_state(rng, n) for _ in range(m - 1)]
    rho = _state(rng, n)
    coeff = math.prod(probability(al, e) for al, e in zip(alphas, effects[1:]))
    if coeff <= 1e-12:
        return Trial({})
    ops = [holevo_operation(e, al) for e, al in zip(effects[:-1], alphas)]
    iterated = iterated_sequential_product(ops, effects[-1])
    closed = holevo_chain(effects, alphas)
    return Trial({
        "closed-form": close(closed.a, iterated.a),
        "entropy": eq(effect_entropy(iterated, rho), coeff * effect_entropy(effects[0], rho)),
    }, {"effects": effects, "alphas": alphas, "rho": rho})


# -------------------------------------------------------- observable results


@register(PropertyCheck("eq-3.1", "S_A(I/n) = ln n for every observable"))
def eq_3_1(rng, n):
    A = _obs(rng, n, 2, 5)
    return Trial({"maximally-mixed": eq(observable_entropy(A, _maximally_mixed(n)), ln(n))}, {"A": A})


@register(PropertyCheck("thm-3.1", "S(rho) <= S_A(rho) <= ln n"))
def thm_3_1(rng, n):
    A, rho = _obs(rng, n, 2, 5), _state(rng, n)
    s = observable_entropy(A, rho)
    return Trial({"lower": le(von_neumann_entropy(rho), s), "upper": le(s, ln(n))}, {"A": A, "rho": rho})


def _proportionality_defect(A: Observable, rho: State) -> float:
    t = np.array([_tr(e.a) for e in A.effects])
    p = np.array([probability(rho, e) for e in A.effects])
    return float(np.max(np.abs(np.outer(t, p) - np.outer(p, t))))


@register(PropertyCheck(
    "cor-3.2-i", "S_A(rho) = ln n iff tr(A_x) tr(rho A_y) = tr(A_y) tr(rho A_x)",
    sampled="condition-holds direction constructive (trivial A, rho = I/n, or traceless perturbations "
            "orthogonal to I and rho); condition-fails direction sampled on full-rank rho"))
def cor_3_2_i(rng, n):
    kind = int(rng.integers(4))
    if kind == 0:
        A, rho = trivial_observable(_weights(rng, int(rng.integers(2, 5))), n), _state(rng, n, full=True)
    elif kind == 1:
        A, rho = _obs(rng, n), _maximally_mixed(n)
    elif kind == 2:
        rho = _state(rng, n, full=True)
        g = la.ginibre(rng, n, n)
        h = (g + g.conj().T) / 2
        # Gram-Schmidt h against I and rho in the Hilbert-Schmidt inner product
        basis = [np.eye(n) / math.sqrt(n)]
        r0 = rho.rho - np.trace(rho.rho) / n * np.eye(n)
        if la.max_norm(r0) > 1e-12:
            basis.append(r0 / np.linalg.norm(r0))
        for q in basis:
            h = h - np.vdot(q, h).real * q
        c = rng.uniform(0.2, 0.8)
        h *= rng.uniform(0.1, 0.99) * min(c, 1 - c) / np.linalg.norm(h, 2)
        A = validate_observable([c * np.eye(n) + h, (1 - c) * np.eye(n) - h])
    else:
        A, rho = _obs(rng, n), _state(rng, n, full=True)
        defect = _proportionality_defect(A, rho)
        gap = ln(n) - observable_entropy(A, rho)
        if defect > STRICT:
            return Trial({"strict-when-condition-fails": gap}, {"A": A, "rho": rho})
        return Trial({"equal-when-condition-holds": -abs(gap)}, {"A": A, "rho": rho})
    return Trial({"condition": -_proportionality_defect(A, rho),
                  "equality": eq(observable_entropy(A, rho), ln(n))}, {"A": A, "rho": rho})


def _nontrivial_witness(A: Observable, rng, n, samples=64) -> float:
    """Smallest S_A(rho) found over random states, falling back to top
    eigenvectors of the non-scalar effects."""
    # draw the sample as one Ginibre stack, score it in bulk, then re-evaluate
    # the best candidate through the library path
    g = (rng.standard_normal((samples, n, n)) + 1j * rng.standard_normal((samples, n, n))) / math.sqrt(2)
    mats = g @ g.conj().transpose(0, 2, 1)
    mats /= np.trace(mats, axis1=1, axis2=2).real[:, None, None]
    effects = np.array([e.a for e in A.effects])
    vols = np.trace(effects, axis1=1, axis2=2).real
    p = np.einsum("sij,xji->sx", mats, effects).real
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 1e-12, -p * np.log(p / vols), 0.0)
    best_rho = State(mats[int(np.argmin(terms.sum(axis=1)))])
    best = observable_entropy(A, best_rho)
    if best < ln(n) - STRICT:
        return best
    for e in A.effects:
        w, v = np.linalg.eigh(e.a)
        if w[-1] - w[0] > 1e-12:
            phi = v[:, -1]
            best = min(best, observable_entropy(A, State(np.outer(phi, phi.conj()))))
    return best


@register(PropertyCheck(
    "cor-3.2-ii", "A is trivial iff S_A(rho) = ln n for all rho",
    sampled="trivial => equality on random rho; non-trivial => witness rho with S_A < ln n - 1e-6 "
            "(64 random states, then top eigenvectors of the effects)"))
def cor_3_2_ii(rng, n):
    if rng.uniform() < 0.5:
        A, rho = trivial_observable(_weights(rng, int(rng.integers(2, 5))), n), _state(rng, n)
        return Trial({"trivial": eq(observable_entropy(A, rho), ln(n))}, {"A": A, "rho": rho})
    A = _obs(rng, n)
    return Trial({"witness": (ln(n) - STRICT) - _nontrivial_witness(A, rng, n)}, {"A": A})


@register(PropertyCheck(
    "cor-3.2-iii", "rho = I/n iff S_A(rho) = ln n for all A",
    sampled="rho = I/n => equality on random A; rho != I/n => witness via its spectral observable"))
def cor_3_2_iii(rng, n):
    if rng.uniform() < 0.5:
        A = _obs(rng, n, 2, 5)
        return Trial({"maximally-mixed": eq(observable_entropy(A, _maximally_mixed(n)), ln(n))}, {"A": A})
    rho = _state(rng, n)
    A = spectral_observable(rho)
    return Trial({"witness": (ln(n) - STRICT) - observable_entropy(A, rho)}, {"rho": rho})


@register(PropertyCheck(
    "cor-3.2-iv", "S(rho) = ln n iff rho = I/n",
    sampled="rho = I/n constructive; random rho != I/n must be below ln n - 1e-6"))
def cor_3_2_iv(rng, n):
    if rng.uniform() < 0.5:
        return Trial({"maximally-mixed": eq(von_neumann_entropy(_maximally_mixed(n)), ln(n))})
    rho = _state(rng, n)
    return Trial({"strict": (ln(n) - STRICT) - von_neumann_entropy(rho)}, {"rho": rho})


@register(PropertyCheck("thm-3.3-i", "S_A(rho) >= sum lambda_i S_{A^i}(rho) for convex combinations"))
def thm_3_3_i(rng, n):
    k, m = int(rng.integers(2, 5)), int(rng.integers(2, 4))
    parts = [random_observable(n, k, rng) for _ in range(m)]
    lam = _weights(rng, m)
    A = validate_observable([(lbl, sum(l * P[lbl].a for l, P in zip(lam, parts))) for lbl in parts[0].labels])
    rho = _state(rng, n)
    rhs = sum(l * observable_entropy(P, rho) for l, P in zip(lam, parts))
    return Trial({"concave": le(rhs, observable_entropy(A, rho))}, {"parts": parts, "lambda": lam, "rho": rho})


@register(PropertyCheck("thm-3.3-ii", "S_A(sum lambda_i rho_i) >= sum lambda_i S_A(rho_i)"))
def thm_3_3_ii(rng, n):
    m = int(rng.integers(2, 5))
    A = _obs(rng, n)
    states = [_state(rng, n) for _ in range(m)]
    lam = _weights(rng, m)
    rhs = sum(l * observable_entropy(A, s) for l, s in zip(lam, states))
    return Trial({"concave": le(rhs, observable_entropy(A, _mixture(states, lam)))},
                 {"A": A, "states": states, "lambda": lam})


def _random_surjection(rng, labels, r):
    perm = list(rng.permutation(len(labels)))
    targets = [f"y{j}" for j in range(r)]
    f = {}
    for pos, idx in enumerate(perm):
        f[labels[idx]] = targets[pos] if pos < r else targets[int(rng.integers(r))]
    return f, targets


@register(PropertyCheck("thm-3.4", "coarse-graining never decreases S_A(rho)"))
def thm_3_4(rng, n):
    k = int(rng.integers(3, 6))
    A = random_observable(n, k, rng)
    f, targets = _random_surjection(rng, A.labels, int(rng.integers(1, k)))
    B = coarse_grain(A, f, targets)
    rho = _state(rng, n)
    return Trial({"monotone": le(observable_entropy(A, rho), observable_entropy(B, rho))},
                 {"A": A, "f": f, "rho": rho})


@register(PropertyCheck(
    "cor-3.5", "coarse-graining preserves S iff in-fiber effects satisfy the proportionality condition",
    sampled="condition-holds direction constructive (in-fiber effects proportional); "
            "condition-fails direction sampled: some of 16 random rho must show a gap >= 1e-6"))
def cor_3_5(rng, n):
    if rng.uniform() < 0.5:
        C = _obs(rng, n, 2, 3)
        pieces, f = [], {}
        for y, eff in C:
            s = int(rng.integers(1, 4))
            for j, w in enumerate(_weights(rng, s)):
                lbl = f"{y}.{j}"
                pieces.append((lbl, w * eff.a))
                f[lbl] = y
        A = validate_observable(pieces)
        B = coarse_grain(A, f)
        rho = _state(rng, n)
        return Trial({"equality": eq(observable_entropy(B, rho), observable_entropy(A, rho))},
                     {"A": A, "f": f, "rho": rho})
    A = random_observable(n, 4, rng)
    f = {A.labels[0]: "y0", A.labels[1]: "y0", A.labels[2]: "y1", A.labels[3]: "y2"}
    B = coarse_grain(A, f)
    gaps = []
    for _ in range(16):
        rho = _state(rng, n)
        gaps.append(observable_entropy(B, rho) - observable_entropy(A, rho))
    return Trial({"strict-witness": max(gaps) - STRICT}, {"A": A, "f": f})


@register(PropertyCheck("cor-3.6", "S_{A o B}(rho) <= S_A(rho)",
                        sampled="instrument cycles through Lueders, Holevo and random"))
def cor_3_6(rng, n):
    A, inst = _random_measuring_pair(rng, n, int(rng.integers(2, 4)), int(rng.integers(3)))
    B, rho = _obs(rng, n), _state(rng, n)
    AB = observable_sequential(A, inst, B)
    return Trial({"refines": le(observable_entropy(AB, rho), observable_entropy(A, rho))},
                 {"A": A, "instrument": inst, "B": B, "rho": rho})


@register(PropertyCheck("cor-3.6-holevo-equality", "Holevo instruments give S_{A o B} = S_A"))
def cor_3_6_holevo(rng, n):
    A, B, rho = _obs(rng, n), _obs(rng, n), _state(rng, n)
    inst = holevo_instrument(A, [_state(rng, n) for _ in A.labels])
    AB = observable_sequential(A, inst, B)
    margins = {"equality": eq(observable_entropy(AB, rho), observable_entropy(A, rho))}
    worst = 0.0
    for x, ax in A:
        ratio_a = probability(rho, ax) / _tr(ax.a)
        for y in B.labels:
            lbl = f"({x},{y})"
            if lbl in AB.dropped:
                continue
            e = AB[lbl]
            worst = max(worst, abs(probability(rho, e) / _tr(e.a) - ratio_a))
    margins["ratio"] = -worst
    return Trial(margins, {"A": A, "instrument": inst, "B": B, "rho": rho})


@register(PropertyCheck("cor-3.7", "S_{A1 o A2 o A3} <= S_{A1 o A2} <= S_{A1}"))
def cor_3_7(rng, n):
    kind = int(rng.integers(3))
    A1, I1 = _random_measuring_pair(rng, n, int(rng.integers(2, 4)), kind)
    A2, I2 = _random_measuring_pair(rng, n, int(rng.integers(2, 4)), kind + 1)
    A3, rho = _obs(rng, n, 2, 3), _state(rng, n)
    A12 = observable_sequential(A1, I1, A2)
    A123 = observable_sequential(A1, I1, observable_sequential(A2, I2, A3))
    s1, s12, s123 = (observable_entropy(X, rho) for X in (A1, A12, A123))
    return Trial({"step-3": le(s123, s12), "step-2": le(s12, s1)},
                 {"A1": A1, "I1": I1, "A2": A2, "I2": I2, "A3": A3, "rho": rho})


@register(PropertyCheck("instrument-entropy-def", "S_I(rho) computed from the operations equals S_A(rho)"))
def instrument_entropy_def(rng, n):
    A, inst = _random_measuring_pair(rng, n, int(rng.integers(2, 5)), int(rng.integers(3)))
    rho = _state(rng, n)
    return Trial({"entropy": eq(instrument_entropy(inst, rho), observable_entropy(A, rho))},
                 {"instrument": inst, "rho": rho})


@register(PropertyCheck("instrument-composition", "J after I measures A o B, and its entropy is S_{A o B}", tolerance=1e-8))
def instrument_composition(rng, n):
    i = random_instrument(n, int(rng.integers(2, 4)), int(rng.integers(1, 3)), rng)
    j = random_instrument(n, int(rng.integers(2, 4)), int(rng.integers(1, 3)), rng)
    rho = _state(rng, n)
    composite = compose_instruments(j, i)
    via_composite = measured_observable(composite)
    via_product = observable_sequential(measured_observable(i), i, measured_observable(j))
    worst = 0.0
    for lbl, e in via_product:
        worst = max(worst, la.max_norm(via_composite[lbl].a - e.a))
    return Trial({"observable": -worst,
                  "labels": 0.0 if via_composite.labels == via_product.labels else -1.0,
                  "entropy": eq(instrument_entropy(composite, rho), observable_entropy(via_product, rho))},
                 {"i": i, "j": j, "rho": rho})


@register(PropertyCheck("lem-3.8", "S_{A (x) B}(rho1 (x) rho2) = S_A(rho1) + S_B(rho2)"))
def lem_3_8(rng, n):
    n2 = int(rng.integers(2, 4))
    A, B = _obs(rng, n), _obs(rng, n2)
    r1, r2 = _state(rng, n), _state(rng, n2)
    lhs = observable_entropy(tensor_observable(A, B), State(np.kron(r1.rho, r2.rho)))
    return Trial({"additive": eq(lhs, observable_entropy(A, r1) + observable_entropy(B, r2))},
                 {"A": A, "B": B, "rho1": r1, "rho2": r2})


@register(PropertyCheck("luders-seqprod-form", "Lueders sequential product (A o B)_(x,y) = A_x^1/2 B_y A_x^1/2"))
def luders_seqprod_form(rng, n):
    A, B, rho = _obs(rng, n), _obs(rng, n), _state(rng, n)
    AB = observable_sequential(A, luders_instrument(A), B)
    worst, formula = 0.0, 0.0
    for x, ax in A:
        root = scipy.linalg.sqrtm(ax.a)
        for y, by in B:
            m = root @ by.a @ root
            worst = max(worst, la.max_norm(AB[f"({x},{y})"].a - m))
            p = probability(rho, m)
            if p > 1e-12:
                formula -= p * ln(p / _tr(ax.a @ by.a))
    return Trial({"form": -worst, "entropy": eq(observable_entropy(AB, rho), formula)},
                 {"A": A, "B": B, "rho": rho})


# ---------------------------------------------------------- measurement models


def _probe_probabilities(model, rho):
    out = probe_state(model, rho)
    eye = np.eye(model.dim_h)
    return [probability(out, np.kron(eye, p.a)) for p in model.probe.effects]


@register(PropertyCheck(
    "model-distribution", "the model observable reproduces the probe distribution; both constructions agree"))
def model_distribution(rng, n):
    model, rho = _random_model(rng, n), _state(rng, n)
    A = model_observable(model)
    inst = model_instrument(model)
    via_inst = measured_observable(inst)
    probe = _probe_probabilities(model, rho)
    dist = distribution(A, rho).probabilities
    inst_probs = [_tr(op(rho.rho)) for op in inst.operations]
    return Trial({
        "distribution": -float(np.max(np.abs(dist - probe))),
        "instrument": -float(np.max(np.abs(np.array(inst_probs) - probe))),
        "routes": -max(la.max_norm(a.a - b.a) for a, b in zip(A.effects, via_inst.effects)),
    }, {"model": model, "rho": rho})


@register(PropertyCheck("model-atomic-probe", "atomic probes give a nonpositive gap, so S_A <= S_{I (x) P}"))
def model_atomic_probe(rng, n):
    model, rho = _random_model(rng, n, atomic=True), _state(rng, n)
    return Trial({"gap": -model_entropy_gap(model, rho)}, {"model": model, "rho": rho})


@register(PropertyCheck("eq-3.3-gap-identity", "S_{I (x) P}[nu(rho (x) sigma)] = S_A(rho) - gap"))
def eq_3_3_gap_identity(rng, n):
    model, rho = _random_model(rng, n), _state(rng, n)
    A = model_observable(model)
    readout = tensor_observable(validate_observable({"I": np.eye(n)}), model.probe)
    out = State(probe_state(model, rho))
    lhs = observable_entropy(readout, out)
    return Trial({"identity": eq(lhs, observable_entropy(A, rho) - model_entropy_gap(model, rho, A))},
                 {"model": model, "rho": rho})


# ---------------------------------------------------------------------- canary


@register(PropertyCheck("canary", "deliberately false: S_{a+b} < S_a + S_b"), exclude=True)
def canary(rng, n):
    A = random_observable(n, 3, rng)
    a, b = A.effects[0], A.effects[1]
    rho = _state(rng, n)
    s_ab = effect_entropy(Effect(a.a + b.a), rho)
    return Trial({"false-claim": (effect_entropy(a, rho) + effect_entropy(b, rho)) - s_ab},
                 {"a": a, "b": b, "rho": rho})
