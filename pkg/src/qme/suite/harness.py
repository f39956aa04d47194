"""Seeded property-check runner.

Each check is a trial function ``fn(rng, n) -> Trial``.  A trial reports a
set of named signed margins: inequalities ``lhs <= rhs`` contribute
``rhs - lhs`` and equalities contribute ``-|lhs - rhs|``.  A check passes
iff its worst margin over all trials is ``>= -tolerance``.

Trial ``t`` of check ``cid`` under suite seed ``s`` draws from
``SeedSequence([s, crc32(cid), t])`` and uses dimension ``dims[t % len(dims)]``,
so results never depend on execution order.
"""

from __future__ import annotations

import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from ..errors import ConfigError, UnknownCheckError
from ..serialization import to_json


@dataclass
class Trial:
    margins: dict[str, float]
    inputs: dict[str, Any] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return min(self.margins.values()) if self.margins else math.inf


TrialFn = Callable[[np.random.Generator, int], Trial]


@dataclass(frozen=True)
class PropertyCheck:
    id: str
    description: str
    trials: int = 1000
    dims: tuple[int, ...] = (2, 3, 4, 5)
    tolerance: float = 1e-9
    sampled: str = ""

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"{self.id}: trials must be >= 1")
        if not self.tolerance > 0:
            raise ConfigError(f"{self.id}: tolerance must be positive")
        if not self.dims:
            raise ConfigError(f"{self.id}: dims must be non-empty")
        if any(d < 1 for d in self.dims):
            raise ConfigError(f"{self.id}: dims must be positive")


@dataclass
class CheckReport:
    id: str
    passed: bool
    worst_margin: float
    counterexample: dict | None
    elapsed: float
    trials: int
    skipped: int = 0
    worst_term: str = ""

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "passed": self.passed,
            "worst_margin": self.worst_margin if math.isfinite(self.worst_margin) else None,
            "worst_term": self.worst_term,
            "counterexample": self.counterexample,
            "elapsed": self.elapsed,
            "trials": self.trials,
            "skipped": self.skipped,
        }

    def comparable(self) -> dict:
        """Everything except timing, for reproducibility comparisons."""
        d = self.to_json()
        d.pop("elapsed")
        return d


REGISTRY: dict[str, tuple[PropertyCheck, TrialFn]] = {}
# ids that run only on request (deliberately false checks)
EXCLUDED: set[str] = set()


def register(check: PropertyCheck, *, exclude: bool = False):
    def deco(fn: TrialFn) -> TrialFn:
        if check.id in REGISTRY:
            raise ValueError(f"duplicate check id {check.id}")
        REGISTRY[check.id] = (check, fn)
        if exclude:
            EXCLUDED.add(check.id)
        return fn
    return deco


def trial_rng(seed: int, check_id: str, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(check_id.encode()), index]))


def get_check(check_id: str) -> tuple[PropertyCheck, TrialFn]:
    _load()
    try:
        return REGISTRY[check_id]
    except KeyError:
        raise UnknownCheckError(f"unknown check id {check_id!r}") from None


def run_check(check: PropertyCheck | str, seed: int, fn: TrialFn | None = None) -> CheckReport:
    """Run every trial of ``check`` and keep the worst one."""
    if isinstance(check, str):
        check, fn = get_check(check)
    elif fn is None:
        fn = get_check(check.id)[1]
    start = time.perf_counter()
    worst = math.inf
    worst_trial: Trial | None = None
    worst_index = -1
    skipped = 0
    for t in range(check.trials):
        n = check.dims[t % len(check.dims)]
        trial = fn(trial_rng(seed, check.id, t), n)
        if not trial.margins:
            skipped += 1
            continue
        m = float(trial.margin)
        if math.isnan(m):
            m = -math.inf
        if m < worst:
            worst, worst_trial, worst_index = m, trial, t
    passed = bool(worst >= -check.tolerance)
    counterexample = None
    worst_term = ""
    if worst_trial is not None:
        worst_term = min(worst_trial.margins, key=lambda k: worst_trial.margins[k])
        if not passed:
            counterexample = {
                "trial": worst_index,
                "dim": check.dims[worst_index % len(check.dims)],
                "margins": to_json(worst_trial.margins),
                "inputs": to_json(worst_trial.inputs),
            }
    return CheckReport(
        id=check.id,
        passed=passed,
        worst_margin=worst,
        counterexample=counterexample,
        elapsed=time.perf_counter() - start,
        trials=check.trials,
        skipped=skipped,
        worst_term=worst_term,
    )


def registered_ids(include_excluded: bool = False) -> list[str]:
    _load()
    return [cid for cid in REGISTRY if include_excluded or cid not in EXCLUDED]


def configured(check: PropertyCheck, trials: int | None = None, dims: Sequence[int] | None = None,
               tolerance: float | None = None) -> PropertyCheck:
    changes: dict[str, Any] = {}
    if trials is not None:
        changes["trials"] = trials
    if dims is not None:
        changes["dims"] = tuple(dims)
    if tolerance is not None:
        changes["tolerance"] = tolerance
    return replace(check, **changes) if changes else check


def _run_configured(args: tuple[PropertyCheck, int]) -> CheckReport:
    check, seed = args
    return run_check(check, seed, get_check(check.id)[1])


def run_all(trials: int | None = None, dims: Sequence[int] | None = None, seed: int = 0,
            tolerance: float | None = None, only: Sequence[str] | None = None,
            jobs: int = 1) -> list[CheckReport]:
    """Run the registry (or the ``only`` subset) in registration order.

    ``None`` leaves each check's own default in place.  With ``jobs > 1`` the
    checks are spread over worker processes; reports are identical either way
    because every trial seeds itself.
    """
    if dims is not None and len(dims) == 0:
        raise ConfigError("dims must be non-empty")
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    ids = list(only) if only else registered_ids()
    work = [(configured(get_check(cid)[0], trials, dims, tolerance), seed) for cid in ids]
    if jobs == 1 or len(work) < 2:
        return [_run_configured(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_configured, work))


def _load() -> None:
    from . import checks  # noqa: F401  (registers on import)
