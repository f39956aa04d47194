"""``qme`` command-line interface.

Exit codes: 0 success, 1 a property check failed (``verify``), 2 usage or
parse error, 3 an input violated a domain invariant.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import serialization as ser
from .entropy import effect_entropy, instrument_entropy, observable_entropy, von_neumann_entropy
from .errors import (
    ConfigError,
    DimensionError,
    InstrumentMismatchError,
    QMEError,
    SchemaError,
    UnknownCheckError,
)
from .objects import (
    Effect,
    Observable,
    random_effect,
    random_instrument,
    random_observable,
    random_state,
)
from .sequential import (
    check_measures,
    coarse_grain,
    holevo_instrument,
    holevo_operation,
    luders_instrument,
    luders_operation,
    measured_effect,
    model_entropies,
    model_observable,
    observable_sequential,
    sequential_product_effect,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3
SEED_ENV = "QME_DEFAULT_SEED"


class UsageError(Exception):
    """Bad flags or unreadable input; maps to exit 2."""


# ------------------------------------------------------------------ helpers


def fmt12(x: float) -> str:
    """Entropy in nats with 12 significant digits."""
    x = float(x)
    if x == 0:
        return "0.0"
    return format(x, "#.12g")


def _read(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{path}: no such file")
    try:
        return ser.load_json(p)
    except UnicodeDecodeError as exc:
        raise UsageError(f"{path}: not UTF-8 ({exc.reason} at byte {exc.start})") from exc


def _need(args, name: str, flag: str):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"{flag} is required here")
    return value


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_with_entropies(payload: dict, entropies: dict[str, float]) -> str:
    """JSON document where entropy fields keep the 12-digit rendering."""
    body = json.dumps(ser.to_json(payload), allow_nan=False)
    if not entropies:
        return body
    extra = ", ".join(f"{json.dumps(k)}: {fmt12(v)}" for k, v in entropies.items())
    return body[:-1] + (", " if payload else "") + extra + "}"


def _load_first(path: str, where: str) -> Effect | Observable:
    """An effect or an observable, told apart by the ``outcomes`` field."""
    obj = _read(path)
    if isinstance(obj, dict) and "outcomes" in obj:
        return ser.observable_from_json(obj, where)
    return ser.effect_from_json(obj, where)


def _sweep_grid(text: str) -> np.ndarray:
    try:
        name, rng = text.split("=", 1)
        start, stop, step = (float(v) for v in rng.split(":"))
    except ValueError:
        raise UsageError(f"--sweep expects lambda=START:STOP:STEP, got {text!r}") from None
    if name.strip() != "lambda":
        raise UsageError(f"only the 'lambda' parameter can be swept, got {name!r}")
    if not step > 0 or stop < start:
        raise UsageError("--sweep needs STEP > 0 and STOP >= START")
    if start < 0 or stop > 1:
        raise UsageError("lambda must stay within [0, 1] for lambda*a to be an effect")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


# ----------------------------------------------------------------- commands


def cmd_entropy(args) -> int:
    state = ser.state_from_json(_read(_need(args, "state", "--state")), "state")
    target = args.target
    if args.sweep and target != "effect":
        raise UsageError("--sweep applies to 'entropy effect' only")
    if target == "state":
        value = von_neumann_entropy(state)
    elif target == "effect":
        a = ser.effect_from_json(_read(_need(args, "effect", "--effect")), "effect")
        _same_dim(a.dim, state.dim)
        if args.sweep:
            return _entropy_sweep(args, a, state)
        value = effect_entropy(a, state)
    elif target == "observable":
        A = ser.observable_from_json(_read(_need(args, "observable", "--observable")), "observable")
        _same_dim(A.dim, state.dim)
        value = observable_entropy(A, state)
    else:
        inst = ser.instrument_from_json(_read(_need(args, "instrument", "--instrument")), "instrument")
        _same_dim(inst.dim, state.dim)
        value = instrument_entropy(inst, state)
    if args.format == "tsv":
        _emit(args, f"target\tentropy\n{target}\t{fmt12(value)}")
    else:
        _emit(args, f'{{"target": "{target}", "entropy": {fmt12(value)}, "units": "nats"}}')
    return EXIT_OK


def _same_dim(d1: int, d2: int) -> None:
    if d1 != d2:
        raise DimensionError(f"input acts on dimension {d1} but the state has dimension {d2}")


def _entropy_sweep(args, a: Effect, state) -> int:
    rows = []
    for lam in _sweep_grid(args.sweep):
        # lambda = 0 is the zero operator: 0 ln 0 = 0 by convention
        value = 0.0 if lam == 0 else effect_entropy(Effect(lam * a.a), state)
        rows.append((float(lam), value))
    if args.format == "tsv":
        _emit(args, "lambda\tentropy\n" + "\n".join(f"{lam!r}\t{fmt12(v)}" for lam, v in rows))
    else:
        items = ", ".join(f'{{"lambda": {lam!r}, "entropy": {fmt12(v)}}}' for lam, v in rows)
        _emit(args, f'{{"target": "effect", "sweep": [{items}]}}')
    return EXIT_OK


def cmd_seqprod(args) -> int:
    first = _load_first(_need(args, "first", "--first"), "first")
    second = _load_first(_need(args, "second", "--second"), "second")
    if type(first) is not type(second):
        raise UsageError("--first and --second must both be effects or both be observables")
    if first.dim != second.dim:
        raise DimensionError(f"--first has dimension {first.dim}, --second has {second.dim}")
    kind = args.kind
    if isinstance(first, Effect):
        if kind == "luders":
            op = luders_operation(first)
        elif kind == "holevo":
            op = holevo_operation(first, ser.state_from_json(_read(_need(args, "alpha", "--alpha")[0]), "alpha"))
        else:
            op = ser.operation_from_json(_read(_need(args, "instrument", "--instrument")), "operation")
            gap = float(np.max(np.abs(measured_effect(op).a - first.a)))
            if gap > 1e-8:
                raise InstrumentMismatchError(f"operation does not measure --first (defect {gap:.3e})")
        product = sequential_product_effect(op, second)
        payload = {"kind": kind, "product": product}
        entropies_of = lambda rho: {"entropy": effect_entropy(product, rho)}  # noqa: E731
    else:
        if kind == "luders":
            inst = luders_instrument(first)
        elif kind == "holevo":
            paths = _need(args, "alpha", "--alpha")
            if len(paths) == 1:
                raw = _read(paths[0])
                if isinstance(raw, list):
                    alphas = [ser.state_from_json(s, f"alpha[{i}]") for i, s in enumerate(raw)]
                else:
                    alphas = [ser.state_from_json(raw, "alpha")] * len(first)
            else:
                alphas = [ser.state_from_json(_read(p), f"alpha[{i}]") for i, p in enumerate(paths)]
            if len(alphas) != len(first):
                raise UsageError(f"holevo needs one alpha state per outcome ({len(first)}), got {len(alphas)}")
            inst = holevo_instrument(first, alphas)
        else:
            inst = ser.instrument_from_json(_read(_need(args, "instrument", "--instrument")), "instrument")
            check_measures(inst, first)
        product = observable_sequential(first, inst, second)
        payload = {"kind": kind, "product": product, "dropped": list(product.dropped)}
        entropies_of = lambda rho: {"entropy": observable_entropy(product, rho)}  # noqa: E731
    entropies = {}
    if args.state:
        rho = ser.state_from_json(_read(args.state), "state")
        _same_dim(product.dim, rho.dim)
        entropies = entropies_of(rho)
    _emit(args, _json_with_entropies(payload, entropies))
    return EXIT_OK


def cmd_coarse(args) -> int:
    A = ser.observable_from_json(_read(args.observable), "observable")
    mapping = _read(args.map)
    if not isinstance(mapping, dict) or not all(isinstance(v, (str, int)) for v in mapping.values()):
        raise SchemaError(f"{args.map}: expected an object mapping outcome labels to new labels")
    B = coarse_grain(A, {k: str(v) for k, v in mapping.items()}, args.targets)
    entropies = {}
    if args.state:
        rho = ser.state_from_json(_read(args.state), "state")
        _same_dim(A.dim, rho.dim)
        entropies = {"entropy_fine": observable_entropy(A, rho), "entropy_coarse": observable_entropy(B, rho)}
    _emit(args, _json_with_entropies({"observable": B}, entropies))
    return EXIT_OK


def cmd_model(args) -> int:
    model = ser.model_from_json(_read(args.model), "model")
    rho = ser.state_from_json(_read(args.state), "state")
    _same_dim(model.dim_h, rho.dim)
    A = model_observable(model)
    ent = model_entropies(model, rho)
    if args.format == "tsv":
        lines = ["quantity\tvalue", f"entropy_observable\t{fmt12(ent.observable)}",
                 f"entropy_probe\t{fmt12(ent.probe)}", f"gap\t{fmt12(ent.gap)}",
                 f"gap_nonpositive\t{str(ent.gap <= 1e-9).lower()}"]
        _emit(args, "\n".join(lines))
        return EXIT_OK
    doc = _json_with_entropies({"observable": A}, {
        "entropy_observable": ent.observable, "entropy_probe": ent.probe, "gap": ent.gap})
    doc = doc[:-1] + f', "gap_nonpositive": {str(ent.gap <= 1e-9).lower()}}}'
    _emit(args, doc)
    return EXIT_OK


def _parse_dims(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        dims = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--dims expects comma-separated integers, got {text!r}") from None
    if not dims:
        raise ConfigError("dims must be non-empty")
    return dims


def cmd_verify(args) -> int:
    from .suite import run_all
    reports = run_all(trials=args.trials, dims=_parse_dims(args.dims), seed=_resolve_seed(args.seed),
                      tolerance=args.tolerance, only=args.only, jobs=args.jobs)
    if args.format == "tsv":
        lines = ["id\tpassed\tworst_margin\tworst_term\ttrials\tskipped\telapsed"]
        for r in reports:
            lines.append(f"{r.id}\t{str(r.passed).lower()}\t{r.worst_margin!r}\t{r.worst_term}\t"
                         f"{r.trials}\t{r.skipped}\t{r.elapsed:.3f}")
        _emit(args, "\n".join(lines))
    else:
        _emit(args, json.dumps([r.to_json() for r in reports], indent=2, allow_nan=False))
    failed = [r.id for r in reports if not r.passed]
    if failed:
        print(f"qme: {len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = _resolve_seed(args.seed)
    rng = np.random.default_rng(seed)
    if args.dim < 1:
        raise UsageError("--dim must be positive")
    if args.kind == "state":
        obj = random_state(args.dim, args.rank, rng)
    elif args.kind == "effect":
        obj = random_effect(args.dim, rng)
    elif args.kind == "observable":
        obj = random_observable(args.dim, args.outcomes, rng)
    else:
        obj = random_instrument(args.dim, args.outcomes, args.kraus, rng)
    _emit(args, ser.dumps(obj, indent=2))
    return EXIT_OK


# ------------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qme", description="Entropy of quantum measurements: compute, compose and verify.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    out = _Parser(add_help=False)
    out.add_argument("--out", help="write output to this file instead of stdout")

    e = sub.add_parser("entropy", parents=[out], help="rho-entropy of a state, effect, observable or instrument")
    e.add_argument("target", choices=["state", "effect", "observable", "instrument"])
    e.add_argument("--state", help="state JSON (required)")
    e.add_argument("--effect")
    e.add_argument("--observable")
    e.add_argument("--instrument")
    e.add_argument("--format", choices=["json", "tsv"], default="json")
    e.add_argument("--sweep", metavar="lambda=START:STOP:STEP",
                   help="tabulate S of lambda*a over a grid (effect target only)")
    e.set_defaults(func=cmd_entropy)

    s = sub.add_parser("seqprod", parents=[out], help="sequential product of effects or observables")
    s.add_argument("kind", choices=["luders", "holevo", "custom-instrument"])
    s.add_argument("--first", help="effect a or observable A (JSON)")
    s.add_argument("--second", help="effect b or observable B (JSON)")
    s.add_argument("--alpha", action="append",
                   help="Holevo state; repeat once per outcome, or give one file holding a list")
    s.add_argument("--instrument", help="operation (effects) or instrument (observables) for custom-instrument")
    s.add_argument("--state", help="also report the rho-entropy of the product")
    s.set_defaults(func=cmd_seqprod)

    c = sub.add_parser("coarse", parents=[out], help="coarse-grain an observable along a label map")
    c.add_argument("--observable", required=True)
    c.add_argument("--map", required=True, help='JSON object {"x": "y", ...}')
    c.add_argument("--targets", nargs="+", help="declared outcome space of the result; must be covered")
    c.add_argument("--state")
    c.set_defaults(func=cmd_coarse)

    m = sub.add_parser("model", parents=[out], help="observable and entropies induced by a measurement model")
    m.add_argument("--model", required=True)
    m.add_argument("--state", required=True)
    m.add_argument("--format", choices=["json", "tsv"], default="json")
    m.set_defaults(func=cmd_model)

    v = sub.add_parser("verify", parents=[out], help="run the property-check suite")
    v.add_argument("--seed", type=int, help=f"suite seed (default: ${SEED_ENV}, else 0)")
    v.add_argument("--only", action="append", metavar="ID", help="run only this check (repeatable)")
    v.add_argument("--trials", type=int)
    v.add_argument("--dims", help="comma-separated dimensions, e.g. 2,3,4,5")
    v.add_argument("--tolerance", type=float)
    v.add_argument("--jobs", type=int, default=1, help="worker processes")
    v.add_argument("--format", choices=["json", "tsv"], default="json")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", parents=[out], help="emit a random object as JSON")
    g.add_argument("kind", choices=["state", "effect", "observable", "instrument"])
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--rank", type=int, help="state rank (default full)")
    g.add_argument("--outcomes", type=int, default=2)
    g.add_argument("--kraus", type=int, default=1, help="Kraus operators per outcome (instrument)")
    g.add_argument("--seed", type=int, help=f"default: ${SEED_ENV}, else 0")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SchemaError, ConfigError, UnknownCheckError) as exc:
        print(f"qme: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qme: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QMEError as exc:
        print(f"qme: invariant violated: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
