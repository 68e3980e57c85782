"""Command-line front end.

Every subcommand prints a JSON summary to stdout. Subcommands that take
``--out`` also write a data file and a sidecar ``<out>.manifest.json`` with
the argument vector, seed, library version and SHA-256 of the data file;
``spinlab rerun <manifest>`` replays it and compares checksums.

Exit codes: 0 success (a violated Bell inequality is a successful run),
1 rerun checksum mismatch, 2 usage error, 3 I/O error, 4 model-contract
violation. Angles are radians throughout.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bell import (
    BellTriple,
    flipped_single_particle_correlation,
    in_reference_interval,
    singlet_correlation,
    violation_scan,
)
from .errors import ConfigError, EmptySelectionError, ModelContractError
from .estimate import CorrelationEstimate
from .experiment import (
    ExperimentConfig,
    bell_experiment,
    estimate_correlation,
    run_experiment,
)
from .furry import furry_mixture, interference_delta, mixture_correlation
from .lhv import (
    available_models,
    get_model,
    lhv_bell_check,
    lhv_correlation,
    sign_model_correlation,
)
from .measure import (
    analytic_sequential,
    joint_correlation,
    run_sequential,
    sample_joint,
)
from .outputs import csv_text, dumps_json, sha256_file, write_manifest, write_text
from .qstate import (
    XHAT,
    ZHAT,
    Direction,
    TwoQubitKet,
    random_direction,
    singlet,
    spin_eigenstate,
    tensor_product,
)
from .separation import Order, no_signaling_check
from .streams import make_stream

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_IO, EXIT_CONTRACT = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def parse_axis(text: str) -> Direction:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"axis must be 'theta,phi' in radians, got {text!r}")
    if len(parts) != 2 or not all(math.isfinite(p) for p in parts):
        raise argparse.ArgumentTypeError(f"axis must be 'theta,phi' in radians, got {text!r}")
    return Direction(*parts)


def parse_pair(text: str) -> tuple[Direction, Direction]:
    try:
        a, b = text.split(";")
    except ValueError:
        raise argparse.ArgumentTypeError(f"setting pair must be 'ta,pa;tb,pb', got {text!r}")
    return parse_axis(a), parse_axis(b)


def parse_ket(text: str) -> TwoQubitKet:
    try:
        vals = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("ket must be 8 comma-separated reals (re,im pairs)")
    if len(vals) != 8:
        raise argparse.ArgumentTypeError("ket must be 8 comma-separated reals (re,im pairs)")
    amps = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    try:
        return TwoQubitKet.normalized(amps)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def seed_type(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return value


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


STATES = {
    "singlet": singlet,
    "product-up-down": lambda: tensor_product(spin_eigenstate(ZHAT, 1), spin_eigenstate(ZHAT, -1)),
    "product": lambda: tensor_product(spin_eigenstate(ZHAT, 1), spin_eigenstate(ZHAT, -1)),
    "product-x": lambda: tensor_product(spin_eigenstate(XHAT, 1), spin_eigenstate(XHAT, 1)),
    "schmidt-0.8": lambda: TwoQubitKet([math.sqrt(0.8), 0, 0, math.sqrt(0.2)]),
}


def resolve_state(args) -> TwoQubitKet:
    if args.state == "custom":
        if args.ket is None:
            raise UsageError("--state custom needs --ket")
        return args.ket
    return STATES[args.state]()


def add_state_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--state", choices=[*STATES, "custom"], default="singlet")
    p.add_argument("--ket", type=parse_ket, default=None,
                   help="custom two-qubit ket: re,im for uu,ud,du,dd (normalized on input)")


def axis_json(d: Direction) -> list[float]:
    return [d.theta, d.phi]


def _jsonable(value):
    if isinstance(value, Direction):
        return axis_json(value)
    if isinstance(value, TwoQubitKet):
        return [[float(c.real), float(c.imag)] for c in value.amplitudes]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


class Run:
    """Collects what a subcommand produced and writes it out."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = argv

    def params(self) -> dict:
        skip = {"func", "command"}
        return {k: _jsonable(v) for k, v in sorted(vars(self.args).items()) if k not in skip}

    def emit(self, summary: dict, data_text: str | None = None) -> int:
        """Print the summary; with --out write the data (or the summary) and its manifest."""
        text = dumps_json(summary)
        out = getattr(self.args, "out", None)
        if out is not None:
            out = Path(out)
            write_text(out, data_text if data_text is not None else text)
            write_manifest(out, self.args.command, self.argv, self.params(),
                           getattr(self.args, "seed", None), __version__)
        sys.stdout.write(text)
        return EXIT_OK


# --------------------------------------------------------------------------- #
# subcommands
# --------------------------------------------------------------------------- #

def cmd_correlate(args, run: Run) -> int:
    psi = resolve_state(args)
    summary = {"analytic": joint_correlation(psi, args.axis_a, args.axis_b)}
    if args.mc is not None:
        a, b = sample_joint(psi, args.axis_a, args.axis_b, make_stream(args.seed), size=args.mc)
        est = CorrelationEstimate.from_products(a.astype(np.int64) * b)
        summary["mc"] = est.to_dict()
        summary["seed"] = args.seed
    return run.emit(summary)


CORRELATIONS = {
    "singlet": singlet_correlation,
    "single-particle-flipped": flipped_single_particle_correlation,
    "sign-model": sign_model_correlation,
    "furry-singlet": lambda a, b: mixture_correlation(furry_mixture(singlet()), a, b),
}


def cmd_bell_scan(args, run: Run) -> int:
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    if not (0.0 <= args.theta_min < args.theta_max <= math.pi):
        raise UsageError("need 0 <= theta-min < theta-max <= pi")
    scan = violation_scan(args.theta_min, args.theta_max, args.steps,
                          CORRELATIONS[args.correlation])
    rows = [(t, r.lhs, r.rhs, r.margin, r.violated) for t, r in scan]
    violated = [t for t, r in scan if r.violated]
    summary = {
        "correlation": args.correlation,
        "rows": len(scan),
        "violated_count": len(violated),
        "violated_range": [min(violated), max(violated)] if violated else None,
        "reference_interval": [0.0, math.pi / 2],
        "violated_only_in_reference_interval": all(in_reference_interval(t) for t in violated),
    }
    data = csv_text(["theta", "lhs", "rhs", "margin", "violated"], rows)
    return run.emit(summary, data)


def _axes_from(args) -> tuple[Direction, Direction]:
    if args.theta is not None:
        return ZHAT, Direction(args.theta, 0.0)
    return args.axis_a, args.axis_b


def cmd_lhv_run(args, run: Run) -> int:
    model = get_model(args.model)
    rng = make_stream(args.seed)
    axis_a, axis_b = _axes_from(args)
    est = lhv_correlation(model, axis_a, axis_b, args.n, rng)
    summary = {"model": model.name, "axis_a": axis_json(axis_a), "axis_b": axis_json(axis_b),
               **est.to_dict(), "seed": args.seed}
    if model.name == "sign":
        summary["analytic"] = sign_model_correlation(axis_a, axis_b)
    if not args.bell_triples:
        return run.emit(summary)

    triple_rng = make_stream(args.seed, 1)
    triples = [BellTriple(*(random_direction(triple_rng) for _ in range(3)))
               for _ in range(args.bell_triples)]
    reports = lhv_bell_check(model, triples, args.n, make_stream(args.seed, 2))
    summary["bell_triples"] = len(reports)
    summary["violations"] = sum(r.violated for r in reports)
    summary["min_margin_over_tol"] = min(r.margin / r.tol for r in reports)
    rows = [(i, *axis_json(t.a), *axis_json(t.b), *axis_json(t.c),
             r.lhs, r.rhs, r.margin, r.tol, r.violated)
            for i, (t, r) in enumerate(zip(triples, reports))]
    data = csv_text(["triple", "theta_a", "phi_a", "theta_b", "phi_b", "theta_c", "phi_c",
                     "lhs", "rhs", "margin", "tol", "violated"], rows)
    return run.emit(summary, data)


def cmd_furry_compare(args, run: Run) -> int:
    psi = resolve_state(args)
    mix = furry_mixture(psi)

    def compare(a, b):
        qm = joint_correlation(psi, a, b)
        fm = mixture_correlation(mix, a, b)
        return qm, fm, interference_delta(psi, a, b)

    qm, fm, delta = compare(args.axis_a, args.axis_b)
    summary = {"qm": qm, "furry": fm, "delta": delta,
               "mixture": {"degenerate_schmidt": mix.degenerate, "branches": mix.describe()}}
    if not args.random_pairs:
        return run.emit(summary)
    rng = make_stream(args.seed)
    rows = []
    for _ in range(args.random_pairs):
        a, b = random_direction(rng), random_direction(rng)
        rows.append((*axis_json(a), *axis_json(b), *compare(a, b)))
    summary["random_pairs"] = len(rows)
    summary["seed"] = args.seed
    data = csv_text(["theta_a", "phi_a", "theta_b", "phi_b", "qm", "furry", "delta"], rows)
    return run.emit(summary, data)


def cmd_nosignal(args, run: Run) -> int:
    psi = resolve_state(args)
    if len(args.remote_axes) < 2:
        raise UsageError("--remote-axes needs at least two axes")
    rng = make_stream(args.seed) if args.mc else None
    report = no_signaling_check(psi, args.local_axis, args.remote_axes, local=args.local,
                                n=args.mc, rng=rng)
    return run.emit(report.to_json())


def cmd_epr_run(args, run: Run) -> int:
    psi = resolve_state(args)
    order = Order(args.order)
    if args.bell_theta is not None:
        triple = BellTriple(Direction(-args.bell_theta), ZHAT, Direction(args.bell_theta))
        cfg = ExperimentConfig(args.source, [(ZHAT, ZHAT)], 1, args.seed, "fixed", order, psi,
                               args.model)
        result = bell_experiment(cfg, triple, args.n, workers=args.workers)
        return run.emit(result.to_dict())

    if args.setting:
        settings, policy = args.setting, ("choice" if len(args.setting) > 1 else "fixed")
    else:
        settings, policy = [(args.axis_a, args.axis_b)], "fixed"
    cfg = ExperimentConfig(args.source, settings, args.n, args.seed, policy, order, psi,
                           args.model)
    records = run_experiment(cfg, workers=args.workers)
    summaries = []
    for a, b in cfg.settings:
        try:
            est = estimate_correlation(records, (a, b))
        except EmptySelectionError:
            continue
        summaries.append({"pair": [axis_json(a), axis_json(b)], **est.to_dict()})
    summary = {"source": args.source, "order": order.value, "n_trials": len(records),
               "seed": args.seed, "summaries": summaries}
    if args.out is None:
        return run.emit(summary)
    out = Path(args.out)
    records.to_csv(out)
    write_manifest(out, args.command, run.argv, run.params(), args.seed, __version__)
    if args.summary_out:
        write_text(Path(args.summary_out), dumps_json(summaries))
    sys.stdout.write(dumps_json(summary))
    return EXIT_OK


INPUTS = {
    "up-z": lambda: spin_eigenstate(ZHAT, 1),
    "down-z": lambda: spin_eigenstate(ZHAT, -1),
    "up-x": lambda: spin_eigenstate(XHAT, 1),
}


def cmd_sg(args, run: Run) -> int:
    state = spin_eigenstate(args.input_axis, 1) if args.input_axis else INPUTS[args.input]()
    axis = Direction(args.theta, args.phi) if args.axis is None else args.axis
    stats = run_sequential(state, axis, args.n, make_stream(args.seed))
    summary = {"second_axis": axis_json(axis), "seed": args.seed, **stats.to_dict(),
               "analytic_given_entry": analytic_sequential(axis)}
    return run.emit(summary)


def cmd_rerun(args, run: Run) -> int:
    manifest_file = Path(args.manifest)
    manifest = json.loads(manifest_file.read_text(encoding="utf-8"))
    target_dir = Path(args.into) if args.into else manifest_file.parent
    argv = list(manifest["argv"])
    target = target_dir / manifest["output"]
    argv[argv.index("--out") + 1] = str(target)
    with contextlib.redirect_stdout(io.StringIO()):
        code = main(argv)
    if code != EXIT_OK:
        return code
    actual = sha256_file(target)
    match = actual == manifest["sha256"]
    sys.stdout.write(dumps_json({"output": str(target), "expected": manifest["sha256"],
                                 "actual": actual, "match": match}))
    return EXIT_OK if match else EXIT_MISMATCH


# --------------------------------------------------------------------------- #
# parser
# --------------------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinlab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correlate", help="joint spin correlation of a two-qubit state")
    add_state_args(p)
    p.add_argument("--axis-a", type=parse_axis, required=True)
    p.add_argument("--axis-b", type=parse_axis, required=True)
    p.add_argument("--mc", type=positive_int, default=None, help="also sample this many pairs")
    p.add_argument("--seed", type=seed_type, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("bell-scan", help="scan Bell's inequality in the symmetric geometry")
    p.add_argument("--theta-min", type=float, required=True)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--correlation", choices=list(CORRELATIONS), default="singlet",
                   help="correlation fed to the inequality (default: singlet)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bell_scan)

    p = sub.add_parser("lhv-run", help="Monte Carlo local hidden-variable correlation")
    p.add_argument("--model", default="sign", help=f"one of: {', '.join(available_models())}")
    p.add_argument("--theta", type=float, default=None,
                   help="angle from z for axis b, with axis a = z")
    p.add_argument("--axis-a", type=parse_axis, default=ZHAT)
    p.add_argument("--axis-b", type=parse_axis, default=ZHAT)
    p.add_argument("--n", type=positive_int, default=1_000_000)
    p.add_argument("--seed", type=seed_type, default=0)
    p.add_argument("--bell-triples", type=int, default=0,
                   help="also check Bell's inequality on this many random triples")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_lhv_run)

    p = sub.add_parser("furry-compare", help="quantum vs Furry-mixture correlation")
    add_state_args(p)
    p.add_argument("--axis-a", type=parse_axis, default=ZHAT)
    p.add_argument("--axis-b", type=parse_axis, default=ZHAT)
    p.add_argument("--random-pairs", type=int, default=0)
    p.add_argument("--seed", type=seed_type, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_furry_compare)

    p = sub.add_parser("nosignal-check", help="local marginals across remote settings")
    add_state_args(p)
    p.add_argument("--local-axis", type=parse_axis, required=True)
    p.add_argument("--remote-axes", type=parse_axis, nargs="+", required=True)
    p.add_argument("--local", type=int, choices=(1, 2), default=2)
    p.add_argument("--mc", type=positive_int, default=None)
    p.add_argument("--seed", type=seed_type, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_nosignal)

    p = sub.add_parser("epr-run", help="seeded Monte Carlo EPR trial records")
    p.add_argument("--source", choices=("quantum", "lhv", "furry"), default="quantum")
    add_state_args(p)
    p.add_argument("--model", default="sign")
    p.add_argument("--axis-a", type=parse_axis, default=ZHAT)
    p.add_argument("--axis-b", type=parse_axis, default=ZHAT)
    p.add_argument("--setting", type=parse_pair, action="append",
                   help="'ta,pa;tb,pb'; repeat for a per-trial choice among pairs")
    p.add_argument("--order", choices=[o.value for o in Order], default="simultaneous")
    p.add_argument("--n", type=positive_int, default=10_000)
    p.add_argument("--seed", type=seed_type, default=0)
    p.add_argument("--bell-theta", type=float, default=None,
                   help="run a Bell test in the symmetric geometry with n trials per pair")
    p.add_argument("--workers", type=positive_int, default=1)
    p.add_argument("--out", default=None, help="records CSV")
    p.add_argument("--summary-out", default=None, help="per-pair summary JSON")
    p.set_defaults(func=cmd_epr_run)

    p = sub.add_parser("sg-sequential", help="double Stern-Gerlach run")
    p.add_argument("--input", choices=list(INPUTS), default="up-z")
    p.add_argument("--input-axis", type=parse_axis, default=None,
                   help="prepare spin-up along this axis instead of --input")
    p.add_argument("--theta", type=float, default=math.pi / 3)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--axis", type=parse_axis, default=None, help="overrides --theta/--phi")
    p.add_argument("--n", type=positive_int, default=1_000_000)
    p.add_argument("--seed", type=seed_type, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sg)

    p = sub.add_parser("rerun", help="replay a manifest and compare checksums")
    p.add_argument("manifest")
    p.add_argument("--into", default=None, help="write the replayed output here instead")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, Run(args, argv))
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"spinlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelContractError as exc:
        print(f"spinlab {args.command}: model contract violated: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as exc:
        print(f"spinlab {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
