"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 unsupported combination,
4 suite failure, 5 construction error.
"""

from __future__ import annotations

import argparse
import sys

from . import channels as ch
from . import fileio
from .errors import CoherenceError
from .majorization import aggregate_vector, coherence_vector, convertible_pure_to_ensemble, sort_desc
from .measures import get_functional
from .solver import SolveOptions, cf_estimate, cm_analytic, cm_estimate, cm_geometric
from .states import PureState
from .suites import SUITES, UnsupportedDimension, run_suite

EXIT_OK, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_SUITE, EXIT_BUILD = 0, 2, 3, 4, 5


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(doc: dict, human: bool, out) -> None:
    if human:
        width = max(len(k) for k in doc)
        for k, v in doc.items():
            if isinstance(v, dict):
                v = "{...}"
            out.write(f"{k:<{width}}  {v}\n")
    else:
        out.write(fileio.dumps(doc, indent=2) + "\n")


def _read_density(path):
    try:
        return fileio.load_density(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CLIError(EXIT_INPUT, f"invalid state file {path}: {exc}") from exc


def cmd_compute(args, out) -> int:
    rho = _read_density(args.state)
    try:
        f = get_functional(args.measure)
    except ValueError as exc:
        raise CLIError(EXIT_INPUT, str(exc)) from exc
    method = args.method or ("analytic" if rho.dim == 2 else "optimize")
    opts = SolveOptions(seed=args.seed, restarts=args.restarts, max_iter=args.max_iter)
    try:
        if method == "analytic":
            if rho.dim == 2:
                rep = cm_analytic(rho, f)
            elif f.kind == "geometric":
                rep = cm_geometric(rho, opts)
            else:
                raise CLIError(
                    EXIT_UNSUPPORTED,
                    f"analytic method needs dim 2 or the geometric measure (got dim {rho.dim}, {f.name})",
                )
        elif method == "optimize":
            rep = cm_estimate(rho, f, opts)
        else:
            rep = cf_estimate(rho, f, opts)
    except CoherenceError as exc:
        raise CLIError(EXIT_UNSUPPORTED, str(exc)) from exc
    doc = {"measure": f.name, "dim": rho.dim, "seed": args.seed}
    doc.update(fileio.report_to_dict(rep))
    _emit(doc, args.human, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    extra = {"states_per_pair": args.states} if args.suite == "lemma3" else {}
    try:
        res = run_suite(args.suite, dim=args.dim, trials=args.trials, seed=args.seed, **extra)
    except UnsupportedDimension as exc:
        raise CLIError(EXIT_UNSUPPORTED, str(exc)) from exc
    except ValueError as exc:
        raise CLIError(EXIT_INPUT, str(exc)) from exc
    doc = res.to_dict()
    if not args.timing:
        # wall time differs run to run; leave it out so reruns are byte-identical
        del doc["wall_time"]
    doc["passed"] = res.passed
    _emit(doc, args.human, out)
    return EXIT_OK if res.passed else EXIT_SUITE


def cmd_channel(args, out) -> int:
    try:
        doc = fileio.load(args.state)
    except (OSError, ValueError) as exc:
        raise CLIError(EXIT_INPUT, f"cannot read {args.state}: {exc}") from exc
    try:
        if args.make == "prep":
            chan = ch.build_preparation_channel(fileio.raw_diagonal(doc))
        else:
            state = fileio.parse_state(doc)
            rho = state.projector() if isinstance(state, PureState) else state
            chan = ch.build_dephasing_channel(rho)
    except CoherenceError as exc:
        raise CLIError(EXIT_BUILD, f"cannot build {args.make} channel: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CLIError(EXIT_INPUT, f"invalid state file {args.state}: {exc}") from exc
    try:
        fileio.write_json(args.out, fileio.channel_to_dict(chan))
    except OSError as exc:
        raise CLIError(EXIT_BUILD, f"cannot write {args.out}: {exc}") from exc
    _emit({"out": str(args.out), "n_kraus": len(chan), "tags": sorted(chan.classes)}, args.human, out)
    return EXIT_OK


def cmd_convert_check(args, out) -> int:
    try:
        psi = fileio.load_state(args.state)
        ens = fileio.load_ensemble(args.ensemble)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CLIError(EXIT_INPUT, f"invalid input: {exc}") from exc
    if not isinstance(psi, PureState):
        raise CLIError(EXIT_INPUT, "convert-check needs a pure state file (a 'vector' field)")
    try:
        ok = convertible_pure_to_ensemble(psi, ens)
    except CoherenceError as exc:
        raise CLIError(EXIT_UNSUPPORTED, str(exc)) from exc
    doc = {
        "convertible": ok,
        "source_mu": [float(x) for x in sort_desc(coherence_vector(psi)).probs],
        "ensemble_mu": [float(x) for x in aggregate_vector(ens).probs],
    }
    _emit(doc, args.human, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coherence", description=__doc__.splitlines()[0])
    p.add_argument("--human", action="store_true", help="print a plain table instead of JSON")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="evaluate the monotone or the convex roof of a state")
    c.add_argument("state")
    c.add_argument("--measure", default="geometric", help="geometric | relent | l1")
    c.add_argument("--method", choices=("analytic", "optimize", "roof"), default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--restarts", type=int, default=32)
    c.add_argument("--max-iter", type=int, default=3000)
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="run a seeded property suite")
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--dim", type=int, default=2)
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--states", type=int, default=100, help="pure states per channel pair (lemma3)")
    v.add_argument("--timing", action="store_true", help="include wall_time in the report")
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("channel", help="build a preparation or dephasing channel")
    k.add_argument("--make", choices=("prep", "dephase"), required=True)
    k.add_argument("--state", required=True)
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_channel)

    t = sub.add_parser("convert-check", help="test pure-to-ensemble convertibility")
    t.add_argument("--state", required=True)
    t.add_argument("--ensemble", required=True)
    t.set_defaults(func=cmd_convert_check)

    for sp in (c, v, k, t):
        sp.add_argument("--human", action="store_true", default=argparse.SUPPRESS)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except CLIError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
