"""Command-line front end: ``colored-riffle <subcommand> [flags]``.

Every command prints one JSON document (keys sorted, so parse + re-emit is
byte-identical) that carries a run manifest. With ``--format csv`` the table
goes to stdout and the manifest to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import __version__
from . import algebra, carries, cutoff, formulas, lattice, shuffle
from .core import (
    DomainError,
    ResourceError,
    ShuffleParams,
    all_position_sets,
    as_positions,
    d_descent_set,
    format_rational,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 by default
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


Table = tuple[list[str], list[list[Any]]]


def to_jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, float, str)):
        return x
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "pairs"):
        return [list(pr) for pr in x.pairs()]
    if hasattr(x, "__int__"):
        return int(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _positions(text: str | None) -> list[int]:
    if text is None or text.strip() == "":
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise DomainError(f"bad --positions {text!r}") from exc


def _params(args: argparse.Namespace) -> ShuffleParams:
    for name in ("b", "n", "p"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")
    return ShuffleParams(args.b, args.n, args.p, args.sign)


def _which(args: argparse.Namespace) -> str:
    return "usual" if args.which == "d" else "dash"


def _seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for stochastic commands")
    return args.seed


# --------------------------------------------------------------------------
# handlers: each returns (payload, table or None)


def cmd_descent_prob(args):
    params = _params(args)
    s = as_positions(_positions(args.positions), params.n)
    spec = formulas.descent_matrix(params, s, "usual")
    prob = formulas.descent_prob(params, s)
    return {"params": params.as_dict(), "positions": s, "prob": prob, "matrix": spec.entries,
            "prefactor": spec.prefactor, "provenance": spec.provenance}, None


def cmd_dash_descent_prob(args):
    params = _params(args)
    s = as_positions(_positions(args.positions), params.n)
    spec = formulas.descent_matrix(params, s, "dash")
    prob = formulas.dash_descent_prob(params, s)
    return {"params": params.as_dict(), "positions": s, "prob": prob, "matrix": spec.entries,
            "prefactor": spec.prefactor, "provenance": spec.provenance}, None


def cmd_uniform_prob(args):
    if args.n is None or args.p is None:
        raise UsageError("--n and --p are required")
    s = as_positions(_positions(args.positions), args.n)
    which = _which(args)
    spec = formulas.uniform_matrix(args.n, args.p, s, which)
    prob = formulas.uniform_descent_prob(args.n, args.p, s, which)
    return {"n": args.n, "p": args.p, "which": which, "positions": s, "prob": prob, "matrix": spec.entries,
            "prefactor": spec.prefactor}, None


def _formula_for(params: ShuffleParams, which: str) -> Callable | None:
    if which == "usual" and params.sign == "+":
        return formulas.descent_prob
    if which == "dash" and params.sign == "-":
        return formulas.dash_descent_prob
    return None


def cmd_oracle_enumerate(args):
    params = _params(args)
    which = _which(args)
    dist = shuffle.enumerate_descent_probabilities(params, which, budget=args.budget, threads=args.threads)
    formula = _formula_for(params, which)
    rows = []
    for s in all_position_sets(params.n):
        enum = dist.get(s, Fraction(0))
        form = formula(params, s) if formula else None
        rows.append({"positions": s, "enumerated": enum, "formula": form, "match": None if form is None else form == enum})
    matches = [r["match"] for r in rows if r["match"] is not None]
    payload = {"params": params.as_dict(), "which": which, "label_words": params.b**params.n,
               "rows": rows, "all_match": all(matches) if matches else None}
    table = (["positions", "enumerated", "formula", "match"],
             [[" ".join(map(str, r["positions"])), format_rational(r["enumerated"]),
               "" if r["formula"] is None else format_rational(r["formula"]), r["match"]] for r in rows])
    return payload, table


def cmd_paths_count(args):
    params = _params(args)
    spec = lattice.LatticeSpec.for_params(params)
    s = as_positions(_positions(args.positions), params.n)
    lgv = lattice.lgv_count(spec, s)
    prob = (formulas.descent_prob if params.sign == "+" else formulas.dash_descent_prob)(params, s)
    out = {"params": params.as_dict(), "lattice": spec.kind, "positions": s, "lgv": lgv,
           "b_pow_n_times_prob": prob * params.b**params.n}
    try:
        out["brute_force"] = lattice.brute_force_path_count(spec, s, budget=args.budget)
    except ResourceError as exc:
        out["brute_force"] = None
        out["brute_force_skipped"] = str(exc)
    return out, None


def cmd_paths_enumerate(args):
    params = _params(args)
    spec = lattice.LatticeSpec.for_params(params)
    s = as_positions(_positions(args.positions), params.n)
    systems = []
    for i, paths in enumerate(lattice.enumerate_path_systems(spec, s, budget=args.budget)):
        if args.limit is not None and i >= args.limit:
            break
        st = lattice.chain(paths, spec)
        systems.append({"paths": lattice.paths_to_json(paths), "word": st["word"], "labels": st["labels"],
                        "sigma": st["sigma"], "descents": st["sigma_descents"]})
    table = (["paths", "word", "labels", "sigma"],
             [[" ".join(x["paths"]), " ".join(map(str, x["word"])), " ".join(map(str, x["labels"])),
               " ".join(f"{a}:{c}" for a, c in x["sigma"].pairs())] for x in systems])
    return {"params": params.as_dict(), "lattice": spec.kind, "positions": s, "systems": systems,
            "listed": len(systems), "lgv": lattice.lgv_count(spec, s)}, table


def _matrix_table(M) -> Table:
    size = len(M)
    return ["i"] + [str(j) for j in range(size)], [[i] + [format_rational(x) for x in row] for i, row in enumerate(M)]


def cmd_carries_matrix(args):
    params = _params(args)
    M = carries.transition_matrix(params).rows()
    return {"params": params.as_dict(), "rows": M}, _matrix_table(M)


def cmd_carries_spectral(args):
    params = _params(args)
    sp = carries.spectral(params)
    P = carries.transition_matrix(params).rows()
    size = params.ell + 1
    checks = {"UV_identity": carries.matmul(sp.U, sp.V) == carries.identity(size)}
    checks["powers"] = {str(N): carries.matpow(P, N) == sp.power(N) for N in range(args.max_power + 1)}
    return {"params": params.as_dict(), "U": sp.U, "V": sp.V, "eigenvalues": sp.eigenvalues,
            "projections": sp.E, "checks": checks}, None


def cmd_carries_simulate(args):
    params = _params(args)
    seed = _seed(args)
    if args.walk_check:
        report = carries.descent_process_check(params, args.steps, args.walks, seed)
        return report, None
    traj = carries.simulate_carries(params, args.steps, args.walks, seed)
    P = carries.transition_matrix(params).rows()
    size = params.ell + 1
    rows = []
    for k in range(args.steps + 1):
        counts = [int((traj[:, k] == i).sum()) for i in range(size)]
        exact = carries.matpow(P, k)[0]
        rows.append({"step": k, "counts": counts, "exact": exact})
    table = (["step"] + [f"count_{i}" for i in range(size)] + [f"exact_{i}" for i in range(size)],
             [[r["step"]] + r["counts"] + [format_rational(x) for x in r["exact"]] for r in rows])
    return {"params": params.as_dict(), "walks": args.walks, "steps": args.steps, "seed": seed, "rows": rows}, table


def cmd_class_sizes(args):
    if args.n is None or args.p is None:
        raise UsageError("--n and --p are required")
    sizes = carries.descent_class_sizes(args.n, args.p, budget=args.budget)
    return {"n": args.n, "p": args.p, "sizes": sizes}, (["i", "N_i"], [[i, v] for i, v in enumerate(sizes)])


def cmd_algebra_gessel(args):
    if args.n is None or args.p is None:
        raise UsageError("--n and --p are required")
    report = algebra.gessel_check(args.n, args.p, args.truncation)
    report["descent_algebra"] = algebra.descent_algebra_check(args.n, args.p)
    report["passed"] = report["passed"] and report["descent_algebra"]
    return report, None


def cmd_algebra_idempotents(args):
    params = _params(args)
    report = algebra.idempotent_check(params)
    report["multiplicities"] = algebra.multiplicity_check(params.n, params.p, rank=args.rank)
    report["passed"] = report["passed"] and report["multiplicities"]["passed"]
    return report, None


def cmd_algebra_minus_witness(args):
    params = _params(args)
    return algebra.minus_witness(params, args.powers), None


def cmd_tv_curve(args):
    params = _params(args)
    points = cutoff.cutoff_curve(params, args.j_min, args.j_max, args.j_step, threads=args.threads)
    rows = [{"j": pt.j, "k": pt.k, "tv_exact": pt.tv_exact, "tv_exact_float": pt.tv_exact_float,
             "tv_asymptotic": pt.tv_asymptotic, "j_eff": pt.j_eff} for pt in points]
    table = (cutoff.CSV_COLUMNS, [pt.as_row() for pt in points])
    return {"params": params.as_dict(), "k_rule": cutoff.K_RULE, "points": rows}, table


def cmd_sample_walk(args):
    params = _params(args)
    seed = _seed(args)
    walk = shuffle.sample_walk(params, args.steps, seed)
    rows = [{"step": k, "sigma": sigma, "d": len(d_descent_set(sigma, "usual")),
             "d_dash": len(d_descent_set(sigma, "dash")), "statistic": carries.walk_statistic(sigma, k, params)}
            for k, sigma in enumerate(walk)]
    table = (["step", "sigma", "d", "d_dash", "statistic"],
             [[r["step"], " ".join(f"{a}:{c}" for a, c in r["sigma"].pairs()), r["d"], r["d_dash"], r["statistic"]]
              for r in rows])
    return {"params": params.as_dict(), "seed": seed, "steps": args.steps, "walk": rows}, table


COMMANDS: dict[str, tuple[Callable, str]] = {
    "descent-prob": (cmd_descent_prob, "P(d-descent set = s) for b = 1 (mod p)"),
    "dash-descent-prob": (cmd_dash_descent_prob, "P(d'-descent set = s) for b = -1 (mod p)"),
    "uniform-prob": (cmd_uniform_prob, "descent-set probability under the uniform distribution"),
    "oracle-enumerate": (cmd_oracle_enumerate, "exhaustive descent-set distribution over all label words"),
    "paths-count": (cmd_paths_count, "LGV determinant and brute-force non-intersecting path count"),
    "paths-enumerate": (cmd_paths_enumerate, "list path systems with their words, labels and shuffles"),
    "carries-matrix": (cmd_carries_matrix, "transition matrix of the carries chain"),
    "carries-spectral": (cmd_carries_spectral, "U, V, projections and power checks"),
    "carries-simulate": (cmd_carries_simulate, "simulate the carries chain (or the walk check)"),
    "class-sizes": (cmd_class_sizes, "descent class sizes N_0..N_ell"),
    "algebra-gessel": (cmd_algebra_gessel, "Gessel coefficients and descent-algebra checks"),
    "algebra-idempotents": (cmd_algebra_idempotents, "idempotents and eigenvalue multiplicities"),
    "algebra-minus-witness": (cmd_algebra_minus_witness, "closed form and witness for b = -1 (mod p)"),
    "tv-curve": (cmd_tv_curve, "exact and asymptotic total-variation distance along a j grid"),
    "sample-walk": (cmd_sample_walk, "one seeded trajectory of the shuffle walk"),
}


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--b", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--sign", choices=["+", "-"])
    common.add_argument("--positions", help="comma separated, e.g. 1,2,4")
    common.add_argument("--which", choices=["d", "dash"], default="d")
    common.add_argument("--seed", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--threads", type=int, default=1)

    parser = Parser(prog="colored-riffle", description="Riffle shuffles on colored permutation groups.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)
    subs = {name: sub.add_parser(name, parents=[common], help=text) for name, (_, text) in COMMANDS.items()}
    subs["paths-enumerate"].add_argument("--limit", type=int, default=1000)
    subs["carries-spectral"].add_argument("--max-power", type=int, default=4)
    for name in ("carries-simulate", "sample-walk"):
        subs[name].add_argument("--steps", type=int, default=1)
    subs["carries-simulate"].add_argument("--walks", type=int, default=10_000)
    subs["carries-simulate"].add_argument("--walk-check", action="store_true")
    subs["algebra-gessel"].add_argument("--truncation", type=int, default=4)
    subs["algebra-idempotents"].add_argument("--rank", action="store_true")
    subs["algebra-minus-witness"].add_argument("--powers", type=int, default=3)
    subs["tv-curve"].add_argument("--j-min", type=float, default=-2.0)
    subs["tv-curve"].add_argument("--j-max", type=float, default=2.0)
    subs["tv-curve"].add_argument("--j-step", type=float, default=1.0)
    return parser


def manifest(argv: Sequence[str], args: argparse.Namespace) -> dict:
    params = {k: getattr(args, k) for k in ("b", "n", "p", "sign") if getattr(args, k, None) is not None}
    return {
        "command_line": " ".join(["colored-riffle", *argv]),
        "command": args.command,
        "params": params,
        "seed": args.seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _csv(table: Table) -> str:
    header, rows = table
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler, _ = COMMANDS[args.command]
    try:
        if args.threads < 1:
            raise DomainError("--threads must be >= 1")
        payload, table = handler(args)
        man = manifest(argv, args)
        if args.format == "csv":
            if table is None:
                raise DomainError(f"{args.command} has no tabular output; use --format json")
            text = _csv(table)
            if args.command == "tv-curve":
                text = f"# {cutoff.K_RULE}\n" + text
            sys.stdout.write(text)
            sys.stderr.write(dumps({"manifest": man}))
        else:
            sys.stdout.write(dumps({**payload, "manifest": man}))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return EXIT_DOMAIN
    except ResourceError as exc:
        sys.stderr.write(f"resource error: {exc}\n")
        return EXIT_RESOURCE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
