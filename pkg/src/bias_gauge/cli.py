"""Command line entry point: ``bias-gauge <subcommand> ...``.

Exit codes: 0 success, 2 input/output or format problems, 3 degenerate
geometry or a resolution coarser than the manifold, 4 invalid specification.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import difficulty as dif
from . import ingest, sandbox, transport
from .estimators import DegenerateGeometry
from .numerics import log_to_bits

EXIT_OK, EXIT_IO, EXIT_DEGENERATE, EXIT_SPEC = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _csv_list(cast):
    def parse(text: str):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}") from None
    return parse


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: not valid JSON ({exc})", EXIT_SPEC) from exc


def _load_spec(path, kind=None) -> dif.TaskSpec:
    obj = _load_json(path)
    if kind:
        obj["kind"] = kind
        if kind == "classification":
            obj["z"] = obj.get("d")
    return dif.TaskSpec.from_json(obj)


def threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("BIAS_GAUGE_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise CliError(f"BIAS_GAUGE_THREADS must be an integer, got {env!r}", EXIT_SPEC) from None


# -- subcommands --------------------------------------------------------------------

def _load_dataset(args):
    paths = [Path(p) for p in args.input]
    for p in paths:
        if not p.exists():
            raise CliError(f"no such file: {p}", EXIT_IO)
    if args.format == "idx":
        if len(paths) == 1 and paths[0].is_dir():
            d = paths[0]
            found = [next(iter(sorted(d.glob(f"*{kind}-idx*"))), None) for kind in ("images", "labels")]
            if None in found:
                raise CliError(f"{d}: no *images-idx* / *labels-idx* pair found", EXIT_IO)
            paths = found
        if len(paths) != 2:
            raise CliError("idx input needs an images file and a labels file", EXIT_IO)
        return ingest.read_idx(paths[0], paths[1], args.scale)
    if args.format == "cifar10":
        return ingest.read_cifar10_bin(paths, args.scale)
    if len(paths) != 1:
        raise CliError("csv input takes a single file", EXIT_IO)
    # CSV values are used as given; --scale only applies to 8-bit image formats
    return ingest.read_csv_matrix(paths[0], args.label_column)


def cmd_stats(args) -> str:
    data = _load_dataset(args)
    scaling = {"scale": args.scale if args.format != "csv" else "as_given", "format": args.format}
    stats = ingest.dataset_stats(data, delta_mode=args.delta_mode, dim_k=args.k,
                                 anchors=args.anchors, seed=args.seed, scaling=scaling)
    obj = stats.to_json()
    if args.output == "json":
        return _dump_json(obj)
    if args.output == "csv":
        keys = ["n", "ambient_dim", "r", "m_hat", "delta_hat", "delta_method"]
        return ",".join(keys) + "\n" + ",".join("" if obj[k] is None else str(obj[k]) for k in keys) + "\n"
    lines = [f"{k}: {obj[k]}" for k in ("n", "ambient_dim", "r", "m_hat", "delta_hat", "delta_method")]
    if obj["flags"]:
        lines.append("flags: " + ", ".join(obj["flags"]))
    return "\n".join(lines) + "\n"


def _report_text(report: dif.DifficultyReport, args) -> str:
    if args.output == "json":
        return _dump_json(report.to_json())
    if args.output == "csv":
        out = ["term,nats"] + [f"{k},{v!r}" for k, v in report.bracket_terms.items()]
        out.append(f"total_bits,{report.total_bits.scientific()}")
        return "\n".join(out) + "\n"
    head = f"total: {report.total_bits.scientific()} bits"
    if report.data_sufficient:
        head += "  [data_sufficient]"
    return head + "\n" + report.table() + "\n"


def cmd_difficulty(args) -> str:
    if args.rl:
        missing = [f for f in ("m", "delta", "n", "d", "eps") if getattr(args, f) is None]
        if missing:
            raise CliError("--rl needs " + ", ".join("--" + f for f in missing), EXIT_SPEC)
        report = dif.difficulty_rl(int(args.m), args.delta, args.n, int(args.d), args.eps)
    elif args.meta_spec:
        report = dif.difficulty_meta(dif.MetaTaskSpec.from_json(_load_json(args.meta_spec)))
    elif args.spec:
        report = dif.difficulty_general(_load_spec(args.spec, args.kind))
    else:
        raise CliError("give --spec, --meta-spec or --rl", EXIT_SPEC)
    return _report_text(report, args)


def cmd_sweep(args) -> str:
    spec = _load_spec(args.spec, args.kind)
    cast = int if args.param in ("m", "d") else float
    values = [cast(v) for v in args.values]
    rows = dif.sweep(spec, args.param, values)
    if all(err is not None for _, _, err in rows):
        raise CliError("every sweep point failed: " + rows[0][2], EXIT_SPEC)
    if args.output == "json":
        return _dump_json([
            {"value": v, "report": None if rep is None else rep.to_json(), "error": err}
            for v, rep, err in rows
        ])
    return dif.sweep_csv(rows, args.param)


def cmd_combine(args) -> str:
    res = dif.combine(_load_spec(args.spec_a), _load_spec(args.spec_b))
    if args.output == "json":
        return _dump_json(res.to_json())
    lower, upper = log_to_bits(res.lower), log_to_bits(res.upper)
    if args.output == "csv":
        return f"bound,bits\nlower,{lower.scientific()}\nupper,{upper.scientific()}\n"
    return (f"lower: {lower.scientific()} bits\nupper: {upper.scientific()} bits\n"
            f"task 1 with distractor: {res.i1_aug.total_bits.scientific()} bits\n"
            f"task 2 with distractor: {res.i2_aug.total_bits.scientific()} bits\n")


def _read_errors(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or not {"name", "error_rate"} <= set(reader.fieldnames):
                raise CliError(f"{path}: needs columns name,error_rate", EXIT_IO)
            return [(row["name"], row["error_rate"]) for row in reader]
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from exc


def cmd_rank(args) -> str:
    spec = _load_spec(args.spec, args.kind)
    models = []
    for name, err in _read_errors(args.errors):
        try:
            models.append((name, float(err)))
        except ValueError:
            models.append((name, err))
    rows = dif.rank_models(spec, [(n, e) for n, e in models if isinstance(e, float)])
    rows += [{"name": n, "error_rate": e, "bits": None, "error": "non-numeric error rate"}
             for n, e in models if not isinstance(e, float)]
    if rows and all(r["bits"] is None for r in rows):
        raise CliError("no model could be evaluated", EXIT_SPEC)
    if args.output == "json":
        return _dump_json([{**r, "bits": None if r["bits"] is None else r["bits"].to_json(),
                            "bits_sci": None if r["bits"] is None else r["bits"].scientific()}
                           for r in rows])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "error_rate", "bits", "log10_bits", "error"])
    for r in rows:
        bits = r["bits"]
        w.writerow([r["name"], r["error_rate"], "" if bits is None else bits.scientific(),
                    "" if bits is None else repr(bits.log10()), r["error"] or ""])
    return buf.getvalue()


def cmd_validate_wasserstein(args) -> str:
    res = transport.scaling_experiment(args.m, args.n, ref_size=args.ref, trials=args.trials,
                                       seed=args.seed, workers=threads(args))
    if args.rows_out:
        Path(args.rows_out).write_text(res.rows_csv())
    if args.output == "json":
        return _dump_json({
            "rows": [list(r) for r in res.rows],
            "fits": [dict(zip(("m", "slope", "intercept", "r2"), f)) for f in res.fits],
        })
    return res.fits_csv()


def cmd_sandbox(args) -> str:
    task = sandbox.build_toy(args.K, args.n, args.B, args.eps, args.seed)
    rep = sandbox.mc_inductive_bias(task, args.samples, args.seed)
    if args.output == "json":
        return _dump_json(rep)
    keys = ["K", "n", "eps", "fraction_generalizing", "fraction_in_ball", "i_mc", "i_bound",
            "implication_violations", "probe_violations"]
    if args.output == "csv":
        return ",".join(keys) + "\n" + ",".join(repr(rep[k]) for k in keys) + "\n"
    return "\n".join(f"{k}: {rep[k]}" for k in keys + ["flags"]) + "\n"


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("table", "json", "csv"), default="table")
    common.add_argument("--out", help="write the result to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (falls back to BIAS_GAUGE_THREADS, then 1)")

    p = argparse.ArgumentParser(prog="bias-gauge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stats", parents=[common], help="estimate n, r, m and delta from a dataset")
    s.add_argument("--format", choices=("idx", "cifar10", "csv"), required=True)
    s.add_argument("--input", nargs="+", required=True)
    s.add_argument("--scale", choices=ingest.SCALES, default="unit")
    s.add_argument("--label-column", default=None)
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--anchors", type=int, default=None)
    s.add_argument("--delta-mode", choices=("auto", "exact", "evt"), default="auto")
    s.set_defaults(func=cmd_stats)

    kinds = ("classification", "general", "rl_cube")
    d = sub.add_parser("difficulty", parents=[common], help="difficulty of one task")
    d.add_argument("--spec")
    d.add_argument("--meta-spec")
    d.add_argument("--kind", choices=kinds)
    d.add_argument("--rl", action="store_true", help="control task on a cube (use --m --delta --n --d --eps)")
    d.add_argument("--m", type=int)
    d.add_argument("--delta", type=float)
    d.add_argument("--n", type=float)
    d.add_argument("--d", type=int)
    d.add_argument("--eps", type=float)
    d.set_defaults(func=cmd_difficulty)

    w = sub.add_parser("sweep", parents=[common], help="vary one parameter")
    w.add_argument("--spec", required=True)
    w.add_argument("--kind", choices=kinds)
    w.add_argument("--param", choices=dif.SWEEP_PARAMS, required=True)
    w.add_argument("--values", type=_csv_list(str), required=True)
    w.set_defaults(func=cmd_sweep)

    c = sub.add_parser("combine", parents=[common], help="bounds for solving two tasks jointly")
    c.add_argument("spec_a")
    c.add_argument("spec_b")
    c.set_defaults(func=cmd_combine)

    r = sub.add_parser("rank", parents=[common], help="information content of models from their error rates")
    r.add_argument("--spec", required=True)
    r.add_argument("--kind", choices=kinds)
    r.add_argument("--errors", required=True, help="CSV with columns name,error_rate")
    r.set_defaults(func=cmd_rank)

    v = sub.add_parser("validate-wasserstein", parents=[common], help="exact transport scaling experiment")
    v.add_argument("--m", type=_csv_list(int), default=[3])
    v.add_argument("--n", type=_csv_list(int), default=[10, 25, 50, 100, 250, 500])
    v.add_argument("--ref", type=int, default=2000)
    v.add_argument("--trials", type=int, default=5)
    v.add_argument("--rows-out", help="also write the per-trial table here")
    v.set_defaults(func=cmd_validate_wasserstein)

    b = sub.add_parser("sandbox", parents=[common], help="Monte Carlo check on a toy circle task")
    b.add_argument("--K", type=int, default=4)
    b.add_argument("--n", type=int, default=3)
    b.add_argument("--B", type=float, default=2.0)
    b.add_argument("--eps", type=float, default=0.5)
    b.add_argument("--samples", type=int, default=100_000)
    b.set_defaults(func=cmd_sandbox)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ingest.FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DegenerateGeometry, dif.ResolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (dif.SpecError, sandbox.InfeasibleBall, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
