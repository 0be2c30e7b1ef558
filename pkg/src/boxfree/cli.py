"""Command-line front end: bounds table, single constructions, trial batches,
and offline re-verification of construction dumps.

Data records go to stdout (or --out) as line-oriented text, CSV, or JSON
lines, every record carrying a schema version; human-readable summaries go to
stderr.  Exit codes: 0 success, 1 usage, 2 budget exceeded, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence, TextIO

from . import __version__
from .bounds import BoundsRow, comparison_table, format_alpha
from .construct import (Budget, BudgetError, ConsistencyError, Params,
                        VerificationError, bad_edges_direct, build_instance,
                        run_trials, sample_forms, trial_rng)
from .gf import make_field
from .tensor import form_from_wire, form_to_wire

SCHEMA = "boxfree/1"
DELTA = 0.5  # report threshold: an instance is "good" if |E'| >= (1-DELTA) q^(ds-r)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; argparse's default of 2 is reserved for budgets
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# record emission


def _text_value(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".6g")
    if isinstance(value, (list, tuple)):
        return ",".join(str(x) for x in value)
    return str(value)


def emit_records(records: Sequence[dict], fmt: str, stream: TextIO) -> None:
    if fmt == "json-lines":
        for rec in records:
            stream.write(json.dumps(rec, sort_keys=True) + "\n")
    elif fmt == "csv":
        columns: list[str] = []
        for rec in records:
            for key in rec:
                if key not in columns:
                    columns.append(key)
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_text_value(rec[c]) if c in rec else "" for c in columns])
    else:
        for rec in records:
            stream.write(" ".join(f"{k}={_text_value(v)}" for k, v in rec.items()) + "\n")


def _open_out(path: Optional[str]):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


# ---------------------------------------------------------------------------
# table


def _table_text(rows: Sequence[BoundsRow]) -> str:
    header = ("d", "deletion", "grs", "new")
    cells = [header]
    for row in rows:
        cells.append((str(row.d), format_alpha(row.deletion),
                      format_alpha(row.grs) if row.grs is not None else "",
                      format_alpha(row.new)))
    widths = [max(len(line[i]) for line in cells) for i in range(4)]
    out = io.StringIO()
    for line in cells:
        out.write("  ".join(cell.rjust(w) for cell, w in zip(line, widths)).rstrip() + "\n")
    return out.getvalue()


def _table_records(rows: Sequence[BoundsRow]) -> list[dict]:
    records = []
    for row in rows:
        records.append({
            "schema": SCHEMA,
            "record": "bounds_row",
            "d": row.d,
            "deletion": format_alpha(row.deletion),
            "grs": format_alpha(row.grs) if row.grs is not None else None,
            "new": format_alpha(row.new),
            "deletion_exact": str(row.deletion),
            "grs_exact": str(row.grs) if row.grs is not None else None,
            "new_exact": str(row.new),
            "grs_s": row.grs_s,
            "new_r": row.new_r,
            "new_s": row.new_s,
        })
    return records


def cmd_table(args) -> int:
    if not 2 <= args.d_min <= args.d_max <= 64:
        raise UsageError(f"need 2 <= d_min <= d_max <= 64, got {args.d_min}..{args.d_max}")
    rows = comparison_table(args.d_min, args.d_max)
    stream, close = _open_out(args.out)
    try:
        if args.format == "text":
            stream.write(_table_text(rows))
        else:
            emit_records(_table_records(rows), args.format, stream)
    finally:
        if close:
            stream.close()
    return 0


# ---------------------------------------------------------------------------
# construct


def _make_params(args) -> Params:
    field = make_field(args.p, args.k)
    return Params(field=field, d=args.d, r=args.r, s=args.s)


def _budget(args) -> Budget:
    return Budget(tuples=args.budget_tuples, tensor_space=args.budget_tensor_space)


def _run_record(params: Params, command: str, seed: int, budget: Budget,
                **extra) -> dict:
    rec = {
        "schema": SCHEMA,
        "record": "run",
        "command": command,
        "version": __version__,
        "d": params.d,
        "r": params.r,
        "s": params.s,
        "p": params.field.p,
        "k": params.field.k,
        "q": params.q,
        "modulus": list(params.field.modulus),
        "seed": seed,
        "n": params.n,
        "target_exponent": str(params.target_exponent),
        "leading_constant": params.leading_constant,
        "in_theorem_regime": params.in_theorem_regime,
        "budget_tuples": budget.tuples,
        "budget_tensor_space": budget.tensor_space,
    }
    rec.update(extra)
    return rec


def cmd_construct(args) -> int:
    if args.seed < 0:
        raise UsageError("seed must be a nonnegative integer")
    params = _make_params(args)
    budget = _budget(args)
    forms = sample_forms(params, trial_rng(args.seed, 0))
    inst = build_instance(params, forms, budget)

    reference = params.reference_kept
    kept_ratio = len(inst.kept) / float(reference)
    records = [_run_record(params, "construct", args.seed, budget)]
    for i, form in enumerate(forms):
        rec = {"schema": SCHEMA, "record": "form", "index": i}
        rec.update(form_to_wire(form))
        records.append(rec)
    records.append({
        "schema": SCHEMA,
        "record": "summary",
        "edges": len(inst.edges),
        "boxes": len(inst.boxes),
        "line_tuples": len(inst.line_tuples),
        "bad": len(inst.bad),
        "kept": len(inst.kept),
        "box_free": inst.box_free,
        "reference_kept": str(reference),
        "kept_ratio": kept_ratio,
        "good": len(inst.kept) >= (1.0 - DELTA) * float(reference),
        "delta": DELTA,
    })

    stream, close = _open_out(args.out)
    try:
        emit_records(records, args.format, stream)
    finally:
        if close:
            stream.close()

    regime = "inside" if params.in_theorem_regime else "OUTSIDE"
    print(f"{params.field!r} d={params.d} r={params.r} s={params.s} seed={args.seed}: "
          f"n = {params.n}, target exponent {params.target_exponent} "
          f"({regime} the theorem regime)", file=sys.stderr)
    print(f"|E| = {len(inst.edges)}  |F| = {len(inst.boxes)}  "
          f"|L| = {len(inst.line_tuples)}  |B| = {len(inst.bad)}  "
          f"|E'| = {len(inst.kept)}  box-free: {'yes' if inst.box_free else 'NO'}",
          file=sys.stderr)
    print(f"|E'| vs c*n^(d-r/s) = q^(ds-r) = {reference}: ratio {kept_ratio:.4f}",
          file=sys.stderr)
    if not inst.box_free:
        raise VerificationError(f"box found in E' after deletion: {inst.witness}")
    return 0


# ---------------------------------------------------------------------------
# trials


def cmd_trials(args) -> int:
    if args.mode == "sample":
        if args.trials is None or args.trials < 1:
            raise UsageError("sampled mode needs --trials >= 1")
        if args.seed < 0:
            raise UsageError("seed must be a nonnegative integer")
    params = _make_params(args)
    budget = _budget(args)
    stats = run_trials(params, trials=args.trials, seed=args.seed,
                       mode=args.mode, budget=budget, delta=DELTA)

    records = [_run_record(params, "trials", args.seed, budget,
                           mode=args.mode, trials=stats.trials)]
    for rec in stats.records:
        records.append({
            "schema": SCHEMA,
            "record": "trial",
            "index": rec.index,
            "edges": rec.edges,
            "boxes": rec.boxes,
            "line_tuples": rec.line_tuples,
            "bad": rec.bad,
            "kept": rec.kept,
            "box_free": rec.box_free,
            "good": rec.good,
        })
    summary = {"schema": SCHEMA, "record": "summary"}
    summary.update(stats.summary())
    records.append(summary)

    stream, close = _open_out(args.out)
    try:
        emit_records(records, args.format, stream)
    finally:
        if close:
            stream.close()

    mean_e, mean_f = stats.mean("edges"), stats.mean("boxes")
    z_e, z_f = stats.zscore("edges", params.expected_edges), stats.zscore(
        "boxes", params.expected_boxes)
    print(f"{params.field!r} d={params.d} r={params.r} s={params.s} "
          f"mode={args.mode} trials={stats.trials}", file=sys.stderr)
    print(f"mean |E| = {mean_e} = {float(mean_e):.4f} "
          f"(expected {params.expected_edges} = {float(params.expected_edges):.4f}, "
          f"z = {'-' if z_e is None else format(z_e, '.3f')})", file=sys.stderr)
    print(f"mean |F| = {mean_f} = {float(mean_f):.4f} "
          f"(expected {params.expected_boxes} = {float(params.expected_boxes):.4f}, "
          f"z = {'-' if z_f is None else format(z_f, '.3f')})", file=sys.stderr)
    print(f"box-free in all trials: {'yes' if stats.all_box_free else 'NO'}",
          file=sys.stderr)
    if not stats.all_box_free:
        raise VerificationError("a trial produced a box that survived deletion")
    return 0


# ---------------------------------------------------------------------------
# verify


def _load_dump(path: str) -> tuple[dict, list[dict], dict]:
    run = None
    forms = []
    summary = None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                kind = rec.get("record")
                if kind == "run":
                    run = rec
                elif kind == "form":
                    forms.append(rec)
                elif kind == "summary":
                    summary = rec
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read dump {path}: {exc}") from exc
    if run is None or summary is None or not forms:
        raise UsageError(f"dump {path} is missing run, form, or summary records")
    return run, forms, summary


def cmd_verify(args) -> int:
    run, form_recs, summary = _load_dump(args.dump)
    field = make_field(int(run["p"]), int(run["k"]),
                       tuple(int(c) for c in run["modulus"]))
    params = Params(field=field, d=int(run["d"]), r=int(run["r"]), s=int(run["s"]))
    budget = Budget(tuples=args.budget_tuples, tensor_space=args.budget_tensor_space)
    forms = tuple(form_from_wire(rec) for rec in
                  sorted(form_recs, key=lambda rec: rec["index"]))

    checks: list[dict] = []

    def check(name: str, status: str, detail: str = "") -> None:
        checks.append({"schema": SCHEMA, "record": "check", "name": name,
                       "status": status, "detail": detail})

    reseeded = sample_forms(params, trial_rng(int(run["seed"]), 0))
    check("forms_reproduce_seed",
          "pass" if reseeded == forms else "fail",
          f"seed {run['seed']}")

    inst = build_instance(params, forms, budget)
    for name, recomputed in (("edges", len(inst.edges)),
                             ("boxes", len(inst.boxes)),
                             ("line_tuples", len(inst.line_tuples)),
                             ("bad", len(inst.bad)),
                             ("kept", len(inst.kept))):
        recorded = int(summary[name])
        check(f"{name}_count", "pass" if recomputed == recorded else "fail",
              f"recomputed {recomputed}, recorded {recorded}")
    check("box_free",
          "pass" if inst.box_free and bool(summary["box_free"]) else "fail",
          "no box in E'" if inst.box_free else f"witness {inst.witness}")

    try:
        direct = bad_edges_direct(params, forms, inst.edges, budget)
        check("bad_set_direct_oracle",
              "pass" if direct == inst.bad else "fail",
              f"direct |B| = {len(direct)}, union-of-products |B| = {len(inst.bad)}")
    except BudgetError:
        check("bad_set_direct_oracle", "skipped", "exceeds tuple budget")

    stream, close = _open_out(args.out)
    try:
        emit_records(checks, args.format, stream)
    finally:
        if close:
            stream.close()

    failed = [c for c in checks if c["status"] == "fail"]
    for c in checks:
        print(f"{c['name']}: {c['status'].upper()}"
              + (f" ({c['detail']})" if c["detail"] else ""), file=sys.stderr)
    if failed:
        raise VerificationError(f"{len(failed)} verification check(s) failed")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="boxfree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p, default_format):
        p.add_argument("--out", metavar="PATH", default=None,
                       help="write data records to PATH instead of stdout")
        p.add_argument("--format", choices=("text", "csv", "json-lines"),
                       default=default_format)
        p.add_argument("--budget-tuples", type=int, default=Budget().tuples,
                       help="max enumerated tuple count (q^s)^d")
        p.add_argument("--budget-tensor-space", type=int,
                       default=Budget().tensor_space,
                       help="max tensor-space size q^(r*s^d) for exact mode")

    def add_params(p):
        p.add_argument("--d", type=int, required=True, help="uniformity, >= 2")
        p.add_argument("--r", type=int, required=True, help="number of forms")
        p.add_argument("--s", type=int, required=True, help="dimension of V")
        p.add_argument("--p", type=int, required=True, help="field characteristic")
        p.add_argument("--k", type=int, default=1, help="field extension degree")
        p.add_argument("--seed", type=int, default=0)

    p_table = sub.add_parser("table", help="lower-bound exponent comparison table")
    p_table.add_argument("d_min", type=int)
    p_table.add_argument("d_max", type=int)
    add_common(p_table, "text")
    p_table.set_defaults(func=cmd_table)

    p_con = sub.add_parser("construct",
                           help="build, delete, and verify one seeded instance")
    add_params(p_con)
    add_common(p_con, "json-lines")
    p_con.set_defaults(func=cmd_construct)

    p_tri = sub.add_parser("trials", help="exact or sampled expectation trials")
    add_params(p_tri)
    p_tri.add_argument("--trials", type=int, default=None)
    p_tri.add_argument("--mode", choices=("exact", "sample"), default="sample")
    add_common(p_tri, "text")
    p_tri.set_defaults(func=cmd_trials)

    p_ver = sub.add_parser("verify",
                           help="re-verify a construct dump (json-lines) offline")
    p_ver.add_argument("dump", metavar="DUMP", help="path to a construct dump")
    add_common(p_ver, "text")
    p_ver.set_defaults(func=cmd_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"boxfree: error: {exc}", file=sys.stderr)
        return 1
    except BudgetError as exc:
        print(f"boxfree: budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (VerificationError, ConsistencyError) as exc:
        print(f"boxfree: verification failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
