"""Batch command-line surface.

Every command is deterministic given its configuration and seed: primary
output files are byte-identical across reruns (wall-clock timings go to
stderr only).  Exit codes: 0 success, 2 usage, 3 capacity, 4 invariant
violation, 5 unsupported operation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from .catalog import AbstractGroupRef, catalog_names, load_catalog_group
from .errors import CapacityError, InvariantViolation, ParseError, UnsupportedError
from .groupdef import GroupDef, parse_group, print_group
from .haar import (
    DENSITY_CSV_FORMAT,
    DensityRecord,
    bound_ledger,
    capped_census,
    density_curve,
    density_rows,
    estimate_torsion_density,
    ledger_to_dict,
    record_to_dict,
)
from .quotients import (
    DEFAULT_ELEMENT_CAP,
    build_stab_chain,
    enumerate_quotient,
    index,
    is_level_transitive,
    metadata_rist_level,
    orbits,
    profinite_rist_projection,
    rigid_level_stabilizer,
    rigid_stabilizer,
)
from .trees import format_vertex

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_INVARIANT = 4
EXIT_UNSUPPORTED = 5

ELEMENT_CAP_ENV = "ARBOR_ELEMENT_CAP"


class UsageError(Exception):
    pass


def _parse_depths(text: str) -> list[int]:
    """``3`` or ``1..4`` (inclusive range)."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        depths = list(range(int(lo), int(hi) + 1))
    else:
        depths = [int(text)]
    if not depths or any(d < 0 for d in depths):
        raise UsageError(f"bad depth specification {text!r}")
    return depths


def _load_group(spec: str):
    if spec.endswith(".ssg") or "/" in spec or os.sep in spec:
        path = Path(spec)
        if not path.exists():
            raise UsageError(f"no such group file: {spec}")
        try:
            return parse_group(path.read_text(encoding="utf-8"))
        except ParseError as exc:
            raise UsageError(f"{spec}: {exc}") from exc
    try:
        return load_catalog_group(spec)
    except (KeyError, ValueError) as exc:
        raise UsageError(
            f"unknown group {spec!r}; catalog: {', '.join(catalog_names())}"
        ) from exc


def _element_cap(args) -> int:
    if args.element_cap is not None:
        return args.element_cap
    env = os.environ.get(ELEMENT_CAP_ENV)
    if env:
        return int(env)
    return DEFAULT_ELEMENT_CAP


def _config_echo(args, **extra) -> dict:
    cfg = {
        "group": args.group,
        "seed": args.seed,
        "element_cap": _element_cap(args),
        "threads": args.threads,
    }
    cfg.update(extra)
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _csv_text(config: dict, rows: list[list[str]]) -> str:
    header = "# " + " ".join(f"{k}={v}" for k, v in sorted(config.items()))
    body = "\n".join(",".join(row) for row in rows)
    return header + "\n" + body + "\n"


def _json_text(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# commands --------------------------------------------------------------------


def cmd_enumerate(args) -> int:
    group = _load_group(args.group)
    depths = _parse_depths(args.depth)
    cap = _element_cap(args)
    config = _config_echo(args, command="enumerate", depths=args.depth, rep=args.rep)
    rows = [["format", "group", "k", "order", "representation"]]
    started = time.perf_counter()
    for k in depths:
        if isinstance(group, AbstractGroupRef):
            order = group.quotient(k, cap).order
            rows.append(["arbor.enumerate.v1", args.group, str(k), str(order), "abstract"])
            continue
        orders: dict[str, int] = {}
        if args.rep in ("enum", "both"):
            orders["enumerated"] = enumerate_quotient(group, k, cap).order
        if args.rep in ("chain", "both"):
            orders["stab-chain"] = build_stab_chain(group, k, args.seed).order
        if args.rep == "both" and orders["enumerated"] != orders["stab-chain"]:
            raise InvariantViolation(
                f"representations disagree at depth {k}: {orders}"
            )
        for rep, order in orders.items():
            rows.append(["arbor.enumerate.v1", args.group, str(k), str(order), rep])
    elapsed = time.perf_counter() - started
    print(f"enumerate: {len(depths)} depth(s) in {elapsed:.3f}s", file=sys.stderr)
    _emit(_csv_text(config, rows), args.out)
    return EXIT_OK


def cmd_density(args) -> int:
    group = _load_group(args.group)
    depths = _parse_depths(args.depth)
    cap = _element_cap(args)
    if args.order_cap is not None and args.order_cap < 1:
        raise UsageError("--order-cap must be >= 1")
    if args.r is not None and args.r < 1:
        raise UsageError("--r must be >= 1")

    records: list[DensityRecord]
    if isinstance(group, AbstractGroupRef):
        if args.order_cap is None:
            raise UsageError("abstract groups support only --order-cap censuses")
        records = []
        previous = None
        for k in depths:
            q = group.quotient(k, cap)
            count = q.count_order_at_most(args.order_cap)
            ratio = Fraction(count, q.order)
            if previous is not None and ratio > previous:
                raise InvariantViolation(f"capped census increased at depth {k}")
            previous = ratio
            records.append(DensityRecord(args.order_cap, 0, k, count, q.order, ratio))
        mode = {"order_cap": args.order_cap}
    elif args.order_cap is not None:
        records = []
        previous = None
        for k in depths:
            q = enumerate_quotient(group, k, cap)
            count = capped_census(q, args.order_cap)
            ratio = Fraction(count, q.order)
            if previous is not None and ratio > previous:
                raise InvariantViolation(f"capped census increased at depth {k}")
            previous = ratio
            records.append(DensityRecord(args.order_cap, 0, k, count, q.order, ratio))
        mode = {"order_cap": args.order_cap}
    else:
        if args.r is None or args.n is None:
            raise UsageError("density needs --r and --n (or --order-cap)")
        if args.n < 1:
            raise UsageError("--n must be >= 1")
        records = density_curve(group, args.r, args.n, depths, cap)
        mode = {"r": args.r, "n": args.n}

    config = _config_echo(args, command="density", depths=args.depth, **mode)
    if args.format == "json":
        _emit(
            _json_text(
                {
                    "format": DENSITY_CSV_FORMAT,
                    "config": config,
                    "records": [record_to_dict(r) for r in records],
                }
            ),
            args.out,
        )
    else:
        _emit(_csv_text(config, density_rows(records)), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    group = _load_group(args.group)
    if isinstance(group, AbstractGroupRef):
        raise UnsupportedError("bounds apply to tree groups only")
    if args.r < 1 or args.n < 1:
        raise UsageError("--r and --n must be >= 1")
    depths = _parse_depths(args.depth)
    cap = _element_cap(args)
    ledgers = []
    for k in depths:
        if args.n > k:
            raise UsageError(f"--n {args.n} exceeds depth {k}")
        ledgers.append(
            ledger_to_dict(bound_ledger(group, args.r, args.n, k, args.rist_source, cap))
        )
    config = _config_echo(
        args, command="bounds", depths=args.depth, r=args.r, n=args.n,
        rist_source=args.rist_source,
    )
    _emit(_json_text({"format": "arbor.bounds.v1", "config": config, "ledgers": ledgers}), args.out)
    return EXIT_OK


def cmd_rist(args) -> int:
    group = _load_group(args.group)
    if isinstance(group, AbstractGroupRef):
        raise UnsupportedError("rigid stabilizers apply to tree groups only")
    depths = _parse_depths(args.depth)
    if len(depths) != 1:
        raise UsageError("rist takes a single --depth")
    k = depths[0]
    n = args.level
    if not 1 <= n < k:
        raise UsageError(f"--level must be in 1..{k - 1}")
    cap = _element_cap(args)
    q = enumerate_quotient(group, k, cap)
    vertices = q.shape.vertices_at_level(n)
    factors = []
    for v in vertices:
        entry = {
            "vertex": format_vertex(v),
            "finite_quotient_order": rigid_stabilizer(q, v).order,
        }
        try:
            entry["metadata_order"] = profinite_rist_projection(group, v, k).order
        except UnsupportedError:
            entry["metadata_order"] = None
        factors.append(entry)
    rist_level = rigid_level_stabilizer(q, n)
    report = {
        "format": "arbor.rist.v1",
        "config": _config_echo(args, command="rist", depth=k, level=n),
        "group_order": q.order,
        "level": n,
        "factors": factors,
        "rist_level_order": rist_level.order,
        "rist_level_index": index(q, rist_level),
        "level_transitive": is_level_transitive(q),
    }
    try:
        meta = metadata_rist_level(group, n, k)
        report["metadata_rist_level_order"] = meta.order
        report["metadata_rist_level_index"] = index(q, meta)
    except UnsupportedError:
        report["metadata_rist_level_order"] = None
        report["metadata_rist_level_index"] = None
    _emit(_json_text(report), args.out)
    return EXIT_OK


def cmd_orbits(args) -> int:
    group = _load_group(args.group)
    if isinstance(group, AbstractGroupRef):
        raise UnsupportedError("orbits apply to tree groups only")
    depths = _parse_depths(args.depth)
    if len(depths) != 1:
        raise UsageError("orbits takes a single --depth")
    k = depths[0]
    cap = _element_cap(args)
    q = enumerate_quotient(group, k, cap)
    levels = [args.level] if args.level is not None else list(range(1, k + 1))
    rows = [["format", "group", "k", "level", "orbit_count", "sizes", "transitive"]]
    for n in levels:
        parts = orbits(q, n)
        sizes = ";".join(str(len(p)) for p in parts)
        rows.append(
            [
                "arbor.orbits.v1",
                args.group,
                str(k),
                str(n),
                str(len(parts)),
                sizes,
                str(len(parts) == 1).lower(),
            ]
        )
    config = _config_echo(args, command="orbits", depth=k)
    _emit(_csv_text(config, rows), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    group = _load_group(args.group)
    if isinstance(group, AbstractGroupRef):
        raise UnsupportedError("sampling applies to tree groups only")
    depths = _parse_depths(args.depth)
    if len(depths) != 1:
        raise UsageError("sample takes a single --depth")
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    if args.cap < 1:
        raise UsageError("--cap must be >= 1")
    k = depths[0]
    estimate = estimate_torsion_density(group, k, args.cap, args.count, args.seed)
    report = {
        "format": "arbor.sample.v1",
        "config": _config_echo(
            args, command="sample", depth=k, order_cap=args.cap, count=args.count
        ),
        "depth": estimate.depth,
        "order_cap": estimate.order_cap,
        "draws": estimate.draws,
        "hits": estimate.hits,
        "estimate": estimate.estimate,
        "ci_low": estimate.ci_low,
        "ci_high": estimate.ci_high,
        "seed": estimate.seed,
    }
    _emit(_json_text(report), args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    group = _load_group(args.group)
    if isinstance(group, AbstractGroupRef):
        raise UnsupportedError("the abstract semidirect entry has no .ssg form")
    _emit(print_group(group), args.out)
    return EXIT_OK


# wiring -----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arbor",
        description="finite-quotient laboratory for groups acting on rooted trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, depth_required: bool = True):
        p.add_argument("group", help="catalog name or path to a .ssg file")
        p.add_argument("--depth", required=depth_required, help="depth K or range A..B")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--element-cap", type=int, default=None,
                       help=f"enumeration cap (default {DEFAULT_ELEMENT_CAP}, env {ELEMENT_CAP_ENV})")
        p.add_argument("--threads", type=int, default=1,
                       help="upper bound on internal parallelism (current engine is serial)")
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("enumerate", help="quotient orders per depth")
    common(p)
    p.add_argument("--rep", choices=("enum", "chain", "both"), default="enum")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("density", help="torsion census curve")
    common(p)
    p.add_argument("--r", type=int, default=None, help="element order for the census")
    p.add_argument("--n", type=int, default=None, help="truncation level for the census")
    p.add_argument("--order-cap", type=int, default=None,
                   help="capped census #{o(h) <= cap} instead of the (r, n) census")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("bounds", help="counting-bound ledger at (r, n, k)")
    common(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rist-source", choices=("auto", "finite", "metadata"), default="auto")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("rist", help="rigid stabilizer orders and indices")
    common(p)
    p.add_argument("--level", type=int, required=True)
    p.set_defaults(func=cmd_rist)

    p = sub.add_parser("orbits", help="orbit table of the generator action")
    common(p)
    p.add_argument("--level", type=int, default=None)
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("sample", help="Monte-Carlo torsion estimate")
    common(p)
    p.add_argument("--cap", type=int, required=True, help="order cap for the estimate")
    p.add_argument("--count", type=int, required=True, help="number of draws")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("export", help="write a catalog group as .ssg text")
    common(p, depth_required=False)
    p.set_defaults(func=cmd_export)

    return parser


def _error_json(kind: str, exc: Exception) -> str:
    payload = {"error": kind, "message": str(exc)}
    if isinstance(exc, CapacityError):
        payload["reached"] = exc.reached
        payload["cap"] = exc.cap
    return _json_text(payload)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"arbor: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        sys.stdout.write(_error_json("capacity", exc))
        return EXIT_CAPACITY
    except InvariantViolation as exc:
        sys.stdout.write(_error_json("invariant-violation", exc))
        return EXIT_INVARIANT
    except UnsupportedError as exc:
        sys.stdout.write(_error_json("unsupported", exc))
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
