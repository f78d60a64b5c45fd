"""Command-line surface: generate, construct, verify, bounds, decode.

Exit codes: 0 success/pass, 1 property failure or inconsistency, 2 usage or
guard violation.  Every JSON report echoes the effective configuration, the
tool version, and the pinned random generator, with a fixed key order; timing
is kept off reports so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import __version__
from . import bounds as bounds_mod
from .alteration import ConstructionTask, TargetProperty, construct
from .bitmatrix import BitVector, read_matrix, write_matrix
from .decoder import decode_ssm, simulate_outcome
from .errors import InconsistentOutcomeError, RepairLimitError, StaleWitnessError, UsageError
from .generators import PLAIN, RNG_NAME, TRIPLET, FamilySpec, enumerate_family, sample_family
from .verifiers import is_strongly_t_separable_naive, verify_property

TOOL = "ssmforge"

FAMILY_TOKENS = {"plain": PLAIN, "triplet-parity": TRIPLET}
T_PROPERTIES = ("disjunct", "sep", "bar-sep", "ssm", "cancellative")
K_PROPERTIES = ("locally-thin", "locally-2-thin")
PROPERTIES = (
    "disjunct",
    "sep",
    "bar-sep",
    "ssm",
    "locally-thin",
    "locally-2-thin",
    "cancellative",
)
TARGET_CHOICES = ("ssm", "disjunct", "locally-thin", "locally-2-thin", "cancellative")


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def _parse_q(text: str) -> float:
    try:
        q = float(text)
    except (TypeError, ValueError):
        raise UsageError(f"invalid probability {text!r}") from None
    if not 0.0 < q <= 1.0:
        raise UsageError("q must lie in (0, 1]")
    return q


def _family_spec(args) -> FamilySpec:
    variant = FAMILY_TOKENS[args.family]
    if variant == PLAIN and args.b is None:
        raise UsageError("--family plain requires --b")
    return FamilySpec(variant=variant, n=args.n, b=args.b)


def _property_params(prop: str, args) -> dict:
    if prop in T_PROPERTIES:
        if args.t is None:
            raise UsageError(f"property {prop} requires --t")
        if args.k is not None:
            raise UsageError(f"property {prop} takes --t, not --k")
        return {"t": args.t}
    if args.k is None:
        raise UsageError(f"property {prop} requires --k")
    if args.t is not None:
        raise UsageError(f"property {prop} takes --k, not --t")
    if prop == "locally-thin":
        return {"k": args.k, "points": args.points}
    return {"k": args.k}


def _target(args) -> TargetProperty:
    name = args.target
    if name in ("ssm", "disjunct", "cancellative"):
        if args.t is None:
            raise UsageError(f"target {name} requires --t")
        return TargetProperty(name=name, t=args.t)
    if args.k is None:
        raise UsageError(f"target {name} requires --k")
    if name == "locally-thin":
        return TargetProperty(name=name, k=args.k, points=args.points)
    return TargetProperty(name=name, k=args.k)


def _config_echo(args) -> dict:
    skip = {"func"}
    out = {}
    for key in sorted(vars(args)):
        if key in skip:
            continue
        out[key] = getattr(args, key)
    return out


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _report_doc(args, body: dict) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "rng": RNG_NAME,
        "config": _config_echo(args),
        **body,
    }


def _parse_ids(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise UsageError(f"invalid column index list {text!r}") from None


def _set_str(ids) -> str:
    return "{" + ",".join(str(i) for i in sorted(ids)) + "}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    spec = _family_spec(args)
    if args.all == (args.q is not None):
        raise UsageError("choose exactly one of --all or --q")
    if args.all:
        m = enumerate_family(spec)
    else:
        m = sample_family(spec, _parse_q(args.q), args.seed)
    write_matrix(m, args.out)
    print(f"wrote {m.num_columns} columns x {m.n} rows to {args.out}")
    return 0


def cmd_construct(args) -> int:
    spec = _family_spec(args)
    target = _target(args)
    _parse_q(args.q)
    task = ConstructionTask(
        target=target,
        family=spec,
        q=args.q,
        seed=args.seed,
        max_repair_rounds=args.max_repair_rounds,
        max_columns=args.max_columns,
    )
    try:
        m, report = construct(task)
    except RepairLimitError as err:
        if err.report is not None:
            _write_json(args.report, _report_doc(args, err.report.to_json_dict()))
        print(f"{TOOL}: {err}", file=sys.stderr)
        return 1
    write_matrix(m, args.out)
    _write_json(args.report, _report_doc(args, report.to_json_dict()))
    print(
        f"constructed {report.final_columns} columns from {report.initial_columns} "
        f"({report.deletions} deletions), rate {report.rate:.6f}"
    )
    return 0


def cmd_verify(args) -> int:
    m = read_matrix(args.input)
    params = _property_params(args.property, args)
    if args.naive_oracle:
        if args.property != "ssm":
            raise UsageError("--naive-oracle applies to the ssm property only")
        verdict = is_strongly_t_separable_naive(m, params["t"])
    else:
        verdict = verify_property(m, args.property, **params)
    if args.json:
        _write_json(
            args.json, _report_doc(args, verdict.to_json_dict(include_timing=False))
        )
    if verdict.passed:
        print(
            f"pass {args.property} {json.dumps(params, sort_keys=True)} "
            f"columns={m.num_columns} subsets_checked={verdict.subsets_checked}"
        )
        return 0
    print(
        f"fail {args.property} witness={json.dumps(verdict.witness, sort_keys=True)}"
    )
    return 1


def _bound_row_doc(r: bounds_mod.RateBound) -> dict:
    return {
        "kind": r.kind,
        "b": r.b,
        "p": r.p,
        "feasible": r.feasible,
        "rate": r.rate,
        "margin": r.margin,
        "published_bound": r.published_bound,
        "heuristic_tail": r.heuristic_tail,
    }


def cmd_bounds(args) -> int:
    if (args.table is None) == (args.optimize is None):
        raise UsageError("choose exactly one of --table or --optimize")
    if args.table is not None:
        if args.table != "paper":
            raise UsageError(f"unknown table {args.table!r}; the built-in table is 'paper'")
        rows = bounds_mod.published_table()
        lines = ["kind,b,p,feasible,rate,published_bound,margin"]
        for r in rows:
            lines.append(
                f"{r.kind},{r.b},{r.p:.10g},{str(r.feasible).lower()},"
                f"{r.rate:.7f},{r.published_bound:.4f},{r.margin:.6g}"
            )
    else:
        if args.b_min is None or args.b_max is None:
            raise UsageError("--optimize requires --b-min and --b-max")
        rows = bounds_mod.optimize_over_b(
            args.optimize, args.b_min, args.b_max, args.grid_resolution
        )
        best = max(rows, key=lambda r: r.rate)
        lines = ["kind,b,p,feasible,rate,best"]
        for r in rows:
            lines.append(
                f"{r.kind},{r.b},{r.p:.10g},{str(r.feasible).lower()},"
                f"{r.rate:.7f},{str(r is best).lower()}"
            )
    print("\n".join(lines))
    if args.json:
        _write_json(
            args.json, _report_doc(args, {"rows": [_bound_row_doc(r) for r in rows]})
        )
    return 0


def cmd_decode(args) -> int:
    m = read_matrix(args.matrix)
    if (args.defectives is None) == (args.outcome is None):
        raise UsageError("choose exactly one of --defectives or --outcome")
    if args.defectives is not None:
        defectives = _parse_ids(args.defectives)
        y = simulate_outcome(m, defectives)
        decoded = decode_ssm(m, y, args.t)
        if sorted(decoded) != sorted(defectives):
            print(
                f"{TOOL}: roundtrip mismatch: decoded {_set_str(decoded)} "
                f"from defectives {_set_str(defectives)}",
                file=sys.stderr,
            )
            return 1
    else:
        y = BitVector.from01(args.outcome)
        decoded = decode_ssm(m, y, args.t)
    print(_set_str(decoded))
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat `key = value` file; explicit flags win")
    p.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker-count hint; output is identical for every value",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL,
        description="build, repair, verify, and decode group-testing matrices",
    )
    parser.add_argument(
        "--version", action="version", version=f"{TOOL} {__version__}"
    )
    sub = parser.add_subparsers(dest="cmd", required=True, metavar="COMMAND")

    g = sub.add_parser("generate", help="write a family matrix file")
    _add_common(g)
    g.add_argument("--family", required=True, choices=sorted(FAMILY_TOKENS))
    g.add_argument("--n", required=True, type=int, help="number of rows")
    g.add_argument("--b", type=int, help="block size (plain families)")
    g.add_argument("--all", action="store_true", help="enumerate every member")
    g.add_argument("--q", help="inclusion probability for sampling")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("construct", help="sample a family and repair to a target property")
    _add_common(c)
    c.add_argument("--target", required=True, choices=TARGET_CHOICES)
    c.add_argument("--t", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--points", type=int, default=1)
    c.add_argument("--family", required=True, choices=sorted(FAMILY_TOKENS))
    c.add_argument("--n", required=True, type=int)
    c.add_argument("--b", type=int)
    c.add_argument("--q", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.add_argument("--report", required=True)
    c.add_argument("--max-repair-rounds", type=int, default=None)
    c.add_argument("--max-columns", type=int, default=5000)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="check a property and print the first witness on failure")
    _add_common(v)
    v.add_argument("--input", required=True)
    v.add_argument("--property", required=True, choices=PROPERTIES)
    v.add_argument("--t", type=int)
    v.add_argument("--k", type=int)
    v.add_argument("--points", type=int, default=1)
    v.add_argument(
        "--naive-oracle",
        action="store_true",
        help="exhaustive subset evaluation (ssm only, at most 15 columns)",
    )
    v.add_argument("--json", help="write the verdict as JSON to this path")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bounds", help="rate-bound tables and parameter optimization")
    _add_common(b)
    b.add_argument("--table", help="named table to print (built-in: paper)")
    b.add_argument("--optimize", help="bound kind to optimize over block sizes")
    b.add_argument("--b-min", type=int)
    b.add_argument("--b-max", type=int)
    b.add_argument("--grid-resolution", type=int, default=100_000)
    b.add_argument("--json", help="write rows as JSON to this path")
    b.set_defaults(func=cmd_bounds)

    d = sub.add_parser("decode", help="identify defectives from an outcome")
    _add_common(d)
    d.add_argument("--matrix", required=True)
    d.add_argument("--t", required=True, type=int)
    d.add_argument("--defectives", help="comma-separated column indices to simulate")
    d.add_argument("--outcome", help="outcome as an n-character bit string")
    d.set_defaults(func=cmd_decode)

    return parser


def _config_tokens(path: str) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise UsageError(f"cannot read config file: {err}") from None
    tokens: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"config line {lineno}: expected `key = value`")
        key, _, value = stripped.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if not key:
            raise UsageError(f"config line {lineno}: empty key")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                tokens.append(f"--{key}")
        else:
            tokens.extend((f"--{key}", value))
    return tokens


_COMMANDS = ("generate", "construct", "verify", "bounds", "decode")


def _extract_config_path(raw: list) -> Optional[str]:
    for i, tok in enumerate(raw):
        if tok == "--config" and i + 1 < len(raw):
            return raw[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def main(argv: Optional[list] = None) -> int:
    raw = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        if raw and raw[0] in _COMMANDS:
            cfg = _extract_config_path(raw)
            if cfg is not None:
                # config entries become argv tokens right after the subcommand,
                # so explicit flags (parsed later) override them
                raw = [raw[0]] + _config_tokens(cfg) + raw[1:]
        try:
            args = parser.parse_args(raw)
        except SystemExit as exc:  # argparse errors; keep main() returning int
            return int(exc.code or 0)
        return args.func(args)
    except UsageError as err:
        print(f"{TOOL}: error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"{TOOL}: error: {err}", file=sys.stderr)
        return 2
    except (InconsistentOutcomeError, StaleWitnessError) as err:
        print(f"{TOOL}: {err}", file=sys.stderr)
        return 1
    except RepairLimitError as err:
        print(f"{TOOL}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
