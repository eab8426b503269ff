"""``dlab`` command line.

Exit codes: 0 computed and affirmative, 1 computed and negative, 2 input
error, 3 cap exceeded, 4 internal inconsistency (a bug).  Reports go to stdout as JSON (default), CSV or DOT.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
import time
from fractions import Fraction

from . import config, core, hyperspace, joinings, measure, symbolic
from .errors import CapExceeded, DlabError, InputError, UnknownSweep

SCHEMA = "dlab-1"
SWEEPS = ("gcd", "quasifactor-census", "sft-cycles", "measure-a2")


class Report:
    """What a command produced: a JSON body plus optional CSV rows / DOT text."""

    def __init__(self, body: dict, verdict: bool | None = None, rows: list[dict] | None = None, dot: str | None = None):
        self.body = body
        self.verdict = verdict
        self.rows = rows
        self.dot = dot

    @property
    def exit_code(self) -> int:
        return 1 if self.verdict is False else 0


def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _load(path: str, parse):
    desc = load_json(path)
    if not isinstance(desc, dict):
        raise InputError(f"{path}: descriptor must be a JSON object")
    try:
        return parse(desc)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: invalid descriptor: {exc}") from exc


def load_system(path: str) -> core.FiniteSystem:
    return _load(path, core.from_descriptor)


def load_sft(path: str) -> symbolic.SFT:
    return _load(path, symbolic.from_descriptor)


def load_mpt(path: str) -> measure.FiniteMPT:
    return _load(path, measure.from_descriptor)


def parse_descriptor(desc: dict):
    """Any system descriptor, dispatched on its type tag."""
    kind = desc.get("type")
    if kind == "finite":
        return core.from_descriptor(desc)
    if kind == "sft":
        return symbolic.from_descriptor(desc)
    if kind == "mpt":
        return measure.from_descriptor(desc)
    raise InputError(f"unknown descriptor type {kind!r}")


def _witness_payload(path: str) -> dict:
    data = load_json(path)
    if isinstance(data, dict) and isinstance(data.get("witness"), dict):
        data = data["witness"]
    if not isinstance(data, dict):
        raise InputError(f"{path}: no witness object found")
    return data


# -- commands -----------------------------------------------------------------


def cmd_decompose(args) -> Report:
    x = load_system(args.system)
    dec = core.minimal_decomposition(x)
    body = dec.to_json()
    rows = [{"cycle": i, "length": len(o), "states": " ".join(map(str, sorted(o)))} for i, o in enumerate(dec.orbits)]
    return Report(body, rows=rows)


def coverage_dot(x, y) -> str:
    prod = core.product(x, y)
    lines = ["digraph coverage {"]
    for i, c in enumerate(core.minimal_decomposition(prod).cycles):
        px, py = core.project(c, x.n, y.n)
        lines.append(f'  "c{i}" [shape=box,label="cycle {i} (len {len(c)})"];')
        lines.extend(f'  "c{i}" -> "x{a}";' for a in px)
        lines.extend(f'  "c{i}" -> "y{b}";' for b in py)
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_disjoint(args) -> Report:
    x, y = load_system(args.a), load_system(args.b)
    if args.verify:
        payload = _witness_payload(args.verify)
        try:
            prod_n = x.n * y.n
            witness = joinings.JoiningWitness(
                frozenset(int(i) for i in payload["cycle_indices"]),
                core.StateSet.of((int(s) for s in payload["states"]), prod_n),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.verify}: malformed witness: {exc}") from exc
        if not joinings.validate_witness(x, y, witness):
            raise InputError(f"{args.verify}: witness does not validate")
        return Report({"disjoint": False, "verified": True, "witness": witness.to_json()}, verdict=False)

    res = joinings.is_disjoint(x, y)
    body: dict = {"disjoint": res.disjoint}
    if args.witness and res.witness is not None:
        body["witness"] = res.witness.to_json()
    if args.oracle:
        found = joinings.enumerate_joinings(x, y)
        body["oracle_joinings"] = len(found)
        body["oracle_agrees"] = (len(found) == 1) == res.disjoint
        if not body["oracle_agrees"]:
            raise DlabError("decision procedure and joining oracle disagree")
    rows = [{"disjoint": res.disjoint}]
    dot = coverage_dot(x, y) if args.out == "dot" else None
    return Report(body, verdict=res.disjoint, rows=rows, dot=dot)


def cmd_mperp(args) -> Report:
    x = load_system(args.system)
    cert = joinings.in_Mperp_finite(x)
    body = {"in_Mperp": cert.verdict, "certificate": cert.to_json()}
    if core.is_transitive(x):
        body["transitive_characterization"] = joinings.check_transitive_characterization(x).to_json()
    return Report(body, verdict=cert.verdict, rows=[{"in_Mperp": cert.verdict}])


def cmd_ord(args) -> Report:
    x = load_system(args.system)
    try:
        states = [int(s) for s in args.set.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"--set must be comma-separated integers: {args.set!r}") from exc
    value = hyperspace.ord(x, core.StateSet.of(states, x.n))
    return Report({"ord": value.to_json()}, rows=[{"ord": str(value)}])


def cmd_quasifactors(args) -> Report:
    x = load_system(args.system)
    if args.out == "dot":
        return Report({}, dot=hyperspace.induced_dot(x, args.max_size))
    qs = hyperspace.quasifactors(x)
    body: dict = {"count": len(qs), "nontrivial": sum(not q.trivial for q in qs)}
    if args.orders:
        body["quasifactors"] = [q.to_json() for q in qs]
    if args.family:
        fam = hyperspace.max_disjoint_family(x)
        body["max_disjoint_family"] = {"size": len(fam), "lengths": [q.length for q in fam]}
    census = hyperspace.quasifactor_census(x)
    body["census"] = [{"length": l, "order": o.to_json(), "count": c} for l, o, c in census]
    rows = [{"length": l, "order": str(o), "count": c} for l, o, c in census]
    return Report(body, rows=rows)


def cmd_sft_mperp(args) -> Report:
    x = load_sft(args.sft)
    v = symbolic.sft_in_Mperp(x, args.depth)
    verdict = {symbolic.Verdict.YES: True, symbolic.Verdict.NO: False}.get(v.verdict)
    return Report(v.to_json(), verdict=verdict, rows=[{"verdict": v.verdict.value, "depth": v.depth}])


def cmd_sft_cycle(args) -> Report:
    x = load_sft(args.sft)
    if args.verify:
        payload = _witness_payload(args.verify)
        try:
            witness = symbolic.CycleJoiningWitness(int(payload["p"]), frozenset(int(s) for s in payload["phase_symbols"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.verify}: malformed witness: {exc}") from exc
        if witness.p != args.p or not symbolic.validate_cycle_witness(x, witness):
            raise InputError(f"{args.verify}: witness does not validate")
        return Report({"p": args.p, "disjoint": False, "verified": True, "witness": witness.to_json()}, verdict=False)
    res = symbolic.sft_disjoint_from_cycle(x, args.p)
    body: dict = {"p": args.p, "disjoint": res.disjoint}
    if args.witness and res.witness is not None:
        body["witness"] = res.witness.to_json()
    return Report(body, verdict=res.disjoint, rows=[{"p": args.p, "disjoint": res.disjoint}])


def cmd_sft_periodic(args) -> Report:
    x = load_sft(args.sft)
    orbits = symbolic.sft_periodic_points(x, args.up_to)
    body = {"count": len(orbits), "orbits": [list(o.word) for o in orbits]}
    rows = [{"period": o.period, "word": "".join(map(str, o.word))} for o in orbits]
    return Report(body, rows=rows)


def _weights_json(weights) -> list[str]:
    return [str(w) for w in weights]


def cmd_measure_disjoint(args) -> Report:
    m1, m2 = load_mpt(args.a), load_mpt(args.b)
    if args.verify:
        payload = _witness_payload(args.verify)
        try:
            weights = [Fraction(w) for w in payload["weights"]]
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"{args.verify}: malformed witness: {exc}") from exc
        if not measure.validate_measure_witness(m1, m2, weights):
            raise InputError(f"{args.verify}: witness does not validate")
        return Report({"disjoint": False, "verified": True, "witness": {"weights": _weights_json(weights)}}, verdict=False)
    res = measure.is_measure_disjoint(m1, m2)
    poly = res.polytope
    body: dict = {
        "disjoint": res.disjoint,
        "dimension": poly.dimension,
        "product_weights": _weights_json(poly.product_weights),
    }
    if res.witness is not None:
        body["witness"] = {"weights": _weights_json(res.witness)}
    if args.vertices:
        body["vertices"] = [_weights_json(v) for v in poly.vertices()]
    return Report(body, verdict=res.disjoint, rows=[{"disjoint": res.disjoint, "dimension": poly.dimension}])


def cmd_measure_a2(args) -> Report:
    m = load_mpt(args.mpt)
    rep = measure.check_thmA2_finite(m)
    body = {
        "disjoint_from_ergodic": rep.disjoint_from_ergodic,
        "disjoint_from_own_components": rep.disjoint_from_own_components,
        "consistent": rep.consistent,
    }
    return Report(body, verdict=rep.disjoint_from_ergodic, rows=[body])


# -- sweeps -------------------------------------------------------------------


def sweep_gcd(max_n: int) -> list[dict]:
    rows = []
    for m in range(1, max_n + 1):
        for n in range(1, max_n + 1):
            res = joinings.is_disjoint(core.cycle_system(m), core.cycle_system(n))
            rows.append({"m": m, "n": n, "disjoint": res.disjoint})
    return rows


def sweep_quasifactor_census(n: int) -> list[dict]:
    rows = []
    for i, q in enumerate(hyperspace.quasifactors(core.cycle_system(n))):
        rows.append(
            {
                "index": i,
                "representative": " ".join(map(str, q.elements[0])),
                "length": q.length,
                "order": str(q.order),
                "trivial": q.trivial,
            }
        )
    return rows


def sweep_measure_a2(trials: int, seed: int, max_n: int) -> list[dict]:
    rows = []
    for t in range(trials):
        rng = random.Random(seed * 1_000_003 + t)
        m = measure.random_mpt(rng, rng.randint(1, max_n))
        rep = measure.check_thmA2_finite(m)
        rows.append(
            {
                "trial": t,
                "n": m.n,
                "perm": " ".join(map(str, m.sys.perm)),
                "lhs": rep.disjoint_from_ergodic,
                "rhs": rep.disjoint_from_own_components,
                "status": "consistent" if rep.consistent else "inconsistent",
            }
        )
    return rows


def cmd_sweep(args) -> Report:
    name = args.name
    body: dict = {"sweep": name}
    if name == "gcd":
        rows = sweep_gcd(args.max or 8)
        verdict = all(r["disjoint"] == (math.gcd(r["m"], r["n"]) == 1) for r in rows)
    elif name == "quasifactor-census":
        rows = sweep_quasifactor_census(args.n or 6)
        verdict = None
    elif name == "sft-cycles":
        if not args.sft:
            raise InputError("sft-cycles sweep needs --sft FILE")
        rows = symbolic.cycle_sweep(load_sft(args.sft), args.max or 12)
        verdict = all(r["disjoint"] == r["gcd_criterion"] for r in rows)
    elif name == "measure-a2":
        seed = 0 if args.seed is None else args.seed
        body["seed"] = seed
        rows = sweep_measure_a2(args.trials or 200, seed, args.n or 12)
        verdict = all(r["status"] == "consistent" for r in rows)
    else:
        raise UnknownSweep(f"unknown sweep {name!r}; choose from {', '.join(SWEEPS)}")
    body["rows"] = rows
    return Report(body, verdict=verdict, rows=rows)


# -- plumbing -----------------------------------------------------------------


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: (str(v).lower() if isinstance(v, bool) else v) for k, v in r.items()})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", choices=("json", "csv", "dot"), default=None, help="report format (default json; csv for sweeps)")
    common.add_argument("--dot", action="store_true", help="shorthand for --out dot")
    common.add_argument(
        "--max-states",
        type=int,
        default=None,
        help=f"state cap (default {config.Caps.max_states}, or $DLAB_MAX_STATES); "
        f"for quasifactors, the hyperspace cap (default {config.Caps.max_hyperspace_states})",
    )
    common.add_argument("--seed", type=int, default=None, help="seed for randomised sweeps (echoed in the report)")
    common.add_argument("--timing", action="store_true", help="add wall-clock timing (breaks byte-identical reports)")

    parser = argparse.ArgumentParser(prog="dlab", description="Exact finite laboratory for disjointness from minimal systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="cycle decomposition of a finite system")
    p.add_argument("system")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("disjoint", parents=[common], help="decide topological disjointness")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--witness", action="store_true", help="include a proper joining when not disjoint")
    p.add_argument("--oracle", action="store_true", help="cross-check by enumerating all joinings")
    p.add_argument("--verify", metavar="WITNESS", help="replay a witness (report or witness JSON)")
    p.set_defaults(func=cmd_disjoint)

    p = sub.add_parser("mperp", parents=[common], help="membership in M-perp for a finite system")
    p.add_argument("system")
    p.set_defaults(func=cmd_mperp)

    p = sub.add_parser("ord", parents=[common], help="order of a subset")
    p.add_argument("system")
    p.add_argument("--set", required=True, help="comma-separated states, e.g. 0,2,4")
    p.set_defaults(func=cmd_ord)

    p = sub.add_parser("quasifactors", parents=[common], help="quasifactors of a minimal system")
    p.add_argument("system")
    p.add_argument("--orders", action="store_true", help="list every quasifactor with its order")
    p.add_argument("--family", action="store_true", help="largest pairwise disjoint non-trivial family")
    p.add_argument("--max-size", type=int, default=1, help="subset size bound for --dot")
    p.set_defaults(func=cmd_quasifactors)

    sft = sub.add_parser("sft", help="subshifts of finite type").add_subparsers(dest="sft_command", required=True)
    p = sft.add_parser("mperp", parents=[common])
    p.add_argument("sft")
    p.add_argument("--depth", type=int, default=8)
    p.set_defaults(func=cmd_sft_mperp)
    p = sft.add_parser("cycle-disjoint", parents=[common])
    p.add_argument("sft")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--witness", action="store_true")
    p.add_argument("--verify", metavar="WITNESS")
    p.set_defaults(func=cmd_sft_cycle)
    p = sft.add_parser("periodic", parents=[common])
    p.add_argument("sft")
    p.add_argument("--up-to", type=int, default=6)
    p.set_defaults(func=cmd_sft_periodic)

    meas = sub.add_parser("measure", help="finite measure-preserving systems").add_subparsers(dest="measure_command", required=True)
    p = meas.add_parser("disjoint", parents=[common])
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--vertices", action="store_true")
    p.add_argument("--verify", metavar="WITNESS")
    p.set_defaults(func=cmd_measure_disjoint)
    p = meas.add_parser("a2", parents=[common])
    p.add_argument("mpt")
    p.set_defaults(func=cmd_measure_a2)

    p = sub.add_parser("sweep", parents=[common], help=f"batch sweeps: {', '.join(SWEEPS)}")
    p.add_argument("name")
    p.add_argument("--max", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--sft", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def render(report: Report, args, argv: list[str], elapsed: float | None) -> str:
    out = args.out
    if out == "csv":
        rows = report.rows
        if rows is None:
            rows = [{k: v for k, v in report.body.items() if isinstance(v, (bool, int, str))}]
        return _csv(rows)
    if out == "dot":
        if report.dot is None:
            raise InputError(f"{args.command} has no DOT output")
        return report.dot
    body = {"schema": SCHEMA, "command": argv, **report.body}
    if args.seed is not None:
        body.setdefault("seed", args.seed)
    body["caps"] = {"max_states": config.CAPS.max_states, "max_hyperspace_states": config.CAPS.max_hyperspace_states}
    if elapsed is not None:
        body["elapsed_seconds"] = round(elapsed, 6)
    return json.dumps(body, indent=2) + "\n"


def run(argv: list[str] | None = None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.dot:
        args.out = "dot"
    if args.out is None:
        args.out = "csv" if args.command == "sweep" else "json"
    overrides = {}
    if args.max_states is not None:
        key = "max_hyperspace_states" if args.command == "quasifactors" else "max_states"
        overrides[key] = args.max_states
    with config.override(**overrides):
        try:
            start = time.perf_counter()
            report = args.func(args)
            elapsed = time.perf_counter() - start if args.timing else None
            stdout.write(render(report, args, argv, elapsed))
            return report.exit_code
        except CapExceeded as exc:
            print(f"dlab: cap exceeded: {exc}", file=sys.stderr)
            return 3
        except InputError as exc:
            print(f"dlab: input error: {exc}", file=sys.stderr)
            return 2
        except DlabError as exc:
            print(f"dlab: internal error: {exc}", file=sys.stderr)
            return 4


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
