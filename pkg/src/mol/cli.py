"""Command-line front end.  Every command builds a JSON run report; the text
printed to the terminal is rendered from that report.

Exit codes: 0 ok, 1 selftest failure, 2 configuration / parse / usage error,
3 resource cap, 4 truncation exhausted, 5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from . import acceptance
from . import germs as G
from . import gv as V
from . import orbit as O
from .expr import ExpressionError
from .freegroup import Alphabet, AlphabetMismatch, WordSyntaxError, parse
from .lie import ResourceLimitError

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RESOURCE, EXIT_TRUNCATION, EXIT_INVARIANT = 0, 1, 2, 3, 4, 5
MAX_CLASS = 12


class UsageError(ValueError):
    pass


def run_report(command: str, inputs: dict, outputs: dict, started: float) -> dict:
    return {
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
        "version": __version__,
        "wall_time": round(time.perf_counter() - started, 6),
    }


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)


# -- commands: each returns (exit code, outputs, text lines) -------------------------


def cmd_depth(args) -> tuple[int, dict, list[str]]:
    if not 2 <= args.class_ <= MAX_CLASS:
        if args.class_ < 2:
            raise UsageError("--class must be >= 2")
        raise ResourceLimitError(f"--class {args.class_} exceeds the hard cap {MAX_CLASS}")
    cfg = O.load_config(args.config)
    extra = list(args.add_word or [])
    for w in extra:
        cfg = cfg.with_family(w)
    report = O.orbit_depth(cfg, args.class_)
    check = O.verify_inequalities(report)
    out = {"report": report.to_json(), "inequalities": check.to_json()}
    if args.ideal:
        out["orbit_ideal"] = O.orbit_ideal(cfg, args.class_).to_json()
    lines = [f"configuration {cfg.name}, class cutoff {report.c} ({report.qualifier})"]
    for v in report.verdicts:
        s = f"  j={v.j}: {v.status}"
        if v.witness:
            s += f"  witness (degree {v.witness_degree}) {v.witness['generator']}: {v.witness['leading_term']}"
        lines.append(s)
    lines += [f"orbit depth k: {report.k}", f"nilpotence class n: {report.n}",
              f"derived length d: {report.d}", *check.explanation]
    return EXIT_OK, out, lines


def cmd_gv(args) -> tuple[int, dict, list[str]]:
    if args.first_integrals:
        recs = [V.verify_first_integral(c) for c in V.FIRST_INTEGRAL_CASES]
        out = {"first_integrals": [r.to_json() for r in recs]}
        lines = [f"{r.case}: {'verified' if r.ok else 'FAILED'}" for r in recs]
        return (EXIT_OK if all(r.ok for r in recs) else EXIT_FAIL), out, lines
    if args.phi is None:
        raise UsageError("gv needs --phi (or --first-integrals)")
    phi = V.parse_phi(args.phi)
    try:
        seq = V.gv_sequence(phi, args.max)
    except V.GVError as exc:
        raise UsageError(str(exc)) from None
    out = seq.to_json()
    if phi.deg_F() == 2:
        out["riccati_system"] = V.riccati_system(phi)
    lines = [f"phi = {phi}"] + [f"  eta{f['k']} = {f['eta']}" for f in out["forms"]]
    lines.append(f"length {out['length']} ({out['classification']}); "
                 f"all residuals zero: {out['all_residuals_zero']}")
    return EXIT_OK, out, lines


def _load_germs(args) -> G.GermAssignment:
    if args.gens in (None, "builtin:wronskian"):
        data = G.wronskian_assignment().to_json()
    else:
        try:
            with open(args.gens) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read germ file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.gens}: invalid JSON: {exc}") from None
    if args.order is not None:
        data = {**data, "order": args.order}
    return G.GermAssignment.from_json(data)


def cmd_germ(args) -> tuple[int, dict, list[str]]:
    asgn = _load_germs(args)
    names = list(asgn.germs)
    out: dict = {"assignment": asgn.to_json()}
    lines = [f"{n} -> {g}" for n, g in asgn.germs.items()]
    verdict = G.group_dichotomy([asgn[n] for n in names], args.budget)
    out["dichotomy"] = verdict.to_json()
    out["dichotomy"]["generator_names"] = names
    if isinstance(verdict, G.Abelian):
        lines.append("abelian at truncation")
    else:
        lines.append("non-abelian; nested commutator chain:")
        for label, h in zip(verdict.labels, verdict.chain):
            lines.append(f"  {label}: level {h.level()}, leading coefficient {G._fmt_coeff(h.leading()[1])}")
    if args.word:
        w = parse(args.word, Alphabet(names))
        h = G.poincare_rep(asgn, w)
        out["word"] = {"word": args.word, "germ": h.to_json()}
        lines.append(f"P({args.word}) = {h}")
    return EXIT_OK, out, lines


def cmd_selftest(args) -> tuple[int, dict, list[str]]:
    outcomes = acceptance.run(args.filter)
    if not outcomes:
        raise UsageError(f"no criterion matches filter {args.filter!r}")
    out = {"criteria": [o.to_json() for o in outcomes], "passed": all(o.passed for o in outcomes)}
    lines = [o.line() for o in outcomes]
    failed = [o for o in outcomes if not o.passed]
    lines.append(f"{len(outcomes) - len(failed)}/{len(outcomes)} criteria passed")
    return (EXIT_FAIL if failed else EXIT_OK), out, lines


def cmd_config(args) -> tuple[int, dict, list[str]]:
    if args.action == "list":
        out = {"builtins": list(O.BUILTIN_CONFIGS)}
        return EXIT_OK, out, list(O.BUILTIN_CONFIGS)
    if not args.name:
        raise UsageError("config export needs a built-in name")
    data = O.builtin_config_json(args.name)
    O.Configuration.from_json(data, args.name)
    text = json.dumps(data, indent=2, ensure_ascii=False)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        return EXIT_OK, {"config": data, "written": args.out}, [f"wrote {args.out}"]
    return EXIT_OK, {"config": data}, [text]


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mol", description="Orbit depth, germ holonomy and Godbillon-Vey sequences.")
    p.add_argument("--version", action="version", version=f"mol {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_json(sp):
        sp.add_argument("--json", metavar="PATH", help="write the JSON run report to PATH ('-' for stdout)")

    d = sub.add_parser("depth", help="orbit depth, nilpotence class and derived length")
    d.add_argument("config_pos", nargs="?", metavar="CONFIG", help="built-in name or JSON path")
    d.add_argument("--config", help="built-in name or JSON path")
    d.add_argument("--class", dest="class_", type=int, default=5, help="lower central series cutoff c")
    d.add_argument("--add-word", action="append", metavar="WORD", help="extra orbit word (repeatable)")
    d.add_argument("--ideal", action="store_true", help="include the orbit ideal's graded basis")
    add_json(d)
    d.set_defaults(func=cmd_depth)

    g = sub.add_parser("gv", help="Godbillon-Vey sequence of dF + eps*phi dx")
    g.add_argument("--phi", help="deformation function phi(x, F)")
    g.add_argument("--max", type=int, default=None, help="number of GV equations to verify")
    g.add_argument("--first-integrals", action="store_true", help="verify the two Liouvillian first integrals")
    add_json(g)
    g.set_defaults(func=cmd_gv)

    h = sub.add_parser("germ", help="solvability dichotomy and Poincare representation")
    h.add_argument("--gens", help="germ assignment JSON (default: builtin:wronskian)")
    h.add_argument("--budget", type=int, default=3, help="length of the commutator chain")
    h.add_argument("--order", type=int, default=None, help="override the truncation order in z")
    h.add_argument("--word", help="evaluate the representation on this word")
    add_json(h)
    h.set_defaults(func=cmd_germ)

    s = sub.add_parser("selftest", help="run the acceptance checks")
    s.add_argument("--filter", help="criterion number, key fragment or tag (depth, gv, germ, lie)")
    add_json(s)
    s.set_defaults(func=cmd_selftest)

    c = sub.add_parser("config", help="list or export built-in configurations")
    c.add_argument("action", choices=["list", "export"])
    c.add_argument("name", nargs="?")
    c.add_argument("--out", help="file to write (default stdout)")
    add_json(c)
    c.set_defaults(func=cmd_config)
    return p


def _inputs(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "json") and v is not None}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "depth":
        if args.config and args.config_pos and args.config != args.config_pos:
            parser.error("give the configuration once")
        args.config = args.config or args.config_pos or None
        if not args.config:
            parser.error("depth needs a configuration (--config NAME|PATH)")
        args.config_pos = None
    started = time.perf_counter()
    errors: list[tuple[type, int]] = [
        (O.ConfigError, EXIT_INPUT),
        (WordSyntaxError, EXIT_INPUT),
        (AlphabetMismatch, EXIT_INPUT),
        (ExpressionError, EXIT_INPUT),
        (UsageError, EXIT_INPUT),
        (G.UnassignedGenerator, EXIT_INPUT),
        (ResourceLimitError, EXIT_RESOURCE),
        (G.TruncationExhausted, EXIT_TRUNCATION),
        (G.TruncationTooSmall, EXIT_TRUNCATION),
        (O.InvariantViolation, EXIT_INVARIANT),
        (G.GermError, EXIT_INPUT),
    ]
    try:
        code, outputs, lines = args.func(args)
    except tuple(e for e, _ in errors) as exc:
        code = next(c for e, c in errors if isinstance(exc, e))
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"mol {args.command}: {type(exc).__name__}: {msg}", file=sys.stderr)
        outputs, lines = {"error": {"type": type(exc).__name__, "message": str(msg), "exit_code": code}}, []
        if args.json and args.json != "-":
            _write(args.json, run_report(args.command, _inputs(args), outputs, started))
        elif args.json == "-":
            print(dumps(run_report(args.command, _inputs(args), outputs, started)))
        return code
    report = run_report(args.command, _inputs(args), outputs, started)
    if args.json == "-":
        print(dumps(report))
        for line in lines:
            print(line, file=sys.stderr)
    else:
        for line in lines:
            print(line)
        if args.json:
            _write(args.json, report)
    return code


def _write(path: str, report: dict) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(report) + "\n")


if __name__ == "__main__":
    sys.exit(main())
