"""Command-line front end.

Exit status: 0 on success or a passing check, 1 when a checked property
fails, 2 on usage, input or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, oracle, simplify, transform
from .kernel import Const, Param, canonicalize
from .resolution import DerivationBudget
from .syntax import (
    ParseError,
    SchemaError,
    format_denial,
    format_theory,
    parse_denials,
    parse_facts,
    parse_schema,
    parse_update,
)

LANGS = {"auto": None, "ls": analysis.L_S, "lsext": analysis.L_SEXT}


class UsageError(Exception):
    pass


class ParanoidFailure(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e


def _canon(theory) -> list:
    return sorted((canonicalize(d) for d in theory), key=format_denial)


def _domain(text: str | None) -> tuple:
    if not text:
        return ("a", "b", "c")
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _params(items: list) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects NAME=CONST, got {item!r}")
        k, v = item.split("=", 1)
        out[Param(k.strip().lstrip("$"))] = Const(v.strip())
    return out


def _emit(args, text: str, data: dict) -> None:
    if args.format == "structured":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(text)


def _load(args):
    s = parse_schema(_read(args.schema))
    u = parse_update(_read(args.update), s) if getattr(args, "update", None) else None
    return s, u


# --------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    s, u = _load(args)
    v = analysis.classify(s, u)
    ok, strata = analysis.check_stratified(s)
    lines = [v.report()]
    if ok:
        layers = ", ".join(f"{p}:{n}" for p, n in sorted(strata.items()))
        lines.append(f"stratified: yes ({layers})" if layers else "stratified: yes")
    else:
        lines.append("stratified: no")
    data = {
        "schema_class": v.schema_class,
        "witness": v.witness,
        "update_class": v.update_class,
        "update_witness": v.update_witness,
        "stratified": ok,
        "strata": strata,
    }
    _emit(args, "\n".join(lines), data)
    return 0


def cmd_unfold(args) -> int:
    s, _ = _load(args)
    lang = LANGS[args.lang]
    if lang == analysis.L_S:
        theory = transform.unfold_ls(s)
    else:
        theory = transform.unfold_lsext(s)
    theory = _canon(theory)
    _emit(args, format_theory(theory), {"theory": [format_denial(d) for d in theory]})
    return 0


def cmd_after(args) -> int:
    s, u = _load(args)
    res = transform.after_lang(s, u, LANGS[args.lang])
    theory = _canon(res.theory)
    _emit(args, format_theory(theory), {"theory": [format_denial(d) for d in theory]})
    return 0


def _paranoid_checker(delta: list, domain: tuple):
    def check(rule, old, new):
        bad = oracle.equivalent_under(delta, old, new, domain, max_databases=2 ** 12, sample=1000)
        if bad is not None:
            facts, pa = bad
            db = ", ".join(sorted(map(str, facts)))
            ps = ", ".join(f"{k}={v}" for k, v in sorted((str(k), str(v)) for k, v in pa.items()))
            raise ParanoidFailure(f"rule {rule} changed the meaning of the theory on {{{db}}} {ps}")

    return check


def cmd_simplify(args) -> int:
    s, u = _load(args)
    check = None
    if args.paranoid:
        check = _paranoid_checker(simplify.delta_of(s), _domain(args.domain))
    res = simplify.simp(
        s, u, LANGS[args.lang],
        max_firings=args.max_firings,
        budget=DerivationBudget(max_clauses=args.max_clauses),
        check=check,
    )
    theory = _canon(res.theory)
    text = format_theory(theory)
    if args.trace:
        print(str(res.trace), file=sys.stderr)
        print(res.stats.report(), file=sys.stderr)
    data = {
        "theory": [format_denial(d) for d in theory],
        "lang": res.lang,
        "firings": dict(res.stats.firings),
        "derivations": res.stats.derivations.calls,
        "saturation_cap_hits": res.stats.derivations.cap_hits,
    }
    if args.trace:
        data["trace"] = [[r, str(b), [str(x) for x in a] if isinstance(a, list) else str(a)]
                         for r, b, a in res.trace.steps]
    _emit(args, text, data)
    return 0


def cmd_verify(args) -> int:
    s, u = _load(args)
    mode = oracle.WP if args.mode == "wp" else oracle.CWP
    if args.candidate:
        candidate = parse_denials(_read(args.candidate))
    elif mode == oracle.WP:
        candidate = transform.after_lang(s, u, LANGS[args.lang]).theory
    else:
        candidate = simplify.simp(s, u, LANGS[args.lang], max_firings=args.max_firings).theory
    rep = oracle.verify(s, u, candidate, mode, _domain(args.domain),
                        params=_params(args.param), max_databases=args.max_databases,
                        sample=args.sample)
    data = {
        "mode": rep.mode,
        "passed": rep.passed,
        "checked": rep.checked,
        "databases": rep.space,
        "sampled": rep.sampled,
        "domain": [c.name for c in rep.domain],
        "counterexamples": [
            {"database": sorted(map(str, f)), "params": {str(k): str(v) for k, v in pa.items()},
             "candidate_holds": c, "updated_consistent": p}
            for f, pa, c, p in rep.counterexamples
        ],
    }
    _emit(args, rep.summary(), data)
    return 0 if rep.passed else 1


def cmd_eval(args) -> int:
    s = parse_schema(_read(args.schema))
    facts = parse_facts(_read(args.edb))
    db = oracle.DatabaseInstance.of(facts, _domain(args.domain) if args.domain else ())
    model = oracle.Evaluator(s).model(db.model(), db.domain)
    pa = oracle._param_env(_params(args.param))
    lines, results = [], []
    for d in s.constraints:
        ok = oracle.holds(d, model, db.domain, pa)
        results.append({"constraint": format_denial(d), "holds": ok})
        lines.append(f"{'holds' if ok else 'violated'}: {format_denial(d)}")
    all_ok = all(r["holds"] for r in results)
    lines.append("consistent" if all_ok else "inconsistent")
    _emit(args, "\n".join(lines), {"constraints": results, "consistent": all_ok})
    return 0 if all_ok else 1


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "structured"], default="text")
    common.add_argument("--lang", choices=sorted(LANGS), default="auto")
    common.add_argument("--domain", help="comma-separated constants for the oracle")
    common.add_argument("--trace", action="store_true", help="print the rewrite trace to stderr")
    common.add_argument("--paranoid", action="store_true",
                        help="check every optimizer step with the oracle")
    common.add_argument("--max-firings", type=int, default=simplify.DEFAULT_MAX_FIRINGS)
    common.add_argument("--max-clauses", type=int, default=DerivationBudget().max_clauses,
                        help="saturation cap per derivation")

    p = argparse.ArgumentParser(prog="icsimp", description="Integrity constraint simplification.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="language membership and stratification")
    c.add_argument("schema")
    c.add_argument("update", nargs="?")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("unfold", parents=[common], help="unfold intensional predicates")
    c.add_argument("schema")
    c.set_defaults(func=cmd_unfold)

    for name, fn, helptext in [
        ("after", cmd_after, "weakest precondition by substitution and unfolding"),
        ("simplify", cmd_simplify, "simplified pre-test for an update"),
    ]:
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("schema")
        c.add_argument("update")
        c.set_defaults(func=fn)

    c = sub.add_parser("verify", parents=[common], help="brute-force WP/CWP check")
    c.add_argument("schema")
    c.add_argument("update")
    c.add_argument("candidate", nargs="?", help="theory file (default: computed)")
    c.add_argument("--mode", choices=["wp", "cwp"], default="cwp")
    c.add_argument("--param", action="append", metavar="NAME=CONST")
    c.add_argument("--max-databases", type=int, default=2 ** 20)
    c.add_argument("--sample", type=int, help="random databases to test when over budget")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("eval", parents=[common], help="evaluate constraints on a fact file")
    c.add_argument("schema")
    c.add_argument("edb")
    c.add_argument("--param", action="append", metavar="NAME=CONST")
    c.set_defaults(func=cmd_eval)
    return p


def main(argv: list | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, SchemaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except oracle.VerificationBudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except simplify.OptimizationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ParanoidFailure as e:
        print(f"paranoid check failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
