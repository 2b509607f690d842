"""Command-line front end.

Every command writes JSON-lines records to standard output (or short text
lines with ``--format text``) and diagnostics to standard error.

Exit codes: 0 success / zero / finite / equivalent, 1 nonzero / infinite /
inequivalent / failed check, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

from .bounded import (NotLetterBounded, census_equiv, find_letter_bounded_order,
                      multiplicity_equiv_bounded, multiplicity_equiv_letter_bounded)
from .circuit import CircuitError, eval_series, parse_circuit
from .decide import (BoundConfig, BoundTooLarge, CoeffQuery, coeff_alg, eq_alg,
                     eq_alg_reduction_circuit, fin_alg, probe_reduction)
from .grammar import GrammarError, census_count, count_derivations, parse_grammar
from .poly import ParseError
from .polysys import ImproperSystem, parse_system, polynomial_approximant, validate_proper

BOUND_ENV = "ALGSERIES_BOUND"


class InputError(Exception):
    pass


class Emitter:
    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def __call__(self, record: Dict) -> None:
        if self.fmt == "json":
            line = json.dumps(record, sort_keys=False)
        else:
            line = " ".join(f"{k}={_text(v)}" for k, v in record.items())
        print(line, file=self.stream, flush=True)


def _text(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return p.read_text()


def _ints(text: str) -> List[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _bounds(args) -> BoundConfig:
    if getattr(args, "bound_formula", None) is not None:
        return BoundConfig.formula(args.bound_formula)
    if getattr(args, "bound", None) is not None:
        return BoundConfig.explicit(args.bound)
    env = os.environ.get(BOUND_ENV)
    if env:
        if env.startswith("formula"):
            _, _, c = env.partition(":")
            return BoundConfig.formula(int(c) if c else 1)
        return BoundConfig.explicit(int(env))
    raise InputError(f"a bound is required: --bound D, --bound-formula C or ${BOUND_ENV}")


def _word(g, text: str):
    if " " in text.strip() or any(len(t) != 1 for t in g.terminals):
        return tuple(text.split())
    return tuple(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_coeff(args, emit) -> int:
    s = parse_system(_read(args.system))
    v = _ints(args.v)
    if len(v) == 1 and s.k > 1:
        raise InputError(f"system has {s.k} indeterminates; give a full exponent vector")
    q = CoeffQuery(tuple(v), args.p)
    engines = ["hensel", "kleene"] if args.engine == "both" else [args.engine]
    results = {}
    for e in engines:
        t = time.perf_counter()
        results[e] = coeff_alg(s, q, e, args.component)
        emit({"problem": "coeff", "v": list(v), "p": args.p, "residue": results[e],
              "engine": e, "seconds": round(time.perf_counter() - t, 4)})
    if len(set(results.values())) > 1:
        print(f"engines disagree: {results}", file=sys.stderr)
        return 1
    return 0


def cmd_zero(args, emit) -> int:
    s = parse_system(_read(args.system))
    b = _bounds(args)
    verdict = eq_alg(s, b, args.engine, args.component)
    emit(verdict.to_record(s.indets))
    if args.probe:
        red = eq_alg_reduction_circuit(s, b, component=args.component)
        pr = probe_reduction(red, seed=args.seed)
        emit({"problem": "zero-probe", "verdict": "zero" if pr.at_most_threshold else "nonzero",
              "probabilistic": True, "probed_degree": pr.degree, "threshold": red.threshold,
              "Dprime": red.Dprime, "gates": red.circuit.size, "prime": pr.prime,
              "failure_bound": pr.failure_bound})
    return 0 if verdict.zero else 1


def cmd_finite(args, emit) -> int:
    s = parse_system(_read(args.system))
    verdict = fin_alg(s, _bounds(args), args.engine, args.component)
    emit(verdict.to_record(s.indets))
    return 0 if verdict.finite else 1


def cmd_equiv(args, emit) -> int:
    g = parse_grammar(_read(args.grammar))
    b = _bounds(args)
    for N in (args.n1, args.n2):
        if N not in g.nonterminals:
            raise InputError(f"unknown nonterminal {N!r}")
    if args.bounded:
        words = [_word(g, w) for w in args.bounded.split(",")]
        v = multiplicity_equiv_bounded(g, args.n1, args.n2, words, b, args.engine)
    elif args.order:
        order = [a.strip() for a in args.order.split(",")]
        v = multiplicity_equiv_letter_bounded(g, args.n1, args.n2, order, b, args.engine)
    else:
        v = census_equiv(g, args.n1, g, args.n2, b, args.engine)
    emit(v.to_record())
    return 0 if v.equivalent else 1


def cmd_compile(args, emit) -> int:
    s = parse_system(_read(args.system))
    if args.stage < 0:
        raise InputError("stage must be >= 0")
    c = polynomial_approximant(s, args.stage, args.component)
    text = c.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stderr.write(text)
    emit({"problem": "compile", "stage": args.stage, "component": args.component,
          "gates": c.size, "depth": c.depth(), "agrees_below_degree": 1 << args.stage,
          "out": args.out or "<stderr>"})
    return 0


def cmd_oracle(args, emit) -> int:
    g = parse_grammar(_read(args.grammar))
    N = args.n or g.start
    if N not in g.nonterminals:
        raise InputError(f"unknown nonterminal {N!r}")
    if args.word is not None:
        w = _word(g, args.word)
        emit({"problem": "oracle", "nonterminal": N, "word": " ".join(w),
              "count": count_derivations(g, N, w)})
    elif args.parikh is not None:
        v = _ints(args.parikh)
        emit({"problem": "oracle", "nonterminal": N, "parikh": v, "count": census_count(g, N, v)})
    else:
        raise InputError("oracle needs --word or --parikh")
    return 0


def cmd_check(args, emit) -> int:
    status = 0
    if args.system:
        text = _read(args.system)
        s = parse_system(text)
        rep = validate_proper(s)
        again = parse_system(s.to_text())
        emit({"problem": "check", "kind": "system", "proper": rep.ok,
              "violations": [f"{y}: {m}" for y, m in rep.violations],
              "round_trip": again == s})
        status |= 0 if rep.ok and again == s else 1
    if args.grammar:
        g = parse_grammar(_read(args.grammar))
        again = parse_grammar(g.to_text())
        rec = {"problem": "check", "kind": "grammar", "proper": True, "round_trip": again == g,
               "rules": len(g.rules)}
        found = find_letter_bounded_order(g, g.start)
        rec["letter_bounded_order"] = list(found.order) if found.order else None
        emit(rec)
        status |= 0 if again == g else 1
    if args.circuit:
        c = parse_circuit(_read(args.circuit))
        emit({"problem": "check", "kind": "circuit", "gates": c.size, "depth": c.depth(),
              "round_trip": parse_circuit(c.to_text()) == c})
    if not (args.system or args.grammar or args.circuit):
        raise InputError("check needs --system, --grammar or --circuit")
    return status


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="algseries", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--seed", type=int, default=0, help="seed for Monte-Carlo steps")
    # accepted after the subcommand too; SUPPRESS keeps a top-level value from being reset
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("json", "text"))
    common.add_argument("--seed", type=int, help="seed for Monte-Carlo steps")
    sub = p.add_subparsers(dest="command", required=True)

    def bound_flags(sp):
        sp.add_argument("--bound", type=int, help="explicit degree bound D")
        sp.add_argument("--bound-formula", type=int, metavar="C",
                        help="heuristic D = d^(C*l^2); verdicts become conditional")

    sp = sub.add_parser("coeff", parents=[common], help="coefficient of X^v mod p")
    sp.add_argument("--system", required=True)
    sp.add_argument("--v", required=True, help="exponent vector, e.g. 10 or 2,1")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--engine", choices=("hensel", "kleene", "both"), default="hensel")
    sp.add_argument("--component", type=int, default=0)
    sp.set_defaults(func=cmd_coeff)

    for name, func, helptext in (("zero", cmd_zero, "is the solution zero?"),
                                 ("finite", cmd_finite, "does the solution have finite support?")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--system", required=True)
        bound_flags(sp)
        sp.add_argument("--engine", choices=("hensel", "kleene", "auto"), default="hensel")
        sp.add_argument("--component", type=int, default=0)
        if name == "zero":
            sp.add_argument("--probe", action="store_true",
                            help="also run the Monte-Carlo degree probe on the reversal circuit")
        sp.set_defaults(func=func)

    sp = sub.add_parser("equiv", parents=[common], help="multiplicity equivalence of two nonterminals")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--n1", required=True)
    sp.add_argument("--n2", required=True)
    sp.add_argument("--order", help="letter order a,b,c for letter-bounded languages")
    sp.add_argument("--bounded", help="words w1,w2,... restricting to w1* ... wk*")
    bound_flags(sp)
    sp.add_argument("--engine", choices=("hensel", "kleene", "auto"), default="auto")
    sp.set_defaults(func=cmd_equiv)

    sp = sub.add_parser("compile", parents=[common], help="write the circuit E_n")
    sp.add_argument("--system", required=True)
    sp.add_argument("--stage", "-n", type=int, required=True)
    sp.add_argument("--component", type=int, default=0)
    sp.add_argument("--out", "-o")
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("oracle", parents=[common], help="count derivations by brute force")
    sp.add_argument("--grammar", required=True)
    sp.add_argument("--n", help="nonterminal (default: start)")
    sp.add_argument("--word")
    sp.add_argument("--parikh")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("check", parents=[common], help="validate and round-trip input files")
    sp.add_argument("--system")
    sp.add_argument("--grammar")
    sp.add_argument("--circuit")
    sp.set_defaults(func=cmd_check)
    return p


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    emit = Emitter(args.format)
    try:
        return args.func(args, emit)
    except (InputError, ParseError, GrammarError, CircuitError, ImproperSystem,
            NotLetterBounded, BoundTooLarge, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
