"""Command-line front end.

Exit codes: 0 verified/true, 1 counterexample/false, 2 usage or parse
error, 3 enumeration budget exceeded.  Identical inputs and seed produce
byte-identical reports regardless of --workers.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import backends
from .errors import BudgetExceeded, FopkitError, ParseError
from .evaluate import DEFAULT_BUDGET, eval_fo, eval_so, is_consistent
from .fops import apply, pullback_cases, pullback_constant, pullback_relation, validate_fop
from .formats import (
    load_fop,
    load_formula,
    load_structure,
    load_vocabularies,
    parse_formula,
    print_formula,
    print_structure,
)
from .problems import (
    BUILTIN_VOCABULARIES,
    PROBLEMS,
    check_superfluous_wrt_fop,
    declared_reductions,
    directed_version_harness,
    fop_catalog,
    get_problem,
    longest_path_restriction,
    pad,
)
from .structures import Structure, enumerate_structures
from .uniformity import (
    UniformityQuery,
    check_uniformity,
    conjunction_from_formula,
)

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _budget_default() -> int:
    env = os.environ.get("FOPKIT_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGET


def _registry(args) -> dict:
    registry = dict(BUILTIN_VOCABULARIES)
    for path in getattr(args, "vocabs", None) or []:
        registry = load_vocabularies(path, registry)
    return registry


def _assignment(text: str | None) -> dict[str, int]:
    out: dict[str, int] = {}
    if not text:
        return out
    for part in text.replace(",", " ").split():
        name, _, value = part.partition("=")
        if not _ or not value:
            raise FopkitError(f"bad assignment entry {part!r}; use name=value")
        out[name.strip()] = int(value)
    return out


def _add_common(sub):
    sub.add_argument("--vocabs", action="append", help="extra .fovoc file")
    sub.add_argument("--budget", type=int, default=None,
                     help="enumeration budget (default 2^26 or FOPKIT_BUDGET)")
    sub.add_argument("--format", choices=("text", "tsv"), default="text")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fopkit", description="finite model theory toolkit"
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", help="first-order model checking")
    s.add_argument("--structure", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--assign", help="free-variable values, e.g. 'x=0 y=1'")
    _add_common(s)

    s = sub.add_parser("eval-so", help="second-order model checking")
    s.add_argument("--structure", required=True)
    s.add_argument("--formula", required=True)
    _add_common(s)

    s = sub.add_parser("apply-fop", help="apply a projection to a structure")
    s.add_argument("--fop", required=True)
    s.add_argument("--structure", required=True)
    _add_common(s)

    s = sub.add_parser("validate-fop", help="shape and guard-exclusivity check")
    s.add_argument("--fop", required=True)
    s.add_argument("--exclusivity-bound", type=int, default=6)
    _add_common(s)

    s = sub.add_parser(
        "pullback-check",
        help="verify literal pullbacks against the image, exhaustively",
    )
    s.add_argument("--fop", required=True)
    s.add_argument("--size-bound", type=int, default=3)
    _add_common(s)

    s = sub.add_parser("consistency", help="search for a witness structure")
    s.add_argument("--vocab", required=True, help="vocabulary name")
    s.add_argument("--formula", required=True)
    s.add_argument("--assign")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--within", help="catalog problem name")
    _add_common(s)

    s = sub.add_parser("uniformity", help="bounded uniformity verification")
    s.add_argument("--problem", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--m", required=True, help="comma-separated sizes, e.g. 3,4")
    s.add_argument("--mode", choices=("exhaustive", "constructive"),
                   default="exhaustive")
    s.add_argument("--probe", help="single ground conjunction to test")
    s.add_argument("--workers", type=int, default=1)
    _add_common(s)

    s = sub.add_parser("autoreduce", help="emit a padding projection")
    s.add_argument("--problem", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out", help="write the .fop text here instead of stdout")
    _add_common(s)

    s = sub.add_parser(
        "superfluous",
        help="check a universal sentence against a projection's images",
    )
    s.add_argument("--psi", required=True, help=".fof file over the target vocabulary")
    s.add_argument("--fop", required=True)
    s.add_argument("--size-bound", type=int, default=3)
    _add_common(s)

    s = sub.add_parser("harness", help="application and agreement harnesses")
    s.add_argument("which", choices=("longest-path", "directed", "definitions"))
    s.add_argument("--problem", default="hp_two_points")
    s.add_argument("--size-bound", type=int, default=None)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    _add_common(s)

    s = sub.add_parser("catalog", help="list problems and projections")
    _add_common(s)

    return p


def _cmd_eval(args) -> int:
    registry = _registry(args)
    a = load_structure(args.structure, registry)
    f = load_formula(args.formula, a.vocabulary)
    value = eval_fo(a, f, _assignment(args.assign))
    print("true" if value else "false")
    return EXIT_OK if value else EXIT_COUNTEREXAMPLE


def _cmd_eval_so(args) -> int:
    registry = _registry(args)
    a = load_structure(args.structure, registry)
    f = load_formula(args.formula, a.vocabulary)
    value = eval_so(a, f, budget=args.budget or _budget_default())
    print("true" if value else "false")
    return EXIT_OK if value else EXIT_COUNTEREXAMPLE


def _cmd_apply(args) -> int:
    registry = _registry(args)
    q = load_fop(args.fop, registry)
    a = load_structure(args.structure, registry)
    print(print_structure(apply(q, a)))
    return EXIT_OK


def _cmd_validate(args) -> int:
    registry = _registry(args)
    q = load_fop(args.fop, registry)
    report = validate_fop(q, args.exclusivity_bound)
    if report.valid:
        print(f"VALID exclusivity-bound={report.exclusivity_bound}")
        return EXIT_OK
    for issue in report.issues:
        print(f"ISSUE {issue}")
    for v in report.violations:
        print(
            f"VIOLATION symbol={v.symbol} n={v.n} assignment={v.assignment} "
            f"guards {print_formula(v.first)} and {print_formula(v.second)}"
        )
    return EXIT_COUNTEREXAMPLE


def _cmd_pullback_check(args) -> int:
    registry = _registry(args)
    q = load_fop(args.fop, registry)
    report = validate_fop(q)
    if not report.valid:
        print("INVALID projection; run validate-fop")
        return EXIT_COUNTEREXAMPLE
    mismatches = _pullback_soundness(q, args.size_bound)
    if not mismatches:
        print(f"SOUND size-bound={args.size_bound}")
        return EXIT_OK
    for b, literal, values in mismatches[:10]:
        print(f"MISMATCH literal={literal} args={values} on {print_structure(b)}")
    return EXIT_COUNTEREXAMPLE


def _pullback_soundness(q, size_bound: int):
    """All (structure, literal form, argument tuple) mismatches between the
    image literal and its pullback, for sources up to size_bound."""
    from .evaluate import compiled_evaluator
    from .fops import query_variables
    from .structures import tuple_unindex

    mismatches = []
    for n in range(2, size_bound + 1):
        for b in enumerate_structures(q.source, n):
            image = apply(q, b)
            for rel, rarity in q.target.relations:
                nvars = q.arity * rarity
                names = query_variables(nvars)
                for positive in (True, False):
                    mu = pullback_relation(q, rel, positive)
                    run = compiled_evaluator(b, mu)
                    for idx in range(n**nvars):
                        flat = tuple_unindex(idx, nvars, n)
                        image_tuple = tuple(
                            _pack_block(flat, i, q.arity, n) for i in range(rarity)
                        )
                        holds = image_tuple in image.relations[rel]
                        if not positive:
                            holds = not holds
                        if holds != run(dict(zip(names, flat))):
                            mismatches.append((b, (rel, positive), flat))
            for c in q.target.constants:
                names = query_variables(q.arity)
                mu = pullback_constant(q, c)
                run = compiled_evaluator(b, mu)
                for idx in range(n**q.arity):
                    flat = tuple_unindex(idx, q.arity, n)
                    holds = image.constants[c] == _pack_block(flat, 0, q.arity, n)
                    if holds != run(dict(zip(names, flat))):
                        mismatches.append((b, ("=", c), flat))
    return mismatches


def _pack_block(flat, i: int, k: int, n: int) -> int:
    from .structures import tuple_index

    return tuple_index(flat[i * k : (i + 1) * k], n)


def _cmd_consistency(args) -> int:
    registry = _registry(args)
    if args.vocab not in registry:
        raise FopkitError(f"unknown vocabulary {args.vocab!r}")
    voc = registry[args.vocab]
    f = load_formula(args.formula, voc)
    within = get_problem(args.within) if args.within else None
    witness = is_consistent(
        voc, f, _assignment(args.assign), args.m, within,
        budget=args.budget or _budget_default(),
    )
    if witness is None:
        print("none")
        return EXIT_COUNTEREXAMPLE
    print(print_structure(witness))
    return EXIT_OK


def _cmd_uniformity(args) -> int:
    name = args.problem
    m_range = tuple(int(x) for x in args.m.split(","))
    query = UniformityQuery(name, args.n, args.k, m_range, args.mode)
    probe = None
    if args.probe:
        spec_name = name.split("@", 1)[0]
        voc = get_problem(spec_name).vocabulary
        probe = conjunction_from_formula(parse_formula(args.probe, voc), voc)
    report = check_uniformity(
        query,
        budget=args.budget or _budget_default(),
        workers=args.workers,
        probe=probe,
    )
    sys.stdout.write(report.render(args.format))
    return EXIT_OK if report.uniform else EXIT_COUNTEREXAMPLE


def _cmd_autoreduce(args) -> int:
    from .formats import print_fop
    from .problems import autoreduction

    rho = autoreduction(args.problem, args.n)
    text = print_fop(rho) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_superfluous(args) -> int:
    registry = _registry(args)
    rho = load_fop(args.fop, registry)
    psi = load_formula(args.psi, rho.target)
    report = check_superfluous_wrt_fop(psi, rho, args.size_bound)
    if report.holds:
        print(
            f"SUPERFLUOUS size-bound={report.size_bound} "
            f"structures={report.structures_checked}"
        )
        return EXIT_OK
    print("COUNTEREXAMPLE " + print_structure(report.counterexample))
    print(
        "FALSIFIED clause="
        + print_formula(report.falsified_clause)
        + " at "
        + " ".join(f"{k}={v}" for k, v in sorted(report.falsified_assignment.items()))
    )
    print("IMPLICANT " + print_formula(report.falsifying_implicant))
    return EXIT_COUNTEREXAMPLE


def _cmd_harness(args) -> int:
    if args.which == "longest-path":
        _, harness = longest_path_restriction()
        report = harness(args.size_bound or 3)
    elif args.which == "definitions":
        from .problems import definition_agreement_harness

        report = definition_agreement_harness(
            samples=args.samples,
            seed=args.seed,
            budget=args.budget or _budget_default(),
        )
    else:
        report = directed_version_harness(args.problem)(args.size_bound or 4)
    if report.holds:
        print(f"AGREE name={report.name} cases={report.cases}")
        return EXIT_OK
    first = report.disagreements[0]
    a = next(x for x in first if isinstance(x, Structure))
    print(f"DISAGREE name={report.name} cases={report.cases}")
    print(f"ON {print_structure(a)}")
    return EXIT_COUNTEREXAMPLE


def _cmd_catalog(args) -> int:
    print("problems:")
    for name, p in sorted(PROBLEMS.items()):
        extra = " (has logical definition)" if p.definition is not None else ""
        print(f"  {name}: {p.vocabulary.name}, {p.complexity}{extra}")
    print("projections:")
    for name, q in sorted(fop_catalog().items()):
        print(
            f"  {name}: arity {q.arity}, "
            f"{q.source.name} -> {q.target.name}"
        )
    print(f"backend: {backends.BACKEND_NAME}")
    return EXIT_OK


_COMMANDS = {
    "eval": _cmd_eval,
    "eval-so": _cmd_eval_so,
    "apply-fop": _cmd_apply,
    "validate-fop": _cmd_validate,
    "pullback-check": _cmd_pullback_check,
    "consistency": _cmd_consistency,
    "uniformity": _cmd_uniformity,
    "autoreduce": _cmd_autoreduce,
    "superfluous": _cmd_superfluous,
    "harness": _cmd_harness,
    "catalog": _cmd_catalog,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ParseError, FopkitError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
