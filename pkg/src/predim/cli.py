"""Command-line front door.

Every command prints one JSON payload on stdout (schema-versioned) and
human-readable notes on stderr.  Exact rationals are serialized as
"p/q" strings; affine values carry both coefficients and, for exact
alpha, the evaluated rational.  Exit codes: 0 ok, 1 verification
failure, 2 usage, 3 budget, 4 precision.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import errors
from .closure import intrinsic_closure
from .constructions import (
    Certificate,
    SearchBudget,
    approach_zero,
    dense_find,
    find_seed,
    is_admissible,
)
from .decompose import assemble
from .dimension import (
    Alpha,
    DimValue,
    ONE,
    dimension,
    dimension_oracle,
    is_in_class,
    predimension,
    verify_axioms,
)
from .generic import audit_extension, audit_finite_closures, build
from .sampler import SampleSpec, census, expected_count, sample
from .structures import Structure, canonical_json, graph, loads, to_dot, to_json_obj
from .witnesses import build_block, discontinuity_witness, rank_zero_witness

SCHEMA = 1

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_PRECISION = 4


def _frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def _dim(v: DimValue, alpha: Alpha) -> dict:
    out = {"const": _frac(v.p), "alpha_coeff": _frac(v.q)}
    if alpha.is_exact:
        out["value"] = _frac(alpha.evaluate(v))
    return out


def _alpha_from(args) -> Alpha:
    if getattr(args, "alpha_interval", None):
        lo, hi = args.alpha_interval
        return Alpha.irrational(Fraction(lo), Fraction(hi))
    if getattr(args, "alpha", None) is None:
        raise errors.UsageError("--alpha or --alpha-interval is required")
    return Alpha.rational(Fraction(args.alpha))


def _beta_from(args) -> Fraction:
    return Fraction(getattr(args, "beta", None) or 1)


def _read_structure(path: str) -> Structure:
    try:
        with open(path, "rb") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise errors.UsageError(f"cannot read {path}: {exc}") from exc


def _emit(payload: dict, args) -> None:
    payload = {"schema": SCHEMA, **payload}
    text = json.dumps(payload, indent=2, sort_keys=True)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}", file=sys.stderr)
    print(text)


def _emit_structure_files(s: Structure, args) -> None:
    if getattr(args, "out", None):
        with open(args.out, "wb") as fh:
            fh.write(canonical_json(s))
        print(f"wrote {args.out}", file=sys.stderr)
    if getattr(args, "dot", None):
        with open(args.dot, "w") as fh:
            fh.write(to_dot(s))
        print(f"wrote {args.dot}", file=sys.stderr)


def _parse_base(text: str) -> frozenset[int]:
    if not text:
        return frozenset()
    try:
        return frozenset(int(t) for t in text.split(","))
    except ValueError as exc:
        raise errors.UsageError(f"bad element list {text!r}") from exc


# -- command handlers ---------------------------------------------------------


def _cmd_dim(args) -> int:
    alpha = _alpha_from(args)
    beta = _beta_from(args)
    s = _read_structure(args.infile)
    base = _parse_base(args.base)
    val, arg = dimension(s, base, alpha, beta, oracle=args.oracle)
    base_delta = predimension(s.induced(base), beta)
    payload = {
        "delta_base": _dim(base_delta, alpha),
        "delta_whole": _dim(predimension(s, beta), alpha),
        "dimension": _dim(val, alpha),
        "minimizer": sorted(arg),
        "strong": alpha.sign(val - base_delta) == 0,
    }
    _emit(payload, args)
    return EXIT_OK


def _cmd_icl(args) -> int:
    alpha = _alpha_from(args)
    beta = _beta_from(args)
    s = _read_structure(args.infile)
    base = _parse_base(args.base)
    if args.oracle:
        from .closure import strong_intersection_closure

        closure = strong_intersection_closure(s, base, alpha, beta)
        payload = {
            "closure": sorted(closure),
            "converged": True,
            "rounds": 0,
            "budget_hit": False,
        }
        _emit(payload, args)
        return EXIT_OK
    res = intrinsic_closure(s, base, alpha, beta, node_budget=args.budget)
    payload = {
        "closure": sorted(res.closure),
        "converged": res.converged,
        "rounds": res.rounds,
        "budget_hit": res.budget_hit,
    }
    _emit(payload, args)
    return EXIT_OK if not res.budget_hit else EXIT_BUDGET


def _certificate_payload(cert: Certificate, alpha: Alpha) -> dict:
    return {
        "structure": to_json_obj(cert.structure),
        "points": {"a": cert.pointed.a, "b": cert.pointed.b, "e": cert.pointed.e},
        "rel_dim": _dim(cert.rel_dim, alpha),
        "trace": cert.trace.describe(),
        "membership": cert.membership,
    }


def _cmd_seed(args) -> int:
    alpha = _alpha_from(args)
    cert = find_seed(alpha, _beta_from(args))
    ok, report = is_admissible(cert.pointed, alpha, _beta_from(args))
    payload = _certificate_payload(cert, alpha)
    payload["verification"] = {"ok": ok, "mode": report["mode"]}
    _emit(payload, args)
    _emit_structure_files(cert.structure, args)
    return EXIT_OK if ok else EXIT_VERIFICATION


def _cmd_construct(args) -> int:
    alpha = _alpha_from(args)
    beta = _beta_from(args)
    budget = SearchBudget(expansions=args.budget, size_limit=args.size_limit)
    if args.what == "cn":
        blk = build_block(alpha, args.n, beta, budget)
        payload = {
            "structure": to_json_obj(blk.structure),
            "points": {"x": blk.x, "y": blk.y, "c": blk.c},
            "eps": _dim(blk.eps, alpha),
            "level": blk.level,
            "conditions": blk.conditions,
        }
        _emit(payload, args)
        _emit_structure_files(blk.structure, args)
        ok = (
            blk.conditions["eps_in_range"]
            and blk.conditions["triple_discrete"]
            and blk.conditions["primitive"]
        )
        return EXIT_OK if ok else EXIT_VERIFICATION
    if args.what == "zero":
        cert = approach_zero(alpha, args.n, beta, budget)
        payload = _certificate_payload(cert, alpha)
        _emit(payload, args)
        _emit_structure_files(cert.structure, args)
        return EXIT_OK
    if args.what == "dense":
        cert = dense_find(alpha, Fraction(args.lo), Fraction(args.hi), beta, budget)
        payload = _certificate_payload(cert, alpha)
        _emit(payload, args)
        _emit_structure_files(cert.structure, args)
        return EXIT_OK
    raise errors.UsageError(f"unknown construction {args.what!r}")


def _cmd_witness(args) -> int:
    alpha = _alpha_from(args)
    beta = _beta_from(args)
    budget = SearchBudget(expansions=args.budget, size_limit=args.size_limit)
    if args.kind == "rank0":
        rep = rank_zero_witness(alpha, args.blocks, beta, budget)
    elif args.kind == "discontinuity":
        rep = discontinuity_witness(alpha, args.blocks, beta, budget)
    else:
        raise errors.UsageError(f"unknown witness kind {args.kind!r}")
    values = {}
    for k, v in rep.values.items():
        if isinstance(v, DimValue):
            values[k] = _dim(v, alpha)
        elif isinstance(v, list) and v and isinstance(v[0], DimValue):
            values[k] = [_dim(x, alpha) for x in v]
        else:
            values[k] = v
    payload = {
        "structure": to_json_obj(rep.structure),
        "points": rep.points,
        "values": values,
        "block_sizes": [len(b.structure.elements) for b in rep.blocks],
        "block_conditions": [b.conditions for b in rep.blocks],
    }
    _emit(payload, args)
    _emit_structure_files(rep.structure, args)
    return EXIT_OK


def _cmd_generic(args) -> int:
    alpha = _alpha_from(args)
    beta = _beta_from(args)
    g = build(alpha, beta, steps=args.steps, max_ext=args.max_ext, seed=args.seed)
    ext = audit_extension(g)
    clo = audit_finite_closures(g, samples=args.audit_samples, seed=args.seed)
    payload = {
        "elements": len(g.structure.elements),
        "instances": len(g.structure.all_instances),
        "stages": g.stage,
        "completed": ext["completed"],
        "pending": ext["pending"],
        "audit_extension_ok": ext["all_completed_satisfied"],
        "audit_closures_ok": clo["ok"],
    }
    _emit(payload, args)
    _emit_structure_files(g.structure, args)
    ok = ext["all_completed_satisfied"] and clo["ok"]
    return EXIT_OK if ok else EXIT_VERIFICATION


def _cmd_sample(args) -> int:
    spec = SampleSpec(args.n, Fraction(args.alpha), Fraction(args.coeff), args.seed)
    g = sample(spec)
    payload = {
        "elements": len(g.elements),
        "edges": len(g.all_instances),
        "probability": spec.probability(),
    }
    if args.census:
        pattern = _census_pattern(args.census)
        payload["census"] = {
            "pattern": args.census,
            "count": census(g, pattern),
            "expected": expected_count(spec, pattern),
        }
    _emit(payload, args)
    _emit_structure_files(g, args)
    return EXIT_OK


def _census_pattern(name: str) -> Structure:
    name = name.upper()
    if name.startswith("K") and name[1:].isdigit():
        k = int(name[1:])
        if not 1 <= k <= 6:
            raise errors.UsageError("clique census supported for K1..K6")
        return graph(range(k), [(i, j) for i in range(k) for j in range(i + 1, k)])
    if name == "EDGE":
        return graph(range(2), [(0, 1)])
    raise errors.UsageError(f"unknown census pattern {name!r} (use K2..K6 or edge)")


def _cmd_check(args) -> int:
    alpha = _alpha_from(args)
    beta = _beta_from(args)
    import random as _random

    rng = _random.Random(args.seed)
    if args.suite == "axioms":
        violations = 0
        trials_done = 0
        for _ in range(args.trials // 50 + 1):
            n = rng.randint(4, 12)
            edges = [
                (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.35
            ]
            s = graph(range(n), edges)
            rep = verify_axioms(s, 50, alpha, beta, seed=rng.randrange(1 << 30))
            violations += len(rep["violations"])
            trials_done += rep["trials"]
            if trials_done >= args.trials:
                break
        payload = {"suite": "axioms", "trials": trials_done, "violations": violations}
        _emit(payload, args)
        return EXIT_OK if violations == 0 else EXIT_VERIFICATION
    if args.suite == "identities":
        from .constructions import amalg_copies, chain

        bad = 0
        done = 0
        while done < args.trials:
            denom = rng.randint(3, 12)
            num = rng.randint(1, denom - 1)
            alpha_r = Alpha.rational(Fraction(num, denom))
            try:
                seed_cert = find_seed(alpha_r, beta)
            except errors.PredimError:
                continue
            k = rng.randint(1, 3)
            try:
                c = amalg_copies(seed_cert, k, alpha_r, beta)
                c2 = chain(seed_cert, c, alpha_r, beta)
            except errors.RangeViolation:
                done += 1
                continue
            if not (c.revalidate(beta) and c2.revalidate(beta)):
                bad += 1
            done += 1
        payload = {"suite": "identities", "trials": done, "violations": bad}
        _emit(payload, args)
        return EXIT_OK if bad == 0 else EXIT_VERIFICATION
    if args.suite == "closure":
        from .closure import strong_intersection_closure

        bad = 0
        for _ in range(args.trials):
            n = rng.randint(3, 9)
            edges = [
                (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4
            ]
            s = graph(range(n), edges)
            base = frozenset(rng.sample(range(n), rng.randint(1, n)))
            res = intrinsic_closure(s, base, alpha, beta)
            if not res.converged or res.closure != strong_intersection_closure(
                s, base, alpha, beta
            ):
                bad += 1
        payload = {"suite": "closure", "trials": args.trials, "violations": bad}
        _emit(payload, args)
        return EXIT_OK if bad == 0 else EXIT_VERIFICATION
    raise errors.UsageError(f"unknown check suite {args.suite!r}")


# -- argument parsing ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="predim",
        description="Exact predimension calculus on finite relational structures",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, needs_alpha=True, seeded=False):
        if needs_alpha:
            p.add_argument("--alpha", help="exact rational, e.g. 5/11")
            p.add_argument(
                "--alpha-interval", nargs=2, metavar=("LO", "HI"),
                help="declared-irrational open interval",
            )
            p.add_argument("--beta", help="point weight (default 1)")
        p.add_argument("--out", help="write canonical structure/payload JSON here")
        p.add_argument("--dot", help="write DOT export here (binary signatures)")
        if seeded:
            p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("dim", help="delta and dimension of a base in a structure")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--base", default="", help="comma-separated element ids")
    p.add_argument("--oracle", action="store_true", help="pure exhaustive evaluation")
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser("icl", help="intrinsic closure of a base")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--base", default="")
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--oracle", action="store_true", help="pure exhaustive evaluation")
    p.set_defaults(func=_cmd_icl)

    p = sub.add_parser("seed", help="admissible pointed seed for alpha")
    common(p)
    p.set_defaults(func=_cmd_seed)

    p = sub.add_parser("construct", help="construction pipeline outputs")
    p.add_argument("what", choices=["cn", "zero", "dense"])
    common(p)
    p.add_argument("--n", type=int, default=1, help="block level / closeness target")
    p.add_argument("--lo", help="dense: open interval lower end")
    p.add_argument("--hi", help="dense: open interval upper end")
    p.add_argument("--budget", type=int, default=4000)
    p.add_argument("--size-limit", type=int, default=400)
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("witness", help="glued dimension witnesses")
    p.add_argument("kind", choices=["rank0", "discontinuity"])
    common(p)
    p.add_argument("--blocks", type=int, default=1)
    p.add_argument("--budget", type=int, default=4000)
    p.add_argument("--size-limit", type=int, default=400)
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("generic", help="finite-stage generic model build + audits")
    common(p, seeded=True)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--max-ext", type=int, default=3)
    p.add_argument("--audit-samples", type=int, default=20)
    p.set_defaults(func=_cmd_generic)

    p = sub.add_parser("sample", help="sparse random graph with census")
    common(p, needs_alpha=False, seeded=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", required=True, help="rational exponent proxy")
    p.add_argument("--coeff", default="1")
    p.add_argument("--census", help="pattern: edge or K2..K6")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("check", help="randomized property suites")
    p.add_argument("suite", choices=["axioms", "identities", "closure"])
    common(p, seeded=True)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=_cmd_check)

    return top


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except errors.UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.Unachievable as exc:
        print(f"unachievable: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    except errors.BudgetExceeded as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except errors.InsufficientPrecision as exc:
        print(f"precision: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except errors.PredimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
