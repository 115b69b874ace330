"""Command line front end.  Every run prints one JSON document.

Exit status: 0 when the checked claim holds, 1 when it fails, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import factorial, gcd

import numpy as np

from . import census
from .action import analyze_action, tuple_orbits
from .algebra import AlgebraStructure, automorphisms, is_minimal, random_structure
from .ffield import check_prime
from .operad import Signature, format_element, parse_element
from .spectral import (
    above_failure_bound,
    below_sufficient_bound,
    build_delta,
    check_sl_generation,
    critical_epsilon,
    heisenberg_angle,
    is_positive_definite,
    min_eigenvalue,
)
from .tame import (
    GammaGenerators,
    NoSolutionError,
    Transvection,
    apply_transvection,
    apply_word,
    crt_solve,
    transvection_word,
    verify_word_symbolic,
)

SEARCH_BUDGET = 10**4


class UsageError(ValueError):
    pass


def verdict(claim: str, parameters: dict, measured, bound, ok: bool) -> dict:
    return {"claim": claim, "parameters": parameters, "measured": measured, "bound": bound, "pass": bool(ok)}


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def _signature(text: str) -> Signature:
    try:
        return Signature.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _prime(p: int) -> int:
    try:
        return check_prime(p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for randomized runs")
    return args.seed


# -- pipelines --------------------------------------------------------------


def find_structure(sig: Signature, k: int, p: int, seed: int, budget: int = SEARCH_BUDGET):
    """First sampled structure that is minimal with trivial automorphism group.

    Attempt t uses the seed ``[seed, t]``.  Returns the structure and the
    number of attempts and hits seen, or ``None`` in place of the structure.
    """
    minimal = 0
    for t in range(budget):
        A = random_structure(sig, k, p, [seed, t])
        if not is_minimal(A):
            continue
        minimal += 1
        if automorphisms(A).order == 1:
            return A, {"attempts": t + 1, "minimal_seen": minimal}
    return None, {"attempts": budget, "minimal_seen": minimal}


def verify_action_pipeline(p: int, k: int, n: int, d: int, N: int = 1, seed: int = 0,
                           transitivity_cap: int = 6) -> dict:
    _prime(p)
    if gcd(N, p) != 1:
        raise UsageError(f"N={N} is not invertible mod p={p}")
    if d < 1:
        raise UsageError("d must be at least 1")
    if p ** (n * k) > 10**7:
        raise UsageError(f"p^(nk) = {p ** (n * k)} exceeds 10^7")
    sig = Signature((("m", 2), ("t", d)))
    try:
        gens = GammaGenerators(n, sig, N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params = {"p": p, "k": k, "n": n, "d": d, "N": N, "seed": seed}
    A, search = find_structure(sig, k, p, seed)
    if A is None:
        return verdict("a minimal structure with trivial automorphisms exists among the samples",
                       params, search, None, False)
    orbits = tuple_orbits(A, gens)
    sizes = sorted(len(o) for o in orbits)
    two_orbits = sizes == [1, p ** (n * k) - 1]
    report, _, _ = analyze_action(A, gens, transitivity_cap, seed)
    m = report.degree
    odd_orders = all(o % 2 == 1 for o in report.generator_orders.values())
    full = report.image in ("Alt", "Sym")
    ok = two_orbits and full and (report.image == "Alt" or not odd_orders)
    measured = {
        "structure": A.to_json(),
        "search": search,
        "orbit_sizes_on_tuples": sizes,
        "two_orbits": two_orbits,
        **report.summary(),
        "all_generator_orders_odd": odd_orders,
    }
    bound = {"alternating_order": str(factorial(m) // 2), "symmetric_order": str(factorial(m))}
    return verdict("the action on nonzero tuples modulo automorphisms is transitive with full alternating "
                   "or symmetric image, alternating when all generators have odd order",
                   params, measured, bound, ok)


def delta_report(n: int, ar: int, eps: Fraction, critical: bool) -> dict:
    try:
        M = build_delta(n, ar, eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pd = is_positive_definite(M)
    below = below_sufficient_bound(eps, ar)
    above = above_failure_bound(eps, ar)
    ok = (pd or not below) and (not pd or not above)
    out = {
        "n": n,
        "ar": ar,
        "eps": str(eps),
        "positive_definite": pd,
        "min_eigenvalue": min_eigenvalue(M),
        "critical_eps": critical_epsilon(n, ar) if critical else None,
        "eps_below_sufficient_bound": below,
        "eps_above_failure_bound": above,
    }
    out["verdict"] = verdict("Delta is positive definite below 1/(2+sqrt(ar-1)) and not above 1/max(2, sqrt(ar-1))",
                             {"n": n, "ar": ar, "eps": str(eps)}, pd,
                             {"sufficient": f"1/(2+sqrt({ar - 1}))", "failure": f"1/max(2, sqrt({ar - 1}))"}, ok)
    return out


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tamealt", description=__doc__)
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("delta", help="positive definiteness of the Delta matrix")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--ar", type=int, required=True)
    s.add_argument("--eps", required=True, help="rational, e.g. 1/4")
    s.add_argument("--critical", action="store_true", help="also bisect for the critical eps")

    s = sub.add_parser("angle", help="Heisenberg Friedrichs cosine")
    s.add_argument("--p", type=int, required=True)

    s = sub.add_parser("slgen", help="order of the linear generators mod p")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--N", type=int, default=1)

    s = sub.add_parser("census", help="structure censuses")
    s.add_argument("kind", choices=["minimality", "autos", "onedim", "isoclasses", "hall"])
    s.add_argument("--sig", default="b2,b2")
    s.add_argument("--p", type=int, default=2)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--group", default="alt5")
    s.add_argument("--csv", help="per-structure verdicts (exhaustive mode)")

    s = sub.add_parser("verify-action", help="end-to-end permutation action run")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--N", type=int, default=1)
    s.add_argument("--seed", type=int)
    s.add_argument("--cap", type=int, default=6, help="transitivity cap")

    s = sub.add_parser("word", help="build and verify a generator word for t_0(f)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--sig", required=True)
    s.add_argument("--f", required=True, help="payload, e.g. 'm(x1, x2)'")
    s.add_argument("--N", type=int, default=1)
    s.add_argument("--degree", type=int, help="symbolic verification cap (default: degree of f)")
    s.add_argument("--p", type=int, help="also compare actions on random tuples over GF(p)")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--seed", type=int)
    s.add_argument("--show", action="store_true", help="include the word itself")

    s = sub.add_parser("crt", help="one-variable interpolation in a structure")
    s.add_argument("--structure", help="structure JSON file (default: sample a minimal one)")
    s.add_argument("--sig", default="b2,b2")
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--points", required=True, help="vectors separated by ';', entries by ','")
    s.add_argument("--targets", required=True)
    s.add_argument("--max-degree", type=int, default=8)
    s.add_argument("--seed", type=int)
    return ap


def _vectors(text: str, k: int) -> np.ndarray:
    try:
        rows = [[int(x) for x in part.split(",")] for part in text.split(";") if part.strip()]
    except ValueError:
        raise UsageError(f"bad vector list {text!r}") from None
    if any(len(r) != k for r in rows):
        raise UsageError(f"every vector needs {k} entries")
    return np.array(rows, dtype=np.int64)


def run(args) -> dict:
    cmd = args.command
    if cmd == "delta":
        return delta_report(args.n, args.ar, _rational(args.eps), args.critical)
    if cmd == "angle":
        _prime(args.p)
        r = heisenberg_angle(args.p)
        target = args.p ** -0.5
        return verdict("the Friedrichs cosine of the Heisenberg fixed spaces equals p^(-1/2)", {"p": args.p},
                       {"cosine": r.cosine, "fixed_dims": list(r.fixed_dims)}, target,
                       abs(r.cosine - target) <= 1e-9)
    if cmd == "slgen":
        _prime(args.p)
        if gcd(args.N, args.p) != 1:
            raise UsageError(f"N={args.N} is not invertible mod p={args.p}")
        if args.p**args.n > 10**6:
            raise UsageError("p^n exceeds 10^6")
        r = check_sl_generation(args.n, args.p, args.N)
        return verdict("the linear generators generate SL_n(F_p)", {"n": args.n, "p": args.p, "N": args.N},
                       str(r.order), str(r.expected), r.ok)
    if cmd == "census":
        return run_census(args)
    if cmd == "verify-action":
        return verify_action_pipeline(args.p, args.k, args.n, args.d, args.N, _need_seed(args), args.cap)
    if cmd == "word":
        return run_word(args)
    if cmd == "crt":
        return run_crt(args)
    raise UsageError(f"unknown command {cmd}")


def run_census(args) -> dict:
    kind = args.kind
    if kind == "hall":
        try:
            r = census.hall_eulerian_check(args.group)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        expected = {"alt5": 19, "c2": 3}.get(args.group.lower())
        ok = expected is None or r["orbits"] == expected
        return verdict("generating pairs counted up to automorphisms", {"group": args.group}, r, expected, ok)
    _prime(args.p)
    if kind == "isoclasses":
        rep = census.isomorphism_class_count(args.d, args.k, args.p)
        return rep.to_json()
    sig = _signature(args.sig)
    seed = _need_seed(args) if args.mode == "sampled" else args.seed
    if args.mode == "sampled" and not args.samples:
        raise UsageError("--samples is required in sampled mode")
    if args.mode == "exhaustive" and census.total_structures(sig, args.k, args.p) > census.EXHAUSTIVE_LIMIT:
        raise UsageError("too many structures for exhaustive mode")
    if kind == "minimality":
        rep = census.minimality_census(sig, args.k, args.p, args.mode, args.samples, seed, csv_path=args.csv)
    elif kind == "autos":
        rep = census.automorphism_census(sig, args.k, args.p, args.mode, args.samples, seed, csv_path=args.csv)
    else:
        rep = census.one_dim_subalgebra_census(sig, args.k, args.p, args.mode, args.samples, seed)
    return rep.to_json()


def run_word(args) -> dict:
    sig = _signature(args.sig)
    try:
        gens = GammaGenerators(args.n, sig, args.N)
        f = parse_element(args.f, sig)
        w = transvection_word(f, gens)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    target = Transvection(0, f)
    ok = verify_word_symbolic(w, target, gens, args.degree)
    measured = {"length": len(w), "letters": len(w.letters), "symbolic_match": ok}
    if args.p is not None:
        _prime(args.p)
        seed = _need_seed(args)
        A = random_structure(sig, args.k, args.p, seed)
        tuples = np.random.default_rng([seed, 1]).integers(0, args.p, size=(1000, args.n, args.k))
        same = bool(np.array_equal(apply_word(w, gens, tuples, A), apply_transvection(target, tuples, A)))
        measured["numeric_match"] = same
        ok = ok and same
    if args.show:
        measured["word"] = str(w)
    return verdict("the constructed word equals the transvection t_0(f)",
                   {"n": args.n, "sig": args.sig, "f": format_element(f), "N": args.N}, measured, None, ok)


def run_crt(args) -> dict:
    if args.structure:
        with open(args.structure) as fh:
            A = AlgebraStructure.from_json(fh.read())
    else:
        sig = _signature(args.sig)
        _prime(args.p)
        seed = _need_seed(args)
        A = None
        for t in range(SEARCH_BUDGET):
            cand = random_structure(sig, args.k, args.p, [seed, t])
            if is_minimal(cand):
                A = cand
                break
        if A is None:
            raise UsageError("no minimal structure found within the search budget")
    pts = _vectors(args.points, A.k)
    tgt = _vectors(args.targets, A.k)
    if len(pts) != len(tgt):
        raise UsageError("points and targets differ in number")
    params = {"structure": A.to_json(), "points": pts.tolist(), "targets": tgt.tolist(), "max_degree": args.max_degree}
    try:
        sol = crt_solve(A, pts, tgt, args.max_degree)
    except NoSolutionError as exc:
        return verdict("a one-variable element takes the prescribed values", params, str(exc), args.max_degree, False)
    return verdict("a one-variable element takes the prescribed values", params,
                   {"element": format_element(sol.element), "degree": sol.degree}, args.max_degree, True)


def _passed(report: dict) -> bool:
    if "pass" in report:
        return bool(report["pass"])
    return bool(report.get("verdict", {}).get("pass", True))


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if _passed(report) else 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
