"""Exhaustive and sampled censuses of algebra structures.

Work is split into fixed-size chunks.  In sampled mode chunk ``c`` draws
its structures from ``numpy.random.default_rng([seed, c])``, so a report
depends only on its parameters and seed, never on the worker count
(``TAMEALT_WORKERS``, default 1).
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt
from statistics import NormalDist

import numpy as np

from . import permgroup
from .algebra import (
    AlgebraStructure,
    are_isomorphic,
    automorphisms,
    has_one_dim_subalgebra,
    index_digits,
    is_minimal,
    is_minimal_by_subspaces,
    param_count,
    random_flat_batch,
    scalar_group,
)
from .ffield import check_prime, enumerate_gl, mat_inverse, projective_points
from .operad import Signature

EXHAUSTIVE_LIMIT = 2**24
CHUNK = 4096
CONFIDENCE = 0.99


def workers() -> int:
    try:
        return max(1, int(os.environ.get("TAMEALT_WORKERS", "1")))
    except ValueError:
        return 1


def wilson_interval(successes: int, total: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    if total == 0:
        return 0.0, 1.0
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    phat = successes / total
    denom = 1 + z * z / total
    centre = (phat + z * z / (2 * total)) / denom
    half = z * sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    # the endpoints are exact at the extremes; rounding would leave a sliver
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == total else min(1.0, centre + half)
    return lo, hi


def _sig(sig) -> Signature:
    return sig if isinstance(sig, Signature) else Signature.parse(sig)


def total_structures(sig, k: int, p: int) -> int:
    return p ** param_count(_sig(sig), k)


# -- reports ----------------------------------------------------------------


@dataclass
class CensusReport:
    kind: str
    parameters: dict
    counts: dict
    fractions: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    verdict: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.verdict.get("pass", True))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "parameters": self.parameters,
            "counts": self.counts,
            "fractions": self.fractions,
            "bounds": self.bounds,
            "verdict": self.verdict,
            "notes": self.notes,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _fraction_entry(successes: int, total: int, exact: bool) -> dict:
    out = {"count": successes, "total": total, "value": successes / total if total else None}
    if exact:
        out["exact"] = str(Fraction(successes, total))
    else:
        lo, hi = wilson_interval(successes, total)
        out["ci99"] = [lo, hi]
    return out


def _params(sig: Signature, k: int, p: int, mode: str, samples: int | None, seed: int | None) -> dict:
    return {
        "signature": ",".join(f"{n}:{a}" for n, a in sig),
        "k": k,
        "p": p,
        "mode": mode,
        "samples": samples,
        "seed": seed,
    }


# -- chunk workers ----------------------------------------------------------


def _structures(sig: Signature, k: int, p: int, mode: str, seed, chunk: int, count: int, start: int):
    """Flat parameter rows for one chunk."""
    if mode == "exhaustive":
        length = param_count(sig, k)
        return np.stack([index_digits(i, length, p) for i in range(start, start + count)])
    return random_flat_batch(sig, k, p, seed, chunk, count)


def _minimality_chunk(args):
    sig_ops, k, p, mode, seed, chunk, count, start, cross = args
    sig = Signature(sig_ops)
    rows = _structures(sig, k, p, mode, seed, chunk, count, start)
    fast = np.zeros(len(rows), dtype=bool)
    slow = np.zeros(len(rows), dtype=bool)
    for r, flat in enumerate(rows):
        A = AlgebraStructure.from_flat(sig, k, p, flat)
        fast[r] = is_minimal(A)
        if cross:
            slow[r] = is_minimal_by_subspaces(A)
    return fast, slow


def _aut_chunk(args):
    sig_ops, k, p, mode, seed, chunk, count, start, cross = args
    sig = Signature(sig_ops)
    rows = _structures(sig, k, p, mode, seed, chunk, count, start)
    minimal = np.zeros(len(rows), dtype=bool)
    nontrivial = np.zeros(len(rows), dtype=bool)
    mismatch = 0
    for r, flat in enumerate(rows):
        A = AlgebraStructure.from_flat(sig, k, p, flat)
        if not is_minimal(A):
            continue
        minimal[r] = True
        aut = automorphisms(A)
        nontrivial[r] = not aut.is_scalar_only(A)
        if cross and automorphisms(A, method="enumerate").order != aut.order:
            mismatch += 1
    return minimal, nontrivial, mismatch


def _run_chunks(fn, sig: Signature, k: int, p: int, mode: str, total: int, seed, cross: bool):
    jobs = []
    for c, start in enumerate(range(0, total, CHUNK)):
        jobs.append((sig.ops, k, p, mode, seed, c, min(CHUNK, total - start), start, cross))
    w = workers()
    if w == 1 or len(jobs) == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, jobs))


def _size(sig: Signature, k: int, p: int, mode: str, samples: int | None, seed) -> int:
    if mode == "exhaustive":
        total = total_structures(sig, k, p)
        if total > EXHAUSTIVE_LIMIT:
            raise ValueError(f"{total} structures exceed the exhaustive limit 2^24")
        return total
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if seed is None:
        raise ValueError("sampled mode needs a seed")
    if not samples or samples < 1:
        raise ValueError("sampled mode needs a positive sample count")
    return samples


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# -- minimality -------------------------------------------------------------


def minimality_bound(sig: Signature, k: int, p: int) -> Fraction:
    """``1 - 6 p^((1-|S|)(k-1))`` as an exact rational."""
    return 1 - 6 * Fraction(p) ** ((1 - len(sig)) * (k - 1))


def sharper_minimality_estimate(sig: Signature, k: int, p: int) -> Fraction:
    """``1 - 2 p^((1-|S|)(k-1)) / (1 - p^(1-|S|))``, the limiting sharper form (informational)."""
    s = len(sig)
    q = Fraction(p) ** (1 - s)
    return 1 - 2 * Fraction(p) ** ((1 - s) * (k - 1)) / (1 - q) if q != 1 else Fraction(-1)


def minimality_census(sig, k: int, p: int, mode: str = "exhaustive", samples: int | None = None,
                      seed: int | None = None, cross_check: bool = True, csv_path=None) -> CensusReport:
    sig = _sig(sig)
    check_prime(p)
    total = _size(sig, k, p, mode, samples, seed)
    cross = cross_check and mode == "exhaustive"
    parts = _run_chunks(_minimality_chunk, sig, k, p, mode, total, seed, cross)
    fast = np.concatenate([a for a, _ in parts])
    slow = np.concatenate([b for _, b in parts])
    minimal = int(fast.sum())
    exact = mode == "exhaustive"
    counts = {"total": total, "minimal": minimal}
    notes = []
    if cross:
        disagree = int((fast != slow).sum())
        counts["algorithm_disagreements"] = disagree
        notes.append("line-closure and subspace-enumeration minimality tests compared on every structure")
    bound = minimality_bound(sig, k, p)
    frac = _fraction_entry(minimal, total, exact)
    if bound <= 0:
        ok, status = True, "bound vacuous, recorded"
    elif exact:
        ok = Fraction(minimal, total) >= bound
        status = "exact fraction compared with the bound"
    else:
        ok = Fraction(frac["ci99"][0]) > bound
        status = "lower end of the 99% interval compared with the bound"
    if cross and counts["algorithm_disagreements"]:
        ok, status = False, "minimality algorithms disagree"
    notes.append("the bound uses the constant 6; the stronger variant with constant 5 is not used for the verdict")
    if csv_path and exact:
        _write_csv(csv_path, ["index", "minimal", "minimal_by_subspaces"],
                   ([i, int(fast[i]), int(slow[i])] for i in range(total)))
    return CensusReport(
        "minimality",
        _params(sig, k, p, mode, samples, seed),
        counts,
        {"minimal": frac},
        {"lower_bound": str(bound), "sharper_estimate_informational": str(sharper_minimality_estimate(sig, k, p))},
        {"claim": "proportion of minimal structures is at least 1 - 6 p^((1-|S|)(k-1))",
         "pass": bool(ok), "status": status},
        notes,
    )


# -- automorphisms ----------------------------------------------------------


def automorphism_census(sig, k: int, p: int, mode: str = "exhaustive", samples: int | None = None,
                        seed: int | None = None, cross_check: bool = False, csv_path=None) -> CensusReport:
    """Fraction of all structures that are minimal with automorphisms beyond scalars."""
    sig = _sig(sig)
    check_prime(p)
    total = _size(sig, k, p, mode, samples, seed)
    cross = cross_check and mode == "exhaustive"
    parts = _run_chunks(_aut_chunk, sig, k, p, mode, total, seed, cross)
    minimal = np.concatenate([a for a, _, _ in parts])
    nontrivial = np.concatenate([b for _, b, _ in parts])
    exact = mode == "exhaustive"
    bad = int(nontrivial.sum())
    counts = {"total": total, "minimal": int(minimal.sum()), "minimal_nontrivial_aut": bad}
    if cross:
        counts["aut_algorithm_disagreements"] = sum(m for _, _, m in parts)
    bound = Fraction(1, p**k)
    frac = _fraction_entry(bad, total, exact)
    if exact:
        ok = Fraction(bad, total) < bound
        status = "exact fraction compared with the bound"
    else:
        ok = Fraction(frac["ci99"][1]) < bound
        status = "upper end of the 99% interval compared with the bound"
    if cross and counts["aut_algorithm_disagreements"]:
        ok, status = False, "automorphism algorithms disagree"
    if csv_path and exact:
        _write_csv(csv_path, ["index", "minimal", "nontrivial_aut"],
                   ([i, int(minimal[i]), int(nontrivial[i])] for i in range(total)))
    return CensusReport(
        "automorphisms",
        _params(sig, k, p, mode, samples, seed),
        counts,
        {"minimal_nontrivial_aut": frac, "minimal": _fraction_entry(int(minimal.sum()), total, exact)},
        {"upper_bound": str(bound), "scalar_group": scalar_group_of(sig, p)},
        {"claim": "minimal structures with non-scalar automorphisms are fewer than 1/p^k of all",
         "pass": bool(ok), "status": status},
    )


def scalar_group_of(sig: Signature, p: int) -> list[int]:
    return scalar_group(AlgebraStructure.zero(sig, 1, p))


# -- one-dimensional subalgebras --------------------------------------------


def one_dim_flags(sig: Signature, k: int, p: int, rows: np.ndarray) -> np.ndarray:
    """Vectorized test: does some line ``<v>`` satisfy ``op(v,..,v) in <v>`` for every op?"""
    rows = np.asarray(rows, dtype=np.int64)
    B = len(rows)
    pts = projective_points(k, p)
    lead = (pts != 0).argmax(axis=1)
    out = np.zeros(B, dtype=bool)
    ok_all = np.ones((B, len(pts)), dtype=bool)
    offset = 0
    for _, a in sig:
        size = k ** (a + 1)
        T = rows[:, offset:offset + size].reshape((B,) + (k,) * (a + 1))
        offset += size
        for j, v in enumerate(pts):
            w = T
            for _ in range(a):
                w = np.tensordot(w, v, axes=([1], [0])) % p
            # w has shape (B, k); parallel to v iff w - w[lead] * v == 0
            resid = (w - w[:, lead[j]][:, None] * v[None, :]) % p
            ok_all[:, j] &= ~resid.any(axis=1)
    out |= ok_all.any(axis=1)
    return out


def one_dim_subalgebra_census(sig, k: int, p: int, mode: str = "sampled", samples: int | None = None,
                              seed: int | None = None, cross_check: bool = True) -> CensusReport:
    sig = _sig(sig)
    check_prime(p)
    params = _params(sig, k, p, mode, samples, seed)
    if k == 1:
        return CensusReport("onedim", params, {"total": 0}, verdict={
            "claim": "share with a 1-dimensional subalgebra is about p^((1-|S|)(k-1))",
            "pass": True, "status": "k=1 is out of domain: the whole space is 1-dimensional"})
    total = _size(sig, k, p, mode, samples, seed)
    hits = 0
    disagreements = 0
    for c, start in enumerate(range(0, total, CHUNK)):
        count = min(CHUNK, total - start)
        rows = _structures(sig, k, p, mode, seed, c, count, start)
        flags = one_dim_flags(sig, k, p, rows)
        hits += int(flags.sum())
        if cross_check and mode == "exhaustive":
            for r, flat in enumerate(rows):
                if has_one_dim_subalgebra(AlgebraStructure.from_flat(sig, k, p, flat)) != flags[r]:
                    disagreements += 1
    exact = mode == "exhaustive"
    approx = Fraction(p) ** ((1 - len(sig)) * (k - 1))
    frac = _fraction_entry(hits, total, exact)
    ratio = Fraction(hits, total) / approx
    ok = Fraction(1, 2) <= ratio <= 2
    counts = {"total": total, "has_one_dim_subalgebra": hits}
    if cross_check and exact:
        counts["algorithm_disagreements"] = disagreements
        ok = ok and disagreements == 0
    return CensusReport(
        "onedim", params, counts, {"has_one_dim_subalgebra": frac},
        {"approximation": str(approx), "ratio_to_approximation": float(ratio)},
        {"claim": "share with a 1-dimensional subalgebra is about p^((1-|S|)(k-1))",
         "pass": bool(ok), "status": "informational, tolerance factor 2"},
    )


# -- isomorphism classes ----------------------------------------------------


def transport(A: AlgebraStructure, M) -> AlgebraStructure:
    """The structure ``(u..) -> M A(M^-1 u, ..)``, isomorphic to A via M."""
    Minv = mat_inverse(M, A.p)
    if Minv is None:
        raise ValueError("matrix is singular")
    M = np.asarray(M, dtype=np.int64)
    tensors = {n: A.transform(n, Minv) @ M.T % A.p for n in A.signature.names}
    return AlgebraStructure(A.p, A.k, A.signature, tensors)


def _flat_index(flat, p: int) -> int:
    out = 0
    for d in flat:
        out = out * p + int(d)
    return out


def class_count_prime_bound(d: int) -> float:
    return 3 + d + 4 * sqrt(d - 1)


@dataclass
class ClassCount:
    classes: int
    candidates: int
    representatives: list


def count_classes(sig: Signature, k: int, p: int, method: str = "orbits") -> ClassCount:
    """Isomorphism classes of minimal structures with only scalar automorphisms."""
    total = total_structures(sig, k, p)
    if total > EXHAUSTIVE_LIMIT:
        raise ValueError(f"{total} structures exceed the exhaustive limit 2^24")
    length = param_count(sig, k)
    good = []
    for i in range(total):
        A = AlgebraStructure.from_flat(sig, k, p, index_digits(i, length, p))
        if is_minimal(A) and automorphisms(A).is_scalar_only(A):
            good.append(A)
    reps = []
    if method == "orbits":
        gl = list(enumerate_gl(k, p))
        seen = set()
        for A in good:
            idx = _flat_index(A.flat(), p)
            if idx in seen:
                continue
            reps.append(A)
            for M in gl:
                seen.add(_flat_index(transport(A, M).flat(), p))
    elif method == "pairwise":
        for A in good:
            if not any(are_isomorphic(A, R) is not None for R in reps):
                reps.append(A)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ClassCount(len(reps), len(good), reps)


def isomorphism_class_count(d: int, k: int, p: int, method: str = "orbits") -> CensusReport:
    """Classes for the signature {binary, arity d} compared with ``p^(k^(d+1))``."""
    check_prime(p)
    sig = Signature((("m", 2), ("t", d)))
    res = count_classes(sig, k, p, method)
    bound = p ** (k ** (d + 1))
    hyp = p > class_count_prime_bound(d)
    verdict = {
        "claim": "isomorphism classes of minimal trivial-automorphism structures number at least p^(k^(d+1))",
        "pass": res.classes >= bound,
        "status": "count compared with the bound",
        "within_hypotheses": hyp,
    }
    notes = []
    if not hyp:
        notes.append(f"outside the prime-bound hypothesis: needs p > 3 + d + 4 sqrt(d-1) = {class_count_prime_bound(d):.4f}")
    return CensusReport(
        "isoclasses",
        {"signature": f"m:2,t:{d}", "d": d, "k": k, "p": p, "mode": "exhaustive", "method": method},
        {"total": total_structures(sig, k, p), "minimal_trivial_aut": res.candidates, "classes": res.classes},
        {},
        {"lower_bound": str(bound)},
        verdict,
        notes,
    )


# -- Hall's Eulerian count --------------------------------------------------


def named_group(name: str) -> list[np.ndarray]:
    name = name.lower().replace("(", "").replace(")", "").replace("_", "")
    if name in ("alt5", "a5"):
        return [permgroup.from_cycles(5, [0, 1, 2]), permgroup.from_cycles(5, [0, 1, 2, 3, 4])]
    if name in ("alt4", "a4"):
        return [permgroup.from_cycles(4, [0, 1, 2]), permgroup.from_cycles(4, [0, 1], [2, 3])]
    if name in ("c2", "cyclic2"):
        return [permgroup.from_cycles(2, [0, 1])]
    raise ValueError(f"unknown group {name!r}")


class _FiniteGroup:
    def __init__(self, gens):
        elems = sorted(permgroup.group_elements(gens, limit=1000))
        self.elements = [np.array(e) for e in elems]
        self.index = {e: i for i, e in enumerate(elems)}
        n = len(elems)
        self.table = np.empty((n, n), dtype=np.int64)
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                self.table[i, j] = self.index[tuple(permgroup.mul(a, b).tolist())]
        self.identity = self.index[tuple(range(len(elems[0])))]

    @property
    def order(self) -> int:
        return len(self.elements)

    def span(self, gens) -> set[int]:
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.table[x, g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen

    def extend(self, src, dst):
        """Homomorphism sending the pair ``src`` to ``dst``, as an element map, or None."""
        f = {self.identity: self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for s, d in zip(src, dst):
                    y = int(self.table[x, s])
                    fy = int(self.table[f[x], d])
                    if y in f:
                        if f[y] != fy:
                            return None
                    else:
                        f[y] = fy
                        nxt.append(y)
            frontier = nxt
        return f


def hall_eulerian_check(name: str) -> dict:
    """Generating pairs of a small group counted up to automorphisms."""
    G = _FiniteGroup(named_group(name))
    n = G.order
    pairs = [(a, b) for a in range(n) for b in range(n) if len(G.span((a, b))) == n]
    if not pairs:
        return {"group": name, "order": n, "generating_pairs": 0, "aut_order": None, "orbits": 0}
    base = pairs[0]
    autos = []
    for cand in pairs:
        f = G.extend(base, cand)
        if f is not None and len(set(f.values())) == n:
            autos.append(f)
    pair_index = {pr: i for i, pr in enumerate(pairs)}
    uf = permgroup.UnionFind(len(pairs))
    for f in autos:
        for i, (a, b) in enumerate(pairs):
            uf.union(i, pair_index[(f[a], f[b])])
    orbits = len({uf.find(i) for i in range(len(pairs))})
    return {"group": name, "order": n, "generating_pairs": len(pairs), "aut_order": len(autos), "orbits": orbits}
