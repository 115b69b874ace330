"""Permutation actions of generator words on A^n and on A^n minus zero modulo Aut(A).

Tuples in A^n (an n x k array over GF(p)) are encoded as integers by reading
the n*k entries as big-endian base-p digits.  The representative of an
Aut(A)-orbit is its least code, which is also the lexicographically least
tuple.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import permgroup
from .algebra import AlgebraStructure, AutGroup, aut_orbit_counts, automorphisms
from .ffield import all_vectors
from .tame import GammaGenerators, GroupWord, Transvection, apply_transvection

OMEGA_BUDGET = 10**7
FULL_CHECK_LIMIT = 10**5


def encode(tuples, p: int) -> np.ndarray:
    a = np.asarray(tuples, dtype=np.int64)
    flat = a.reshape(a.shape[:-2] + (-1,))
    weights = p ** np.arange(flat.shape[-1] - 1, -1, -1, dtype=np.int64)
    return flat @ weights


def decode(codes, n: int, k: int, p: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    digits = np.empty(codes.shape + (n * k,), dtype=np.int64)
    rest = codes.copy()
    for j in range(n * k - 1, -1, -1):
        rest, digits[..., j] = np.divmod(rest, p)
    return digits.reshape(codes.shape + (n, k))


def _vector_table(M, k: int, p: int) -> np.ndarray:
    """Code of ``M v`` for every v in GF(p)^k, indexed by the code of v."""
    vecs = all_vectors(k, p)
    return encode((vecs @ np.asarray(M).T % p)[:, None, :], p)


@dataclass
class OmegaIndex:
    """Orbits of Aut(A) on the nonzero tuples of A^n."""

    p: int
    k: int
    n: int
    representatives: np.ndarray  # sorted codes
    orbit_id: np.ndarray = field(repr=False)  # code -> id, -1 for zero
    aut: AutGroup = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.representatives)

    def __len__(self):
        return self.size

    def ids(self, tuples) -> np.ndarray:
        return self.orbit_id[encode(tuples, self.p)]

    def representative_tuples(self) -> np.ndarray:
        return decode(self.representatives, self.n, self.k, self.p)

    def orbit_sizes(self) -> np.ndarray:
        return np.bincount(self.orbit_id[self.orbit_id >= 0], minlength=self.size)


def build_omega(A: AlgebraStructure, n: int, aut: AutGroup | None = None, budget: int = OMEGA_BUDGET) -> OmegaIndex:
    p, k = A.p, A.k
    total = p ** (n * k)
    if total > budget:
        raise ValueError(f"A^n has {total} points, above the budget {budget}")
    if aut is None:
        aut = automorphisms(A)
    codes = np.arange(total, dtype=np.int64)
    block = p**k
    digits = []
    rest = codes.copy()
    for _ in range(n):
        rest, d = np.divmod(rest, block)
        digits.append(d)
    digits.reverse()
    weights = [block ** (n - 1 - j) for j in range(n)]
    rep = codes.copy()
    for M in aut.matrices:
        table = _vector_table(M, k, p)
        img = sum(table[d] * w for d, w in zip(digits, weights))
        np.minimum(rep, img, out=rep)
    reps = np.unique(rep[1:])
    orbit_id = np.full(total, -1, dtype=np.int64)
    orbit_id[1:] = np.searchsorted(reps, rep[1:])
    return OmegaIndex(p, k, n, reps, orbit_id, aut)


# -- permutation images -----------------------------------------------------


class WellDefinednessError(RuntimeError):
    """A generator does not commute with Aut(A) on the sampled tuples."""


def tuple_permutation(t: Transvection, A: AlgebraStructure, n: int, times: int = 1) -> np.ndarray:
    """Permutation of all of A^n (by code) induced by ``t^times``."""
    total = A.p ** (n * A.k)
    if total > OMEGA_BUDGET:
        raise ValueError(f"A^n has {total} points, above the budget {OMEGA_BUDGET}")
    tuples = decode(np.arange(total), n, A.k, A.p)
    return encode(apply_transvection(t, tuples, A, times), A.p)


def generator_permutation(t: Transvection, omega: OmegaIndex, A: AlgebraStructure, check: bool = True,
                          seed: int = 0) -> np.ndarray:
    """Permutation of the orbit ids induced by a transvection.

    With ``check`` the image id is compared between a tuple and its orbit
    representative, on every nonzero tuple when there are at most 10^5 of
    them and on 1000 random ones otherwise.
    """
    if any(c.denominator % A.p == 0 for c in t.payload.terms.values()):
        raise ZeroDivisionError(f"payload denominator divisible by p={A.p}")
    reps = omega.representative_tuples()
    perm = omega.ids(apply_transvection(t, reps, A))
    if check:
        total = A.p ** (omega.n * A.k)
        if total - 1 <= FULL_CHECK_LIMIT:
            sample = np.arange(1, total)
        else:
            sample = np.random.default_rng(seed).integers(1, total, size=1000)
        tup = decode(sample, omega.n, A.k, A.p)
        got = omega.ids(apply_transvection(t, tup, A))
        want = perm[omega.orbit_id[sample]]
        if not np.array_equal(got, want):
            bad = int(sample[np.flatnonzero(got != want)[0]])
            raise WellDefinednessError(f"action is not well defined on orbits (tuple code {bad})")
    if not np.array_equal(np.sort(perm), np.arange(omega.size)):
        raise WellDefinednessError("induced map is not a bijection")
    return perm


def action_bundle(A: AlgebraStructure, gens: GammaGenerators, omega: OmegaIndex | None = None,
                  check: bool = True) -> dict[str, np.ndarray]:
    """Generator name -> permutation of the orbit ids."""
    if omega is None:
        omega = build_omega(A, gens.n)
    return {name: generator_permutation(gens[name], omega, A, check) for name in gens.names}


def word_permutation(w: GroupWord, bundle: dict[str, np.ndarray]) -> np.ndarray:
    """Permutation of a word; letters act left to right."""
    m = len(next(iter(bundle.values())))
    out = permgroup.identity(m)
    for name, e in w.letters:
        if name not in bundle:
            raise ValueError(f"unknown generator {name!r}")
        out = permgroup.mul(out, permgroup.power(bundle[name], e))
    return out


def tuple_orbits(A: AlgebraStructure, gens: GammaGenerators) -> list[list[int]]:
    """Orbits (as code lists) of the generators on all of A^n."""
    perms = [tuple_permutation(gens[name], A, gens.n) for name in gens.names]
    return permgroup.orbits(perms)


def bundle_to_json(bundle: dict[str, np.ndarray]) -> str:
    degree = len(next(iter(bundle.values())))
    return json.dumps({"degree": degree, "generators": {k: v.tolist() for k, v in bundle.items()}})


def bundle_from_json(text: str) -> dict[str, np.ndarray]:
    data = json.loads(text)
    out = {k: permgroup.as_perm(v) for k, v in data["generators"].items()}
    if any(len(v) != data["degree"] for v in out.values()):
        raise ValueError("generator length differs from the declared degree")
    return out


# -- the full pipeline ------------------------------------------------------


@dataclass
class ActionReport:
    degree: int
    aut_order: int
    aut_orbits_nonzero: int
    order: int
    image: str
    transitivity: int
    generator_orders: dict
    generator_parities: dict
    orbit_count: int

    def summary(self) -> dict:
        return {
            "degree": self.degree,
            "aut_order": self.aut_order,
            "aut_orbits_on_A_minus_zero": self.aut_orbits_nonzero,
            "order": str(self.order),
            "order_is_half_factorial": self.order == factorial(self.degree) // 2,
            "order_is_factorial": self.order == factorial(self.degree),
            "image": self.image,
            "transitivity_degree": self.transitivity,
            "generator_orders": self.generator_orders,
            "generator_parities": self.generator_parities,
            "orbit_count": self.orbit_count,
        }


def analyze_action(A: AlgebraStructure, gens: GammaGenerators, transitivity_cap: int = 6, seed: int = 0):
    """Build the orbit-id action, its BSGS and the structural verdicts."""
    aut = automorphisms(A)
    omega = build_omega(A, gens.n, aut)
    bundle = action_bundle(A, gens, omega)
    perms = list(bundle.values())
    bsgs = permgroup.schreier_sims(perms, omega.size, seed=seed)
    report = ActionReport(
        degree=omega.size,
        aut_order=aut.order,
        aut_orbits_nonzero=aut_orbit_counts(A, aut)["on_A_minus_zero"],
        order=bsgs.order,
        image=permgroup.recognize_alt_sym(bsgs, perms),
        transitivity=permgroup.transitivity_degree(bsgs, transitivity_cap),
        generator_orders={k: permgroup.perm_order(v) for k, v in bundle.items()},
        generator_parities={k: permgroup.parity(v) for k, v in bundle.items()},
        orbit_count=len(permgroup.orbits(perms, omega.size)),
    )
    return report, bundle, bsgs
