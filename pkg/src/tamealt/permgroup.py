"""Permutation group algorithms on {0, ..., m-1}.

A permutation is a numpy integer array ``g`` with ``g[x]`` the image of x.
Products are read left to right: ``mul(g, h)`` applies g first, then h.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import product
from math import factorial

import numpy as np

SCHREIER_SIMS_DEGREE_CAP = 5000


def identity(m: int) -> np.ndarray:
    return np.arange(m, dtype=np.int64)


def as_perm(images) -> np.ndarray:
    g = np.asarray(images, dtype=np.int64)
    if g.ndim != 1 or not np.array_equal(np.sort(g), np.arange(len(g))):
        raise ValueError("not a permutation")
    return g


def from_cycles(m: int, *cycles) -> np.ndarray:
    g = identity(m)
    for c in cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            g[a] = b
    return g


def mul(*perms) -> np.ndarray:
    out = perms[0]
    for h in perms[1:]:
        out = h[out]
    return out


def inverse(g) -> np.ndarray:
    inv = np.empty_like(g)
    inv[g] = np.arange(len(g), dtype=g.dtype)
    return inv


def power(g, e: int) -> np.ndarray:
    if e < 0:
        g, e = inverse(g), -e
    out = identity(len(g))
    base = g
    while e:
        if e & 1:
            out = mul(out, base)
        base = mul(base, base)
        e >>= 1
    return out


def is_identity(g) -> bool:
    return bool(np.array_equal(g, np.arange(len(g))))


def cycle_type(g) -> tuple[int, ...]:
    """Sorted (descending) cycle lengths, fixed points included."""
    g = np.asarray(g)
    seen = np.zeros(len(g), dtype=bool)
    lengths = []
    for x in range(len(g)):
        if seen[x]:
            continue
        n = 0
        y = x
        while not seen[y]:
            seen[y] = True
            y = g[y]
            n += 1
        lengths.append(n)
    return tuple(sorted(lengths, reverse=True))


def parity(g) -> int:
    """0 for even permutations, 1 for odd ones."""
    return sum(c - 1 for c in cycle_type(g)) % 2


def perm_order(g) -> int:
    from math import lcm

    out = 1
    for c in cycle_type(g):
        out = lcm(out, c)
    return out


def format_cycles(g) -> str:
    g = np.asarray(g)
    seen = set()
    out = []
    for i in range(len(g)):
        if i in seen or g[i] == i:
            continue
        cyc = [i]
        j = int(g[i])
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = int(g[j])
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


# -- orbits -----------------------------------------------------------------


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        x, y = self.find(x), self.find(y)
        if x != y:
            if y < x:
                x, y = y, x
            self.parent[y] = x


def orbits(perms, degree: int | None = None) -> list[list[int]]:
    """Orbits of the group generated by ``perms``, each sorted, ordered by least point."""
    perms = [np.asarray(g) for g in perms]
    if degree is None:
        degree = len(perms[0])
    uf = UnionFind(degree)
    for g in perms:
        for x, y in enumerate(g.tolist()):
            uf.union(x, y)
    groups: dict[int, list[int]] = {}
    for x in range(degree):
        groups.setdefault(uf.find(x), []).append(x)
    return sorted(groups.values(), key=lambda o: o[0])


def group_elements(perms, limit: int = 10**5) -> set[tuple]:
    """Brute-force closure of the generated group (for small oracle checks)."""
    perms = [np.asarray(g) for g in perms]
    m = len(perms[0])
    start = tuple(range(m))
    seen = {start}
    queue = deque([np.arange(m)])
    while queue:
        x = queue.popleft()
        for g in perms:
            y = g[x]
            key = tuple(y.tolist())
            if key not in seen:
                seen.add(key)
                if len(seen) > limit:
                    raise ValueError(f"group exceeds {limit} elements")
                queue.append(y)
    return seen


# -- Schreier-Sims ----------------------------------------------------------


class _Level:
    """One stabilizer-chain level: base point, generator indices, Schreier vector."""

    def __init__(self, point: int, degree: int):
        self.point = point
        self.gens: list[int] = []
        self.label = np.full(degree, -2, dtype=np.int64)
        self.label[point] = -1
        self.orbit = [point]


@dataclass
class BSGS:
    """Base and strong generating set with Schreier-vector transversals."""

    degree: int
    base: list[int]
    strong_gens: list[np.ndarray]
    levels: list = field(repr=False)
    _inv: list = field(repr=False)

    @property
    def orbit_lengths(self) -> list[int]:
        return [len(lv.orbit) for lv in self.levels]

    @property
    def order(self) -> int:
        out = 1
        for n in self.orbit_lengths:
            out *= n
        return out

    def basic_orbit(self, i: int) -> list[int]:
        return sorted(self.levels[i].orbit)

    def level_generators(self, i: int) -> list[np.ndarray]:
        return [self.strong_gens[j] for j in self.levels[i].gens]

    def coset_rep_inverse(self, i: int, point: int) -> np.ndarray:
        """Element mapping ``point`` to base point i, built from level i generators."""
        lv = self.levels[i]
        h = identity(self.degree)
        while lv.label[point] >= 0:
            ginv = self._inv[lv.label[point]]
            h = ginv[h]
            point = int(ginv[point])
        if lv.label[point] != -1:
            raise ValueError("point outside the basic orbit")
        return h

    def sift(self, g, start: int = 0) -> tuple[np.ndarray, int]:
        """Strip ``g`` through the chain; returns the residue and the level reached."""
        h = np.asarray(g)
        for i in range(start, len(self.levels)):
            lv = self.levels[i]
            b = int(h[lv.point])
            if lv.label[b] == -2:
                return h, i
            while lv.label[b] >= 0:
                ginv = self._inv[lv.label[b]]
                h = ginv[h]
                b = int(ginv[b])
        return h, len(self.levels)

    def contains(self, g) -> bool:
        h, i = self.sift(g)
        return i == len(self.levels) and is_identity(h)

    def fixes_base_prefix(self) -> bool:
        for i, lv in enumerate(self.levels):
            for j in lv.gens:
                if any(self.strong_gens[j][b] != b for b in self.base[:i]):
                    return False
        return True


class _Builder:
    def __init__(self, degree: int):
        self.m = degree
        self.gens: list[np.ndarray] = []
        self.inv: list[np.ndarray] = []
        self.levels: list[_Level] = []

    def bsgs(self) -> BSGS:
        return BSGS(self.m, [lv.point for lv in self.levels], self.gens, self.levels, self.inv)

    def _extend_orbit(self, lv: _Level, new_gen: int | None) -> None:
        m, i = self.m, len(self.levels)
        if new_gen is not None:
            lv.gens.append(new_gen)
        queue = []
        if new_gen is not None:
            g = self.gens[new_gen]
            pts = np.asarray(lv.orbit)
            imgs = g[pts]
            fresh = imgs[lv.label[imgs] == -2]
            for y in np.unique(fresh).tolist():
                lv.label[y] = new_gen
                lv.orbit.append(y)
                queue.append(y)
        else:
            queue = list(lv.orbit)
        gl = [(j, self.gens[j]) for j in lv.gens]
        while queue:
            x = queue.pop()
            for j, g in gl:
                y = int(g[x])
                if lv.label[y] == -2:
                    lv.label[y] = j
                    lv.orbit.append(y)
                    queue.append(y)

    def add(self, h: np.ndarray, depth: int) -> None:
        """Add residue ``h`` (fixing base[:depth]) as a strong generator."""
        j = len(self.gens)
        self.gens.append(h)
        self.inv.append(inverse(h))
        if depth == len(self.levels):
            moved = np.flatnonzero(h != np.arange(self.m))
            taken = {lv.point for lv in self.levels}
            point = int(next(x for x in moved if x not in taken))
            lv = _Level(point, self.m)
            if self.levels:
                prev = self.levels[-1]
                lv.gens = [g for g in prev.gens if self.gens[g][prev.point] == prev.point]
            self.levels.append(lv)
            lv.gens.append(j)
            self._extend_orbit(lv, None)
            depth -= 1
        for i in range(depth, -1, -1):
            lv = self.levels[i]
            if len(lv.orbit) == self.m - i:
                lv.gens.append(j)
            else:
                self._extend_orbit(lv, j)

    def sift(self, g, start: int = 0):
        return self.bsgs().sift(g, start)


def _random_elements(gens, rng, m: int):
    """Product replacement with an accumulator."""
    r = max(10, len(gens) + 2)
    pool = [gens[i % len(gens)].copy() for i in range(r)]
    acc = identity(m)

    def step():
        nonlocal acc
        s, t = rng.choice(r, size=2, replace=False)
        other = pool[t] if rng.random() < 0.5 else inverse(pool[t])
        pool[s] = mul(pool[s], other)
        acc = mul(acc, pool[s])
        return acc

    for _ in range(50):
        step()
    while True:
        yield step()


def schreier_sims(perms, degree: int | None = None, seed: int = 0, stable_rounds: int = 40,
                  order_bound: int | None = None, degree_cap: int = SCHREIER_SIMS_DEGREE_CAP) -> BSGS:
    """Base and strong generating set with exact order.

    A seeded random Schreier-Sims phase runs first.  The order of the
    resulting chain is always a lower bound for the group order; it is
    accepted outright when it reaches a valid upper bound (m! / 2 when every
    generator is even, m! otherwise, or ``order_bound`` if given).  Otherwise
    every Schreier generator is sifted deterministically until the chain is
    complete.
    """
    perms = [np.asarray(g, dtype=np.int64) for g in perms]
    if degree is None:
        if not perms:
            raise ValueError("degree needed for an empty generator list")
        degree = len(perms[0])
    if degree > degree_cap:
        raise ValueError(f"degree {degree} exceeds the Schreier-Sims cap {degree_cap}")
    b = _Builder(degree)
    gens = [g for g in perms if not is_identity(g)]
    if not gens:
        return b.bsgs()
    if order_bound is None:
        order_bound = factorial(degree) // (2 if all(parity(g) == 0 for g in gens) else 1)
    for g in gens:
        h, i = b.sift(g)
        if not is_identity(h):
            b.add(h, i)
    rng = np.random.default_rng(seed)
    quiet = 0
    for g in _random_elements(gens, rng, degree):
        if b.bsgs().order >= order_bound or quiet >= stable_rounds:
            break
        h, i = b.sift(g)
        if is_identity(h):
            quiet += 1
        else:
            quiet = 0
            b.add(h, i)
    if b.bsgs().order < order_bound:
        _verify(b)
    return b.bsgs()


def _verify(b: _Builder) -> None:
    """Sims' test: sift every Schreier generator, deepest level first."""
    i = len(b.levels) - 1
    while i >= 0:
        restart = None
        bs = b.bsgs()
        lv = b.levels[i]
        for beta in list(lv.orbit):
            u = inverse(bs.coset_rep_inverse(i, beta))
            for j in list(lv.gens):
                g = mul(u, b.gens[j])
                h, d = bs.sift(g, i)
                if d < len(b.levels) or not is_identity(h):
                    b.add(h, d)
                    restart = d if d < len(b.levels) else len(b.levels) - 1
                    break
            if restart is not None:
                break
        if restart is None:
            i -= 1
        else:
            i = max(restart, i)


# -- structure tests --------------------------------------------------------


def transitivity_degree(bsgs: BSGS, cap: int = 8) -> int:
    """Largest t <= cap such that the group is t-transitive (0 if intransitive)."""
    m = bsgs.degree
    t = 0
    lengths = bsgs.orbit_lengths
    while t < min(cap, m):
        if t < len(lengths):
            if lengths[t] != m - t:
                break
        elif m - t > 1:
            break
        t += 1
    return t


def recognize_alt_sym(bsgs: BSGS, generators) -> str:
    """'Sym', 'Alt' or 'Other', from the exact order and generator parities."""
    m = bsgs.degree
    order = bsgs.order
    if order == factorial(m):
        return "Sym"
    if order == factorial(m) // 2 and all(parity(g) == 0 for g in generators):
        return "Alt"
    return "Other"


# -- equivalence of labelled actions ----------------------------------------


@dataclass
class Equivalence:
    status: str  # "equivalent", "inequivalent" or "unknown"
    witness: np.ndarray | None = None
    reason: str = ""


def _words(labels, max_len):
    letters = [(l, 1) for l in labels] + [(l, -1) for l in labels]
    for n in range(1, max_len + 1):
        yield from product(letters, repeat=n)


def _eval_word(act, word):
    m = len(next(iter(act.values())))
    g = identity(m)
    for label, e in word:
        g = mul(g, act[label] if e == 1 else inverse(act[label]))
    return g


def cycle_type_refutation(actA: dict, actB: dict, max_len: int = 2):
    """A labelled word whose cycle types differ between the actions, or None."""
    for w in _words(sorted(actA), max_len):
        if cycle_type(_eval_word(actA, w)) != cycle_type(_eval_word(actB, w)):
            return w
    return None


def find_equivariant_bijection(actA: dict, actB: dict):
    """Backtracking search for f with f(g_A(x)) = g_B(f(x)) for every label g."""
    labels = sorted(actA)
    A = [np.asarray(actA[l]).tolist() for l in labels]
    B = [np.asarray(actB[l]).tolist() for l in labels]
    m = len(A[0])
    reps = [o[0] for o in orbits([np.asarray(g) for g in A], m)]
    f = [-1] * m
    used = [False] * m

    def propagate(x, y):
        assigned = []
        stack = [(x, y)]
        while stack:
            a, b = stack.pop()
            if f[a] != -1:
                if f[a] != b:
                    return assigned, False
                continue
            if used[b]:
                return assigned, False
            f[a] = b
            used[b] = True
            assigned.append(a)
            for ga, gb in zip(A, B):
                stack.append((ga[a], gb[b]))
        return assigned, True

    def undo(assigned):
        for a in assigned:
            used[f[a]] = False
            f[a] = -1

    def search(r):
        if r == len(reps):
            return True
        x = reps[r]
        for y in range(m):
            if used[y]:
                continue
            assigned, ok = propagate(x, y)
            if ok and search(r + 1):
                return True
            undo(assigned)
        return False

    return np.array(f) if search(0) else None


def actions_equivalent(actA: dict, actB: dict, method: str = "auto", max_word_len: int = 2,
                       exact_degree_cap: int = 200) -> Equivalence:
    """Decide whether two labelled permutation actions are isomorphic.

    ``method="auto"`` first looks for a word with different cycle types
    (sound refutation) and runs the exact search only up to
    ``exact_degree_cap``; ``method="exact"`` always runs the exact search.
    """
    if set(actA) != set(actB):
        raise ValueError("actions carry different generator labels")
    mA = len(next(iter(actA.values())))
    mB = len(next(iter(actB.values())))
    if mA != mB:
        return Equivalence("inequivalent", reason=f"degrees differ ({mA} vs {mB})")
    if method == "auto":
        w = cycle_type_refutation(actA, actB, max_word_len)
        if w is not None:
            word = " ".join(l if e == 1 else f"{l}^-1" for l, e in w)
            return Equivalence("inequivalent", reason=f"cycle types differ on word {word}")
        if mA > exact_degree_cap:
            return Equivalence("unknown", reason="cycle types agree; degree above the exact-search cap")
    elif method != "exact":
        raise ValueError(f"unknown method {method!r}")
    f = find_equivariant_bijection(actA, actB)
    if f is None:
        return Equivalence("inequivalent", reason="no equivariant bijection exists")
    return Equivalence("equivalent", witness=f)


def cycle_type_census(perms) -> Counter:
    return Counter(cycle_type(g) for g in perms)


def transitivity_lower_bound(perms, cap: int = 6, seed: int = 0, stable_rounds: int = 60) -> int:
    """Certified lower bound for the transitivity degree without a full chain.

    Random elements are sifted through the first ``cap`` levels only.  Each
    level's group is a subgroup of the true point stabilizer, so a full
    basic orbit at level i proves transitivity on the remaining points.
    """
    perms = [np.asarray(g, dtype=np.int64) for g in perms]
    m = len(perms[0])
    gens = [g for g in perms if not is_identity(g)]
    if not gens:
        return 0
    b = _Builder(m)
    target = min(cap, m)

    def full_prefix():
        t = 0
        for i, lv in enumerate(b.levels[:target]):
            if len(lv.orbit) != m - i:
                break
            t += 1
        if t == len(b.levels) and t < target and m - t == 1:
            t += 1
        return t

    def offer(g):
        h, i = _partial_sift(b, g, target)
        if i < target and not is_identity(h):
            b.add(h, i)
            return True
        return False

    for g in gens:
        offer(g)
    quiet = 0
    rng = np.random.default_rng(seed)
    for g in _random_elements(gens, rng, m):
        if full_prefix() >= target or quiet >= stable_rounds:
            break
        quiet = 0 if offer(g) else quiet + 1
    return full_prefix()


def _partial_sift(b: _Builder, g, depth: int):
    h = np.asarray(g)
    for i in range(min(depth, len(b.levels))):
        lv = b.levels[i]
        pt = int(h[lv.point])
        if lv.label[pt] == -2:
            return h, i
        while lv.label[pt] >= 0:
            ginv = b.inv[lv.label[pt]]
            h = ginv[h]
            pt = int(ginv[pt])
    return h, min(depth, len(b.levels))
