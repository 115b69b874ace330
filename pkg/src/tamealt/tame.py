"""Transvections, generator words and their two semantics.

Conventions used throughout:

* ``t_i(f)`` is the automorphism ``x_i -> x_i + f`` of the free algebra on
  ``x_0..x_{n-1}`` (f must not involve ``x_i``).  On tuples of algebra
  elements it acts by ``a_i <- a_i + f(a)``.
* A word ``g1 g2 ... gm`` denotes the composite automorphism
  ``g1 o g2 o ... o gm``.  On tuples this is a right action: ``g1`` is
  applied first.
* ``[a, b] = a^-1 b^-1 a b``.  With this convention
  ``[t_0(F), t_m(g)] = t_0(-F|x_m -> g)`` whenever F is linear in ``x_m``
  and neither payload involves the other's index.
* The matrix of a linear word is the matrix ``M`` with ``a -> M a`` on
  tuples; row i holds the coefficients of the image of ``x_i``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .ffield import solve_linear
from .operad import (
    DEFAULT_DEGREE_CAP,
    Endomorphism,
    FreeElement,
    Signature,
    coefficient_mod,
    evaluate,
    is_leaf,
    substitute_checked,
)
from .permgroup import parity


@dataclass(frozen=True)
class Transvection:
    """``x_index -> x_index + payload``."""

    index: int
    payload: FreeElement

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("negative index")
        if self.index in self.payload.variables():
            raise ValueError(f"payload of t_{self.index} involves x{self.index}")

    def scaled(self, c) -> Transvection:
        return Transvection(self.index, self.payload * c)

    def endomorphism(self, n: int, cap: int | None = DEFAULT_DEGREE_CAP) -> Endomorphism:
        images = [FreeElement.var(i) for i in range(n)]
        images[self.index] = images[self.index] + (self.payload if cap is None else self.payload.truncate(cap))
        return Endomorphism(images, cap)

    def __str__(self):
        return f"t_{self.index}({self.payload})"


def _signature(sig) -> Signature:
    return sig if isinstance(sig, Signature) else Signature.parse(sig)


class GammaGenerators:
    """The generators ``a1..an`` and ``b:<op>`` on ``n`` variables.

    ``a{i}`` (1 <= i < n) is ``t_{i-1}(x_i)``, ``a{n}`` is ``t_{n-1}(x_0 / N)``
    and ``b:<op>`` is ``t_0(op(x_1, ..., x_r))``.
    """

    def __init__(self, n: int, signature, N: int = 1):
        sig = _signature(signature)
        if n <= max(sig.max_arity, 2):
            raise ValueError(f"need n > max(max arity, 2), got n={n}, max arity={sig.max_arity}")
        if N < 1:
            raise ValueError("N must be a positive integer")
        self.n = n
        self.N = N
        self.signature = sig
        gens = {}
        for i in range(1, n):
            gens[f"a{i}"] = Transvection(i - 1, FreeElement.var(i))
        gens[f"a{n}"] = Transvection(n - 1, FreeElement.var(0) * Fraction(1, N))
        for name, r in sig:
            gens[f"b:{name}"] = Transvection(0, FreeElement.of((name, *range(1, r + 1))))
        self.transvections = gens

    @property
    def names(self) -> list[str]:
        return list(self.transvections)

    @property
    def linear_names(self) -> list[str]:
        return [f"a{i}" for i in range(1, self.n + 1)]

    def __getitem__(self, name: str) -> Transvection:
        try:
            return self.transvections[name]
        except KeyError:
            raise ValueError(f"unknown generator {name!r}") from None

    def admissible_variables(self) -> range:
        """Variables allowed in payloads passed to :func:`transvection_word`."""
        return range(1, self.n - self.signature.max_arity)


# -- words ------------------------------------------------------------------

_TOKEN = re.compile(r"^([A-Za-z][\w:]*?)(?:\^(-?\d+))?$")


class GroupWord:
    """Freely reduced sequence of ``(generator name, nonzero exponent)``."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        out: list[tuple[str, int]] = []
        for name, e in letters:
            e = int(e)
            if out and out[-1][0] == name:
                e += out.pop()[1]
            if e:
                out.append((name, e))
        self.letters = tuple(out)

    @classmethod
    def gen(cls, name: str, e: int = 1) -> GroupWord:
        return cls([(name, e)])

    @classmethod
    def parse(cls, text: str) -> GroupWord:
        letters = []
        for tok in text.split():
            m = _TOKEN.match(tok)
            if not m:
                raise ValueError(f"bad word token {tok!r}")
            letters.append((m.group(1), int(m.group(2) or 1)))
        return cls(letters)

    def __str__(self):
        return " ".join(n if e == 1 else f"{n}^{e}" for n, e in self.letters)

    def __repr__(self):
        return f"GroupWord({str(self)!r})"

    def __len__(self):
        """Length in generators, counting exponents."""
        return sum(abs(e) for _, e in self.letters)

    def __eq__(self, other):
        return isinstance(other, GroupWord) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __add__(self, other: GroupWord) -> GroupWord:
        return GroupWord(self.letters + other.letters)

    def inverse(self) -> GroupWord:
        return GroupWord((n, -e) for n, e in reversed(self.letters))

    def __pow__(self, e: int) -> GroupWord:
        if e < 0:
            return self.inverse() ** (-e)
        out = GroupWord()
        for _ in range(e):
            out = out + self
        return out

    def check(self, gens: GammaGenerators) -> None:
        for name, _ in self.letters:
            gens[name]


def commutator(a: GroupWord, b: GroupWord) -> GroupWord:
    return a.inverse() + b.inverse() + a + b


def conjugate(w: GroupWord, x: GroupWord) -> GroupWord:
    """``w x w^-1``."""
    return w + x + w.inverse()


# -- numeric action on tuples -----------------------------------------------


def apply_transvection(t: Transvection, tuples, A, times: int = 1) -> np.ndarray:
    """Apply ``t^times`` to tuples of shape (..., n, k) over the algebra ``A``."""
    a = np.array(tuples, dtype=np.int64) % A.p
    n = a.shape[-2]
    if t.index >= n:
        raise ValueError(f"index {t.index} out of range for {n}-tuples")
    if len(t.payload.terms) == 1:
        (term, c), = t.payload.terms.items()
        if is_leaf(term):
            c = coefficient_mod(c * times, A.p)
            a[..., t.index, :] = (a[..., t.index, :] + c * a[..., term, :]) % A.p
            return a
    assignment = [a[..., j, :] for j in range(n)]
    val = evaluate(t.payload, assignment, A)
    a[..., t.index, :] = (a[..., t.index, :] + times * val) % A.p
    return a


def _linear_entries(t: Transvection):
    """``[(j, c), ...]`` when the payload is a combination of variables, else None."""
    if all(is_leaf(term) for term in t.payload.terms):
        return list(t.payload.terms.items())
    return None


def _linear_runs(w: GroupWord, gens: GammaGenerators):
    """Split a word into maximal runs of linear letters and single nonlinear letters.

    Yields ``("linear", [(i, j, c*e), ...])`` or ``("letter", (name, e))``.
    """
    cache: dict = {}
    run = []
    for name, e in w.letters:
        if name not in cache:
            cache[name] = _linear_entries(gens[name])
        entries = cache[name]
        if entries is None:
            if run:
                yield "linear", run
                run = []
            yield "letter", (name, e)
        else:
            i = gens[name].index
            run.extend((i, j, c * e) for j, c in entries)
    if run:
        yield "linear", run


def apply_word(w: GroupWord, gens: GammaGenerators, tuples, A) -> np.ndarray:
    a = np.array(tuples, dtype=np.int64) % A.p
    n = a.shape[-2]
    for kind, item in _linear_runs(w, gens):
        if kind == "letter":
            name, e = item
            a = apply_transvection(gens[name], a, A, e)
            continue
        # a run of row operations collapses to one matrix mod p
        M = np.eye(n, dtype=np.int64)
        for i, j, c in item:
            M[i] = (M[i] + coefficient_mod(c, A.p) * M[j]) % A.p
        a = np.einsum("ij,...jk->...ik", M, a) % A.p
    return a


# -- matrices of linear words -----------------------------------------------


def _frac_identity(n):
    M = np.empty((n, n), dtype=object)
    for i, j in product(range(n), repeat=2):
        M[i, j] = Fraction(int(i == j))
    return M


def transvection_matrix(t: Transvection, n: int, times: int = 1) -> np.ndarray:
    if t.payload.degree() not in (None, 1):
        raise ValueError("only linear transvections have a matrix")
    M = _frac_identity(n)
    for j, c in t.payload.terms.items():
        M[t.index, j] += times * c
    return M


def word_matrix(w: GroupWord, gens: GammaGenerators, p: int | None = None) -> np.ndarray:
    """Exact rational matrix of a linear word (reduced mod p if given)."""
    M = _frac_identity(gens.n)
    for name, e in w.letters:
        M = transvection_matrix(gens[name], gens.n, e).dot(M)
    if p is None:
        return M
    return np.vectorize(lambda c: coefficient_mod(c, p), otypes=[np.int64])(M)


def elementary_matrix(i: int, j: int, r, n: int) -> np.ndarray:
    M = _frac_identity(n)
    M[i, j] += Fraction(r)
    return M


# -- elementary words -------------------------------------------------------


def _cycle_step(i: int, r: int, gens: GammaGenerators) -> GroupWord:
    """``t_i(r x_{i+1 mod n})`` as a power of one generator."""
    n = gens.n
    if i < n - 1:
        return GroupWord.gen(f"a{i + 1}", r)
    return GroupWord.gen(f"a{n}", r * gens.N)


def elementary_word(i: int, j: int, r: int, gens: GammaGenerators) -> GroupWord:
    """Word equal to ``t_i(r x_j)``, built along the cycle of ``a`` generators.

    Uses ``t_i(r x_j) = [t_i(-r x_k), t_k(x_j)]`` with ``k = i+1 mod n``.
    """
    n = gens.n
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("index out of range")
    if i == j:
        raise ValueError("elementary word needs distinct indices")
    if isinstance(r, Fraction):
        if r.denominator != 1:
            raise ValueError("only integer coefficients are supported")
        r = r.numerator
    if int(r) != r:
        raise ValueError("only integer coefficients are supported")
    r = int(r)
    if r == 0:
        return GroupWord()
    k = (i + 1) % n
    if k == j:
        return _cycle_step(i, r, gens)
    return commutator(_cycle_step(i, -r, gens), elementary_word(k, j, 1, gens))


def signed_swap_word(a: int, b: int, gens: GammaGenerators) -> GroupWord:
    """``t_a(x_b) t_b(-x_a) t_a(x_b)``: images ``x_a -> x_b``, ``x_b -> -x_a``."""
    e = elementary_word(a, b, 1, gens)
    return e + elementary_word(b, a, -1, gens) + e


def signed_permutation(M) -> tuple[list[int], list[int]]:
    """Decode a signed permutation matrix into (sigma, signs): row m is ``signs[m] e_sigma(m)``."""
    n = M.shape[0]
    sigma, signs = [], []
    for m in range(n):
        nz = [j for j in range(n) if M[m, j] != 0]
        if len(nz) != 1 or abs(M[m, nz[0]]) != 1:
            raise ValueError("not a signed permutation matrix")
        sigma.append(nz[0])
        signs.append(int(M[m, nz[0]]))
    return sigma, signs


def _transpositions(sigma) -> list[tuple[int, int]]:
    """Transpositions whose composite (rightmost applied first) is ``sigma``."""
    out = []
    seen = set()
    for start in range(len(sigma)):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        j = sigma[start]
        while j != start:
            cyc.append(j)
            seen.add(j)
            j = sigma[j]
        # (c0 c1 ... cl) = (c0 cl) o ... o (c0 c1)
        out.extend((cyc[0], c) for c in reversed(cyc[1:]))
    return out


def signed_permutation_word(sigma, signs, gens: GammaGenerators) -> GroupWord:
    """Word with images ``x_m -> signs[m] x_sigma(m)``.

    Such a linear map has determinant ``sign(sigma) * prod(signs)``, which
    must be 1.
    """
    n = gens.n
    sigma = [int(s) for s in sigma]
    if sorted(sigma) != list(range(n)):
        raise ValueError("not a permutation of the variables")
    if any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be +1 or -1")
    if (-1) ** parity(np.array(sigma)) * int(np.prod(signs)) != 1:
        raise ValueError("signed permutation has determinant -1")
    w = GroupWord()
    for a, b in _transpositions(sigma):
        w = w + signed_swap_word(a, b, gens)
    got_sigma, got_signs = signed_permutation(word_matrix(w, gens))
    assert got_sigma == sigma
    flip = [sigma[m] for m in range(n) if got_signs[m] != signs[m]]
    fix = GroupWord()
    for a, b in zip(flip[::2], flip[1::2]):
        fix = fix + signed_swap_word(a, b, gens) ** 2
    return fix + w


def permutation_word(sigma, gens: GammaGenerators) -> GroupWord:
    """Word with images ``x_m -> x_sigma(m)`` for an even permutation ``sigma``.

    Conjugating by it moves transvections: ``w t_i(f) w^-1 = t_sigma(i)(sigma f)``.
    """
    if parity(np.array(sigma)):
        raise ValueError("permutation is odd")
    return signed_permutation_word(sigma, [1] * gens.n, gens)


# -- constructive transvection words ----------------------------------------


def _placing_permutation(n: int, moves: dict[int, int], protected: set[int]):
    """Complete ``moves`` to a signed permutation of determinant 1.

    Returns ``(sigma, signs, sign)`` where ``sign`` is the product of the
    signs on ``protected``.
    """
    sigma = [-1] * n
    for s, t in moves.items():
        sigma[s] = t
    free_src = [m for m in range(n) if sigma[m] == -1]
    free_dst = sorted(set(range(n)) - set(moves.values()))
    for s, t in zip(free_src, free_dst):
        sigma[s] = t
    signs = [1] * n
    if parity(np.array(sigma)):
        spare = [m for m in range(n) if m not in protected]
        signs[spare[0] if spare else min(protected)] = -1
    sign = int(np.prod([signs[m] for m in protected]))
    return sigma, signs, sign


def _check_payload(f: FreeElement, gens: GammaGenerators) -> None:
    allowed = set(gens.admissible_variables())
    bad = f.variables() - allowed
    if bad:
        raise ValueError(f"variables {sorted(bad)} outside the admissible range x1..x{max(allowed, default=0)}")
    if not f.is_integral():
        raise ValueError("only integer coefficients are supported")
    for t in f.terms:
        _check_ops(t, gens.signature)


def _check_ops(t, sig: Signature) -> None:
    if is_leaf(t):
        return
    if len(t) - 1 != sig.arity(t[0]):
        raise ValueError(f"operation {t[0]} has the wrong number of inputs")
    for c in t[1:]:
        _check_ops(c, sig)


def _max_var(t) -> int:
    if is_leaf(t):
        return t
    return max(_max_var(c) for c in t[1:])


def _term_word(t, gens: GammaGenerators, memo: dict) -> GroupWord:
    """Word equal to ``t_0(t)`` for a single term ``t`` avoiding ``x_0``."""
    if t in memo:
        return memo[t]
    n = gens.n
    if is_leaf(t):
        w = elementary_word(0, t, 1, gens)
    else:
        name, children = t[0], t[1:]
        r = len(children)
        ell = _max_var(t)
        if ell + r >= n:
            raise ValueError(f"not enough variables to place {r} inputs above x{ell}")
        # t_0(name(x_{ell+1}, ..., x_{ell+r})) from the generator b:name
        sigma, signs, sign = _placing_permutation(
            n, {0: 0, **{m: ell + m for m in range(1, r + 1)}}, set(range(r + 1))
        )
        beta = conjugate(signed_permutation_word(sigma, signs, gens), GroupWord.gen(f"b:{name}"))
        w = beta if sign == 1 else beta.inverse()
        for j, child in enumerate(children, start=1):
            m = ell + j
            # t_m(-child) from t_0(-child) moved by the signed swap x_0 -> x_m
            gamma = conjugate(signed_swap_word(0, m, gens), _term_word(child, gens, memo).inverse())
            w = commutator(w, gamma)
    memo[t] = w
    return w


def transvection_word(f: FreeElement, gens: GammaGenerators) -> GroupWord:
    """Word in the generators equal to ``t_0(f)``.

    ``f`` must have integer coefficients and use only the admissible
    variables ``x_1 .. x_{n-1-max arity}``.  Each term ``op(T_1..T_r)`` is
    reached as an iterated commutator of a relocated ``b:op`` with
    relocated words for the ``t(-T_j)``; sums and integer multiples become
    products and powers of the commuting ``t_0`` words.
    """
    _check_payload(f, gens)
    memo: dict = {}
    w = GroupWord()
    for t, c in f.items():
        w = w + _term_word(t, gens, memo) ** int(c)
    return w


# -- symbolic verification --------------------------------------------------


@dataclass
class SymbolicComposite:
    endomorphism: Endomorphism
    truncated: bool


def symbolic_composite(w: GroupWord, gens: GammaGenerators, cap: int | None = DEFAULT_DEGREE_CAP) -> SymbolicComposite:
    """Compose the word's transvections as endomorphisms truncated at ``cap``.

    Truncation is exact below the cap because substitution never lowers
    degree.  ``truncated`` records whether any term was discarded.
    """
    n = gens.n
    images = [FreeElement.var(i) for i in range(n)]
    dropped = False
    for kind, item in _linear_runs(w, gens):
        if kind == "letter":
            name, e = item
            t = gens[name]
            payload, d = substitute_checked(Endomorphism(images, cap), t.payload, cap)
            dropped |= d
            images[t.index] = images[t.index].add_scaled(payload, e)
            continue
        M = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
        for i, j, c in item:
            M[i] = [x + c * y for x, y in zip(M[i], M[j])]
        new = []
        for r in range(n):
            img = FreeElement.zero()
            for c, coef in enumerate(M[r]):
                if coef:
                    img = img.add_scaled(images[c], coef)
            new.append(img)
        images = new
    return SymbolicComposite(Endomorphism(images, cap), dropped)


def verify_word_symbolic(w: GroupWord, expected: Transvection, gens: GammaGenerators, cap: int | None = None) -> bool:
    """Whether ``w`` maps every variable as ``expected`` does, up to degree ``cap``.

    ``cap=None`` uses the degree of the expected payload.
    """
    deg = expected.payload.degree() or 1
    if cap is None:
        cap = deg
    if cap < deg:
        raise ValueError(f"degree cap {cap} is below the payload degree {deg}")
    comp = symbolic_composite(w, gens, cap)
    target = expected.endomorphism(gens.n, cap)
    return comp.endomorphism.images == target.images


# -- interpolation in one variable ------------------------------------------


class NoSolutionError(ValueError):
    """No one-variable element up to the degree cap meets the targets."""


@dataclass
class CRTSolution:
    element: FreeElement
    degree: int


def crt_solve(A, points, targets, max_degree: int = 8) -> CRTSolution:
    """One-variable ``v`` with ``v(points[i]) = targets[i]`` in ``A``.

    For each degree the span of values of all terms of that exact degree is
    built from products of lower-degree spans; the target is then solved
    against all spans up to the current degree.
    """
    p, k = A.p, A.k
    pts = np.asarray(points, dtype=np.int64).reshape(-1, k) % p
    tgt = np.asarray(targets, dtype=np.int64).reshape(-1, k) % p
    if pts.shape != tgt.shape:
        raise ValueError("points and targets differ in number")
    m = len(pts)
    rhs = tgt.reshape(-1)
    levels: dict[int, list[tuple[np.ndarray, object]]] = {1: [(pts, 0)]}
    columns: list[np.ndarray] = []
    witnesses: list = []

    def absorb(d):
        for val, term in levels[d]:
            columns.append(val.reshape(-1))
            witnesses.append(term)

    for D in range(1, max_degree + 1):
        if D > 1:
            ech = _SpanBasis(m * k, p)
            found = []
            for name, r in A.signature:
                for split in _compositions(D, r):
                    if any(s not in levels for s in split):
                        continue
                    for choice in product(*(levels[s] for s in split)):
                        val = A.apply(name, *(c[0] for c in choice))
                        if ech.add(val.reshape(-1)):
                            found.append((val, (name, *(c[1] for c in choice))))
            if found:
                levels[D] = found
        if D in levels:
            absorb(D)
        if not columns:
            continue
        sol = solve_linear(np.stack(columns, axis=1), rhs, p)
        if sol is not None:
            x = sol[0]
            v = FreeElement({t: int(c) for t, c in zip(witnesses, x) if c})
            check = evaluate(v, [pts], A) if v else np.zeros_like(pts)
            if not np.array_equal(check % p, tgt):
                raise AssertionError("interpolant failed re-evaluation")
            return CRTSolution(v, v.degree() or 0)
    raise NoSolutionError(f"no solution of degree <= {max_degree}")


def _compositions(total: int, parts: int):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


class _SpanBasis:
    def __init__(self, dim: int, p: int):
        self.p = p
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def add(self, v) -> bool:
        v = np.asarray(v, dtype=np.int64) % self.p
        for row, c in zip(self.rows, self.pivots):
            if v[c]:
                v = (v - v[c] * row) % self.p
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        c = int(nz[0])
        v = v * pow(int(v[c]), -1, self.p) % self.p
        self.rows.append(v)
        self.pivots.append(c)
        return True
