"""Finite spectral certificates: the pair pattern, the Delta matrix, Heisenberg angles, SL_n generation."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd

import numpy as np

from . import permgroup
from .ffield import all_vectors, check_prime, sl_order
from .operad import Signature
from .tame import GammaGenerators, GroupWord, commutator, symbolic_composite


class PairClass(str, Enum):
    ABELIAN = "Abelian"
    HEISENBERG = "Heisenberg"


def _max_arity(sig) -> int:
    if isinstance(sig, int):
        return sig
    if isinstance(sig, str):
        sig = Signature.parse(sig)
    return sig.max_arity


def classify_pair(i: int, j: int, n: int, sig) -> PairClass:
    """Whether the root subgroups at positions i < j generate a Heisenberg group."""
    if not 0 <= i < j < n:
        raise ValueError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    ar = _max_arity(sig)
    if j - i == 1 or (i == 0 and (j == n - 1 or j <= ar)):
        return PairClass.HEISENBERG
    return PairClass.ABELIAN


def _check_shape(n: int, ar: int) -> None:
    if n <= max(ar, 2):
        raise ValueError(f"need n > max(max arity, 2), got n={n}, max arity={ar}")


def build_delta(n: int, sig, eps) -> np.ndarray:
    """Symmetric n x n matrix: 1 on the diagonal, -eps on Heisenberg pairs.

    Exact rationals give an object array of Fractions; floats give float64.
    """
    ar = _max_arity(sig)
    _check_shape(n, ar)
    exact = isinstance(eps, (Fraction, int))
    if exact:
        eps = Fraction(eps)
        M = np.empty((n, n), dtype=object)
        M[:] = Fraction(0)
        one = Fraction(1)
    else:
        eps = float(eps)
        M = np.zeros((n, n))
        one = 1.0
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    for i in range(n):
        M[i, i] = one
        for j in range(i + 1, n):
            if classify_pair(i, j, n, ar) is PairClass.HEISENBERG:
                M[i, j] = M[j, i] = -eps
    return M


def is_positive_definite(M) -> bool:
    """Exact test via symmetric Gaussian elimination over the rationals."""
    A = [[Fraction(x) for x in row] for row in np.asarray(M, dtype=object)]
    n = len(A)
    if any(len(r) != n for r in A):
        raise ValueError("matrix is not square")
    if any(A[i][j] != A[j][i] for i in range(n) for j in range(i)):
        raise ValueError("matrix is not symmetric")
    for k in range(n):
        piv = A[k][k]
        if piv <= 0:
            return False
        for i in range(k + 1, n):
            if A[i][k]:
                f = A[i][k] / piv
                for j in range(k + 1, n):
                    A[i][j] -= f * A[k][j]
    return True


def ldl(M) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact ``M = L diag(D) L^T`` without pivoting (raises on a zero pivot)."""
    A = [[Fraction(x) for x in row] for row in np.asarray(M, dtype=object)]
    n = len(A)
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    D = []
    for j in range(n):
        d = A[j][j] - sum(L[j][k] ** 2 * D[k] for k in range(j))
        if d == 0:
            raise ZeroDivisionError(f"zero pivot at {j}")
        D.append(d)
        for i in range(j + 1, n):
            L[i][j] = (A[i][j] - sum(L[i][k] * L[j][k] * D[k] for k in range(j))) / d
    return L, D


def min_eigenvalue(M) -> float:
    return float(np.linalg.eigvalsh(np.asarray(M, dtype=float))[0])


# -- Delta = circulant + remainder ------------------------------------------


def circulant_part(n: int, eps: float) -> np.ndarray:
    """2 eps on the diagonal, -eps between cyclic neighbours."""
    C = 2 * eps * np.eye(n)
    for i in range(n):
        C[i, (i + 1) % n] -= eps
        C[(i + 1) % n, i] -= eps
    return C


def remainder_spectrum(n: int, ar: int, eps: float) -> np.ndarray:
    """Closed-form eigenvalues of Delta minus its circulant part, ascending."""
    r = np.sqrt(ar - 1) * eps
    vals = [1 - 2 * eps] * (n - 2) + [1 - 2 * eps - r, 1 - 2 * eps + r]
    return np.sort(vals)


@dataclass
class SpectrumCheck:
    ok: bool
    computed: list
    expected: list
    max_error: float
    circulant_min_eigenvalue: float


def delta2_spectrum_check(n: int, sig, eps: float, tol: float = 1e-9) -> SpectrumCheck:
    ar = _max_arity(sig)
    _check_shape(n, ar)
    eps = float(eps)
    delta = build_delta(n, ar, eps)
    C = circulant_part(n, eps)
    got = np.linalg.eigvalsh(delta - C)
    want = remainder_spectrum(n, ar, eps)
    err = float(np.max(np.abs(got - want)))
    cmin = float(np.linalg.eigvalsh(C)[0])
    return SpectrumCheck(err <= tol and cmin >= -1e-12, got.tolist(), want.tolist(), err, cmin)


# -- exact epsilon brackets -------------------------------------------------


def below_sufficient_bound(eps: Fraction, ar: int) -> bool:
    """Exactly decide ``eps < 1/(2 + sqrt(ar-1))``."""
    if eps <= 0:
        return True
    t = 1 / eps - 2
    return t > 0 and t * t > ar - 1


def above_failure_bound(eps: Fraction, ar: int) -> bool:
    """Exactly decide ``eps > 1/max(2, sqrt(ar-1))``."""
    return eps > Fraction(1, 2) or (eps > 0 and eps * eps * (ar - 1) > 1)


def rational_below(ar: int, digits: int = 12) -> Fraction:
    """A rational within about 10^-digits below ``1/(2 + sqrt(ar-1))``."""
    scale = 10**digits
    eps = Fraction(int(1 / (2 + np.sqrt(ar - 1)) * scale), scale)
    while not below_sufficient_bound(eps, ar):
        eps -= Fraction(1, scale)
    return eps


def rational_above(ar: int, digits: int = 12) -> Fraction:
    """A rational within about 10^-digits above ``1/max(2, sqrt(ar-1))``."""
    scale = 10**digits
    eps = Fraction(int(1 / max(2.0, np.sqrt(ar - 1)) * scale) + 1, scale)
    while not above_failure_bound(eps, ar):
        eps += Fraction(1, scale)
    return eps


class BracketError(RuntimeError):
    """Positive definiteness contradicts one of the two proven bounds."""


def critical_epsilon(n: int, sig, tol: float = 1e-10) -> float:
    """Threshold where Delta stops being positive definite, by exact bisection."""
    if tol < 1e-12:
        raise ValueError("tol must be at least 1e-12")
    ar = _max_arity(sig)
    lo, hi = rational_below(ar), rational_above(ar)
    if not is_positive_definite(build_delta(n, ar, lo)):
        raise BracketError(f"not positive definite at {lo}, below the sufficient bound")
    if is_positive_definite(build_delta(n, ar, hi)):
        raise BracketError(f"positive definite at {hi}, above the failure bound")
    # limit_denominator keeps the midpoints small while staying strictly inside
    while hi - lo > tol:
        mid = ((lo + hi) / 2).limit_denominator(int(4 / tol))
        if not lo < mid < hi:
            mid = (lo + hi) / 2
        if is_positive_definite(build_delta(n, ar, mid)):
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


# -- pattern cross-check through symbolic commutators -----------------------


def root_generators(i: int, gens: GammaGenerators) -> list[str]:
    """Generator names spanning the root subgroup at position i."""
    if i == 0:
        return ["a1"] + [f"b:{name}" for name in gens.signature.names]
    return [f"a{i + 1}"]


def commute_symbolically(i: int, j: int, gens: GammaGenerators, cap: int | None = None) -> bool:
    """Whether every generator pair of the two root subgroups commutes up to degree ``cap``.

    The default cap is ``max(3, max arity)``, the largest degree a commutator
    of two generators can reach.
    """
    if cap is None:
        cap = max(3, gens.signature.max_arity)
    ident = [x for x in symbolic_composite(GroupWord(), gens, cap).endomorphism.images]
    for a in root_generators(i, gens):
        for b in root_generators(j, gens):
            w = commutator(GroupWord.gen(a), GroupWord.gen(b))
            if list(symbolic_composite(w, gens, cap).endomorphism.images) != ident:
                return False
    return True


# -- Heisenberg group angle -------------------------------------------------


def _null_space(M, tol: float = 1e-9) -> np.ndarray:
    _, s, vh = np.linalg.svd(M)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


@dataclass
class AngleResult:
    cosine: float
    fixed_dims: tuple[int, int]


def heisenberg_angle(p: int) -> AngleResult:
    """Friedrichs cosine between the fixed spaces of shift and modulation.

    Uses the p-dimensional irreducible representation of the Heisenberg
    group over Z/p on functions on Z/p.
    """
    check_prime(p)
    if p > 101:
        raise ValueError("p must be at most 101")
    shift = np.roll(np.eye(p), 1, axis=0)
    omega = np.exp(2j * np.pi / p)
    modulation = np.diag(omega ** np.arange(p))
    U = _null_space(shift - np.eye(p))
    V = _null_space(modulation - np.eye(p))
    s = np.linalg.svd(U.conj().T @ V, compute_uv=False)
    # the common part of the two spaces shows up as cosines equal to 1
    s = s[s < 1 - 1e-9]
    return AngleResult(float(s.max()) if s.size else 0.0, (U.shape[1], V.shape[1]))


# -- SL_n generation --------------------------------------------------------


def alpha_matrices(n: int, p: int, N: int = 1) -> list[np.ndarray]:
    """The linear generators reduced mod p, acting on column vectors."""
    check_prime(p)
    if gcd(N, p) != 1:
        raise ZeroDivisionError(f"1/{N} is undefined mod {p}")
    out = []
    for i in range(1, n):
        M = np.eye(n, dtype=np.int64)
        M[i - 1, i] = 1
        out.append(M)
    M = np.eye(n, dtype=np.int64)
    M[n - 1, 0] = pow(N, -1, p)
    out.append(M)
    return out


def matrix_permutations(mats, p: int) -> list[np.ndarray]:
    """Each matrix as a permutation of the nonzero vectors (lexicographic order)."""
    n = mats[0].shape[0]
    vecs = all_vectors(n, p)[1:]
    weights = p ** np.arange(n - 1, -1, -1)
    out = []
    for M in mats:
        img = vecs @ M.T % p
        out.append(img @ weights - 1)
    return out


@dataclass
class GenerationResult:
    order: int
    expected: int

    @property
    def ok(self) -> bool:
        return self.order == self.expected


def check_sl_generation(n: int, p: int, N: int = 1, seed: int = 0) -> GenerationResult:
    if p**n > 10**6:
        raise ValueError("p^n exceeds 10^6")
    perms = matrix_permutations(alpha_matrices(n, p, N), p)
    bsgs = permgroup.schreier_sims(perms, seed=seed)
    return GenerationResult(bsgs.order, sl_order(n, p))

