"""Arithmetic and linear algebra over the prime field GF(p).

Vectors and matrices are plain numpy int64 arrays whose entries are already
reduced mod p.  Moduli are capped at 2**16, so a product of two residues and
a row sum of up to 2**31 such products never overflow int64.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import comb

import numpy as np

MAX_MODULUS = 1 << 16
SUBSPACE_BUDGET = 10**7


@lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise ValueError(f"modulus {p!r} is not a prime")
    if p >= MAX_MODULUS:
        raise ValueError(f"modulus {p} exceeds the 2**16 cap")
    return int(p)


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, -1, p)


@dataclass(frozen=True)
class FieldElement:
    """A residue class mod a prime ``p``."""

    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError("moduli differ")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.p)

    def inverse(self) -> FieldElement:
        return FieldElement(inv_mod(self.value, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.value * inv_mod(o, self.p), self.p)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(pow(self.value, e, self.p), self.p)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


def as_matrix(M, p: int) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    if M.ndim != 2:
        raise ValueError("expected a 2-d array")
    return M % p


def rref(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p and the list of pivot columns."""
    check_prime(p)
    R = as_matrix(M, p).copy()
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        R[r] = (R[r] * inv_mod(int(R[r, c]), p)) % p
        col = R[:, c].copy()
        col[r] = 0
        nzr = np.flatnonzero(col)
        if nzr.size:
            R[nzr] = (R[nzr] - np.outer(col[nzr], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M, p: int) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(rref(M, p)[1])


def solve_linear(M, b, p: int):
    """Solve ``M x = b`` over GF(p).

    Returns ``(x, kernel)`` where ``kernel`` is a (dim, cols) array whose rows
    span the null space of ``M``, or ``None`` when the system is inconsistent.
    """
    check_prime(p)
    M = as_matrix(M, p)
    b = np.asarray(b, dtype=np.int64).reshape(-1) % p
    rows, cols = M.shape
    if b.shape[0] != rows:
        raise ValueError(f"dimension mismatch: matrix has {rows} rows, rhs has {b.shape[0]}")
    R, pivots = rref(np.hstack([M, b[:, None]]), p)
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = R[r, cols]
    free = [c for c in range(cols) if c not in pivots]
    kernel = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        kernel[i, f] = 1
        for r, c in enumerate(pivots):
            kernel[i, c] = (-R[r, f]) % p
    return x, kernel


def mat_inverse(M, p: int) -> np.ndarray | None:
    M = as_matrix(M, p)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("matrix is not square")
    R, pivots = rref(np.hstack([M, np.eye(n, dtype=np.int64)]), p)
    if pivots[:n] != list(range(n)):
        return None
    return R[:, n:].copy()


def in_span(basis_rref: np.ndarray, pivots: list[int], v, p: int) -> bool:
    """Membership of ``v`` in the row space of a matrix given in rref."""
    v = np.asarray(v, dtype=np.int64) % p
    for r, c in enumerate(pivots):
        if v[c]:
            v = (v - v[c] * basis_rref[r]) % p
    return not v.any()


def gaussian_binomial(k: int, d: int, p: int) -> int:
    """Number of ``d``-dimensional subspaces of GF(p)^k."""
    if not 0 <= d <= k:
        raise ValueError(f"need 0 <= d <= k, got d={d}, k={k}")
    num = 1
    den = 1
    for i in range(d):
        num *= p ** (k - i) - 1
        den *= p ** (i + 1) - 1
    q, r = divmod(num, den)
    assert r == 0
    return q


def gaussian_binomial_string_bound(k: int, d: int, p: int) -> int:
    """``binomial(k, d) * p**(d*(k-d))``, an upper bound for the subspace count."""
    return comb(k, d) * p ** (d * (k - d))


def enumerate_subspaces(k: int, d: int, p: int, budget: int = SUBSPACE_BUDGET):
    """Yield every d-dimensional subspace of GF(p)^k once, as its rref basis.

    Each yielded array has shape (d, k).
    """
    check_prime(p)
    if not 0 <= d <= k:
        raise ValueError(f"need 0 <= d <= k, got d={d}, k={k}")
    total = gaussian_binomial(k, d, p)
    if total > budget:
        raise ValueError(f"{total} subspaces exceed the enumeration budget {budget}")
    for pivots in combinations(range(k), d):
        pivset = set(pivots)
        free_slots = [(r, c) for r, pc in enumerate(pivots) for c in range(pc + 1, k) if c not in pivset]
        for values in product(range(p), repeat=len(free_slots)):
            B = np.zeros((d, k), dtype=np.int64)
            for r, pc in enumerate(pivots):
                B[r, pc] = 1
            for (r, c), v in zip(free_slots, values):
                B[r, c] = v
            yield B


def all_vectors(k: int, p: int) -> np.ndarray:
    """All of GF(p)^k as rows, in lexicographic order."""
    return np.array(list(product(range(p), repeat=k)), dtype=np.int64).reshape(-1, k)


def projective_points(k: int, p: int) -> np.ndarray:
    """One representative per line of GF(p)^k: first nonzero coordinate is 1."""
    vecs = all_vectors(k, p)[1:]
    first = vecs[np.arange(len(vecs)), (vecs != 0).argmax(axis=1)]
    return vecs[first == 1]


def gl_order(k: int, p: int) -> int:
    out = 1
    for i in range(k):
        out *= p**k - p**i
    return out


def sl_order(n: int, p: int) -> int:
    out = p ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        out *= p**i - 1
    return out


def enumerate_gl(k: int, p: int, budget: int = 10**6):
    """Yield every invertible k x k matrix over GF(p)."""
    if gl_order(k, p) > budget:
        raise ValueError(f"|GL_{k}(F_{p})| exceeds the budget {budget}")
    vecs = all_vectors(k, p)
    for rows in product(range(len(vecs)), repeat=k):
        M = vecs[list(rows)]
        if rank(M, p) == k:
            yield M
