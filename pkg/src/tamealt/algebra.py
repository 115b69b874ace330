"""Algebra structures on GF(p)^k for a free-operad signature.

A structure is one tensor per operation.  For an operation of arity r the
tensor has shape ``(k,)*r + (k,)``: ``T[i1, ..., ir]`` is the vector
``op(e_i1, ..., e_ir)``.

Random structures are drawn with numpy's PCG64 generator seeded through
``SeedSequence``.  The byte protocol is: for ``seed`` (an int or a list of
ints) build ``numpy.random.default_rng(seed)`` and draw, in signature order,
``integers(0, p, size=k**(r+1), dtype=int64)`` per tensor, reshaped in C
order.  A batch of ``count`` structures is one draw of shape
``(count, param_count)`` from ``default_rng([seed, chunk])``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .ffield import (
    all_vectors,
    check_prime,
    enumerate_gl,
    enumerate_subspaces,
    mat_inverse,
    projective_points,
    rank,
    rref,
)
from .operad import FreeElement, Signature, Term


class NonMinimalError(ValueError):
    """A fast path that needs a cyclic generator was handed a non-minimal algebra."""


def param_count(sig: Signature, k: int) -> int:
    return sum(k ** (a + 1) for _, a in sig)


@dataclass(frozen=True, eq=False)
class AlgebraStructure:
    p: int
    k: int
    signature: Signature
    tensors: dict

    def __post_init__(self):
        check_prime(self.p)
        if self.k < 1:
            raise ValueError("dimension must be positive")
        fixed = {}
        for name, a in self.signature:
            if name not in self.tensors:
                raise ValueError(f"missing tensor for {name!r}")
            T = np.asarray(self.tensors[name], dtype=np.int64) % self.p
            if T.shape != (self.k,) * (a + 1):
                raise ValueError(f"tensor {name!r} has shape {T.shape}, expected {(self.k,) * (a + 1)}")
            T.setflags(write=False)
            fixed[name] = T
        if set(self.tensors) != set(fixed):
            raise ValueError("tensors for operations outside the signature")
        object.__setattr__(self, "tensors", fixed)

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, sig: Signature, k: int, p: int) -> AlgebraStructure:
        return cls(p, k, sig, {n: np.zeros((k,) * (a + 1), dtype=np.int64) for n, a in sig})

    @classmethod
    def from_flat(cls, sig: Signature, k: int, p: int, flat) -> AlgebraStructure:
        flat = np.asarray(flat, dtype=np.int64)
        if flat.shape != (param_count(sig, k),):
            raise ValueError("wrong number of structure parameters")
        tensors = {}
        pos = 0
        for name, a in sig:
            size = k ** (a + 1)
            tensors[name] = flat[pos:pos + size].reshape((k,) * (a + 1))
            pos += size
        return cls(p, k, sig, tensors)

    @classmethod
    def from_index(cls, sig: Signature, k: int, p: int, index: int) -> AlgebraStructure:
        """Structure number ``index`` in the exhaustive (big-endian base p) order."""
        return cls.from_flat(sig, k, p, index_digits(index, param_count(sig, k), p))

    @classmethod
    def from_constants(cls, sig: Signature, p: int, constants) -> AlgebraStructure:
        """One-dimensional structure with ``op(x, ..., y) = c * x * ... * y``."""
        return cls(p, 1, sig, {n: np.full((1,) * (a + 1), c) for (n, a), c in zip(sig, constants)})

    def flat(self) -> np.ndarray:
        return np.concatenate([self.tensors[n].reshape(-1) for n in self.signature.names])

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraStructure)
            and (self.p, self.k, self.signature) == (other.p, other.k, other.signature)
            and np.array_equal(self.flat(), other.flat())
        )

    def __hash__(self):
        return hash((self.p, self.k, self.signature, self.flat().tobytes()))

    def __repr__(self):
        return f"AlgebraStructure(p={self.p}, k={self.k}, sig={self.signature.ops}, flat={self.flat().tolist()})"

    # evaluation -----------------------------------------------------------

    def apply(self, name: str, *vecs) -> np.ndarray:
        """``op(v1, ..., vr)``; the vectors may carry matching batch dimensions."""
        T = self.tensors[name]
        r = T.ndim - 1
        if len(vecs) != r:
            raise ValueError(f"{name} takes {r} arguments, got {len(vecs)}")
        p, k = self.p, self.k
        vecs = [np.asarray(v, dtype=np.int64) for v in vecs]
        if all(v.ndim == 1 for v in vecs):
            out = T.reshape(k, -1)
            for v in vecs[:-1]:
                out = (v @ out % p).reshape(k, -1)
            return vecs[-1] @ out % p
        batch = np.broadcast_shapes(*(v.shape[:-1] for v in vecs))
        vecs = [np.broadcast_to(v, batch + (k,)) for v in vecs]
        out = np.tensordot(vecs[0], T, axes=([-1], [0])) % p
        nb = len(batch)
        for j, v in enumerate(vecs[1:], start=1):
            out = (out * v.reshape(batch + (k,) + (1,) * (r - j))).sum(axis=nb) % p
        return out

    def transform(self, name: str, M) -> np.ndarray:
        """Tensor of ``(u1..ur) -> op(M u1, ..., M ur)``."""
        R = self.tensors[name]
        M = np.asarray(M, dtype=np.int64)
        for a in range(R.ndim - 1):
            R = np.moveaxis(np.tensordot(R, M, axes=([a], [0])) % self.p, -1, a)
        return R

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "signature": self.signature.to_json(),
            "tensors": {n: self.tensors[n].tolist() for n in self.signature.names},
        }

    @classmethod
    def from_json(cls, data) -> AlgebraStructure:
        if isinstance(data, str):
            data = json.loads(data)
        sig = Signature.from_json(data["signature"])
        return cls(int(data["p"]), int(data["k"]), sig, {n: np.asarray(v) for n, v in data["tensors"].items()})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


def index_digits(index: int, length: int, p: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.int64)
    for j in range(length - 1, -1, -1):
        index, out[j] = divmod(index, p)
    if index:
        raise ValueError("index out of range")
    return out


def random_structure(sig: Signature, k: int, p: int, seed) -> AlgebraStructure:
    rng = np.random.default_rng(seed)
    tensors = {n: rng.integers(0, p, size=k ** (a + 1), dtype=np.int64).reshape((k,) * (a + 1)) for n, a in sig}
    return AlgebraStructure(p, k, sig, tensors)


def random_flat_batch(sig: Signature, k: int, p: int, seed, chunk: int, count: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed), int(chunk)])
    return rng.integers(0, p, size=(count, param_count(sig, k)), dtype=np.int64)


# -- subalgebras ------------------------------------------------------------


class _Echelon:
    """Incremental row echelon basis mod p."""

    def __init__(self, k: int, p: int):
        self.k, self.p = k, p
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def reduce(self, v) -> np.ndarray:
        v = np.array(v, dtype=np.int64) % self.p
        for row, c in zip(self.rows, self.pivots):
            if v[c]:
                v = (v - v[c] * row) % self.p
        return v

    def add(self, v) -> bool:
        v = self.reduce(v)
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        c = int(nz[0])
        v = v * pow(int(v[c]), -1, self.p) % self.p
        self.rows.append(v)
        self.pivots.append(c)
        return True

    def __contains__(self, v):
        return not self.reduce(v).any()

    def __len__(self):
        return len(self.rows)


@dataclass
class Subalgebra:
    """Subalgebra generated by seeds, with witness terms for its basis.

    ``vectors[i]`` is the value of ``witnesses[i]`` with ``x_j -> seeds[j]``;
    ``recipe[i]`` is ``("seed", j)`` or ``(op_name, child indices...)``.
    """

    k: int
    p: int
    vectors: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    recipe: list = field(default_factory=list)
    closed: bool = False

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def basis(self) -> np.ndarray:
        """Reduced row echelon basis, shape (dim, k)."""
        if not self.vectors:
            return np.zeros((0, self.k), dtype=np.int64)
        R, piv = rref(np.array(self.vectors), self.p)
        return R[: len(piv)]

    def is_full(self) -> bool:
        return self.dim == self.k

    def replay(self, A: AlgebraStructure, seeds) -> np.ndarray:
        """Re-evaluate the recorded recipe from other seed values.

        Returns the images of the basis vectors as the columns of a k x dim
        matrix.  ``seeds`` may carry batch dimensions (..., k).
        """
        vals = []
        for step in self.recipe:
            if step[0] == "seed":
                vals.append(np.asarray(seeds[step[1]], dtype=np.int64) % A.p)
            else:
                vals.append(A.apply(step[0], *(vals[i] for i in step[1:])))
        return np.stack(vals, axis=-1)


def generated_subalgebra(A: AlgebraStructure, seeds, stop_when_full: bool = False) -> Subalgebra:
    """Least subspace containing ``seeds`` and closed under every operation."""
    sub = Subalgebra(A.k, A.p)
    ech = _Echelon(A.k, A.p)
    for j, s in enumerate(seeds):
        if ech.add(s):
            sub.vectors.append(np.asarray(s, dtype=np.int64) % A.p)
            sub.witnesses.append(j)
            sub.recipe.append(("seed", j))
    done: set = set()
    ops = list(A.signature)
    changed = True
    while changed:
        changed = False
        if stop_when_full and len(ech) == A.k:
            break
        for name, a in ops:
            for idx in product(range(sub.dim), repeat=a):
                if (name, idx) in done:
                    continue
                done.add((name, idx))
                v = A.apply(name, *(sub.vectors[i] for i in idx))
                if ech.add(v):
                    sub.vectors.append(v)
                    sub.witnesses.append((name, *(sub.witnesses[i] for i in idx)))
                    sub.recipe.append((name, *idx))
                    changed = True
                    if stop_when_full and len(ech) == A.k:
                        break
            if stop_when_full and len(ech) == A.k:
                break
    sub.closed = True
    return sub


def witness_element(sub: Subalgebra, i: int) -> FreeElement:
    return FreeElement.of(sub.witnesses[i])


def is_subalgebra(A: AlgebraStructure, basis) -> bool:
    """Whether the row space of ``basis`` is closed under every operation."""
    basis = np.asarray(basis, dtype=np.int64)
    d = basis.shape[0]
    if d == 0:
        return True
    R, piv = rref(basis, A.p)
    R = R[: len(piv)]
    ech = _Echelon(A.k, A.p)
    ech.rows = list(R)
    ech.pivots = list(piv)
    for name, a in A.signature:
        for idx in product(range(len(R)), repeat=a):
            if A.apply(name, *(R[i] for i in idx)) not in ech:
                return False
    return True


@lru_cache(maxsize=None)
def _lines(k: int, p: int) -> tuple:
    return tuple(projective_points(k, p))


@lru_cache(maxsize=None)
def _proper_subspaces(k: int, p: int) -> tuple:
    return tuple(W for d in range(1, k) for W in enumerate_subspaces(k, d, p))


def is_minimal(A: AlgebraStructure) -> bool:
    """Every nonzero element generates the whole space.

    One closure per projective point suffices: a nonzero multiple of a vector
    generates the same subalgebra.
    """
    if A.k == 1:
        return True
    for v in _lines(A.k, A.p):
        if not generated_subalgebra(A, [v], stop_when_full=True).is_full():
            return False
    return True


def is_minimal_by_subspaces(A: AlgebraStructure) -> bool:
    """Independent check: no proper nonzero subspace is a subalgebra."""
    return not any(is_subalgebra(A, W) for W in _proper_subspaces(A.k, A.p))


def has_one_dim_subalgebra(A: AlgebraStructure) -> bool:
    for v in _lines(A.k, A.p):
        if is_subalgebra(A, v[None, :]):
            return True
    return False


# -- automorphisms ----------------------------------------------------------


def intertwines(A: AlgebraStructure, B: AlgebraStructure, M) -> bool:
    """``M(op_A(u..)) == op_B(M u, ..)`` for every operation."""
    M = np.asarray(M, dtype=np.int64)
    for name in A.signature.names:
        lhs = A.tensors[name] @ M.T % A.p
        if not np.array_equal(lhs, B.transform(name, M)):
            return False
    return True


def scalar_group(A: AlgebraStructure) -> list[int]:
    """Scalars ``l`` with ``l**(r-1) == 1`` for every arity r in the signature."""
    return [lam for lam in range(1, A.p) if all(pow(lam, a - 1, A.p) == 1 for _, a in A.signature)]


@dataclass
class AutGroup:
    k: int
    p: int
    matrices: list

    @property
    def order(self) -> int:
        return len(self.matrices)

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def contains(self, M) -> bool:
        M = np.asarray(M) % self.p
        return any(np.array_equal(M, X) for X in self.matrices)

    def is_scalar_only(self, A: AlgebraStructure) -> bool:
        return self.order == len(scalar_group(A))


def _cyclic_generator(A: AlgebraStructure) -> tuple[Subalgebra, np.ndarray]:
    if not is_minimal(A):
        raise NonMinimalError("fast path needs a minimal algebra; use method='enumerate'")
    a = np.zeros(A.k, dtype=np.int64)
    a[0] = 1
    sub = generated_subalgebra(A, [a], stop_when_full=True)
    Vinv = mat_inverse(np.stack(sub.vectors, axis=1), A.p)
    return sub, Vinv


def _generator_image_search(A: AlgebraStructure, B: AlgebraStructure, first_only: bool):
    sub, Vinv = _cyclic_generator(A)
    cands = all_vectors(B.k, B.p)[1:]
    images = sub.replay(B, [cands])  # (count, k, k): column i is the image of basis vector i
    found = []
    for Bm in images:
        M = Bm @ Vinv % A.p
        if rank(M, A.p) < A.k:
            continue
        if intertwines(A, B, M):
            found.append(M)
            if first_only:
                break
    return found


def automorphisms(A: AlgebraStructure, method: str = "fast") -> AutGroup:
    """Full automorphism group of ``A``.

    ``method="fast"`` maps a cyclic generator to every nonzero vector and
    rebuilds the candidate from closure witnesses (needs ``A`` minimal);
    ``method="enumerate"`` checks every element of GL_k(F_p).
    """
    if method == "fast":
        mats = _generator_image_search(A, A, first_only=False)
    elif method == "enumerate":
        mats = [M for M in enumerate_gl(A.k, A.p) if intertwines(A, A, M)]
    else:
        raise ValueError(f"unknown method {method!r}")
    return AutGroup(A.k, A.p, sorted(mats, key=lambda M: M.tobytes()))


def are_isomorphic(A: AlgebraStructure, B: AlgebraStructure, method: str = "fast"):
    """An invertible ``M`` with ``M op_A(u..) = op_B(M u..)``, or ``None``."""
    if (A.p, A.k, A.signature) != (B.p, B.k, B.signature):
        raise ValueError("structures live on different spaces or signatures")
    if method == "fast":
        if not is_minimal(B):
            raise NonMinimalError("fast path needs both algebras minimal; use method='enumerate'")
        found = _generator_image_search(A, B, first_only=True)
        return found[0] if found else None
    if method == "enumerate":
        for M in enumerate_gl(A.k, A.p):
            if intertwines(A, B, M):
                return M
        return None
    raise ValueError(f"unknown method {method!r}")


def aut_orbits(A: AlgebraStructure, aut: AutGroup | None = None) -> list[list[int]]:
    """Orbits of Aut(A) on A, as lists of vector indices (lexicographic order)."""
    if aut is None:
        aut = automorphisms(A)
    vecs = all_vectors(A.k, A.p)
    weights = A.p ** np.arange(A.k - 1, -1, -1)
    seen = np.full(len(vecs), -1)
    orbits = []
    for i in range(len(vecs)):
        if seen[i] >= 0:
            continue
        imgs = sorted({int(((M @ vecs[i]) % A.p) @ weights) for M in aut})
        for j in imgs:
            seen[j] = len(orbits)
        orbits.append(imgs)
    return orbits


def aut_orbit_counts(A: AlgebraStructure, aut: AutGroup | None = None) -> dict:
    """Number of Aut(A)-orbits on A and on A minus zero (they differ by one)."""
    n = len(aut_orbits(A, aut))
    return {"on_A": n, "on_A_minus_zero": n - 1}
