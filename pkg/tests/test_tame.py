from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamealt.algebra import AlgebraStructure, aut_orbits, automorphisms, is_minimal, random_structure
from tamealt.ffield import all_vectors, solve_linear
from tamealt.operad import FreeElement, Signature, all_terms, evaluate, node, parse_element
from tamealt.tame import (
    GammaGenerators,
    GroupWord,
    NoSolutionError,
    Transvection,
    apply_transvection,
    apply_word,
    commutator,
    conjugate,
    crt_solve,
    elementary_matrix,
    elementary_word,
    permutation_word,
    signed_permutation_word,
    signed_swap_word,
    symbolic_composite,
    transvection_word,
    verify_word_symbolic,
    word_matrix,
)

B2 = Signature.parse("b2")
X = [FreeElement.var(i) for i in range(8)]


def _tuples(n, k, p, count, seed):
    return np.random.default_rng(seed).integers(0, p, (count, n, k))


def test_generators():
    g = GammaGenerators(4, "b2,t3", N=2)
    assert g.names == ["a1", "a2", "a3", "a4", "b:m", "b:t"]
    assert g["a2"] == Transvection(1, X[2])
    assert g["a4"] == Transvection(3, X[0] * Fraction(1, 2))
    assert g["b:t"].payload == FreeElement.of(node("t", 1, 2, 3))
    with pytest.raises(ValueError):
        GammaGenerators(3, "b2,t3")
    with pytest.raises(ValueError):
        g["c1"]


def test_transvection_rejects_own_index():
    with pytest.raises(ValueError):
        Transvection(1, X[1])


def test_word_parse_print_and_reduction():
    w = GroupWord.parse("a1 a2^-1 b:m a2 a2^-1")
    assert str(w) == "a1 a2^-1 b:m"
    assert GroupWord.parse(str(w)) == w
    assert (w + w.inverse()).letters == ()
    assert len(GroupWord.parse("a1^3 a2^-2")) == 5
    assert commutator(GroupWord.gen("a1"), GroupWord.gen("a2")) == GroupWord.parse("a1^-1 a2^-1 a1 a2")
    with pytest.raises(ValueError):
        GroupWord.parse("a1^x")


def test_apply_transvection_examples():
    A = random_structure(B2, 2, 3, 0)
    tup = _tuples(4, 2, 3, 1000, 1)
    out = apply_transvection(Transvection(1, X[2]), tup, A)
    want = tup.copy()
    want[:, 1] = (tup[:, 1] + tup[:, 2]) % 3
    assert np.array_equal(out, want)
    beta = Transvection(0, FreeElement.of(node("m", 1, 2)))
    out = apply_transvection(beta, tup, A)
    want = tup.copy()
    want[:, 0] = (tup[:, 0] + A.apply("m", tup[:, 1], tup[:, 2])) % 3
    assert np.array_equal(out, want)
    f = parse_element("m(x1, x2) + 2*x3", B2)
    there = apply_transvection(Transvection(0, f), tup, A)
    back = apply_transvection(Transvection(0, -f), there, A)
    assert np.array_equal(back, tup)


def test_denominator_divisible_by_p_is_an_error():
    g = GammaGenerators(4, B2, N=3)
    A = random_structure(B2, 1, 3, 0)
    with pytest.raises(ZeroDivisionError):
        apply_word(GroupWord.gen("a4"), g, _tuples(4, 1, 3, 5, 0), A)


@pytest.mark.parametrize("n,N", [(3, 1), (5, 2)])
def test_elementary_words_match_matrices(n, N):
    g = GammaGenerators(n, B2, N)
    for i in range(n):
        for j in range(n):
            if i == j:
                with pytest.raises(ValueError):
                    elementary_word(i, j, 1, g)
                continue
            for r in (1, -2, 3):
                w = elementary_word(i, j, r, g)
                assert (word_matrix(w, g) == elementary_matrix(i, j, r, n)).all()


def test_elementary_word_examples():
    g = GammaGenerators(3, B2)
    assert elementary_word(0, 1, 3, g) == GroupWord.gen("a1", 3)
    e13 = elementary_word(0, 2, 1, g)
    prod = word_matrix(commutator(elementary_word(0, 1, -1, g), elementary_word(1, 2, 1, g)), g)
    assert (word_matrix(e13, g) == prod).all()
    # direct 3 x 3 product of the elementary matrices, applied right to left
    E = lambda i, j, r: elementary_matrix(i, j, r, 3)
    direct = E(1, 2, 1).dot(E(0, 1, -1)).dot(E(1, 2, -1)).dot(E(0, 1, 1))
    assert (word_matrix(e13, g) == direct).all()
    with pytest.raises(ValueError):
        elementary_word(0, 1, Fraction(1, 2), g)


def test_signed_swap_matrix():
    g = GammaGenerators(4, B2)
    M = word_matrix(signed_swap_word(1, 3, g), g)
    want = elementary_matrix(0, 0, 0, 4)
    want[1, 1] = want[3, 3] = 0
    want[1, 3] = 1
    want[3, 1] = -1
    assert (M == want).all()


def test_permutation_words():
    g = GammaGenerators(4, B2)
    assert permutation_word([0, 1, 2, 3], g) == GroupWord()
    sigma = [1, 2, 0, 3]
    M = word_matrix(permutation_word(sigma, g), g)
    for m in range(4):
        assert [int(c) for c in M[m]] == [int(j == sigma[m]) for j in range(4)]
    with pytest.raises(ValueError):
        permutation_word([1, 0, 2, 3], g)
    M = word_matrix(signed_permutation_word([1, 0, 2, 3], [1, 1, -1, 1], g), g)
    assert M[2, 2] == -1 and M[0, 1] == 1 and M[1, 0] == 1
    with pytest.raises(ValueError):
        signed_permutation_word([1, 0, 2, 3], [1, 1, 1, 1], g)


def test_conjugation_moves_transvections():
    g = GammaGenerators(4, B2)
    A = random_structure(B2, 2, 3, 5)
    tup = _tuples(4, 2, 3, 100, 6)
    sigma = [1, 2, 0, 3]
    w = permutation_word(sigma, g)
    moved = conjugate(w, elementary_word(0, 1, 1, g))
    expected = Transvection(sigma[0], X[sigma[1]])
    assert np.array_equal(apply_word(moved, g, tup, A), apply_transvection(expected, tup, A))


def test_transvection_word_base_case():
    g = GammaGenerators(5, B2)
    assert transvection_word(X[1], g) == elementary_word(0, 1, 1, g)


def test_transvection_word_binary_product_numeric():
    g = GammaGenerators(5, B2)
    f = FreeElement.of(node("m", 1, 2))
    w = transvection_word(f, g)
    tup = _tuples(5, 2, 3, 1000, 2)
    for s in range(3):
        A = random_structure(B2, 2, 3, [7, s])
        assert np.array_equal(apply_word(w, g, tup, A), apply_transvection(Transvection(0, f), tup, A))


def test_transvection_word_nested_symbolic():
    g = GammaGenerators(5, B2)
    f = FreeElement.of(node("m", 1, node("m", 1, 2)))
    w = transvection_word(f, g)
    assert verify_word_symbolic(w, Transvection(0, f), g, 4)
    assert not verify_word_symbolic(w, Transvection(0, -f), g, 4)
    with pytest.raises(ValueError):
        verify_word_symbolic(w, Transvection(0, f), g, 2)


def test_commutator_identity_with_relocated_generator():
    g = GammaGenerators(5, B2)
    sigma = [0, 2, 3, 1, 4]
    beta = conjugate(permutation_word(sigma, g), GroupWord.gen("b:m"))
    assert verify_word_symbolic(beta, Transvection(0, FreeElement.of(node("m", 2, 3))), g, 2)
    gamma = elementary_word(2, 1, 1, g)
    expected = Transvection(0, -FreeElement.of(node("m", 1, 3)))
    assert verify_word_symbolic(commutator(beta, gamma), expected, g, 2)


def test_empty_word_is_identity():
    g = GammaGenerators(4, B2)
    assert verify_word_symbolic(GroupWord(), Transvection(0, FreeElement.zero()), g, 3)


def test_transvection_word_rejects_bad_payloads():
    g = GammaGenerators(5, B2)
    with pytest.raises(ValueError):
        transvection_word(X[3], g)
    with pytest.raises(ValueError):
        transvection_word(X[1] * Fraction(1, 2), g)
    with pytest.raises(ValueError):
        transvection_word(X[0], g)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_transvection_words_verify_symbolically(data):
    g = GammaGenerators(5, B2)
    pool = all_terms(B2, [1, 2], 3)
    chosen = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=2, unique=True))
    coefs = data.draw(st.lists(st.sampled_from([-2, -1, 1, 2]), min_size=len(chosen), max_size=len(chosen)))
    f = FreeElement(dict(zip(chosen, coefs)))
    w = transvection_word(f, g)
    assert verify_word_symbolic(w, Transvection(0, f), g)


def test_random_words_symbolic_agrees_with_numeric():
    sig = Signature.parse("b2")
    g = GammaGenerators(4, sig)
    rng = np.random.default_rng(8)
    A = random_structure(sig, 2, 3, 8)
    tup = _tuples(4, 2, 3, 100, 9)
    for _ in range(20):
        letters = [(g.names[rng.integers(len(g.names))], int(rng.choice([-1, 1]))) for _ in range(10)]
        w = GroupWord(letters)
        exact = symbolic_composite(w, g, None)
        assert not exact.truncated
        vals = [tup[:, i] for i in range(4)]
        sym = np.stack([evaluate(im, vals, A) for im in exact.endomorphism.images], axis=1)
        assert np.array_equal(sym % 3, apply_word(w, g, tup, A))
        capped = symbolic_composite(w, g, 4).endomorphism.images
        assert list(capped) == [im.truncate(4) for im in exact.endomorphism.images]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_transvections_with_disjoint_indices_commute(seed):
    rng = np.random.default_rng(seed)
    n = 5
    i, j = rng.choice(n, 2, replace=False)
    others_i = [v for v in range(n) if v not in (i, j)]
    # payloads avoid both indices, so each leaves the other's coordinate alone
    f = FreeElement.of(node("m", int(rng.choice(others_i)), int(rng.choice(others_i))))
    h = FreeElement.var(int(rng.choice(others_i))) * int(rng.integers(1, 3))
    s, t = Transvection(int(i), f), Transvection(int(j), h)
    A = random_structure(B2, 2, 3, seed)
    tup = _tuples(n, 2, 3, 50, seed)
    one = apply_transvection(t, apply_transvection(s, tup, A), A)
    two = apply_transvection(s, apply_transvection(t, tup, A), A)
    assert np.array_equal(one, two)


# -- interpolation -----------------------------------------------------------


def _one_variable_values(A, pts, max_degree):
    """Every one-variable term up to max_degree evaluated at all points."""
    cols = []
    for t in all_terms(A.signature, [0], max_degree):
        cols.append(evaluate(FreeElement.of(t), [pts], A).reshape(-1))
    return np.stack(cols, axis=1)


def test_crt_identity_target():
    A = random_structure(B2, 2, 3, 1)
    a = np.array([[1, 2]])
    sol = crt_solve(A, a, a)
    assert sol.element == X[0] and sol.degree == 1


def _minimal(sig, k, p, seed):
    t = 0
    while True:
        A = random_structure(sig, k, p, [seed, t])
        t += 1
        if is_minimal(A):
            return A


def test_crt_single_point_is_surjective():
    A = _minimal(B2, 2, 3, 3)
    a = np.array([[0, 1]])
    for b in all_vectors(2, 3):
        sol = crt_solve(A, a, [b])
        assert np.array_equal(evaluate(sol.element, [a], A) % 3, b[None, :])


def test_crt_same_orbit_incompatible_targets_fail():
    sig = Signature.parse("t3")
    A = _minimal(sig, 2, 3, 4)
    # -Id is an automorphism of every ternary structure
    assert automorphisms(A).contains(2 * np.eye(2, dtype=int))
    a = np.array([1, 1])
    pts = np.array([a, (-a) % 3])
    tgt = np.array([[1, 0], [1, 0]])
    with pytest.raises(NoSolutionError):
        crt_solve(A, pts, tgt, max_degree=8)
    # independent oracle: no combination of all terms of degree <= 8 reaches the target
    assert solve_linear(_one_variable_values(A, pts, 8), tgt.reshape(-1), 3) is None
    ok = crt_solve(A, pts, np.array([[1, 0], [2, 0]]))
    assert np.array_equal(evaluate(ok.element, [pts], A) % 3, [[1, 0], [2, 0]])


def test_crt_distinct_orbits_agree_with_term_enumeration():
    sig = Signature.parse("t3")
    rng = np.random.default_rng(12)
    for s in range(5):
        A = _minimal(sig, 2, 3, 20 + s)
        orbits = [o for o in aut_orbits(A) if 0 not in o]
        picks = rng.choice(len(orbits), 2, replace=False)
        vecs = all_vectors(2, 3)
        pts = np.array([vecs[orbits[i][0]] for i in picks])
        tgt = rng.integers(0, 3, (2, 2))
        sol = crt_solve(A, pts, tgt)
        assert np.array_equal(evaluate(sol.element, [pts], A) % 3, tgt)
        assert solve_linear(_one_variable_values(A, pts, 7), tgt.reshape(-1), 3) is not None
