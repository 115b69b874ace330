from math import factorial

import numpy as np
import pytest

from tamealt import permgroup
from tamealt.action import (
    WellDefinednessError,
    action_bundle,
    analyze_action,
    build_omega,
    bundle_from_json,
    bundle_to_json,
    decode,
    encode,
    generator_permutation,
    tuple_orbits,
    word_permutation,
)
from tamealt.algebra import AlgebraStructure, AutGroup, automorphisms, is_minimal, random_structure
from tamealt.ffield import rref
from tamealt.operad import Signature
from tamealt.tame import GammaGenerators, GroupWord, apply_word

SIG = Signature.parse("b2,b2")


def _trivial_aut_minimal(k, p, seed=0):
    t = 0
    while True:
        A = random_structure(SIG, k, p, [seed, t])
        t += 1
        if is_minimal(A) and automorphisms(A).order == 1:
            return A


def test_encode_decode_round_trip():
    codes = np.arange(3**4)
    tup = decode(codes, 2, 2, 3)
    assert tup.shape == (81, 2, 2)
    assert np.array_equal(encode(tup, 3), codes)


def test_omega_sizes():
    A = AlgebraStructure.from_constants(SIG, 3, [1, 0])
    assert automorphisms(A).order == 1
    assert build_omega(A, 4).size == 80
    Z = AlgebraStructure.zero(SIG, 1, 3)
    omega = build_omega(Z, 4)
    assert omega.size == 40
    assert sorted(set(omega.orbit_sizes().tolist())) == [2]
    B = _trivial_aut_minimal(2, 2)
    assert build_omega(B, 4).size == 255


def test_omega_invariants():
    Z = AlgebraStructure.zero(SIG, 1, 5)
    omega = build_omega(Z, 3)
    assert omega.orbit_sizes().sum() == 5**3 - 1
    reps = omega.representative_tuples()
    assert np.array_equal(omega.ids(reps), np.arange(omega.size))
    # every representative is the least code in its orbit
    for M in omega.aut:
        imgs = np.einsum("ij,tnj->tni", M, reps) % 5
        assert (encode(imgs, 5) >= omega.representatives).all()
    with pytest.raises(ValueError):
        build_omega(Z, 11)


def test_identity_word_and_generator_orders():
    A = AlgebraStructure.from_constants(SIG, 3, [1, 2])
    g = GammaGenerators(4, SIG)
    bundle = action_bundle(A, g)
    assert permgroup.is_identity(word_permutation(GroupWord(), bundle))
    for perm in bundle.values():
        assert permgroup.is_identity(permgroup.power(perm, 3))
    again = action_bundle(A, g)
    assert permgroup.cycle_type(bundle["a1"]) == permgroup.cycle_type(again["a1"])


def test_word_permutation_matches_tuple_action_and_composes():
    A = _trivial_aut_minimal(1, 5)
    g = GammaGenerators(4, SIG)
    omega = build_omega(A, 4)
    bundle = action_bundle(A, g, omega)
    rng = np.random.default_rng(0)
    reps = omega.representative_tuples()
    for _ in range(20):
        w1 = GroupWord((g.names[i], int(rng.choice([-1, 1]))) for i in rng.integers(0, len(g.names), 6))
        w2 = GroupWord((g.names[i], int(rng.choice([-1, 1]))) for i in rng.integers(0, len(g.names), 6))
        p1, p2 = word_permutation(w1, bundle), word_permutation(w2, bundle)
        assert np.array_equal(word_permutation(w1 + w2, bundle), permgroup.mul(p1, p2))
        assert np.array_equal(omega.ids(apply_word(w1, g, reps, A)), p1)


def test_action_is_well_defined_on_orbits():
    Z = AlgebraStructure.zero(SIG, 2, 3)
    g = GammaGenerators(4, SIG)
    omega = build_omega(Z, 4, automorphisms(Z, method="enumerate"))
    # checked on every nonzero tuple inside generator_permutation
    action_bundle(Z, g, omega)


def test_wrong_automorphism_group_is_detected():
    A = AlgebraStructure.from_constants(SIG, 3, [1, 0])
    fake = AutGroup(1, 3, [np.eye(1, dtype=np.int64), 2 * np.eye(1, dtype=np.int64)])
    omega = build_omega(A, 4, fake)
    g = GammaGenerators(4, SIG)
    with pytest.raises(WellDefinednessError):
        generator_permutation(g["b:m"], omega, A)


def test_minimal_algebra_has_two_orbits():
    A = AlgebraStructure.from_constants(SIG, 3, [1, 1])
    orbits = tuple_orbits(A, GammaGenerators(4, SIG))
    assert sorted(len(o) for o in orbits) == [1, 80]
    assert [0] in orbits


def _left_kernel_key(tup, p):
    # the k x n coordinate matrix determines its relations c^T X = 0
    X = np.asarray(tup).T
    R, piv = rref(X.T, p)
    null = []
    k = X.shape[0]
    free = [c for c in range(k) if c not in piv]
    for f in free:
        v = np.zeros(k, dtype=np.int64)
        v[f] = 1
        for r, c in enumerate(piv):
            v[c] = -R[r, f] % p
        null.append(v)
    if not null:
        return ()
    B, pv = rref(np.array(null), p)
    return B[: len(pv)].tobytes()


def test_zero_structure_orbits_follow_row_relations():
    Z = AlgebraStructure.zero(SIG, 2, 3)
    orbits = tuple_orbits(Z, GammaGenerators(4, SIG))
    assert len(orbits) > 2
    tuples = decode(np.arange(3**8), 4, 2, 3)
    keys = {_left_kernel_key(t, 3) for t in tuples}
    assert len(orbits) == len(keys)
    for orbit in orbits:
        assert len({_left_kernel_key(tuples[c], 3) for c in orbit}) == 1


def test_analyze_small_action():
    A = AlgebraStructure.from_constants(SIG, 3, [1, 2])
    report, bundle, bsgs = analyze_action(A, GammaGenerators(4, SIG), transitivity_cap=4)
    assert report.degree == 80
    assert report.aut_orbits_nonzero == 2
    assert report.order == factorial(80) // 2 == bsgs.order
    assert report.image == "Alt"
    assert report.transitivity == 4
    assert set(report.generator_orders.values()) == {3}
    assert report.orbit_count == 1
    assert bundle_from_json(bundle_to_json(bundle)).keys() == bundle.keys()
