from itertools import permutations
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamealt import permgroup as pg


def perms_of(m):
    return st.permutations(list(range(m))).map(pg.as_perm)


def generating_sets(max_degree=7, max_gens=3):
    return st.integers(2, max_degree).flatmap(lambda m: st.lists(perms_of(m), min_size=1, max_size=max_gens))


def _k_transitive_brute(group, m, t):
    """Whether the element set acts transitively on ordered t-tuples of distinct points."""
    start = tuple(range(t))
    images = {tuple(g[i] for i in start) for g in group}
    return len(images) == factorial(m) // factorial(m - t)


def test_basic_operations():
    g = pg.from_cycles(5, [0, 1, 2])
    h = pg.from_cycles(5, [1, 3])
    assert pg.mul(g, h).tolist() == h[g].tolist()
    assert pg.is_identity(pg.mul(g, pg.inverse(g)))
    assert pg.power(g, 3).tolist() == list(range(5))
    assert pg.power(g, -1).tolist() == pg.inverse(g).tolist()
    assert pg.cycle_type(g) == (3, 1, 1)
    assert pg.parity(g) == 0 and pg.parity(h) == 1
    assert pg.perm_order(pg.mul(g, h)) == 4
    with pytest.raises(ValueError):
        pg.as_perm([0, 0, 1])


@settings(max_examples=200, deadline=None)
@given(generating_sets())
def test_order_matches_brute_force(gens):
    elems = pg.group_elements(gens)
    bsgs = pg.schreier_sims(gens)
    assert bsgs.order == len(elems)
    assert bsgs.fixes_base_prefix()
    assert all(bsgs.contains(np.array(e)) for e in list(elems)[:50])


@settings(max_examples=60, deadline=None)
@given(generating_sets(max_degree=6))
def test_transitivity_degree_matches_brute_force(gens):
    m = len(gens[0])
    elems = pg.group_elements(gens)
    bsgs = pg.schreier_sims(gens)
    expected = 0
    for t in range(1, m + 1):
        if _k_transitive_brute(elems, m, t):
            expected = t
        else:
            break
    assert pg.transitivity_degree(bsgs, cap=8) == min(expected, 8)


@settings(max_examples=60, deadline=None)
@given(generating_sets(max_degree=6), st.integers(0, 1000))
def test_lower_bound_never_exceeds_true_transitivity(gens, seed):
    bsgs = pg.schreier_sims(gens)
    assert pg.transitivity_lower_bound(gens, cap=6, seed=seed) <= pg.transitivity_degree(bsgs, cap=6)


def test_membership_rejects_outsiders():
    a5 = [pg.from_cycles(5, [0, 1, 2]), pg.from_cycles(5, [0, 1, 2, 3, 4])]
    bsgs = pg.schreier_sims(a5)
    assert not bsgs.contains(pg.from_cycles(5, [0, 1]))
    assert bsgs.contains(pg.from_cycles(5, [0, 1], [2, 3]))


def test_examples_from_small_groups():
    s4 = [pg.from_cycles(4, [0, 1]), pg.from_cycles(4, [0, 1, 2, 3])]
    assert len(pg.group_elements(s4)) == 24
    bsgs = pg.schreier_sims(s4)
    assert bsgs.order == 24
    assert pg.recognize_alt_sym(bsgs, s4) == "Sym"
    cyc = pg.from_cycles(7, list(range(7)))
    assert pg.schreier_sims([cyc]).order == 7
    big = pg.from_cycles(30, list(range(30)))
    assert pg.recognize_alt_sym(pg.schreier_sims([big]), [big]) == "Other"


def test_alternating_and_symmetric_five():
    a5 = [pg.from_cycles(5, [0, 1, 2]), pg.from_cycles(5, [0, 1, 2, 3, 4])]
    bsgs = pg.schreier_sims(a5)
    assert bsgs.order == 60
    assert pg.recognize_alt_sym(bsgs, a5) == "Alt"
    assert pg.transitivity_degree(bsgs, cap=8) == 3
    elems = pg.group_elements(a5)
    assert _k_transitive_brute(elems, 5, 3) and not _k_transitive_brute(elems, 5, 4)
    s5 = [pg.from_cycles(5, [0, 1]), pg.from_cycles(5, [0, 1, 2, 3, 4])]
    assert pg.transitivity_degree(pg.schreier_sims(s5), cap=8) == 5


def test_trivial_group_is_not_transitive():
    bsgs = pg.schreier_sims([pg.identity(4)])
    assert bsgs.order == 1
    assert pg.transitivity_degree(bsgs) == 0


def test_large_alternating_group_order():
    m = 41
    gens = [pg.from_cycles(m, [0, 1, 2]), pg.from_cycles(m, list(range(m)))]
    bsgs = pg.schreier_sims(gens)
    assert bsgs.order == factorial(m) // 2
    assert pg.recognize_alt_sym(bsgs, gens) == "Alt"
    assert pg.transitivity_lower_bound(gens, cap=6) == 6


def test_orbits_union_find():
    g = pg.from_cycles(6, [0, 1], [2, 3, 4])
    assert sorted(map(sorted, pg.orbits([g]))) == [[0, 1], [2, 3, 4], [5]]


def _random_action(m, seed):
    rng = np.random.default_rng(seed)
    return {"x": rng.permutation(m), "y": rng.permutation(m)}


def test_equivalence_of_conjugate_actions():
    act = _random_action(12, 0)
    same = pg.actions_equivalent(act, act, method="exact")
    assert same.status == "equivalent"
    assert np.array_equal(same.witness, np.arange(12))
    pi = np.random.default_rng(1).permutation(12)
    conj = {k: pg.mul(pg.inverse(pi), g, pi) for k, g in act.items()}
    res = pg.actions_equivalent(act, conj, method="exact")
    assert res.status == "equivalent"
    assert _is_equivariant(act, conj, res.witness)


def _is_equivariant(actA, actB, f):
    # f(g_A(x)) == g_B(f(x)) for every generator
    return all(np.array_equal(f[actA[k]], actB[k][f]) for k in actA)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 7), st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_equivalence_matches_brute_force(m, s1, s2):
    A, B = _random_action(m, s1), _random_action(m, s2)
    brute = any(_is_equivariant(A, B, np.array(f)) for f in permutations(range(m)))
    res = pg.actions_equivalent(A, B, method="exact")
    assert (res.status == "equivalent") == brute
    auto = pg.actions_equivalent(A, B)
    assert auto.status == res.status


def test_equivalence_rejects_label_mismatch():
    with pytest.raises(ValueError):
        pg.actions_equivalent({"x": pg.identity(3)}, {"y": pg.identity(3)})


def test_identity_word_and_cycle_census():
    g = pg.from_cycles(4, [0, 1, 2, 3])
    census = pg.cycle_type_census([g, pg.mul(g, g), pg.identity(4)])
    assert census[(4,)] == 1 and census[(2, 2)] == 1 and census[(1, 1, 1, 1)] == 1
    assert pg.format_cycles(g) == "(0 1 2 3)"
