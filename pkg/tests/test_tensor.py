import random
from fractions import Fraction
from itertools import product

import pytest

from grasstensor.combinatorics import complement, enumerate_multiindices, permutation_sign, shift
from grasstensor.exact_linalg import ExactMatrix, det, rank
from grasstensor.multiview import (
    act_ambient,
    act_views,
    plucker,
    random_invertible,
    random_rig,
    sample_corresponding,
    sample_generic_subspaces,
    system_matrix,
)
from grasstensor.tensor import (
    GrassmannTensor,
    RankOneTerm,
    build_bifocal,
    build_tensor,
    build_trifocal,
    contract,
    equal_up_to_scale,
    flatten,
    flattening_ranks,
    verify_decomposition,
)
from grasstensor.canonical import rig_from_stacked
from conftest import laplace_det

CLASSICAL = ExactMatrix(
    [[1, 0, 0, 1, 0, 0, 1, 0, 0], [0, 1, 0, 0, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1, 0, 0, 1]]
)


def naive_entry(stacked, hs, ss, pos):
    """Signed complementary minor straight from the definition, via cofactor expansion."""
    labels = [enumerate_multiindices(h + 1, s + 1) for h, s in zip(hs, ss)]
    sel, kept, off = [], [], 0
    for lab, h, p in zip(labels, hs, pos):
        mi = lab[p - 1]
        sel += shift(mi, off)
        kept += shift(complement(mi, h + 1), off)
        off += h + 1
    rows = [[stacked[r, c - 1] for c in kept] for r in range(stacked.nrows)]
    return permutation_sign(sel + kept) * laplace_det(rows)


@pytest.mark.parametrize("k,hs,prof", [(3, (2, 2, 2), (2, 1, 1)), (4, (2, 3), (2, 3)), (4, (2, 2, 2), (2, 2, 1))])
def test_entries_match_definition(k, hs, prof):
    rig = random_rig(k, hs, prof, seed=6, bound=3)
    t = build_tensor(rig)
    m = rig.stacked()
    for pos in t.positions():
        assert t.entry(*pos) == naive_entry(m, rig.hs, rig.ss, pos)


def test_classical_support():
    rig = rig_from_stacked(CLASSICAL, (2, 2, 2), (2, 1, 1))
    t = build_trifocal(rig)
    assert t.mode_dims == (3, 3, 3)
    assert t.support() == [(1, 1, 3), (1, 3, 1), (2, 2, 1), (3, 1, 2)]
    assert all(abs(v) == 1 for _, v in t.sparse())
    assert t.is_face_disjoint()


def test_bifocal_canonical_matrix():
    m = ExactMatrix([[1, 0, 0, 0, 1, 0, 0, 0], [0, 1, 0, 0, 0, 1, 0, 0], [0, 0, 1, 0, 0, 0, 1, 0], [0, 0, 0, 1, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0, 0, 1]])
    rig = rig_from_stacked(m, (3, 3), (3, 2))
    f = build_bifocal(rig)
    assert f.mode_dims == (4, 6)
    assert f.support() == [(1, 4), (2, 2), (3, 1)]
    assert rank(flatten(f, 1)) == 3


def test_arity_guard():
    rig = random_rig(3, (2, 2, 2), (2, 1, 1), seed=0)
    with pytest.raises(Exception):
        build_bifocal(rig)


@pytest.mark.parametrize("k,hs,prof", [(3, (2, 2, 2), (2, 1, 1)), (4, (3, 3, 2), (2, 2, 1)), (4, (3, 3), (3, 2)), (4, (2, 2, 2), (2, 2, 1)), (5, (4, 3), (3, 3))])
def test_contraction_is_system_determinant(k, hs, prof):
    rig = random_rig(k, hs, prof, seed=12)
    t = build_tensor(rig)
    ratios = set()
    for s in range(6):
        subs = sample_generic_subspaces(rig, s)
        d = det(system_matrix(rig, subs))
        c = contract(t, [plucker(x) for x in subs])
        if d == 0:
            assert c == 0
        else:
            ratios.add(c / d)
    assert len(ratios) == 1 and abs(ratios.pop()) == 1
    for s in range(6):
        subs, _ = sample_corresponding(rig, s)
        assert contract(t, [plucker(x) for x in subs]) == 0


def test_ambient_action_scales_by_det():
    rng = random.Random(21)
    rig = random_rig(4, (3, 3, 2), (2, 2, 1), seed=21)
    t = build_tensor(rig)
    for _ in range(5):
        g = random_invertible(5, rng, 3)
        assert build_tensor(act_ambient(rig, g)) == t.scale(det(g))


def test_view_actions_keep_flattening_ranks():
    rng = random.Random(22)
    rig = random_rig(4, (2, 2, 2), (2, 2, 1), seed=22)
    franks = flattening_ranks(build_tensor(rig))
    for _ in range(5):
        gs = [random_invertible(h + 1, rng, 3) for h in rig.hs]
        t2 = build_tensor(act_views(rig, gs))
        assert flattening_ranks(t2) == franks


def test_parallel_build_matches_serial(monkeypatch):
    rig = random_rig(4, (3, 3, 2), (2, 2, 1), seed=5)
    serial = build_tensor(rig, workers=1)
    monkeypatch.setenv("GRASSTENSOR_THREADS", "2")
    assert build_tensor(rig, workers=2) == serial


def test_json_round_trip():
    rig = random_rig(3, (2, 2, 2), (2, 1, 1), seed=9)
    t = build_tensor(rig)
    assert GrassmannTensor.from_json(t.to_json()) == t


def test_flatten_layout():
    entries = [Fraction(i) for i in range(2 * 3 * 2)]
    t = GrassmannTensor((2, 3, 2), entries)
    f2 = flatten(t, 2)
    assert f2.shape == (3, 4)
    for a, b, c in product(range(1, 3), range(1, 4), range(1, 3)):
        assert f2[b - 1, (a - 1) * 2 + (c - 1)] == t.entry(a, b, c)


def test_verify_decomposition():
    dims = (3, 3, 3)
    terms = [RankOneTerm.from_supports(dims, 1, 1, {1: 1, 2: 1}), RankOneTerm.from_supports(dims, 2, 3, 3)]
    flat = [Fraction(0)] * 27
    flat[0] = flat[1] = Fraction(2)
    flat[(1 * 3 + 2) * 3 + 2] = Fraction(-1)
    t = GrassmannTensor(dims, flat)
    check = verify_decomposition(t, terms)
    assert check.ok and check.coefficients == (2, -1)
    assert not verify_decomposition(t, terms[:1]).ok


def test_zero_factor_rejected():
    with pytest.raises(Exception):
        RankOneTerm(((0, 0), (1, 0)))


def test_equal_up_to_scale():
    rig = random_rig(3, (2, 2, 2), (2, 1, 1), seed=3)
    t = build_tensor(rig)
    assert equal_up_to_scale(t, t.scale(Fraction(-3, 7)))
    assert not equal_up_to_scale(t, GrassmannTensor(t.mode_dims, [Fraction(1)] * 27))
