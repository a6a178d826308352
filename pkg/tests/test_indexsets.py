import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from bcalc.indexsets import (
    EMPTY,
    SMOOTH,
    IndexEntry,
    IndexFamily,
    IndexSet,
    complete,
)
from bcalc.geometry import model_quadrant
from bcalc.rationals import ComplexRational as CR


def S(*entries):
    return IndexSet.from_entries(entries)


def gens(s):
    return {(g.z.re, g.z.im, g.p) for g in s.generators}


# -- construction and completion ---------------------------------------------


def test_complete_empty():
    assert complete([]) == EMPTY
    assert EMPTY.is_empty


def test_complete_single_zero_is_smooth_chain():
    s = complete([(0, 0)])
    assert s == SMOOTH
    assert [e.z.re for e in s.truncate(4)] == [0, 1, 2, 3, 4]
    assert all(e.p == 0 for e in s.truncate(4))


def test_complete_keeps_incomparable_generators():
    s = complete([(-1, 0), (0, 1)])
    assert gens(s) == {(Fraction(-1), 0, 0), (Fraction(0), 0, 1)}


def test_complete_idempotent():
    s = complete([(Fraction(1, 2), 2), (Fraction(3, 2), 1), (2, 0)])
    assert IndexSet.from_entries(s.sorted_generators()) == s


def test_reduction_drops_implied_entries():
    # (3, 1) lies in the closure of (1, 2)
    s = complete([(1, 2), (3, 1)])
    assert gens(s) == {(Fraction(1), 0, 2)}


def test_log_power_must_be_non_negative():
    with pytest.raises(ValueError):
        IndexEntry(CR.of(0), -1)


# -- membership, truncation, inf ----------------------------------------------


def test_membership_rule():
    s = S((Fraction(1, 2), 1))
    assert s.contains(Fraction(1, 2), 1)
    assert s.contains(Fraction(5, 2), 0)
    assert not s.contains(Fraction(1, 2), 2)
    assert not s.contains(Fraction(3, 4), 0)
    assert not s.contains(Fraction(-1, 2), 0)


def test_truncate_examples():
    assert [(e.z.re, e.p) for e in SMOOTH.truncate(2)] == [(0, 0), (1, 0), (2, 0)]
    assert EMPTY.truncate(100) == ()
    half = S((Fraction(1, 2), 1))
    assert [(e.z.re, e.p) for e in half.truncate(Fraction(5, 2))] == [
        (Fraction(1, 2), 0), (Fraction(1, 2), 1),
        (Fraction(3, 2), 0), (Fraction(3, 2), 1),
        (Fraction(5, 2), 0), (Fraction(5, 2), 1),
    ]


def test_inf_re():
    assert S((2, 0), (3, 1)).inf_re() == 2
    assert EMPTY.inf_re() == math.inf
    assert S((-1, 0), (Fraction(1, 2), 0)).inf_re() == -1


# -- union, extended union, sum ------------------------------------------------


def test_union_examples():
    assert EMPTY.union(S((1, 0))) == S((1, 0))
    assert S((0, 0)).union(S((0, 0))) == S((0, 0))
    assert gens(S((0, 0)) | S((Fraction(1, 2), 0))) == {
        (Fraction(0), 0, 0), (Fraction(1, 2), 0, 0)
    }


def test_extended_union_trivial_cases():
    f = S((Fraction(3, 2), 2))
    assert EMPTY.extended_union(f) == f
    assert f.extended_union(EMPTY) == f


def test_extended_union_two_smooth_sets():
    lg = SMOOTH.extended_union(SMOOTH)
    assert [(e.z.re, e.p) for e in lg.truncate(1)] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_extended_union_same_exponent():
    c = Fraction(2, 3)
    s = S((c, 0)).extended_union(S((c, 0)))
    assert gens(s) == {(c, 0, 1)}  # (c,1) implies (c,0)
    assert s.contains(c, 0) and s.contains(c, 1) and s.contains(c + 1, 1)


def test_extended_union_different_chains_no_cross_terms():
    s = S((0, 0)).extended_union(S((Fraction(1, 2), 0)))
    assert s.max_log_power(0) == 0
    assert s.max_log_power(Fraction(1, 2)) == 0


def test_extended_union_shifted_chains_cross_at_larger_re():
    # chains {0,1,2,...} and {2,3,...} share z >= 2
    s = S((0, 0)).extended_union(S((2, 0)))
    assert s.max_log_power(0) == 0
    assert s.max_log_power(1) == 0
    assert s.max_log_power(2) == 1


def test_sum_examples():
    assert SMOOTH + SMOOTH == SMOOTH
    c = Fraction(2, 3)
    assert S((c, 0)) + SMOOTH == S((c, 0))
    assert gens(S((Fraction(1, 2), 1)) + S((Fraction(1, 3), 2))) == {
        (Fraction(5, 6), 0, 3)
    }
    assert (EMPTY + SMOOTH).is_empty


# -- shift / scale / negate ------------------------------------------------------


def test_shift_and_scale():
    s = S((1, 0))
    assert s.shift(1) == S((2, 0))
    assert s.shift(-1).inf_re() == 0
    scaled = s.scale_down(2)
    assert gens(scaled) == {(Fraction(1, 2), 0, 0), (Fraction(1), 0, 0)}
    assert scaled.contains(Fraction(3, 2), 0)


def test_negate_examples():
    c = Fraction(2, 3)
    assert [(e.z.re, e.p) for e in S((c, 0)).negate()] == [(-c, 0)]
    assert EMPTY.negate() == ()
    assert [(e.z.re, e.p) for e in S((1, 0), (2, 1)).negate()] == [(-2, 1), (-1, 0)]


# -- complex exponents ------------------------------------------------------------


def test_imaginary_parts_separate_chains():
    a = IndexSet.from_entries([(CR.of(0, 1), 0)])
    b = IndexSet.from_entries([(CR.of(0, -1), 0)])
    assert a != b
    assert not a.contains(CR.of(0, -1), 0)
    u = a.extended_union(b)
    assert u.max_log_power(CR.of(0, 1)) == 0  # no cross terms across chains


# -- properties ---------------------------------------------------------------------

fracs = st.builds(Fraction, st.integers(-4, 8), st.integers(1, 3))
entry_specs = st.tuples(fracs, st.integers(0, 3))
index_sets = st.builds(IndexSet.from_entries, st.lists(entry_specs, max_size=4))


@given(index_sets, index_sets)
def test_extended_union_commutes(e, f):
    assert e.extended_union(f) == f.extended_union(e)


@settings(max_examples=60)
@given(index_sets, index_sets, index_sets)
def test_extended_union_associates(e, f, g):
    left = e.extended_union(f).extended_union(g)
    right = e.extended_union(f.extended_union(g))
    assert left.truncate(10) == right.truncate(10)
    assert left == right


@given(index_sets, index_sets)
def test_sum_commutes(e, f):
    assert e + f == f + e


@given(index_sets)
def test_smooth_set_neutral_for_sum(e):
    assert e + SMOOTH == e


@given(index_sets, index_sets)
def test_inf_laws(e, f):
    u = e.extended_union(f)
    assert u.inf_re() == min(e.inf_re(), f.inf_re())
    s = e + f
    if not e.is_empty and not f.is_empty:
        assert s.inf_re() == e.inf_re() + f.inf_re()
    else:
        assert s.is_empty


@given(index_sets)
def test_truncate_complete_roundtrip(e):
    t = e.truncate(10)
    assert complete(t).truncate(10) == t


@given(index_sets)
def test_union_members_are_members_of_either(e):
    f = e.shift(Fraction(1, 2))
    u = e | f
    for entry in u.truncate(6):
        assert e.contains(entry.z, entry.p) or f.contains(entry.z, entry.p)


@given(index_sets, index_sets)
def test_equality_matches_truncation_comparison(e, f):
    res = [g.z.re for g in e.generators] + [g.z.re for g in f.generators]
    bound = (max(res) if res else 0) + 1
    assert (e == f) == (e.truncate(bound) == f.truncate(bound))


@given(index_sets)
def test_json_roundtrip(e):
    data = json.loads(json.dumps(e.to_jsonable()))
    assert IndexSet.from_jsonable(data) == e


def test_jsonable_is_sorted():
    s = S((2, 0), (Fraction(1, 2), 1), (Fraction(1, 2), 0))
    res = [g["re"] for g in s.to_jsonable()["generators"]]
    assert res == sorted(res, key=Fraction)


# -- families --------------------------------------------------------------------


def test_family_validates_lattice_names():
    lat = model_quadrant(2, 2, ("Hx", "Hy"))
    fam = IndexFamily.of({"Hx": SMOOTH, "Hy": EMPTY}, lat)
    assert fam["Hx"] == SMOOTH
    with pytest.raises(ValueError):
        IndexFamily.of({"Hx": SMOOTH}, lat)
    with pytest.raises(ValueError):
        IndexFamily.of({"Hx": SMOOTH, "Hy": SMOOTH, "Hz": SMOOTH}, lat)


def test_family_shift_and_sum():
    lat = model_quadrant(2, 2, ("Hx", "Hy"))
    fam = IndexFamily.of({"Hx": S((1, 0)), "Hy": SMOOTH}, lat)
    shifted = fam.shift(1)
    assert shifted["Hx"] == S((2, 0))
    both = fam.sum_with(fam)
    assert both["Hx"] == S((2, 0))
    assert both["Hy"] == SMOOTH


def test_family_json_roundtrip():
    lat = model_quadrant(2, 2, ("Hx", "Hy"))
    fam = IndexFamily.of({"Hx": S((Fraction(1, 2), 1)), "Hy": EMPTY}, lat)
    assert IndexFamily.from_jsonable(fam.to_jsonable()) == fam
