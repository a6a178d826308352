import dataclasses
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from bcalc import boperators as bop
from bcalc import numeric as num
from bcalc.errors import (
    CompositionUndefined,
    InadmissibleWeight,
    NotBElliptic,
)
from bcalc.indexsets import EMPTY, SMOOTH, IndexEntry, IndexSet
from bcalc.rationals import ComplexRational as CR


def S(*entries):
    return IndexSet.from_entries(entries)


def op_from(*coeff_lists):
    return bop.BDiffOp.from_lists(coeff_lists)


# -- operators and indicial data ----------------------------------------------


def test_operator_validation():
    with pytest.raises(ValueError):
        bop.BDiffOp.from_lists([[1], [0]])  # leading coefficient vanishes identically
    op = bop.BDiffOp.from_lists([[1, 2], [0, 1]])
    assert op.order == 1
    assert not op.has_constant_coefficients
    assert bop.BDiffOp.from_lists([[3], [5]]).has_constant_coefficients


def test_indicial_requires_boundary_ellipticity():
    with pytest.raises(NotBElliptic):
        bop.indicial(op_from([1], [0, 1]))  # a_1 = x vanishes at 0


def test_spec_b_first_order():
    for c in (Fraction(1), Fraction(-1, 2), Fraction(7, 3)):
        ind = bop.indicial(op_from([c], [1]))
        assert ind.spec_b == (IndexEntry(CR.of(-c), 0),)


def test_spec_b_double_root():
    ind = bop.indicial(op_from([0], [0], [1]))  # z^2
    assert {(e.z.re, e.p) for e in ind.spec_b} == {(0, 0), (0, 1)}
    assert ind.roots[0].multiplicity == 2 and ind.roots[0].exact


def test_spec_b_with_multiplicity():
    ind = bop.indicial(op_from([0], [0], [1], [1]))  # z^2 (z + 1)
    assert {(e.z.re, e.p) for e in ind.spec_b} == {(-1, 0), (0, 0), (0, 1)}
    assert sum(r.multiplicity for r in ind.roots) == 3


def test_exact_rational_root_recovery():
    # (z - 1)^2 (z + 1) = z^3 - z^2 - z + 1
    ind = bop.indicial(op_from([1], [-1], [-1], [1]))
    roots = {(r.value.re, r.multiplicity, r.exact) for r in ind.roots}
    assert roots == {(Fraction(1), 2, True), (Fraction(-1), 1, True)}


def test_gaussian_rational_roots_verified_exactly():
    ind = bop.indicial(op_from([1], [0], [1]))  # z^2 + 1
    roots = {(r.value.re, r.value.im, r.exact) for r in ind.roots}
    assert roots == {(Fraction(0), Fraction(1), True), (Fraction(0), Fraction(-1), True)}


def test_irrational_roots_stay_numeric():
    ind = bop.indicial(op_from([-2], [0], [1]))  # z^2 - 2
    assert all(not r.exact for r in ind.roots)
    for r in ind.roots:
        assert abs(float(r.value.re) ** 2 - 2.0) < 1e-9


def test_perturbed_double_root_clusters():
    eps = Fraction(2, 10**20)
    ind = bop.indicial(op_from([1 - eps], [-2], [1]))
    assert len(ind.roots) == 1
    root = ind.roots[0]
    assert root.multiplicity == 2 and not root.exact
    assert abs(float(root.value.re) - 1.0) <= 1e-9
    assert {(e.z.re, e.p) for e in ind.spec_b} == {(Fraction(1), 0), (Fraction(1), 1)}


def test_operator_json_roundtrip():
    op = op_from([Fraction(1, 2), 3], [CR.of(2, 1)])
    again = bop.BDiffOp.from_jsonable(json.loads(json.dumps(op.to_jsonable())))
    assert again.coeffs == op.coeffs


# -- weight splits ---------------------------------------------------------------


def test_split_first_order_both_sides():
    c = Fraction(2, 3)
    ind = bop.indicial(op_from([c], [1]))  # root -c
    e_lb, e_rb = bop.split_spec(ind, -c + 1)  # above -Re c
    assert e_lb == EMPTY and e_rb == S((c, 0))
    e_lb, e_rb = bop.split_spec(ind, -c - 1)  # below -Re c
    assert e_lb == S((-c, 0)) and e_rb == EMPTY


def test_split_symmetric_second_order():
    ind = bop.indicial(op_from([-1], [0], [1]))  # roots +-1
    e_lb, e_rb = bop.split_spec(ind, 0)
    assert e_lb == S((1, 0)) and e_rb == S((1, 0))


def test_split_rejects_weight_on_root():
    c = Fraction(2, 3)
    ind = bop.indicial(op_from([c], [1]))
    with pytest.raises(InadmissibleWeight):
        bop.split_spec(ind, -c)


def test_split_locally_constant_between_roots():
    ind = bop.indicial(op_from([Fraction(-1, 2)], [Fraction(1, 2)], [1]))  # roots 1/2, -1
    assert bop.split_spec(ind, Fraction(-1, 4)) == bop.split_spec(ind, Fraction(1, 4))
    assert bop.split_spec(ind, Fraction(-1, 4)) != bop.split_spec(ind, 2)


def test_split_reassembles_spectrum():
    # roots in different integer chains so completion loses nothing
    ind = bop.indicial(op_from([Fraction(-1, 2)], [Fraction(1, 2)], [1]))  # (z+1)(z-1/2)
    for gamma in (Fraction(-3), Fraction(0), Fraction(4)):
        e_lb, e_rb = bop.split_spec(ind, gamma)
        rebuilt = set()
        for g in e_lb.generators:
            rebuilt.update((g.z, q) for q in range(g.p + 1))
        for g in e_rb.generators:
            rebuilt.update((-g.z, q) for q in range(g.p + 1))
        assert rebuilt == {(e.z, e.p) for e in ind.spec_b}


# -- model inverses ----------------------------------------------------------------


def test_model_kernel_first_order():
    c = Fraction(1, 2)
    kernel = bop.model_inverse(bop.indicial(op_from([c], [1])), 0)
    assert kernel.terms == (bop.KernelTerm(CR.of(c), 0, "rb", CR.of(1)),)
    assert kernel.evaluate(0.25) == pytest.approx(0.5)
    assert kernel.evaluate(2.0) == 0.0
    e_lb, e_rb = kernel.index_sets()
    assert e_lb == EMPTY and e_rb == S((c, 0))


def test_model_kernel_complex_coefficient():
    c = CR.of(2, 1)
    kernel = bop.model_inverse(bop.indicial(op_from([c], [1])), -1)  # above -Re c = -2
    assert kernel.terms == (bop.KernelTerm(c, 0, "rb", CR.of(1)),)


def test_model_kernel_double_root_makes_log():
    kernel = bop.model_inverse(bop.indicial(op_from([1], [2], [1])), 0)  # (z+1)^2
    assert kernel.terms == (bop.KernelTerm(CR.of(1), 1, "rb", CR.of(1)),)
    s = 0.3
    assert kernel.evaluate(s) == pytest.approx(s * math.log(1 / s))


def test_model_kernel_two_sided():
    kernel = bop.model_inverse(bop.indicial(op_from([-1], [0], [1])), 0)  # z^2 - 1
    sides = {(t.side, t.z.re, t.coeff.re) for t in kernel.terms}
    assert sides == {("rb", Fraction(1), Fraction(-1, 2)), ("lb", Fraction(1), Fraction(-1, 2))}
    assert kernel.evaluate(0.5) == pytest.approx(-0.25)
    assert kernel.evaluate(2.0) == pytest.approx(-0.25)


def test_double_root_kernel_matches_self_convolution():
    c = Fraction(1, 2)
    k1 = bop.model_inverse(bop.indicial(op_from([c], [1])), 0)
    kd = bop.model_inverse(bop.indicial(op_from([c * c], [2 * c], [1])), 0)  # (z+c)^2
    grid = np.linspace(0.05, 0.95, 10)
    conv = num.convolve_model_kernels(k1, k1, grid)
    expected = np.array([kd.evaluate(s) for s in grid])
    assert np.max(np.abs(conv.values - expected)) < 1e-9


def test_model_kernel_for_irrational_roots():
    op = op_from([-2], [0], [1])  # roots +-sqrt(2), numeric partial fractions
    kernel = bop.model_inverse(bop.indicial(op), 0)
    amp = 1.0 / (2.0 * math.sqrt(2.0))
    for t in kernel.terms:
        assert abs(float(t.z.re) - math.sqrt(2.0)) < 1e-9
        assert abs(float(t.coeff.re) + amp) < 1e-12
    report = bop.apply_check(op, kernel, num.smooth_bump(2.0, 1.0), (1.0, 3.0))
    assert report.max_residual < 2e-5


def test_model_inverse_rejects_weight_on_root():
    with pytest.raises(InadmissibleWeight):
        bop.model_inverse(bop.indicial(op_from([1], [1])), -1)


def test_kernel_json_roundtrip():
    kernel = bop.model_inverse(bop.indicial(op_from([-1], [0], [1])), 0)
    again = bop.ModelKernel.from_jsonable(json.loads(json.dumps(kernel.to_jsonable())))
    assert again == kernel


# -- apply_check ----------------------------------------------------------------------


def test_apply_check_inverts_first_order():
    op = op_from([1], [1])
    kernel = bop.model_inverse(bop.indicial(op), 0)
    v = num.smooth_bump(2.0, 1.0)
    report = bop.apply_check(op, kernel, v, (1.0, 3.0))
    assert report.max_residual < 1e-6


def test_apply_check_flags_wrong_side():
    op = op_from([1], [1])
    kernel = bop.model_inverse(bop.indicial(op), 0)
    swapped = bop.ModelKernel(tuple(
        dataclasses.replace(t, side="lb" if t.side == "rb" else "rb")
        for t in kernel.terms
    ))
    v = num.smooth_bump(2.0, 1.0)
    report = bop.apply_check(op, swapped, v, (1.0, 3.0))
    assert report.max_residual > 0.01


def test_apply_check_zero_input():
    op = op_from([1], [1])
    kernel = bop.model_inverse(bop.indicial(op), 0)
    report = bop.apply_check(op, kernel, lambda t: 0.0, (1.0, 3.0))
    assert report.max_residual == 0.0


def test_apply_check_rejects_variable_coefficients():
    op = op_from([1, 1], [1])
    kernel = bop.model_inverse(bop.indicial(op), 0)
    with pytest.raises(ValueError):
        bop.apply_check(op, kernel, lambda t: 0.0, (1.0, 3.0))


# -- descriptor algebra ------------------------------------------------------------------


def test_compose_descriptors_model_inverse_squared():
    c = Fraction(2, 3)
    q = bop.FullCalcDescriptor(-1.0, EMPTY, S((c, 0)))
    qq = bop.compose_descriptors(q, q)
    assert qq.order == -2.0
    assert qq.E_lb == EMPTY
    assert qq.E_rb == S((c, 0), (c, 1))


def test_compose_descriptors_identity_neutral():
    p = bop.FullCalcDescriptor(2.0, S((1, 0)), S((Fraction(1, 2), 1)))
    assert bop.compose_descriptors(p, bop.IDENTITY_DESCRIPTOR) == p
    assert bop.compose_descriptors(bop.IDENTITY_DESCRIPTOR, p) == p


def test_compose_descriptors_threshold():
    p = bop.FullCalcDescriptor(0.0, EMPTY, S((0, 0)))
    q = bop.FullCalcDescriptor(0.0, S((0, 0)), EMPTY)
    with pytest.raises(CompositionUndefined):
        bop.compose_descriptors(p, q)


def test_compose_log_growth_bounded():
    a = S((1, 1))
    p = bop.FullCalcDescriptor(0.0, a, a)
    pp = bop.compose_descriptors(p, p)
    for entry in pp.E_rb.truncate(5):
        base = a.max_log_power(entry.z)
        assert entry.p <= 2 * base + 1


def test_action_index_examples():
    c = Fraction(2, 3)
    q = bop.FullCalcDescriptor(-1.0, EMPTY, S((c, 0)))
    assert bop.action_index(q, SMOOTH) == SMOOTH
    w = Fraction(1, 5)
    assert bop.action_index(q, S((w, 0))) == S((w, 0))
    with pytest.raises(CompositionUndefined):
        bop.action_index(q, S((-c, 0)))


def test_descriptor_json_roundtrip():
    d = bop.FullCalcDescriptor(-math.inf, S((1, 0)), EMPTY)
    again = bop.FullCalcDescriptor.from_jsonable(json.loads(json.dumps(d.to_jsonable())))
    assert again == d


# -- parametrix bookkeeping -----------------------------------------------------------------


def test_parametrix_step_zero_is_small_calculus():
    op = op_from([Fraction(1, 2)], [1])
    report = bop.parametrix_indices(op, 0, 0)
    assert report.parametrix == bop.FullCalcDescriptor(-1.0, EMPTY, EMPTY)
    assert report.remainder.E_lb == EMPTY and report.remainder.E_rb == EMPTY


def test_parametrix_first_step_carries_split():
    c = Fraction(1, 2)
    report = bop.parametrix_indices(op_from([c], [1]), 0, 1)
    assert report.parametrix == bop.FullCalcDescriptor(-1.0, EMPTY, S((c, 0)))
    assert report.remainder.E_rb == S((c, 0))


def test_parametrix_second_step_raises_log_power():
    c = Fraction(1, 2)
    report = bop.parametrix_indices(op_from([c], [1]), 0, 2)
    assert report.parametrix.E_rb == S((c, 0), (c, 1))
    assert report.parametrix.E_lb == EMPTY
    assert report.remainder.E_rb == S((c, 0), (c, 1))
    assert len(report.steps) >= 2


def test_parametrix_split_always_composable():
    # the weight split guarantees inf E_rb + inf E_lb > 0, so deep Neumann
    # iterations never hit the composition threshold
    op = op_from([Fraction(-1, 2)], [Fraction(1, 2)], [1])  # roots 1/2 and -1
    report = bop.parametrix_indices(op, 0, 4)
    assert report.parametrix.E_lb.max_log_power(Fraction(1, 2)) == 3
    assert report.parametrix.E_rb.max_log_power(Fraction(1)) == 3


# -- front-face criterion ----------------------------------------------------------------


def test_hs_zero_kernel():
    report = bop.hs_front_face_criterion(
        lambda x, s: 0.0, 4.0, 1e-3,
        spec=num.QuadratureSpec(1e-8, 1e-8, 100), n_eps=3,
    )
    assert report.slope == pytest.approx(0.0, abs=1e-12)
    assert report.reference == pytest.approx(0.0, abs=1e-12)
    assert all(n == pytest.approx(0.0, abs=1e-12) for n in report.norms)


def test_hs_vanishing_restriction_has_bounded_norm():
    bump = num.smooth_bump(1.0, 0.5)
    report = bop.hs_front_face_criterion(
        lambda x, s: x * bump(s), 4.0, 1e-2,
        spec=num.QuadratureSpec(1e-9, 1e-9, 200), n_eps=3,
    )
    assert abs(report.slope) < 1e-4
    assert report.reference == pytest.approx(0.0, abs=1e-12)
