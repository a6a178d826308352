"""Acceptance gate: every criterion of the verification suite, one test per
criterion, with a printed pass/fail line each.  Tolerances live inside the
case functions and are pinned there.
"""
import pytest

from bcalc import verify


def _ids():
    return [f"{cid:02d}-{name.replace(' ', '-')}" for cid, name, _ in verify.CASES]


@pytest.mark.parametrize("case", verify.CASES, ids=_ids())
def test_acceptance_criterion(case, capsys):
    cid, name, fn = case
    try:
        detail = fn()
    except Exception as exc:
        with capsys.disabled():
            print(f"\nACCEPTANCE {cid:2d} FAIL {name}: {type(exc).__name__}: {exc}")
        raise
    with capsys.disabled():
        print(f"\nACCEPTANCE {cid:2d} PASS {name}: {detail}")


def test_every_criterion_is_registered():
    assert [cid for cid, _, _ in verify.CASES] == list(range(1, 14))
    assert set(verify.SUITES["all"]) == set(range(1, 14))
