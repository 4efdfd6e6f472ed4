"""The frozen tables must still agree with the oracles that produced them."""

from fractions import Fraction

import pytest

import frozen
from oracles import classical_dh, erasure_dh_exact


@pytest.mark.parametrize("n", [1, 2, 100])
def test_erasure_table_matches_exact_rationals(n):
    assert erasure_dh_exact(n, 2, Fraction(1, 2), Fraction(1, 20)) == pytest.approx(
        frozen.ERASURE_D2_P05_EPS005[n], abs=1e-12
    )


def test_erasure_grid_matches_exact_rationals():
    for (d, p, eps), value in frozen.ERASURE_N1.items():
        got = erasure_dh_exact(1, d, Fraction(str(p)), Fraction(str(eps)))
        assert got == pytest.approx(value, abs=1e-12)


def test_classical_table_matches_lp():
    for (p0, p1, eps), value in frozen.CLASSICAL_DH:
        assert classical_dh(p0, p1, eps) == pytest.approx(value, abs=1e-9)


def test_two_copy_entry_matches_exact_rationals():
    got = erasure_dh_exact(2, 2, Fraction(1, 4), Fraction(1, 10))
    assert got == pytest.approx(frozen.ERASURE_N2_D2_P025_EPS01, abs=1e-12)
