import math

import numpy as np
import pytest

from qconverse import bounds, verify


def test_suite_result_bookkeeping():
    res = verify.SuiteResult("demo")
    res.add("a", 1e-9, 1e-8)
    res.add("b", 5e-9, 1e-8)
    assert res.passed
    assert res.worst == pytest.approx(0.5)
    assert res.worst_deviation == pytest.approx(5e-9)
    res.add("zero-tol", 0.0, 0.0)
    assert res.passed
    res.add("c", 2e-8, 1e-8)
    assert not res.passed and res.worst == pytest.approx(2.0)
    res2 = verify.SuiteResult("strict")
    res2.add("x", 1e-3, 0.0)
    assert res2.worst == math.inf


def test_guard_turns_solver_failures_into_errors():
    res = verify.SuiteResult("g")

    def boom():
        raise bounds.SolverFailure("x", type("S", (), {"status": "numerical-failure", "message": "m"})())

    res.guard("case", boom)
    assert not res.passed and "case" in res.errors[0]


def test_sampling_is_seeded():
    a = verify.sample_channel(np.random.default_rng(7))
    b = verify.sample_channel(np.random.default_rng(7))
    np.testing.assert_array_equal(a.op, b.op)
    assert set(a.dims) <= {2, 3}


@pytest.mark.parametrize("name", ["activation", "additivity", "ordering", "vbeta"])
def test_small_suites_pass(name):
    for res in verify.run_suite(name, seed=3, samples=2, ms=(2,) if name == "additivity" else None):
        assert res.passed, (res.name, res.errors, [c for c in res.checks if not c.passed])
        assert res.checks


@pytest.mark.parametrize("name", ["second-order", "moderate", "strong-converse"])
def test_closed_form_suites_pass(name):
    (res,) = verify.run_suite(name)
    assert res.passed


def test_unknown_suite():
    with pytest.raises(KeyError):
        verify.run_suite("nonsense")
