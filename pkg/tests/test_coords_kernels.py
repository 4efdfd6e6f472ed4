import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qconverse import _kernels_py, kernels
from qconverse.asymptotics import _shell_logs
from qconverse.sdpcore import coords
from strategies import random_hermitian, seeds, small_dims

fields = st.sampled_from(["complex", "real"])


def _sample(rng, n, field):
    m = random_hermitian(rng, n)
    return m if field == "complex" else m.real


@given(seeds, small_dims, fields)
def test_hvec_is_an_isometry(seed, n, field):
    rng = np.random.default_rng(seed)
    x, y = _sample(rng, n, field), _sample(rng, n, field)
    assert coords.hvec(x, field) @ coords.hvec(y, field) == pytest.approx(np.trace(x @ y).real, abs=1e-10)
    assert len(coords.hvec(x, field)) == coords.coord_size(n, field)
    np.testing.assert_allclose(coords.hmat(coords.hvec(x, field), n, field), x, atol=1e-14)


def test_basis_is_orthonormal():
    b = coords.basis(3)
    gram = np.einsum("pab,qba->pq", b, b).real
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-14)


def test_map_matrix_of_transpose_is_orthogonal():
    m = coords.map_matrix(lambda x: np.swapaxes(x, -1, -2), 3)
    np.testing.assert_allclose(m @ m.T, np.eye(9), atol=1e-14)


def _pd(rng, n, field):
    g = _sample(rng, n, field)
    return g @ g.conj().T + np.eye(n)


@given(seeds, small_dims, fields)
@settings(max_examples=30)
def test_scaling_matrix_represents_congruence(seed, n, field):
    rng = np.random.default_rng(seed)
    w, x = _pd(rng, n, field), _sample(rng, n, field)
    p = kernels.scaling_matrix(w, field)
    np.testing.assert_allclose(p @ coords.hvec(x, field), coords.hvec(w @ x @ w, field), atol=1e-10)


@pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled extension not built")
@given(seeds, st.integers(1, 7), fields)
@settings(max_examples=40)
def test_compiled_scaling_matches_numpy(seed, n, field):
    w = _pd(np.random.default_rng(seed), n, field)
    np.testing.assert_allclose(kernels.scaling_matrix(w, field), _kernels_py.scaling_matrix(w, field), atol=1e-12)


@pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled extension not built")
@pytest.mark.parametrize("n,d,p,eps", [(1, 2, 0.5, 0.05), (50, 3, 0.2, 0.3), (5000, 2, 0.9, 0.01)])
def test_compiled_shell_test_matches_numpy(n, d, p, eps):
    lp, lq = _shell_logs(n, d, p)
    target = np.log1p(-eps)
    fast = kernels.shell_test(lp, lq, target)
    slow = _kernels_py.shell_test(lp, lq, target)
    assert fast[0] == slow[0]
    assert fast[1] == pytest.approx(slow[1], abs=1e-14)
    assert fast[2] == pytest.approx(slow[2], rel=1e-14)


def test_shell_test_randomizes_the_boundary_shell():
    # two shells of mass 1/2 each; accepting 3/4 takes all of the first and half of the second
    lp = np.log([0.5, 0.5])
    lq = np.log([0.1, 0.9])
    boundary, gamma, log_beta = _kernels_py.shell_test(lp, lq, np.log(0.75))
    assert boundary == 1
    assert gamma == pytest.approx(0.5)
    assert np.exp(log_beta) == pytest.approx(0.1 + 0.45)


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")
