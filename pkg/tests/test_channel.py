import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qconverse import channel, linops
from strategies import random_density, seeds

BUILTINS = [
    ("erasure d=2 p=.3", lambda: channel.erasure_channel(2, 0.3), lambda: channel.erasure_kraus(2, 0.3)),
    ("erasure d=3 p=.8", lambda: channel.erasure_channel(3, 0.8), lambda: channel.erasure_kraus(3, 0.8)),
    ("depolarizing .2", lambda: channel.depolarizing_channel(0.2), lambda: channel.depolarizing_kraus(0.2)),
]


@pytest.mark.parametrize("label,make,kraus", BUILTINS, ids=[b[0] for b in BUILTINS])
def test_builtin_kraus_reproduces_choi(label, make, kraus):
    np.testing.assert_allclose(channel.from_kraus(kraus()).op, make().op, atol=1e-10)


@pytest.mark.parametrize(
    "descriptor",
    [
        "erasure:d=2,p=0.5",
        "erasure:d=3,p=0",
        "depolarizing:p=0.75",
        "noiseless:m=3",
        "identity:d=2",
        "classical:q=0.1",
        "classical:matrix=0.9;0.2/0.1;0.8",
        "constant:d=3,dout=2",
        "constant:d=2,sigma=0.7;0.3",
        "random:din=2,dout=3,seed=4",
        "random:din=3,dout=2,rank=2,seed=1",
    ],
)
def test_every_builtin_validates_as_channel(descriptor):
    c = channel.spec_to_choi(channel.parse_descriptor(descriptor))
    assert channel.validate(c).passed


def test_kraus_round_trip(rng):
    c = channel.random_channel(3, 2, rng)
    np.testing.assert_allclose(channel.from_kraus(channel.to_kraus(c)).op, c.op, atol=1e-12)


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_tensor_acts_on_products(seed):
    rng = np.random.default_rng(seed)
    a = channel.random_channel(2, 3, rng)
    b = channel.random_channel(2, 2, rng, rank=2)
    rho, sigma = random_density(rng, 2), random_density(rng, 2)
    lhs = channel.apply(channel.tensor(a, b), np.kron(rho, sigma))
    np.testing.assert_allclose(lhs, np.kron(channel.apply(a, rho), channel.apply(b, sigma)), atol=1e-9)


@given(seeds, st.integers(2, 3), st.integers(2, 3))
@settings(max_examples=25, deadline=None)
def test_purified_maximally_mixed_input_gives_normalized_choi(seed, da, db):
    c = channel.random_channel(da, db, np.random.default_rng(seed))
    out = channel.output_with_purified_input(c, np.eye(da) / da)
    np.testing.assert_allclose(out, c.op / da, atol=1e-12, rtol=0)


def test_erasure_action():
    rho = np.array([[0.6, 0.2j], [-0.2j, 0.4]])
    out = channel.apply(channel.erasure_channel(2, 0.25), rho)
    expected = np.zeros((3, 3), dtype=complex)
    expected[:2, :2] = 0.75 * rho
    expected[2, 2] = 0.25
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_erasure_is_unitarily_covariant(rng):
    u = channel.random_unitary(2, rng)
    v = np.eye(3, dtype=complex)
    v[:2, :2] = u
    ok, worst = channel.is_covariant(channel.erasure_channel(2, 0.4), [(u, v)])
    assert ok and worst < 1e-12


def test_depolarizing_is_weyl_covariant():
    pairs = [(w, w) for w in channel.weyl_operators(2)]
    assert channel.is_covariant(channel.depolarizing_channel(0.3), pairs)[0]


def test_random_channel_is_not_covariant_in_general(rng):
    u = channel.random_unitary(2, rng)
    ok, worst = channel.is_covariant(channel.random_channel(2, 2, rng), [(u, u)])
    assert not ok and worst > 1e-3


def test_validate_detects_trace_increase():
    doubled = channel.erasure_channel(2, 0.5).scaled(2.0)
    assert not channel.validate(doubled).passed
    assert not channel.validate(doubled, "subchannel").passed
    assert channel.validate(doubled.scaled(0.25), "subchannel").passed


def test_bad_inputs():
    with pytest.raises(ValueError):
        channel.erasure_channel(2, 1.5)
    with pytest.raises(ValueError):
        channel.classical_channel([[0.5, 0.5], [0.6, 0.5]])
    with pytest.raises(ValueError):
        channel.random_channel(4, 2, np.random.default_rng(0), rank=1)
    with pytest.raises(linops.DimensionError):
        channel.ChoiMatrix(2, 2, np.eye(3))
    with pytest.raises(linops.DimensionError):
        channel.apply(channel.noiseless_channel(2), np.eye(3))


def test_spec_json_round_trip(tmp_path, rng):
    c = channel.random_channel(2, 3, rng)
    path = tmp_path / "c.json"
    channel.save_spec(channel.choi_to_spec(c, "rand"), path)
    back = channel.spec_to_choi(channel.load_spec(path))
    np.testing.assert_array_equal(back.op, c.op)
    assert json.loads(path.read_text())["kind"] == "choi"


def test_kraus_spec(tmp_path):
    ops = channel.erasure_kraus(2, 0.5).operators
    doc = {"name": "er", "kind": "kraus", "parameters": {}, "data": [channel.encode_complex(k) for k in ops]}
    path = tmp_path / "k.json"
    path.write_text(json.dumps(doc))
    c = channel.spec_to_choi(channel.load_spec(path))
    np.testing.assert_allclose(c.op, channel.erasure_channel(2, 0.5).op, atol=1e-12)


def test_spec_errors_name_the_problem(tmp_path):
    with pytest.raises(channel.ChannelSpecError, match="nope.json"):
        channel.load_spec(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(channel.ChannelSpecError, match="not valid JSON"):
        channel.load_spec(bad)
    with pytest.raises(channel.ChannelSpecError, match="unknown builtin"):
        channel.spec_to_choi(channel.parse_descriptor("teleporter:d=2"))
    with pytest.raises(channel.ChannelSpecError):
        channel.parse_descriptor("erasure:d2")
    with pytest.raises(channel.ChannelSpecError, match="requires"):
        channel.spec_to_choi(channel.parse_descriptor("noiseless"))
    non_tp = channel.choi_to_spec(channel.erasure_channel(2, 0.5).scaled(1.5))
    with pytest.raises(channel.ChannelSpecError, match="validation"):
        channel.spec_to_choi(non_tp)
