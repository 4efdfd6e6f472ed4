"""Choi-matrix representation of channels and CP maps.

The Choi matrix of ``N: A -> B`` is ``J = sum_ij |i><j| (x) N(|i><j|)`` on
``A (x) B``. Channels are trace preserving (``tr_B J = 1_A``), subchannels
trace non-increasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import linops
from .linops import DimensionError

TP_TOL = 1e-9
STATE_TOL = 1e-12
UNITARY_TOL = 1e-10
COVARIANCE_TOL = 1e-8


class ChannelSpecError(ValueError):
    """A channel description could not be parsed or does not validate."""


@dataclass(frozen=True)
class ChoiMatrix:
    dim_in: int
    dim_out: int
    op: np.ndarray = field(repr=False)

    def __post_init__(self):
        op = linops.hermitian(self.op)
        n = self.dim_in * self.dim_out
        if op.shape != (n, n):
            raise DimensionError(
                f"Choi matrix shape {op.shape} does not match {self.dim_in}x{self.dim_out}"
            )
        object.__setattr__(self, "op", op)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_in, self.dim_out)

    def scaled(self, factor: float) -> "ChoiMatrix":
        return ChoiMatrix(self.dim_in, self.dim_out, factor * self.op)


@dataclass(frozen=True)
class KrausSet:
    dim_in: int
    dim_out: int
    operators: tuple = ()

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        for k in ops:
            if k.shape != (self.dim_out, self.dim_in):
                raise DimensionError(
                    f"Kraus operator of shape {k.shape}, expected "
                    f"{(self.dim_out, self.dim_in)}"
                )
        object.__setattr__(self, "operators", ops)


@dataclass
class ValidationReport:
    mode: str
    psd_margin: float
    min_eigenvalue: float
    tp_residual: float
    passed: bool


def from_kraus(k: KrausSet) -> ChoiMatrix:
    da, db = k.dim_in, k.dim_out
    j = np.zeros((da * db, da * db), dtype=complex)
    for op in k.operators:
        # sum_i |i> (x) K|i>, entry i*db + a equals K[a, i]
        v = op.T.reshape(-1)
        j += np.outer(v, v.conj())
    return ChoiMatrix(da, db, j)


def to_kraus(c: ChoiMatrix, tol: float = 1e-12) -> KrausSet:
    """Kraus operators from the eigendecomposition of a PSD Choi matrix."""
    spec = linops.eigh(c.op)
    ops = []
    for lam, vec in zip(spec.eigenvalues, spec.eigenvectors.T):
        if lam > tol:
            ops.append(np.sqrt(lam) * vec.reshape(c.dim_in, c.dim_out).T)
    return KrausSet(c.dim_in, c.dim_out, tuple(ops))


def identity_channel(d: int) -> ChoiMatrix:
    return ChoiMatrix(d, d, linops.max_entangled(d))


def erasure_channel(d: int, p: float) -> ChoiMatrix:
    """``rho -> (1-p) rho + p |e><e|`` with the flag ``|e> = |d>`` in a ``d+1`` output."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {p}")
    if d < 2:
        raise ValueError("erasure channel needs input dimension d >= 2")
    do = d + 1
    embed = np.zeros((do, d))
    embed[:d, :d] = np.eye(d)
    iso = np.kron(np.eye(d), embed)
    flag = np.zeros((do, do))
    flag[d, d] = 1.0
    j = (1 - p) * iso @ linops.max_entangled(d) @ iso.T + p * np.kron(np.eye(d), flag)
    return ChoiMatrix(d, do, j)


def erasure_kraus(d: int, p: float) -> KrausSet:
    do = d + 1
    ops = [np.sqrt(1 - p) * np.eye(do, d)]
    for i in range(d):
        k = np.zeros((do, d))
        k[d, i] = np.sqrt(p)
        ops.append(k)
    return KrausSet(d, do, tuple(ops))


def classical_channel(t) -> ChoiMatrix:
    """Choi of a classical channel with column-stochastic ``t[j, i] = P(j | i)``."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 2:
        raise ValueError("transition matrix must be two-dimensional")
    if np.any(t < 0) or np.any(np.abs(t.sum(axis=0) - 1) > 1e-12):
        raise ValueError("transition matrix must be column stochastic")
    do, da = t.shape
    return ChoiMatrix(da, do, np.diag(t.T.reshape(-1)).astype(complex))


def noiseless_channel(m: int) -> ChoiMatrix:
    return classical_channel(np.eye(m))


def _check_state(sigma: np.ndarray) -> np.ndarray:
    sigma = linops.hermitian(sigma)
    if linops.min_eig(sigma) < -STATE_TOL or abs(np.trace(sigma).real - 1) > STATE_TOL:
        raise ValueError("sigma must be a density operator (PSD, unit trace)")
    return sigma


def constant_channel(sigma, dim_in: int) -> ChoiMatrix:
    sigma = _check_state(np.asarray(sigma, dtype=complex))
    return ChoiMatrix(dim_in, sigma.shape[0], np.kron(np.eye(dim_in), sigma))


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def depolarizing_kraus(p: float) -> KrausSet:
    """Qubit channel ``(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {p}")
    ops = [np.sqrt(1 - p) * np.eye(2)] + [np.sqrt(p / 3) * s for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    return KrausSet(2, 2, tuple(ops))


def depolarizing_channel(p: float) -> ChoiMatrix:
    return from_kraus(depolarizing_kraus(p))


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(
    dim_in: int, dim_out: int, rng: np.random.Generator, rank: int | None = None
) -> ChoiMatrix:
    """Channel whose Stinespring isometry is Haar-like random."""
    rank = rank or dim_in * dim_out
    if rank * dim_out < dim_in:
        raise ValueError(f"Kraus rank {rank} too small for a {dim_in}->{dim_out} channel")
    v = random_isometry(rank * dim_out, dim_in, rng)
    ops = [v[i * dim_out : (i + 1) * dim_out, :] for i in range(rank)]
    return from_kraus(KrausSet(dim_in, dim_out, tuple(ops)))


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_isometry(d, d, rng)


def tensor(a: ChoiMatrix, b: ChoiMatrix) -> ChoiMatrix:
    """Choi of ``a (x) b`` with systems regrouped as ``(A1 A2)(B1 B2)``."""
    t = np.kron(a.op, b.op).reshape(
        (a.dim_in, a.dim_out, b.dim_in, b.dim_out) * 2
    )
    # (a1 b1 a2 b2 | a1' b1' a2' b2') -> (a1 a2 b1 b2 | ...)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    n = a.dim_in * b.dim_in * a.dim_out * b.dim_out
    return ChoiMatrix(a.dim_in * b.dim_in, a.dim_out * b.dim_out, t.reshape(n, n))


def _check_input(c: ChoiMatrix, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (c.dim_in, c.dim_in):
        raise DimensionError(
            f"input of shape {rho.shape} for a channel with input dimension {c.dim_in}"
        )
    return rho


def apply(c: ChoiMatrix, rho) -> np.ndarray:
    """``N(rho) = tr_A [J (rho^T (x) 1_B)]``."""
    rho = _check_input(c, rho)
    t = c.op.reshape(c.dim_in, c.dim_out, c.dim_in, c.dim_out)
    return np.einsum("iajb,ij->ab", t, rho)


def output_with_purified_input(c: ChoiMatrix, rho) -> np.ndarray:
    """``(N (x) id)`` applied to the canonical purification of ``rho``.

    Returned on ``A (x) B`` as ``(sqrt(rho^T) (x) 1) J (sqrt(rho^T) (x) 1)``.
    """
    rho = _check_input(c, rho)
    s = np.kron(linops.sqrtm_psd(rho.T), np.eye(c.dim_out))
    return s @ c.op @ s


def validate(c: ChoiMatrix, mode: str = "channel") -> ValidationReport:
    if mode not in ("channel", "subchannel"):
        raise ValueError(f"mode must be 'channel' or 'subchannel', not {mode!r}")
    w = np.linalg.eigvalsh(c.op)
    margin = float(w[0] + linops.PSD_TOL * (1.0 + np.max(np.abs(w))))
    marg = linops.partial_trace(c.op, c.dims, keep="A")
    eye = np.eye(c.dim_in)
    if mode == "channel":
        tp = float(np.linalg.norm(marg - eye, 2))
    else:
        # amount by which tr_B J exceeds the identity
        tp = max(0.0, float(np.linalg.eigvalsh(marg - eye)[-1]))
    return ValidationReport(mode, margin, float(w[0]), tp, margin >= 0.0 and tp <= TP_TOL)


def is_covariant(c: ChoiMatrix, pairs: Sequence[tuple]) -> tuple[bool, float]:
    """Check ``N(U rho U^+) = V N(rho) V^+`` on all matrix units ``|i><j|``."""
    worst = 0.0
    for u, v in pairs:
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        for mat, d in ((u, c.dim_in), (v, c.dim_out)):
            if mat.shape != (d, d):
                raise DimensionError("unitary dimension does not match the channel")
            if np.max(np.abs(mat @ mat.conj().T - np.eye(d))) > UNITARY_TOL:
                raise ValueError("covariance pair contains a non-unitary matrix")
        for i in range(c.dim_in):
            for j in range(c.dim_in):
                e = np.zeros((c.dim_in, c.dim_in), dtype=complex)
                e[i, j] = 1.0
                lhs = _apply_linear(c, u @ e @ u.conj().T)
                rhs = v @ _apply_linear(c, e) @ v.conj().T
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst <= COVARIANCE_TOL, worst


def _apply_linear(c: ChoiMatrix, x: np.ndarray) -> np.ndarray:
    t = c.op.reshape(c.dim_in, c.dim_out, c.dim_in, c.dim_out)
    return np.einsum("iajb,ij->ab", t, x)


def weyl_operators(d: int) -> list[np.ndarray]:
    """Discrete Weyl (clock-and-shift) unitaries ``X^a Z^b``; a unitary one-design."""
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a in range(d)
        for b in range(d)
    ]


# ----------------------------------------------------------------------------
# ChannelSpec: JSON documents and compact ``name:key=val,...`` descriptors

BUILTIN_KINDS = ("erasure", "depolarizing", "noiseless", "classical", "constant", "identity", "random")


@dataclass
class ChannelSpec:
    name: str
    kind: str
    parameters: dict = field(default_factory=dict)
    data: Any = None

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "parameters": self.parameters, "data": self.data}


def _complex_matrix(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim < 1 or a.shape[-1] != 2:
        raise ChannelSpecError("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def encode_complex(m) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(";")])


def _parse_matrix(text: str) -> np.ndarray:
    return np.array([[float(x) for x in row.split(";")] for row in text.split("/")])


def build_builtin(name: str, params: dict) -> ChoiMatrix:
    def num(key, default=None, cast=float):
        if key not in params:
            if default is None:
                raise ChannelSpecError(f"builtin {name!r} requires parameter {key!r}")
            return default
        try:
            return cast(params[key])
        except (TypeError, ValueError) as exc:
            raise ChannelSpecError(f"bad value for {key!r}: {params[key]!r}") from exc

    if name == "erasure":
        return erasure_channel(num("d", 2, int), num("p"))
    if name == "depolarizing":
        return depolarizing_channel(num("p"))
    if name == "noiseless":
        return noiseless_channel(num("m", cast=int))
    if name == "identity":
        return identity_channel(num("d", cast=int))
    if name == "classical":
        mat = params.get("matrix")
        if mat is None:
            q = num("q")
            mat = [[1 - q, q], [q, 1 - q]]
        elif isinstance(mat, str):
            mat = _parse_matrix(mat)
        return classical_channel(mat)
    if name == "constant":
        sigma = params.get("sigma")
        if sigma is None:
            dout = num("dout", num("d", 2, int), int)
            sigma = np.eye(dout) / dout
        elif isinstance(sigma, str):
            sigma = np.diag(_parse_vector(sigma))
        elif np.asarray(sigma).ndim == 3:
            sigma = _complex_matrix(sigma)
        return constant_channel(np.asarray(sigma, dtype=complex), num("d", 2, int))
    if name == "random":
        rng = np.random.default_rng(num("seed", 0, int))
        din = num("din", 2, int)
        return random_channel(din, num("dout", din, int), rng, params.get("rank") and int(params["rank"]))
    raise ChannelSpecError(f"unknown builtin channel {name!r}; known: {', '.join(BUILTIN_KINDS)}")


def parse_descriptor(text: str) -> ChannelSpec:
    """``"erasure:d=2,p=0.5"`` -> ChannelSpec(kind="builtin")."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ChannelSpecError(f"malformed descriptor item {item!r} (expected key=value)")
        params[key.strip()] = val.strip()
    return ChannelSpec(name.strip(), "builtin", params)


def spec_to_choi(spec: ChannelSpec) -> ChoiMatrix:
    try:
        if spec.kind == "builtin":
            choi = build_builtin(spec.name, spec.parameters)
        elif spec.kind == "choi":
            op = _complex_matrix(spec.data)
            choi = ChoiMatrix(int(spec.parameters["dim_in"]), int(spec.parameters["dim_out"]), op)
        elif spec.kind == "kraus":
            ops = [_complex_matrix(k) for k in spec.data]
            if not ops:
                raise ChannelSpecError("kraus spec needs dimensions or at least one operator")
            din = int(spec.parameters.get("dim_in", ops[0].shape[1]))
            dout = int(spec.parameters.get("dim_out", ops[0].shape[0]))
            choi = from_kraus(KrausSet(din, dout, tuple(ops)))
        else:
            raise ChannelSpecError(f"unknown channel kind {spec.kind!r}")
    except ChannelSpecError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ChannelSpecError(f"invalid channel spec {spec.name!r}: {exc}") from exc
    mode = spec.parameters.get("mode", "channel") if spec.kind != "builtin" else "channel"
    report = validate(choi, mode)
    if not report.passed:
        raise ChannelSpecError(
            f"channel {spec.name!r} fails {mode} validation "
            f"(psd margin {report.psd_margin:.3e}, tp residual {report.tp_residual:.3e})"
        )
    return choi


def load_spec(path) -> ChannelSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ChannelSpecError(f"channel spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ChannelSpecError(f"{path}: not valid JSON ({exc})") from exc
    missing = {"name", "kind"} - set(doc)
    if missing:
        raise ChannelSpecError(f"{path}: missing field(s) {sorted(missing)}")
    return ChannelSpec(doc["name"], doc["kind"], doc.get("parameters") or {}, doc.get("data"))


def save_spec(spec: ChannelSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_json(), indent=2))


def choi_to_spec(c: ChoiMatrix, name: str = "channel") -> ChannelSpec:
    return ChannelSpec(name, "choi", {"dim_in": c.dim_in, "dim_out": c.dim_out}, encode_complex(c.op))
