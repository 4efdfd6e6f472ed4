"""Builder for conic programs over Hermitian PSD blocks and scalars.

Users declare variables, add affine scalar or matrix constraints and an
objective, then ``compile()`` into a :class:`StandardForm`::

    minimize    c @ x
    subject to  A @ x == b,   x in K = PSD blocks x nonneg orthant x free

Inequalities get slack variables at build time: scalar ones a nonneg slack,
matrix ones (``>>``/``<<``) a PSD slack block of the output size. Matrix
variables are stored through the isometric ``hvec`` coordinates, so every
coefficient is a plain real row and inner products are ``Re tr(C X)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from itertools import count
from typing import Callable, Iterable, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .. import linops
from .coords import coord_size, hmat, hvec, map_matrix

_ids = count()


@dataclass(frozen=True, eq=False)
class Var:
    kind: str  # "psd", "nonneg", "free", "hermitian"
    name: str
    n: int = 1
    field: str = "complex"
    uid: int = dataclasses.field(default_factory=lambda: next(_ids))

    @property
    def size(self) -> int:
        if self.kind in ("psd", "hermitian"):
            return coord_size(self.n, self.field)
        return 1

    @property
    def is_matrix(self) -> bool:
        return self.kind in ("psd", "hermitian")

    def __repr__(self) -> str:
        shape = f"{self.n}x{self.n} " if self.is_matrix else ""
        return f"Var({self.kind} {shape}{self.name!r})"


@dataclass(frozen=True)
class Constraint:
    """Handle to a constraint's rows; ``n`` is set for matrix constraints."""

    name: str
    sense: str
    rows: slice
    n: int | None = None
    field: str = "complex"
    slack: Var | None = None


@dataclass
class Block:
    """Placement of one cone block inside the standard-form vector."""

    kind: str  # "psd", "nonneg", "free"
    offset: int
    size: int
    n: int = 1
    field: str = "complex"


@dataclass
class StandardForm:
    A: sp.csr_matrix
    b: np.ndarray
    c: np.ndarray
    blocks: list[Block]
    sign: float  # +1 minimize, -1 maximize (c is negated for the latter)
    offset: float  # constant added to the user's objective
    var_offsets: dict[int, tuple[int, Var]]

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def num_cols(self) -> int:
        return self.A.shape[1]

    def psd_blocks(self) -> list[Block]:
        return [blk for blk in self.blocks if blk.kind == "psd"]

    def slice_of(self, kind: str) -> slice:
        """Contiguous range of one cone kind (empty ranges sit where they would start)."""
        order = ("psd", "nonneg", "free")
        start = sum(blk.size for blk in self.blocks if order.index(blk.kind) < order.index(kind))
        size = sum(blk.size for blk in self.blocks if blk.kind == kind)
        return slice(start, start + size)


Coefficient = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]
Term = tuple[Var, Coefficient]


class SdpProblem:
    """Mutable builder; ``compile()`` freezes it into a :class:`StandardForm`."""

    def __init__(self, name: str = "sdp"):
        self.name = name
        self.variables: list[Var] = []
        self._rows: list[dict[int, np.ndarray]] = []  # per row block: var uid -> (rows x size)
        self._rhs: list[np.ndarray] = []
        self.constraints: list[Constraint] = []
        self._num_rows = 0
        self._objective: dict[int, np.ndarray] = {}
        self._objective_offset = 0.0
        self.sense = "minimize"
        self._by_uid: dict[int, Var] = {}
        # original (var, coefficient) terms kept for independent re-checking
        self.terms: list[tuple[Constraint, list[Term], object]] = []
        self.objective_terms: list[Term] = []

    # -- variables ---------------------------------------------------------
    def _declare(self, var: Var) -> Var:
        self.variables.append(var)
        self._by_uid[var.uid] = var
        return var

    def psd(self, n: int, name: str = "X", field: str = "complex") -> Var:
        if n < 1:
            raise ValueError("block size must be positive")
        return self._declare(Var("psd", name, n, field))

    def nonneg(self, name: str = "t") -> Var:
        return self._declare(Var("nonneg", name))

    def free(self, name: str = "t") -> Var:
        return self._declare(Var("free", name))

    def free_hermitian(self, n: int, name: str = "H", field: str = "complex") -> Var:
        return self._declare(Var("hermitian", name, n, field))

    # -- constraints -------------------------------------------------------
    def _check_var(self, var: Var) -> None:
        if var.uid not in self._by_uid:
            raise ValueError(f"{var!r} is not declared in this problem")

    def _scalar_row(self, var: Var, coef) -> np.ndarray:
        self._check_var(var)
        if var.is_matrix:
            mat = np.asarray(coef)
            if mat.ndim == 0:
                mat = float(mat) * np.eye(var.n)
            if mat.shape != (var.n, var.n):
                raise linops.DimensionError(
                    f"coefficient of {var!r} has shape {mat.shape}, expected {(var.n, var.n)}"
                )
            mat = linops.hermitian(mat, tol=1e-9)
            return hvec(mat, var.field)[None, :]
        return np.array([[float(coef)]])

    def add(self, terms: Iterable[Term], sense: str, rhs: float, name: str = "") -> Constraint:
        """Scalar constraint ``sum <coef, var> (sense) rhs`` with sense in ==, >=, <=."""
        if sense not in ("==", ">=", "<="):
            raise ValueError(f"unknown scalar sense {sense!r}")
        row: dict[int, np.ndarray] = {}
        terms = list(terms)
        for var, coef in terms:
            contrib = self._scalar_row(var, coef)
            row[var.uid] = row.get(var.uid, 0) + contrib
        terms = list(terms)
        slack = None
        if sense != "==":
            slack = self.nonneg(f"{name or 'row'}_slack")
            row[slack.uid] = np.array([[-1.0 if sense == ">=" else 1.0]])
            terms.append((slack, float(row[slack.uid][0, 0])))
        con = self._push(row, np.array([float(rhs)]), name, sense, None, "complex", slack)
        self.terms.append((con, terms, float(rhs)))
        return con

    def add_matrix(
        self,
        terms: Iterable[Term],
        sense: str,
        rhs,
        n: int | None = None,
        field: str = "complex",
        name: str = "",
    ) -> Constraint:
        """Matrix constraint ``sum L(var) (sense) rhs`` with sense in ==, >>, <<.

        A term's coefficient is a callable linear map applied to a matrix
        variable, a number scaling it, or (for scalar variables) the matrix
        the scalar multiplies. ``rhs`` may be a matrix or a number times the
        identity (then ``n`` is required).
        """
        if sense not in ("==", ">>", "<<"):
            raise ValueError(f"unknown matrix sense {sense!r}")
        terms = list(terms)
        if np.isscalar(rhs):
            if n is None:
                raise ValueError("n is required when rhs is a scalar")
            rhs = float(rhs) * np.eye(n)
        rhs = linops.hermitian(np.asarray(rhs), tol=1e-9)
        n = rhs.shape[0]
        rows = coord_size(n, field)
        block: dict[int, np.ndarray] = {}
        for var, coef in terms:
            self._check_var(var)
            if var.is_matrix:
                if callable(coef):
                    fn = coef
                    mat = map_matrix(fn, var.n, var.field, field)
                else:
                    if var.n != n:
                        raise linops.DimensionError(f"{var!r} does not match constraint size {n}")
                    if var.field == field:
                        mat = float(coef) * np.eye(rows)
                    else:
                        mat = map_matrix(lambda x, s=float(coef): s * x, var.n, var.field, field)
                if mat.shape[0] != rows:
                    raise linops.DimensionError(
                        f"map on {var!r} produces {mat.shape[0]} coordinates, expected {rows}"
                    )
            else:
                out = linops.hermitian(np.asarray(coef), tol=1e-9)
                if out.shape != (n, n):
                    raise linops.DimensionError(f"coefficient of {var!r} must be {n}x{n}")
                mat = hvec(out, field)[:, None]
            block[var.uid] = block.get(var.uid, 0) + mat
        slack = None
        if sense != "==":
            slack = self.psd(n, f"{name or 'lmi'}_slack", field)
            block[slack.uid] = (-1.0 if sense == ">>" else 1.0) * np.eye(rows)
            terms.append((slack, -1.0 if sense == ">>" else 1.0))
        con = self._push(block, hvec(rhs, field), name, sense, n, field, slack)
        self.terms.append((con, terms, rhs))
        return con

    def _push(self, block, rhs, name, sense, n, field, slack) -> Constraint:
        start = self._num_rows
        self._num_rows += len(rhs)
        self._rows.append(block)
        self._rhs.append(rhs)
        con = Constraint(name or f"c{len(self.constraints)}", sense, slice(start, self._num_rows), n, field, slack)
        self.constraints.append(con)
        return con

    # -- objective ---------------------------------------------------------
    def _set_objective(self, sense: str, terms: Iterable[Term], constant: float) -> None:
        self.sense = sense
        self._objective = {}
        terms = list(terms)
        for var, coef in terms:
            row = self._scalar_row(var, coef)[0]
            self._objective[var.uid] = self._objective.get(var.uid, 0) + row
        self._objective_offset = float(constant)
        self.objective_terms = list(terms)

    def minimize(self, terms: Iterable[Term], constant: float = 0.0) -> None:
        self._set_objective("minimize", terms, constant)

    def maximize(self, terms: Iterable[Term], constant: float = 0.0) -> None:
        self._set_objective("maximize", terms, constant)

    # -- compilation -------------------------------------------------------
    def compile(self) -> StandardForm:
        order = (
            [v for v in self.variables if v.kind == "psd"]
            + [v for v in self.variables if v.kind == "nonneg"]
            + [v for v in self.variables if v.kind in ("free", "hermitian")]
        )
        offsets: dict[int, tuple[int, Var]] = {}
        blocks: list[Block] = []
        pos = 0
        for var in order:
            offsets[var.uid] = (pos, var)
            if var.kind == "psd":
                blocks.append(Block("psd", pos, var.size, var.n, var.field))
            elif var.kind == "nonneg":
                blocks.append(Block("nonneg", pos, 1))
            else:
                blocks.append(Block("free", pos, var.size, var.n, var.field))
            pos += var.size
        ncols = pos
        data, ri, ci = [], [], []
        row0 = 0
        for block, rhs in zip(self._rows, self._rhs):
            for uid, mat in block.items():
                mat = np.asarray(mat, dtype=float)
                r, cidx = np.nonzero(np.abs(mat) > 1e-15)
                data.append(mat[r, cidx])
                ri.append(r + row0)
                ci.append(cidx + offsets[uid][0])
            row0 += len(rhs)
        if data:
            A = sp.csr_matrix(
                (np.concatenate(data), (np.concatenate(ri), np.concatenate(ci))),
                shape=(row0, ncols),
            )
        else:
            A = sp.csr_matrix((row0, ncols))
        b = np.concatenate(self._rhs) if self._rhs else np.zeros(0)
        c = np.zeros(ncols)
        for uid, row in self._objective.items():
            off = offsets[uid][0]
            c[off : off + len(row)] += row
        sign = 1.0 if self.sense == "minimize" else -1.0
        return StandardForm(A, b, sign * c, blocks, sign, self._objective_offset, offsets)


def extract(form: StandardForm, x: np.ndarray, var: Var):
    """Value of ``var`` inside a standard-form vector."""
    off, v = form.var_offsets[var.uid]
    seg = x[off : off + v.size]
    if v.is_matrix:
        return hmat(seg, v.n, v.field)
    return float(seg[0])


def block_keys(variables: Sequence[Var]) -> dict[int, str]:
    """Unique display names (repeated names get primes appended)."""
    keys: dict[int, str] = {}
    used: set[str] = set()
    for var in variables:
        key = var.name
        while key in used:
            key += "'"
        used.add(key)
        keys[var.uid] = key
    return keys


def block_values(form: StandardForm, x: np.ndarray, variables: Sequence[Var]) -> dict[str, object]:
    keys = block_keys(variables)
    return {keys[var.uid]: extract(form, x, var) for var in variables}
