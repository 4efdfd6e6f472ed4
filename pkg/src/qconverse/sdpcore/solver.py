"""Primal-dual interior-point method for :class:`StandardForm` programs.

Nesterov-Todd scaling, Mehrotra predictor-corrector, infeasible start.
Hermitian blocks are handled natively in ``hvec`` coordinates (complex
arithmetic for the scaling, real arithmetic for the Schur complement).

Dual program (internal minimization orientation)::

    maximize b @ y   subject to   c - A.T @ y = z,  z in K*,  z_free = 0
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .. import kernels
from .coords import coord_size, hmat, hvec
from .problem import Constraint, SdpProblem, StandardForm, Var, block_values, extract

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal-infeasible"
DUAL_INFEASIBLE = "dual-infeasible"
NUMERICAL_FAILURE = "numerical-failure"

DIVERGENCE_LIMIT = 1e12
STALL_ITERATIONS = 15


@dataclass(frozen=True)
class SolverConfig:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iterations: int = 200
    step_fraction: float = 0.98

    def __post_init__(self):
        if not (self.gap_tol > 0 and self.feas_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    gap: float
    residuals: dict[str, float]
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    form: StandardForm
    iterations: int
    wall_time: float
    primal_blocks: dict[str, object] = field(default_factory=dict)
    heuristic: bool = False
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def dual_multipliers(self) -> np.ndarray:
        return self.form.sign * self.y

    def value(self, var: Var):
        return extract(self.form, self.x, var)

    def dual_slack(self, var: Var):
        return extract(self.form, self.z, var)

    def multiplier(self, con: Constraint):
        """Lagrange multiplier of a constraint, oriented so inequality
        multipliers in the constraint's own direction come out PSD/nonneg."""
        y = self.form.sign * self.y[con.rows]
        if con.n is None:
            return float(y[0])
        return hmat(y, con.n, con.field)


# -- cone helpers ----------------------------------------------------------


class _PsdBlock:
    """Scaling data of one PSD block at the current iterate."""

    __slots__ = ("n", "field", "sl", "G", "Ginv", "lam", "W")

    def __init__(self, n: int, field: str, sl: slice):
        self.n, self.field, self.sl = n, field, sl

    def mat(self, v):
        return hmat(v[self.sl], self.n, self.field)

    def vec(self, m):
        return hvec(m, self.field)

    def update(self, x, z) -> None:
        X, Z = self.mat(x), self.mat(z)
        L = _factor(X)
        R = _factor(Z)
        U, s, Vh = np.linalg.svd(R.conj().T @ L)
        V = Vh.conj().T
        isq = 1.0 / np.sqrt(s)
        self.G = (L @ V) * isq
        self.Ginv = (np.sqrt(s)[:, None] * Vh) @ _inv_factor(L)
        self.lam = s
        self.W = self.G @ self.G.conj().T

    def scaled(self, dx, dz):
        DX, DZ = self.mat(dx), self.mat(dz)
        gi = self.Ginv
        return gi @ DX @ gi.conj().T, self.G.conj().T @ DZ @ self.G

    def rhs(self, rc):
        """``G D G^H`` where ``Lambda o D = rc`` (Jordan product)."""
        lam = self.lam
        d = 2.0 * rc / (lam[:, None] + lam[None, :])
        return self.vec(self.G @ d @ self.G.conj().T)

    def max_step(self, dscaled) -> float:
        isq = 1.0 / np.sqrt(self.lam)
        m = isq[:, None] * dscaled * isq[None, :]
        m = (m + m.conj().T) / 2
        w = np.linalg.eigvalsh(m)[0]
        return math.inf if w >= 0 else -1.0 / w


def _factor(m):
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(m)
        w = np.maximum(w, np.max(np.abs(w)) * 1e-300 + 1e-300)
        return v * np.sqrt(w)


def _inv_factor(L):
    if np.allclose(np.triu(L, 1), 0):
        return sla.solve_triangular(L, np.eye(L.shape[0], dtype=L.dtype), lower=True)
    return np.linalg.inv(L)


def _jordan(a, b):
    return (a @ b + b @ a) / 2


# -- main driver -----------------------------------------------------------


class _Iterate:
    def __init__(self, form: StandardForm):
        self.form = form
        self.A = form.A.tocsr()
        self.AT = self.A.T.tocsr()
        self.b = form.b
        self.c = form.c
        self.psd = [
            _PsdBlock(blk.n, blk.field, slice(blk.offset, blk.offset + blk.size))
            for blk in form.blocks
            if blk.kind == "psd"
        ]
        self.lp = form.slice_of("nonneg")
        self.fr = form.slice_of("free")
        self.nu = sum(b.n for b in self.psd) + (self.lp.stop - self.lp.start)
        self.Ak = [self.A[:, b.sl].tocsc() for b in self.psd]
        self.rows_k = [np.unique(a.tocoo().row) for a in self.Ak]
        self.Ak_rows = [a.tocsr()[r, :] for a, r in zip(self.Ak, self.rows_k)]
        self.Alp = self.A[:, self.lp].tocsc()
        self.Afr = self.A[:, self.fr].toarray()

    # complementarity inner products ignore the free part
    def cone_dot(self, x, z) -> float:
        return float(x[: self.fr.start] @ z[: self.fr.start])


def _initial_point(it: _Iterate):
    m, ncols = it.A.shape
    x = np.zeros(ncols)
    z = np.zeros(ncols)
    b = it.b
    A = it.A
    for blk, ak in zip(it.psd, it.Ak):
        n = blk.n
        row_norms = np.sqrt(np.asarray(ak.multiply(ak).sum(axis=1)).ravel())
        active = row_norms > 0
        if np.any(active):
            tx = max(10.0, math.sqrt(n), n * float(np.max((1 + np.abs(b[active])) / (1 + row_norms[active]))))
            tz = max(10.0, math.sqrt(n), float(np.max(row_norms)), float(np.linalg.norm(it.c[blk.sl])))
        else:
            tx = tz = max(10.0, math.sqrt(n))
        x[blk.sl] = hvec(tx * np.eye(n), blk.field)
        z[blk.sl] = hvec(tz * np.eye(n), blk.field)
    if it.lp.stop > it.lp.start:
        alp = it.Alp
        norms = np.sqrt(np.asarray(alp.multiply(alp).sum(axis=0)).ravel())
        x[it.lp] = 10.0
        z[it.lp] = np.maximum(10.0, np.maximum(norms, np.abs(it.c[it.lp])))
        cap = float(np.max((1 + np.abs(b)))) if m else 1.0
        x[it.lp] = np.maximum(x[it.lp], cap / (1 + norms))
    y = np.zeros(m)
    return x, y, z


def _schur(it: _Iterate, lp_scale: np.ndarray) -> np.ndarray:
    m = it.A.shape[0]
    M = np.zeros((m, m))
    for blk, rows, ar in zip(it.psd, it.rows_k, it.Ak_rows):
        if not len(rows):
            continue
        P = kernels.scaling_matrix(blk.W, blk.field)
        T = ar @ P  # sparse rows times dense scaling
        M[np.ix_(rows, rows)] += np.asarray(ar @ T.T)
    if it.lp.stop > it.lp.start:
        alp = it.Alp
        M += (alp @ sp.diags(lp_scale) @ alp.T).toarray()
    return (M + M.T) / 2


class _KKT:
    """Factorization of ``[[M, A_f], [A_f^T, 0]]``."""

    def __init__(self, M: np.ndarray, Af: np.ndarray):
        self.M, self.Af = M, Af
        self.m, self.nf = M.shape[0], Af.shape[1]
        self.mode = "schur"
        diag_scale = max(1.0, float(np.max(np.abs(np.diag(M))))) if self.m else 1.0
        try:
            self.cho = sla.cho_factor(M + 1e-15 * diag_scale * np.eye(self.m), lower=True, check_finite=False)
            if self.nf:
                MinvAf = sla.cho_solve(self.cho, Af, check_finite=False)
                S = Af.T @ MinvAf
                self.MinvAf = MinvAf
                self.S_lu = sla.lu_factor(S, check_finite=False)
                if not np.all(np.isfinite(self.S_lu[0])) or np.min(np.abs(np.diag(self.S_lu[0]))) == 0:
                    raise np.linalg.LinAlgError("singular free-variable Schur complement")
        except (np.linalg.LinAlgError, ValueError):
            self.mode = "augmented"
            K = np.block([[M, Af], [Af.T, np.zeros((self.nf, self.nf))]])
            self.K = K
            self.lu = sla.lu_factor(K, check_finite=False)

    def _solve_once(self, r1, r2):
        if self.mode == "schur":
            u = sla.cho_solve(self.cho, r1, check_finite=False)
            if not self.nf:
                return u, np.zeros(0)
            dxf = sla.lu_solve(self.S_lu, self.Af.T @ u - r2, check_finite=False)
            dy = u - self.MinvAf @ dxf
            return dy, dxf
        sol = sla.lu_solve(self.lu, np.concatenate([r1, r2]), check_finite=False)
        return sol[: self.m], sol[self.m :]

    def solve(self, r1, r2, refine: int = 2):
        dy, dxf = self._solve_once(r1, r2)
        for _ in range(refine):
            e1 = r1 - self.M @ dy - self.Af @ dxf
            e2 = r2 - self.Af.T @ dy
            c1, c2 = self._solve_once(e1, e2)
            dy, dxf = dy + c1, dxf + c2
        return dy, dxf


def _direction(it: _Iterate, kkt: _KKT, x, z, rp, rd, rc_blocks, rc_lp, lp_scale):
    """Newton direction for given complementarity right-hand sides."""
    ncols = len(x)
    rvec = np.zeros(ncols)
    for blk, rc in zip(it.psd, rc_blocks):
        rvec[blk.sl] = blk.rhs(rc)
    lp = it.lp
    if lp.stop > lp.start:
        rvec[lp] = rc_lp / z[lp]  # x/z scaling: dx + (x/z) dz = rc / z
    ck = slice(0, it.fr.start)
    # P rd restricted to the cone part
    prd = np.zeros(ncols)
    for blk in it.psd:
        prd[blk.sl] = blk.vec(blk.W @ blk.mat(rd) @ blk.W)
    if lp.stop > lp.start:
        prd[lp] = lp_scale * rd[lp]
    tmp = np.zeros(ncols)
    tmp[ck] = rvec[ck] - prd[ck]
    r1 = rp - it.A @ tmp
    r2 = rd[it.fr]
    dy, dxf = kkt.solve(r1, r2)
    dz = rd - it.AT @ dy
    dz[it.fr] = 0.0
    dx = np.zeros(ncols)
    for blk in it.psd:
        dx[blk.sl] = rvec[blk.sl] - blk.vec(blk.W @ blk.mat(dz) @ blk.W)
    if lp.stop > lp.start:
        dx[lp] = rvec[lp] - lp_scale * dz[lp]
    dx[it.fr] = dxf
    return dx, dy, dz


def _step_lengths(it: _Iterate, x, z, dx, dz):
    ap = ad = math.inf
    scaled = []
    for blk in it.psd:
        sx, sz = blk.scaled(dx, dz)
        scaled.append((sx, sz))
        ap = min(ap, blk.max_step(sx))
        ad = min(ad, blk.max_step(sz))
    lp = it.lp
    if lp.stop > lp.start:
        neg = dx[lp] < 0
        if np.any(neg):
            ap = min(ap, float(np.min(-x[lp][neg] / dx[lp][neg])))
        neg = dz[lp] < 0
        if np.any(neg):
            ad = min(ad, float(np.min(-z[lp][neg] / dz[lp][neg])))
    return ap, ad, scaled


def solve_form(form: StandardForm, cfg: SolverConfig | None = None) -> SdpSolution:
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    it = _Iterate(form)
    A, b, c = it.A, it.b, it.c
    m, ncols = A.shape
    x, y, z = _initial_point(it)
    bnorm = 1.0 + float(np.linalg.norm(b))
    cnorm = 1.0 + float(np.linalg.norm(c))
    best_gap = math.inf
    stall = 0
    status = NUMERICAL_FAILURE
    message = "iteration limit reached"
    heuristic = False
    iters = 0
    lp = it.lp
    has_lp = lp.stop > lp.start

    def residuals(x, y, z):
        rp = b - A @ x
        rd = c - it.AT @ y - z
        return rp, rd

    for iters in range(1, cfg.max_iterations + 1):
        rp, rd = residuals(x, y, z)
        pobj = float(c @ x)
        dobj = float(b @ y)
        pres = float(np.linalg.norm(rp)) / bnorm
        dres = float(np.linalg.norm(rd)) / cnorm
        comp = it.cone_dot(x, z)
        gap = max(abs(pobj - dobj), comp)
        relgap = gap / (1.0 + abs(pobj))
        if relgap <= cfg.gap_tol and pres <= cfg.feas_tol and dres <= cfg.feas_tol:
            status, message = OPTIMAL, "converged"
            break
        if abs(dobj) > DIVERGENCE_LIMIT and dobj > 0 and pres > cfg.feas_tol:
            status, message, heuristic = PRIMAL_INFEASIBLE, "dual objective diverged", True
            break
        if abs(pobj) > DIVERGENCE_LIMIT and pobj < 0 and dres > cfg.feas_tol:
            status, message, heuristic = DUAL_INFEASIBLE, "primal objective diverged", True
            break
        progress = max(relgap, pres, dres)
        if progress < 0.9 * best_gap:
            best_gap = progress
            stall = 0
        else:
            stall += 1
            if stall >= STALL_ITERATIONS:
                message = "stalled without progress"
                break
        mu = comp / it.nu if it.nu else 0.0
        try:
            for blk in it.psd:
                blk.update(x, z)
            lp_scale = x[lp] / z[lp] if has_lp else np.zeros(0)
            kkt = _KKT(_schur(it, lp_scale), it.Afr)
            # predictor
            rc_blocks = [-np.diag(blk.lam**2).astype(blk.G.dtype) for blk in it.psd]
            rc_lp = -x[lp] * z[lp] if has_lp else np.zeros(0)
            dx, dy, dz = _direction(it, kkt, x, z, rp, rd, rc_blocks, rc_lp, lp_scale)
            ap, ad, scaled = _step_lengths(it, x, z, dx, dz)
            ap, ad = min(1.0, ap), min(1.0, ad)
            xa, za = x + ap * dx, z + ad * dz
            mu_aff = max(0.0, it.cone_dot(xa, za) / it.nu) if it.nu else 0.0
            expo = max(1.0, 3.0 * min(ap, ad) ** 2)
            sigma = min(1.0, (mu_aff / mu) ** expo) if mu > 0 else 0.0
            # corrector
            rc_blocks = []
            for blk, (sx, sz) in zip(it.psd, scaled):
                lam2 = np.diag(blk.lam**2)
                rc_blocks.append(sigma * mu * np.eye(blk.n) - lam2 - _jordan(sx, sz))
            if has_lp:
                rc_lp = sigma * mu - x[lp] * z[lp] - dx[lp] * dz[lp]
            dx, dy, dz = _direction(it, kkt, x, z, rp, rd, rc_blocks, rc_lp, lp_scale)
            ap, ad, _ = _step_lengths(it, x, z, dx, dz)
        except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
            message = f"linear algebra breakdown: {exc}"
            break
        ap = min(1.0, cfg.step_fraction * ap)
        ad = min(1.0, cfg.step_fraction * ad)
        if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dz)) and np.all(np.isfinite(dy))):
            message = "non-finite search direction"
            break
        x = x + ap * dx
        y = y + ad * dy
        z = z + ad * dz

    rp, rd = residuals(x, y, z)
    sign = form.sign
    pobj = float(c @ x)
    dobj = float(b @ y)
    primal_value = sign * pobj + form.offset
    dual_value = sign * dobj + form.offset
    res = {
        "primal": float(np.linalg.norm(rp)) / bnorm,
        "dual": float(np.linalg.norm(rd)) / cnorm,
    }
    gap = max(abs(pobj - dobj), it.cone_dot(x, z))
    sol = SdpSolution(
        status=status,
        primal_value=primal_value,
        dual_value=dual_value,
        gap=gap,
        residuals=res,
        x=x,
        y=y,
        z=z,
        form=form,
        iterations=iters,
        wall_time=time.perf_counter() - t0,
        heuristic=heuristic,
        message=message,
    )
    if status == PRIMAL_INFEASIBLE:
        sol.message += f"; witness ray y/|y| with b.y = {dobj / max(np.linalg.norm(y), 1e-300):.3e}"
    return sol


def solve(problem: SdpProblem, cfg: SolverConfig | None = None) -> SdpSolution:
    form = problem.compile()
    sol = solve_form(form, cfg)
    sol.primal_blocks = block_values(form, sol.x, problem.variables)
    return sol
