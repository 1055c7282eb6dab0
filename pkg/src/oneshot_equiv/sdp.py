"""Small dense semidefinite programs solved by a log-barrier path-following method.

A problem has matrix variables (Hermitian, or complex rectangular), linear
matrix inequalities ``F_k(x) = C_k + sum_p s_p P_p(X_p) >= 0`` assembled from
variables placed as sub-blocks, an optional set of real linear equalities,
and a linear objective ``sum_v Re Tr(O_v^dagger X_v)``.

Every variable is expanded in a fixed real basis, so the optimisation runs
over a real vector ``x``.  The barrier Hessian ``Tr(S F_i S F_j)`` is built from
matrix-unit interactions ``S[c, r'] S[c', r]`` accumulated per variable pair,
then contracted with the basis coefficients once.  Dual certificates come from
the Newton step, ``Z = (S - S dF S) / t``, which satisfies the dual equality
constraints to solver precision; the reported gap is ``sum_k Tr(Z_k F_k(x))``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.linalg as sla
from scipy import sparse

log = logging.getLogger(__name__)

GAP_TOL = 1e-9
MAX_OUTER = 200
MAX_NEWTON = 60
CENTRE_TOL = 0.25
HERM_TOL = 1e-10
# rounds without gap improvement before giving up, and the gap then accepted
STALL_ROUNDS = 4
STALL_GAP_TOL = 1e-7


class SdpError(RuntimeError):
    """Solver failure.  ``best_gap`` holds the smallest gap seen, if any."""

    def __init__(self, message: str, best_gap: float | None = None, diagnostics: dict | None = None):
        super().__init__(message)
        self.best_gap = best_gap
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class MatrixVar:
    """A matrix-valued decision variable.

    Hermitian variables use ``d**2`` real parameters (diagonal, real and
    imaginary off-diagonal parts); complex ``r x c`` variables use ``2 r c``.
    """

    name: str
    rows: int
    cols: int
    hermitian: bool = True

    def __post_init__(self):
        if self.hermitian and self.rows != self.cols:
            raise ValueError("Hermitian variables must be square")

    @property
    def n_params(self) -> int:
        return self.rows * self.cols if self.hermitian else 2 * self.rows * self.cols

    def basis(self) -> np.ndarray:
        """Coefficients ``(n_params, rows*cols)`` of each basis matrix in matrix units."""
        r, c = self.rows, self.cols
        C = np.zeros((self.n_params, r * c), dtype=complex)
        if self.hermitian:
            i = 0
            for a in range(r):
                C[i, a * c + a] = 1.0
                i += 1
            for a in range(r):
                for b in range(a + 1, r):
                    C[i, a * c + b] = 1.0
                    C[i, b * c + a] = 1.0
                    C[i + 1, a * c + b] = 1j
                    C[i + 1, b * c + a] = -1j
                    i += 2
        else:
            for u in range(r * c):
                C[2 * u, u] = 1.0
                C[2 * u + 1, u] = 1j
        return C

    def sparse_basis(self) -> tuple[np.ndarray, np.ndarray]:
        """``(idx, coef)``: each basis matrix is ``sum_s coef[i, s] E_{idx[i, s]}``."""
        C = self.basis()
        idx = np.zeros((self.n_params, 2), dtype=int)
        coef = np.zeros((self.n_params, 2), dtype=complex)
        for i, row in enumerate(C):
            nz = np.flatnonzero(row)
            idx[i, : len(nz)] = nz
            idx[i, len(nz) :] = nz[0]
            coef[i, : len(nz)] = row[nz]
        return idx, coef

    def params_of(self, X: np.ndarray) -> np.ndarray:
        """Real parameters representing matrix ``X`` (inverse of ``matrix``)."""
        X = np.asarray(X, dtype=complex)
        r = self.rows
        if self.hermitian:
            out = [X[a, a].real for a in range(r)]
            for a in range(r):
                for b in range(a + 1, r):
                    out += [X[a, b].real, X[a, b].imag]
            return np.array(out)
        flat = X.reshape(-1)
        return np.column_stack([flat.real, flat.imag]).reshape(-1)

    def matrix(self, params: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
        C = self.basis() if basis is None else basis
        return (params @ C).reshape(self.rows, self.cols)


@dataclass(frozen=True)
class Placement:
    """``scale * X`` (or ``scale * X^dagger``) written at block offset ``(row, col)``."""

    var: int
    row: int
    col: int
    scale: float = 1.0
    adjoint: bool = False


@dataclass
class LmiBlock:
    dim: int
    const: np.ndarray
    placements: list[Placement] = field(default_factory=list)


@dataclass
class SdpProblem:
    """``minimize`` (or ``maximize``) ``sum_v Re Tr(O_v^dagger X_v)`` subject to LMIs.

    ``eq_matrix`` / ``eq_rhs`` impose real linear equalities on the stacked
    parameter vector.  ``start`` holds one strictly feasible matrix per
    variable; it must also satisfy the equalities.
    """

    variables: list[MatrixVar]
    blocks: list[LmiBlock]
    objective: dict[int, np.ndarray]
    start: list[np.ndarray]
    sense: Literal["min", "max"] = "min"
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None


@dataclass
class SdpSolution:
    value: float
    dual_value: float
    gap: float
    variables: list[np.ndarray] = field(repr=False)
    primal_certificate: list[np.ndarray] = field(repr=False)
    dual_certificate: list[np.ndarray] = field(repr=False)
    iterations: int = 0
    dual_residual: float = 0.0


class _Compiled:
    """Index tables shared by all Newton iterations of one problem.

    Each basis matrix touches at most two matrix units, so the basis is kept
    as ``idx`` / ``coef`` arrays of shape ``(n_params, 2)`` and every
    contraction with it is a gather.
    """

    def __init__(self, p: SdpProblem):
        self.p = p
        self.sparse = [v.sparse_basis() for v in p.variables]
        self.csr = []
        for v in p.variables:
            C = sparse.csr_matrix(v.basis())
            self.csr.append((C, C.conj()))
        sizes = [v.n_params for v in p.variables]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self.n = int(self.offsets[-1])
        # block positions (row, col) of every matrix unit, per placement
        self.unit_pos = []
        # placements of one (variable, adjoint) pair inside a block, grouped
        self.groups = []
        for blk in p.blocks:
            pos = []
            grp: dict[tuple[int, bool], list[Placement]] = {}
            for pl in blk.placements:
                var = p.variables[pl.var]
                a, b = np.divmod(np.arange(var.rows * var.cols), var.cols)
                r, c = (pl.row + b, pl.col + a) if pl.adjoint else (pl.row + a, pl.col + b)
                if r.max() >= blk.dim or c.max() >= blk.dim:
                    raise ValueError(f"placement of {var.name!r} exceeds block dimension {blk.dim}")
                pos.append((r, c))
                grp.setdefault((pl.var, pl.adjoint), []).append(pl)
            self.unit_pos.append(pos)
            gl = []
            for (v, adj), pls in grp.items():
                var = p.variables[v]
                pr, pc = (var.cols, var.rows) if adj else (var.rows, var.cols)
                ro = np.array([pl.row for pl in pls])
                co = np.array([pl.col for pl in pls])
                sc = np.array([pl.scale for pl in pls])
                gl.append((v, adj, ro[:, None] + np.arange(pr), co[:, None] + np.arange(pc), sc))
            self.groups.append(gl)
        c = np.zeros(self.n)
        for v, O in p.objective.items():
            O = np.asarray(O, dtype=complex)
            var = p.variables[v]
            if O.shape != (var.rows, var.cols):
                raise ValueError(f"objective for {var.name!r} has shape {O.shape}")
            c[self._sl(v)] = self._contract(v, False, O.reshape(-1).conj())
        self.sign = 1.0 if p.sense == "min" else -1.0
        self.c = self.sign * c

    def _sl(self, v: int) -> slice:
        return slice(self.offsets[v], self.offsets[v + 1])

    def _contract(self, v: int, adjoint: bool, vec: np.ndarray) -> np.ndarray:
        """``Re(C_v @ vec)`` for a vector over matrix units."""
        idx, coef = self.sparse[v]
        if adjoint:
            coef = coef.conj()
        return np.real(coef[:, 0] * vec[idx[:, 0]] + coef[:, 1] * vec[idx[:, 1]])

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        out = []
        for v, var in enumerate(self.p.variables):
            idx, coef = self.sparse[v]
            xv = x[self._sl(v)]
            flat = np.zeros(var.rows * var.cols, dtype=complex)
            np.add.at(flat, idx[:, 0], coef[:, 0] * xv)
            np.add.at(flat, idx[:, 1], coef[:, 1] * xv)
            out.append(flat.reshape(var.rows, var.cols))
        return out

    def lmi_values(self, x: np.ndarray) -> list[np.ndarray]:
        return self.lmi_from(self.split(x), include_const=True)

    def lmi_from(self, mats: list[np.ndarray], include_const: bool) -> list[np.ndarray]:
        out = []
        for blk in self.p.blocks:
            F = np.array(blk.const, dtype=complex) if include_const else np.zeros((blk.dim, blk.dim), dtype=complex)
            for pl in blk.placements:
                X = mats[pl.var]
                if pl.adjoint:
                    X = X.conj().T
                F[pl.row : pl.row + X.shape[0], pl.col : pl.col + X.shape[1]] += pl.scale * X
            out.append(F)
        return out

    def traces(self, Ms: Sequence[np.ndarray]) -> np.ndarray:
        """Vector ``[sum_k Re Tr(M_k F_ki)]_i`` for Hermitian block matrices ``M_k``."""
        out = np.zeros(self.n)
        for blk, pos, M in zip(self.p.blocks, self.unit_pos, Ms):
            for pl, (r, c) in zip(blk.placements, pos):
                # Tr(M E_{rc}) = M[c, r]
                out[self._sl(pl.var)] += pl.scale * self._contract(pl.var, pl.adjoint, M[c, r])
        return out

    def hessian(self, Ss: Sequence[np.ndarray]) -> np.ndarray:
        acc: dict[tuple[int, bool, int, bool], np.ndarray] = {}
        for groups, S in zip(self.groups, Ss):
            for vp, ap, rp, cp, sp in groups:
                for vq, aq, rq, cq, sq in groups:
                    # G[al, be, ga, de] = sum_ij s_i s_j S[c_i + be, r_j + ga] S[c_j + de, r_i + al]
                    X1 = S[cp[:, None, :, None], rq[None, :, None, :]]
                    X2 = S[cq[:, None, :, None], rp[None, :, None, :]]
                    ni, nj, nb, ng = X1.shape
                    Y1 = (np.outer(sp, sq)[:, :, None, None] * X1).reshape(ni * nj, nb * ng)
                    Y2 = X2.transpose(1, 0, 2, 3).reshape(ni * nj, -1)
                    G = (Y1.T @ Y2).reshape(nb, ng, X2.shape[2], X2.shape[3]).transpose(3, 0, 1, 2)
                    if ap:
                        G = G.transpose(1, 0, 2, 3)
                    if aq:
                        G = G.transpose(0, 1, 3, 2)
                    na, nb, nc, nd = G.shape
                    G = G.reshape(na * nb, nc * nd)
                    key = (vp, ap, vq, aq)
                    if key in acc:
                        acc[key] += G
                    else:
                        acc[key] = G
        H = np.zeros((self.n, self.n))
        for (v, av, w, aw), G in acc.items():
            Cv = self.csr[v][1] if av else self.csr[v][0]
            Cw = self.csr[w][1] if aw else self.csr[w][0]
            H[self._sl(v), self._sl(w)] += np.real(Cv @ (Cw @ G.T).T)
        return (H + H.T) / 2


def _chol_inv(F: np.ndarray) -> np.ndarray | None:
    """Inverse of a Hermitian positive definite matrix, or ``None`` if not PD."""
    try:
        L = np.linalg.cholesky(F)
    except np.linalg.LinAlgError:
        return None
    Linv = sla.solve_triangular(L, np.eye(F.shape[0]), lower=True)
    return Linv.conj().T @ Linv


def _logdet(F: np.ndarray) -> float | None:
    try:
        L = np.linalg.cholesky(F)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.real(np.diag(L)))))


def _newton_direction(H: np.ndarray, g: np.ndarray, A: np.ndarray | None) -> np.ndarray:
    """Solve ``min_d g.d + d.H.d/2`` subject to ``A d = 0`` (Jacobi-scaled Cholesky)."""
    d = np.sqrt(np.maximum(np.diag(H), 1e-300))
    Hs = H / np.outer(d, d)
    gs = g / d
    try:
        cf = sla.cho_factor(Hs, lower=True, check_finite=False)
        solve = lambda rhs: sla.cho_solve(cf, rhs, check_finite=False)  # noqa: E731
        if A is None:
            return solve(-gs) / d
        As = A / d
        Hig = solve(gs)
        HiA = solve(As.T)
        nu = np.linalg.solve(As @ HiA, -(As @ Hig))
        return -(Hig + HiA @ nu) / d
    except (np.linalg.LinAlgError, sla.LinAlgError):
        if A is None:
            return np.linalg.lstsq(Hs, -gs, rcond=1e-14)[0] / d
        As = A / d
        k = A.shape[0]
        K = np.block([[Hs, As.T], [As, np.zeros((k, k))]])
        sol = np.linalg.lstsq(K, np.concatenate([-gs, np.zeros(k)]), rcond=1e-14)[0]
        return sol[: H.shape[0]] / d


def check_problem(p: SdpProblem) -> None:
    """Validate shapes and Hermiticity of constants and of the assembled LMIs."""
    for k, blk in enumerate(p.blocks):
        C = np.asarray(blk.const)
        if C.shape != (blk.dim, blk.dim):
            raise ValueError(f"block {k}: constant has shape {C.shape}, expected {(blk.dim, blk.dim)}")
        if np.max(np.abs(C - C.conj().T), initial=0.0) > HERM_TOL:
            raise ValueError(f"block {k}: constant matrix is not Hermitian")
    if len(p.start) != len(p.variables):
        raise ValueError("start must supply one matrix per variable")
    comp = _Compiled(p)
    rng = np.random.default_rng(0)
    probe = comp.lmi_from(comp.split(rng.normal(size=comp.n)), include_const=False)
    for k, F in enumerate(probe):
        if np.max(np.abs(F - F.conj().T), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(F))):
            raise ValueError(f"block {k}: variable placements do not assemble a Hermitian matrix")


def _acceptable(best_gap: float, best) -> bool:
    return best_gap <= STALL_GAP_TOL * max(1.0, abs(best[4]))


def _logdets(comp: _Compiled, x: np.ndarray) -> list[float] | None:
    out = [_logdet(F) for F in comp.lmi_values(x)]
    return None if any(v is None for v in out) else out


def _centre(comp: _Compiled, x: np.ndarray, t: float, A, A_pinv):
    """Damped Newton re-centring at barrier weight ``t``."""
    iterations = 0
    for _ in range(MAX_NEWTON):
        Fs = comp.lmi_values(x)
        Ss = [_chol_inv(F) for F in Fs]
        if any(S is None for S in Ss):
            raise SdpError("iterate left the feasible cone")
        grad = t * comp.c - comp.traces(Ss)
        dx = _newton_direction(comp.hessian(Ss), grad, A)
        if A is not None:
            # keep the iterates on the affine set despite an ill-conditioned Hessian
            dx = dx - A_pinv @ (A @ dx)
        iterations += 1
        if not np.all(np.isfinite(dx)) or float(np.max(np.abs(x))) > 1e12:
            raise SdpError("iterates diverged (problem may be unbounded)")
        lam = math.sqrt(max(0.0, -float(grad @ dx)))
        if lam < CENTRE_TOL:
            return x, Fs, Ss, dx, iterations
        # backtracking from the full step; Armijo on the barrier
        step = 1.0
        ld0 = _logdets(comp, x)
        slope = float(grad @ dx)
        while True:
            # barrier change formed without the large t c.x term
            ld = _logdets(comp, x + step * dx)
            if ld is not None:
                change = t * step * float(comp.c @ dx) - math.fsum(a - b for a, b in zip(ld, ld0))
                if change <= 0.01 * step * slope:
                    break
            step *= 0.5
            if step < 1e-10:
                raise SdpError("line search failed")
        x = x + step * dx
    return x, Fs, Ss, dx, iterations


def sdp_solve(
    p: SdpProblem, gap_tol: float = GAP_TOL, max_outer: int = MAX_OUTER, mu: float = 20.0
) -> SdpSolution:
    """Solve ``p`` from its strictly feasible start.

    Each outer round re-centres with damped Newton steps until the Newton
    decrement drops below ``CENTRE_TOL``; the Newton-corrected dual point is
    then feasible and its gap is checked against ``gap_tol * max(1, |value|)``.
    When rounding stops the gap from improving for ``STALL_ROUNDS`` rounds,
    the best iterate is returned if its gap is within ``STALL_GAP_TOL``; the
    reported ``gap`` is always the one actually reached.  Raises
    :class:`SdpError` when the start is not strictly feasible, when the
    iterates diverge, or when no acceptable gap is reached.
    """
    check_problem(p)
    comp = _Compiled(p)
    if comp.n == 0:
        raise ValueError("problem has no variables")
    x = np.concatenate([var.params_of(np.asarray(X)) for var, X in zip(p.variables, p.start)])
    A = None
    if p.eq_matrix is not None:
        A = np.atleast_2d(np.asarray(p.eq_matrix, dtype=float))
        b = np.asarray(p.eq_rhs, dtype=float).reshape(-1)
        if np.max(np.abs(A @ x - b)) > 1e-9:
            raise SdpError("start violates the equality constraints")
        A_pinv = np.linalg.pinv(A)
    else:
        A_pinv = None
    if any(_chol_inv(F) is None for F in comp.lmi_values(x)):
        raise SdpError("start point is not strictly feasible")
    theta = sum(blk.dim for blk in p.blocks)

    t = theta / max(1.0, float(np.max(np.abs(comp.c))))
    best_gap = math.inf
    best = None
    best_round = 0
    iterations = 0
    for outer in range(max_outer):
        try:
            x, Fs, Ss, dx, n_it = _centre(comp, x, t, A, A_pinv)
        except SdpError as exc:
            if best is not None and _acceptable(best_gap, best):
                log.debug("sdp stalled (%s); returning best iterate with gap %.3g", exc, best_gap)
                break
            raise SdpError(str(exc), best_gap) from exc
        iterations += n_it
        # dual point from the Newton step: Z = (S - S dF S) / t
        dF = comp.lmi_from(comp.split(dx), include_const=False)
        Zs = []
        for S, D in zip(Ss, dF):
            Z = (S - S @ D @ S) / t
            Zs.append((Z + Z.conj().T) / 2)
        gap = float(sum(np.real(np.vdot(Z, F)) for Z, F in zip(Zs, Fs)))
        primal = float(comp.c @ x)
        if best is None or abs(gap) < best_gap:
            best_gap, best, best_round = abs(gap), (x, Fs, Zs, gap, primal), outer
        if abs(gap) <= gap_tol * max(1.0, abs(primal)):
            break
        if outer - best_round >= STALL_ROUNDS:
            # rounding now limits the gap; keep the best certified point if it is close enough
            if _acceptable(best_gap, best):
                log.debug("sdp gap stalled at %.3g", best_gap)
                break
            raise SdpError(f"gap stalled at {best_gap:.3g}", best_gap)
        t *= mu
    else:
        raise SdpError(f"no convergence within {max_outer} rounds", best_gap)
    x, Fs, Zs, gap, primal = best
    resid = comp.c - comp.traces(Zs)
    if A is not None:
        resid = resid - A.T @ np.linalg.lstsq(A.T, resid, rcond=None)[0]
    value = comp.sign * primal
    dual_value = comp.sign * (primal - gap)
    log.debug("sdp solved: value=%.12g gap=%.3g iterations=%d", value, gap, iterations)
    return SdpSolution(
        value=value,
        dual_value=dual_value,
        gap=abs(gap),
        variables=comp.split(x),
        primal_certificate=Fs,
        dual_certificate=Zs,
        iterations=iterations,
        dual_residual=float(np.max(np.abs(resid))) if resid.size else 0.0,
    )


def trace_equality(problem_vars: Sequence[MatrixVar], which: Sequence[int], rhs: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Single equality row ``sum_{v in which} Tr X_v = rhs`` on Hermitian variables."""
    sizes = [v.n_params for v in problem_vars]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    row = np.zeros(offsets[-1])
    for v in which:
        var = problem_vars[v]
        if not var.hermitian:
            raise ValueError("trace equality needs Hermitian variables")
        row[offsets[v] : offsets[v] + var.rows] = 1.0  # diagonal parameters come first
    return row[None, :], np.array([rhs])
