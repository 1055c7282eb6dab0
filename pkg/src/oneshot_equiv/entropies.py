"""Conditional min-/max-entropies, guessing probability and collision quantities.

All quantities are in bits.  For a state ``rho_UV`` (possibly sub-normalised)

* ``H_min(U|V) = -log2 min{Tr sigma : rho_UV <= I_U (x) sigma_V}``
* ``H_max(U|V) = max_{Tr sigma = 1} log2 || sqrt(rho_UV) sqrt(I_U (x) sigma_V) ||_1^2``

Side registers that are classical in the z basis split every problem into
independent pieces, one per classical value, and each piece is compressed to
the support of its side marginal before the SDP is set up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .quantum import (
    RANK_CUTOFF,
    TOL_HERM,
    Basis,
    QOperator,
    classical_deviation,
    marginal,
    psd_inv_sqrt,
    psd_sqrt,
    purified_distance,
    purify,
    reorder,
    support_basis,
    to_z_basis,
    trace_norm,
)
from .sdp import LmiBlock, MatrixVar, Placement, SdpProblem, sdp_solve, trace_equality

DUALITY_TOL = 1e-6
# blocks below this magnitude are rounding residue of basis changes
ZERO_TOL = 1e-14
Method = Literal["sdp-primal", "sdp-dual", "closed-form-classical", "purification-duality"]


class EntropyMismatch(RuntimeError):
    """Two independent evaluations of the same quantity disagree."""


@dataclass
class EntropyResult:
    """An entropic value in bits.

    ``linear`` is the underlying optimum (``2**-H`` for the min-entropy and
    the squared fidelity ``2**H`` for the max-entropy) so callers can avoid a
    log/exp round trip.  ``checks`` holds values from secondary methods.
    """

    value: float
    method: Method
    gap: float
    linear: float
    bound: Literal["exact", "lower"] = "exact"
    checks: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "gap": self.gap,
            "bound": self.bound,
            "checks": dict(self.checks),
        }


# ------------------------------------------------------------------ set-up


@dataclass
class _Piece:
    """One classical side value: target blocks (or a joint operator) on a compressed side."""

    blocks: list[np.ndarray] | None
    joint: np.ndarray | None
    du: int
    r: int


def _as_names(x: str | Sequence[str] | None) -> list[str]:
    if x is None:
        return []
    if isinstance(x, str):
        return [x]
    return list(x)


def target_basis(s: QOperator, target: Sequence[str]) -> Basis | None:
    """Basis in which a single target register is classical, if any."""
    if len(target) != 1:
        return None
    for b in ("z", "x"):
        if classical_deviation(s, target[0], b) <= TOL_HERM:
            return b
    return None


def _pieces(s: QOperator, target, side) -> tuple[list[_Piece], bool]:
    target, side = _as_names(target), _as_names(side)
    if not target:
        raise ValueError("target registers must be non-empty")
    if sorted(target + side) != sorted(s.names):
        raise ValueError(f"target {target} and side {side} must partition the registers {list(s.names)}")
    basis = target_basis(s, target)
    if basis == "x":
        s = to_z_basis(s, target[0], "x")
    csides = [n for n in side if classical_deviation(s, n, "z") <= TOL_HERM]
    qsides = [n for n in side if n not in csides]
    s = reorder(s, target + csides + qsides)
    du = math.prod(s.layout.dim(n) for n in target)
    dc = math.prod(s.layout.dim(n) for n in csides)
    dq = math.prod(s.layout.dim(n) for n in qsides)
    T = s.matrix.reshape(du, dc, dq, du, dc, dq)
    pieces = []
    for c in range(dc):
        M = T[:, c, :, :, c, :].reshape(du * dq, du * dq)
        if np.max(np.abs(M), initial=0.0) <= ZERO_TOL:
            continue
        rho_v = np.einsum("iaib->ab", M.reshape(du, dq, du, dq))
        P = support_basis(rho_v)
        r = P.shape[1]
        if r == 0:
            continue
        if basis is not None:
            blocks = [P.conj().T @ M[u * dq : (u + 1) * dq, u * dq : (u + 1) * dq] @ P for u in range(du)]
            pieces.append(_Piece(blocks, None, du, r))
        else:
            IP = np.kron(np.eye(du), P)
            pieces.append(_Piece(None, IP.conj().T @ M @ IP, du, r))
    if not pieces:
        raise ValueError("state is zero")
    return pieces, basis is not None


def _herm(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def _factor(M: np.ndarray) -> np.ndarray:
    """``W`` with ``M = W W^dagger`` (columns for eigenvalues above cutoff)."""
    lam, V = np.linalg.eigh(_herm(M))
    keep = lam > RANK_CUTOFF * max(1.0, float(lam[-1]) if lam.size else 1.0)
    if not np.any(keep):
        return np.zeros((M.shape[0], 0), dtype=complex)
    return V[:, keep] * np.sqrt(lam[keep])


# ------------------------------------------------------------------ min-entropy


def _hmin_piece(pc: _Piece) -> tuple[float, float, bool]:
    """(min Tr sigma, gap, used_sdp) for one piece."""
    r = pc.r
    if pc.blocks is not None:
        blocks = [_herm(b) for b in pc.blocks if np.max(np.abs(b)) > ZERO_TOL]
        if r == 1:
            return max(float(b[0, 0].real) for b in blocks), 0.0, False
        top = max(float(np.linalg.eigvalsh(b)[-1]) for b in blocks)
        var = MatrixVar("sigma", r, r)
        lmis = [LmiBlock(r, -b, [Placement(0, 0, 0)]) for b in blocks]
    else:
        M = _herm(pc.joint)
        if r == 1:
            return float(np.linalg.eigvalsh(M)[-1]), 0.0, False
        top = float(np.linalg.eigvalsh(M)[-1])
        var = MatrixVar("sigma", r, r)
        lmis = [LmiBlock(pc.du * r, -M, [Placement(0, u * r, u * r) for u in range(pc.du)])]
    start = (1.5 * top + 1e-3) * np.eye(r)
    sol = sdp_solve(SdpProblem([var], lmis, {0: np.eye(r)}, [start], "min"))
    return sol.value, sol.gap, True


def _classical_pguess_closed(pieces: list[_Piece]) -> float | None:
    if all(pc.blocks is not None and pc.r == 1 for pc in pieces):
        return sum(max(float(b[0, 0].real) for b in pc.blocks) for pc in pieces)
    return None


def hmin(s: QOperator, target, side=None) -> EntropyResult:
    """Conditional min-entropy ``H_min(target | side)`` by SDP (closed form when fully classical)."""
    pieces, _ = _pieces(s, target, side)
    total, gap, used = 0.0, 0.0, False
    for pc in pieces:
        v, g, u = _hmin_piece(pc)
        total += v
        gap += g
        used |= u
    if total <= 0:
        raise ValueError("min-entropy optimum is not positive")
    res = EntropyResult(-math.log2(total), "sdp-primal" if used else "closed-form-classical", gap, total)
    closed = _classical_pguess_closed(pieces)
    if closed is not None:
        res.checks["closed-form-classical"] = -math.log2(closed)
    return res


# ------------------------------------------------------------------ max-entropy


def _hmax_piece(pc: _Piece) -> tuple[float, float, bool]:
    """(max fidelity ||sqrt(rho) sqrt(I (x) sigma)||_1 over Tr sigma = 1, gap, used_sdp)."""
    r = pc.r
    if pc.blocks is not None:
        Ws = [_factor(b) for b in pc.blocks]
        Ws = [W for W in Ws if W.shape[1] > 0]
        if r == 1:
            return sum(float(np.linalg.norm(W)) for W in Ws), 0.0, False
        variables = [MatrixVar("sigma", r, r)] + [MatrixVar(f"Y{i}", W.shape[1], r, hermitian=False) for i, W in enumerate(Ws)]
        lmis, obj = [], {}
        for i, W in enumerate(Ws):
            k = W.shape[1]
            const = np.zeros((k + r, k + r), dtype=complex)
            const[:k, :k] = np.eye(k)
            lmis.append(
                LmiBlock(k + r, const, [Placement(0, k, k), Placement(i + 1, 0, k), Placement(i + 1, k, 0, adjoint=True)])
            )
            obj[i + 1] = W.conj().T
    else:
        W = _factor(pc.joint)
        if r == 1:
            return trace_norm(psd_sqrt(_herm(pc.joint))), 0.0, False
        k, D = W.shape[1], pc.du * r
        variables = [MatrixVar("sigma", r, r), MatrixVar("Y", k, D, hermitian=False)]
        const = np.zeros((k + D, k + D), dtype=complex)
        const[:k, :k] = np.eye(k)
        pls = [Placement(0, k + u * r, k + u * r) for u in range(pc.du)]
        pls += [Placement(1, 0, k), Placement(1, k, 0, adjoint=True)]
        lmis = [LmiBlock(k + D, const, pls)]
        obj = {1: W.conj().T}
    A, b = trace_equality(variables, [0], 1.0)
    start = [np.eye(r) / r] + [np.zeros((v.rows, v.cols), dtype=complex) for v in variables[1:]]
    sol = sdp_solve(SdpProblem(variables, lmis, obj, start, "max", A, b))
    return sol.value, sol.gap, True


def hmax_direct(s: QOperator, target, side=None) -> EntropyResult:
    pieces, _ = _pieces(s, target, side)
    sq, gap, used = 0.0, 0.0, False
    for pc in pieces:
        F, g, u = _hmax_piece(pc)
        sq += F * F
        gap += 2 * F * g
        used |= u
    return EntropyResult(math.log2(sq), "sdp-primal" if used else "closed-form-classical", gap, sq)


def hmax_duality(s: QOperator, target, side=None) -> EntropyResult:
    """``H_max(U|V) = -H_min(U|W)`` with ``W`` purifying ``rho_UV``."""
    target, side = _as_names(target), _as_names(side)
    w = "W"
    while w in s.names:
        w += "_"
    scale = s.trace
    psi = purify(s.scaled(1.0 / scale), w)
    rho_uw = marginal(psi.density(), target + [w]).scaled(scale)
    h = hmin(rho_uw, target, [w])
    return EntropyResult(-h.value, "purification-duality", h.gap, h.linear)


def hmax(s: QOperator, target, side=None, method: Literal["both", "direct", "duality"] = "both") -> EntropyResult:
    """Conditional max-entropy; with ``method="both"`` the two paths must agree to 1e-6."""
    if method == "direct":
        return hmax_direct(s, target, side)
    if method == "duality":
        return hmax_duality(s, target, side)
    a = hmax_direct(s, target, side)
    b = hmax_duality(s, target, side)
    if abs(a.value - b.value) > DUALITY_TOL:
        raise EntropyMismatch(f"H_max direct {a.value!r} vs purification duality {b.value!r}")
    a.checks["purification-duality"] = b.value
    return a


# ------------------------------------------------------------------ guessing


def pguess_blocks(blocks: Sequence[np.ndarray], closed_form: bool = True) -> tuple[float, float]:
    """``max sum_x Tr(rho_x M_x)`` over POVMs, returned with the SDP gap.

    Two hypotheses are resolved by the Helstrom formula unless
    ``closed_form`` is False.
    """
    blocks = [_herm(np.asarray(b, dtype=complex)) for b in blocks]
    blocks = [b for b in blocks if np.max(np.abs(b), initial=0.0) > ZERO_TOL]
    if not blocks:
        return 0.0, 0.0
    if len(blocks) == 1:
        return float(np.trace(blocks[0]).real), 0.0
    if len(blocks) == 2 and closed_form:
        # Helstrom: (Tr(rho_0 + rho_1) + ||rho_0 - rho_1||_1) / 2
        tot = float(np.trace(blocks[0] + blocks[1]).real)
        return 0.5 * (tot + trace_norm(blocks[0] - blocks[1])), 0.0
    P = support_basis(sum(blocks))
    r = P.shape[1]
    blocks = [P.conj().T @ b @ P for b in blocks]
    if r == 1:
        return max(float(b[0, 0].real) for b in blocks), 0.0
    K = len(blocks)
    # M_K = I - sum_{x<K} M_x, so the objective is Tr rho_K + sum_{x<K} Tr((rho_x - rho_K) M_x)
    variables = [MatrixVar(f"M{x}", r, r) for x in range(K - 1)]
    lmis = [LmiBlock(r, np.zeros((r, r)), [Placement(x, 0, 0)]) for x in range(K - 1)]
    lmis.append(LmiBlock(r, np.eye(r), [Placement(x, 0, 0, scale=-1.0) for x in range(K - 1)]))
    obj = {x: blocks[x] - blocks[-1] for x in range(K - 1)}
    start = [np.eye(r) / K for _ in range(K - 1)]
    sol = sdp_solve(SdpProblem(variables, lmis, obj, start, "max"))
    return sol.value + float(np.trace(blocks[-1]).real), sol.gap


def pguess(s: QOperator, target: str, side=None) -> float:
    """Optimal probability of guessing the classical ``target`` from ``side``."""
    pieces, classical = _pieces(s, [target], side)
    if not classical:
        raise ValueError(f"state is not classical on {target!r}")
    return sum(pguess_blocks(pc.blocks)[0] for pc in pieces)


def helstrom(p0: float, rho0: np.ndarray, p1: float, rho1: np.ndarray) -> float:
    """Closed-form optimal success probability for two states."""
    lam = np.linalg.eigvalsh(_herm(p0 * rho0 - p1 * rho1))
    return 0.5 * (p0 + p1 + float(np.sum(np.abs(lam))))


# ------------------------------------------------------------------ collision quantities


def _check_support(rho_e: np.ndarray, sigma: np.ndarray) -> None:
    P = support_basis(sigma)
    Q = np.eye(sigma.shape[0]) - P @ P.conj().T
    leak = float(np.max(np.abs(Q @ rho_e @ Q), initial=0.0))
    if leak > 1e-10:
        raise ValueError(f"sigma does not cover the support of rho_E (weight {leak:.3g} outside)")


def _side_split(s: QOperator, sigma: QOperator) -> tuple[str, list[str], np.ndarray]:
    k = s.names[0]
    side = list(s.names[1:])
    if list(sigma.names) != side:
        raise ValueError(f"sigma must live on {side}, got {list(sigma.names)}")
    rho_e = marginal(s, side).matrix
    _check_support(rho_e, sigma.matrix)
    return k, side, rho_e


def d2(s: QOperator, sigma: QOperator) -> float:
    """``Tr{((rho_KE - 2^-m I (x) rho_E)(I (x) sigma^-1/2))^2}`` with K the first register."""
    k, side, rho_e = _side_split(s, sigma)
    dk = s.layout.dim(k)
    D = s.matrix - np.kron(np.eye(dk) / dk, rho_e)
    X = D @ np.kron(np.eye(dk), psd_inv_sqrt(sigma.matrix))
    return float(np.trace(X @ X).real)


def h2(s: QOperator, sigma: QOperator) -> float:
    """``-log2 Tr{(rho (I (x) sigma^-1/2))^2}`` with the classical register first."""
    k, side, rho_e = _side_split(s, sigma)
    dk = s.layout.dim(k)
    X = s.matrix @ np.kron(np.eye(dk), psd_inv_sqrt(sigma.matrix))
    return -math.log2(float(np.trace(X @ X).real))


def renyi_tilde(s: QOperator, which: Literal["half-down", "two-down"]) -> float:
    """Sandwiched-type conditional entropies relative to ``rho_E`` (K is the first register)."""
    k = s.names[0]
    side = list(s.names[1:])
    rho_e = marginal(s, side)
    if which == "two-down":
        return h2(s, rho_e)
    if which == "half-down":
        dk = s.layout.dim(k)
        F = trace_norm(psd_sqrt(np.kron(np.eye(dk), rho_e.matrix)) @ psd_sqrt(s.matrix))
        return 2 * math.log2(F)
    raise ValueError(f"unknown Renyi variant {which!r}")


# ------------------------------------------------------------------ smoothing


def truncation_candidates(s: QOperator, target: str, eps: float, max_candidates: int = 8) -> list[QOperator]:
    """Sub-normalised states obtained by removing the smallest eigenvalues.

    When ``target`` is classical the truncation is done block by block so the
    candidates stay classical.  Only candidates within purified distance
    ``eps`` of ``s`` are returned.
    """
    basis = target_basis(s, [target])
    rest = [n for n in s.names if n != target]
    work = reorder(to_z_basis(s, target, basis) if basis else s, [target] + rest)
    M = work.matrix
    if basis is not None:
        d = work.layout.dim(target)
        r = M.shape[0] // d
        comps = []
        for u in range(d):
            lam, V = np.linalg.eigh(M[u * r : (u + 1) * r, u * r : (u + 1) * r])
            for i, l in enumerate(lam):
                if l > 0:
                    vec = np.zeros(M.shape[0], dtype=complex)
                    vec[u * r : (u + 1) * r] = V[:, i]
                    comps.append((float(l), vec))
    else:
        lam, V = np.linalg.eigh(M)
        comps = [(float(l), V[:, i]) for i, l in enumerate(lam) if l > 0]
    comps.sort(key=lambda c: c[0])
    out = []
    cur = M.copy()
    for l, vec in comps[:-1]:
        cur = cur - l * np.outer(vec, vec.conj())
        cand = QOperator(work.layout, cur)
        if basis == "x":
            cand = to_z_basis(cand, target, "x")
        cand = reorder(cand, list(s.names))
        if purified_distance(cand, s) > eps:
            break
        out.append(cand)
        if len(out) >= max_candidates:
            break
    return out


def hmin_smooth_lower(
    s: QOperator, target, side, eps: float, candidates: Sequence[QOperator] | None = None
) -> EntropyResult:
    """Certified lower bound on the smooth min-entropy: best ``hmin`` over candidates in the ball."""
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    cands = [s] + list(candidates or [])
    best = None
    for c in cands:
        if c.layout != s.layout:
            raise ValueError("candidate lives on a different layout")
        dist = purified_distance(c, s)
        if dist > eps + 1e-12:
            raise ValueError(f"candidate at purified distance {dist:.6g} is outside the eps-ball ({eps})")
        h = hmin(c, target, side)
        if best is None or h.value > best.value:
            best = h
    best.bound = "lower"
    return best
