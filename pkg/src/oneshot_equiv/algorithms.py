"""Security and decoding indices of privacy amplification, error correction and data compression.

An :class:`AlgorithmInstance` bundles a pure state ``rho_ABE`` in standard
form with its two classical reductions and a dual pair of linear maps.  The
indices are

* ``Q^PA = Tr rho - 2^{H_max(f(Z^A)|E) - m}``
* ``Q^EC = Q^DC = Tr rho - p_guess(X^A | B, g(X^A))``

and the equality of all of them (together with the min-entropy form of the
decoding index) is checked by :func:`verify_theorem1`, each value coming from
its own computational path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal

import numpy as np
import scipy.optimize

from . import entropies as ent
from .gf2 import HashFamily, LinearHash, dual_of, is_dual_pair, random_surjective
from .quantum import (
    TOL_ROUNDTRIP,
    PureState,
    QOperator,
    RegisterLayout,
    apply_classical_function,
    classical_blocks,
    dephase,
    haar_pure,
    hadamard,
    marginal,
    project_pauli,
    psd_inv_sqrt,
    pure_marginal,
    standard_form_from,
    support_basis,
    to_z_basis,
    trace_norm,
)
from .sdp import LmiBlock, MatrixVar, Placement, SdpError, SdpProblem, sdp_solve, trace_equality

SPREAD_TOL = 1e-6


# ------------------------------------------------------------------ instances


@dataclass(frozen=True, eq=False)
class AlgorithmInstance:
    """Standard-form state plus a dual pair ``(f, g)``.

    ``g`` is ``None`` only when ``m == n`` (no syndrome bits).
    """

    standard_form: PureState
    rho_ZAE: QOperator
    rho_XAB: QOperator
    f: LinearHash
    g: LinearHash | None
    seed: int | None = None

    def __post_init__(self):
        n, m = self.f.n, self.f.m
        if tuple(self.standard_form.layout.names) != ("A", "B", "E"):
            raise ValueError("standard form must be ordered (A, B, E)")
        if self.standard_form.layout.dim("A") != 2**n:
            raise ValueError("register A does not hold n qubits")
        if self.g is None:
            if m != n or not self.f.surjective:
                raise ValueError("g may be omitted only for a bijective f (m == n)")
        elif not is_dual_pair(self.f, self.g):
            raise ValueError("f and g are not a dual pair")
        psi = self.standard_form
        ae = pure_marginal(psi, ["A", "E"])
        ab = pure_marginal(psi, ["A", "B"])
        # each reduction is the measured marginal of the pure state ...
        if np.max(np.abs(dephase(ae, "A", "z").matrix - self.rho_ZAE.matrix)) > TOL_ROUNDTRIP:
            raise ValueError("rho_{Z^A E} is not the z-measured A E marginal of the pure state")
        if np.max(np.abs(dephase(ab, "A", "x").matrix - self.rho_XAB.matrix)) > TOL_ROUNDTRIP:
            raise ValueError("rho_{X^A B} is not the x-measured A B marginal of the pure state")
        # ... and at least one marginal is already classical (standard form)
        dz = np.max(np.abs(ae.matrix - self.rho_ZAE.matrix))
        dx = np.max(np.abs(ab.matrix - self.rho_XAB.matrix))
        if min(dz, dx) > TOL_ROUNDTRIP:
            raise ValueError("pure state is not in standard form: neither marginal is classical")

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def m(self) -> int:
        return self.f.m

    @property
    def trace(self) -> float:
        return self.rho_ZAE.trace

    @classmethod
    def from_cq_state(cls, rho_ZAE: QOperator, f: LinearHash, seed: int | None = None) -> "AlgorithmInstance":
        sf = standard_form_from(rho_ZAE, "z")
        g = dual_of(f) if f.m < f.n else None
        return cls(sf.pure, sf.rho_ZAE, sf.rho_XAB, f, g, seed)

    def with_hash(self, f: LinearHash) -> "AlgorithmInstance":
        g = dual_of(f) if f.m < f.n else None
        return AlgorithmInstance(self.standard_form, self.rho_ZAE, self.rho_XAB, f, g, self.seed)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "m": self.m,
            "f": self.f.matrix.to_strings(),
            "g": None if self.g is None else self.g.matrix.to_strings(),
            "standard_form": self.standard_form.to_json(),
            "rho_ZAE": self.rho_ZAE.to_json(),
            "rho_XAB": self.rho_XAB.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "AlgorithmInstance":
        f = LinearHash.from_rows(doc["f"])
        g = None if doc.get("g") is None else LinearHash.from_rows(doc["g"])
        return cls(
            PureState.from_json(doc["standard_form"]),
            QOperator.from_json(doc["rho_ZAE"]),
            QOperator.from_json(doc["rho_XAB"]),
            f,
            g,
            doc.get("seed"),
        )

    @cached_property
    def rho_KE(self) -> QOperator:
        return hashed_state(self.rho_ZAE, self.f)

    @cached_property
    def tau(self) -> QOperator:
        return syndrome_state(self.rho_XAB, self.g)


@dataclass(frozen=True)
class InstanceConfig:
    """Random standard-form instance parameters.

    ``m = None`` draws ``m`` uniformly from ``1..n-1`` (``m = 1`` when ``n = 1``).
    The state is a Haar-random pure state on ``A E R`` whose ``A E`` marginal
    is dephased in the z basis and scaled to trace ``trace``.
    """

    n: int
    m: int | None = None
    e_qubits: int = 1
    r_dim: int = 2
    trace: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.m is not None and not 1 <= self.m <= self.n:
            raise ValueError("m must satisfy 1 <= m <= n")
        if not 0 < self.trace <= 1:
            raise ValueError("trace must lie in (0, 1]")
        if self.n + self.e_qubits > 6:
            raise ValueError("instance exceeds the dimension cap (n + e_qubits <= 6)")


def random_cq_state(rng: np.random.Generator, n: int, e_qubits: int = 1, r_dim: int = 2, trace: float = 1.0) -> QOperator:
    da, de = 2**n, 2**e_qubits
    v = haar_pure([da, de, r_dim], rng)
    layout = RegisterLayout.of(("A", da), ("E", de), ("R", r_dim))
    rho = marginal(PureState(layout, v).density(), ["A", "E"])
    return dephase(rho, "A", "z").scaled(trace)


def random_instance(seed: int, cfg: InstanceConfig) -> AlgorithmInstance:
    rng = np.random.default_rng(seed)
    m = cfg.m if cfg.m is not None else (1 if cfg.n == 1 else int(rng.integers(1, cfg.n)))
    rho = random_cq_state(rng, cfg.n, cfg.e_qubits, cfg.r_dim, cfg.trace)
    f = random_surjective(cfg.n, m, rng)
    return AlgorithmInstance.from_cq_state(rho, f, seed)


def product_cq_state(n: int, trace: float = 1.0) -> QOperator:
    """Uniform ``Z^A`` independent of a pure ``E``."""
    M = np.kron(np.eye(2**n) / 2**n, np.diag([1.0, 0.0]))
    return QOperator.from_array(trace * M, [("A", 2**n), ("E", 2)])


def leaked_cq_state(n: int, trace: float = 1.0) -> QOperator:
    """``E`` holds a perfect copy of the uniform ``Z^A``."""
    d = 2**n
    M = np.zeros((d * d, d * d))
    for z in range(d):
        M[z * d + z, z * d + z] = trace / d
    return QOperator.from_array(M, [("A", d), ("E", d)])


# ------------------------------------------------------------------ derived states


def hashed_state(rho_ZAE: QOperator, f: LinearHash) -> QOperator:
    """``rho^f_KE = sum_k |k><k| (x) sum_{f(z)=k} rho^z_E``."""
    out = apply_classical_function(rho_ZAE, "A", "z", f, "K")
    return out


def syndrome_state(rho_XAB: QOperator, g: LinearHash | None) -> QOperator:
    """``tau = sum_x |x~><x~| (x) rho~^x_B (x) |g(x)><g(x)|_D`` (``rho_XAB`` itself when ``g`` is None)."""
    if g is None:
        return rho_XAB
    return apply_classical_function(rho_XAB, "A", "x", g, "D", keep_input=True)


def _side_of(tau: QOperator) -> list[str]:
    return [n for n in tau.names if n != "A"]


def pa_pipeline(psi: PureState, f: LinearHash) -> QOperator:
    """``rho_KE`` produced by measuring the Pauli strings ``Z^{f_i}`` on ``A`` of the pure state."""
    v = psi.amplitudes
    rows = _rows(f)
    branches = {(): v}
    for row in rows:
        nxt = {}
        for key, w in branches.items():
            for bit in (0, 1):
                nxt[key + (bit,)] = project_pauli(w, psi.layout, "A", row, "z", bit)
        branches = nxt
    de = psi.layout.dim("E")
    dk = 2**f.m
    M = np.zeros((dk * de, dk * de), dtype=complex)
    for key, w in branches.items():
        k = int("".join(map(str, key)), 2) if key else 0
        rho_e = _marginal_vec(w, psi.layout, ["E"])
        M[k * de : (k + 1) * de, k * de : (k + 1) * de] = rho_e
    return QOperator.from_array(M, [("K", dk), ("E", de)])


def _rows(h: LinearHash) -> list[np.ndarray]:
    return [np.array(row, dtype=int) for row in h.matrix.bits]


def _marginal_vec(w: np.ndarray, layout: RegisterLayout, keep: list[str]) -> np.ndarray:
    drop = [n for n in layout.names if n not in keep]
    perm = [layout.index(n) for n in keep + drop]
    t = w.reshape(layout.dims).transpose(perm)
    dk = math.prod(layout.dim(n) for n in keep)
    V = t.reshape(dk, -1)
    return V @ V.conj().T


def ec_pipeline(psi: PureState, g: LinearHash | None, n: int) -> float:
    """Optimal success probability of the syndrome-measurement decoder.

    Measures ``X^{g_j}`` on ``A`` of the pure state; for each syndrome the
    decoder sees the ``B`` blocks ``<e~| rho^s_AB |e~>`` and the best POVM is
    found by SDP.  The bit flip ``Z^e`` then maps ``|e~>`` to ``|0~>``.
    """
    v = psi.amplitudes
    branches = {(): v}
    if g is not None:
        for row in _rows(g):
            nxt = {}
            for key, w in branches.items():
                for bit in (0, 1):
                    nxt[key + (bit,)] = project_pauli(w, psi.layout, "A", row, "x", bit)
            branches = nxt
    H = hadamard(2**n)
    success = 0.0
    db = psi.layout.dim("B")
    for w in branches.values():
        rho_ab = _marginal_vec(w, psi.layout, ["A", "B"])
        rot = np.kron(H, np.eye(db))
        T = (rot @ rho_ab @ rot.conj().T).reshape(2**n, db, 2**n, db)
        blocks = [T[e, :, e, :] for e in range(2**n)]
        success += ent.pguess_blocks(blocks)[0]
    return success


# ------------------------------------------------------------------ indices


def q_pa_state(rho_ZAE: QOperator, f: LinearHash, method: Literal["direct", "duality", "both"] = "direct") -> float:
    """``Tr rho - 2^{H_max(f(Z^A)|E) - m}`` from the hashed state."""
    h = ent.hmax(hashed_state(rho_ZAE, f), "K", [n for n in rho_ZAE.names if n != "A"], method=method)
    return rho_ZAE.trace - h.linear / 2**f.m


def q_pa(inst: AlgorithmInstance) -> float:
    return q_pa_state(inst.rho_ZAE, inst.f)


def q_ec_state(rho_XAB: QOperator, g: LinearHash | None, method: Literal["pguess", "hmin"] = "pguess") -> float:
    """``Tr rho - p_guess(X^A | B, D)`` on the syndrome state (or via ``2^{-H_min}``)."""
    tau = syndrome_state(rho_XAB, g)
    if method == "pguess":
        return rho_XAB.trace - ent.pguess(tau, "A", _side_of(tau))
    return rho_XAB.trace - ent.hmin(tau, "A", _side_of(tau)).linear


def q_ec_dc(inst: AlgorithmInstance) -> float:
    return q_ec_state(inst.rho_XAB, inst.g)


def d1_state(rho_ZAE: QOperator, f: LinearHash) -> float:
    rho = hashed_state(rho_ZAE, f)
    dk = rho.layout.dim("K")
    rho_e = marginal(rho, [n for n in rho.names if n != "K"]).matrix
    return trace_norm(rho.matrix - np.kron(np.eye(dk) / dk, rho_e))


def d1(inst: AlgorithmInstance) -> float:
    """``|| rho^f_KE - 2^-m I (x) rho_E ||_1``."""
    return d1_state(inst.rho_ZAE, inst.f)


def _d1_prime_sdp(blocks: np.ndarray) -> float:
    """``min_sigma sum_k ||rho_k - sigma/dk||_1`` as ``min sum_k 2 Tr P_k - Tr rho + 1``."""
    dk, r, _ = blocks.shape
    variables = [MatrixVar("sigma", r, r)] + [MatrixVar(f"P{k}", r, r) for k in range(dk)]
    lmis = [LmiBlock(r, np.zeros((r, r)), [Placement(0, 0, 0)])]
    for k in range(dk):
        lmis.append(LmiBlock(r, np.zeros((r, r)), [Placement(k + 1, 0, 0)]))
        lmis.append(LmiBlock(r, -blocks[k], [Placement(k + 1, 0, 0), Placement(0, 0, 0, scale=1.0 / dk)]))
    obj = {k + 1: 2 * np.eye(r) for k in range(dk)}
    A, b = trace_equality(variables, [0], 1.0)
    top = max(float(np.linalg.eigvalsh(B)[-1]) for B in blocks)
    start = [np.eye(r) / r] + [(top + 0.1) * np.eye(r) for _ in range(dk)]
    sol = sdp_solve(SdpProblem(variables, lmis, obj, start, "min", A, b))
    # ||X_k||_1 = 2 Tr P_k - Tr X_k at the optimum, and sum_k Tr X_k = Tr rho - 1
    return sol.value - float(np.real(np.trace(blocks.sum(axis=0)))) + 1.0


def _d1_prime_direct(blocks: np.ndarray) -> float:
    """Fallback: minimise over ``sigma = L L^dagger / Tr`` with Nelder-Mead restarts."""
    dk, r, _ = blocks.shape

    def sigma_of(p):
        L = (p[: r * r] + 1j * p[r * r :]).reshape(r, r)
        S = L @ L.conj().T
        return S / np.trace(S).real

    def obj(p):
        S = sigma_of(p)
        return sum(trace_norm(blocks[k] - S / dk) for k in range(dk))

    rho_e = blocks.sum(axis=0)
    L0 = np.linalg.cholesky(rho_e + 1e-9 * np.eye(r))
    p0 = np.concatenate([L0.real.reshape(-1), L0.imag.reshape(-1)])
    res = scipy.optimize.minimize(obj, p0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    return float(res.fun)


def d1_prime_state(rho_ZAE: QOperator, f: LinearHash) -> float:
    """``min_sigma || rho^f_KE - 2^-m I (x) sigma_E ||_1`` over normalised ``sigma``.

    For a normalised state the result is checked against (and clipped to) ``d1``.
    """
    rho = hashed_state(rho_ZAE, f)
    blocks, _ = classical_blocks(rho, "K")
    # restrict sigma to the support of rho_E: components outside only add to the norm
    P = support_basis(blocks.sum(axis=0))
    blocks = np.stack([P.conj().T @ b @ P for b in blocks])
    try:
        val = _d1_prime_sdp(blocks) if blocks.shape[1] > 1 else _d1_prime_scalar(blocks)
    except SdpError:
        val = _d1_prime_direct(blocks)
    if abs(rho_ZAE.trace - 1.0) <= 1e-9:
        # sigma = rho_E is feasible only for normalised states
        upper = d1_state(rho_ZAE, f)
        if val > upper + 1e-8:
            raise AssertionError(f"d1' = {val} exceeds d1 = {upper}")
        val = min(val, upper)
    return val


def _d1_prime_scalar(blocks: np.ndarray) -> float:
    dk = blocks.shape[0]
    return float(sum(abs(b[0, 0].real - 1.0 / dk) for b in blocks))


def d1_prime(inst: AlgorithmInstance) -> float:
    return d1_prime_state(inst.rho_ZAE, inst.f)


def d2_state(rho_ZAE: QOperator, f: LinearHash) -> float:
    rho = hashed_state(rho_ZAE, f)
    side = [n for n in rho.names if n != "K"]
    return ent.d2(rho, marginal(rho, side))


def decode_pgm(inst: AlgorithmInstance) -> float:
    """Success probability of the pretty-good measurement on each syndrome's side states."""
    tau = inst.tau
    success = 0.0
    for blocks in _syndrome_blocks(tau):
        total = sum(blocks)
        R = psd_inv_sqrt(total)
        for b in blocks:
            M = R @ b @ R
            success += float(np.real(np.trace(b @ M)))
    return success


def _syndrome_blocks(tau: QOperator) -> list[list[np.ndarray]]:
    """Side states ``rho~^x_B`` grouped by syndrome value (``A`` rotated to the z basis)."""
    rot = to_z_basis(tau, "A", "x")
    blocks, rest = classical_blocks(rot, "A")
    if "D" not in tau.names:
        return [[b for b in blocks]]
    dd = rest.dim("D")
    names = list(rest.names)
    order = names.index("D")
    dims = rest.dims
    groups = []
    for s in range(dd):
        grp = []
        for b in blocks:
            T = b.reshape(dims + dims)
            idx = [slice(None)] * (2 * len(dims))
            idx[order] = s
            idx[order + len(dims)] = s
            sub = T[tuple(idx)]
            dsub = int(round(math.sqrt(sub.size)))
            sub = sub.reshape(dsub, dsub)
            if np.max(np.abs(sub)) > ent.ZERO_TOL:
                grp.append(sub)
        if grp:
            groups.append(grp)
    return groups


# ------------------------------------------------------------------ equality of the five expressions


@dataclass
class EqualityReport:
    """Five evaluations of the same index, each by its own path."""

    q_pa: float
    q_ec: float
    q_dc: float
    via_hmax: float
    via_hmin: float
    max_spread: float = field(init=False)
    tol: float = SPREAD_TOL

    def __post_init__(self):
        vals = self.values()
        self.max_spread = max(vals) - min(vals)

    def values(self) -> list[float]:
        return [self.q_pa, self.q_ec, self.q_dc, self.via_hmax, self.via_hmin]

    @property
    def passed(self) -> bool:
        return self.max_spread <= self.tol

    def to_json(self) -> dict:
        return {
            "q_pa": self.q_pa,
            "q_ec": self.q_ec,
            "q_dc": self.q_dc,
            "via_hmax": self.via_hmax,
            "via_hmin": self.via_hmin,
            "max_spread": self.max_spread,
            "pass": self.passed,
        }


def verify_theorem1(inst: AlgorithmInstance) -> EqualityReport:
    """Compare five independent evaluations of the common PA / EC / DC index.

    * ``q_pa``: hashed state, max-entropy by the fidelity SDP;
    * ``via_hmax``: Pauli-measurement pipeline on the pure state, max-entropy
      by purification duality;
    * ``q_dc``: syndrome state, guessing-probability SDP;
    * ``via_hmin``: syndrome state, min-entropy SDP;
    * ``q_ec``: syndrome-measurement pipeline on the pure state, per-syndrome
      guessing SDP on ``B``.
    """
    tr = inst.trace
    qpa = q_pa(inst)
    rho_ke = pa_pipeline(inst.standard_form, inst.f)
    via_hmax = tr - ent.hmax(rho_ke, "K", "E", method="duality").linear / 2**inst.m
    tau = inst.tau
    q_dc = tr - ent.pguess(tau, "A", _side_of(tau))
    via_hmin = tr - ent.hmin(tau, "A", _side_of(tau)).linear
    q_ec = tr - ec_pipeline(inst.standard_form, inst.g, inst.n)
    return EqualityReport(qpa, q_ec, q_dc, via_hmax, via_hmin)


# ------------------------------------------------------------------ family averages

Metric = Literal["q_pa", "q_ec_dc", "d1", "d2"]

_STATE_METRICS: dict[str, Callable[[QOperator, LinearHash], float]] = {
    "q_pa": q_pa_state,
    "d1": d1_state,
    "d2": d2_state,
}


def expect_over_family(fam: HashFamily, metric: Metric, inst: AlgorithmInstance) -> float:
    """Exact weighted average of ``metric`` over the members of ``fam``.

    For ``q_pa``, ``d1`` and ``d2`` the members act on ``Z^A`` of ``rho_{Z^A E}``;
    for ``q_ec_dc`` they are syndrome maps on ``X^A`` of ``rho_{X^A B}``.
    The sum is exactly rounded (``math.fsum``) and hence independent of order.
    """
    if fam.n != inst.n:
        raise ValueError(f"family acts on {fam.n} bits, instance has n = {inst.n}")
    terms = []
    for h, p in zip(fam.members, fam.probs):
        if metric in _STATE_METRICS:
            val = _STATE_METRICS[metric](inst.rho_ZAE, h)
        elif metric == "q_ec_dc":
            val = q_ec_state(inst.rho_XAB, h)
        else:
            raise ValueError(f"unknown metric {metric!r}")
        terms.append(float(p) * val)
    return math.fsum(terms)
