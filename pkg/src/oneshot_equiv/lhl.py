"""Verification harness for hashing lemmas, coding theorems and their equivalence.

Every check evaluates both sides of an inequality or identity on a concrete
instance and returns :class:`VerificationReport` objects.  Family averages are
exact enumerations (:func:`expect_over_family`); the universality parameters
used on right-hand sides come from :func:`certify_family` in rational
arithmetic.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Literal

import numpy as np

from . import entropies as ent
from .algorithms import (
    AlgorithmInstance,
    d1,
    d1_prime,
    d2_state,
    decode_pgm,
    ec_pipeline,
    expect_over_family,
    q_pa,
    verify_theorem1,
)
from .gf2 import (
    HashFamily,
    certify_family,
    dual_family,
    dual_delta_conversion,
    surjective_part,
    universal_lower_bound,
)
from .quantum import QOperator, dephase, marginal, pure_marginal

INEQ_TOL = 1e-9
EQ_TOL = 1e-6

Kind = Literal["inequality", "equality", "exact-inequality", "exact-equality"]


@dataclass
class VerificationReport:
    """One evaluated relation ``lhs <= rhs`` (or ``lhs == rhs``).

    ``instance`` describes where the numbers came from (seed, n, m, family,
    delta).  ``runtime`` is wall-clock seconds and is left out of
    :meth:`to_json` so that serialized reports are reproducible.
    """

    check: str
    kind: Kind
    lhs: float | Fraction
    rhs: float | Fraction
    instance: dict = field(default_factory=dict)
    tol: float | None = None
    notes: list[str] = field(default_factory=list)
    runtime: float = 0.0

    def __post_init__(self):
        if self.tol is None:
            self.tol = {"inequality": INEQ_TOL, "equality": EQ_TOL}.get(self.kind, 0.0)

    @property
    def slack(self) -> float:
        return float(self.rhs - self.lhs)

    @property
    def passed(self) -> bool:
        if self.kind == "inequality":
            return self.slack >= -self.tol
        if self.kind == "equality":
            return abs(float(self.lhs) - float(self.rhs)) <= self.tol
        if self.kind == "exact-inequality":
            return Fraction(self.lhs) <= Fraction(self.rhs)
        return Fraction(self.lhs) == Fraction(self.rhs)

    def to_json(self) -> dict:
        def num(x):
            return str(x) if isinstance(x, Fraction) else float(x)

        return {
            "check": self.check,
            "kind": self.kind,
            "lhs": num(self.lhs),
            "rhs": num(self.rhs),
            "slack": self.slack,
            "tol": self.tol,
            "pass": self.passed,
            "instance": self.instance,
            "notes": list(self.notes),
        }


def _describe(inst: AlgorithmInstance, fam: HashFamily | None = None, delta=None) -> dict:
    d = {"seed": inst.seed, "n": inst.n, "m": inst.m if fam is None else fam.m, "trace": inst.trace}
    if fam is not None:
        d["family"] = fam.name
        d["family_size"] = len(fam)
    if delta is not None:
        d["delta"] = str(delta)
    return d


def _timed(reports: list[VerificationReport], t0: float) -> list[VerificationReport]:
    dt = time.perf_counter() - t0
    for r in reports:
        r.runtime = dt
    return reports


def _side(rho: QOperator, reg: str) -> list[str]:
    return [n for n in rho.names if n != reg]


# instances hash by identity, so the caches only serve repeated checks on one object
@lru_cache(maxsize=64)
def hmin_ze(inst: AlgorithmInstance) -> ent.EntropyResult:
    """``H_min(Z^A|E)`` of the instance."""
    return ent.hmin(inst.rho_ZAE, "A", _side(inst.rho_ZAE, "A"))


@lru_cache(maxsize=64)
def hmax_xb(inst: AlgorithmInstance) -> ent.EntropyResult:
    """``H_max(X^A|B)`` of the instance (direct SDP)."""
    return ent.hmax(inst.rho_XAB, "A", _side(inst.rho_XAB, "A"), method="direct")


def _dual_pair(fam: HashFamily) -> tuple[HashFamily, HashFamily]:
    """Surjective part of ``fam`` and its dual family."""
    fs = surjective_part(fam)
    if fs.m >= fs.n:
        raise ValueError("dual family needs m < n")
    return fs, dual_family(fs)


def e_q_ec_pipeline(inst: AlgorithmInstance, g_fam: HashFamily) -> float:
    """``E_G Q^EC`` through the syndrome-measurement pipeline on the pure state."""
    terms = [float(p) * (inst.trace - ec_pipeline(inst.standard_form, g, inst.n)) for g, p in zip(g_fam.members, g_fam.probs)]
    return math.fsum(terms)


# ------------------------------------------------------------------ bound functions


@dataclass(frozen=True)
class BoundFunction:
    """Closed-form ``r(b)`` bounding the averaged index in terms of an entropy ``b``.

    * ``universal2``: ``2^{m-b}``
    * ``almost_universal2``: ``(delta - 1) Tr rho + 2^{m-b}``
    * ``dual_universal2``: ``delta 2^{m-b}``
    """

    kind: Literal["universal2", "almost_universal2", "dual_universal2"]
    m: int
    delta: Fraction = Fraction(1)
    trace: float = 1.0

    def __call__(self, b: float) -> float:
        base = 2.0 ** (self.m - b)
        if self.kind == "universal2":
            return base
        if self.kind == "almost_universal2":
            return float(self.delta - 1) * self.trace + base
        return float(self.delta) * base

    def to_json(self) -> dict:
        return {"kind": self.kind, "m": self.m, "delta": str(self.delta), "trace": self.trace}


def bound_for(kind: str, fam: HashFamily, trace: float) -> BoundFunction:
    """Bound function for ``fam`` with the certified ``delta`` of the requested kind."""
    cert = certify_family(fam)
    if kind == "universal2":
        if cert.delta_universal > 1:
            raise ValueError(f"{fam.name} is not universal2 (delta = {cert.delta_universal})")
        return BoundFunction(kind, fam.m, Fraction(1), trace)
    if kind == "almost_universal2":
        return BoundFunction(kind, fam.m, cert.delta_universal, trace)
    if kind == "dual_universal2":
        if cert.delta_dual_universal is None:
            raise ValueError(f"{fam.name} has no dual family")
        return BoundFunction(kind, fam.m, cert.delta_dual_universal, trace)
    raise ValueError(f"unknown bound kind {kind!r}")


# ------------------------------------------------------------------ hashing lemmas


def check_lhl_universal2(inst: AlgorithmInstance, fam: HashFamily) -> VerificationReport:
    """``E_F Q^PA <= 2^{m - H_min(Z^A|E)}`` for a universal2 family."""
    t0 = time.perf_counter()
    r = bound_for("universal2", fam, inst.trace)
    lhs = expect_over_family(fam, "q_pa", inst)
    h = hmin_ze(inst)
    rep = VerificationReport("lhl-universal2", "inequality", lhs, 2.0**fam.m * h.linear, _describe(inst, fam, r.delta))
    rep.notes.append(f"H_min(Z^A|E) = {h.value!r}")
    return _timed([rep], t0)[0]


def check_lhl_almost_universal2(inst: AlgorithmInstance, fam: HashFamily) -> VerificationReport:
    """``E_F Q^PA <= (delta - 1) Tr rho + 2^{m - H_min}`` with the certified ``delta``."""
    t0 = time.perf_counter()
    r = bound_for("almost_universal2", fam, inst.trace)
    lhs = expect_over_family(fam, "q_pa", inst)
    h = hmin_ze(inst)
    rhs = float(r.delta - 1) * inst.trace + 2.0**fam.m * h.linear
    rep = VerificationReport("lhl-almost-universal2", "inequality", lhs, rhs, _describe(inst, fam, r.delta))
    if rhs >= 1.0:
        rep.notes.append("vacuous: rhs >= 1")
    return _timed([rep], t0)[0]


def check_lhl_dual_universal2(inst: AlgorithmInstance, fam: HashFamily) -> VerificationReport:
    """``E_F Q^PA <= delta_dual 2^{m - H_min}``, run on the surjective part of ``fam``."""
    t0 = time.perf_counter()
    fs = surjective_part(fam)
    r = bound_for("dual_universal2", fs, inst.trace)
    lhs = expect_over_family(fs, "q_pa", inst)
    h = hmin_ze(inst)
    rep = VerificationReport("lhl-dual-universal2", "inequality", lhs, float(r.delta) * 2.0**fs.m * h.linear, _describe(inst, fs, r.delta))
    return _timed([rep], t0)[0]


# ------------------------------------------------------------------ coding theorems

CodingLemma = Literal["Lemma6", "Lemma8", "Lemma10"]


def check_coding_theorems(inst: AlgorithmInstance, fam: HashFamily, which: CodingLemma) -> VerificationReport:
    """``E_G Q^EC`` against the coding-theorem bound, ``G`` the dual of ``fam``.

    ``Q^EC`` is evaluated by the syndrome-measurement pipeline on the pure
    state; :func:`check_four_root` uses the syndrome-state SDP (``Q^DC``).

    ``fam`` is the hashing side ``F``; its surjective part ``F'`` is dualised to
    ``G``.  The bounds, with ``c = 2^{H_max(X^A|B) - (n-m)}``, are

    * ``Lemma6`` (``F'`` universal2): ``c``
    * ``Lemma8`` (``F'`` delta-almost universal2): ``(delta - 1) Tr rho + c``
    * ``Lemma10`` (``G`` delta-almost universal2): ``delta c``
    """
    t0 = time.perf_counter()
    fs, g_fam = _dual_pair(fam)
    n, m = fs.n, fs.m
    h = hmax_xb(inst)
    c = h.linear / 2.0 ** (n - m)
    if which == "Lemma6":
        delta = certify_family(fs).delta_universal
        if delta > 1:
            raise ValueError(f"{fs.name} is not universal2 (delta = {delta})")
        rhs = c
    elif which == "Lemma8":
        delta = certify_family(fs).delta_universal
        rhs = float(delta - 1) * inst.trace + c
    elif which == "Lemma10":
        delta = certify_family(g_fam).delta_universal
        rhs = float(delta) * c
    else:
        raise ValueError(f"unknown coding lemma {which!r}")
    lhs = e_q_ec_pipeline(inst, g_fam)
    desc = _describe(inst, g_fam, delta)
    main = VerificationReport(f"coding-{which}", "inequality", lhs, rhs, desc)
    main.notes.append(f"H_max(X^A|B) = {h.value!r}")
    return _timed([main], t0)[0]


def check_four_root(inst: AlgorithmInstance, fam: HashFamily) -> list[VerificationReport]:
    """``E_G Q^DC <= 4 sqrt(2^{H_max - (n-m)})`` and its comparison with ``delta 2^{H_max-(n-m)}``.

    ``G`` is the dual of the surjective part of ``fam``; requires a normalized
    state.  The first report is the bound itself, the second checks that the
    dual-universal coding bound ``delta c`` does not exceed ``4 sqrt(c)``.
    """
    t0 = time.perf_counter()
    fs, g_fam = _dual_pair(fam)
    h = hmax_xb(inst)
    c = h.linear / 2.0 ** (fs.n - fs.m)
    delta = certify_family(g_fam).delta_universal
    lhs = expect_over_family(g_fam, "q_ec_dc", inst)
    desc = _describe(inst, g_fam, delta)
    weak = 4.0 * math.sqrt(c)
    reps = [VerificationReport("coding-four-root", "inequality", lhs, weak, desc)]
    tight = float(delta) * c
    reps.append(VerificationReport("coding-four-root-looser", "inequality", tight, weak, dict(desc)))
    return _timed(reps, t0)


# ------------------------------------------------------------------ equivalence transfer


def check_theorem2_transfer(inst: AlgorithmInstance, fam: HashFamily, r: BoundFunction | str = "universal2") -> list[VerificationReport]:
    """Transfer of a bound between PA, EC and DC.

    Reports the averaged PA/EC equality on the dual pair of families, the
    entropic equality ``H_min(Z^A|E) + H_max(X^A|B) = n`` on the standard form,
    and the six combinations ``a <= r(b)`` with ``a`` one of
    ``E_F Q^PA, E_G Q^EC, E_G Q^DC`` and ``b`` one of
    ``H_min(Z^A|E), n - H_max(X^A|B)``.
    """
    t0 = time.perf_counter()
    fs, g_fam = _dual_pair(fam)
    if isinstance(r, str):
        r = bound_for(r, fs, inst.trace)
    desc = _describe(inst, fs, r.delta)
    desc["bound"] = r.to_json()
    n = fs.n
    e_pa = expect_over_family(fs, "q_pa", inst)
    e_ec = e_q_ec_pipeline(inst, g_fam)
    e_dc = expect_over_family(g_fam, "q_ec_dc", inst)
    hmin = hmin_ze(inst).value
    hmax = hmax_xb(inst).value
    reps = [
        VerificationReport("pa-ec-average-equality", "equality", e_pa, e_ec, dict(desc)),
        VerificationReport("uncertainty-equality", "equality", hmin + hmax, float(n), dict(desc)),
    ]
    for a_name, a in (("pa", e_pa), ("ec", e_ec), ("dc", e_dc)):
        for b_name, b in (("hmin", hmin), ("n-hmax", n - hmax)):
            reps.append(VerificationReport(f"transfer-{a_name}-{b_name}", "inequality", a, r(b), dict(desc)))
    return _timed(reps, t0)


def check_uncertainty(inst: AlgorithmInstance) -> VerificationReport:
    """``H_min(Z^A|E) + H_max(X^A|B) = n`` on a standard-form instance."""
    t0 = time.perf_counter()
    val = hmin_ze(inst).value + hmax_xb(inst).value
    return _timed([VerificationReport("uncertainty-equality", "equality", val, float(inst.n), _describe(inst))], t0)[0]


def check_uncertainty_general(psi, n: int, seed: int | None = None) -> VerificationReport:
    """``H_min(Z^A|E) + H_max(X^A|B) >= n`` for an arbitrary pure ``A B E`` state."""
    t0 = time.perf_counter()
    ae = dephase(pure_marginal(psi, ["A", "E"]), "A", "z")
    ab = dephase(pure_marginal(psi, ["A", "B"]), "A", "x")
    val = ent.hmin(ae, "A", "E").value + ent.hmax(ab, "A", "B", method="direct").value
    rep = VerificationReport("uncertainty-inequality", "inequality", float(n), val, {"seed": seed, "n": n}, tol=1e-8)
    return _timed([rep], t0)[0]


# ------------------------------------------------------------------ collision-entropy chain


def check_collision_chain(inst: AlgorithmInstance) -> list[VerificationReport]:
    """Single-hash chain from the collision entropy to ``Q^PA`` (normalized states).

    ``Q^PA <= 2^m d2(rho^f|rho_E)``, ``H_min(Z^A|E) <= H2(rho_{Z^A E}|rho_E)``,
    ``H~_{1/2}(K|E) >= H~_2(K|E)`` and ``H_max(K|E) >= H~_{1/2}(K|E)``.
    """
    t0 = time.perf_counter()
    desc = _describe(inst)
    rho_ke = inst.rho_KE
    qpa = q_pa(inst)
    d2v = d2_state(inst.rho_ZAE, inst.f)
    side = _side(inst.rho_ZAE, "A")
    hmin = hmin_ze(inst).value
    h2v = ent.h2(inst.rho_ZAE, marginal(inst.rho_ZAE, side))
    half = ent.renyi_tilde(rho_ke, "half-down")
    two = ent.renyi_tilde(rho_ke, "two-down")
    hmax_k = ent.hmax(rho_ke, "K", _side(rho_ke, "K"), method="direct").value
    reps = [
        VerificationReport("qpa-le-d2", "inequality", qpa, 2.0**inst.m * d2v, dict(desc)),
        VerificationReport("hmin-le-h2", "inequality", hmin, h2v, dict(desc)),
        VerificationReport("renyi-half-two", "inequality", two, half, dict(desc)),
        VerificationReport("hmax-renyi-half", "inequality", half, hmax_k, dict(desc)),
    ]
    return _timed(reps, t0)


def check_theorem4_pipeline(inst: AlgorithmInstance, fam: HashFamily) -> list[VerificationReport]:
    """Averaged collision chain and the conventional hashing lemma it yields.

    Requires a normalized state and a universal2 ``fam``.
    """
    if abs(inst.trace - 1.0) > 1e-9:
        raise ValueError("the collision chain needs a normalized state")
    t0 = time.perf_counter()
    r = bound_for("universal2", fam, inst.trace)
    desc = _describe(inst, fam, r.delta)
    e_pa = expect_over_family(fam, "q_pa", inst)
    e_d2 = expect_over_family(fam, "d2", inst)
    e_d1 = expect_over_family(fam, "d1", inst)
    side = _side(inst.rho_ZAE, "A")
    hmin = hmin_ze(inst).value
    h2v = ent.h2(inst.rho_ZAE, marginal(inst.rho_ZAE, side))
    m = fam.m
    reps = [
        VerificationReport("average-qpa-le-d2", "inequality", e_pa, 2.0**m * e_d2, dict(desc)),
        VerificationReport("hmin-le-h2", "inequality", hmin, h2v, dict(desc)),
        VerificationReport("collision-d2-bound", "inequality", e_d2, 2.0**-h2v, dict(desc)),
        VerificationReport("conventional-lhl-four-root", "inequality", e_d1, 4.0 * math.sqrt(r(hmin)), dict(desc)),
        VerificationReport("conventional-lhl", "inequality", e_d1, math.sqrt(inst.trace * 2.0 ** (m - hmin)), dict(desc)),
    ]
    return _timed(reps, t0)


# ------------------------------------------------------------------ distances


def check_distance_bounds(inst: AlgorithmInstance) -> list[VerificationReport]:
    """``d1 <= 4 sqrt(Tr rho) sqrt(Q^PA)`` and the ``d1'`` sandwich (normalized states)."""
    t0 = time.perf_counter()
    desc = _describe(inst)
    q = q_pa(inst)
    dd = d1(inst)
    reps = [VerificationReport("d1-four-root-qpa", "inequality", dd, 4.0 * math.sqrt(inst.trace * max(q, 0.0)), dict(desc), tol=1e-8)]
    if abs(inst.trace - 1.0) <= 1e-9:
        dp = d1_prime(inst)
        qc = min(max(q, 0.0), 1.0)
        reps += [
            VerificationReport("d1prime-lower", "inequality", 1.0 - math.sqrt(1.0 - qc), dp / 2, dict(desc), tol=1e-8),
            VerificationReport("d1prime-upper", "inequality", dp / 2, math.sqrt(qc), dict(desc), tol=1e-8),
            VerificationReport("d1prime-le-d1", "inequality", dp, dd, dict(desc), tol=1e-8),
            VerificationReport("d1-le-two-d1prime", "inequality", dd, 2 * dp, dict(desc), tol=1e-8),
        ]
    return _timed(reps, t0)


def check_guessing_from_qpa(inst: AlgorithmInstance) -> VerificationReport:
    """``p_guess(Z^A|B) >= 1 - 2 Q^PA`` for a bijective hash (normalized state).

    Uses the ``Z``-measured ``A B`` marginal of the pure state.
    """
    t0 = time.perf_counter()
    ab = dephase(pure_marginal(inst.standard_form, ["A", "B"]), "A", "z")
    pg = ent.pguess(ab, "A", "B")
    return _timed([VerificationReport("pguess-vs-qpa", "inequality", 1.0 - 2.0 * q_pa(inst), pg, _describe(inst), tol=1e-8)], t0)[0]


# ------------------------------------------------------------------ index equality and engine oracles


def check_index_equality(inst: AlgorithmInstance) -> VerificationReport:
    """Spread of the five equal expressions as an equality report."""
    t0 = time.perf_counter()
    rep = verify_theorem1(inst)
    vals = rep.values()
    out = VerificationReport("index-spread", "equality", min(vals), max(vals), _describe(inst))
    out.notes.append("values q_pa, q_ec, q_dc, via_hmax, via_hmin = " + ", ".join(repr(v) for v in vals))
    return _timed([out], t0)[0]


def check_entropy_engine(inst: AlgorithmInstance) -> list[VerificationReport]:
    """Cross-checks of the entropy engine on one instance.

    ``H_min = -log2 p_guess`` on the syndrome state, direct vs duality
    max-entropy on the hashed state, and PGM success below the optimum.
    """
    t0 = time.perf_counter()
    desc = _describe(inst)
    tau = inst.tau
    side = _side(tau, "A")
    h = ent.hmin(tau, "A", side)
    pg = ent.pguess(tau, "A", side)
    rho_ke = inst.rho_KE
    hd = ent.hmax_direct(rho_ke, "K", _side(rho_ke, "K"))
    hq = ent.hmax_duality(rho_ke, "K", _side(rho_ke, "K"))
    reps = [
        VerificationReport("hmin-vs-pguess", "equality", h.value, -math.log2(pg), dict(desc)),
        VerificationReport("hmax-direct-vs-duality", "equality", hd.value, hq.value, dict(desc)),
        VerificationReport("pgm-le-optimal", "inequality", decode_pgm(inst), pg, dict(desc)),
    ]
    return _timed(reps, t0)


def check_fixed_oracles() -> list[VerificationReport]:
    """Closed-form anchors: Helstrom bound, maximally entangled min-entropy, uniform bits."""
    t0 = time.perf_counter()
    reps = []
    # Helstrom: |0> vs |+> with equal priors
    r0 = np.array([[1.0, 0.0], [0.0, 0.0]])
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    r1 = np.outer(plus, plus)
    closed = 0.5 * (1 + math.sqrt(1 - abs(plus[0]) ** 2))
    reps.append(VerificationReport("helstrom-closed-form", "equality", ent.helstrom(0.5, r0, 0.5, r1), closed, {"oracle": "helstrom"}, tol=1e-8))
    blocks = [0.5 * r0, 0.5 * r1]
    reps.append(VerificationReport("helstrom-vs-sdp", "equality", ent.pguess_blocks(blocks, closed_form=False)[0], closed, {"oracle": "helstrom"}, tol=1e-8))
    phi = np.zeros(4)
    phi[0] = phi[3] = 1 / math.sqrt(2)
    me = QOperator.from_array(np.outer(phi, phi), [("A", 2), ("B", 2)])
    reps.append(VerificationReport("max-entangled-hmin", "equality", ent.hmin(me, "A", "B").value, -1.0, {"oracle": "maximally-entangled"}))
    uni = QOperator.from_array(np.diag([0.25] * 4), [("A", 2), ("B", 2)])
    reps.append(VerificationReport("uniform-bit-hmin", "equality", ent.hmin(uni, "A", "B").value, 1.0, {"oracle": "uniform"}))
    return _timed(reps, t0)


# ------------------------------------------------------------------ family certification


def check_family_certification(fam: HashFamily) -> list[VerificationReport]:
    """Exact checks on one enumerable family.

    The counting lower bound on ``delta`` always; the dual conversion
    ``delta(G) <= 2(1 - 2^-m delta(F)) + (delta(F) - 1) 2^{n-m}`` for the dual of
    the surjective part when it exists.
    """
    t0 = time.perf_counter()
    cert = certify_family(fam)
    desc = {"family": fam.name, "n": fam.n, "m": fam.m, "family_size": len(fam), "delta": str(cert.delta_universal)}
    reps = [VerificationReport("delta-lower-bound", "exact-inequality", universal_lower_bound(fam.n, fam.m), cert.delta_universal, desc)]
    if fam.m < fam.n:
        fs = surjective_part(fam)
        cs = certify_family(fs)
        d = dict(desc)
        d["delta"] = str(cs.delta_universal)
        reps.append(VerificationReport("dual-delta-conversion", "exact-inequality", cs.delta_dual_universal, dual_delta_conversion(cs.delta_universal, fs.n, fs.m), d))
    return _timed(reps, t0)


def check_universal_exact(fam: HashFamily) -> VerificationReport:
    """``delta_universal(fam) == 1`` exactly (all-linear and Toeplitz families)."""
    t0 = time.perf_counter()
    cert = certify_family(fam)
    desc = {"family": fam.name, "n": fam.n, "m": fam.m, "family_size": len(fam)}
    return _timed([VerificationReport("delta-universal-exact", "exact-equality", cert.delta_universal, Fraction(1), desc)], t0)[0]


# ------------------------------------------------------------------ QKD bound conversion


@dataclass
class QkdBounds:
    """Bounds on ``E_F d1`` from the two proof approaches (no smoothing)."""

    measured_d1: float
    lhl: float
    pec: float
    reverse: float
    ucr: float
    ucr_measured: float
    q_ec_th: float
    eps: float = 0.0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def qkd_bounds(inst: AlgorithmInstance, fam: HashFamily, h_min_th: float) -> QkdBounds:
    """Evaluate the four security bounds at threshold ``h_min_th`` (``eps = 0``).

    * ``lhl``: ``sqrt(2^{m - h})``
    * ``pec``: ``2 sqrt 2 sqrt(Q^EC_th)`` with ``Q^EC_th = 2^{m - h}``
    * ``reverse``: ``4 sqrt(Q^EC_th)``
    * ``ucr``: ``sqrt(2^{(n - h) - (n - m)})``, the phase-entropy threshold form
    * ``ucr_measured``: ``sqrt(Tr rho) sqrt(2^{H_max(X^A|B) - (n-m)})``
    """
    hmin = hmin_ze(inst).value
    if hmin < h_min_th - 1e-9:
        raise ValueError(f"H_min(Z^A|E) = {hmin:.6g} is below the threshold {h_min_th}")
    n, m = fam.n, fam.m
    q_th = 2.0 ** (m - h_min_th)
    hmax_th = n - h_min_th
    hx = hmax_xb(inst)
    return QkdBounds(
        measured_d1=expect_over_family(fam, "d1", inst),
        lhl=math.sqrt(q_th),
        pec=2.0 * math.sqrt(2.0) * math.sqrt(q_th),
        reverse=4.0 * math.sqrt(q_th),
        ucr=math.sqrt(2.0 ** (hmax_th - (n - m))),
        ucr_measured=math.sqrt(inst.trace * hx.linear / 2.0 ** (n - m)),
        q_ec_th=q_th,
    )


def qkd_conversion_demo(inst: AlgorithmInstance, fam: HashFamily, h_min_th: float, eps: float = 0.0) -> list[VerificationReport]:
    """Bundle of reports comparing the measured ``E_F d1`` with every bound.

    Smoothing is not computed, so only ``eps = 0`` is accepted.
    """
    if eps != 0.0:
        raise ValueError("only eps = 0 is supported: the smoothed state is not computed")
    t0 = time.perf_counter()
    bcert = bound_for("universal2", fam, inst.trace)
    b = qkd_bounds(inst, fam, h_min_th)
    desc = _describe(inst, fam, bcert.delta)
    desc["h_min_th"] = h_min_th
    note = "eps = 0: no smoothing"
    reps = []
    for name in ("lhl", "pec", "reverse", "ucr", "ucr_measured"):
        rep = VerificationReport(f"qkd-{name}", "inequality", b.measured_d1, getattr(b, name), dict(desc), notes=[note])
        if getattr(b, name) >= 1.0:
            rep.notes.append("vacuous: bound >= 1")
        reps.append(rep)
    reps.append(VerificationReport("qkd-ucr-equals-lhl", "equality", b.ucr, b.lhl, dict(desc), tol=1e-9, notes=[note]))
    reps.append(VerificationReport("qkd-ucr-le-pec", "inequality", b.ucr, b.pec, dict(desc), notes=[note]))
    return _timed(reps, t0)
