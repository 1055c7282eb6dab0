"""Acceptance run: one PASS/FAIL line per criterion, at the stated tolerances.

Run alone with ``pytest tests/test_acceptance.py -s`` or through
``scripts/run_acceptance.py``.  Instance seeds derive from a fixed master seed.
"""

import math
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from oneshot_equiv import lhl
from oneshot_equiv.algorithms import InstanceConfig, random_instance, verify_theorem1
from oneshot_equiv.gf2 import (
    HashFamily,
    LinearHash,
    certify_family,
    family_all_linear,
    family_toeplitz,
    random_surjective,
    universal_lower_bound,
)
from oneshot_equiv.quantum import PureState, RegisterLayout, haar_pure
from oneshot_equiv.suite import derive_seed

MASTER = 20240601
pytestmark = pytest.mark.slow


def emit(capsys, k: int, title: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'}  criterion {k:>2}: {title}  [{detail}]")


def seeds(tag: str, count: int) -> list[int]:
    return [derive_seed(MASTER, tag, i) for i in range(count)]


def worst(reports) -> float:
    return min(r.slack for r in reports)


def spread(reports) -> float:
    return max(abs(float(r.lhs) - float(r.rhs)) for r in reports)


def check_all(reports, tol_of=None) -> bool:
    """Every report passes at its own tolerance (optionally overridden per check)."""
    ok = True
    for r in reports:
        tol = tol_of(r) if tol_of else r.tol
        if r.kind == "inequality":
            ok &= r.slack >= -tol
        elif r.kind == "equality":
            ok &= abs(float(r.lhs) - float(r.rhs)) <= tol
        else:
            ok &= r.passed
    return bool(ok)


@pytest.fixture(scope="module")
def standard_instances():
    """50 random standard-form instances, n cycling over 1..3, every third sub-normalized."""
    out = []
    for i, s in enumerate(seeds("standard", 50)):
        n = 1 + i % 3
        out.append(random_instance(s, InstanceConfig(n, trace=0.7 if i % 3 == 2 else 1.0)))
    return out


@pytest.fixture(scope="module")
def normalized_instances():
    return [random_instance(s, InstanceConfig(2 + i % 2)) for i, s in enumerate(seeds("normalized", 50))]


# ---------------------------------------------------------------- 1


def test_criterion_01_five_expressions_agree(standard_instances, capsys):
    reps = [verify_theorem1(inst) for inst in standard_instances]
    worst_spread = max(r.max_spread for r in reps)
    ok = worst_spread <= 1e-6
    emit(capsys, 1, "five expressions of the PA/EC/DC index agree", ok, f"50 instances, max spread {worst_spread:.2e} <= 1e-6")
    assert ok


# ---------------------------------------------------------------- 2


def test_criterion_02_uncertainty_relation(standard_instances, capsys):
    eq = [lhl.check_uncertainty(inst) for inst in standard_instances]
    eq_spread = spread(eq)
    general = []
    for s in seeds("pure-tripartite", 20):
        rng = np.random.default_rng(s)
        n = 1 + s % 2
        dims = [2**n, 4, 2]
        psi = PureState(RegisterLayout.of(("A", dims[0]), ("B", dims[1]), ("E", dims[2])), haar_pure(dims, rng))
        general.append(lhl.check_uncertainty_general(psi, n, s))
    ok = eq_spread <= 1e-6 and worst(general) >= -1e-8
    emit(capsys, 2, "H_max(X|B) + H_min(Z|E) = n on standard forms, >= n otherwise", ok,
         f"max |sum - n| {eq_spread:.2e}; 20 pure states, min slack {worst(general):.3e}")
    assert ok


# ---------------------------------------------------------------- 3


def test_criterion_03_universal_hashing_and_dual_equality(capsys):
    fam = family_toeplitz(3, 1)
    assert len(fam) == 8
    lhl_reps, eq_reps = [], []
    for i, s in enumerate(seeds("toeplitz-cq", 20)):
        inst = random_instance(s, InstanceConfig(3, 1, trace=1.0 if i % 2 == 0 else 0.8))
        lhl_reps.append(lhl.check_lhl_universal2(inst, fam))
        transfer = lhl.check_theorem2_transfer(inst, fam)
        eq_reps += [r for r in transfer if r.check == "pa-ec-average-equality"]
    ok = worst(lhl_reps) >= -1e-9 and spread(eq_reps) <= 1e-6
    emit(capsys, 3, "E_F Q^PA <= 2^(m - H_min) on Toeplitz(3,1); E_F Q^PA = E_G Q^EC", ok,
         f"min slack {worst(lhl_reps):.3e}; max |E_F Q^PA - E_G Q^EC| {spread(eq_reps):.2e}")
    assert ok


# ---------------------------------------------------------------- 4


def test_criterion_04_almost_universal_variants(capsys):
    delta_two = [
        HashFamily.uniform([LinearHash.from_rows(["11"])], "single[11]"),
        HashFamily.uniform([LinearHash.from_rows(["110"]), LinearHash.from_rows(["011"])], "pair[110,011]"),
    ]
    for fam in delta_two:
        assert certify_family(fam).delta_universal == 2
    almost, dual, reduction = [], [], []
    for i, s in enumerate(seeds("almost", 10)):
        for fam in delta_two:
            inst = random_instance(s, InstanceConfig(fam.n, fam.m))
            almost.append(lhl.check_lhl_almost_universal2(inst, fam))
        # a small random family of surjective maps: certified, generally not universal2
        rng = np.random.default_rng(s)
        fam = HashFamily.uniform([random_surjective(3, 1, rng) for _ in range(3)], f"random-3x[3,1]#{i}")
        cert = certify_family(fam)
        inst = random_instance(s, InstanceConfig(3, 1))
        rep = lhl.check_lhl_dual_universal2(inst, fam)
        assert rep.instance["delta"] == str(cert.delta_dual_universal)
        dual.append(rep)
        tfam = family_toeplitz(3, 1)
        a = lhl.check_lhl_universal2(inst, tfam)
        b = lhl.check_lhl_almost_universal2(inst, tfam)
        reduction.append(lhl.VerificationReport("delta-one-reduction", "equality", a.rhs, b.rhs, tol=1e-9))
    ok = worst(almost) >= -1e-9 and worst(dual) >= -1e-9 and spread(reduction) <= 1e-9
    emit(capsys, 4, "delta-almost universal2 (delta = 2) and dual-universal2 bounds; delta = 1 reduction", ok,
         f"min slack {worst(almost):.3e} / {worst(dual):.3e}; reduction spread {spread(reduction):.1e}")
    assert ok


# ---------------------------------------------------------------- 5


def test_criterion_05_coding_theorems(capsys):
    coding, four = [], []
    for i, s in enumerate(seeds("coding", 20)):
        n = 2 + i % 2
        inst = random_instance(s, InstanceConfig(n, 1))
        fam = family_toeplitz(n, 1)
        coding += [lhl.check_coding_theorems(inst, fam, w) for w in ("Lemma6", "Lemma8", "Lemma10")]
        four += lhl.check_four_root(inst, fam)
    bound = [r for r in four if r.check == "coding-four-root"]
    looser = [r for r in four if r.check == "coding-four-root-looser"]
    ok = worst(coding) >= -1e-9 and worst(bound) >= -1e-9 and worst(looser) >= -1e-9
    emit(capsys, 5, "E_G Q^EC below each coding bound; 4 sqrt form holds and is never tighter", ok,
         f"{len(coding)} reports, min slack {worst(coding):.3e}; four-root {worst(bound):.3e}; looser {worst(looser):.3e}")
    assert ok


# ---------------------------------------------------------------- 6


def test_criterion_06_distance_relations(normalized_instances, capsys):
    reps = []
    for inst in normalized_instances:
        reps += lhl.check_distance_bounds(inst)
    ok = worst(reps) >= -1e-8
    emit(capsys, 6, "d1 <= 4 sqrt(Tr rho Q^PA); d1' sandwich; d1' <= d1 <= 2 d1'", ok,
         f"{len(reps)} reports on 50 normalized instances, min slack {worst(reps):.3e}")
    assert ok


# ---------------------------------------------------------------- 7


def test_criterion_07_collision_chain(normalized_instances, capsys):
    reps = []
    for inst in normalized_instances:
        reps += lhl.check_collision_chain(inst)
    ok = worst(reps) >= -1e-9
    emit(capsys, 7, "Q^PA <= 2^m d2; H_min <= H2; Renyi ordering up to H_max(K|E)", ok,
         f"{len(reps)} reports on 50 instances, min slack {worst(reps):.3e}")
    assert ok


# ---------------------------------------------------------------- 8


def test_criterion_08_entropy_engine(capsys):
    fixed = lhl.check_fixed_oracles()
    engine = []
    for i, s in enumerate(seeds("engine", 20)):
        engine += lhl.check_entropy_engine(random_instance(s, InstanceConfig(1 + i % 3, trace=1.0 if i % 2 else 0.85)))
    ok = check_all(fixed) and check_all(engine)
    parts = []
    for name in dict.fromkeys(r.check for r in fixed + engine):
        grp = [r for r in fixed + engine if r.check == name]
        if grp[0].kind == "equality":
            parts.append(f"{name} max err {spread(grp):.1e}")
        else:
            parts.append(f"{name} min slack {worst(grp):.1e}")
    detail = ", ".join(parts)
    emit(capsys, 8, "entropy engine against closed forms and alternative paths", ok, detail)
    assert ok


# ---------------------------------------------------------------- 9


def test_criterion_09_family_certification(capsys):
    reps, count = [], 0
    for n in range(2, 5):
        for m in range(1, n):
            for fam in (family_all_linear(n, m), family_toeplitz(n, m)):
                reps.append(lhl.check_universal_exact(fam))
                reps += lhl.check_family_certification(fam)
                count += 1
    rng = np.random.default_rng(derive_seed(MASTER, "families", 0))
    for _ in range(20):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n))
        fam = HashFamily.uniform([random_surjective(n, m, rng) for _ in range(int(rng.integers(1, 5)))])
        reps += lhl.check_family_certification(fam)
        count += 1
    assert all(isinstance(r.lhs, Fraction) or r.kind.startswith("exact") for r in reps)
    assert universal_lower_bound(4, 2) == Fraction(12, 15)
    ok = all(r.passed for r in reps)
    emit(capsys, 9, "exact delta = 1 for all-linear and Toeplitz (n <= 4); lower bound; dual conversion", ok,
         f"{count} families, {len(reps)} exact reports")
    assert ok


# ---------------------------------------------------------------- 10


def test_criterion_10_qkd_conversion(capsys):
    reps = []
    for s in seeds("qkd", 10):
        inst = random_instance(s, InstanceConfig(3, 1))
        h = lhl.hmin_ze(inst).value
        reps += lhl.qkd_conversion_demo(inst, family_toeplitz(3, 1), max(0.0, math.floor(h * 1e6) / 1e6))
    bounds = [r for r in reps if r.check in ("qkd-lhl", "qkd-pec", "qkd-reverse", "qkd-ucr")]
    equal = [r for r in reps if r.check == "qkd-ucr-equals-lhl"]
    ok = worst(bounds) >= -1e-9 and spread(equal) <= 1e-9
    emit(capsys, 10, "four QKD bounds above measured E_F d1; UCR bound equals LHL bound", ok,
         f"min slack {worst(bounds):.3e}; max |ucr - lhl| {spread(equal):.1e}")
    assert ok


# ---------------------------------------------------------------- 11


def test_criterion_11_deterministic_reports(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        res = subprocess.run(
            [sys.executable, "-m", "oneshot_equiv", "verify", "all", "--seed", "42", "--out", str(path)],
            capture_output=True,
            text=True,
        )
        assert res.returncode == 0, res.stderr
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1]
    emit(capsys, 11, "verify all --seed 42 twice gives byte-identical JSON", ok, f"{len(outs[0])} bytes")
    assert ok
