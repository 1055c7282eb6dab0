import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oneshot_equiv import lhl
from oneshot_equiv.algorithms import AlgorithmInstance, InstanceConfig, leaked_cq_state, product_cq_state, random_instance
from oneshot_equiv.gf2 import HashFamily, LinearHash, family_all_linear, family_toeplitz
from oneshot_equiv.lhl import BoundFunction, VerificationReport
from oneshot_equiv.quantum import PureState, RegisterLayout, haar_pure

seeds = st.integers(0, 2**32 - 1)
F10 = LinearHash.from_rows(["10"])
SINGLE11 = HashFamily.uniform([LinearHash.from_rows(["11"])], "single[11]")


def all_pass(reps):
    bad = [r.to_json() for r in reps if not r.passed]
    assert not bad, bad


# ---------------------------------------------------------------- reports


def test_inequality_report():
    assert VerificationReport("x", "inequality", 1.0, 1.0 - 5e-10).passed
    assert not VerificationReport("x", "inequality", 1.0, 0.99).passed
    assert VerificationReport("x", "inequality", 1.0, 0.99, tol=0.02).passed


def test_equality_report():
    assert VerificationReport("x", "equality", 0.5, 0.5 + 5e-7).passed
    assert not VerificationReport("x", "equality", 0.5, 0.6).passed


def test_exact_reports_use_fractions():
    assert VerificationReport("x", "exact-equality", Fraction(1, 3), Fraction(1, 3)).passed
    assert not VerificationReport("x", "exact-inequality", Fraction(2, 3), Fraction(1, 3)).passed
    doc = VerificationReport("x", "exact-inequality", Fraction(1, 3), Fraction(1, 2)).to_json()
    assert doc["lhs"] == "1/3" and doc["pass"] is True


def test_report_json_excludes_runtime():
    rep = VerificationReport("x", "inequality", 0.1, 0.2, {"seed": 1}, runtime=3.5)
    doc = rep.to_json()
    assert "runtime" not in doc
    assert json.loads(json.dumps(doc)) == doc


# ---------------------------------------------------------------- bound functions


def test_bound_function_values():
    assert BoundFunction("universal2", 2)(1.0) == 2.0
    assert BoundFunction("almost_universal2", 2, Fraction(3, 2), 0.5)(2.0) == 0.25 + 1.0
    assert BoundFunction("dual_universal2", 1, Fraction(2))(1.0) == 2.0


def test_bound_for_certifies():
    assert lhl.bound_for("universal2", family_toeplitz(3, 1), 1.0).delta == 1
    assert lhl.bound_for("almost_universal2", SINGLE11, 1.0).delta == 2
    with pytest.raises(ValueError):
        lhl.bound_for("universal2", SINGLE11, 1.0)
    with pytest.raises(ValueError):
        lhl.bound_for("dual_universal2", family_toeplitz(3, 1), 1.0)
    with pytest.raises(ValueError):
        lhl.bound_for("nonsense", SINGLE11, 1.0)


# ---------------------------------------------------------------- hashing lemmas


def test_lhl_on_product_state():
    inst = AlgorithmInstance.from_cq_state(product_cq_state(2), F10)
    rep = lhl.check_lhl_universal2(inst, family_toeplitz(2, 1))
    assert rep.passed
    # Toeplitz(2,1) has one zero member out of four: E_F Q = 1/4 (1 - 1/2)
    assert len(family_toeplitz(2, 1)) == 4
    assert math.isclose(rep.lhs, 1 / 8, abs_tol=1e-7)
    assert math.isclose(rep.rhs, 2.0 ** (1 - 2), abs_tol=1e-7)


@settings(max_examples=6)
@given(seeds, st.sampled_from([2, 3]))
def test_hashing_lemmas_random(seed, n):
    inst = random_instance(seed, InstanceConfig(n, 1, trace=0.9))
    fam = family_toeplitz(n, 1)
    all_pass([lhl.check_lhl_universal2(inst, fam), lhl.check_lhl_almost_universal2(inst, fam), lhl.check_lhl_dual_universal2(inst, fam)])


def test_almost_universal_reduces_to_universal():
    inst = random_instance(3, InstanceConfig(3, 1))
    fam = family_all_linear(3, 1)
    a = lhl.check_lhl_universal2(inst, fam)
    b = lhl.check_lhl_almost_universal2(inst, fam)
    assert math.isclose(a.rhs, b.rhs, rel_tol=1e-12) and a.lhs == b.lhs


def test_delta_two_bound_is_vacuous_but_holds():
    inst = AlgorithmInstance.from_cq_state(leaked_cq_state(2), F10)
    rep = lhl.check_lhl_almost_universal2(inst, SINGLE11)
    assert rep.passed
    assert "vacuous: rhs >= 1" in rep.notes
    assert rep.instance["delta"] == "2"


# ---------------------------------------------------------------- coding theorems


@pytest.mark.parametrize("which", ["Lemma6", "Lemma8", "Lemma10"])
def test_coding_theorems(which):
    inst = random_instance(21, InstanceConfig(3, 1))
    rep = lhl.check_coding_theorems(inst, family_toeplitz(3, 1), which)
    assert rep.passed, rep.to_json()
    assert rep.check == f"coding-{which}"


def test_coding_rejects_unknown_lemma():
    inst = random_instance(21, InstanceConfig(2, 1))
    with pytest.raises(ValueError):
        lhl.check_coding_theorems(inst, family_toeplitz(2, 1), "Lemma99")


def test_four_root_and_transfer():
    inst = random_instance(17, InstanceConfig(3, 1))
    fam = family_toeplitz(3, 1)
    four = lhl.check_four_root(inst, fam)
    all_pass(four)
    reps = lhl.check_theorem2_transfer(inst, fam)
    all_pass(reps)
    names = {r.check for r in reps}
    assert {"pa-ec-average-equality", "uncertainty-equality"} <= names
    assert sum(name.startswith("transfer-") for name in names) == 6


# ---------------------------------------------------------------- uncertainty relation


@settings(max_examples=8)
@given(seeds, st.sampled_from([1, 2]))
def test_uncertainty_equality_on_standard_form(seed, n):
    assert lhl.check_uncertainty(random_instance(seed, InstanceConfig(n))).passed


@settings(max_examples=8)
@given(seeds)
def test_uncertainty_inequality_on_pure_states(seed):
    rng = np.random.default_rng(seed)
    psi = PureState(RegisterLayout.of(("A", 4), ("B", 4), ("E", 2)), haar_pure([4, 4, 2], rng))
    assert lhl.check_uncertainty_general(psi, 2, seed).passed


# ---------------------------------------------------------------- chains and distances


def test_collision_chain_and_pipeline():
    inst = random_instance(9, InstanceConfig(3, 1))
    all_pass(lhl.check_collision_chain(inst))
    all_pass(lhl.check_theorem4_pipeline(inst, family_toeplitz(3, 1)))


def test_pipeline_requires_normalized_state():
    inst = random_instance(9, InstanceConfig(2, 1, trace=0.5))
    with pytest.raises(ValueError):
        lhl.check_theorem4_pipeline(inst, family_toeplitz(2, 1))


@settings(max_examples=6)
@given(seeds)
def test_distance_bounds(seed):
    all_pass(lhl.check_distance_bounds(random_instance(seed, InstanceConfig(2))))


def test_guessing_from_qpa_with_bijective_hash():
    inst = random_instance(2, InstanceConfig(2, 2))
    assert lhl.check_guessing_from_qpa(inst).passed


# ---------------------------------------------------------------- engine and families


def test_entropy_engine_and_oracles():
    all_pass(lhl.check_entropy_engine(random_instance(4, InstanceConfig(2, 1))))
    oracles = lhl.check_fixed_oracles()
    all_pass(oracles)
    assert len(oracles) == 4


def test_family_certification_reports():
    all_pass(lhl.check_family_certification(family_toeplitz(3, 1)))
    assert lhl.check_universal_exact(family_all_linear(3, 2)).passed
    assert not lhl.check_universal_exact(SINGLE11).passed


def test_index_equality_report():
    rep = lhl.check_index_equality(random_instance(6, InstanceConfig(2, trace=0.75)))
    assert rep.passed and rep.kind == "equality"


# ---------------------------------------------------------------- QKD conversion


def test_qkd_bounds_relations():
    inst = random_instance(12, InstanceConfig(3, 1))
    fam = family_toeplitz(3, 1)
    h = lhl.hmin_ze(inst).value
    b = lhl.qkd_bounds(inst, fam, math.floor(h * 1e6) / 1e6)
    assert math.isclose(b.ucr, b.lhl, rel_tol=1e-9)
    assert b.lhl <= b.pec <= b.reverse
    assert b.measured_d1 <= b.ucr_measured + 1e-9
    all_pass(lhl.qkd_conversion_demo(inst, fam, math.floor(h * 1e6) / 1e6))


def test_qkd_rejects_threshold_above_measured():
    inst = random_instance(12, InstanceConfig(2, 1))
    h = lhl.hmin_ze(inst).value
    with pytest.raises(ValueError):
        lhl.qkd_bounds(inst, family_toeplitz(2, 1), h + 0.1)


def test_qkd_rejects_smoothing():
    inst = random_instance(12, InstanceConfig(2, 1))
    with pytest.raises(ValueError):
        lhl.qkd_conversion_demo(inst, family_toeplitz(2, 1), 0.0, eps=0.01)
