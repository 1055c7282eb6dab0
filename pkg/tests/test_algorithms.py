import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oneshot_equiv import algorithms as alg
from oneshot_equiv.algorithms import AlgorithmInstance, InstanceConfig, random_instance
from oneshot_equiv.gf2 import HashFamily, LinearHash, family_all_linear, family_toeplitz, surjective_part
from oneshot_equiv.quantum import QOperator

seeds = st.integers(0, 2**32 - 1)

F10 = LinearHash.from_rows(["10"])
IDENT1 = LinearHash.from_rows(["1"])


def scaled(rho: QOperator, c: float) -> QOperator:
    return QOperator(rho.layout, c * rho.matrix)


# ---------------------------------------------------------------- instances


def test_instance_json_roundtrip():
    inst = random_instance(5, InstanceConfig(2, 1))
    back = AlgorithmInstance.from_json(json.loads(json.dumps(inst.to_json())))
    assert back.to_json() == inst.to_json()


def test_instance_is_deterministic():
    a = random_instance(11, InstanceConfig(3))
    b = random_instance(11, InstanceConfig(3))
    assert a.to_json() == b.to_json()


def test_instance_rejects_wrong_dual():
    inst = random_instance(1, InstanceConfig(2, 1))
    with pytest.raises(ValueError):
        AlgorithmInstance(inst.standard_form, inst.rho_ZAE, inst.rho_XAB, inst.f, inst.f, inst.seed)


def test_instance_config_validation():
    with pytest.raises(ValueError):
        InstanceConfig(0)
    with pytest.raises(ValueError):
        InstanceConfig(2, 3)
    with pytest.raises(ValueError):
        InstanceConfig(2, trace=1.5)


# ---------------------------------------------------------------- privacy amplification index


@pytest.mark.parametrize("n", [1, 2])
def test_product_state_has_zero_qpa(n):
    f = LinearHash.from_rows(["1" * n])
    assert abs(alg.q_pa_state(alg.product_cq_state(n), f)) < 1e-7


def test_copied_key_bit():
    # E holds Z exactly, so H_max(f(Z)|E) = 0 and Q = 1 - 2^-m
    assert math.isclose(alg.q_pa_state(alg.leaked_cq_state(2), F10), 0.5, abs_tol=1e-7)


@settings(max_examples=10)
@given(seeds, st.floats(0.2, 1.0))
def test_qpa_scales_linearly(seed, c):
    inst = random_instance(seed, InstanceConfig(2, 1))
    base = alg.q_pa_state(inst.rho_ZAE, inst.f)
    assert math.isclose(alg.q_pa_state(scaled(inst.rho_ZAE, c), inst.f), c * base, abs_tol=1e-7)


def test_pa_pipeline_matches_hashed_state():
    inst = random_instance(3, InstanceConfig(3, 2))
    via_pipeline = alg.pa_pipeline(inst.standard_form, inst.f)
    assert np.allclose(via_pipeline.matrix, inst.rho_KE.matrix, atol=1e-12)


# ---------------------------------------------------------------- error correction / data compression index


def test_product_state_decodes_perfectly():
    # E is pure and independent, so B purifies A and recovers X exactly
    inst = AlgorithmInstance.from_cq_state(alg.product_cq_state(2), F10)
    assert abs(alg.q_ec_dc(inst)) < 1e-7


@pytest.mark.parametrize("m", [1, 2])
def test_copied_state_leaves_m_bits_unknown(m):
    f = F10 if m == 1 else LinearHash.from_rows(["10", "01"])
    inst = AlgorithmInstance.from_cq_state(alg.leaked_cq_state(2), f)
    assert math.isclose(alg.q_ec_dc(inst), 1 - 2.0**-m, abs_tol=1e-7)


@settings(max_examples=10)
@given(seeds)
def test_ec_pipeline_matches_syndrome_state(seed):
    inst = random_instance(seed, InstanceConfig(2))
    success = alg.ec_pipeline(inst.standard_form, inst.g, inst.n)
    assert math.isclose(inst.trace - success, alg.q_ec_dc(inst), abs_tol=1e-7)


@settings(max_examples=10)
@given(seeds)
def test_pgm_is_suboptimal(seed):
    inst = random_instance(seed, InstanceConfig(2, trace=0.8))
    assert alg.decode_pgm(inst) <= inst.trace - alg.q_ec_dc(inst) + 1e-8


def test_pgm_optimal_for_orthogonal_side_states():
    inst = AlgorithmInstance.from_cq_state(alg.product_cq_state(2), F10)
    assert math.isclose(alg.decode_pgm(inst), 1.0, abs_tol=1e-9)


def test_hmin_route_agrees_with_pguess():
    inst = random_instance(8, InstanceConfig(2, 1))
    a = alg.q_ec_state(inst.rho_XAB, inst.g, "pguess")
    b = alg.q_ec_state(inst.rho_XAB, inst.g, "hmin")
    assert math.isclose(a, b, abs_tol=1e-7)


# ---------------------------------------------------------------- equivalence


def test_equivalence_on_product_state():
    rep = alg.verify_theorem1(AlgorithmInstance.from_cq_state(alg.product_cq_state(2), F10))
    assert rep.passed
    assert max(abs(v) for v in rep.values()) < 1e-6


@pytest.mark.parametrize("trace", [1.0, 0.6])
def test_equivalence_with_bijective_hash(trace):
    inst = AlgorithmInstance.from_cq_state(alg.leaked_cq_state(1, trace), IDENT1)
    assert inst.g is None
    rep = alg.verify_theorem1(inst)
    assert rep.passed
    # the copied key bit is fully known to E: Q = Tr rho (1 - 2^-m)
    for v in rep.values():
        assert math.isclose(v, trace / 2, abs_tol=1e-6)


@settings(max_examples=8)
@given(seeds, st.sampled_from([1, 2, 3]), st.sampled_from([1.0, 0.7]))
def test_equivalence_random(seed, n, trace):
    rep = alg.verify_theorem1(random_instance(seed, InstanceConfig(n, trace=trace)))
    assert rep.max_spread <= 1e-6, rep.to_json()


# ---------------------------------------------------------------- family averages


def test_singleton_family_average():
    inst = random_instance(2, InstanceConfig(2, 1))
    fam = HashFamily.uniform([inst.f])
    assert math.isclose(alg.expect_over_family(fam, "q_pa", inst), alg.q_pa(inst), abs_tol=1e-12)


def test_all_linear_average_on_product_state():
    # the three nonzero maps give 0; the zero map gives 1 - 1/2
    inst = AlgorithmInstance.from_cq_state(alg.product_cq_state(2), F10)
    assert math.isclose(alg.expect_over_family(family_all_linear(2, 1), "q_pa", inst), 0.125, abs_tol=1e-7)


def test_member_wise_equivalence_on_toeplitz():
    inst = random_instance(4, InstanceConfig(3, 1))
    for f in surjective_part(family_toeplitz(3, 1)).members:
        other = inst.with_hash(f)
        assert math.isclose(alg.q_pa(other), alg.q_ec_dc(other), abs_tol=1e-6)


def test_family_size_mismatch():
    inst = random_instance(2, InstanceConfig(2, 1))
    with pytest.raises(ValueError):
        alg.expect_over_family(family_toeplitz(3, 1), "q_pa", inst)


# ---------------------------------------------------------------- distances


def test_product_state_is_ideal():
    rho = alg.product_cq_state(2)
    assert alg.d1_state(rho, F10) < 1e-12
    assert abs(alg.d2_state(rho, F10)) < 1e-12


def test_copied_bit_distance():
    assert math.isclose(alg.d1_state(alg.leaked_cq_state(1), IDENT1), 1.0, abs_tol=1e-12)


@settings(max_examples=10)
@given(seeds, st.sampled_from([2, 3]))
def test_d1_prime_sandwich(seed, n):
    inst = random_instance(seed, InstanceConfig(n))
    d, dp = alg.d1(inst), alg.d1_prime(inst)
    assert dp <= d + 1e-8
    assert d <= 2 * dp + 1e-8
