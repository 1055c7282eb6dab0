import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneshot_equiv.sdp import (
    LmiBlock,
    MatrixVar,
    Placement,
    SdpError,
    SdpProblem,
    sdp_solve,
    trace_equality,
)

seeds = st.integers(0, 2**32 - 1)


def random_herm(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (A + A.conj().T) / 2


def lambda_max_problem(A):
    """min t subject to t I - A >= 0, with t a 1x1 variable placed on the diagonal."""
    d = len(A)
    t = MatrixVar("t", 1, 1)
    blk = LmiBlock(d, -A, [Placement(0, i, i) for i in range(d)])
    start = [np.array([[np.linalg.norm(A, 2) + 1.0]])]
    return SdpProblem([t], [blk], {0: np.eye(1)}, start, "min")


def test_basis_roundtrip(rng):
    for var in (MatrixVar("h", 3, 3), MatrixVar("r", 2, 3, hermitian=False)):
        if var.hermitian:
            X = random_herm(rng, 3)
        else:
            X = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        assert np.allclose(var.matrix(var.params_of(X)), X)


def test_non_square_hermitian_rejected():
    with pytest.raises(ValueError):
        MatrixVar("x", 2, 3)


@given(seeds, st.integers(2, 5))
def test_lambda_max(seed, d):
    A = random_herm(np.random.default_rng(seed), d)
    sol = sdp_solve(lambda_max_problem(A))
    assert math.isclose(sol.value, np.linalg.eigvalsh(A)[-1], abs_tol=1e-7)
    assert abs(sol.value - sol.dual_value) <= 1e-8 * max(1, abs(sol.value))


@given(seeds, st.integers(2, 4))
def test_density_operator_maximizes_overlap(seed, d):
    # max Re Tr(A X) over density operators equals the largest eigenvalue
    A = random_herm(np.random.default_rng(seed), d)
    X = MatrixVar("X", d, d)
    eq, rhs = trace_equality([X], [0], 1.0)
    p = SdpProblem([X], [LmiBlock(d, np.zeros((d, d)), [Placement(0, 0, 0)])], {0: A}, [np.eye(d) / d], "max", eq, rhs)
    sol = sdp_solve(p)
    assert math.isclose(sol.value, np.linalg.eigvalsh(A)[-1], abs_tol=1e-7)
    assert math.isclose(np.trace(sol.variables[0]).real, 1.0, abs_tol=1e-9)


@given(seeds)
def test_trace_norm_via_rectangular_variable(seed):
    # max Re Tr(W^dagger Y) subject to [[I, Y], [Y^dagger, I]] >= 0 is the nuclear norm of W
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    Y = MatrixVar("Y", 2, 3, hermitian=False)
    blk = LmiBlock(5, np.eye(5), [Placement(0, 0, 2), Placement(0, 2, 0, adjoint=True)])
    p = SdpProblem([Y], [blk], {0: W}, [np.zeros((2, 3))], "max")
    sol = sdp_solve(p)
    assert math.isclose(sol.value, np.linalg.svd(W, compute_uv=False).sum(), rel_tol=1e-7)


def test_min_trace_dominating_operator(rng):
    # min Tr sigma with sigma >= rho is Tr rho, attained at sigma = rho
    rho = random_herm(rng, 3)
    rho = rho @ rho
    S = MatrixVar("S", 3, 3)
    blk = LmiBlock(3, -rho, [Placement(0, 0, 0)])
    start = [rho + np.eye(3)]
    sol = sdp_solve(SdpProblem([S], [blk], {0: np.eye(3)}, start, "min"))
    assert math.isclose(sol.value, np.trace(rho).real, rel_tol=1e-8)


def test_infeasible_start_raises():
    A = np.diag([1.0, 2.0])
    p = lambda_max_problem(A)
    p.start = [np.array([[0.5]])]
    with pytest.raises(SdpError):
        sdp_solve(p)


def test_start_violating_equality_raises():
    X = MatrixVar("X", 2, 2)
    eq, rhs = trace_equality([X], [0], 1.0)
    p = SdpProblem([X], [LmiBlock(2, np.zeros((2, 2)), [Placement(0, 0, 0)])], {0: np.eye(2)}, [np.eye(2)], "max", eq, rhs)
    with pytest.raises(SdpError):
        sdp_solve(p)


def test_placement_outside_block_raises():
    X = MatrixVar("X", 2, 2)
    p = SdpProblem([X], [LmiBlock(2, np.zeros((2, 2)), [Placement(0, 1, 1)])], {0: np.eye(2)}, [np.eye(2)], "min")
    with pytest.raises(ValueError):
        sdp_solve(p)
