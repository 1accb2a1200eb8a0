"""Operator-norm machinery and the norm-bound verifiers."""

import numpy as np
import pytest

from fiokit.bounds import (
    SupportPair,
    mapped_support_separation,
    operator_norm,
    schur_row_col,
    verify_antiwick_bound,
    verify_corfull_bound,
    verify_crude_bounds,
    weighted_norm,
)
from fiokit.fio import DiscretizationPlan, FioSpec, SymbolSpec, operator_matrix
from fiokit.matrixcore import ComplexSymMatrix
from fiokit.symplectic import IdentityMap

I1 = ComplexSymMatrix(np.eye(1))


# ------------------------------------------------------------- power method


def test_operator_norm_identity():
    est = operator_norm(np.eye(7))
    assert est.converged
    assert est.value == pytest.approx(1.0, abs=1e-12)


def test_operator_norm_diagonal():
    K = np.diag([0.3, -2.5, 1.1, 0.0])
    est = operator_norm(K)
    assert est.value == pytest.approx(2.5, rel=1e-9)


def test_operator_norm_vs_svd_oracle():
    rng = np.random.default_rng(7)
    K = rng.standard_normal((40, 25)) + 1j * rng.standard_normal((40, 25))
    est = operator_norm(K)
    assert est.value == pytest.approx(np.linalg.svd(K, compute_uv=False)[0], rel=1e-8)


def test_operator_norm_rejects_tiny_iteration_budget():
    with pytest.raises(ValueError):
        operator_norm(np.eye(3), iterations=5)


def test_weights_enter_as_square_roots():
    K = np.array([[2.0, 0.0], [0.0, 1.0]])
    assert weighted_norm(K, 0.25, 4.0) == pytest.approx(2.0, rel=1e-9)


def test_norm_of_adjoint_matches():
    rng = np.random.default_rng(8)
    K = rng.standard_normal((15, 20)) + 1j * rng.standard_normal((15, 20))
    a = operator_norm(K).value
    b = operator_norm(K.conj().T).value
    assert abs(a - b) < 1e-8 * a


def test_norm_of_gram_is_square():
    rng = np.random.default_rng(9)
    K = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    a = operator_norm(K).value
    g = operator_norm(K.conj().T @ K).value
    assert g == pytest.approx(a * a, rel=1e-6)


# ------------------------------------------------------------------- schur


def test_schur_bound_rank_one():
    # K = a b^T: norm is ||a||_2 ||b||_2, dominated by sqrt(row_sup col_sup)
    rng = np.random.default_rng(10)
    a = np.abs(rng.standard_normal(9)) + 0.1
    b = np.abs(rng.standard_normal(14)) + 0.1
    K = np.outer(a, b)
    wx, wy = 0.3, 0.7
    measured = weighted_norm(K, wx, wy)
    assert measured == pytest.approx(
        np.sqrt(wx * wy) * np.linalg.norm(a) * np.linalg.norm(b), rel=1e-9)
    assert measured <= schur_row_col(K, wx, wy)[2] * (1 + 1e-12)


def test_schur_bound_tight_for_constant_matrix():
    K = np.ones((6, 6))
    assert schur_row_col(K, 1.0, 1.0)[2] == pytest.approx(6.0, rel=1e-12)
    assert weighted_norm(K, 1.0, 1.0) == pytest.approx(6.0, rel=1e-9)


# -------------------------------------------------------------- separation


def test_support_pair_separation_values():
    p = SupportPair(np.array([0.0, 0.0]), np.array([1.0, 1.0]),
                    np.array([4.0, 0.0]), np.array([5.0, 1.0]))
    assert p.separation == pytest.approx(3.0)
    q = SupportPair(np.array([0.0, 0.0]), np.array([1.0, 1.0]),
                    np.array([4.0, 5.0]), np.array([5.0, 6.0]))
    assert q.separation == pytest.approx(5.0)
    r = SupportPair(np.array([0.0, 0.0]), np.array([2.0, 2.0]),
                    np.array([1.0, 1.0]), np.array([3.0, 3.0]))
    assert r.separation == 0.0


def test_mapped_separation_identity_map():
    sep = mapped_support_separation(
        IdentityMap(1), I1,
        np.array([0.0, 0.0]), np.array([1.0, 1.0]),
        np.array([4.0, 0.0]), np.array([5.0, 1.0]))
    assert sep == pytest.approx(3.0, rel=1e-6)


# ------------------------------------------------------------ norm bounds


def _plan(spec):
    return DiscretizationPlan.auto(spec, support_radius=2.0, p_band=(-1.0, 1.0))


def test_antiwick_bound_unit_symbol():
    spec = FioSpec(IdentityMap(1), SymbolSpec.constant(1.0), I1, I1, 1.0)
    rep = verify_antiwick_bound(spec, _plan(spec))
    assert rep.passed
    assert rep.bound_value == 1.0
    assert rep.measured_norm == pytest.approx(1.0, abs=1e-3)


def test_corfull_bound_and_equality_case():
    spec = FioSpec(IdentityMap(1), SymbolSpec.constant(1.0), I1, I1, 1.0)
    rep = verify_corfull_bound(spec, _plan(spec))
    assert rep.passed
    assert rep.bound_value == pytest.approx(2**-0.5)
    # identity map with unit symbol saturates the bound
    assert abs(rep.measured_norm - rep.bound_value) < 1e-2 * rep.bound_value


def test_norm_scales_linearly_in_symbol():
    spec1 = FioSpec(IdentityMap(1), SymbolSpec.gaussian_qp(width=1.5), I1, I1, 1.0)
    spec3 = FioSpec(IdentityMap(1), SymbolSpec.gaussian_qp(width=1.5, amp=3.0),
                    I1, I1, 1.0)
    plan = _plan(spec1)
    n1 = weighted_norm(operator_matrix(spec1, plan), plan.xgrid.weight,
                       plan.ygrid.weight)
    n3 = weighted_norm(operator_matrix(spec3, plan), plan.xgrid.weight,
                       plan.ygrid.weight)
    assert n3 == pytest.approx(3.0 * n1, rel=1e-9)


def _decaying_symbol():
    # <q>^{-2} <p>^{-2}, bounded with integrable tails
    return SymbolSpec(
        evaluator=lambda x, y, q, p: (
            (1 + np.sum(q**2, axis=-1)) ** -1.0 * (1 + np.sum(p**2, axis=-1)) ** -1.0
        ),
        sup_norm=1.0,
        name="decaying",
    )


def test_crude_bound_scaling_in_eps():
    def make(eps):
        return FioSpec(IdentityMap(1), _decaying_symbol(), I1, I1, eps)

    rep = verify_crude_bounds(
        make, [1.0, 0.5, 0.25], _plan, seminorm_value=1.0, ratio_cap=3.0)
    assert rep.passed
    assert rep.bound_name == "crude1"
    assert len(rep.metadata["ratios"]) == 3
