"""Acceptance gate: thirteen end-to-end quantitative criteria.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see them
live; they also appear in captured output). Tolerances are pinned here and
must not be loosened to make a criterion pass.
"""

import time

import numpy as np
import pytest

from fiokit import bounds as bnd
from fiokit.experiments import (
    run_adjoint_check,
    run_fbi_isometry,
    run_full_theorem,
    run_identity_op,
    run_matrix_sqrt,
    run_reconstruct,
    run_separation_decay,
    run_symplectic_check,
)
from fiokit.fio import DiscretizationPlan, FioSpec, SymbolSpec, operator_matrix
from fiokit.matrixcore import (
    ComplexSymMatrix,
    random_instances,
    symplectic_form,
    w_identity_residual,
    w_matrix,
)
from fiokit.symplectic import (
    IdentityMap,
    LinearMap,
    free_particle,
    hamiltonian_flow,
    harmonic_oscillator,
)

EPS_SWEEP = [1.0, 0.5, 0.25, 0.1]
I1 = ComplexSymMatrix(np.eye(1))


def _verdict(num, name, ok, detail):
    line = f"criterion {num:2d} [{name}]: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _suite_worst(result):
    return max(a["measured"] for a in result["assertions"])


def _maps():
    return {
        "identity": IdentityMap(1),
        "shear": LinearMap(np.array([[1.0, 0.4], [0.3, 1.12]])),
        "free": hamiltonian_flow(free_particle(1), 0.5, d=1),
        "harmonic": hamiltonian_flow(harmonic_oscillator(1, 1.0), 0.7, d=1),
    }


def test_criterion_01_transform_isometry():
    t0 = time.perf_counter()
    res = run_fbi_isometry({"experiment": "fbi-isometry", "d": 1, "eps": EPS_SWEEP})
    dt = time.perf_counter() - t0
    worst = _suite_worst(res)
    ok = all(a["passed"] for a in res["assertions"]) and worst <= 1e-5 and dt <= 60
    _verdict(1, "transform isometry", ok,
             f"worst residual {worst:.2e} over 40 cases, {dt:.1f}s")


def test_criterion_02_reconstruction():
    t0 = time.perf_counter()
    res = run_reconstruct({"experiment": "reconstruct", "d": 1, "eps": EPS_SWEEP})
    dt = time.perf_counter() - t0
    worst = _suite_worst(res)
    ok = all(a["passed"] for a in res["assertions"]) and worst <= 1e-5 and dt <= 60
    _verdict(2, "reconstruction", ok,
             f"worst residual {worst:.2e} over 40 cases, {dt:.1f}s")


def test_criterion_03_identity_operator_value():
    t0 = time.perf_counter()
    res = run_identity_op({"experiment": "identity-op", "d": 1, "eps": [1.0]})
    dt = time.perf_counter() - t0
    worst = _suite_worst(res)
    ok = all(a["passed"] for a in res["assertions"]) and worst <= 1e-5 and dt <= 30
    _verdict(3, "identity operator value", ok,
             f"worst residual {worst:.2e} over 4 width pairs, {dt:.1f}s")


def _antiwick_combos():
    maps = _maps()
    sym = {
        "one": SymbolSpec.constant(1.0),
        "half": SymbolSpec.constant(0.5),
        "gauss": SymbolSpec.gaussian_qp(width=1.5),
        "gauss2": SymbolSpec.gaussian_qp(center=(0.3, -0.2), width=1.0, amp=2.0),
        "bump": SymbolSpec.bump_qp((0.0, 0.0), 1.2),
    }
    names = [
        ("identity", "one"), ("identity", "gauss"), ("identity", "bump"),
        ("shear", "one"), ("shear", "gauss2"),
        ("free", "gauss"), ("free", "bump"),
        ("harmonic", "half"), ("harmonic", "gauss"), ("harmonic", "bump"),
    ]
    for mname, sname in names:
        yield f"{mname}/{sname}", FioSpec(maps[mname], sym[sname], I1, I1, 1.0)


def _small_plan(spec):
    return DiscretizationPlan.auto(spec, support_radius=2.0, p_band=(-1.0, 1.0))


def test_criterion_04_antiwick_sup_bound():
    t0 = time.perf_counter()
    worst_excess = -np.inf
    for label, spec in _antiwick_combos():
        rep = bnd.verify_antiwick_bound(spec, _small_plan(spec))
        excess = rep.measured_norm / rep.bound_value - 1.0
        worst_excess = max(worst_excess, excess)
        assert rep.passed, f"{label}: {rep.measured_norm} > {rep.bound_value}"
    dt = time.perf_counter() - t0
    ok = worst_excess <= 5e-3 and dt <= 300
    _verdict(4, "sup-norm bound, phase-space quantization", ok,
             f"worst excess {worst_excess:.2e} over 10 combos, {dt:.1f}s")


def test_criterion_05_sharp_norm_bound_and_equality():
    cases = [
        FioSpec(IdentityMap(1), SymbolSpec.constant(1.0), I1, I1, 1.0),
        FioSpec(_maps()["harmonic"], SymbolSpec.gaussian_qp(width=1.5), I1, I1, 1.0),
        FioSpec(IdentityMap(1), SymbolSpec.constant(1.0),
                ComplexSymMatrix(np.array([[1.5 + 0.4j]])), I1, 1.0),
    ]
    worst_excess = -np.inf
    for spec in cases:
        rep = bnd.verify_corfull_bound(spec, _small_plan(spec))
        worst_excess = max(worst_excess, rep.measured_norm / rep.bound_value - 1.0)
        assert rep.passed
    # unit symbol, identity map: the bound is attained
    eq = bnd.verify_corfull_bound(cases[0], _small_plan(cases[0]))
    gap = abs(eq.measured_norm - eq.bound_value) / eq.bound_value
    ok = worst_excess <= 5e-3 and gap <= 1e-2
    _verdict(5, "sharp norm bound", ok,
             f"worst excess {worst_excess:.2e}, equality gap {gap:.2e}")


def test_criterion_06_eps_uniformity():
    t0 = time.perf_counter()
    res = run_full_theorem({"experiment": "full-theorem", "d": 1, "eps": EPS_SWEEP})
    dt = time.perf_counter() - t0
    ratio = res["assertions"][0]["measured"]
    ok = all(a["passed"] for a in res["assertions"]) and ratio <= 2.0 and dt <= 600
    _verdict(6, "eps-uniform norm, (x,y)-dependent symbol", ok,
             f"max/base norm ratio {ratio:.3f} over eps {EPS_SWEEP}, {dt:.1f}s")


def test_criterion_07_separation_decay_exponent():
    res = run_separation_decay(
        {"experiment": "separation-decay", "d": 1, "eps": [1.0, 0.5]})
    rels = {a["name"]: a["measured"] for a in res["assertions"]}
    worst = max(rels.values())
    ok = all(a["passed"] for a in res["assertions"]) and worst <= 0.25
    _verdict(7, "disjoint-support decay exponent", ok,
             f"worst slope mismatch {worst:.1%} vs -1/(4 eps) at two eps")


def test_criterion_08_matrix_square_root():
    res = run_matrix_sqrt({"experiment": "matrix-sqrt", "d": 2, "count": 500})
    by = {a["name"]: a for a in res["assertions"]}
    ok = (all(a["passed"] for a in res["assertions"])
          and by["sqrt_residual"]["measured"] <= 1e-12)
    gmax = max(v["measured"] for k, v in by.items() if k.startswith("gaussian"))
    _verdict(8, "principal matrix square root", ok,
             f"worst residual {by['sqrt_residual']['measured']:.2e} on 500 "
             f"instances, gaussian oracle err {gmax:.2e}")


def _random_symplectic(rng, d=1):
    F = np.eye(2 * d)
    J = symplectic_form(d)
    for _ in range(4):
        A = rng.standard_normal((d, d)) * 0.7
        S = np.eye(2 * d)
        S[:d, d:] = A + A.T
        F = F @ S @ J
    return F


def test_criterion_09_phase_gradient_matrix_identity():
    rng = np.random.default_rng(0x5EED)
    thetas = random_instances(1, 200, seed=0xABC)
    worst, worst_cond = 0.0, 0.0
    for k in range(100):
        F = _random_symplectic(rng)
        tx, ty = thetas[2 * k], thetas[2 * k + 1]
        worst = max(worst, w_identity_residual(F, tx, ty))
        worst_cond = max(worst_cond, np.linalg.cond(w_matrix(F, tx, ty)))
    ok = worst <= 1e-10 and np.isfinite(worst_cond)
    _verdict(9, "phase-gradient matrix identity", ok,
             f"worst residual {worst:.2e}, worst condition {worst_cond:.2e} "
             "on 100 random symplectic/width pairs")


def test_criterion_10_action_identity_and_cocycle():
    res = run_symplectic_check({"experiment": "symplectic-check", "d": 1})
    by = {a["name"]: a for a in res["assertions"]}
    fd = max(v["measured"] for k, v in by.items() if k.startswith("action_fd"))
    coc = by["cocycle_constancy"]["measured"]
    ok = all(a["passed"] for a in res["assertions"]) and fd <= 1e-5 and coc <= 1e-7
    _verdict(10, "generating action identity", ok,
             f"worst gradient residual {fd:.2e}, cocycle spread {coc:.2e}")


def test_criterion_11_adjoint_structure():
    res = run_adjoint_check({"experiment": "adjoint-check", "d": 1, "eps": [0.5]})
    worst = _suite_worst(res)
    ok = all(a["passed"] for a in res["assertions"]) and worst <= 1e-4
    _verdict(11, "adjoint operator structure", ok,
             f"relative Frobenius residual {worst:.2e} after global phase fit")


def test_criterion_12_schur_bound_on_generated_kernels():
    specs = [spec for _, spec in _antiwick_combos()]
    specs.append(FioSpec(IdentityMap(1), SymbolSpec.gaussian_qp(width=1.5),
                         ComplexSymMatrix(np.array([[1.5 + 0.4j]])), I1, 0.5))
    worst_excess = -np.inf
    for spec in specs[::2] + [specs[-1]]:
        plan = _small_plan(spec)
        K = operator_matrix(spec, plan)
        wx, wy = plan.xgrid.weight, plan.ygrid.weight
        measured = bnd.weighted_norm(K, wx, wy)
        schur = bnd.schur_row_col(K, wx, wy)[2]
        worst_excess = max(worst_excess, measured / schur - 1.0)
    ok = worst_excess <= 1e-2
    _verdict(12, "row/column kernel bound", ok,
             f"worst norm/bound excess {worst_excess:.2e} over 6 kernels")


def test_criterion_13_grid_doubling_stability():
    cases = [
        FioSpec(IdentityMap(1), SymbolSpec.constant(1.0), I1, I1, 1.0),
        FioSpec(_maps()["harmonic"], SymbolSpec.gaussian_qp(width=1.5), I1, I1, 0.5),
        FioSpec(_maps()["shear"], SymbolSpec.bump_qp((0.0, 0.0), 1.2), I1, I1, 1.0),
    ]
    worst = 0.0
    for spec in cases:
        plan = _small_plan(spec)
        n1 = bnd.measure_operator_norm(spec, plan)
        n2 = bnd.measure_operator_norm(spec, plan.doubled())
        worst = max(worst, abs(n2 - n1) / n2)
    ok = worst <= 1e-3
    _verdict(13, "grid-doubling norm stability", ok,
             f"worst relative drift {worst:.2e} across 3 operators")
