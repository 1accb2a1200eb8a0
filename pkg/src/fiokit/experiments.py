"""Named experiment suites shared by the command-line runner and the tests.

Each suite function takes a validated config dict and returns a result dict

    {"experiment": str,
     "assertions": [{"name", "measured", "bound", "tol", "passed"}, ...],
     "tables": {table_name: [row dicts with scalar values]}}

Suites are deterministic for a fixed config and seed.
"""

from __future__ import annotations

import numpy as np

from . import bounds as bnd
from .fbi import (
    auto_grid,
    auto_phase_space_grid,
    fbi_forward,
    fbi_inverse,
    momentum_band,
)
from .fio import DiscretizationPlan, FioSpec, SymbolSpec, apply_fio, operator_matrix
from .grids import GridFunction, GridLayout
from .matrixcore import (
    ComplexSymMatrix,
    gaussian_value,
    is_symplectic,
    principal_sqrt,
    random_instances,
    symplectic_form,
    w_identity_residual,
)
from .symplectic import (
    CanonicalMap,
    IdentityMap,
    LinearMap,
    compose,
    free_particle,
    hamiltonian_flow,
    harmonic_oscillator,
    invert,
    pendulum_like,
)

EXPERIMENTS = (
    "fbi-isometry",
    "reconstruct",
    "identity-op",
    "norm-bounds",
    "adjoint-check",
    "separation-decay",
    "matrix-sqrt",
    "symplectic-check",
    "full-theorem",
)


# ---------------------------------------------------------------- builders


def build_theta(entries, d: int) -> ComplexSymMatrix:
    if entries is None:
        return ComplexSymMatrix(np.eye(d))
    m = np.array([[complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                   for v in row] for row in entries])
    return ComplexSymMatrix(m)


def build_kappa(desc, d: int) -> CanonicalMap:
    if desc is None or desc.get("kind") == "identity":
        return IdentityMap(d)
    kind = desc["kind"]
    if kind == "linear":
        return LinearMap(np.array(desc["matrix"], dtype=float))
    if kind == "hamiltonian":
        params = desc.get("params", {})
        name = desc.get("hamiltonian", "harmonic")
        if name == "free":
            h = free_particle(d)
        elif name == "harmonic":
            h = harmonic_oscillator(d, params.get("omega", 1.0))
        elif name == "pendulum":
            h = pendulum_like(d, params.get("a", 1.0))
        else:
            raise ValueError(f"unknown hamiltonian {name!r}")
        return hamiltonian_flow(h, desc.get("t", 1.0), desc.get("step", 1e-3), d)
    raise ValueError(f"unknown map kind {kind!r}")


def build_symbol(desc) -> SymbolSpec:
    if desc is None:
        return SymbolSpec.constant(1.0)
    kind = desc.get("kind", "constant")
    if kind == "constant":
        return SymbolSpec.constant(desc.get("value", 1.0))
    if kind == "gaussian":
        return SymbolSpec.gaussian_qp(
            center=desc.get("center", (0.0, 0.0)),
            width=desc.get("width", 1.0),
            amp=desc.get("amp", 1.0),
        )
    if kind == "bump":
        return SymbolSpec.bump_qp(
            center=desc.get("center", (0.0, 0.0)),
            radius=desc.get("radius", 0.5),
            amp=desc.get("amp", 1.0),
        )
    if kind == "polynomial-times-gaussian":
        coeffs = [complex(c) for c in desc.get("coeffs", [1.0])]
        width = desc.get("width", 1.0)

        def ev(x, y, q, p):
            r = np.sqrt(np.sum(q**2, axis=-1) + np.sum(p**2, axis=-1))
            poly = np.zeros(r.shape, dtype=complex)
            for j, c in enumerate(coeffs):
                poly = poly + c * r**j
            return poly * np.exp(-(r / width) ** 2)

        sup = _poly_gauss_sup(coeffs, width)
        return SymbolSpec(evaluator=ev, sup_norm=sup, name="polynomial-times-gaussian")
    raise ValueError(f"unknown symbol kind {kind!r}")


def _poly_gauss_sup(coeffs, width) -> float:
    r = np.linspace(0.0, 12.0 * width, 20001)
    poly = np.zeros(r.shape, dtype=complex)
    for j, c in enumerate(coeffs):
        poly = poly + c * r**j
    return float(np.max(np.abs(poly) * np.exp(-((r / width) ** 2))))


def build_plan(spec: FioSpec, grids) -> DiscretizationPlan:
    if grids is None or grids == "auto":
        return DiscretizationPlan.auto(spec)
    if "x" in grids:
        def lay(g):
            return GridLayout([g["lo"]] if np.isscalar(g["lo"]) else g["lo"],
                              [g["hi"]] if np.isscalar(g["hi"]) else g["hi"], g["n"])
        return DiscretizationPlan(lay(grids["x"]), lay(grids["y"]),
                                  lay(grids["q"]), lay(grids["p"]))
    return DiscretizationPlan.auto(
        spec,
        support_radius=grids.get("support_radius", 4.0),
        p_band=tuple(grids.get("p_band", (-1.0, 1.0))),
        safety=grids.get("safety", 1.5),
    )


def test_function_family(d: int = 1, count: int = 10):
    """Schwartz-type test functions: shifted, modulated, chirped Gaussians.

    Returns a list of (callable phi(y), position radius, momentum scale)
    with |y|-support effectively inside the radius and ps-band |p| <= scale
    at eps = 1 (the oscillations are written in y/eps so the band is
    eps-independent).
    """
    if d != 1:
        raise ValueError("test family provided for d = 1")
    specs = [
        (0.0, 1.0, 0.0, lambda t: np.ones_like(t)),
        (0.5, 0.8, 0.3, lambda t: np.ones_like(t)),
        (-0.7, 1.2, -0.5, lambda t: np.ones_like(t)),
        (0.0, 1.0, 0.8, lambda t: np.ones_like(t)),
        (0.3, 0.7, -0.2, lambda t: t),
        (-0.4, 1.0, 0.6, lambda t: 1.0 + t**2),
        (0.8, 1.4, 0.0, lambda t: t**2 - 1.0),
        (0.0, 0.9, -0.7, lambda t: 1.0 + 0.5 * t),
        (-0.2, 1.1, 0.4, lambda t: np.cos(t)),
        (0.6, 0.8, -0.4, lambda t: t**3),
    ][:count]

    fns = []
    for a, sig, p0, poly in specs:
        def phi(y, a=a, sig=sig, p0=p0, poly=poly, eps=1.0):
            t = (y - a) / sig
            return poly(t) * np.exp(-(t**2) / 2.0)

        fns.append((phi, a, sig, p0))
    return fns


def _family_function(entry, eps: float):
    phi_base, a, sig, p0 = entry

    def phi(y):
        return phi_base(y) * np.exp(1j * p0 * y / eps)

    return phi


def _assertion(name, measured, bound, tol):
    return {
        "name": name,
        "measured": float(measured),
        "bound": float(bound),
        "tol": float(tol),
        "passed": bool(measured <= bound + tol),
    }


# ---------------------------------------------------------------- suites


def run_fbi_isometry(cfg) -> dict:
    d = cfg.get("d", 1)
    eps_list = cfg.get("eps", [1.0])
    tol = cfg.get("tolerances", {}).get("isometry", 1e-5)
    theta = build_theta(cfg.get("theta_x"), d)
    rows, assertions = [], []
    for eps in eps_list:
        for k, entry in enumerate(test_function_family(d)):
            phi_fn = _family_function(entry, eps)
            a, sig, p0 = entry[1], entry[2], entry[3]
            radius = abs(a) + 8.0 * sig
            band = (p0 - 1.0, p0 + 1.0)
            qg, pg = auto_phase_space_grid(eps, theta, radius, band)
            p_max = float(max(abs(pg.lo[0]), abs(pg.hi[0])))
            layout = auto_grid(eps, theta, radius, p_max)
            phi = GridFunction.from_callable(layout, phi_fn)
            W = fbi_forward(eps, theta, phi, qg, pg)
            resid = abs(W.norm() / phi.norm() - 1.0)
            rows.append({"eps": eps, "function": k, "residual": resid})
            assertions.append(_assertion(f"isometry[eps={eps},f={k}]", resid, 0.0, tol))
    return {"experiment": "fbi-isometry", "assertions": assertions,
            "tables": {"isometry": rows}}


def run_reconstruct(cfg) -> dict:
    d = cfg.get("d", 1)
    eps_list = cfg.get("eps", [1.0])
    tol = cfg.get("tolerances", {}).get("reconstruct", 1e-5)
    theta = build_theta(cfg.get("theta_x"), d)
    rows, assertions = [], []
    for eps in eps_list:
        for k, entry in enumerate(test_function_family(d)):
            phi_fn = _family_function(entry, eps)
            a, sig, p0 = entry[1], entry[2], entry[3]
            radius = abs(a) + 8.0 * sig
            band = (p0 - 1.0, p0 + 1.0)
            qg, pg = auto_phase_space_grid(eps, theta, radius, band)
            p_max = float(max(abs(pg.lo[0]), abs(pg.hi[0])))
            layout = auto_grid(eps, theta, radius, p_max)
            phi = GridFunction.from_callable(layout, phi_fn)
            W = fbi_forward(eps, theta, phi, qg, pg)
            back = fbi_inverse(eps, theta, W, layout)
            resid = (back - phi).norm() / phi.norm()
            rows.append({"eps": eps, "function": k, "residual": resid})
            assertions.append(_assertion(f"reconstruct[eps={eps},f={k}]", resid, 0.0, tol))
    return {"experiment": "reconstruct", "assertions": assertions,
            "tables": {"reconstruct": rows}}


_IDENTITY_THETA_PAIRS = (
    ("I,I", np.eye(1), np.eye(1)),
    ("I,3I", np.eye(1), 3.0 * np.eye(1)),
    ("complex,I", np.array([[1.5 + 0.8j]]), np.eye(1)),
    ("complex,complex", np.array([[2.0 - 0.5j]]), np.array([[1.0 + 1.0j]])),
)


def run_identity_op(cfg) -> dict:
    eps_list = cfg.get("eps", [1.0])
    tol = cfg.get("tolerances", {}).get("identity", 1e-5)
    rows, assertions = [], []
    for eps in eps_list:
        for label, tx, ty in _IDENTITY_THETA_PAIRS:
            theta_x = ComplexSymMatrix(tx)
            theta_y = ComplexSymMatrix(ty)
            spec = FioSpec(IdentityMap(1), SymbolSpec.constant(1.0),
                           theta_x, theta_y, eps)
            plan = build_plan(spec, cfg.get("grids", {"support_radius": 2.5,
                                                     "p_band": (-1.2, 1.2)}))
            phi = GridFunction.from_callable(
                plan.ygrid, lambda y: (1.0 + 0.4 * y) * np.exp(-(y**2) / (2 * eps))
            )
            out = apply_fio(spec, phi, plan)
            factor = gaussian_value(ComplexSymMatrix(theta_x.m + theta_y.m))
            ref = GridFunction.from_callable(
                plan.xgrid, lambda y: (1.0 + 0.4 * y) * np.exp(-(y**2) / (2 * eps))
            )
            resid = (out - factor * ref).norm() / ref.norm()
            rows.append({"eps": eps, "thetas": label, "residual": resid,
                         "factor_re": factor.real, "factor_im": factor.imag})
            assertions.append(_assertion(f"identity[eps={eps},{label}]", resid, 0.0, tol))
    return {"experiment": "identity-op", "assertions": assertions,
            "tables": {"identity": rows}}


def run_norm_bounds(cfg) -> dict:
    d = cfg.get("d", 1)
    eps_list = cfg.get("eps", [1.0])
    tol = cfg.get("tolerances", {}).get("norm", 5e-3)
    theta_x = build_theta(cfg.get("theta_x"), d)
    theta_y = build_theta(cfg.get("theta_y"), d)
    kappa = build_kappa(cfg.get("kappa"), d)
    u = build_symbol(cfg.get("symbol"))
    rows, assertions = [], []
    for eps in eps_list:
        spec = FioSpec(kappa, u, theta_x, theta_y, eps)
        plan = build_plan(spec, cfg.get("grids", {"support_radius": 2.0,
                                                  "p_band": (-1.0, 1.0)}))
        aw = bnd.verify_antiwick_bound(spec, plan)
        cf = bnd.verify_corfull_bound(spec, plan)
        K = operator_matrix(spec, plan)
        row_sup, col_sup, schur = bnd.schur_row_col(
            K, plan.xgrid.weight, plan.ygrid.weight
        )
        rows.append({"eps": eps, "antiwick": aw.measured_norm,
                     "antiwick_bound": aw.bound_value,
                     "corfull": cf.measured_norm, "corfull_bound": cf.bound_value,
                     "schur_bound": schur})
        assertions.append(_assertion(f"antiwick[eps={eps}]", aw.measured_norm,
                                     aw.bound_value * (1 + tol), 0.0))
        assertions.append(_assertion(f"corfull[eps={eps}]", cf.measured_norm,
                                     cf.bound_value * (1 + tol), 0.0))
        assertions.append(_assertion(f"schur[eps={eps}]", cf.measured_norm,
                                     schur * (1 + 1e-2), 0.0))
    return {"experiment": "norm-bounds", "assertions": assertions,
            "tables": {"norms": rows}}


def run_adjoint_check(cfg) -> dict:
    from .fio import adjoint_spec

    d = cfg.get("d", 1)
    eps_list = cfg.get("eps", [1.0])
    tol = cfg.get("tolerances", {}).get("adjoint", 1e-4)
    theta_x = build_theta(cfg.get("theta_x"), d)
    theta_y = build_theta(cfg.get("theta_y"), d)
    kappa = build_kappa(cfg.get("kappa"), d)
    u = build_symbol(cfg.get("symbol"))
    rows, assertions = [], []
    for eps in eps_list:
        spec = FioSpec(kappa, u, theta_x, theta_y, eps)
        plan = build_plan(spec, cfg.get("grids", {"support_radius": 2.0,
                                                  "p_band": (-1.0, 1.0)}))
        K = operator_matrix(spec, plan)
        adj = adjoint_spec(spec)
        plan_adj = DiscretizationPlan(plan.ygrid, plan.xgrid, plan.qgrid, plan.pgrid)
        Ka = operator_matrix(adj, plan_adj)
        target = K.conj().T
        ip = np.vdot(Ka, target)
        phase = ip / abs(ip) if abs(ip) > 0 else 1.0
        resid = np.linalg.norm(phase * Ka - target) / np.linalg.norm(target)
        rows.append({"eps": eps, "residual": float(resid),
                     "phase_re": float(np.real(phase)),
                     "phase_im": float(np.imag(phase))})
        assertions.append(_assertion(f"adjoint[eps={eps}]", resid, 0.0, tol))
    return {"experiment": "adjoint-check", "assertions": assertions,
            "tables": {"adjoint": rows}}


def run_separation_decay(cfg) -> dict:
    d = cfg.get("d", 1)
    eps_list = cfg.get("eps", [1.0, 0.5])
    tol = cfg.get("tolerances", {}).get("slope", 0.25)
    theta_x = build_theta(cfg.get("theta_x"), d)
    theta_y = build_theta(cfg.get("theta_y"), d)
    kappa = build_kappa(cfg.get("kappa"), d)
    radius = cfg.get("bump_radius", 0.25)
    rows, assertions = [], []
    for eps in eps_list:
        # separations large vs the bump radius so the edge-vanishing symbol
        # weight does not bias the fitted exponent
        step = max(0.75, np.sqrt(eps))
        deltas = cfg.get("deltas") or list(np.round(1.0 + np.arange(4) * step, 3))

        def spec_for(c):
            return FioSpec(kappa, SymbolSpec.bump_qp(c, radius), theta_x, theta_y, eps)

        def plan_for(su, sv):
            lo = np.minimum(su.u.qp_support[0], sv.u.qp_support[0])
            hi = np.maximum(su.u.qp_support[1], sv.u.qp_support[1])
            rad = float(np.max(np.abs([lo, hi]))) + 0.5
            merged = SymbolSpec.bump_qp((lo + hi) / 2.0,
                                        float(np.max(hi - lo)) / 2.0 + radius)
            ms = FioSpec(su.kappa, merged, su.theta_x, su.theta_y, su.eps)
            return DiscretizationPlan.auto(ms, support_radius=rad, p_band=(-0.5, 0.5))

        cu = [(-(dl / 2 + radius), 0.0) for dl in deltas]
        cv = [(dl / 2 + radius, 0.0) for dl in deltas]
        res = bnd.separation_decay(spec_for, cu, cv, radius, plan_for)
        for r in res["rows"]:
            rows.append({"eps": eps, "delta": r["delta"], "norm": r["norm"],
                         "measurable": r["measurable"]})
        rel = abs(res["slope"] / res["expected_slope"] - 1.0)
        rows.append({"eps": eps, "delta": -1.0, "norm": res["slope"],
                     "measurable": True})
        assertions.append(_assertion(f"slope[eps={eps}]", rel, 0.0, tol))
    return {"experiment": "separation-decay", "assertions": assertions,
            "tables": {"decay": rows}}


def run_matrix_sqrt(cfg, seed: int = 0x5EED) -> dict:
    d = cfg.get("d", 2)
    count = cfg.get("count", 500)
    tol = cfg.get("tolerances", {}).get("sqrt", 1e-12)
    rows, assertions = [], []
    worst_resid, worst_eig = 0.0, np.inf
    for M in random_instances(d, count, seed):
        R = principal_sqrt(M).m
        resid = np.linalg.norm(R @ R - M.m) / np.linalg.norm(M.m)
        lam_min = float(np.min(np.linalg.eigvalsh(R.real)))
        worst_resid = max(worst_resid, float(resid))
        worst_eig = min(worst_eig, lam_min)
    assertions.append(_assertion("sqrt_residual", worst_resid, 0.0, tol))
    assertions.append(_assertion("sqrt_re_pd", 0.0 if worst_eig > 0 else 1.0, 0.0, 0.0))
    # Gaussian normalization vs midpoint quadrature of exp(-M z.z / 2)
    from .matrixcore import gaussian_quadrature_oracle

    for label, m in (("2I", 2.0 * np.eye(1)), ("complex", np.array([[1.2 + 0.7j]])),
                     ("2d", np.array([[2.0, 0.3], [0.3, 1.5]]))):
        M = ComplexSymMatrix(m)
        val = gaussian_value(M)
        oracle = gaussian_quadrature_oracle(M)
        err = abs(val - oracle)
        rows.append({"case": label, "value_re": val.real, "value_im": val.imag,
                     "oracle_re": oracle.real, "oracle_im": oracle.imag, "err": err})
        assertions.append(_assertion(f"gaussian[{label}]", err, 0.0, 1e-8))
    rows.append({"case": "worst_sqrt_residual", "value_re": worst_resid,
                 "value_im": 0.0, "oracle_re": 0.0, "oracle_im": 0.0,
                 "err": worst_resid})
    return {"experiment": "matrix-sqrt", "assertions": assertions,
            "tables": {"sqrt": rows}}


def run_symplectic_check(cfg, seed: int = 0x5EED) -> dict:
    d = cfg.get("d", 1)
    tol_symp = cfg.get("tolerances", {}).get("symplectic", 1e-8)
    tol_fd = cfg.get("tolerances", {}).get("action_fd", 1e-5)
    tol_coc = cfg.get("tolerances", {}).get("cocycle", 1e-7)
    rng = np.random.default_rng(seed)
    maps = {
        "identity": IdentityMap(d),
        "free": hamiltonian_flow(free_particle(d), 0.7, d=d),
        "harmonic": hamiltonian_flow(harmonic_oscillator(d, 1.3), 0.9, d=d),
        "pendulum": hamiltonian_flow(pendulum_like(d, 0.8), 0.5, d=d),
        "linear": LinearMap(np.array([[1.0, 0.4], [0.3, 1.12]])) if d == 1 else IdentityMap(d),
    }
    rows, assertions = [], []
    pts = rng.uniform(-1.5, 1.5, size=(12, 2 * d))
    h = 1e-5
    for name, kmap in maps.items():
        # one batch holding every point and its +/- h perturbations
        batch = [pts]
        for j in range(2 * d):
            e = np.zeros(2 * d)
            e[j] = h
            batch.append(pts + e)
            batch.append(pts - e)
        img, F, S = kmap.evaluate(np.concatenate(batch, axis=0))
        npts = pts.shape[0]
        worst_symp, worst_fd = 0.0, 0.0
        for i in range(npts):
            worst_symp = max(worst_symp, is_symplectic(F[i])[1])
            grad_fd = np.array(
                [
                    (S[npts * (1 + 2 * j) + i] - S[npts * (2 + 2 * j) + i]) / (2 * h)
                    for j in range(2 * d)
                ]
            )
            # action identity: dS = (-p + X_q . Xi, X_p . Xi)
            expected = F[i, :d, :].T @ img[i, d:]
            expected[:d] -= pts[i, d:]
            worst_fd = max(worst_fd, float(np.max(np.abs(grad_fd - expected))))
        rows.append({"map": name, "symplectic_residual": worst_symp,
                     "action_fd_residual": worst_fd})
        assertions.append(_assertion(f"symplectic[{name}]", worst_symp, 0.0, tol_symp))
        assertions.append(_assertion(f"action_fd[{name}]", worst_fd, 0.0, tol_fd))
    # cocycle: S^{k' o k} - S^{k'} o k - S^k constant over sample points
    k1 = maps["harmonic"]
    k2 = maps["free"]
    comp = compose(k2, k1)  # k2 after k1
    vals = []
    for z in pts:
        img1, _, S1 = k1.evaluate(z)
        _, _, S2 = k2.evaluate(img1)
        _, _, Sc = comp.evaluate(z)
        vals.append(Sc - S2 - S1)
    spread = float(np.max(vals) - np.min(vals))
    rows.append({"map": "cocycle(free o harmonic)", "symplectic_residual": 0.0,
                 "action_fd_residual": spread})
    assertions.append(_assertion("cocycle_constancy", spread, 0.0, tol_coc))
    return {"experiment": "symplectic-check", "assertions": assertions,
            "tables": {"maps": rows}}


def run_full_theorem(cfg) -> dict:
    d = cfg.get("d", 1)
    eps_list = cfg.get("eps", [1.0, 0.5, 0.25, 0.1])
    cap = cfg.get("tolerances", {}).get("ratio", 2.0)
    theta_x = build_theta(cfg.get("theta_x"), d)
    theta_y = build_theta(cfg.get("theta_y"), d)
    kappa = build_kappa(cfg.get("kappa", {"kind": "hamiltonian",
                                          "hamiltonian": "harmonic", "t": 1.0}), d)

    def u_xy():
        return SymbolSpec(
            evaluator=lambda x, y, q, p: np.sin(x[..., 0])
            * np.exp(-np.sum(q**2, -1) - np.sum(p**2, -1)),
            depends_on_xy=True,
            sup_norm=1.0,
            xy_terms=[(lambda x: np.sin(x[:, 0]),
                       lambda y: np.ones(y.shape[0]),
                       lambda q, p: np.exp(-np.sum(q**2, -1) - np.sum(p**2, -1)))],
            name="sin(x)*gauss(q,p)",
        )

    def make_spec(eps):
        return FioSpec(kappa, u_xy(), theta_x, theta_y, eps)

    def plan_for(spec):
        return build_plan(spec, cfg.get("grids", {"support_radius": 2.0,
                                                  "p_band": (-1.0, 1.0)}))

    res = bnd.verify_full_theorem(make_spec, eps_list, plan_for, ratio_cap=cap)
    rows = [{"eps": e, "norm": n} for e, n in zip(res["eps_list"], res["norms"])]
    assertions = [_assertion("eps_uniform_ratio", res["ratio"], cap, 0.0)]
    return {"experiment": "full-theorem", "assertions": assertions,
            "tables": {"norms": rows}}


_RUNNERS = {
    "fbi-isometry": run_fbi_isometry,
    "reconstruct": run_reconstruct,
    "identity-op": run_identity_op,
    "norm-bounds": run_norm_bounds,
    "adjoint-check": run_adjoint_check,
    "separation-decay": run_separation_decay,
    "matrix-sqrt": run_matrix_sqrt,
    "symplectic-check": run_symplectic_check,
    "full-theorem": run_full_theorem,
}


def run_experiment(cfg, seed: int = 0x5EED) -> dict:
    name = cfg["experiment"]
    runner = _RUNNERS[name]
    if name in ("matrix-sqrt", "symplectic-check"):
        return runner(cfg, seed=seed)
    return runner(cfg)
