"""Experiment scenarios: circuit builders, sweep runners, and the linearized
Gaussian prediction for the interferometer.

Every runner maps a ScenarioConfig to a list of ResultTable objects; the CLI
layer serializes those to CSV plus a JSON sidecar. Sweep points are evaluated
with deterministic per-point seeds derived from (master seed, table index,
point index), so reruns with identical configurations are byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .engine import (
    BranchEnumMode,
    CircuitLayout,
    Layer,
    LossSpec,
    SamplingMode,
    evolve_state,
    exact_density_evolution,
    run_ensemble,
)
from .errors import ConfigError, ContractViolation
from .fock import CoherentInput, FockCutoff, MultiModeState, product_state
from .gates import (
    build_dielectric_bs,
    build_kerr,
    build_mzi_arm,
    build_nonlinear_coupler,
    build_symmetric_bs,
)
from .gaussian import CumulantState, evolve_cumulants, g2_gaussian
from .loss import db_to_eta, kappa_from_rate
from .observables import ObservableReport, report, report_from_state
from .polariton import (
    PolaritonParams,
    calibrate_dispersion,
    gate_budget,
    gate_budget_direct,
    load_tabulated_csv,
)

__all__ = [
    "ResultTable",
    "run_scenario",
    "run_mzi_free_space",
    "run_mzi_lossy",
    "run_mzi_theta_phi_map",
    "run_mzi_integrated",
    "run_qpic_kscan",
    "run_qpic_slowlight",
    "run_qpic_phase_sweep",
    "convergence_check",
    "dielectric_bs_transfer",
    "symmetric_bs_transfer",
    "mzi_linear_transfer",
    "mzi_gaussian_prediction",
    "qpic_layer_pairs",
    "build_qpic_layout",
]


@dataclass
class ResultTable:
    """One CSV-shaped table: sweep coordinates, extras, and per-point reports."""

    name: str
    sweep_columns: list[str]
    extra_columns: list[str]
    rows: list[dict]
    reports: list[ObservableReport]
    meta: dict = field(default_factory=dict)


def _point_seed(master: int, table_idx: int, point_idx: int) -> int:
    ss = np.random.SeedSequence([int(master), int(table_idx), int(point_idx)])
    return int(ss.generate_state(1, np.uint64)[0])


def _evaluate(
    layout: CircuitLayout,
    state: MultiModeState,
    engine_mode: str,
    cfg: ScenarioConfig,
    point_seed: int,
) -> ObservableReport:
    """Dispatch one circuit evaluation to the requested engine route."""
    mode = engine_mode
    if mode == "auto":
        if not layout.has_loss:
            mode = "pure"
        elif layout.num_modes <= 2:
            mode = "branch_enum"
        else:
            mode = "sampling"
    if mode == "pure":
        out = evolve_state(layout, state)
        return report_from_state(out, meta={"seed": None})
    if mode == "density":
        rho = exact_density_evolution(layout, state)
        return report_from_state(
            rho, num_modes=layout.num_modes, cutoff=state.cutoff,
            meta={"engine_mode": "density", "seed": None},
        )
    if mode == "branch_enum":
        ens = run_ensemble(layout, state, BranchEnumMode(cfg.engine.threshold))
        return report(ens)
    if mode == "sampling":
        ens = run_ensemble(layout, state, SamplingMode(cfg.engine.trajectories, point_seed))
        return report(ens, se_method=cfg.engine.se_method)
    raise ConfigError(f"unknown engine mode {mode!r}")


# ---------------------------------------------------------------------------
# interferometer layouts


def _mzi_input(alpha_in: float, cutoff: FockCutoff) -> MultiModeState:
    return product_state(CoherentInput((alpha_in, 0.0)), cutoff)


def free_space_mzi_layout(
    u_dt: float, phi_lo: float, theta_in: float, theta_out: float,
    cutoff: FockCutoff, delta_dt: float = 0.0,
) -> CircuitLayout:
    """Dielectric coupler, Kerr arm + local-oscillator phase, dielectric coupler."""
    interior = build_mzi_arm(u_dt, phi_lo, cutoff)
    layers = [
        Layer(gates=(((0, 1), build_dielectric_bs(theta_in, cutoff)),)),
        Layer(gates=(((0, 1), interior),)),
        Layer(gates=(((0, 1), build_dielectric_bs(theta_out, cutoff)),)),
    ]
    return CircuitLayout(2, tuple(layers))


def lossy_mzi_layout(
    u_dt: float, phi_lo: float, theta_in: float, theta_out: float,
    db_total: float, cutoff: FockCutoff, l_max: int | None = None,
    fold_deficiency: bool = True,
) -> CircuitLayout:
    """Free-space MZI with the waveguide coupling loss split evenly between
    an in-coupling and an out-coupling damping channel on arm 0."""
    _, kappa_half = db_to_eta(db_total / 2.0)
    loss = LossSpec((kappa_half, 0.0), l_max=l_max, fold_deficiency=fold_deficiency)
    layers = [
        Layer(gates=(((0, 1), build_dielectric_bs(theta_in, cutoff)),)),
        Layer(gates=(((0, 1), build_mzi_arm(u_dt, phi_lo, cutoff)),), loss=loss),
        Layer(gates=(((0, 1), build_dielectric_bs(theta_out, cutoff)),), loss=loss),
    ]
    return CircuitLayout(2, tuple(layers))


def integrated_mzi_layout(
    u_dt: float, phi_lo: float, theta_in: float, theta_out: float,
    cutoff: FockCutoff,
) -> CircuitLayout:
    """On-chip MZI: symmetric couplers and the Kerr exposure in both arms.

    The local-oscillator phase is an imprinted path-length difference on arm
    1 between the couplers.
    """
    layers = [
        Layer(gates=(((0, 1), build_symmetric_bs(theta_in, cutoff)),)),
        Layer(gates=(
            ((0, 1), build_mzi_arm(u_dt, phi_lo, cutoff)),
        )),
        Layer(gates=(((1,), build_kerr(u_dt, 0.0, cutoff)),)),
        Layer(gates=(((0, 1), build_symmetric_bs(theta_out, cutoff)),)),
    ]
    return CircuitLayout(2, tuple(layers))


# ---------------------------------------------------------------------------
# qPIC layouts


def qpic_layer_pairs(
    pairing: str, num_modes: int, num_layers: int,
    custom_pairs: list[list[list[int]]] | None = None,
) -> list[list[tuple[int, int]]]:
    """Adjacent-pair pattern per layer.

    brickwork alternates starting with the (0,1),(2,3),... layer;
    brickwork-shifted starts with the offset layer (1,2),(3,4),... so the
    injected edge modes idle first. even-only repeats the aligned pairs.
    """
    evens = [(i, i + 1) for i in range(0, num_modes - 1, 2)]
    odds = [(i, i + 1) for i in range(1, num_modes - 1, 2)]
    if pairing == "brickwork":
        return [evens if layer % 2 == 0 else odds for layer in range(num_layers)]
    if pairing == "brickwork-shifted":
        return [odds if layer % 2 == 0 else evens for layer in range(num_layers)]
    if pairing == "even-only":
        return [list(evens) for _ in range(num_layers)]
    if pairing == "custom":
        if custom_pairs is None or len(custom_pairs) != num_layers:
            raise ConfigError("custom pairing needs one pair list per layer")
        return [[(int(i), int(j)) for i, j in layer] for layer in custom_pairs]
    raise ConfigError(f"unknown pairing {pairing!r}")


def build_qpic_layout(
    num_modes: int,
    pairs_per_layer: list[list[tuple[int, int]]],
    j_dt: float,
    u_dt: float,
    cutoff: FockCutoff,
    delta_dt: float = 0.0,
    idle_kerr: bool = False,
    kappa: float = 0.0,
    l_max: int | None = None,
    fold_deficiency: bool = True,
    dt_ps: float | None = None,
    dx_um: float | None = None,
) -> CircuitLayout:
    """Stacked nonlinear-coupler mesh with optional uniform per-layer loss.

    ``idle_kerr`` adds the single-mode Kerr exposure to modes not engaged by
    any coupler in a layer (they still propagate through their waveguide).
    """
    coupler = build_nonlinear_coupler(j_dt, u_dt, delta_dt, cutoff)
    idle = build_kerr(u_dt, delta_dt, cutoff) if idle_kerr else None
    loss = (
        LossSpec((kappa,) * num_modes, l_max=l_max, fold_deficiency=fold_deficiency)
        if kappa > 0.0
        else None
    )
    layers = []
    for pairs in pairs_per_layer:
        gates: list[tuple[tuple[int, ...], object]] = [((i, j), coupler) for i, j in pairs]
        if idle is not None:
            engaged = {m for pr in pairs for m in pr}
            gates += [((m,), idle) for m in range(num_modes) if m not in engaged]
        layers.append(Layer(gates=tuple(gates), loss=loss, dt_ps=dt_ps, dx_um=dx_um))
    return CircuitLayout(num_modes, tuple(layers))


def _qpic_input(cfg: ScenarioConfig, cutoff: FockCutoff, phi_rel: float) -> MultiModeState:
    L = cfg.physics.num_modes
    alphas = [0.0 + 0.0j] * L
    alphas[0] = complex(cfg.physics.alpha_in)
    alphas[L - 1] = cfg.physics.alpha_in * np.exp(1j * phi_rel)
    return product_state(CoherentInput(tuple(alphas)), cutoff)


def _polariton_params(cfg: ScenarioConfig, g_exc: float) -> PolaritonParams:
    if cfg.physics.dispersion_csv:
        model = load_tabulated_csv(cfg.physics.dispersion_csv)
    else:
        model, _ = calibrate_dispersion()
    kwargs = dict(dispersion=model, g_exc=g_exc, sigma_t=cfg.physics.sigma_t)
    if cfg.physics.a_perp is not None:
        kwargs["a_perp"] = cfg.physics.a_perp
    return PolaritonParams(**kwargs)


# ---------------------------------------------------------------------------
# classical transfer matrices and the Gaussian interferometer prediction


def dielectric_bs_transfer(theta: float) -> np.ndarray:
    """Coherent-amplitude transfer of the dielectric coupler (pi phase first)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]]) @ np.diag([1.0, -1.0])


def symmetric_bs_transfer(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 1j * s], [1j * s, c]])


def mzi_linear_transfer(phi_lo: float, theta_in: float, theta_out: float) -> np.ndarray:
    """2x2 transfer of the free-space MZI without the Kerr mean-field phase."""
    interior = np.diag([1.0, np.exp(-1j * phi_lo)])
    return dielectric_bs_transfer(theta_out) @ interior @ dielectric_bs_transfer(theta_in)


def mzi_gaussian_prediction(
    u_dt: float,
    phi_lo: float,
    theta_in: float = math.pi / 4,
    theta_out: float = 0.2 * math.pi,
    alpha_in: float = 1.0,
    method: str = "closed_form",
) -> np.ndarray:
    """Linearized g2 of both MZI outputs from the transfer matrix.

    The classical field in the Kerr arm rotates by the mean-field phase
    U |alpha|^2 t; the fluctuation cumulants are evolved in the co-rotating
    frame over the full exposure (U t = u_dt), transported through the
    out-coupler, and combined with the transfer-matrix phase of each output's
    classical field.
    """
    arm = dielectric_bs_transfer(theta_in) @ np.array([alpha_in, 0.0])
    arm0 = arm[0] * np.exp(-1j * u_dt * abs(arm[0]) ** 2)
    cum = evolve_cumulants(u_dt, arm0, 1.0, method=method)
    out_transfer = dielectric_bs_transfer(theta_out)
    alpha_out = out_transfer @ np.array([arm0, np.exp(-1j * phi_lo) * arm[1]])
    # fluctuations live in interior arm 0; column 0 of the out-coupler maps them out
    t_fluct = out_transfer[:, 0]
    g2 = np.empty(2)
    for l in range(2):
        dn_l = float(abs(t_fluct[l]) ** 2 * cum.delta_n)
        dc_l = complex(t_fluct[l] ** 2 * cum.delta_c)
        a_l = complex(alpha_out[l])
        g2[l] = g2_gaussian(
            CumulantState(dn_l, dc_l, a_l, phi=-float(np.angle(a_l)))
        )
    return g2


# ---------------------------------------------------------------------------
# scenario runners


def run_mzi_free_space(cfg: ScenarioConfig) -> list[ResultTable]:
    cutoff = FockCutoff(cfg.engine.cutoff)
    state = _mzi_input(cfg.physics.alpha_in, cutoff)
    tables = []
    for ti, u_dt in enumerate(cfg.physics.u_dt or [0.02]):
        rows, reports = [], []
        for pi_, phi in enumerate(cfg.sweep.grid()):
            layout = free_space_mzi_layout(
                u_dt, phi, cfg.physics.theta_in, cfg.physics.theta_out, cutoff
            )
            rep = _evaluate(layout, state, "pure", cfg, _point_seed(cfg.engine.seed, ti, pi_))
            rows.append({"phi_lo": phi, "u_dt": u_dt})
            reports.append(rep)
        tables.append(
            ResultTable(
                name=f"mzi_free_space_udt{u_dt:g}",
                sweep_columns=["phi_lo"],
                extra_columns=["u_dt"],
                rows=rows,
                reports=reports,
                meta={"u_dt": u_dt},
            )
        )
    return tables


def run_mzi_lossy(cfg: ScenarioConfig) -> list[ResultTable]:
    cutoff = FockCutoff(cfg.engine.cutoff)
    state = _mzi_input(cfg.physics.alpha_in, cutoff)
    u_dt = (cfg.physics.u_dt or [0.02])[0]
    tables = []
    for ti, db in enumerate(cfg.loss.db_total or [0.0]):
        rows, reports = [], []
        _, kappa_half = db_to_eta(db / 2.0)
        for pi_, phi in enumerate(cfg.sweep.grid()):
            layout = lossy_mzi_layout(
                u_dt, phi, cfg.physics.theta_in, cfg.physics.theta_out, db, cutoff,
                l_max=cfg.loss.l_max, fold_deficiency=cfg.loss.fold_deficiency,
            )
            mode = cfg.engine.mode if cfg.engine.mode != "auto" else "density"
            rep = _evaluate(layout, state, mode, cfg, _point_seed(cfg.engine.seed, ti, pi_))
            rows.append({"phi_lo": phi, "u_dt": u_dt, "db_total": db, "kappa_half": kappa_half})
            reports.append(rep)
        tables.append(
            ResultTable(
                name=f"mzi_lossy_db{db:g}",
                sweep_columns=["phi_lo"],
                extra_columns=["u_dt", "db_total", "kappa_half"],
                rows=rows,
                reports=reports,
                meta={"u_dt": u_dt, "db_total": db},
            )
        )
    return tables


def run_mzi_theta_phi_map(cfg: ScenarioConfig) -> list[ResultTable]:
    cutoff = FockCutoff(cfg.engine.cutoff)
    state = _mzi_input(cfg.physics.alpha_in, cutoff)
    u_dt = (cfg.physics.u_dt or [0.02])[0]
    rows, reports = [], []
    for theta_out in cfg.sweep.grid2():
        for phi in cfg.sweep.grid():
            layout = free_space_mzi_layout(
                u_dt, phi, cfg.physics.theta_in, theta_out, cutoff
            )
            reports.append(_evaluate(layout, state, "pure", cfg, 0))
            rows.append({"theta_out": theta_out, "phi_lo": phi, "u_dt": u_dt})
    return [
        ResultTable(
            name="mzi_theta_phi_map",
            sweep_columns=["theta_out", "phi_lo"],
            extra_columns=["u_dt"],
            rows=rows,
            reports=reports,
            meta={"u_dt": u_dt},
        )
    ]


def run_mzi_integrated(cfg: ScenarioConfig) -> list[ResultTable]:
    cutoff = FockCutoff(cfg.engine.cutoff)
    state = _mzi_input(cfg.physics.alpha_in, cutoff)
    tables = []
    for ti, u_dt in enumerate(cfg.physics.u_dt or [0.06]):
        rows, reports = [], []
        for phi in cfg.sweep.grid():
            layout = integrated_mzi_layout(
                u_dt, phi, cfg.physics.theta_in, cfg.physics.theta_out, cutoff
            )
            reports.append(_evaluate(layout, state, "pure", cfg, 0))
            rows.append({"phi_lo": phi, "u_dt": u_dt})
        tables.append(
            ResultTable(
                name=f"mzi_integrated_udt{u_dt:g}",
                sweep_columns=["phi_lo"],
                extra_columns=["u_dt"],
                rows=rows,
                reports=reports,
                meta={"u_dt": u_dt},
            )
        )
    return tables


def _run_kscan_single(
    cfg: ScenarioConfig, g_exc: float, phi_rel: float, table_idx: int, name: str
) -> ResultTable:
    cutoff = FockCutoff(cfg.engine.cutoff)
    params = _polariton_params(cfg, g_exc)
    pairs = qpic_layer_pairs(
        cfg.layout.pairing, cfg.physics.num_modes, cfg.physics.num_layers,
        cfg.layout.custom_pairs,
    )
    state = _qpic_input(cfg, cutoff, phi_rel)
    gamma = cfg.loss.gamma
    rows, reports = [], []
    for pi_, k in enumerate(cfg.sweep.grid()):
        budget = gate_budget(
            k, cfg.physics.dx_um, params, cfg.physics.j_design, cfg.physics.j_dt_design
        )
        kappa = kappa_from_rate(gamma, budget.dt) if gamma > 0 else 0.0
        layout = build_qpic_layout(
            cfg.physics.num_modes, pairs, budget.j_dt, budget.u_dt, cutoff,
            delta_dt=cfg.physics.delta_dt, idle_kerr=cfg.layout.idle_kerr,
            kappa=kappa, l_max=cfg.loss.l_max,
            fold_deficiency=cfg.loss.fold_deficiency,
            dt_ps=budget.dt, dx_um=cfg.physics.dx_um,
        )
        seed = _point_seed(cfg.engine.seed, table_idx, pi_)
        reports.append(_evaluate(layout, state, cfg.engine.mode, cfg, seed))
        rows.append(
            {
                "k": k, "g_exc": g_exc, "phi_rel": phi_rel, "j_dt": budget.j_dt,
                "u_dt": budget.u_dt, "dt_ps": budget.dt, "kappa": kappa,
            }
        )
    return ResultTable(
        name=name,
        sweep_columns=["k"],
        extra_columns=["g_exc", "phi_rel", "j_dt", "u_dt", "dt_ps", "kappa"],
        rows=rows,
        reports=reports,
        meta={"g_exc": g_exc, "phi_rel": phi_rel, "pairing": cfg.layout.pairing},
    )


def run_qpic_kscan(cfg: ScenarioConfig) -> list[ResultTable]:
    tables = []
    for ti, g in enumerate(cfg.physics.g_exc or [10.0]):
        tables.append(
            _run_kscan_single(cfg, g, cfg.physics.phi_rel, ti, f"qpic_kscan_hg{g:g}")
        )
    return tables


def _run_slowlight_single(
    cfg: ScenarioConfig, g_exc: float, phi_rel: float, gamma: float,
    table_idx: int, name: str,
) -> ResultTable:
    cutoff = FockCutoff(cfg.engine.cutoff)
    params = _polariton_params(cfg, g_exc)
    pairs = qpic_layer_pairs(
        cfg.layout.pairing, cfg.physics.num_modes, cfg.physics.num_layers,
        cfg.layout.custom_pairs,
    )
    state = _qpic_input(cfg, cutoff, phi_rel)
    rows, reports = [], []
    for pi_, vg in enumerate(cfg.sweep.grid()):
        budget = gate_budget_direct(
            cfg.physics.u2, vg, cfg.physics.dx_um, params, cfg.physics.j_dt_design
        )
        t_circuit = cfg.physics.num_layers * budget.dt
        row = {
            "v_g": vg, "g_exc": g_exc, "phi_rel": phi_rel, "gamma": gamma,
            "j_dt": budget.j_dt, "u_dt": budget.u_dt, "dt_ps": budget.dt,
            "t_circuit_ps": t_circuit, "kappa": 0.0, "flagged": 0,
        }
        try:
            kappa = kappa_from_rate(gamma, budget.dt) if gamma > 0 else 0.0
        except ContractViolation:
            # kappa = gamma*dt exceeded 1 at extreme slow light: flag, don't crash
            row["flagged"] = 1
            rows.append(row)
            reports.append(None)
            continue
        row["kappa"] = kappa
        layout = build_qpic_layout(
            cfg.physics.num_modes, pairs, budget.j_dt, budget.u_dt, cutoff,
            delta_dt=cfg.physics.delta_dt, idle_kerr=cfg.layout.idle_kerr,
            kappa=kappa, l_max=cfg.loss.l_max,
            fold_deficiency=cfg.loss.fold_deficiency,
            dt_ps=budget.dt, dx_um=cfg.physics.dx_um,
        )
        seed = _point_seed(cfg.engine.seed, table_idx, pi_)
        reports.append(_evaluate(layout, state, cfg.engine.mode, cfg, seed))
        rows.append(row)
    return ResultTable(
        name=name,
        sweep_columns=["v_g"],
        extra_columns=[
            "g_exc", "phi_rel", "gamma", "j_dt", "u_dt", "dt_ps",
            "t_circuit_ps", "kappa", "flagged",
        ],
        rows=rows,
        reports=reports,
        meta={"g_exc": g_exc, "phi_rel": phi_rel, "gamma": gamma,
              "pairing": cfg.layout.pairing},
    )


def run_qpic_slowlight(cfg: ScenarioConfig) -> list[ResultTable]:
    g = (cfg.physics.g_exc or [700.0])[0]
    tables = [
        _run_slowlight_single(
            cfg, g, cfg.physics.phi_rel, 0.0, 0, "qpic_slowlight_lossless"
        )
    ]
    if cfg.loss.gamma > 0:
        tables.append(
            _run_slowlight_single(
                cfg, g, cfg.physics.phi_rel, cfg.loss.gamma, 1,
                f"qpic_slowlight_gamma{cfg.loss.gamma:g}",
            )
        )
    return tables


def run_qpic_phase_sweep(cfg: ScenarioConfig) -> list[ResultTable]:
    phis = cfg.phi_rel_list or [0.0]
    g = (cfg.physics.g_exc or [700.0])[0]
    tables = []
    for ti, phi_rel in enumerate(phis):
        name = f"qpic_phase_{cfg.phase_sweep_scan}_phirel{phi_rel / math.pi:g}pi"
        if cfg.phase_sweep_scan == "kscan":
            tables.append(_run_kscan_single(cfg, g, phi_rel, ti, name))
        elif cfg.phase_sweep_scan == "slowlight":
            tables.append(
                _run_slowlight_single(cfg, g, phi_rel, 0.0, ti * 2, name + "_lossless")
            )
            if cfg.loss.gamma > 0:
                tables.append(
                    _run_slowlight_single(
                        cfg, g, phi_rel, cfg.loss.gamma, ti * 2 + 1, name + "_lossy"
                    )
                )
        else:
            raise ConfigError(f"unknown phase_sweep_scan {cfg.phase_sweep_scan!r}")
    return tables


_RUNNERS = {
    "mzi_free_space": run_mzi_free_space,
    "mzi_lossy": run_mzi_lossy,
    "mzi_theta_phi_map": run_mzi_theta_phi_map,
    "mzi_integrated": run_mzi_integrated,
    "qpic_kscan": run_qpic_kscan,
    "qpic_slowlight": run_qpic_slowlight,
    "qpic_phase_sweep": run_qpic_phase_sweep,
}


def run_scenario(cfg: ScenarioConfig) -> list[ResultTable]:
    return _RUNNERS[cfg.scenario](cfg)


def convergence_check(cfg: ScenarioConfig, tolerance: float | None = None) -> dict:
    """Rerun the scenario at cutoffs {N, N-2} and bound the truncation error.

    Returns max |delta n| and max |delta g2| over all shared, defined
    entries, plus a pass flag against the configured tolerance.
    """
    tol = cfg.convergence_tol if tolerance is None else tolerance
    n_hi = cfg.engine.cutoff
    if n_hi - 2 < 1:
        raise ConfigError("convergence check needs cutoff >= 3")
    import copy

    cfg_lo = copy.deepcopy(cfg)
    cfg_lo.engine.cutoff = n_hi - 2
    tables_hi = run_scenario(cfg)
    tables_lo = run_scenario(cfg_lo)
    max_dn = 0.0
    max_dg2 = 0.0
    for thi, tlo in zip(tables_hi, tables_lo):
        for rhi, rlo in zip(thi.reports, tlo.reports):
            if rhi is None or rlo is None:
                continue
            max_dn = max(max_dn, float(np.max(np.abs(rhi.intensities - rlo.intensities))))
            both = ~np.isnan(rhi.g2) & ~np.isnan(rlo.g2)
            if both.any():
                max_dg2 = max(max_dg2, float(np.max(np.abs(rhi.g2[both] - rlo.g2[both]))))
    return {
        "cutoff_hi": n_hi,
        "cutoff_lo": n_hi - 2,
        "max_delta_n": max_dn,
        "max_delta_g2": max_dg2,
        "tolerance": tol,
        "passed": bool(max_dn <= tol and max_dg2 <= tol),
    }
