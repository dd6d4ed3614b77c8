"""Waveguide polariton physics: dispersion, Hopfield fractions, and the map
from material parameters to dimensionless gate exposures (J dt, U dt).

Two dispersion variants are supported. The coupled-oscillator model couples a
linear bare-photon branch E_c(k) = E_0 + s_ph k to a flat exciton line E_x
with Rabi splitting hbar*Omega; the lower branch is

    E_LP(k) = (E_c + E_x)/2 - sqrt((E_c - E_x)^2 + (hbar Omega)^2)/2.

The tabulated variant interpolates measured (k, E_LP) samples with a monotone
cubic (PCHIP) and differentiates the interpolant for the group velocity.

The pulse nonlinear rate follows from the exciton fraction and the overlap of
a rigid Gaussian envelope of spatial width sigma_z = v_g sigma_t:

    U(k) = u_k^4 (g_exc / hbar) / (2 sqrt(pi) sigma_z a_perp),

with a_perp one effective transverse-overlap constant. Its default is fixed
by requiring U dt = 0.005 for hbar g = 50 ueV um^2 over a 1 mm waveguide at
u^2 = 0.3, v_g = 40 um/ps, sigma_t = 1 ps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "HBAR",
    "DispersionModel",
    "PolaritonParams",
    "GateBudget",
    "lp_energy",
    "exciton_fraction",
    "group_velocity",
    "calibrate_dispersion",
    "nonlinear_rate",
    "nonlinear_rate_direct",
    "gate_budget",
    "gate_budget_direct",
    "default_params",
    "load_tabulated_csv",
]

HBAR = 0.6582119  # energy (ueV or meV) x ps, matching the unit of the paired energy

DEFAULT_RABI_MEV = 6.0
DEFAULT_EXCITON_MEV = 1526.0  # absolute scale is irrelevant; only E_c - E_x enters


@dataclass(frozen=True)
class DispersionModel:
    """Lower-polariton dispersion, coupled-oscillator or tabulated."""

    variant: str  # "coupled_oscillator" | "tabulated"
    exciton_energy: float = DEFAULT_EXCITON_MEV  # meV
    rabi: float = DEFAULT_RABI_MEV  # meV
    photon_offset: float = 0.0  # E_0, meV (coupled_oscillator)
    photon_slope: float = 0.0  # s_ph, meV um (coupled_oscillator)
    k_table: np.ndarray | None = None  # 1/um, strictly increasing (tabulated)
    e_table: np.ndarray | None = None  # meV (tabulated)
    _interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.rabi <= 0:
            raise ValueError("Rabi splitting must be positive")
        if self.variant == "tabulated":
            k = np.asarray(self.k_table, dtype=float)
            e = np.asarray(self.e_table, dtype=float)
            if k.ndim != 1 or k.size < 4 or e.shape != k.shape:
                raise ValueError("tabulated dispersion needs >= 4 matched samples")
            if not np.all(np.isfinite(k)) or not np.all(np.isfinite(e)):
                raise ValueError("tabulated dispersion contains non-finite entries")
            if np.any(np.diff(k) <= 0):
                raise ValueError("tabulated k samples must be strictly increasing")
            object.__setattr__(self, "_interp", PchipInterpolator(k, e))
        elif self.variant != "coupled_oscillator":
            raise ValueError(f"unknown dispersion variant {self.variant!r}")

    @property
    def photon_velocity(self) -> float:
        """Bare photonic group velocity s_ph / hbar in um/ps."""
        return self.photon_slope / HBAR

    def _check_range(self, k: float) -> None:
        if self.variant == "tabulated":
            if not self.k_table[0] <= k <= self.k_table[-1]:
                raise ValueError(
                    f"k = {k} outside the tabulated range "
                    f"[{self.k_table[0]}, {self.k_table[-1]}]"
                )


@dataclass(frozen=True)
class PolaritonParams:
    """Material and pulse data feeding the gate-budget map.

    g_exc carries hbar*g in ueV um^2; a_perp is the inverse transverse
    overlap integral in um; sigma_t the pulse duration in ps.
    """

    dispersion: DispersionModel
    g_exc: float = 10.0
    sigma_t: float = 1.0
    a_perp: float = 241.0748276851368
    hbar: float = HBAR

    def __post_init__(self):
        if self.g_exc < 0:
            raise ValueError("g_exc must be >= 0")
        if self.sigma_t <= 0 or self.a_perp <= 0:
            raise ValueError("sigma_t and a_perp must be positive")


@dataclass(frozen=True)
class GateBudget:
    dt: float  # ps
    j_dt: float
    u_dt: float
    sigma_z: float  # um


def lp_energy(k: float, model: DispersionModel) -> float:
    """Lower-polariton energy in meV."""
    model._check_range(k)
    if model.variant == "tabulated":
        return float(model._interp(k))
    e_c = model.photon_offset + model.photon_slope * k
    e_x = model.exciton_energy
    return 0.5 * (e_c + e_x) - 0.5 * math.hypot(e_c - e_x, model.rabi)


def _detuning(k: float, model: DispersionModel) -> float:
    """E_c(k) - E_x; recovered from the lower branch for tabulated data."""
    if model.variant == "coupled_oscillator":
        return model.photon_offset + model.photon_slope * k - model.exciton_energy
    y = lp_energy(k, model) - model.exciton_energy
    if y >= 0:
        raise ValueError("tabulated lower branch must lie below the exciton line")
    return y - model.rabi**2 / (4.0 * y)


def exciton_fraction(k: float, model: DispersionModel) -> float:
    """Hopfield exciton weight u_k^2 in (0, 1); u^2 + v^2 = 1."""
    model._check_range(k)
    delta = _detuning(k, model)
    return 0.5 * (1.0 + delta / math.hypot(delta, model.rabi))


def group_velocity(k: float, model: DispersionModel) -> float:
    """v_g = (1/hbar) dE_LP/dk in um/ps."""
    model._check_range(k)
    if model.variant == "tabulated":
        return float(model._interp.derivative()(k)) / HBAR
    # analytic: dE_LP/dk = s_ph * (1 - u_k^2)
    return model.photon_velocity * (1.0 - exciton_fraction(k, model))


def calibrate_dispersion(
    rabi: float = DEFAULT_RABI_MEV,
    k_anchor: float = 0.23,
    exciton_fraction_anchor: float = 0.3,
    group_velocity_anchor: float = 40.0,
    exciton_energy: float = DEFAULT_EXCITON_MEV,
) -> tuple[DispersionModel, dict]:
    """Solve the coupled-oscillator model through the anchor point.

    The anchor fixes (photon_slope, photon_offset) in closed form; the
    returned residuals re-evaluate the anchors through the public operations
    as a self-consistency check.
    """
    u2 = exciton_fraction_anchor
    if not 0.0 < u2 < 1.0:
        raise ValueError("anchor exciton fraction must lie in (0, 1)")
    if group_velocity_anchor <= 0:
        raise ValueError("anchor group velocity must be positive")
    x = 2.0 * u2 - 1.0
    delta_anchor = rabi * x / math.sqrt(1.0 - x * x)
    slope = HBAR * group_velocity_anchor / (1.0 - u2)
    offset = exciton_energy + delta_anchor - slope * k_anchor
    model = DispersionModel(
        variant="coupled_oscillator",
        exciton_energy=exciton_energy,
        rabi=rabi,
        photon_offset=offset,
        photon_slope=slope,
    )
    residuals = {
        "exciton_fraction": exciton_fraction(k_anchor, model) - u2,
        "group_velocity": group_velocity(k_anchor, model) - group_velocity_anchor,
    }
    if max(abs(r) for r in residuals.values()) > 1e-9:
        raise RuntimeError(f"calibration did not close: residuals {residuals}")
    return model, residuals


def nonlinear_rate_direct(u2: float, vg: float, params: PolaritonParams) -> float:
    """Pulse nonlinear rate U in 1/ps from an explicit (u^2, v_g) pair.

    Used by the slow-light scans, where v_g is dispersion-engineered
    independently of the exciton fraction.
    """
    if vg <= 0:
        raise ValueError(f"group velocity must be positive, got {vg}")
    sigma_z = vg * params.sigma_t
    overlap = 1.0 / (2.0 * math.sqrt(math.pi) * sigma_z * params.a_perp)
    return (u2**2) * (params.g_exc / params.hbar) * overlap


def nonlinear_rate(k: float, params: PolaritonParams) -> float:
    """Pulse nonlinear rate U(k) in 1/ps on the lower branch."""
    model = params.dispersion
    return nonlinear_rate_direct(
        exciton_fraction(k, model), group_velocity(k, model), params
    )


def gate_budget(
    k: float,
    dx: float,
    params: PolaritonParams,
    j_design: str = "photonic-calibrated",
    j_dt_design: float = math.pi / 6.0,
) -> GateBudget:
    """Dimensionless gate exposures for a layer of length dx at wavevector k.

    j_design "photonic-calibrated" keeps the physical coupling J fixed at the
    value giving ``j_dt_design`` in the photonic limit, so J dt rescales with
    the slowed transit; "fixed" pins J dt itself for every k.
    """
    if dx <= 0:
        raise ValueError("dx must be positive")
    model = params.dispersion
    vg = group_velocity(k, model)
    if vg <= 0:
        raise ValueError(f"group velocity must be positive on the LP branch, got {vg}")
    dt = dx / vg
    if j_design == "photonic-calibrated":
        if model.variant == "coupled_oscillator":
            v_ph = model.photon_velocity
        else:
            # photonic limit read off at the low-k end of the table
            v_ph = group_velocity(model.k_table[0], model) / (
                1.0 - exciton_fraction(model.k_table[0], model)
            )
        j_dt = j_dt_design * v_ph / vg
    elif j_design == "fixed":
        j_dt = j_dt_design
    else:
        raise ValueError(f"unknown j_design {j_design!r}")
    u_dt = nonlinear_rate(k, params) * dt
    return GateBudget(dt=dt, j_dt=j_dt, u_dt=u_dt, sigma_z=vg * params.sigma_t)


def gate_budget_direct(
    u2: float,
    vg: float,
    dx: float,
    params: PolaritonParams,
    j_dt_design: float = math.pi / 6.0,
) -> GateBudget:
    """Gate exposures at an engineered (u^2, v_g) point with J dt held fixed."""
    if dx <= 0:
        raise ValueError("dx must be positive")
    dt = dx / vg
    u_dt = nonlinear_rate_direct(u2, vg, params) * dt
    return GateBudget(dt=dt, j_dt=j_dt_design, u_dt=u_dt, sigma_z=vg * params.sigma_t)


def default_params(g_exc: float = 10.0) -> PolaritonParams:
    """Calibrated dispersion plus the reference transverse-overlap constant."""
    model, _ = calibrate_dispersion()
    return PolaritonParams(dispersion=model, g_exc=g_exc)


def load_tabulated_csv(
    source, exciton_energy: float = DEFAULT_EXCITON_MEV, rabi: float = DEFAULT_RABI_MEV
) -> DispersionModel:
    """Read a tabulated dispersion from CSV with header ``k_invmicron,E_meV``.

    Parsing is strict: the header must match, values must be finite, and the
    wavevector column strictly increasing.
    """
    if isinstance(source, (str, bytes)):
        fh = open(source, newline="")
        close = True
    else:
        fh = source
        close = False
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["k_invmicron", "E_meV"]:
            raise ValueError(f"expected header 'k_invmicron,E_meV', got {header}")
        ks, es = [], []
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"malformed row {row}")
            k, e = float(row[0]), float(row[1])
            if not (math.isfinite(k) and math.isfinite(e)):
                raise ValueError(f"non-finite entry in row {row}")
            ks.append(k)
            es.append(e)
    finally:
        if close:
            fh.close()
    return DispersionModel(
        variant="tabulated",
        exciton_energy=exciton_energy,
        rabi=rabi,
        k_table=np.asarray(ks),
        e_table=np.asarray(es),
    )
