"""Photon-counting statistics: intensities, the normally ordered g2 matrix,
and Monte-Carlo error bars.

g2_{lm} = <a_l+ a_m+ a_m a_l> / (n_l n_m); on the diagonal the numerator is
<n(n-1)>, off the diagonal <n_l n_m>. Everything here is diagonal in the Fock
basis, so expectations reduce to weighted sums over |amplitude|^2 (pure
states) or the density-matrix diagonal. Ensemble g2 is always the ratio of
ensemble-averaged moments, never an average of per-trajectory ratios.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import EnsembleResult
from .fock import FockCutoff, MultiModeState, number_operator_diagonals

__all__ = ["ObservableReport", "intensity", "g2_entry", "report", "report_from_state"]

INTENSITY_FLOOR = 1e-12


@dataclass
class ObservableReport:
    """Per-mode intensities, the symmetric g2 matrix, and their errors.

    Entries whose intensity product falls below the floor are NaN and listed
    in ``suppressed``. ``se_*`` are zero for deterministic evaluation routes.
    """

    intensities: np.ndarray
    g2: np.ndarray
    se_intensities: np.ndarray
    se_g2: np.ndarray
    floor: float
    suppressed: list[tuple[int, int]]
    meta: dict = field(default_factory=dict)


def _probs_any(state, num_modes=None, cutoff=None):
    """Fock-basis probability vector of a pure state or density matrix."""
    if isinstance(state, MultiModeState):
        return np.abs(state.amplitudes) ** 2, state.num_modes, state.cutoff
    rho = np.asarray(state)
    if num_modes is None or cutoff is None:
        raise ValueError("num_modes and cutoff are required for density-matrix input")
    return np.real(np.diag(rho)), num_modes, cutoff


def intensity(state, l: int, num_modes: int | None = None, cutoff: FockCutoff | None = None) -> float:
    """<n_l> of a pure state or density matrix."""
    p, nm, co = _probs_any(state, num_modes, cutoff)
    if not 0 <= l < nm:
        raise ValueError(f"mode {l} out of range")
    nv = number_operator_diagonals(nm, co)[l]
    return float(p @ nv)


def g2_entry(
    state,
    l: int,
    m: int,
    num_modes: int | None = None,
    cutoff: FockCutoff | None = None,
    floor: float = INTENSITY_FLOOR,
) -> float:
    """g2_{lm}; raises if the intensity product sits below the floor."""
    p, nm, co = _probs_any(state, num_modes, cutoff)
    nvecs = number_operator_diagonals(nm, co)
    nl = float(p @ nvecs[l])
    nmm = float(p @ nvecs[m])
    if nl * nmm <= floor:
        raise ValueError(
            f"g2_({l},{m}) undefined: intensity product {nl * nmm:.3g} below floor {floor:.3g}"
        )
    if l == m:
        num = float(p @ (nvecs[l] * (nvecs[l] - 1.0)))
    else:
        num = float(p @ (nvecs[l] * nvecs[m]))
    return num / (nl * nmm)


def _unpack_moments(num_modes: int, vec: np.ndarray):
    """Split a raw-moment vector into intensities and the pair-numerator map."""
    ns = vec[:num_modes]
    pairs = [(l, m) for l in range(num_modes) for m in range(l, num_modes)]
    nums = {pair: vec[num_modes + i] for i, pair in enumerate(pairs)}
    return ns, nums, pairs


def _g2_from_moments(num_modes: int, vec: np.ndarray, floor: float):
    ns, nums, _ = _unpack_moments(num_modes, vec)
    g2 = np.full((num_modes, num_modes), np.nan)
    suppressed = []
    for (l, m), num in nums.items():
        prod = ns[l] * ns[m]
        if prod <= floor:
            suppressed.append((l, m))
            continue
        g2[l, m] = g2[m, l] = num / prod
    return ns.copy(), g2, suppressed


def _delta_se(num_modes: int, mean: np.ndarray, cov_mean: np.ndarray, floor: float):
    """Delta-method errors for the intensity and g2 ratio estimators."""
    ns, nums, pairs = _unpack_moments(num_modes, mean)
    se_n = np.sqrt(np.maximum(np.diag(cov_mean)[:num_modes], 0.0))
    se_g2 = np.full((num_modes, num_modes), np.nan)
    for i, (l, m) in enumerate(pairs):
        prod = ns[l] * ns[m]
        if prod <= floor:
            continue
        num = nums[(l, m)]
        grad = np.zeros(mean.size)
        grad[num_modes + i] = 1.0 / prod
        if l == m:
            grad[l] += -2.0 * num / (ns[l] ** 3)
        else:
            grad[l] += -num / (ns[l] ** 2 * ns[m])
            grad[m] += -num / (ns[l] * ns[m] ** 2)
        var = float(grad @ cov_mean @ grad)
        se_g2[l, m] = se_g2[m, l] = np.sqrt(max(var, 0.0))
    return se_n, se_g2


def _jackknife_se(ensemble: EnsembleResult, floor: float):
    """Delete-one-trajectory jackknife over the distinct branch leaves."""
    counts = np.asarray(ensemble.leaf_weights) * ensemble.n_traj
    vs = np.asarray(ensemble.leaf_moments)
    n = ensemble.n_traj
    total = ensemble.moment_sum * n  # un-normalized sum over trajectories
    L = ensemble.num_modes
    pairs = [(l, m) for l in range(L) for m in range(l, L)]

    def g2_of(vec):
        _, g2, _ = _g2_from_moments(L, vec, floor)
        return g2

    full = g2_of(ensemble.moment_sum)
    se2_g2 = np.zeros((L, L))
    se2_n = np.zeros(L)
    n_full = ensemble.moment_sum[:L]
    for v, c in zip(vs, counts):
        loo = (total - v) / (n - 1)  # mean after deleting one member of this leaf
        diff_n = loo[:L] - n_full
        se2_n += c * diff_n**2
        g2_loo = g2_of(loo)
        diff = g2_loo - full
        diff = np.where(np.isnan(diff), 0.0, diff)
        se2_g2 += c * diff**2
    factor = (n - 1) / n
    return np.sqrt(factor * se2_n), np.sqrt(factor * se2_g2)


def report(
    ensemble: EnsembleResult,
    floor: float = INTENSITY_FLOOR,
    se_method: str = "delta",
) -> ObservableReport:
    """Form the intensity/g2 report from accumulated ensemble moments."""
    if ensemble.total_weight <= 0:
        raise ValueError("ensemble carries no weight")
    mean = ensemble.moment_sum / ensemble.total_weight
    ns, g2, suppressed = _g2_from_moments(ensemble.num_modes, mean, floor)
    L = ensemble.num_modes
    if ensemble.mode == "sampling" and ensemble.n_traj and ensemble.n_traj > 1:
        if se_method == "jackknife":
            se_n, se_g2 = _jackknife_se(ensemble, floor)
        else:
            second = ensemble.moment_outer / ensemble.total_weight
            cov_mean = (second - np.outer(mean, mean)) / (ensemble.n_traj - 1)
            se_n, se_g2 = _delta_se(L, mean, cov_mean, floor)
    else:
        se_n = np.zeros(L)
        se_g2 = np.zeros((L, L))
        se_g2[np.isnan(g2)] = np.nan
    meta = {
        "engine_mode": ensemble.mode,
        "cutoff": ensemble.max_photons,
        "n_traj": ensemble.n_traj,
        "seed": ensemble.seed,
        "threshold": ensemble.threshold,
        "pruned_weight": ensemble.pruned_weight,
        "n_leaves": ensemble.n_leaves,
        "se_method": se_method,
    }
    return ObservableReport(ns, g2, se_n, se_g2, floor, suppressed, meta)


def report_from_state(
    state,
    num_modes: int | None = None,
    cutoff: FockCutoff | None = None,
    floor: float = INTENSITY_FLOOR,
    meta: dict | None = None,
) -> ObservableReport:
    """Exact single-state (or density-matrix) report; standard errors are zero."""
    p, nm, co = _probs_any(state, num_modes, cutoff)
    nvecs = number_operator_diagonals(nm, co)
    vec = np.empty(nm + nm * (nm + 1) // 2)
    for l in range(nm):
        vec[l] = p @ nvecs[l]
    i = nm
    for l in range(nm):
        for m in range(l, nm):
            vec[i] = p @ (nvecs[l] * (nvecs[l] - 1.0)) if l == m else p @ (nvecs[l] * nvecs[m])
            i += 1
    ns, g2, suppressed = _g2_from_moments(nm, vec, floor)
    se_g2 = np.zeros((nm, nm))
    se_g2[np.isnan(g2)] = np.nan
    base_meta = {"engine_mode": "exact", "cutoff": co.max_photons, "pruned_weight": 0.0}
    if meta:
        base_meta.update(meta)
    return ObservableReport(ns, g2, np.zeros(nm), se_g2, floor, suppressed, base_meta)
