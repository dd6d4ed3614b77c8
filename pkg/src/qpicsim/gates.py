"""Builders for the bosonic circuit gates.

All gates are constructed by exponentiating the truncated generator, so every
matrix returned here is exactly unitary on the truncated space regardless of
the cutoff. Diagonal gates are written down directly. Construction is cached
per exact parameter tuple because parameter sweeps reuse the same few gates
across thousands of states.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .fock import FockCutoff, ladder_matrices

__all__ = [
    "GateMatrix",
    "GateParams",
    "build_dielectric_bs",
    "build_symmetric_bs",
    "build_kerr",
    "build_mzi_arm",
    "build_nonlinear_coupler",
    "build_phase",
    "unitarity_defect",
    "clear_gate_cache",
]


@dataclass(frozen=True)
class GateMatrix:
    """Dense gate acting on one or two modes of the truncated Fock space."""

    arity: int
    matrix: np.ndarray
    label: str

    @property
    def local_dim(self) -> int:
        return round(self.matrix.shape[0] ** (1.0 / self.arity))


@dataclass(frozen=True)
class GateParams:
    """Dimensionless gate parameters used by the scenario layer."""

    theta: float = 0.0
    phi: float = 0.0
    j_dt: float = 0.0
    u_dt: float = 0.0
    delta_dt: float = 0.0  # detuning x time; 0 for on-resonance excitation

    def __post_init__(self):
        vals = (self.theta, self.phi, self.j_dt, self.u_dt, self.delta_dt)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"gate parameters must be finite, got {vals}")


_CACHE: "OrderedDict[tuple, GateMatrix]" = OrderedDict()
_CACHE_MAX = 128  # LRU bound; phase sweeps would otherwise pin one matrix per point


def clear_gate_cache() -> None:
    _CACHE.clear()


def _cached(key: tuple, builder) -> GateMatrix:
    gate = _CACHE.get(key)
    if gate is None:
        gate = builder()
        gate.matrix.setflags(write=False)
        _CACHE[key] = gate
        if len(_CACHE) > _CACHE_MAX:
            _CACHE.popitem(last=False)
    else:
        _CACHE.move_to_end(key)
    return gate


def _expi_hermitian(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(i * scale * h) for Hermitian h via eigendecomposition (exactly unitary)."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * scale * w)) @ v.conj().T


def _two_mode_ladders(cutoff: FockCutoff) -> tuple[np.ndarray, np.ndarray]:
    a, _, _ = ladder_matrices(cutoff)
    eye = np.eye(cutoff.dim)
    return np.kron(a, eye), np.kron(eye, a)


def _occupations_2mode(cutoff: FockCutoff) -> tuple[np.ndarray, np.ndarray]:
    d = cutoff.dim
    return (
        np.repeat(np.arange(d, dtype=float), d),
        np.tile(np.arange(d, dtype=float), d),
    )


def build_dielectric_bs(theta: float, cutoff: FockCutoff) -> GateMatrix:
    """Dielectric beam splitter: rotation exp{theta (a0+ a1 - a0 a1+)} applied
    after a pi phase on mode 1 (the phase factor acts first)."""

    def make():
        a0, a1 = _two_mode_ladders(cutoff)
        # anti-Hermitian generator G; exponentiate H = -iG
        g = theta * (a0.conj().T @ a1 - a0 @ a1.conj().T)
        rot = _expi_hermitian(1j * g, -1.0)
        _, n1 = _occupations_2mode(cutoff)
        phase = np.exp(1j * np.pi * n1)
        return GateMatrix(2, rot * phase[np.newaxis, :], f"BS_diel(theta={theta})")

    return _cached(("diel_bs", float(theta), cutoff.max_photons), make)


def build_symmetric_bs(theta: float, cutoff: FockCutoff) -> GateMatrix:
    """Symmetric coupler exp{i theta (a0+ a1 + a0 a1+)}."""

    def make():
        a0, a1 = _two_mode_ladders(cutoff)
        hop = a0.conj().T @ a1
        h = hop + hop.conj().T
        return GateMatrix(2, _expi_hermitian(h, theta), f"BS_sym(theta={theta})")

    return _cached(("sym_bs", float(theta), cutoff.max_photons), make)


def build_kerr(u_dt: float, delta_dt: float, cutoff: FockCutoff) -> GateMatrix:
    """Single-mode Kerr gate, diagonal phases exp{-i[-delta_dt n + (u_dt/2) n(n-1)]}."""

    def make():
        n = np.arange(cutoff.dim, dtype=float)
        diag = np.exp(-1j * (-delta_dt * n + 0.5 * u_dt * n * (n - 1)))
        return GateMatrix(1, np.diag(diag), f"Kerr(u_dt={u_dt},delta_dt={delta_dt})")

    return _cached(("kerr", float(u_dt), float(delta_dt), cutoff.max_photons), make)


def build_mzi_arm(u_dt: float, phi_lo: float, cutoff: FockCutoff) -> GateMatrix:
    """Interferometer interior: Kerr on mode 0, local-oscillator phase on mode 1."""

    def make():
        n0, n1 = _occupations_2mode(cutoff)
        diag = np.exp(-1j * (0.5 * u_dt * n0 * (n0 - 1) + phi_lo * n1))
        return GateMatrix(2, np.diag(diag), f"MZIarm(u_dt={u_dt},phi_lo={phi_lo})")

    return _cached(("mzi_arm", float(u_dt), float(phi_lo), cutoff.max_photons), make)


def build_nonlinear_coupler(
    j_dt: float, u_dt: float, delta_dt: float, cutoff: FockCutoff
) -> GateMatrix:
    """Two-mode nonlinear coupler exp{-i H dt} with

        H dt = -delta_dt (n0 + n1) - j_dt (a1+ a0 + a0 a1+)
               + (u_dt/2) (a0+^2 a0^2 + a1+^2 a1^2).
    """

    def make():
        a0, a1 = _two_mode_ladders(cutoff)
        n0, n1 = _occupations_2mode(cutoff)
        hop = a1.conj().T @ a0
        h = -j_dt * (hop + hop.conj().T)
        h += np.diag(
            -delta_dt * (n0 + n1)
            + 0.5 * u_dt * (n0 * (n0 - 1) + n1 * (n1 - 1))
        ).astype(complex)
        mat = _expi_hermitian(h, -1.0)
        return GateMatrix(2, mat, f"NLC(j_dt={j_dt},u_dt={u_dt},delta_dt={delta_dt})")

    return _cached(
        ("nlc", float(j_dt), float(u_dt), float(delta_dt), cutoff.max_photons), make
    )


def build_phase(phi: float, cutoff: FockCutoff) -> GateMatrix:
    """Single-mode phase gate, diagonal exp{-i phi n}."""

    def make():
        n = np.arange(cutoff.dim, dtype=float)
        return GateMatrix(1, np.diag(np.exp(-1j * phi * n)), f"Phase(phi={phi})")

    return _cached(("phase", float(phi), cutoff.max_photons), make)


def unitarity_defect(gate: GateMatrix) -> float:
    """Max-norm of U+ U - I."""
    u = gate.matrix
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
