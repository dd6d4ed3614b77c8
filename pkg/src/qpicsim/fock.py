"""Truncated Fock-space representation of multimode bosonic states.

States live on L modes with a common local cutoff N (dimension d = N + 1).
Amplitudes are stored as a flat complex vector indexed row-major over the
occupations (n_0, ..., n_{L-1}) with mode 0 the slowest index, so two-mode
gates on adjacent modes act on contiguous blocks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FockCutoff",
    "MultiModeState",
    "CoherentInput",
    "coherent_state",
    "product_state",
    "ladder_matrices",
    "number_operator_diagonals",
    "mode_index",
    "index_occupations",
]


@dataclass(frozen=True)
class FockCutoff:
    """Local Fock truncation: occupations run over 0..max_photons."""

    max_photons: int

    def __post_init__(self):
        if self.max_photons < 1:
            raise ValueError(f"max_photons must be >= 1, got {self.max_photons}")

    @property
    def dim(self) -> int:
        return self.max_photons + 1


@dataclass
class MultiModeState:
    """Pure state of ``num_modes`` bosonic modes on a truncated Fock space.

    ``norm_leakage`` records the probability weight discarded when the state
    was prepared (coherent-state tails beyond the cutoff); the stored
    amplitudes themselves are always renormalized to unit norm.
    """

    num_modes: int
    cutoff: FockCutoff
    amplitudes: np.ndarray
    norm_leakage: float = 0.0

    def __post_init__(self):
        if self.num_modes < 1:
            raise ValueError("num_modes must be >= 1")
        expected = self.cutoff.dim**self.num_modes
        if self.amplitudes.shape != (expected,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, expected ({expected},)"
            )

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "MultiModeState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        self.amplitudes = self.amplitudes / n
        return self

    def copy(self) -> "MultiModeState":
        return MultiModeState(
            self.num_modes, self.cutoff, self.amplitudes.copy(), self.norm_leakage
        )


@dataclass(frozen=True)
class CoherentInput:
    """Per-mode coherent amplitudes defining a product-state input."""

    alphas: tuple[complex, ...] = field(default_factory=tuple)

    def __post_init__(self):
        arr = np.asarray(self.alphas, dtype=complex)
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("coherent amplitudes must be finite")

    @property
    def num_modes(self) -> int:
        return len(self.alphas)


def _check_truncation_quality(alpha: complex, cutoff: FockCutoff) -> None:
    # |alpha|^2 <= N/2 keeps the Poisson tail beyond the cutoff negligible.
    if abs(alpha) ** 2 > cutoff.max_photons / 2:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha)**2:.3g} exceeds max_photons/2 = "
            f"{cutoff.max_photons / 2:.3g}; truncation error may be significant",
            stacklevel=3,
        )


def coherent_state(alpha: complex, cutoff: FockCutoff) -> tuple[np.ndarray, float]:
    """Truncated coherent state |alpha> and the discarded tail weight.

    Amplitudes are proportional to e^{-|a|^2/2} a^n / sqrt(n!) for
    n = 0..N and renormalized to unit norm; the returned leakage is the
    Poisson tail probability sum_{n>N} P(n).
    """
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    _check_truncation_quality(alpha, cutoff)
    n = np.arange(cutoff.dim)
    # log-domain for the factorials; exact for alpha = 0
    if alpha == 0:
        amps = np.zeros(cutoff.dim, dtype=complex)
        amps[0] = 1.0
        return amps, 0.0
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff.dim)))))
    amps = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt(np.exp(log_fact))
    kept = float(np.vdot(amps, amps).real)
    leakage = max(0.0, 1.0 - kept)
    return amps / math.sqrt(kept), leakage


def product_state(inputs: CoherentInput, cutoff: FockCutoff) -> MultiModeState:
    """Tensor product of single-mode coherent states."""
    if inputs.num_modes < 1:
        raise ValueError("need at least one mode")
    total_kept = 1.0
    psi = None
    for alpha in inputs.alphas:
        amps, leak = coherent_state(alpha, cutoff)
        total_kept *= 1.0 - leak
        psi = amps if psi is None else np.kron(psi, amps)
    return MultiModeState(inputs.num_modes, cutoff, psi, norm_leakage=1.0 - total_kept)


def ladder_matrices(cutoff: FockCutoff) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(a, a_dagger, n) on the truncated local space; a|n> = sqrt(n)|n-1>."""
    d = cutoff.dim
    a = np.zeros((d, d), dtype=complex)
    rows = np.arange(d - 1)
    a[rows, rows + 1] = np.sqrt(rows + 1.0)
    return a, a.conj().T, np.diag(np.arange(d, dtype=float).astype(complex))


_NUMBER_DIAG_CACHE: dict[tuple[int, int], list[np.ndarray]] = {}


def number_operator_diagonals(num_modes: int, cutoff: FockCutoff) -> list[np.ndarray]:
    """Occupation n_l of every flat basis index, one float vector per mode.

    Cached per (num_modes, cutoff): sweeps evaluate these against thousands
    of states.
    """
    key = (num_modes, cutoff.max_photons)
    cached = _NUMBER_DIAG_CACHE.get(key)
    if cached is not None:
        return cached
    d = cutoff.dim
    out = []
    for l in range(num_modes):
        shape = [1] * num_modes
        shape[l] = d
        nl = np.arange(d, dtype=float).reshape(shape)
        vec = np.broadcast_to(nl, (d,) * num_modes).reshape(-1).copy()
        vec.setflags(write=False)
        out.append(vec)
    _NUMBER_DIAG_CACHE[key] = out
    return out


def mode_index(occupations: tuple[int, ...] | list[int], cutoff: FockCutoff) -> int:
    """Row-major flat index of an occupation tuple (mode 0 slowest)."""
    d = cutoff.dim
    idx = 0
    for n in occupations:
        if not 0 <= n <= cutoff.max_photons:
            raise ValueError(f"occupation {n} outside 0..{cutoff.max_photons}")
        idx = idx * d + n
    return idx


def index_occupations(index: int, num_modes: int, cutoff: FockCutoff) -> tuple[int, ...]:
    """Inverse of :func:`mode_index`."""
    d = cutoff.dim
    if not 0 <= index < d**num_modes:
        raise ValueError(f"index {index} outside the {num_modes}-mode space")
    occ = []
    for _ in range(num_modes):
        occ.append(index % d)
        index //= d
    return tuple(reversed(occ))
