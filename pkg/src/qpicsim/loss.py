"""Bosonic amplitude damping as a truncated Kraus-operator set.

The l-photon-loss branch operator is

    L_l = sqrt(kappa^l / l!) (1 - kappa)^{n/2} a^l,

with kappa the loss probability over one layer. Truncating the branch index
at l_max < N leaves the set incomplete; the deficiency is recorded so the
sampler can fold it into the no-click branch (or discard it, behind a flag).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .fock import FockCutoff, ladder_matrices

__all__ = ["KrausSet", "kraus_amplitude_damping", "db_to_eta", "kappa_from_rate"]


@dataclass(frozen=True)
class KrausSet:
    """Amplitude-damping branch operators L_0..L_{l_max} on one local space."""

    kappa: float
    l_max: int
    operators: tuple[np.ndarray, ...]
    completeness_deficiency: float

    @property
    def num_branches(self) -> int:
        return len(self.operators)


def kraus_amplitude_damping(kappa: float, l_max: int, cutoff: FockCutoff) -> KrausSet:
    """Kraus set for photon loss with probability ``kappa`` per interval.

    ``l_max`` is the largest number of loss events kept; l_max = N gives a
    complete set (deficiency below 1e-10 at any kappa).
    """
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    d = cutoff.dim
    a, _, _ = ladder_matrices(cutoff)
    n = np.arange(d, dtype=float)
    # (1-kappa)^{n/2}; at kappa = 1 only the vacuum row survives
    damp = (1.0 - kappa) ** (n / 2.0)
    ops = []
    a_pow = np.eye(d, dtype=complex)
    for l in range(min(l_max, cutoff.max_photons) + 1):
        coeff = math.sqrt(kappa**l / math.factorial(l))
        ops.append(coeff * (damp[:, np.newaxis] * a_pow))
        a_pow = a_pow @ a
    total = sum(op.conj().T @ op for op in ops)
    deficiency = float(np.max(np.abs(np.eye(d) - total)))
    return KrausSet(kappa, l_max, tuple(ops), deficiency)


def db_to_eta(db: float) -> tuple[float, float]:
    """Transmissivity eta = 10^{-dB/10} and the loss probability kappa = 1 - eta."""
    if db < 0:
        raise ValueError(f"dB loss must be >= 0, got {db}")
    eta = 10.0 ** (-db / 10.0)
    return eta, 1.0 - eta


def kappa_from_rate(gamma: float, dt: float) -> float:
    """kappa = gamma * dt for a Markovian layer of duration dt (ps)."""
    if gamma < 0:
        raise ValueError(f"loss rate must be >= 0, got {gamma}")
    if dt <= 0:
        raise ValueError(f"layer time must be > 0, got {dt}")
    kappa = gamma * dt
    if kappa > 1.0:
        raise ContractViolation(
            f"kappa = gamma*dt = {kappa:.4g} > 1: layer time too long for a Markovian step"
        )
    return kappa
