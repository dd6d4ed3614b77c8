"""Evolution of multimode states through layered gate/loss circuits.

Three evaluation routes share one circuit description:

* deterministic unitary evolution (``evolve_state``) for lossless layouts,
* stochastic trajectories over Kraus branches (``run_trajectory`` /
  ``run_ensemble`` in sampling mode),
* deterministic weighted branch enumeration with pruning
  (``run_ensemble`` in branch-enum mode),

plus an exact density-matrix oracle (``exact_density_evolution``) for one- or
two-mode circuits, used to validate the stochastic routes.

Sampling is implemented as a depth-first walk of the Kraus branch tree in
which trajectories that made identical choices share the evolved state. Each
trajectory owns an RNG stream derived from (seed, trajectory index) and
consumes exactly one uniform per loss event, so the merged walk is
bit-identical to evolving the trajectories one by one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .fock import FockCutoff, MultiModeState, number_operator_diagonals
from .gates import GateMatrix
from .loss import KrausSet, kraus_amplitude_damping

__all__ = [
    "LossSpec",
    "Layer",
    "CircuitLayout",
    "SamplingMode",
    "BranchEnumMode",
    "TrajectoryRecord",
    "EnsembleResult",
    "apply_gate",
    "apply_gate_array",
    "sample_loss",
    "run_trajectory",
    "run_ensemble",
    "evolve_state",
    "exact_density_evolution",
]

DEGENERATE_NORM_TOL = 1e-14
TRACE_TOL = 1e-10


@dataclass(frozen=True)
class LossSpec:
    """Per-layer amplitude damping: one kappa per mode (0 disables a mode).

    ``l_max = None`` defers to the engine route: sampling keeps the default
    two loss events per mode and interval, while branch enumeration and the
    density oracle use the complete set. ``fold_deficiency`` folds the weight
    of the truncated branches into the no-click branch; when False that
    weight is discarded and reported.
    """

    kappas: tuple[float, ...]
    l_max: int | None = None
    fold_deficiency: bool = True

    def __post_init__(self):
        for k in self.kappas:
            if not 0.0 <= k <= 1.0:
                raise ValueError(f"kappa must lie in [0, 1], got {k}")


SAMPLING_DEFAULT_L_MAX = 2


@dataclass(frozen=True)
class Layer:
    """Loss (applied first) followed by gates on disjoint mode sets."""

    gates: tuple[tuple[tuple[int, ...], GateMatrix], ...]
    loss: LossSpec | None = None
    dx_um: float | None = None
    dt_ps: float | None = None


@dataclass(frozen=True)
class CircuitLayout:
    num_modes: int
    layers: tuple[Layer, ...]

    def __post_init__(self):
        for layer in self.layers:
            used: set[int] = set()
            for modes, gate in layer.gates:
                if len(modes) != gate.arity:
                    raise ValueError(f"gate {gate.label} arity {gate.arity} != modes {modes}")
                for m in modes:
                    if not 0 <= m < self.num_modes:
                        raise ValueError(f"mode {m} out of range for L={self.num_modes}")
                    if m in used:
                        raise ValueError(f"mode {m} used twice within one layer")
                    used.add(m)
            if layer.loss is not None and len(layer.loss.kappas) != self.num_modes:
                raise ValueError("loss spec must carry one kappa per mode")

    @property
    def has_loss(self) -> bool:
        return any(
            layer.loss is not None and any(k > 0 for k in layer.loss.kappas)
            for layer in self.layers
        )


@dataclass(frozen=True)
class SamplingMode:
    n_traj: int
    seed: int

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")


@dataclass(frozen=True)
class BranchEnumMode:
    threshold: float

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")


@dataclass
class TrajectoryRecord:
    choices: list[tuple[int, int, int]]  # (layer, mode, l)
    weight: float
    state: MultiModeState


@dataclass
class EnsembleResult:
    """Accumulated raw moments of the counting observables.

    ``moment_sum`` holds the weighted sum of the observable vector
    [n_0..n_{L-1}, <n_l(n_l-1)> and <n_l n_m> over the upper triangle];
    ``moment_outer`` the weighted sum of its outer product, from which
    sampling covariances follow. Ratios (g2) are formed downstream from these
    raw moments, never per trajectory.
    """

    num_modes: int
    max_photons: int
    mode: str
    total_weight: float
    moment_sum: np.ndarray
    moment_outer: np.ndarray
    n_traj: int | None = None
    seed: int | None = None
    threshold: float | None = None
    pruned_weight: float = 0.0
    n_leaves: int = 0
    leaf_moments: list = field(default_factory=list)
    leaf_weights: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# gate application


def apply_gate_array(
    psi: np.ndarray, modes: tuple[int, ...], matrix: np.ndarray, num_modes: int, d: int
) -> np.ndarray:
    """Apply a one- or two-mode operator to a flat amplitude vector.

    Adjacent ascending two-mode targets use a contiguous reshape; any other
    mode combination goes through an axis-permutation gather/scatter.
    """
    if len(modes) == 1:
        (i,) = modes
        pre, post = d**i, d ** (num_modes - i - 1)
        out = np.matmul(matrix, psi.reshape(pre, d, post))
        return np.ascontiguousarray(out).reshape(-1)
    i, j = modes
    if j == i + 1:  # contiguous block fast path
        pre, post = d**i, d ** (num_modes - i - 2)
        out = np.matmul(matrix, psi.reshape(pre, d * d, post))
        return np.ascontiguousarray(out).reshape(-1)
    tensor = psi.reshape((d,) * num_modes)
    moved = np.moveaxis(tensor, (i, j), (0, 1))
    y = matrix @ moved.reshape(d * d, -1)
    y = y.reshape((d, d) + moved.shape[2:])
    return np.ascontiguousarray(np.moveaxis(y, (0, 1), (i, j))).reshape(-1)


def apply_gate(state: MultiModeState, modes: tuple[int, ...], gate: GateMatrix) -> MultiModeState:
    """Apply ``gate`` to the designated modes, returning a new state."""
    if len(modes) != gate.arity:
        raise ValueError(f"gate arity {gate.arity} does not match modes {modes}")
    if len(set(modes)) != len(modes):
        raise ValueError("gate modes must be distinct")
    for m in modes:
        if not 0 <= m < state.num_modes:
            raise ValueError(f"mode {m} out of range")
    d = state.cutoff.dim
    if gate.matrix.shape != (d ** gate.arity,) * 2:
        raise ValueError(
            f"gate dimension {gate.matrix.shape} does not match cutoff dim {d}^{gate.arity}"
        )
    amps = apply_gate_array(state.amplitudes, modes, gate.matrix, state.num_modes, d)
    return MultiModeState(state.num_modes, state.cutoff, amps, state.norm_leakage)


# ---------------------------------------------------------------------------
# loss events


def _branch_weight_table(kraus: KrausSet, d: int) -> np.ndarray:
    """W[l, n] = |<n-l| L_l |n>|^2 = C(n, l) kappa^l (1-kappa)^(n-l)."""
    table = np.zeros((kraus.num_branches, d))
    for l, op in enumerate(kraus.operators):
        col = np.abs(op) ** 2
        table[l] = col.sum(axis=0)
    return table


def _mode_marginal(psi: np.ndarray, mode: int, num_modes: int, d: int) -> np.ndarray:
    pre, post = d**mode, d ** (num_modes - mode - 1)
    p = np.abs(psi.reshape(pre, d, post)) ** 2
    return p.sum(axis=(0, 2))


def _branch_probabilities(
    psi: np.ndarray, mode: int, table: np.ndarray, fold: bool, num_modes: int, d: int
) -> np.ndarray:
    marg = _mode_marginal(psi, mode, num_modes, d)
    total = marg.sum()
    if total < DEGENERATE_NORM_TOL:
        raise ContractViolation("loss sampling hit a numerically degenerate state")
    p = table @ (marg / total)
    if fold:
        p[0] += max(0.0, 1.0 - p.sum())
    return p


def sample_loss(
    state: MultiModeState,
    mode: int,
    kraus: KrausSet,
    rng: np.random.Generator,
    fold_deficiency: bool = True,
) -> tuple[MultiModeState, int]:
    """Sample one loss branch on ``mode``; returns the renormalized state and l."""
    d = state.cutoff.dim
    table = _branch_weight_table(kraus, d)
    p = _branch_probabilities(state.amplitudes, mode, table, fold_deficiency, state.num_modes, d)
    u = rng.random()
    choice = int(np.searchsorted(np.cumsum(p), u, side="right"))
    choice = min(choice, kraus.num_branches - 1)
    amps = apply_gate_array(state.amplitudes, (mode,), kraus.operators[choice], state.num_modes, d)
    nrm = np.linalg.norm(amps)
    if nrm < DEGENERATE_NORM_TOL:
        raise ContractViolation(f"selected loss branch l={choice} annihilated the state")
    out = MultiModeState(state.num_modes, state.cutoff, amps / nrm, state.norm_leakage)
    return out, choice


# ---------------------------------------------------------------------------
# event stream shared by all routes


def _resolve_l_max(spec: LossSpec, cutoff: FockCutoff, route: str) -> int:
    if spec.l_max is not None:
        return spec.l_max
    if route == "sampling":
        return SAMPLING_DEFAULT_L_MAX
    return cutoff.max_photons  # complete set for enumeration / density oracle


def _compile_events(layout: CircuitLayout, cutoff: FockCutoff, route: str) -> list[tuple]:
    """Flatten the layout into ('loss', layer, mode, ops, table, fold) and
    ('gate', modes, matrix) entries, losses before gates within each layer."""
    events: list[tuple] = []
    for li, layer in enumerate(layout.layers):
        if layer.loss is not None:
            l_max = _resolve_l_max(layer.loss, cutoff, route)
            for m, kappa in enumerate(layer.loss.kappas):
                if kappa <= 0.0:
                    continue
                kraus = kraus_amplitude_damping(kappa, l_max, cutoff)
                table = _branch_weight_table(kraus, cutoff.dim)
                events.append(("loss", li, m, kraus.operators, table, layer.loss.fold_deficiency))
        for modes, gate in layer.gates:
            events.append(("gate", tuple(modes), np.ascontiguousarray(gate.matrix)))
    return events


class _MomentAccumulator:
    """Weighted raw moments of [n_l; normal-ordered pair numerators]."""

    def __init__(self, num_modes: int, cutoff: FockCutoff):
        self.num_modes = num_modes
        self.nvecs = number_operator_diagonals(num_modes, cutoff)
        self.pairs = [(l, m) for l in range(num_modes) for m in range(l, num_modes)]
        self.size = num_modes + len(self.pairs)
        self.weight = 0.0
        self.s1 = np.zeros(self.size)
        self.s2 = np.zeros((self.size, self.size))
        self.n_leaves = 0
        self.leaf_moments: list[np.ndarray] = []
        self.leaf_weights: list[float] = []

    def moment_vector(self, psi: np.ndarray) -> np.ndarray:
        p = np.abs(psi) ** 2
        v = np.empty(self.size)
        for l, nv in enumerate(self.nvecs):
            v[l] = p @ nv
        for idx, (l, m) in enumerate(self.pairs):
            if l == m:
                v[self.num_modes + idx] = p @ (self.nvecs[l] * (self.nvecs[l] - 1.0))
            else:
                v[self.num_modes + idx] = p @ (self.nvecs[l] * self.nvecs[m])
        return v

    def add(self, psi: np.ndarray, weight: float) -> None:
        v = self.moment_vector(psi)
        self.weight += weight
        self.s1 += weight * v
        self.s2 += weight * np.outer(v, v)
        self.n_leaves += 1
        self.leaf_moments.append(v)
        self.leaf_weights.append(weight)


def run_trajectory(
    layout: CircuitLayout, input_state: MultiModeState, rng: np.random.Generator
) -> TrajectoryRecord:
    """Evolve one stochastic trajectory: per layer, sample every loss branch,
    then apply the layer's gates. Consumes one uniform per loss event."""
    if input_state.num_modes != layout.num_modes:
        raise ValueError("input state and layout disagree on the number of modes")
    cutoff = input_state.cutoff
    d = cutoff.dim
    psi = input_state.amplitudes.copy()
    choices: list[tuple[int, int, int]] = []
    weight = 1.0
    for ev in _compile_events(layout, cutoff, "sampling"):
        if ev[0] == "gate":
            psi = apply_gate_array(psi, ev[1], ev[2], layout.num_modes, d)
        else:
            _, li, m, ops, table, fold = ev
            p = _branch_probabilities(psi, m, table, fold, layout.num_modes, d)
            u = rng.random()
            l = min(int(np.searchsorted(np.cumsum(p), u, side="right")), len(ops) - 1)
            psi = apply_gate_array(psi, (m,), ops[l], layout.num_modes, d)
            nrm = np.linalg.norm(psi)
            if nrm < DEGENERATE_NORM_TOL:
                raise ContractViolation(f"loss branch l={l} annihilated the state")
            psi /= nrm
            weight *= float(p[l])
            choices.append((li, m, l))
    state = MultiModeState(layout.num_modes, cutoff, psi, input_state.norm_leakage)
    return TrajectoryRecord(choices, weight, state)


def run_ensemble(
    layout: CircuitLayout,
    input_state: MultiModeState,
    mode: SamplingMode | BranchEnumMode,
) -> EnsembleResult:
    """Accumulate counting-statistics moments over the Kraus branch tree.

    Sampling mode averages ``n_traj`` trajectories (merged by shared branch
    prefix; statistically and bitwise identical to independent evolution).
    Branch-enum mode sums every branch whose cumulative weight stays above
    the threshold and reports the pruned weight.
    """
    if input_state.num_modes != layout.num_modes:
        raise ValueError("input state and layout disagree on the number of modes")
    cutoff = input_state.cutoff
    d = cutoff.dim
    sampling = isinstance(mode, SamplingMode)
    events = _compile_events(layout, cutoff, "sampling" if sampling else "branch_enum")
    acc = _MomentAccumulator(layout.num_modes, cutoff)
    n_loss_events = sum(1 for ev in events if ev[0] == "loss")
    pruned = 0.0

    if sampling:
        streams = np.random.SeedSequence(mode.seed).spawn(mode.n_traj)
        uniforms = np.empty((mode.n_traj, max(n_loss_events, 1)))
        for t, ss in enumerate(streams):
            gen = np.random.Generator(np.random.PCG64(ss))
            for e in range(n_loss_events):
                uniforms[t, e] = gen.random()

    def walk(psi: np.ndarray, ev_idx: int, loss_idx: int, payload) -> None:
        nonlocal pruned
        while ev_idx < len(events) and events[ev_idx][0] == "gate":
            _, modes, matrix = events[ev_idx]
            psi = apply_gate_array(psi, modes, matrix, layout.num_modes, d)
            ev_idx += 1
        if ev_idx == len(events):
            if sampling:
                acc.add(psi, len(payload) / mode.n_traj)
            else:
                acc.add(psi, payload)
            return
        _, _, m, ops, table, fold = events[ev_idx]
        p = _branch_probabilities(psi, m, table, fold, layout.num_modes, d)
        if sampling:
            edges = np.cumsum(p)
            pick = np.minimum(
                np.searchsorted(edges, uniforms[payload, loss_idx], side="right"),
                len(ops) - 1,
            )
        for l in range(len(ops)):
            if sampling:
                members = payload[pick == l]
                if members.size == 0:
                    continue
                child_payload = members
            else:
                w = payload * float(p[l])
                if w < mode.threshold:
                    pruned += w
                    continue
                child_payload = w
            child = apply_gate_array(psi, (m,), ops[l], layout.num_modes, d)
            nrm = np.linalg.norm(child)
            if nrm < DEGENERATE_NORM_TOL:
                raise ContractViolation(f"loss branch l={l} annihilated the state")
            walk(child / nrm, ev_idx + 1, loss_idx + 1, child_payload)

    start = input_state.amplitudes.astype(complex, copy=True)
    walk(start, 0, 0, np.arange(mode.n_traj) if sampling else 1.0)

    return EnsembleResult(
        num_modes=layout.num_modes,
        max_photons=cutoff.max_photons,
        mode="sampling" if sampling else "branch_enum",
        total_weight=acc.weight,
        moment_sum=acc.s1,
        moment_outer=acc.s2,
        n_traj=mode.n_traj if sampling else None,
        seed=mode.seed if sampling else None,
        threshold=None if sampling else mode.threshold,
        pruned_weight=pruned,
        n_leaves=acc.n_leaves,
        leaf_moments=acc.leaf_moments,
        leaf_weights=acc.leaf_weights,
    )


def evolve_state(layout: CircuitLayout, input_state: MultiModeState) -> MultiModeState:
    """Deterministic unitary evolution; the layout must be lossless."""
    if layout.has_loss:
        raise ValueError("evolve_state requires a lossless layout")
    psi = input_state.amplitudes.copy()
    d = input_state.cutoff.dim
    for ev in _compile_events(layout, input_state.cutoff, "branch_enum"):
        psi = apply_gate_array(psi, ev[1], ev[2], layout.num_modes, d)
    return MultiModeState(layout.num_modes, input_state.cutoff, psi, input_state.norm_leakage)


def exact_density_evolution(
    layout: CircuitLayout, input_state: MultiModeState
) -> np.ndarray:
    """Exact mixed-state evolution with complete Kraus sums; only L <= 2.

    Loss channels always use the complete operator set here, independent of
    any l_max configured on the layout; this is the verification oracle the
    stochastic routes are checked against.
    """
    if layout.num_modes > 2:
        raise ValueError("exact density evolution supports at most two modes")
    if input_state.num_modes != layout.num_modes:
        raise ValueError("input state and layout disagree on the number of modes")
    cutoff = input_state.cutoff
    d = cutoff.dim
    eye = np.eye(d)
    rho = np.outer(input_state.amplitudes, input_state.amplitudes.conj())

    def embed(op: np.ndarray, m: int) -> np.ndarray:
        if layout.num_modes == 1:
            return op
        return np.kron(op, eye) if m == 0 else np.kron(eye, op)

    for layer in layout.layers:
        if layer.loss is not None:
            for m, kappa in enumerate(layer.loss.kappas):
                if kappa <= 0.0:
                    continue
                kraus = kraus_amplitude_damping(kappa, cutoff.max_photons, cutoff)
                big = [embed(op, m) for op in kraus.operators]
                rho = sum(k @ rho @ k.conj().T for k in big)
        for modes, gate in layer.gates:
            if gate.arity == 1:
                u = embed(gate.matrix, modes[0])
            elif modes == (0, 1):
                u = gate.matrix
            elif modes == (1, 0):
                perm = np.arange(d * d).reshape(d, d).T.reshape(-1)
                u = gate.matrix[np.ix_(perm, perm)]
            else:
                raise ValueError(f"unsupported gate placement {modes}")
            rho = u @ rho @ u.conj().T
        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ContractViolation(f"density evolution lost trace: tr = {tr}")
    return rho
