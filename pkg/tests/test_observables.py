import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpicsim.engine import BranchEnumMode, SamplingMode, run_ensemble
from qpicsim.fock import CoherentInput, FockCutoff, MultiModeState, mode_index, product_state
from qpicsim.gates import build_kerr
from qpicsim.observables import (
    g2_entry,
    intensity,
    report,
    report_from_state,
)
from qpicsim.scenarios import lossy_mzi_layout

PI = math.pi


def fock_state(occ, cutoff):
    amps = np.zeros(cutoff.dim ** len(occ), dtype=complex)
    amps[mode_index(tuple(occ), cutoff)] = 1.0
    return MultiModeState(len(occ), cutoff, amps)


class TestIntensity:
    def test_vacuum(self):
        assert intensity(fock_state((0, 0), FockCutoff(3)), 0) == 0.0

    def test_coherent_mean(self):
        st_ = product_state(CoherentInput((1.0,)), FockCutoff(10))
        assert intensity(st_, 0) == pytest.approx(1.0, abs=1e-6)

    def test_two_photon(self):
        assert intensity(fock_state((2,), FockCutoff(4)), 0) == pytest.approx(2.0)


class TestG2Entry:
    def test_coherent_is_poissonian(self):
        for alpha in (0.3, 1.0, 0.5 + 0.5j):
            st_ = product_state(CoherentInput((alpha, alpha)), FockCutoff(12))
            for l, m in ((0, 0), (0, 1), (1, 1)):
                assert g2_entry(st_, l, m) == pytest.approx(1.0, abs=1e-6)

    def test_coherent_unit_alpha_tight(self):
        # the renormalized truncated state is exactly Poissonian up to the tail
        st_ = product_state(CoherentInput((0.4,)), FockCutoff(12))
        assert g2_entry(st_, 0, 0) == pytest.approx(1.0, abs=1e-10)

    def test_single_photon_antibunched(self):
        assert g2_entry(fock_state((1,), FockCutoff(3)), 0, 0) == 0.0

    def test_two_photon_value(self):
        assert g2_entry(fock_state((2,), FockCutoff(4)), 0, 0) == pytest.approx(0.5)

    @given(n=st.integers(1, 8))
    @settings(max_examples=8, deadline=None)
    def test_fock_law(self, n):
        g2 = g2_entry(fock_state((n,), FockCutoff(8)), 0, 0)
        assert g2 == pytest.approx((n - 1) / n, abs=1e-12)

    def test_floor_violation_raises(self):
        with pytest.raises(ValueError):
            g2_entry(fock_state((0,), FockCutoff(3)), 0, 0)

    def test_kerr_leaves_counting_statistics(self):
        # number-diagonal unitaries cannot alter photon statistics
        co = FockCutoff(10)
        st_ = product_state(CoherentInput((1.0,)), co)
        kerr = build_kerr(0.3, 0.0, co)
        rotated = MultiModeState(1, co, kerr.matrix @ st_.amplitudes)
        assert intensity(rotated, 0) == pytest.approx(intensity(st_, 0), abs=1e-14)
        assert g2_entry(rotated, 0, 0) == pytest.approx(g2_entry(st_, 0, 0), abs=1e-14)


class TestReport:
    def test_single_branch_matches_direct(self):
        co = FockCutoff(8)
        st_ = product_state(CoherentInput((1.0, 0.0)), co)
        from qpicsim.scenarios import free_space_mzi_layout

        layout = free_space_mzi_layout(0.02, 1.0, PI / 4, 0.2 * PI, co)
        ens = run_ensemble(layout, st_, BranchEnumMode(1e-9))
        rep = report(ens)
        from qpicsim.engine import evolve_state

        direct = report_from_state(evolve_state(layout, st_))
        np.testing.assert_allclose(rep.intensities, direct.intensities, atol=1e-13)
        np.testing.assert_allclose(rep.g2, direct.g2, atol=1e-12)

    def test_symmetry_of_g2(self):
        co = FockCutoff(6)
        st_ = product_state(CoherentInput((0.8, 0.4j)), co)
        rep = report_from_state(st_)
        np.testing.assert_array_equal(rep.g2, rep.g2.T)

    def test_phase_mixture_stays_poissonian(self):
        # equal-|alpha| coherent states with random phases: intra-mode g2 = 1
        from qpicsim.engine import _MomentAccumulator, EnsembleResult

        co = FockCutoff(14)
        acc = _MomentAccumulator(1, co)
        rng = np.random.default_rng(0)
        n = 200
        for _ in range(n):
            st_ = product_state(
                CoherentInput((0.6 * np.exp(1j * rng.uniform(0, 2 * PI)),)), co
            )
            acc.add(st_.amplitudes, 1.0 / n)
        ens = EnsembleResult(
            num_modes=1, max_photons=14, mode="sampling",
            total_weight=acc.weight, moment_sum=acc.s1, moment_outer=acc.s2,
            n_traj=n, seed=0, leaf_moments=acc.leaf_moments,
            leaf_weights=acc.leaf_weights,
        )
        rep = report(ens)
        assert rep.g2[0, 0] == pytest.approx(1.0, abs=1e-9)

    def test_sampled_report_within_3se_of_exact(self):
        co = FockCutoff(8)
        st_ = product_state(CoherentInput((1.0, 0.0)), co)
        layout = lossy_mzi_layout(0.02, 0.8, PI / 4, 0.2 * PI, 1.93, co, l_max=8)
        ens = run_ensemble(layout, st_, SamplingMode(10_000, 21))
        rep = report(ens)
        from qpicsim.engine import exact_density_evolution

        exact = report_from_state(
            exact_density_evolution(layout, st_), num_modes=2, cutoff=co
        )
        for l in range(2):
            for m in range(2):
                se = max(rep.se_g2[l, m], 2e-4)
                assert abs(rep.g2[l, m] - exact.g2[l, m]) < 3 * se

    def test_jackknife_agrees_with_delta(self):
        co = FockCutoff(6)
        st_ = product_state(CoherentInput((1.0, 0.0)), co)
        layout = lossy_mzi_layout(0.02, 0.8, PI / 4, 0.2 * PI, 1.93, co)
        ens = run_ensemble(layout, st_, SamplingMode(4000, 9))
        delta = report(ens, se_method="delta")
        jack = report(ens, se_method="jackknife")
        for l in range(2):
            assert jack.se_g2[l, l] == pytest.approx(delta.se_g2[l, l], rel=0.35)

    def test_suppressed_entries_reported(self):
        co = FockCutoff(12)
        st_ = product_state(CoherentInput((0.5, 0.0)), co)
        rep = report_from_state(st_)
        assert np.isnan(rep.g2[1, 1])
        assert (0, 1) in rep.suppressed and (1, 1) in rep.suppressed
        assert rep.g2[0, 0] == pytest.approx(1.0, abs=1e-9)
