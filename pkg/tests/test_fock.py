import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpicsim.fock import (
    CoherentInput,
    FockCutoff,
    MultiModeState,
    coherent_state,
    index_occupations,
    ladder_matrices,
    mode_index,
    product_state,
)


def poisson_tail(mean_n: float, cutoff: int) -> float:
    # independent oracle: direct summation of the Poisson tail
    total = 0.0
    term = math.exp(-mean_n)
    kept = 0.0
    for n in range(cutoff + 1):
        kept += term
        term *= mean_n / (n + 1)
    return 1.0 - kept


class TestCoherentState:
    def test_vacuum(self):
        amps, leak = coherent_state(0.0, FockCutoff(5))
        assert leak == 0.0
        np.testing.assert_allclose(amps, np.eye(6)[0])

    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_two_term_symmetry(self):
        # alpha = 1, N = 1: equal weights on |0> and |1> after renormalization
        amps, _ = coherent_state(1.0, FockCutoff(1))
        np.testing.assert_allclose(np.abs(amps), [1 / math.sqrt(2)] * 2, atol=1e-14)

    def test_leakage_matches_poisson_tail(self):
        _, leak = coherent_state(1.0, FockCutoff(10))
        assert leak == pytest.approx(poisson_tail(1.0, 10), rel=1e-6)

    def test_mean_photon_number(self):
        amps, _ = coherent_state(1.0, FockCutoff(10))
        mean = np.sum(np.abs(amps) ** 2 * np.arange(11))
        assert abs(mean - 1.0) < 1e-6

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            coherent_state(float("nan"), FockCutoff(3))

    def test_truncation_warning(self):
        with pytest.warns(UserWarning):
            coherent_state(3.0, FockCutoff(4))

    @given(re=st.floats(-1.5, 1.5), im=st.floats(-1.5, 1.5))
    @settings(max_examples=25)
    def test_unit_norm(self, re, im):
        amps, _ = coherent_state(complex(re, im), FockCutoff(10))
        assert abs(np.linalg.norm(amps) - 1.0) < 1e-12


class TestProductState:
    def test_pipeline_input_shape(self):
        st_ = product_state(CoherentInput((1.0, 0.0)), FockCutoff(4))
        single, _ = coherent_state(1.0, FockCutoff(4))
        np.testing.assert_allclose(st_.amplitudes, np.kron(single, np.eye(5)[0]))

    def test_global_vacuum(self):
        st_ = product_state(CoherentInput((0.0, 0.0, 0.0)), FockCutoff(2))
        expect = np.zeros(27)
        expect[0] = 1.0
        np.testing.assert_allclose(st_.amplitudes, expect)

    def test_relative_phase(self):
        phi = 0.6 * math.pi
        alphas = [0.0] * 6
        alphas[0] = 1.0
        alphas[5] = np.exp(1j * phi)
        st_ = product_state(CoherentInput(tuple(alphas)), FockCutoff(2))
        # amplitude of |1 0 0 0 0 1> carries the relative phase
        idx_11 = mode_index((1, 0, 0, 0, 0, 1), FockCutoff(2))
        idx_10 = mode_index((1, 0, 0, 0, 0, 0), FockCutoff(2))
        ratio = st_.amplitudes[idx_11] / st_.amplitudes[idx_10]
        assert np.angle(ratio) == pytest.approx(phi, abs=1e-12)

    def test_leakage_accumulates(self):
        st_ = product_state(CoherentInput((1.0, 1.0)), FockCutoff(10))
        one = poisson_tail(1.0, 10)
        assert st_.norm_leakage == pytest.approx(1 - (1 - one) ** 2, rel=1e-6)


class TestLadders:
    def test_annihilation(self):
        a, adag, n = ladder_matrices(FockCutoff(4))
        e1 = np.eye(5)[1]
        np.testing.assert_allclose(a @ e1, np.eye(5)[0])

    def test_creation_at_cutoff(self):
        a, adag, n = ladder_matrices(FockCutoff(4))
        np.testing.assert_allclose(adag @ np.eye(5)[4], np.zeros(5))

    def test_number(self):
        _, _, n = ladder_matrices(FockCutoff(4))
        np.testing.assert_allclose(n @ np.eye(5)[3], 3 * np.eye(5)[3])

    def test_commutator_below_cutoff(self):
        a, adag, _ = ladder_matrices(FockCutoff(6))
        comm = a @ adag - adag @ a
        # canonical commutator holds away from the truncation boundary
        np.testing.assert_allclose(np.diag(comm)[:-1], np.ones(6), atol=1e-14)


class TestIndexMap:
    def test_zero(self):
        assert mode_index((0, 0, 0), FockCutoff(3)) == 0

    def test_max(self):
        assert mode_index((3, 3, 3), FockCutoff(3)) == 4**3 - 1

    def test_round_trip_exhaustive(self):
        co = FockCutoff(3)
        for idx in range(4**2):
            occ = index_occupations(idx, 2, co)
            assert mode_index(occ, co) == idx

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            mode_index((4, 0), FockCutoff(3))

    @given(st.integers(1, 3), st.integers(1, 4), st.data())
    @settings(max_examples=30)
    def test_bijection_property(self, num_modes, n_max, data):
        co = FockCutoff(n_max)
        occ = tuple(
            data.draw(st.integers(0, n_max)) for _ in range(num_modes)
        )
        assert index_occupations(mode_index(occ, co), num_modes, co) == occ


class TestNormalization:
    def test_normalize_contract(self):
        co = FockCutoff(3)
        amps = np.ones(16, dtype=complex)
        st_ = MultiModeState(2, co, amps / np.linalg.norm(amps) * 3.0)
        st_.normalize()
        assert abs(st_.norm() - 1.0) < 1e-12

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            MultiModeState(2, FockCutoff(3), np.ones(15, dtype=complex))
