import cmath
import math

import numpy as np
import pytest

from conftest import LAMBDA, TRAIN_SPEED
from roma_hsr.channel import (
    PowerPolicy,
    capacity,
    doppler_frequency,
    exact_channel,
    gram,
    orthogonality_defect,
    pair_distances,
)
from roma_hsr.correlation import factorized_channel, optimal_spacing
from roma_hsr.geometry import SPEED_OF_LIGHT, ArrayConfig, PanelPose, Scenario, antenna_positions

SNR_15DB = PowerPolicy.from_db(15.0)


def _random_scenario(rng, max_count=4):
    def array():
        return ArrayConfig(int(rng.integers(1, max_count + 1)), int(rng.integers(1, max_count + 1)),
                           rng.uniform(0.005, 0.1), rng.uniform(0.005, 0.1))

    def pose():
        return PanelPose(rng.uniform(-math.pi / 2, math.pi / 2), rng.uniform(0, math.pi / 2))

    direction = rng.normal(size=3)
    center = direction / np.linalg.norm(direction) * rng.uniform(5, 100)
    return Scenario(array(), array(), pose(), pose(), tuple(center),
                    velocity=(TRAIN_SPEED, 0.0, 0.0), carrier_hz=20e9)


class TestDoppler:
    def test_perpendicular_motion(self):
        assert doppler_frequency((0, 0, 0), (0, 4, 0), (97.2, 0, 0), 20e9) == 0.0

    def test_stationary(self):
        assert doppler_frequency((1, 2, 3), (30, 4, 10), (0, 0, 0), 20e9) == 0.0

    def test_receding_along_track(self):
        # f_c * v / c evaluated directly (c = 299792458 m/s)
        fd = doppler_frequency((0, 0, 0), (100, 0, 0), (97.22, 0, 0), 20e9)
        assert fd == pytest.approx(6485.820267032868, rel=1e-12)

    def test_coincident_rejected(self):
        with pytest.raises(ValueError):
            doppler_frequency((1, 1, 1), (1, 1, 1), (1, 0, 0), 1e9)

    def test_bounded_by_speed_over_c(self, base_scenario):
        tx = antenna_positions(base_scenario, "tx")
        rx = antenna_positions(base_scenario, "rx")
        bound = TRAIN_SPEED / SPEED_OF_LIGHT
        for t in tx:
            for r in rx:
                fd = doppler_frequency(t, r, base_scenario.velocity, base_scenario.carrier_hz)
                assert abs(fd) / base_scenario.carrier_hz <= bound * (1 + 1e-12)
        assert bound == pytest.approx(3.243e-7, rel=1e-3)


class TestExactChannel:
    def test_unit_amplitude_at_quarter_pi_inverse(self):
        one = ArrayConfig(1, 1, 1.0, 1.0)
        s = Scenario(one, one, rx_center=(0, 0, 1 / (4 * math.pi)))
        H = exact_channel(s)
        assert H.shape == (1, 1)
        assert abs(H[0, 0]) == pytest.approx(1.0, abs=1e-15)

    def test_modulus_identity(self, base_scenario):
        H = exact_channel(base_scenario)
        d = pair_distances(base_scenario)
        np.testing.assert_allclose(np.abs(H) * 4 * np.pi * d, 1.0, atol=1e-12)

    def test_phase_against_scalar_evaluation(self):
        rng = np.random.default_rng(7)
        s = _random_scenario(rng)
        H = exact_channel(s)
        tx = antenna_positions(s, "tx")
        rx = antenna_positions(s, "rx")
        for _ in range(10):
            n, m = int(rng.integers(len(rx))), int(rng.integers(len(tx)))
            d = math.dist(tx[m], rx[n])
            f = s.carrier_hz + doppler_frequency(tx[m], rx[n], s.velocity, s.carrier_hz)
            expected = cmath.exp(-1j * 2 * math.pi * f / SPEED_OF_LIGHT * d) / (4 * math.pi * d)
            assert H[n, m] == pytest.approx(expected, rel=1e-12)

    def test_frozen_doppler_uses_carrier(self, base_scenario):
        from dataclasses import replace
        frozen = replace(base_scenario, doppler=False)
        H = exact_channel(frozen)
        d = pair_distances(frozen)
        np.testing.assert_allclose(H, np.exp(-1j * frozen.wavenumber * d) / (4 * np.pi * d), rtol=1e-13)
        # Doppler only perturbs the phase slightly at rail speeds
        assert np.abs(np.angle(exact_channel(base_scenario) / H)).max() < 1e-2


class TestGram:
    def test_scalar(self):
        z = 0.3 - 0.4j
        assert gram(np.array([[z]]))[0, 0] == pytest.approx(abs(z) ** 2)

    def test_orthogonal_columns(self):
        F = np.exp(-2j * np.pi * np.outer(np.arange(4), np.arange(4)) / 4) * 0.5
        np.testing.assert_allclose(gram(F), np.eye(4), atol=1e-15)

    def test_triple_loop(self):
        rng = np.random.default_rng(3)
        H = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        G = gram(H)
        for u in range(3):
            for v in range(3):
                ref = sum(H[n, u].conjugate() * H[n, v] for n in range(4))
                assert G[u, v] == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_gram_of_exact_channel_matches_definition(self, seed):
        s = _random_scenario(np.random.default_rng(100 + seed), max_count=2)
        H = exact_channel(s)
        G = gram(H)
        N, M = H.shape
        ref = np.array([[sum(H[n, u].conjugate() * H[n, v] for n in range(N)) for v in range(M)]
                        for u in range(M)])
        np.testing.assert_allclose(G, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())
        np.testing.assert_array_equal(G, G.conj().T)
        lam = np.linalg.eigvalsh(G)
        assert lam.min() >= -1e-12 * lam.max()


class TestCapacity:
    def test_single_link(self):
        one = ArrayConfig(1, 1, 1.0, 1.0)
        s = Scenario(one, one, rx_center=(1 / (4 * math.pi), 0, 0))
        assert capacity(gram(exact_channel(s)), SNR_15DB) == pytest.approx(5.0278076733505195, abs=1e-9)

    def test_zero(self):
        assert capacity(np.zeros((3, 3)), SNR_15DB) == 0.0

    def test_identity_equal_split(self):
        # 4 * log2(1 + 10**1.5 / 4)
        assert capacity(np.eye(4), SNR_15DB) == pytest.approx(12.618912263764727, rel=1e-12)

    def test_power_split_over_numerical_rank_only(self):
        G = np.diag([1.0, 1.0, 1e-9])
        assert capacity(G, SNR_15DB) == pytest.approx(2 * math.log2(1 + SNR_15DB.snr_linear / 2))

    def test_reference_distance(self):
        ref = PowerPolicy.from_db(15.0, reference_distance=10.0)
        assert ref.transmit_snr == pytest.approx(10 ** 1.5 * (40 * math.pi) ** 2)
        G = np.eye(1) / (40 * math.pi) ** 2
        assert capacity(G, ref) == pytest.approx(math.log2(1 + 10 ** 1.5))

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            PowerPolicy(0.0)
        with pytest.raises(ValueError):
            PowerPolicy(1.0, reference_distance=-1.0)

    def test_monotone_in_snr(self):
        rng = np.random.default_rng(11)
        grid = np.logspace(-2, 4, 12)
        for _ in range(20):
            A = rng.normal(size=(5, 4)) + 1j * rng.normal(size=(5, 4))
            G = gram(A)
            caps = [capacity(G, PowerPolicy(s)) for s in grid]
            assert np.all(np.diff(caps) >= 0)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            H = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
            U, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
            a = capacity(gram(H), SNR_15DB)
            b = capacity(gram(U @ H), SNR_15DB)
            assert b == pytest.approx(a, rel=1e-9)


class TestOrthogonalityDefect:
    def test_diagonal(self):
        assert orthogonality_defect(np.diag([3.0, 1.0, 2.0])) == 0.0

    def test_all_ones(self):
        assert orthogonality_defect(np.ones((4, 4))) == 1.0

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            orthogonality_defect(np.zeros((2, 2)))

    def test_optimal_spacing_in_dirichlet_zero_regime(self):
        # x0 / z0 = N puts both Dirichlet kernels on their zeros at the
        # optimal spacing, so the reconstructed Gram is orthogonal
        array = ArrayConfig.square(4, LAMBDA)
        s = Scenario(array, array, rx_center=(200.0, 0.5, 50.0), doppler=False)
        s = s.with_spacing(optimal_spacing(s))
        assert orthogonality_defect(gram(factorized_channel(s).reconstruct())) < 0.05

    def test_far_from_orthogonal_at_tiny_spacing(self, base_scenario):
        tiny = base_scenario.with_spacing(1e-4)
        assert orthogonality_defect(gram(exact_channel(tiny))) > 0.99
