import math

import numpy as np
import pytest

from phononprobe import couplings, dynamics, fock, multi_ion
from phononprobe.dynamics import DriveSet
from phononprobe.errors import DomainError, ResourceError
from phononprobe.multi_ion import ChainConfig

PLUS_Y = fock.ProbeState(+1, np.pi / 2)


def _ground(n_others):
    g = np.diag([1.0, 0.0])
    out = np.eye(1)
    for _ in range(n_others):
        out = np.kron(out, g)
    return out


class TestConfig:
    def test_lengths(self):
        with pytest.raises(DomainError):
            ChainConfig(2, [6], [0.3, 0.5])
        with pytest.raises(DomainError):
            ChainConfig(0, [], [])

    def test_dims(self):
        c = ChainConfig(2, [6, 6], [0.3, 0.5], mode_frequencies=[1.0, 1.7])
        assert c.total_dim == 144 and c.internal_dim == 4 and c.mode_dim == 36


class TestCoupling:
    def test_single_mode(self):
        c = ChainConfig(1, [9], [0.4])
        np.testing.assert_array_equal(multi_ion.collective_coupling(c), couplings.f0_diag(0.4, 9).values)

    def test_zero_eta_mode(self):
        c = ChainConfig(2, [4, 5], [0.0, 0.3])
        f = multi_ion.collective_coupling(c).reshape(4, 5)
        for n1 in range(4):
            np.testing.assert_allclose(f[n1], couplings.f0_diag(0.3, 5).values, rtol=1e-15)

    def test_product_entry(self):
        c = ChainConfig(2, [6, 6], [0.3, 0.5])
        f = multi_ion.collective_coupling(c).reshape(6, 6)
        assert f[1, 2] == pytest.approx(couplings.f0_diag(0.3, 6)[1] * couplings.f0_diag(0.5, 6)[2],
                                        rel=1e-15)


class TestHamiltonian:
    def test_reduction_to_single_ion(self):
        c = ChainConfig(1, [8], [0.35])
        np.testing.assert_allclose(multi_ion.build_chain_carrier(c).matrix,
                                   dynamics.build_carrier(DriveSet.single("carrier", 0.35), 8).matrix,
                                   atol=1e-12)

    def test_zero_eta(self):
        c = ChainConfig(2, [3, 3], [0.0, 0.0])
        sx = np.kron(fock.SIGMA_X, np.eye(2)) + np.kron(np.eye(2), fock.SIGMA_X)
        np.testing.assert_array_equal(multi_ion.build_chain_carrier(c).matrix, np.kron(sx, np.eye(9)))

    def test_size_and_hermitian(self):
        h = multi_ion.build_chain_carrier(ChainConfig(2, [6, 6], [0.3, 0.5])).matrix
        assert h.shape == (144, 144)
        assert np.max(np.abs(h - h.conj().T)) == 0

    def test_resource_cap(self):
        with pytest.raises(ResourceError) as info:
            multi_ion.build_chain_carrier(ChainConfig(3, [8, 8, 9], [0.1, 0.2, 0.3]))
        assert info.value.size == 8 * 8 * 8 * 9


class TestSlope:
    def test_vacuum_example(self):
        c = ChainConfig(2, [6, 6], [0.3, 0.5])
        rho_f = multi_ion.product_modes(fock.fock_state(0, 6), fock.fock_state(0, 6))
        s = multi_ion.collective_slope(c, 1, PLUS_Y, _ground(1), rho_f)
        assert s == pytest.approx(-math.exp(-0.3 ** 2 / 2) * math.exp(-0.5 ** 2 / 2), rel=1e-14)
        assert multi_ion.simulated_collective_slope(c, 1, PLUS_Y, _ground(1), rho_f) == pytest.approx(
            s, abs=1e-6)

    def test_phase_zero(self, rng):
        c = ChainConfig(2, [4, 4], [0.3, 0.5])
        rho_f = fock.random_state(16, rng=rng)
        assert multi_ion.collective_slope(c, 0, fock.ProbeState(1, 0.0), _ground(1), rho_f) == 0

    def test_rho_a_invariance(self, rng):
        c = ChainConfig(2, [6, 6], [0.3, 0.5])
        rho_f = multi_ion.product_modes(fock.thermal_state(0.3, 6), fock.coherent_state(0.5, 6))
        h = multi_ion.build_chain_carrier(c)
        g = multi_ion.simulated_collective_slope(c, 1, PLUS_Y, _ground(1), rho_f, h=h)
        e = multi_ion.simulated_collective_slope(c, 1, PLUS_Y, np.diag([0.0, 1.0]), rho_f, h=h)
        assert g == pytest.approx(e, abs=1e-10)
        for _ in range(5):
            ra = fock.random_state(2, rng=rng).matrix
            assert multi_ion.simulated_collective_slope(c, 1, PLUS_Y, ra, rho_f, h=h) == pytest.approx(
                g, abs=1e-10)

    def test_independent_of_ion(self, rng):
        c = ChainConfig(3, [2, 3, 2], [0.3, 0.6, 0.9])
        rho_f = fock.random_state(12, rng=rng)
        ra = fock.random_state(4, rng=rng).matrix
        probe = fock.ProbeState(-1, 1.1)
        h = multi_ion.build_chain_carrier(c)
        ref = multi_ion.collective_slope(c, 0, probe, ra, rho_f)
        for k in range(3):
            assert multi_ion.simulated_collective_slope(c, k, probe, ra, rho_f, h=h) == pytest.approx(
                ref, abs=1e-6)

    def test_factorization(self, rng):
        c = ChainConfig(2, [6, 5], [0.3, 0.5])
        r1, r2 = fock.random_state(6, rng=rng), fock.random_state(5, rng=rng)
        mean = multi_ion.collective_mean(c, multi_ion.product_modes(r1, r2))
        prod = (np.dot(r1.populations, couplings.f0_diag(0.3, 6).values)
                * np.dot(r2.populations, couplings.f0_diag(0.5, 5).values))
        assert mean == pytest.approx(prod, abs=1e-12)

    def test_single_ion_reduction(self, rng):
        c = ChainConfig(1, [8], [0.7])
        rho_f = fock.random_state(8, rng=rng)
        probe = fock.ProbeState(-1, 0.8)
        single = dynamics.analytic_slope(probe, rho_f, DriveSet.single("carrier", 0.7))
        assert multi_ion.collective_slope(c, 0, probe, None, rho_f) == pytest.approx(single, abs=1e-12)
        h1 = dynamics.build_carrier(DriveSet.single("carrier", 0.7), 8)
        fd1 = dynamics.finite_difference_slope(h1, fock.hybrid_product(probe, rho_f), 1e-4)
        assert multi_ion.simulated_collective_slope(c, 0, probe, None, rho_f) == pytest.approx(fd1, abs=1e-12)

    def test_bad_inputs(self):
        c = ChainConfig(2, [3, 3], [0.3, 0.5])
        rho_f = np.eye(9) / 9
        with pytest.raises(DomainError):
            multi_ion.collective_slope(c, 2, PLUS_Y, _ground(1), rho_f)
        with pytest.raises(DomainError):
            multi_ion.collective_slope(c, 0, PLUS_Y, np.eye(4) / 4, rho_f)
        with pytest.raises(DomainError):
            multi_ion.collective_slope(c, 0, PLUS_Y, np.diag([1.0, 1.0]), rho_f)

    def test_initial_state_places_probe(self):
        c = ChainConfig(2, [2, 2], [0.1, 0.1])
        probe = fock.ProbeState(1, 0.0)
        st = multi_ion.chain_initial_state(c, 1, probe, np.diag([0.0, 1.0]), np.eye(4) / 4)
        # ion 0 carries rho_A = |e><e|, ion 1 the probe
        assert st.ion_excited_population(0) == pytest.approx(1.0)
        assert st.ion_excited_population(1) == pytest.approx(0.5)
