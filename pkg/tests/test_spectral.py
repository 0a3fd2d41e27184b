import numpy as np
import pytest

from fsvd.core import AtomicMeasure, BandSet, MomentSequence, NumericalFailureError, TorusInterval, atom_matrix, atom_vector, moments_from_measure
from fsvd.spectral import (
    LSEProblem,
    UnsupportedProblemError,
    dual_polynomial,
    dual_residual,
    eval_dual_polynomial,
    fs_anm_complete,
    fs_anm_dual,
    fs_atomic_norm,
    max_frequency_error,
    random_lse_problem,
    recover_amplitudes,
    retrieve_frequencies,
    retrieve_measure,
    root_finding_retrieval,
)

from conftest import MASTER_SEED, bands
from oracles import band_grid, grid_l1_norm

K = bands((0.2, 0.3))


def random_in_band_signal(rng, n, k, I):
    f = np.mod(I.f_lo + rng.uniform(0.05, 0.95, k) * I.length, 1.0)
    s = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return atom_matrix(n, f) @ s, f, s


class TestAtomicNorm:
    def test_single_atom(self):
        value, t, x = fs_atomic_norm(3 * atom_vector(8, 0.25), K)
        assert value == pytest.approx(3.0, abs=1e-6)
        # x and t_0 are balanced, so each equals the norm
        assert t.t[0].real == pytest.approx(3.0, abs=1e-6)
        assert x == pytest.approx(3.0, abs=1e-6)

    def test_zero(self):
        value, t, x = fs_atomic_norm(np.zeros(5), K)
        assert value == 0.0 and x == 0.0
        assert not np.any(t.t)

    def test_out_of_band_atom(self):
        # the in-band atoms must cancel heavily to produce a(0.5)
        Kw = bands((0.1, 0.45))
        y = atom_vector(8, 0.5)
        value = fs_atomic_norm(y, Kw)[0]
        assert value == pytest.approx(59.906, rel=1e-4)
        assert value == pytest.approx(grid_l1_norm(y, Kw), rel=1e-3)

    def test_unrestricted(self):
        assert fs_atomic_norm(atom_vector(8, 0.5), None)[0] == pytest.approx(1.0, abs=1e-6)

    def test_too_short(self):
        with pytest.raises(ValueError):
            fs_atomic_norm([1.0], K)

    def test_homogeneity(self, rng):
        for _ in range(3):
            y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            c = complex(rng.standard_normal(), rng.standard_normal())
            base = fs_atomic_norm(y, bands((0.1, 0.6)))[0]
            assert fs_atomic_norm(c * y, bands((0.1, 0.6)))[0] == pytest.approx(abs(c) * base, rel=1e-6)

    def test_triangle(self, rng):
        Kw = bands((0.1, 0.6))
        for _ in range(3):
            y1 = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            y2 = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            lhs = fs_atomic_norm(y1 + y2, Kw)[0]
            assert lhs <= fs_atomic_norm(y1, Kw)[0] + fs_atomic_norm(y2, Kw)[0] + 1e-6

    def test_upper_bound(self, rng):
        I = TorusInterval(0.2, 0.3)
        for _ in range(5):
            y, f, s = random_in_band_signal(rng, 8, 3, I)
            assert fs_atomic_norm(y, K)[0] <= np.abs(s).sum() + 1e-6

    def test_monotone_in_bands(self, rng):
        y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        narrow = fs_atomic_norm(y, bands((0.2, 0.5)))[0]
        wide = fs_atomic_norm(y, bands((0.1, 0.6)))[0]
        two = fs_atomic_norm(y, bands((0.1, 0.6), (0.8, 0.9)))[0]
        full = fs_atomic_norm(y, None)[0]
        assert full <= two + 1e-6 <= wide + 2e-6 <= narrow + 3e-6

    def test_multiband_single_atoms(self):
        Kb = bands((0.1, 0.2), (0.6, 0.7))
        y = 2 * atom_vector(8, 0.15) + 1j * atom_vector(8, 0.65)
        assert fs_atomic_norm(y, Kb)[0] == pytest.approx(3.0, abs=1e-5)


class TestCompletion:
    def test_full_observation_two_atoms(self):
        n = 12
        f = [0.22, 0.27]
        y = atom_matrix(n, f) @ np.array([1.0, 0.5j])
        sol = fs_anm_complete(LSEProblem(n, np.arange(n), y, K))
        np.testing.assert_array_equal(sol.y_full, y)
        assert sol.frequencies.size == 2
        assert max_frequency_error(sol.frequencies, f) < 1e-7
        np.testing.assert_allclose(sol.amplitudes, [1.0, 0.5j], atol=1e-6)

    def test_single_atom_full(self):
        sol = fs_anm_complete(LSEProblem(8, np.arange(8), atom_vector(8, 0.25), K))
        assert sol.atomic_norm == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(sol.frequencies, [0.25], atol=1e-7)

    def test_zero_observations(self):
        sol = fs_anm_complete(LSEProblem(8, [1, 3], np.zeros(2), K))
        assert sol.atomic_norm == 0 and sol.frequencies.size == 0
        assert not np.any(sol.y_full)

    def test_partial_observation(self):
        prob, f, s = random_lse_problem(MASTER_SEED, n=24, m=14, freqs=(0.22, 0.27))
        sol = fs_anm_complete(prob)
        np.testing.assert_allclose(sol.y_full[prob.omega], prob.y_obs, atol=1e-12)
        assert max_frequency_error(sol.frequencies, f) < 1e-6
        np.testing.assert_allclose(np.sort_complex(sol.amplitudes), np.sort_complex(s), atol=1e-5)
        # the solved measure carries the norm: sum p_k = t_0 = (x + t_0)/2
        assert sol.weights.sum() == pytest.approx(sol.toeplitz_moments.t[0].real, rel=1e-6)
        assert sol.atomic_norm == pytest.approx(0.5 * sol.x_scalar + 0.5 * sol.toeplitz_moments.t[0].real, rel=1e-6)
        assert sol.weights.sum() == pytest.approx(sol.atomic_norm, rel=1e-6)
        assert np.abs(sol.amplitudes).sum() <= sol.atomic_norm + 1e-5
        # retrieved frequencies are unit-modulus points of the dual polynomial
        assert np.all(np.abs(eval_dual_polynomial(sol.dual_z, sol.frequencies)) >= 1 - 1e-4)
        # the bound |q| <= 1 holds on the band only
        assert np.all(np.abs(eval_dual_polynomial(sol.dual_z, band_grid(prob.bands, 2000))) <= 1 + 1e-4)

    def test_noisy(self):
        prob, f, s = random_lse_problem(MASTER_SEED, n=16, m=12, freqs=(0.22, 0.27), eta=0.1, noise=0.02)
        sol = fs_anm_complete(prob)
        assert np.linalg.norm(sol.y_full[prob.omega] - prob.y_obs) <= prob.eta + 1e-6
        assert max_frequency_error(sol.frequencies, f) < 2e-2

    def test_multiband(self):
        n = 16
        Kb = bands((0.1, 0.2), (0.6, 0.7))
        f = [0.15, 0.65]
        y = atom_matrix(n, f) @ np.array([1.0, -1.0])
        omega = np.arange(0, n, 2)[:7].tolist() + [3, 9, 15]
        sol = fs_anm_complete(LSEProblem(n, omega, y[omega], Kb))
        assert max_frequency_error(sol.frequencies, f) < 1e-6
        assert len(sol.per_band_moments) == 2

    def test_no_band(self):
        prob, f, s = random_lse_problem(1, n=16, m=12, freqs=(0.1, 0.6), bands=None)
        sol = fs_anm_complete(prob)
        assert max_frequency_error(sol.frequencies, f) < 1e-6

    def test_json(self):
        prob, f, s = random_lse_problem(1, n=16, m=8)
        again = LSEProblem.from_json(prob.to_json())
        np.testing.assert_array_equal(again.omega, prob.omega)
        np.testing.assert_array_equal(again.y_obs, prob.y_obs)
        assert again.bands == prob.bands


class TestProblemValidation:
    def test_duplicate_indices(self):
        with pytest.raises(ValueError):
            LSEProblem(8, [1, 1], [1, 2], K)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            LSEProblem(8, [1, 8], [1, 2], K)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            LSEProblem(8, [1, 2], [1], K)

    def test_negative_eta(self):
        with pytest.raises(ValueError):
            LSEProblem(8, [1], [1], K, eta=-1)

    def test_sorted(self):
        prob = LSEProblem(8, [5, 1], [5.0, 1.0], K)
        np.testing.assert_array_equal(prob.omega, [1, 5])
        np.testing.assert_array_equal(prob.y_obs, [1.0, 5.0])


class TestRetrieval:
    def test_zero(self):
        assert retrieve_frequencies([MomentSequence.zeros(4)], K).size == 0

    def test_single_atom(self):
        t = moments_from_measure(AtomicMeasure.from_arrays([1], [0.25]), 6)
        np.testing.assert_allclose(retrieve_frequencies([t], K), [0.25], atol=1e-10)

    def test_drops_light_atoms(self):
        t = moments_from_measure(AtomicMeasure.from_arrays([1, 1e-8], [0.22, 0.28]), 6)
        mu = retrieve_measure([t], K)
        assert len(mu) == 1 and mu.f[0] == pytest.approx(0.22)

    def test_not_admissible(self):
        t = moments_from_measure(AtomicMeasure.from_arrays([1], [0.5]), 4)
        with pytest.raises(NumericalFailureError):
            retrieve_frequencies([t], K)


class TestAmplitudes:
    def test_exact(self):
        y = 2 * atom_vector(8, 0.1) + 1j * atom_vector(8, 0.4)
        s, res = recover_amplitudes(y, [0.1, 0.4])
        np.testing.assert_allclose(s, [2, 1j], atol=1e-10)
        assert res < 1e-12

    def test_fourier_basis(self, rng):
        n = 8
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        A = atom_matrix(n, np.arange(n) / n)
        np.testing.assert_allclose(A.conj().T @ A, n * np.eye(n), atol=1e-12)
        s, res = recover_amplitudes(y, np.arange(n) / n)
        np.testing.assert_allclose(s, A.conj().T @ y / n, atol=1e-12)

    def test_empty(self):
        s, res = recover_amplitudes(np.zeros(4), [])
        assert s.size == 0 and res == 0.0

    def test_duplicates(self):
        with pytest.raises(NumericalFailureError):
            recover_amplitudes(np.ones(8), [0.1, 0.1])


class TestDualPolynomial:
    def test_unit_vector(self):
        z = np.zeros(6)
        z[0] = 1
        table = dual_polynomial(z, 100)
        assert table.shape == (101, 2)
        np.testing.assert_allclose(table[:, 1], 1.0)

    def test_dirichlet_peak(self):
        n = 10
        table = dual_polynomial(atom_vector(n, 0.3) / n, 1000)
        k = int(np.argmax(table[:, 1]))
        assert table[k, 0] == pytest.approx(0.3)
        assert table[k, 1] == pytest.approx(1.0)

    def test_zero(self):
        np.testing.assert_array_equal(dual_polynomial(np.zeros(4), 10)[:, 1], 0.0)

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            dual_polynomial(np.ones(3), 1)


class TestRootFinding:
    def test_dirichlet(self):
        n = 10
        f = root_finding_retrieval(atom_vector(n, 0.3) / n)
        assert np.min(np.abs(f - 0.3)) < 1e-6

    def test_below_one(self):
        assert root_finding_retrieval(0.5 * atom_vector(10, 0.3) / 10).size == 0

    def test_zero(self):
        with pytest.raises(ValueError):
            root_finding_retrieval(np.zeros(4))

    def test_band_filter(self):
        # q(f) = D(f - 0.25) + D(f - 0.75) with D the normalised Dirichlet
        # kernel; for even N, D vanishes at offset 1/2, so |q| = 1 at both atoms
        z = (atom_vector(12, 0.25) + atom_vector(12, 0.75)) / 12
        both = root_finding_retrieval(z)
        assert len(both) == 2
        only = root_finding_retrieval(z, K)
        np.testing.assert_allclose(only, [0.25], atol=1e-6)


class TestDual:
    def test_multiband_unsupported(self):
        prob = LSEProblem(8, [0, 1], [1.0, 1.0], bands((0.1, 0.2), (0.6, 0.7)))
        with pytest.raises(UnsupportedProblemError):
            fs_anm_dual(prob)

    def test_zero(self):
        assert fs_anm_dual(LSEProblem(8, [0, 1], [0.0, 0.0], K)).value == 0.0

    @pytest.mark.parametrize("method", ["direct", "multipliers"])
    def test_single_atom(self, method):
        s = 1.5 * np.exp(0.7j)
        prob = LSEProblem(8, np.arange(8), s * atom_vector(8, 0.25), K)
        dual = fs_anm_dual(prob, method=method)
        assert dual.value == pytest.approx(abs(s), abs=1e-6)
        assert abs(eval_dual_polynomial(dual.z, 0.25)[0]) == pytest.approx(1.0, abs=1e-4)
        assert dual_residual(dual, K) < 1e-6

    @pytest.mark.parametrize("method", ["direct", "multipliers"])
    def test_strong_duality(self, method):
        prob, f, s = random_lse_problem(MASTER_SEED, n=16, m=10, freqs=(0.22, 0.27))
        primal = fs_anm_complete(prob).atomic_norm
        dual = fs_anm_dual(prob, method=method)
        assert dual.value == pytest.approx(primal, rel=1e-5)
        outside = dual.z[np.setdiff1d(np.arange(16), prob.omega)]
        assert np.max(np.abs(outside)) < 1e-9 * np.max(np.abs(dual.z))

    def test_noisy_duality(self):
        prob, f, s = random_lse_problem(MASTER_SEED, n=12, m=8, freqs=(0.22, 0.27), eta=0.1, noise=0.02)
        primal = fs_anm_complete(prob).atomic_norm
        assert fs_anm_dual(prob, method="direct").value == pytest.approx(primal, rel=1e-5)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            fs_anm_dual(LSEProblem(8, [0], [1.0], K), method="nope")


@pytest.mark.slow
def test_compressive_example_seed0():
    prob, f, s = random_lse_problem(0)
    sol = fs_anm_complete(prob)
    assert max_frequency_error(sol.frequencies, f) < 1e-6
    assert max_frequency_error(root_finding_retrieval(sol.dual_z, prob.bands), f) < 1e-4
