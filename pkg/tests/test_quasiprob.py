import math

import numpy as np
import pytest

from ionjc.dynamics import EvolutionMethod
from ionjc.quasiprob import (
    GridSpec,
    _characteristic_oracle_many,
    characteristic_oracle,
    clear_table_cache,
    lambda_nm,
    p_omega_element,
    p_omega_grid,
)
from ionjc.specfun import ModelParams
from ionjc.states import default_n_max, rho_excited_input, rho_ground_input

W = 1.5
FIG3 = ModelParams(k=2, eta=0.2, delta_phi=0.0, delta_omega=0.1)
ALPHA0 = math.sqrt(5.0)


def _random_state(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _coherent_rho(alpha0, n_max):
    import scipy.special as sps

    n = np.arange(n_max + 1)
    r = abs(alpha0)
    c = np.exp(n * math.log(r) - 0.5 * r * r - 0.5 * sps.gammaln(n + 1.0)) * np.exp(
        1j * n * np.angle(alpha0)
    )
    return np.outer(c, c.conj())


class TestLambda:
    def test_zero_indices(self):
        for x in (0.0, 0.3, 2.0):
            assert lambda_nm(0, 0, x) == 1.0

    def test_at_zero_argument(self):
        for n in range(4):
            for m in range(4):
                expected = 1.0 if n == m else 0.0
                assert lambda_nm(n, m, 0.0) == expected

    def test_value_12(self):
        # -x sqrt(1/2) L_1^(1)(x^2) at x = 0.5, L_1^(1)(y) = 2 - y
        ref = -0.5 * math.sqrt(0.5) * (2.0 - 0.25)
        assert ref == pytest.approx(-0.61872, abs=2e-6)
        assert lambda_nm(1, 2, 0.5) == pytest.approx(ref, rel=1e-13)

    def test_index_swap_parity(self, rng):
        # Lambda_{n,m} = (-1)^(n-m) Lambda_{m,n}
        for _ in range(20):
            n, m = rng.integers(0, 12, size=2)
            x = float(rng.uniform(0, 3))
            assert lambda_nm(int(n), int(m), x) == pytest.approx(
                (-1.0) ** abs(int(n) - int(m)) * lambda_nm(int(m), int(n), x), rel=1e-12, abs=1e-300
            )


class TestElement:
    def test_vacuum_closed_form(self):
        # integral_0^1 z (arccos z - z sqrt(1-z^2)) dz = pi/16
        assert complex(p_omega_element(0, 0, 0.0, W)) == pytest.approx(W * W / math.pi, rel=1e-9)

    def test_conjugation_symmetry(self, rng):
        for _ in range(10):
            n, m = int(rng.integers(0, 8)), int(rng.integers(0, 8))
            alpha = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            lhs = p_omega_element(n, m, alpha, W)
            rhs = np.conj(p_omega_element(m, n, alpha, W))
            assert abs(lhs - rhs) < 1e-13

    def test_off_diagonal_at_origin_vanishes(self):
        assert abs(p_omega_element(0, 1, 0.0, W)) == 0.0

    def test_quadrature_converged(self, rng):
        # doubling the node count moves nothing by more than 1e-8
        for _ in range(12):
            n = int(rng.integers(0, 61))
            m = int(rng.integers(0, 61))
            w = float(rng.uniform(0.3, 2.0))
            alpha = complex(rng.uniform(-6, 6), rng.uniform(-6, 6))
            v128 = p_omega_element(n, m, alpha, w, quad_nodes=128)
            v256 = p_omega_element(n, m, alpha, w, quad_nodes=256)
            assert abs(v128 - v256) < 1e-8

    def test_validation(self):
        with pytest.raises(ValueError):
            p_omega_element(0, 0, 0.0, -1.0)
        with pytest.raises(ValueError):
            p_omega_element(0, 0, 0.0, W, quad_nodes=32)


class TestGrid:
    def test_vacuum_center_value(self):
        rho = np.array([[1.0 + 0j]])
        grid = p_omega_grid(rho, GridSpec.square(0.0, 1), W)
        assert grid.values[0, 0] == pytest.approx(W * W / math.pi, rel=1e-9)

    def test_matches_element_assembly(self, rng):
        rho = _random_state(rng, 5)
        spec = GridSpec(-1.0, 1.0, -0.5, 0.5, 4, 3)
        grid = p_omega_grid(rho, spec, W, use_cache=False)
        alphas = spec.alphas()
        for i in range(spec.n_im):
            for j in range(spec.n_re):
                ref = sum(
                    rho[m, n] * p_omega_element(n, m, complex(alphas[i, j]), W)
                    for m in range(5)
                    for n in range(5)
                )
                assert abs(grid.values[i, j] - ref.real) < 1e-12
                assert abs(ref.imag) < 1e-9 * np.max(np.abs(grid.values))

    def test_realness_residue(self, rng):
        rho = _random_state(rng, 6)
        grid = p_omega_grid(rho, GridSpec.square(2.0, 21), W, use_cache=False)
        assert grid.imag_residue <= 1e-9 * np.max(np.abs(grid.values))

    def test_coherent_state_nonnegative(self):
        rho = _coherent_rho(1.0 + 0.5j, 22)
        grid = p_omega_grid(rho, GridSpec.square(3.5, 41), W)
        assert grid.values.min() > -1e-6

    def test_coherent_peak_position(self):
        alpha0 = 1.0 + 0.5j
        rho = _coherent_rho(alpha0, 22)
        spec = GridSpec.square(2.0, 41)
        grid = p_omega_grid(rho, spec, W)
        i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        re, im = spec.axes()
        cell = re[1] - re[0]
        assert abs(re[j] - alpha0.real) <= cell + 1e-12
        assert abs(im[i] - alpha0.imag) <= cell + 1e-12

    def test_normalization_over_disc(self):
        # P_Omega integrates to 1; the filter's jinc^2 tail outside the disc
        # scales like 1/(pi w R), so the filter must be wide enough for the
        # disc |alpha0| + 4 to hold all but < 1e-2 of the mass (w = 8 here;
        # far larger w is out of reach of the float64 Laguerre quadrature)
        alpha0 = 0.5
        rho = _coherent_rho(alpha0, 14)
        spec = GridSpec.square(4.5, 301)
        grid = p_omega_grid(rho, spec, 8.0, quad_nodes=300, use_cache=False)
        re, im = spec.axes()
        cell = (re[1] - re[0]) * (im[1] - im[0])
        mask = np.abs(spec.alphas()) <= abs(alpha0) + 4.0
        integral = float(np.sum(grid.values[mask]) * cell)
        assert integral == pytest.approx(1.0, abs=1e-2)

    def test_rotation_covariance(self, rng):
        # rotating the state by chi = pi/2 maps the symmetric grid onto itself
        rho = _random_state(rng, 5)
        n = np.arange(5)
        chi = 0.5 * math.pi
        rot = np.exp(1j * (n[None, :] - n[:, None]) * chi)  # rho_{m,n} e^{i(n-m)chi}
        spec = GridSpec.square(1.5, 13)
        base = p_omega_grid(rho, spec, W, use_cache=False).values
        rotated = p_omega_grid(rho * rot, spec, W, use_cache=False).values
        # P(alpha; rotated rho) = P(alpha e^{i chi}; rho): with chi = pi/2,
        # rotated[i, j] = base at (re = -im_i, im = re_j) = rot90(base)[i, j]
        assert np.max(np.abs(rotated - np.rot90(base, k=1))) < 1e-8

    def test_fig3a_two_lobes_with_interference(self):
        n_max = default_n_max(ALPHA0, FIG3.k)
        rho = rho_excited_input(50.0, 0.0, FIG3, ALPHA0, n_max)
        spec = GridSpec.square(4.0, 81)
        grid = p_omega_grid(rho.entries, spec, W)
        vals = grid.values
        vmax = vals.max()
        # strong negativity in between the structures
        assert vals.min() < -0.01 * vmax
        # two separated positive lobes along the real axis structure: count
        # local maxima above 40% of the peak
        from scipy.ndimage import maximum_filter

        peaks = (vals == maximum_filter(vals, size=9)) & (vals > 0.4 * vmax)
        assert peaks.sum() >= 2

    def test_cache_reused_and_consistent(self):
        clear_table_cache()
        n_max = default_n_max(1.0, 0)
        p = ModelParams(k=0, eta=0.3, delta_phi=0.2, delta_omega=0.1)
        spec = GridSpec.square(2.0, 15)
        r1 = rho_ground_input(3.0, 0.0, p, 1.0, n_max)
        r2 = rho_ground_input(6.0, 0.0, p, 1.0, n_max)
        g1 = p_omega_grid(r1.entries, spec, W)
        g2 = p_omega_grid(r2.entries, spec, W)
        g2_nocache = p_omega_grid(r2.entries, spec, W, use_cache=False)
        assert np.array_equal(g2.values, g2_nocache.values)
        assert not np.array_equal(g1.values, g2.values)


class TestCharacteristicOracle:
    def test_vacuum(self):
        rho = np.array([[1.0 + 0j]])
        assert characteristic_oracle(rho, 0.0, W) == pytest.approx(W * W / math.pi, abs=1e-4)

    def test_agreement_on_grid(self, rng):
        rho = _random_state(rng, 4)
        alphas = np.array(
            [complex(x, y) for x in np.linspace(-1, 1, 5) for y in np.linspace(-1, 1, 5)]
        )
        oracle = _characteristic_oracle_many(rho, alphas, W)
        direct = [
            sum(rho[m, n] * p_omega_element(n, m, al, W) for m in range(4) for n in range(4)).real
            for al in alphas
        ]
        assert np.max(np.abs(oracle - np.array(direct))) < 1e-4

    def test_coherent_peak(self):
        alpha0 = 0.8 + 0.4j
        rho = _coherent_rho(alpha0, 13)
        xs = np.linspace(0.3, 1.3, 11)
        ys = np.linspace(-0.1, 0.9, 11)
        alphas = np.array([complex(x, y) for x in xs for y in ys])
        vals = _characteristic_oracle_many(rho, alphas, W)
        best = alphas[int(np.argmax(vals))]
        cell = xs[1] - xs[0]
        assert abs(best.real - alpha0.real) <= cell + 1e-12
        assert abs(best.imag - alpha0.imag) <= cell + 1e-12


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(0, 1, 0, 1, 0, 3)
        with pytest.raises(ValueError):
            GridSpec(1, 0, 0, 1, 3, 3)

    def test_alphas_layout(self):
        spec = GridSpec(-1, 1, -2, 2, 3, 5)
        al = spec.alphas()
        assert al.shape == (5, 3)
        assert al[0, 0] == complex(-1, -2)
        assert al[-1, -1] == complex(1, 2)
