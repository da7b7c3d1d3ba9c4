"""Transform, calculus, and quadrature checks against analytic oracles."""

import numpy as np
import pytest

from conftest import random_field, random_mean_zero
from pfcbench.spectral import (
    Grid2D,
    GridMismatchError,
    NonZeroMeanError,
    PeriodicField,
    SpectralField,
    SpectralOps,
    SpectralSymmetryError,
)


def direct_dft(values, L):
    """O(N^4) transform straight from the defining sum; the oracle."""
    N = values.shape[0]
    h = L / N
    x = h * np.arange(N)
    out = np.zeros((N, N), dtype=complex)
    freqs = np.fft.fftfreq(N, d=1.0 / N).astype(int)
    for i, r1 in enumerate(freqs):
        for j, r2 in enumerate(freqs):
            phase = np.exp(-2j * np.pi / L * (r1 * x[:, None] + r2 * x[None, :]))
            out[i, j] = h * h * np.sum(values * phase)
    return out


class TestGrid:
    def test_spacing_derived(self):
        g = Grid2D(L=3.0, N=12)
        assert g.h * g.N == g.L

    def test_nodes_with_origin(self):
        g = Grid2D(L=4.0, N=8, origin=-2.0)
        nodes = g.nodes()
        assert nodes[0] == -2.0
        assert np.allclose(np.diff(nodes), 0.5)

    def test_node_index_snaps_and_wraps(self):
        g = Grid2D(L=2.0, N=10)
        assert g.node_index(0.6, 1.8) == (3, 9)
        assert g.node_index(2.0, 0.0) == (0, 0)  # periodic wrap
        with pytest.raises(ValueError, match="grid node"):
            g.node_index(0.55, 0.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            Grid2D(L=1.0, N=0)
        with pytest.raises(ValueError):
            Grid2D(L=-1.0, N=4)


class TestFieldArithmetic:
    def test_grid_mismatch_rejected(self, ops32):
        other = SpectralOps(Grid2D(L=2 * np.pi, N=16))
        a = ops32.constant(1.0)
        b = other.constant(1.0)
        with pytest.raises(GridMismatchError):
            _ = a + b
        with pytest.raises(GridMismatchError):
            ops32.inner(a, b)

    def test_shape_validated(self):
        g = Grid2D(L=1.0, N=4)
        with pytest.raises(ValueError):
            PeriodicField(g, np.zeros((4, 5)))


class TestDft:
    def test_constant_field(self, ops16):
        c = 2.75
        w = ops16.dft(ops16.constant(c))
        L = ops16.grid.L
        assert w.coeffs[0, 0] == pytest.approx(c * L**2, rel=1e-14)
        rest = np.abs(w.coeffs).sum() - abs(w.coeffs[0, 0])
        assert rest < 1e-10 * L**2

    def test_cosine_modes(self):
        g = Grid2D(L=5.0, N=16)
        ops = SpectralOps(g)
        X, _ = g.meshgrid()
        w = ops.dft(ops.field(np.cos(2 * np.pi * X / g.L)))
        assert w.coeffs[1, 0] == pytest.approx(g.L**2 / 2, rel=1e-12)
        assert w.coeffs[-1, 0] == pytest.approx(g.L**2 / 2, rel=1e-12)
        mask = np.ones_like(w.coeffs, dtype=bool)
        mask[1, 0] = mask[-1, 0] = False
        assert np.abs(w.coeffs[mask]).max() < 1e-10 * g.L**2

    def test_matches_direct_summation(self, rng):
        g = Grid2D(L=2.3, N=8)
        ops = SpectralOps(g)
        values = rng.standard_normal((8, 8))
        fast = ops.dft(ops.field(values)).coeffs
        slow = direct_dft(values, g.L)
        assert np.abs(fast - slow).max() < 1e-12 * np.abs(slow).max()

    def test_round_trip(self, ops32, rng):
        v = random_field(ops32, rng)
        back = ops32.idft(ops32.dft(v))
        assert np.abs(back.values - v.values).max() < 1e-12 * np.abs(v.values).max()


class TestIdft:
    def test_zero_spectrum(self, ops16):
        out = ops16.idft(SpectralField(ops16.grid, np.zeros((16, 16), complex)))
        assert np.all(out.values == 0.0)

    def test_single_mode_pair_is_cosine(self):
        g = Grid2D(L=3.0, N=16)
        ops = SpectralOps(g)
        coeffs = np.zeros((16, 16), complex)
        coeffs[1, 0] = g.L**2 / 2
        coeffs[-1, 0] = g.L**2 / 2
        out = ops.idft(SpectralField(g, coeffs))
        X, _ = g.meshgrid()
        assert np.abs(out.values - np.cos(2 * np.pi * X / g.L)).max() < 1e-12

    def test_asymmetric_spectrum_rejected(self, ops16):
        coeffs = np.zeros((16, 16), complex)
        coeffs[1, 0] = 1.0  # missing conjugate partner
        with pytest.raises(SpectralSymmetryError):
            ops16.idft(SpectralField(ops16.grid, coeffs))

    def test_spectral_round_trip(self, ops32, rng):
        v = random_field(ops32, rng)
        w = ops32.dft(v)
        w2 = ops32.dft(ops32.idft(w))
        assert np.abs(w2.coeffs - w.coeffs).max() < 1e-12 * np.abs(w.coeffs).max()


class TestFracLaplacian:
    def test_annihilates_constants(self, ops16):
        out = ops16.frac_laplacian(ops16.constant(4.2), 1)
        assert np.abs(out.values).max() < 1e-12

    @pytest.mark.parametrize("N", [16, 32, 33])
    @pytest.mark.parametrize("k", [1, 3])
    def test_cosine_eigenfunction(self, N, k):
        g = Grid2D(L=4.4, N=N)
        ops = SpectralOps(g)
        X, _ = g.meshgrid()
        v = ops.field(np.cos(2 * np.pi * k * X / g.L))
        lam = (2 * np.pi * k / g.L) ** 2
        out = ops.frac_laplacian(v, 1)
        assert np.abs(out.values - lam * v.values).max() < 1e-10 * lam

    def test_inverse_is_right_inverse_on_mean_zero(self, ops32, rng):
        v = random_mean_zero(ops32, rng)
        rt = ops32.frac_laplacian(ops32.frac_laplacian(v, 1), -1)
        assert np.abs(rt.values - v.values).max() < 1e-10 * np.abs(v.values).max()

    def test_inverse_requires_mean_zero(self, ops16):
        with pytest.raises(NonZeroMeanError):
            ops16.frac_laplacian(ops16.constant(1.0), -1)

    def test_square_is_composition(self, ops32, rng):
        v = random_field(ops32, rng)
        once = ops32.frac_laplacian(ops32.frac_laplacian(v, 1), 1)
        twice = ops32.frac_laplacian(v, 2)
        assert np.abs(once.values - twice.values).max() < 1e-9 * np.abs(twice.values).max()

    def test_bad_alpha(self, ops16):
        with pytest.raises(ValueError):
            ops16.frac_laplacian(ops16.constant(0.0), 3)


class TestGradientSq:
    def test_constant(self, ops16):
        out = ops16.gradient_sq(ops16.constant(3.0))
        assert np.abs(out.values).max() < 1e-14

    def test_sine_analytic(self):
        g = Grid2D(L=7.0, N=32)
        ops = SpectralOps(g)
        X, _ = g.meshgrid()
        k = 2 * np.pi / g.L
        out = ops.gradient_sq(ops.field(np.sin(k * X)))
        expect = (np.cos(k * X) * k) ** 2
        assert np.abs(out.values - expect).max() < 1e-12

    def test_parseval_form_of_integral(self, ops32):
        # smooth field: pointwise quadrature and the spectral sum agree
        X, Y = ops32.grid.meshgrid()
        v = ops32.field(np.sin(X) * np.cos(2 * Y) + 0.3 * np.cos(3 * X))
        direct = ops32.integral(ops32.gradient_sq(v))
        spectral = ops32.gradient_sq_integral(v)
        assert direct == pytest.approx(spectral, rel=1e-10)

    def test_parseval_form_random_odd_grid(self, rng):
        # odd grids have no Nyquist mode, so the identity holds for any field
        ops = SpectralOps(Grid2D(L=2.9, N=33))
        v = random_field(ops, rng)
        direct = ops.integral(ops.gradient_sq(v))
        spectral = ops.gradient_sq_integral(v)
        assert direct == pytest.approx(spectral, rel=1e-10)


class TestQuadrature:
    def test_inner_of_ones(self, ops16):
        L = ops16.grid.L
        assert ops16.inner(ops16.constant(1.0), ops16.constant(1.0)) == pytest.approx(L**2)

    def test_inner_cosine(self):
        g = Grid2D(L=2 * np.pi, N=32)
        ops = SpectralOps(g)
        X, _ = g.meshgrid()
        v = ops.field(np.cos(X))
        assert ops.inner(v, v) == pytest.approx(g.L**2 / 2, rel=1e-13)

    def test_inner_symmetry(self, ops32, rng):
        u, v = random_field(ops32, rng), random_field(ops32, rng)
        assert ops32.inner(u, v) == ops32.inner(v, u)

    @pytest.mark.parametrize("N", [16, 32])
    def test_parseval(self, N, rng):
        ops = SpectralOps(Grid2D(L=3.1, N=N))
        u, v = random_field(ops, rng), random_field(ops, rng)
        lhs = ops.inner(u, v)
        rhs = np.sum(ops.dft(u).coeffs * np.conj(ops.dft(v).coeffs)).real / ops.grid.L**2
        assert lhs == pytest.approx(rhs, rel=1e-10)


class TestNegNorm:
    def test_zero(self, ops16):
        assert ops16.neg_norm(ops16.zeros()) == 0.0

    def test_cosine_analytic(self):
        g = Grid2D(L=2 * np.pi, N=32)
        ops = SpectralOps(g)
        X, _ = g.meshgrid()
        v = ops.field(np.cos(X))
        expect = np.sqrt((g.L / (2 * np.pi)) ** 2 * g.L**2 / 2)
        assert ops.neg_norm(v) == pytest.approx(expect, rel=1e-12)

    def test_homogeneity(self, ops32, rng):
        v = random_mean_zero(ops32, rng)
        assert ops32.neg_norm(v * (-3.5)) == pytest.approx(3.5 * ops32.neg_norm(v), rel=1e-12)

    def test_requires_mean_zero(self, ops16):
        with pytest.raises(NonZeroMeanError):
            ops16.neg_norm(ops16.constant(1.0))


class TestMeanZero:
    def test_constant_to_zero(self, ops16):
        out = ops16.mean_zero(ops16.constant(5.0))
        assert np.abs(out.values).max() < 1e-14

    def test_idempotent(self, ops32, rng):
        v = random_mean_zero(ops32, rng)
        again = ops32.mean_zero(v)
        assert np.abs(again.values - v.values).max() < 1e-14

    def test_shifted_cosine(self):
        g = Grid2D(L=2 * np.pi, N=16)
        ops = SpectralOps(g)
        X, _ = g.meshgrid()
        out = ops.mean_zero(ops.field(3.0 + np.cos(X)))
        assert np.abs(out.values - np.cos(X)).max() < 1e-13


class TestLinearity:
    @pytest.mark.parametrize("op", ["lap", "bih", "inv", "dft"])
    def test_operations_linear(self, ops32, rng, op):
        u = random_mean_zero(ops32, rng)
        v = random_mean_zero(ops32, rng)
        a, b = 1.7, -0.4

        def apply(f):
            if op == "lap":
                return ops32.frac_laplacian(f, 1).values
            if op == "bih":
                return ops32.frac_laplacian(f, 2).values
            if op == "inv":
                return ops32.frac_laplacian(f, -1).values
            return ops32.dft(f).coeffs

        combined = apply(u * a + v * b)
        split = a * apply(u) + b * apply(v)
        assert np.abs(combined - split).max() < 1e-12 * max(np.abs(split).max(), 1.0)


class TestFftCounter:
    def test_two_per_frac_laplacian(self, ops32, rng):
        v = random_field(ops32, rng)
        before = ops32.fft_counter.count
        ops32.frac_laplacian(v, 1)
        assert ops32.fft_counter.count == before + 2
        ops32.frac_laplacian(v, 2)
        assert ops32.fft_counter.count == before + 4

    def test_one_per_transform(self, ops32, rng):
        v = random_field(ops32, rng)
        before = ops32.fft_counter.count
        w = ops32.dft(v)
        assert ops32.fft_counter.count == before + 1
        ops32.idft(w)
        assert ops32.fft_counter.count == before + 2

    def test_paused_context(self, ops32, rng):
        v = random_field(ops32, rng)
        before = ops32.fft_counter.count
        with ops32.fft_counter.paused():
            ops32.frac_laplacian(v, 1)
        assert ops32.fft_counter.count == before

    def test_quadrature_is_free(self, ops32, rng):
        u, v = random_field(ops32, rng), random_field(ops32, rng)
        before = ops32.fft_counter.count
        ops32.inner(u, v)
        ops32.mean_zero(u)
        ops32.norm_inf(v)
        assert ops32.fft_counter.count == before
