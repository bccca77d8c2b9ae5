"""Periodic fields, Gaussian convolution, comparison functions, snapshots.

Reference values come from plane-wave eigenfunction algebra (a Fourier mode
decays by exp(-4 pi^2 t |k|^2)) and from a brute-force real-space quadrature
against the periodized Gaussian implemented independently below.
"""

import math
import os

import numpy as np
import pytest

import thresholdflow as tf
from conftest import (random_labels, resolved_h, square_grid, stripe_labels,
                      validated_uniform_coeffs)


def cell_coords(n):
    return (np.arange(n) + 0.5) / n


def periodized_gaussian_quadrature(values, t, images=3):
    """Direct real-space convolution with the periodized 2D heat kernel.

    O(M^2) double sum over cells; image sources over [-images, images]^2
    (Gaussian tails beyond that are < 1e-16 for every t used in tests).
    """
    n = values.shape[0]
    x = cell_coords(n)
    diff = x[:, None] - x[None, :]  # all pairwise 1D offsets
    # separable kernel: G_t(z) = g(z1) g(z2) with g the 1D heat kernel
    g1 = sum(np.exp(-((diff + m) ** 2) / (4.0 * t))
             for m in range(-images, images + 1))
    g1 = g1 / math.sqrt(4.0 * math.pi * t)
    return g1 @ values @ g1.T / (n * n)


def test_indicator_uniform_and_stripe():
    grid = square_grid(16)
    uniform = tf.LabelField(grid, np.zeros((16, 16), dtype=np.uint8), 2)
    assert np.all(tf.indicator(uniform, 0).values == 1.0)
    assert np.all(tf.indicator(uniform, 1).values == 0.0)
    stripe = stripe_labels(16)
    ind = tf.indicator(stripe, 1)
    assert np.array_equal(ind.values, (stripe.labels == 1).astype(float))
    total = sum(tf.indicator(stripe, p).values for p in range(2))
    assert np.all(total == 1.0)


def test_plane_wave_decay_factor():
    n, t = 64, 0.01
    grid = square_grid(n)
    x = cell_coords(n)
    f = np.cos(2 * np.pi * x)[:, None] * np.ones((1, n))
    out = tf.gaussian_convolve(tf.ScalarField(grid, f), t).values
    expected = math.exp(-4.0 * math.pi ** 2 * t) * f
    assert abs(math.exp(-4.0 * math.pi ** 2 * t) - 0.6738) < 1e-4
    assert np.max(np.abs(out - expected)) < 1e-12


def test_plane_wave_against_realspace_quadrature():
    n, t = 32, 0.01
    grid = square_grid(n)
    x = cell_coords(n)
    f = np.cos(2 * np.pi * x)[:, None] * np.ones((1, n))
    spectral = tf.gaussian_convolve(tf.ScalarField(grid, f), t).values
    direct = periodized_gaussian_quadrature(f, t)
    assert np.max(np.abs(spectral - direct)) < 1e-12


def test_random_field_against_realspace_quadrature():
    n, t = 32, 4e-3
    grid = square_grid(n)
    rng = np.random.default_rng(9)
    f = rng.random((n, n))
    spectral = tf.gaussian_convolve(tf.ScalarField(grid, f), t).values
    direct = periodized_gaussian_quadrature(f, t)
    # the sampled-kernel quadrature aliases above Nyquist; at this t the
    # residual is ~exp(-4 pi^2 t (n/2)^2) ~ 3e-18 of the signal
    assert np.max(np.abs(spectral - direct)) < 1e-12


def test_constant_preserved_and_mean_exact():
    grid = square_grid(32)
    c = tf.ScalarField(grid, np.full((32, 32), 0.42))
    out = tf.gaussian_convolve(c, 0.37).values
    assert np.max(np.abs(out - 0.42)) < 1e-14
    rng = np.random.default_rng(1)
    f = rng.random((32, 32))
    out2 = tf.gaussian_convolve(tf.ScalarField(grid, f), 0.02).values
    assert abs(out2.mean() - f.mean()) < 1e-14


def test_semigroup_property():
    grid = square_grid(64)
    rng = np.random.default_rng(4)
    f = tf.ScalarField(grid, rng.random((64, 64)))
    two_step = tf.gaussian_convolve(tf.gaussian_convolve(f, 3e-3), 7e-3)
    one_step = tf.gaussian_convolve(f, 1e-2)
    assert np.max(np.abs(two_step.values - one_step.values)) < 1e-12


def test_nonpositive_time_rejected():
    grid = square_grid(16)
    f = tf.ScalarField(grid, np.zeros((16, 16)))
    for t in (0.0, -1e-3):
        with pytest.raises(tf.NonpositiveTimeError):
            tf.gaussian_convolve(f, t)


def test_maximum_principle_and_range():
    grid = square_grid(64)
    for seed in range(5):
        f = (random_labels(seed, 64, 2).labels == 1).astype(float)
        for t in (1e-4, 1e-3, 1e-2, 0.1):
            out = tf.gaussian_convolve(tf.ScalarField(grid, f), t).values
            assert out.min() >= -1e-12
            assert out.max() <= 1.0 + 1e-12
    # sharper statement: output range sits inside the input range +- 1e-12
    rng = np.random.default_rng(17)
    g = rng.uniform(-3.0, 5.0, (64, 64))
    out = tf.gaussian_convolve(tf.ScalarField(grid, g), 2e-3).values
    assert out.min() >= g.min() - 1e-12
    assert out.max() <= g.max() + 1e-12


def test_translation_equivariance():
    grid = square_grid(64)
    rng = np.random.default_rng(11)
    f = rng.random((64, 64))
    out = tf.gaussian_convolve(tf.ScalarField(grid, f), 3e-3).values
    for shift in ((5, 3), (31, 17)):
        rolled = np.roll(f, shift, axis=(0, 1))
        out_rolled = tf.gaussian_convolve(tf.ScalarField(grid, rolled),
                                          3e-3).values
        # scalar outputs agree to last-ulp transform roundoff ...
        assert np.max(np.abs(np.roll(out, shift, axis=(0, 1)) - out_rolled)) \
            <= 1e-15
    # ... and full threshold dynamics commute with shifts cell-exactly
    _, coeffs = validated_uniform_coeffs(3)
    h = resolved_h(64)
    labels = random_labels(2, 64, 3)
    shifted = tf.LabelField(grid, np.roll(labels.labels, (9, 40),
                                          axis=(0, 1)), 3)
    end = tf.run(labels, coeffs, tf.SchemeConfig(h=h, steps=10)).final
    end_shifted = tf.run(shifted, coeffs, tf.SchemeConfig(h=h, steps=10)).final
    assert np.array_equal(np.roll(end.labels, (9, 40), axis=(0, 1)),
                          end_shifted.labels)


def test_refinement_consistency_second_order():
    # a smooth non-bandlimited field convolved on nested grids agrees at the
    # coarse scale with O(spacing^2) error: each refinement divides the
    # mismatch by about 4
    def sample(n):
        x = cell_coords(n)
        X, Y = np.meshgrid(x, x, indexing="ij")
        return np.exp(np.cos(2 * np.pi * X)) * np.exp(0.5 * np.sin(2 * np.pi * Y))

    def block_mean(a, k):
        n = a.shape[0] // k
        return a.reshape(n, k, n, k).mean(axis=(1, 3))

    results = {n: tf.gaussian_convolve(
        tf.ScalarField(square_grid(n), sample(n)), 0.01).values
        for n in (32, 64, 128, 256)}
    errs = [np.max(np.abs(results[n] - block_mean(results[256], 256 // n)))
            for n in (32, 64, 128)]
    assert errs[1] / errs[0] < 0.35
    assert errs[2] / errs[1] < 0.35


def test_parseval_and_spectral_round_trip():
    grid = square_grid(64)
    rng = np.random.default_rng(8)
    f = rng.random((64, 64))
    g = rng.random((64, 64))
    sf, sg = tf.to_spectral(tf.ScalarField(grid, f)), \
        tf.to_spectral(tf.ScalarField(grid, g))
    assert sf.coeffs[0, 0] == f.mean()  # zero mode stores the grid mean
    assert np.max(np.abs(tf.to_scalar(sf).values - f)) < 1e-14
    # nonnegative-frequency storage: double every conjugate-pair column
    weights = np.full(33, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    spectral = float(np.sum((sf.coeffs * np.conj(sg.coeffs)).real
                            * weights[None, :]))
    grid_ip = float(np.mean(f * g))
    assert abs(spectral - grid_ip) / abs(grid_ip) < 1e-12


def test_heat_multiplier_shape_and_values():
    grid = square_grid(16)
    mult = tf.heat_multiplier(grid, 0.01)
    assert mult.shape == (16, 9)  # nonnegative last-axis frequencies
    assert mult[0, 0] == 1.0
    # frequency (1, 0) decays by exp(-4 pi^2 t)
    assert abs(mult[1, 0] - math.exp(-4 * math.pi ** 2 * 0.01)) < 1e-15


def test_resolution_guard_warning_and_error():
    grid = square_grid(64)  # spacing 1/64
    with pytest.warns(tf.ResolutionWarning):
        tf.check_resolution(grid, 0.5, 1e-3)   # width 0.022 < 2 * spacing
    with pytest.raises(tf.ResolutionError):
        tf.check_resolution(grid, 0.5, 1e-5)   # width 0.002 < spacing / 2
    # resolved: no warning
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tf.check_resolution(grid, 0.5, 5e-3)


def test_comparison_trivial_two_phase():
    grid = square_grid(32)
    _, coeffs = validated_uniform_coeffs(2)
    h = resolved_h(32)
    a12b12 = coeffs.a[0, 1] + coeffs.b[0, 1]
    empty = [tf.ScalarField(grid, np.ones((32, 32))),
             tf.ScalarField(grid, np.zeros((32, 32)))]
    psi0 = tf.weighted_kernel_convolve(empty, coeffs, h, 0)
    assert np.max(np.abs(psi0.values)) < 1e-15
    full = [tf.ScalarField(grid, np.zeros((32, 32))),
            tf.ScalarField(grid, np.ones((32, 32)))]
    psi0_full = tf.weighted_kernel_convolve(full, coeffs, h, 0)
    assert np.max(np.abs(psi0_full.values - a12b12)) < 1e-12


def test_comparison_matches_combined_multiplier():
    # psi_i assembled from two Gaussian convolutions equals a single pass with
    # the combined multiplier a_ij exp(-4 pi^2 gamma h |k|^2) +
    # b_ij exp(-4 pi^2 beta h |k|^2), evaluated here with numpy's FFT directly
    n = 64
    grid = square_grid(n)
    spec, coeffs = validated_uniform_coeffs(3)
    h = resolved_h(n)
    labels = random_labels(21, n, 3)
    fields = tf.phase_fields(labels)

    kx = np.fft.fftfreq(n, d=1.0 / n)
    k2 = kx[:, None] ** 2 + kx[None, :] ** 2
    for i in range(3):
        acc = np.zeros((n, n))
        for j in range(3):
            if j == i:
                continue
            mult = (coeffs.a[i, j] * np.exp(-4 * np.pi ** 2 * coeffs.gamma * h * k2)
                    + coeffs.b[i, j] * np.exp(-4 * np.pi ** 2 * coeffs.beta * h * k2))
            acc += np.fft.ifft2(np.fft.fft2(fields[j].values) * mult).real
        psi = tf.weighted_kernel_convolve(fields, coeffs, h, i)
        assert np.max(np.abs(psi.values - acc)) < 1e-12


def test_comparison_fields_agree_with_per_phase_calls():
    n = 32
    spec, coeffs = validated_uniform_coeffs(3)
    h = resolved_h(n)
    fields = tf.phase_fields(random_labels(5, n, 3))
    batch = tf.comparison_fields(fields, coeffs, h)
    assert len(batch) == 3
    for i in range(3):
        single = tf.weighted_kernel_convolve(fields, coeffs, h, i)
        assert np.max(np.abs(batch[i].values - single.values)) < 1e-14


def test_label_snapshot_round_trip(tmp_path):
    labels = random_labels(3, 16, 4)
    base = os.path.join(tmp_path, "snap")
    tf.write_labels(base, labels, step=12, time=0.75)
    header = open(base + ".hdr").read()
    for token in ("dim 2", "sizes 16 16", "num_phases 4", "step 12",
                  "time 0.75", "uint8"):
        assert token in header
    payload = open(base + ".bin", "rb").read()
    assert len(payload) == 16 * 16  # one unsigned byte per cell, row-major
    assert payload == labels.labels.astype(np.uint8).tobytes()
    back, step, time = tf.read_labels(base)
    assert np.array_equal(back.labels, labels.labels)
    assert back.num_phases == 4 and step == 12 and time == 0.75


def test_scalar_snapshot_round_trip(tmp_path):
    grid = square_grid(16)
    rng = np.random.default_rng(0)
    field = tf.ScalarField(grid, rng.standard_normal((16, 16)))
    base = os.path.join(tmp_path, "field")
    tf.write_scalar(base, field, step=3, time=0.5)
    payload = open(base + ".bin", "rb").read()
    assert len(payload) == 16 * 16 * 8  # little-endian float64 per cell
    assert payload == field.values.astype("<f8").tobytes()
    back, step, time = tf.read_scalar(base)
    assert np.array_equal(back.values, field.values)
    assert step == 3 and time == 0.5
