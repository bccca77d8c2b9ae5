"""Brute-force certification that thresholding minimizes the movement
objective, plus transform-free re-evaluation of energy and distance."""

import math
import warnings

import numpy as np
import pytest

import thresholdflow as tf
from conftest import (random_labels, resolved_h, square_grid,
                      validated_uniform_coeffs)


def quiet_minimize(case):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", tf.ResolutionWarning)
        return tf.exhaustive_minimize(case)


def test_trivial_uniform_two_cell_grid():
    grid = tf.GridSpec(2, (2, 2))
    labels = tf.LabelField(grid, np.zeros((2, 2), dtype=np.uint8), 2)
    _, coeffs = validated_uniform_coeffs(2)
    case = tf.OracleCase(prev=labels, coeffs=coeffs, h=resolved_h(2))
    verdict = quiet_minimize(case)
    assert verdict.is_minimizer
    assert verdict.best_value == 0.0
    assert verdict.threshold_value == 0.0
    assert len(verdict.best_configs) == 1
    assert np.array_equal(verdict.threshold_labels, labels.labels)
    assert np.array_equal(verdict.best_configs[0], labels.labels)


def test_three_by_three_two_phase_sweep():
    _, coeffs = validated_uniform_coeffs(2)
    grid = tf.GridSpec(2, (3, 3))
    h = (1.5 * grid.max_spacing) ** 2 / coeffs.beta
    rng = np.random.default_rng(0)
    for _ in range(100):
        labels = tf.LabelField(
            grid, rng.integers(0, 2, size=(3, 3)).astype(np.uint8), 2)
        verdict = quiet_minimize(tf.OracleCase(prev=labels, coeffs=coeffs,
                                               h=h))
        assert verdict.is_minimizer
        gap = verdict.threshold_value - verdict.best_value
        assert gap <= 1e-12 * (1.0 + abs(verdict.best_value))


def test_two_by_two_three_phase_random_materials():
    rng = np.random.default_rng(7)
    for _ in range(100):
        case = tf.random_case(rng, (2, 2), 3)
        verdict = quiet_minimize(case)
        assert verdict.is_minimizer
        # every configuration tied with the optimum attains the same value
        for config in verdict.best_configs:
            grid = case.prev.grid
            cand = tf.LabelField(grid,
                                 np.asarray(config, dtype=np.uint8)
                                 .reshape(grid.sizes), 3)
            v = tf.movement_objective(tf.phase_fields(cand), case.prev,
                                      case.coeffs, case.h)
            assert abs(v - verdict.best_value) \
                <= 1e-10 * (1.0 + abs(verdict.best_value))


def test_suite_runner_reports_no_failures():
    verdicts, failures, max_gap = tf.run_suite(
        40, sizes_list=((2, 2), (3, 3)), phases_list=(2, 3), seed=11)
    assert len(verdicts) == 40
    assert failures == 0
    assert max_gap <= 1e-12


def test_enumeration_guard():
    _, coeffs = validated_uniform_coeffs(3)
    grid = tf.GridSpec(2, (4, 4))
    labels = tf.LabelField(grid, np.zeros((4, 4), dtype=np.uint8), 3)
    with pytest.raises(tf.EnumerationTooLarge):
        tf.OracleCase(prev=labels, coeffs=coeffs, h=2.0)


def test_relaxed_sampling_never_beats_threshold():
    rng = np.random.default_rng(3)
    case = tf.random_case(rng, (3, 3), 2)
    assert tf.relaxed_sampling_check(case, 0) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", tf.ResolutionWarning)
        worst = tf.relaxed_sampling_check(case, 1000, rng=rng)
    verdict = quiet_minimize(case)
    # positive values would mean a relaxed competitor beat the threshold state
    assert worst <= 1e-10 * (1.0 + abs(verdict.threshold_value))


def test_midpoint_field_does_not_beat_threshold():
    _, coeffs = validated_uniform_coeffs(2)
    grid = tf.GridSpec(2, (3, 3))
    h = resolved_h(3)
    labels = random_labels(2, 3, 2)
    case = tf.OracleCase(prev=labels, coeffs=coeffs, h=h)
    verdict = quiet_minimize(case)
    midpoint = [tf.ScalarField(grid, np.full((3, 3), 0.5)) for _ in range(2)]
    v = tf.movement_objective(midpoint, labels, coeffs, h)
    assert v >= verdict.threshold_value - 1e-10 * (1.0 + abs(v))


def test_realspace_constant_fields_closed_form():
    _, coeffs = validated_uniform_coeffs(2)
    grid = square_grid(8)
    h = resolved_h(8)
    c, e = 0.3, 0.8
    u = [tf.ScalarField(grid, np.full((8, 8), c)),
         tf.ScalarField(grid, np.full((8, 8), 1.0 - c))]
    v = [tf.ScalarField(grid, np.full((8, 8), e)),
         tf.ScalarField(grid, np.full((8, 8), 1.0 - e))]
    ab = coeffs.a[0, 1] + coeffs.b[0, 1]
    expected_energy = 2.0 * c * (1.0 - c) * ab / math.sqrt(h)
    expected_d = math.sqrt(4.0 * math.sqrt(h) * (c - e) ** 2 * ab)
    energy_rs, d_rs = tf.realspace_crosscheck(u, v, coeffs, h)
    assert abs(energy_rs - expected_energy) <= 1e-12 * expected_energy
    assert abs(d_rs - expected_d) <= 1e-12 * expected_d
    energy_sp = tf.approximate_energy(u, coeffs, h).total
    d_sp = tf.distance(u, v, coeffs, h)
    assert abs(energy_sp - expected_energy) <= 1e-12 * expected_energy
    assert abs(d_sp - expected_d) <= 1e-12 * expected_d


def test_realspace_agrees_with_spectral_on_random_fields():
    rng = np.random.default_rng(19)
    for _ in range(5):
        prev, coeffs, h = tf.random_field_case(rng, (16, 16), 3)
        succ, _ = tf.threshold_step(prev, coeffs, h)
        u, v = tf.phase_fields(succ), tf.phase_fields(prev)
        energy_rs, d_rs = tf.realspace_crosscheck(u, v, coeffs, h)
        energy_sp = tf.approximate_energy(u, coeffs, h).total
        d_sp = tf.distance(u, v, coeffs, h)
        assert abs(energy_rs - energy_sp) <= 1e-9 * max(energy_sp, 1e-12)
        assert abs(d_rs - d_sp) <= 1e-9 * max(d_sp, 1e-12)
        d_half = tf.distance_halftime(u, v, coeffs, h)
        d_half_rs = tf.realspace_distance_halftime(u, v, coeffs, h)
        assert abs(d_half - d_half_rs) <= 1e-9 * max(d_half, 1e-12)


def test_realspace_guard():
    _, coeffs = validated_uniform_coeffs(2)
    labels = random_labels(0, 128, 2)
    fields = tf.phase_fields(labels)
    with pytest.raises(tf.EnumerationTooLarge):
        tf.realspace_crosscheck(fields, fields, coeffs, resolved_h(128))
