"""Geometric measurement probes: disk radii, interface length, junction
angles, the Young-law targets, and shrink-rate fits."""

import math
import os
import warnings

import numpy as np
import pytest

import thresholdflow as tf
from conftest import (central_junction, disk_labels, mercedes_labels,
                      resolved_h, square_grid, stripe_labels,
                      validated_uniform_coeffs)


# --- disk radius ----------------------------------------------------------

def test_disk_radius_recovers_known_radius():
    labels = disk_labels(256, 0.25)
    estimate = tf.disk_radius(labels, 1)
    assert abs(estimate - 0.25) <= 2.0 / 256


def test_disk_radius_empty_phase():
    labels = stripe_labels(32, num_phases=3)  # phase 2 never used
    with pytest.raises(tf.EmptyPhase):
        tf.disk_radius(labels, 2)


def test_disk_radius_full_domain():
    grid = square_grid(16)
    labels = tf.LabelField(grid, np.ones((16, 16), dtype=np.uint8), 2)
    assert tf.disk_radius(labels, 1) == math.sqrt(1.0 / math.pi)


# --- interface length -----------------------------------------------------

def test_interface_length_flat_stripe():
    stripe = stripe_labels(256)
    m = tf.interface_length(stripe, 0, 1)
    assert abs(m.length_estimate - 2.0) <= 2.0 / 256
    assert m.pair == (0, 1)
    assert m.closed


def test_interface_length_circle():
    labels = disk_labels(256, 0.25)
    m = tf.interface_length(labels, 0, 1)
    target = 2.0 * math.pi * 0.25
    assert abs(m.length_estimate - target) / target < 0.03


def test_interface_length_no_contact():
    # bands 0 | 1 | 2 | 1: phases 0 and 2 never touch
    n = 64
    grid = square_grid(n)
    arr = np.zeros((n, n), dtype=np.uint8)
    arr[n // 4: n // 2] = 1
    arr[n // 2: 3 * n // 4] = 2
    arr[3 * n // 4:] = 1
    labels = tf.LabelField(grid, arr, 3)
    m = tf.interface_length(labels, 0, 2)
    assert m.length_estimate == 0.0
    assert m.polylines == []


def test_interface_length_symmetric_in_pair_order():
    labels = disk_labels(128, 0.3)
    assert tf.interface_length(labels, 0, 1).length_estimate \
        == tf.interface_length(labels, 1, 0).length_estimate


def test_interface_length_error_decays_with_refinement():
    # staircase bias should shrink roughly first order under refinement
    target = 2.0 * math.pi * 0.25
    errors = []
    for n in (128, 256, 512):
        m = tf.interface_length(disk_labels(n, 0.25), 0, 1)
        errors.append(abs(m.length_estimate - target))
    assert errors[1] / errors[0] < 0.6
    assert errors[2] / errors[1] < 0.6


# --- junction angles ------------------------------------------------------

def test_junction_angles_symmetric_triple():
    reports = tf.junction_angles(mercedes_labels(256), window=16)
    assert len(reports) >= 1
    rep = central_junction(reports)
    assert max(abs(rep.location[0] - 0.5), abs(rep.location[1] - 0.5)) < 0.02
    assert len(rep.angles) == 3
    assert abs(sum(rep.angles) - 360.0) < 1e-9
    for angle in rep.angles:
        assert abs(angle - 120.0) < 3.0
    assert sorted(rep.wedge_phases) == [0, 1, 2]


def test_junction_angles_two_phase_none():
    assert tf.junction_angles(disk_labels(128, 0.3)) == []


def test_junction_angles_rotation_equivariance():
    labels = mercedes_labels(256)
    grid = labels.grid
    rotated = tf.LabelField(
        grid, np.ascontiguousarray(np.rot90(labels.labels)), 3)
    base = central_junction(tf.junction_angles(labels, window=16))
    rot = central_junction(tf.junction_angles(rotated, window=16))
    assert sorted(base.angles) == sorted(rot.angles)


# --- Young angles ---------------------------------------------------------

def test_young_angles_equal_tensions():
    angles = tf.young_angles((1.0, 1.0, 1.0))
    assert np.max(np.abs(np.asarray(angles) - 120.0)) < 1e-12


def test_young_angles_unequal_tensions_closed_form():
    sigma = (1.0, 1.0, 1.2)  # (s12, s13, s23)
    angles = tf.young_angles(sigma)
    # angle opposite the 1.2 interface: cos(theta_1) = -(1.2^2)/2 + ... via
    # the law of cosines on the force triangle; for (1, 1, 1.2) the vertex
    # angles are arccos(-0.6) twice and the complement once
    expected_small = math.degrees(math.acos(1.2 * 1.2 / 2.0 - 1.0))
    expected_large = math.degrees(math.acos(-0.6))
    assert abs(angles[0] - expected_small) < 1e-8
    assert abs(angles[1] - expected_large) < 1e-8
    assert abs(angles[2] - expected_large) < 1e-8
    assert abs(sum(angles) - 360.0) < 1e-9
    assert tf.young_force_residual(sigma, angles) < 1e-10


def test_young_angles_random_admissible_triples():
    rng = np.random.default_rng(23)
    count = 0
    while count < 50:
        s = rng.uniform(0.2, 2.0, size=3)
        if (s[0] + s[1] <= s[2] or s[1] + s[2] <= s[0]
                or s[0] + s[2] <= s[1]):
            continue
        angles = tf.young_angles(tuple(s))
        assert abs(sum(angles) - 360.0) < 1e-9
        assert all(0.0 < a < 360.0 for a in angles)
        assert tf.young_force_residual(tuple(s), angles) < 1e-10
        count += 1


def test_young_angles_inadmissible_tensions():
    with pytest.raises(tf.InadmissibleTensions):
        tf.young_angles((1.0, 1.0, 2.5))
    with pytest.raises(tf.InadmissibleTensions):
        tf.young_angles((1.0, 1.0, 2.0))


# --- shrink-rate fit ------------------------------------------------------

@pytest.fixture(scope="module")
def shrinking_disk_run():
    _, coeffs = validated_uniform_coeffs(2)
    return tf.run(disk_labels(128, 0.3), coeffs,
                  tf.SchemeConfig(h=1e-3, steps=40))


def test_shrink_rate_matches_curvature_law(shrinking_disk_run):
    slope, rms = tf.shrink_rate_fit(shrinking_disk_run, 1)
    assert abs(slope - (-2.0)) / 2.0 < 0.05
    assert rms < 1e-3


def test_shrink_rate_stationary_stripe():
    _, coeffs = validated_uniform_coeffs(2)
    trajectory = tf.run(stripe_labels(64), coeffs,
                        tf.SchemeConfig(h=2e-3, steps=20))
    slope, _ = tf.shrink_rate_fit(trajectory, 1, radius_floor_cells=0.0)
    assert abs(slope) < 0.1


def test_shrink_rate_window_too_short():
    _, coeffs = validated_uniform_coeffs(2)
    trajectory = tf.run(disk_labels(128, 0.3), coeffs,
                        tf.SchemeConfig(h=1e-3, steps=8))
    with pytest.raises(tf.WindowTooShort):
        tf.shrink_rate_fit(trajectory, 1)


def test_shrink_rate_rejects_growing_phase(shrinking_disk_run):
    with pytest.raises(tf.NotShrinking):
        tf.shrink_rate_fit(shrinking_disk_run, 0, radius_floor_cells=0.0)


# --- CSV sink -------------------------------------------------------------

def test_probes_csv_format(tmp_path):
    path = os.path.join(tmp_path, "probes.csv")
    tf.write_probes_csv(path, [("disk_radius", 10, 0.25, 0.25, 0.0),
                               ("interface_length", 20, 1.57, math.pi / 2,
                                1.0e-3)])
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "kind,step,value,target,error"
    assert len(lines) == 3
    fields = lines[1].split(",")
    assert fields[0] == "disk_radius" and fields[1] == "10"
    assert float(fields[2]) == 0.25
    assert "e" in fields[2]  # fixed scientific notation with 11 digits
