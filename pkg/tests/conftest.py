"""Shared builders for the test suite.

Everything here is deliberately dumb and direct: fields are rasterized with
plain numpy index arithmetic so the tests never depend on the code paths they
are checking.
"""

import numpy as np

import thresholdflow as tf


def square_grid(n, dim=2):
    return tf.GridSpec(dim, (n,) * dim)


def resolved_h(n, beta=0.5, width_cells=2.5):
    """Time step whose narrow kernel spans ``width_cells`` grid spacings."""
    return (width_cells / n) ** 2 / beta


def disk_labels(n, radius, center=(0.5, 0.5), phase_in=1, phase_out=0,
                num_phases=2):
    """Exact rasterized disk: cells whose centers lie inside the circle."""
    grid = square_grid(n)
    coords = (np.arange(n) + 0.5) / n
    dx = np.abs(coords[:, None] - center[0])
    dy = np.abs(coords[None, :] - center[1])
    dx = np.minimum(dx, 1.0 - dx)
    dy = np.minimum(dy, 1.0 - dy)
    labels = np.full((n, n), phase_out, dtype=np.uint8)
    labels[dx ** 2 + dy ** 2 <= radius ** 2] = phase_in
    return tf.LabelField(grid, labels, num_phases)


def stripe_labels(n, width=0.5, phase_in=1, phase_out=0, num_phases=2):
    """Axis-0 stripe of the given width, centered in the domain."""
    grid = square_grid(n)
    coords = (np.arange(n) + 0.5) / n
    offset = (1.0 - width) / 2.0
    inside = ((coords - offset) % 1.0) < width
    labels = np.where(inside[:, None], phase_in, phase_out).astype(np.uint8)
    labels = np.broadcast_to(labels, (n, n)).copy()
    return tf.LabelField(grid, labels, num_phases)


def random_labels(seed, n, num_phases):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, num_phases, (n, n)).astype(np.uint8)
    return tf.LabelField(square_grid(n), labels, num_phases)


def random_simplex_fields(seed, n, num_phases):
    """Random relaxed partition: per-cell Dirichlet points on the simplex."""
    rng = np.random.default_rng(seed)
    u = rng.dirichlet(np.ones(num_phases), size=(n, n))
    grid = square_grid(n)
    return [tf.ScalarField(grid, np.ascontiguousarray(u[:, :, i]))
            for i in range(num_phases)]


def validated_uniform_coeffs(num_phases, sigma=1.0, mu=1.0, gamma=2.0,
                             beta=0.5):
    spec = tf.uniform_material(num_phases, sigma=sigma, mu=mu)
    coeffs = tf.compute_coefficients(spec, gamma, beta)
    tf.validate(spec, coeffs)
    return spec, coeffs


def offdiag(num_phases, value=1.0):
    """Symmetric matrix with a constant off-diagonal and zero diagonal."""
    return value * (1.0 - np.eye(num_phases))


def mercedes_labels(n, start_angle=90.0):
    """Three 120-degree sectors meeting at the domain center."""
    grid = square_grid(n)
    coords = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(coords, coords, indexing="ij")
    theta = np.degrees(np.arctan2(Y - 0.5, X - 0.5))
    sector = np.floor(((theta - start_angle) % 360.0) / 120.0)
    return tf.LabelField(grid, sector.astype(np.uint8), 3)


def central_junction(reports):
    """The junction report closest to the domain center."""
    return min(reports, key=lambda r: (r.location[0] - 0.5) ** 2
               + (r.location[1] - 0.5) ** 2)
