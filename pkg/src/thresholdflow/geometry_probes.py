"""Geometric observables of label fields and their analytic targets.

Measurements used by the acceptance experiments: equivalent disk radii from
phase areas, interface lengths from marching-squares contours (with a short
vertex-averaging pass to remove the staircase bias of binary contours),
triple-junction angles from total-least-squares ray fits, the Young angles
they are compared against, and the least-squares shrink-rate fit for the
V = -sigma mu H law.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyPhase, InadmissibleTensions, NotShrinking, WindowTooShort
from .spectral_field import phase_volumes

__all__ = [
    "InterfaceMeasurement",
    "JunctionReport",
    "disk_radius",
    "interface_length",
    "junction_angles",
    "young_angles",
    "young_force_residual",
    "shrink_rate_fit",
    "write_probes_csv",
]

SMOOTHING_BUDGET = 0.75


@dataclass
class InterfaceMeasurement:
    """Length (2D) or area (3D) of the interface between two phases.

    polylines holds one (m, 2) array of physical vertex coordinates per
    connected contour component (2D only); closed components carry their
    winding so vertices may extend beyond [0, 1) — reduce mod 1 to place
    them on the torus.
    """

    pair: tuple
    length_estimate: float
    polylines: list = field(default_factory=list)
    closed: list = field(default_factory=list)

    @property
    def segments(self):
        """Flat list of (p, q) vertex pairs over all polylines."""
        out = []
        for verts, is_closed in zip(self.polylines, self.closed):
            for k in range(len(verts) - 1):
                out.append((verts[k], verts[k + 1]))
            if is_closed and len(verts) > 1:
                out.append((verts[-1], verts[0]))
        return out


@dataclass
class JunctionReport:
    """Measured angles at one triple junction.

    pairs[k] is the phase pair of the k-th interface ray in counterclockwise
    order; angles[k] is the wedge between rays k and k+1 (cyclically), so the
    three angles sum to 360; wedge_phases[k] is the phase filling that wedge
    (the phase common to pairs[k] and pairs[k+1]).
    """

    location: tuple
    pairs: list
    angles: tuple
    wedge_phases: tuple


def disk_radius(labels, phase):
    """Equivalent-ball radius of one phase from its cell count.

    r = sqrt(area/pi) in 2D and cbrt(3V/(4 pi)) in 3D, with area/volume the
    occupied fraction of the unit torus.
    """
    counts = phase_volumes(labels)
    if not (0 <= phase < labels.num_phases):
        raise IndexError(f"phase {phase} out of range [0, {labels.num_phases})")
    if counts[phase] == 0:
        raise EmptyPhase(f"phase {phase} occupies no cells")
    fraction = counts[phase] / labels.grid.cells
    if labels.grid.dim == 2:
        return math.sqrt(fraction / math.pi)
    return (3.0 * fraction / (4.0 * math.pi)) ** (1.0 / 3.0)


# Marching-squares case table.  Corners of a 2x2 cell block in order
# a=(0,0), b=(1,0), c=(0,1), d=(1,1); bit k of the mask is set when corner k
# carries phase i (value +1).  Edges are identified by their midpoint offsets
# relative to corner a, in units of one cell: ab=(0.5,0), cd=(0.5,1),
# ac=(0,0.5), bd=(1,0.5).  The two saddle cases cut off the +1 corners, a
# convention that depends only on corner values and is therefore exactly
# equivariant under grid rotations.
_E_AB, _E_CD, _E_AC, _E_BD = (0.5, 0.0), (0.5, 1.0), (0.0, 0.5), (1.0, 0.5)
_MS_SEGMENTS = {
    0b0001: [(_E_AB, _E_AC)],
    0b0010: [(_E_AB, _E_BD)],
    0b0100: [(_E_CD, _E_AC)],
    0b1000: [(_E_CD, _E_BD)],
    0b0011: [(_E_AC, _E_BD)],
    0b1100: [(_E_AC, _E_BD)],
    0b0101: [(_E_AB, _E_CD)],
    0b1010: [(_E_AB, _E_CD)],
    0b1001: [(_E_AB, _E_AC), (_E_CD, _E_BD)],
    0b0110: [(_E_AB, _E_BD), (_E_CD, _E_AC)],
    0b1110: [(_E_AB, _E_AC)],
    0b1101: [(_E_AB, _E_BD)],
    0b1011: [(_E_CD, _E_AC)],
    0b0111: [(_E_CD, _E_BD)],
}


def _contour_segments(lab, i, j):
    """Marching-squares segments of indicator_i - indicator_j.

    Only 2x2 blocks whose four cells carry exactly the phases {i, j} (both
    present) contribute; elsewhere the pair is not the local majority and the
    contour is clipped.  Vertices are encoded on the half-integer lattice as
    integer keys (2x mod 2n per axis) so periodic identification is exact.
    """
    n0, n1 = lab.shape
    va = lab
    vb = np.roll(lab, -1, axis=0)
    vc = np.roll(lab, -1, axis=1)
    vd = np.roll(np.roll(lab, -1, axis=0), -1, axis=1)
    in_pair = lambda arr: (arr == i) | (arr == j)
    eligible = in_pair(va) & in_pair(vb) & in_pair(vc) & in_pair(vd)
    mask = ((va == i).astype(np.uint8)
            | ((vb == i).astype(np.uint8) << 1)
            | ((vc == i).astype(np.uint8) << 2)
            | ((vd == i).astype(np.uint8) << 3))
    mixed = eligible & (mask != 0) & (mask != 0b1111)
    xs, ys = np.nonzero(mixed)
    segments = []
    for x, y, m in zip(xs, ys, mask[mixed]):
        for (px, py), (qx, qy) in _MS_SEGMENTS[int(m)]:
            p = (int(round(2 * (x + px))) % (2 * n0),
                 int(round(2 * (y + py))) % (2 * n1))
            q = (int(round(2 * (x + qx))) % (2 * n0),
                 int(round(2 * (y + qy))) % (2 * n1))
            segments.append((p, q))
    return segments


def _link_polylines(segments, sizes):
    """Chain segments sharing endpoints into open chains and closed loops.

    Returns a list of (vertices, closed) with vertices unwrapped to continuous
    cell coordinates by minimal-image steps; a closed loop's winding is the
    displacement from its last vertex back to its first.
    """
    n0, n1 = sizes
    adjacency = {}
    for p, q in segments:
        adjacency.setdefault(p, []).append(q)
        adjacency.setdefault(q, []).append(p)

    def unwrap_step(cur, nxt):
        dx = (nxt[0] - cur[0] + n0) % (2 * n0)
        dy = (nxt[1] - cur[1] + n1) % (2 * n1)
        return (dx - n0) / 2.0, (dy - n1) / 2.0

    visited = set()
    chains = []

    def walk(start):
        chain = [start]
        visited.add(start)
        while True:
            nxt = None
            for cand in adjacency[chain[-1]]:
                if cand not in visited:
                    nxt = cand
                    break
            if nxt is None:
                break
            chain.append(nxt)
            visited.add(nxt)
        return chain

    endpoints = [v for v, nbrs in adjacency.items() if len(nbrs) == 1]
    for v in endpoints:
        if v not in visited:
            chains.append((walk(v), False))
    for v in adjacency:
        if v not in visited:
            chain = walk(v)
            closed = chain[0] in adjacency[chain[-1]]
            chains.append((chain, closed))

    out = []
    for keys, closed in chains:
        coords = np.empty((len(keys), 2))
        coords[0] = (keys[0][0] / 2.0, keys[0][1] / 2.0)
        for k in range(1, len(keys)):
            step = unwrap_step(keys[k - 1], keys[k])
            coords[k] = coords[k - 1] + step
        out.append((coords, closed))
    return out


def _smooth_polyline(coords, closed, sizes, passes=None,
                     budget=SMOOTHING_BUDGET):
    """Laplacian vertex averaging (1/4, 1/2, 1/4) in unwrapped coordinates.

    Open chains keep their endpoints fixed; closed loops average cyclically
    across their winding, which preserves the winding vector.  By default the
    pass count is adaptive: averaging repeats until the next pass would move
    some vertex more than ``budget`` cells from where it started, which kills
    the staircase (sub-cell oscillation) while keeping every smoothed segment
    within one cell of the sign changes that generated it — and turns the
    residual length bias into a curvature term of order budget/feature-size,
    so it decays linearly under grid refinement.  An explicit ``passes``
    disables the displacement budget.
    """
    if len(coords) < 3:
        return coords
    n0, n1 = sizes
    cur = coords.copy()
    if passes is None:
        limit = 4 * len(coords) + 8
    else:
        limit = passes

    def one_pass(arr):
        if closed:
            start = arr[0]
            end = arr[-1]
            dx = ((end[0] - start[0] + n0 / 2.0) % n0) - n0 / 2.0
            dy = ((end[1] - start[1] + n1 / 2.0) % n1) - n1 / 2.0
            winding = np.array([end[0] - start[0] - dx, end[1] - start[1] - dy])
            prev = np.vstack([arr[-1] - winding, arr[:-1]])
            nxt = np.vstack([arr[1:], arr[0] + winding])
            return 0.25 * prev + 0.5 * arr + 0.25 * nxt
        interior = 0.25 * arr[:-2] + 0.5 * arr[1:-1] + 0.25 * arr[2:]
        return np.vstack([arr[:1], interior, arr[-1:]])

    for _ in range(limit):
        proposed = one_pass(cur)
        if passes is None:
            drift = np.abs(proposed - coords).max()
            if drift > budget:
                break
        cur = proposed
    return cur


def _polyline_length(coords, closed, spacing):
    scale = np.asarray(spacing)
    diffs = np.diff(coords, axis=0) * scale
    total = float(np.sqrt((diffs ** 2).sum(axis=1)).sum())
    if closed and len(coords) > 1:
        n = 1.0 / scale
        gap = coords[0] - coords[-1]
        gap = (gap + n / 2.0) % n - n / 2.0
        total += float(np.hypot(*(gap * scale)))
    return total


def interface_length(labels, i, j, smoothing_passes=None):
    """Interface measurement between phases i and j.

    2D: marching-squares contour of indicator_i - indicator_j over blocks
    where {i, j} are the local majority, vertex-averaged to suppress the
    staircase bias of binary contours, then measured with periodic minimal
    images.  The default adaptive smoothing leaves a curvature bias of order
    one cell per feature radius, so the rasterized-disk error decays linearly
    under refinement; pass an integer ``smoothing_passes`` for a fixed pass
    count instead.  3D: cell-face counting, which carries a documented
    +O(spacing) orientation bias.
    """
    grid = labels.grid
    for phase in (i, j):
        if not (0 <= phase < labels.num_phases):
            raise IndexError(f"phase {phase} out of range [0, {labels.num_phases})")
    if grid.dim == 3:
        return _face_count_area(labels, i, j)
    lab = labels.labels
    segments = _contour_segments(lab, i, j)
    if not segments:
        return InterfaceMeasurement(pair=(i, j), length_estimate=0.0)
    chains = _link_polylines(segments, grid.sizes)
    polylines, closed_flags, total = [], [], 0.0
    for coords, closed in chains:
        smooth = _smooth_polyline(coords, closed, grid.sizes, smoothing_passes)
        total += _polyline_length(smooth, closed, grid.spacing)
        polylines.append(smooth * np.asarray(grid.spacing))
        closed_flags.append(closed)
    return InterfaceMeasurement(pair=(i, j), length_estimate=total,
                                polylines=polylines, closed=closed_flags)


def _face_count_area(labels, i, j):
    lab = labels.labels
    spacing = labels.grid.spacing
    total = 0.0
    for axis in range(3):
        neighbor = np.roll(lab, -1, axis=axis)
        count = int(np.count_nonzero(((lab == i) & (neighbor == j))
                                     | ((lab == j) & (neighbor == i))))
        face = 1.0
        for ax2 in range(3):
            if ax2 != axis:
                face *= spacing[ax2]
        total += count * face
    return InterfaceMeasurement(pair=(i, j), length_estimate=total)


def _junction_corners(lab):
    """Corner coordinates (cell units) where a 2x2 stencil holds 3+ phases."""
    va = lab
    vb = np.roll(lab, -1, axis=0)
    vc = np.roll(lab, -1, axis=1)
    vd = np.roll(np.roll(lab, -1, axis=0), -1, axis=1)
    stack = np.stack([va, vb, vc, vd])
    distinct = np.ones(lab.shape, dtype=np.int32)
    for k in range(1, 4):
        fresh = np.ones(lab.shape, dtype=bool)
        for m in range(k):
            fresh &= stack[k] != stack[m]
        distinct += fresh.astype(np.int32)
    xs, ys = np.nonzero(distinct >= 3)
    phases = [tuple(sorted(set(int(stack[s, x, y]) for s in range(4))))
              for x, y in zip(xs, ys)]
    return [(x + 0.5, y + 0.5) for x, y in zip(xs, ys)], phases


def _cluster_periodic(points, sizes, radius=3.0):
    """Union-find clustering of corner hits within a minimal-image radius."""
    n = len(points)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for p in range(n):
        for q in range(p + 1, n):
            dx = abs(points[p][0] - points[q][0])
            dy = abs(points[p][1] - points[q][1])
            dx = min(dx, sizes[0] - dx)
            dy = min(dy, sizes[1] - dy)
            if dx * dx + dy * dy <= radius * radius:
                ra, rb = find(p), find(q)
                if ra != rb:
                    parent[rb] = ra
    clusters = {}
    for p in range(n):
        clusters.setdefault(find(p), []).append(p)
    return list(clusters.values())


def _minimal_image(delta, size):
    return (delta + size / 2.0) % size - size / 2.0


def junction_angles(labels, window=16):
    """Angles at every triple junction of a 2D label field.

    Junction corners are detected on 2x2 stencils, clustered, and each
    incident interface within ``window`` cells is fitted with a ray by
    total-least-squares on its contour-segment midpoints anchored at the
    junction; the three wedge angles between consecutive rays are reported.
    """
    if labels.grid.dim != 2:
        raise ValueError("junction angle measurement requires a 2D field")
    if window < 8:
        raise ValueError(f"window must be at least 8 cells, got {window}")
    lab = labels.labels
    n0, n1 = lab.shape
    corners, corner_phases = _junction_corners(lab)
    if not corners:
        return []
    clusters = _cluster_periodic(corners, (n0, n1))

    reports = []
    for members in clusters:
        anchor = np.array(corners[members[0]])
        offsets = [np.array([_minimal_image(corners[m][0] - anchor[0], n0),
                             _minimal_image(corners[m][1] - anchor[1], n1)])
                   for m in members]
        center = anchor + np.mean(offsets, axis=0)
        phases = sorted(set(p for m in members for p in corner_phases[m]))
        if len(phases) != 3:
            continue
        pair_list = [(phases[0], phases[1]), (phases[0], phases[2]),
                     (phases[1], phases[2])]
        rays = []
        ok = True
        for i, j in pair_list:
            midpoints = _pair_midpoints_near(lab, i, j, center, window)
            if len(midpoints) < 2:
                ok = False
                break
            rel = np.array(midpoints) - center
            rel[:, 0] = _minimal_image(rel[:, 0], n0)
            rel[:, 1] = _minimal_image(rel[:, 1], n1)
            cov = rel.T @ rel
            eigvals, eigvecs = np.linalg.eigh(cov)
            direction = eigvecs[:, np.argmax(eigvals)]
            if np.mean(rel @ direction) < 0.0:
                direction = -direction
            rays.append(math.atan2(direction[1], direction[0]))
        if not ok:
            continue
        order = np.argsort(rays)
        sorted_rays = [rays[k] for k in order]
        sorted_pairs = [pair_list[k] for k in order]
        angles = []
        wedge_phases = []
        for k in range(3):
            nxt = (k + 1) % 3
            span = sorted_rays[nxt] - sorted_rays[k]
            if nxt == 0:
                span += 2.0 * math.pi
            angles.append(math.degrees(span))
            common = set(sorted_pairs[k]) & set(sorted_pairs[nxt])
            wedge_phases.append(common.pop() if common else -1)
        location = (float(center[0] % n0) / n0, float(center[1] % n1) / n1)
        reports.append(JunctionReport(location=location, pairs=sorted_pairs,
                                      angles=tuple(angles),
                                      wedge_phases=tuple(wedge_phases)))
    return reports


def _pair_midpoints_near(lab, i, j, center, window):
    """Midpoints of (i, j) contour segments within ``window`` cells of center."""
    n0, n1 = lab.shape
    segments = _contour_segments(lab, i, j)
    midpoints = []
    for p, q in segments:
        px, py = p[0] / 2.0, p[1] / 2.0
        dqx = _minimal_image(q[0] / 2.0 - px, n0)
        dqy = _minimal_image(q[1] / 2.0 - py, n1)
        mx, my = px + dqx / 2.0, py + dqy / 2.0
        dx = _minimal_image(mx - center[0], n0)
        dy = _minimal_image(my - center[1], n1)
        if dx * dx + dy * dy <= window * window:
            midpoints.append((center[0] + dx, center[1] + dy))
    return midpoints


def young_angles(sigma):
    """Equilibrium wedge angles (degrees) from three pair tensions.

    Input order (sigma_12, sigma_13, sigma_23); output (theta_1, theta_2,
    theta_3) where theta_k is the wedge of phase k, so theta_1 lies between
    the 1-2 and 1-3 interfaces.  Solved by bisection on the 1-2/1-3 opening
    angle; the returned angles sum to 360 within 1e-9 and the vector force
    balance has residual below 1e-10.
    """
    s12, s13, s23 = (float(s) for s in sigma)
    if min(s12, s13, s23) <= 0.0:
        raise InadmissibleTensions("tensions must be positive")
    if (s12 + s13 <= s23) or (s12 + s23 <= s13) or (s13 + s23 <= s12):
        raise InadmissibleTensions(
            "tensions violate the strict triangle inequality; no equilibrium "
            "junction exists")

    def resultant(alpha):
        return math.hypot(s12 + s13 * math.cos(alpha), s13 * math.sin(alpha))

    lo, hi = 0.0, math.pi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if resultant(mid) > s23:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    t12 = np.array([1.0, 0.0])
    t13 = np.array([math.cos(alpha), math.sin(alpha)])
    t23 = -(s12 * t12 + s13 * t13) / s23

    theta1 = math.degrees(alpha)
    ang23 = math.atan2(t23[1], t23[0])
    theta2 = math.degrees(-ang23)
    theta3 = 360.0 - theta1 - theta2
    return theta1, theta2, theta3


def young_force_residual(sigma, angles):
    """Norm of sigma_12 t_12 + sigma_13 t_13 + sigma_23 t_23 for given angles."""
    s12, s13, s23 = (float(s) for s in sigma)
    theta1, theta2, _ = angles
    t12 = np.array([1.0, 0.0])
    t13 = np.array([math.cos(math.radians(theta1)), math.sin(math.radians(theta1))])
    t23 = np.array([math.cos(math.radians(-theta2)), math.sin(math.radians(-theta2))])
    return float(np.linalg.norm(s12 * t12 + s13 * t13 + s23 * t23))


def shrink_rate_fit(trajectory, phase, transient_steps=5, radius_floor_cells=8.0,
                    min_samples=10):
    """Least-squares slope of r^2(t) for a shrinking phase.

    The fit window drops the first ``transient_steps`` steps and all samples
    with radius below ``radius_floor_cells`` grid spacings; the sharp-interface
    law predicts slope -2 sigma_ij mu_ij for a disk of phase i inside phase j.
    Returns (slope, rms residual of the fit).
    """
    grid = trajectory.initial.grid
    cells = grid.cells
    times = [0.0] + [rep.time for rep in trajectory.reports]
    counts = [phase_volumes(trajectory.initial)[phase]]
    counts += [rep.phase_volumes[phase] for rep in trajectory.reports]
    fractions = np.asarray(counts, dtype=float) / cells
    if grid.dim == 2:
        radii = np.sqrt(fractions / math.pi)
    else:
        radii = (3.0 * fractions / (4.0 * math.pi)) ** (1.0 / 3.0)

    steps = np.arange(len(times))
    keep = (steps > transient_steps) & (radii >= radius_floor_cells * grid.max_spacing)
    window = fractions[keep]
    if np.any(np.diff(window) > 1e-12):
        raise NotShrinking(
            f"phase {phase} grows inside the fit window; the shrinking-ball "
            "law does not apply")
    if keep.sum() < min_samples:
        raise WindowTooShort(
            f"only {int(keep.sum())} usable samples (need {min_samples}); "
            "extend the run or enlarge the disk")
    t = np.asarray(times)[keep]
    r_sq = radii[keep] ** 2
    coeffs_fit = np.polyfit(t, r_sq, 1)
    fitted = np.polyval(coeffs_fit, t)
    rms = float(np.sqrt(np.mean((r_sq - fitted) ** 2)))
    return float(coeffs_fit[0]), rms


def write_probes_csv(path, rows):
    """Write probe rows as CSV with columns kind, step, value, target, error."""
    with open(path, "w", encoding="utf-8") as sink:
        sink.write("kind,step,value,target,error\n")
        for kind, step, value, target, error in rows:
            sink.write(f"{kind},{step},{value:.11e},{target:.11e},{error:.11e}\n")
