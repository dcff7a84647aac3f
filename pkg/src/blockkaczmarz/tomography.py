"""Random-ray tomography operator over a square pixel grid.

Each matrix row holds the exact intersection lengths of one straight ray
with the unit pixels of an ``N x N`` grid occupying ``[0, N] x [0, N]``.
Rays are chords of the square: two endpoints drawn uniformly on two distinct
boundary edges.  Pixel ``(ix, iy)`` maps to column ``iy * N + ix``.
"""

from __future__ import annotations

import numpy as np

_TINY = 1e-12


def boundary_point(edge: int, offset: float, n_grid: int) -> tuple[float, float]:
    """Point at fractional position ``offset`` in [0, 1] along a square edge.

    Edges: 0 bottom (y=0), 1 right (x=N), 2 top (y=N), 3 left (x=0).
    """
    s = offset * n_grid
    if edge == 0:
        return (s, 0.0)
    if edge == 1:
        return (float(n_grid), s)
    if edge == 2:
        return (s, float(n_grid))
    if edge == 3:
        return (0.0, s)
    raise ValueError(f"edge must be 0..3, got {edge}")


def random_chord(n_grid: int, rng: np.random.Generator) -> tuple[tuple[float, float], tuple[float, float]]:
    """Two independent uniform points on two distinct edges of the grid square."""
    e1 = int(rng.integers(4))
    u1 = float(rng.random())
    others = [e for e in range(4) if e != e1]
    e2 = others[int(rng.integers(3))]
    u2 = float(rng.random())
    return boundary_point(e1, u1, n_grid), boundary_point(e2, u2, n_grid)


def line_pixel_intersections(
    p0: tuple[float, float], p1: tuple[float, float], n_grid: int
) -> tuple[np.ndarray, np.ndarray]:
    """Exact intersection lengths of the segment ``p0 -> p1`` with each pixel.

    Uses the parametric grid-crossing construction: gather the parameter
    values where the segment crosses interior grid lines, then attribute each
    sub-interval to the pixel containing its midpoint.

    Returns
    -------
    (indices, lengths)
        Flat pixel indices and the matching positive intersection lengths;
        both empty if the segment is degenerate.
    """
    if n_grid < 1:
        raise ValueError("n_grid must be positive")
    x0, y0 = p0
    x1, y1 = p1
    dx, dy = x1 - x0, y1 - y0
    length = float(np.hypot(dx, dy))
    if length <= _TINY:
        return np.empty(0, dtype=int), np.empty(0)

    ts = [0.0, 1.0]
    if dx != 0.0:
        k = np.arange(1, n_grid)
        cand = (k - x0) / dx
        ts.extend(cand[(cand > 0.0) & (cand < 1.0)].tolist())
    if dy != 0.0:
        k = np.arange(1, n_grid)
        cand = (k - y0) / dy
        ts.extend(cand[(cand > 0.0) & (cand < 1.0)].tolist())
    ts = np.array(sorted(ts))

    indices = []
    lengths = []
    for t_a, t_b in zip(ts[:-1], ts[1:]):
        dt = t_b - t_a
        if dt <= _TINY:
            continue
        t_mid = 0.5 * (t_a + t_b)
        ix = min(max(int(np.floor(x0 + t_mid * dx)), 0), n_grid - 1)
        iy = min(max(int(np.floor(y0 + t_mid * dy)), 0), n_grid - 1)
        indices.append(iy * n_grid + ix)
        lengths.append(dt * length)
    return np.array(indices, dtype=int), np.array(lengths)


def build_ray_matrix(n_grid: int, oversampling: int, rng: np.random.Generator) -> np.ndarray:
    """Dense ``(oversampling * n_grid**2, n_grid**2)`` matrix of random-ray rows.

    Rays whose intersection with the grid is (numerically) empty are redrawn,
    so every row is nonzero.
    """
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    if oversampling < 1:
        raise ValueError("oversampling must be at least 1")
    n_rows = oversampling * n_grid**2
    a = np.zeros((n_rows, n_grid**2))
    for r in range(n_rows):
        while True:
            p0, p1 = random_chord(n_grid, rng)
            idx, lengths = line_pixel_intersections(p0, p1, n_grid)
            if lengths.size and lengths.sum() > _TINY:
                a[r, idx] = lengths
                break
    return a


def radial_phantom(n_grid: int) -> np.ndarray:
    """Smooth nonnegative radial bump over pixel centers, normalized to max 1."""
    centers = np.arange(n_grid) + 0.5
    gx, gy = np.meshgrid(centers, centers, indexing="xy")
    c = n_grid / 2.0
    sigma = n_grid / 4.0
    bump = np.exp(-((gx - c) ** 2 + (gy - c) ** 2) / (2.0 * sigma**2))
    flat = bump.reshape(-1)  # row iy contiguous: index iy * n_grid + ix
    return flat / flat.max()
