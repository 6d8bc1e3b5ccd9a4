"""Boundary tracing and centroid-distance signals for binary masks."""

from __future__ import annotations

import numpy as np

# Moore neighborhood, clockwise starting from west (row, col offsets)
_MOORE = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]


def trace_boundary(mask: np.ndarray) -> np.ndarray:
    """Ordered outer boundary pixels of the mask (Moore neighbor tracing).

    Returns an (N, 2) array of (row, col) coordinates forming a closed walk;
    thin structures may legitimately revisit pixels. A single-pixel mask
    returns that one pixel.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.zeros((0, 2), dtype=np.float64)
    padded = np.pad(mask, 1)
    rows, cols = np.nonzero(padded)
    # topmost-leftmost pixel: its west neighbor is guaranteed background
    order = np.lexsort((cols, rows))
    start = (int(rows[order[0]]), int(cols[order[0]]))
    backtrack = (start[0], start[1] - 1)

    boundary = [start]
    current = start
    first_out_dir: int | None = None
    max_steps = 4 * padded.size

    def _done() -> np.ndarray:
        if len(boundary) > 1 and boundary[-1] == boundary[0]:
            boundary.pop()
        return np.asarray(boundary, dtype=np.float64) - 1.0

    for _ in range(max_steps):
        db = _MOORE.index((backtrack[0] - current[0], backtrack[1] - current[1]))
        last_bg = backtrack
        moved = False
        for k in range(1, 9):
            d = (db + k) % 8
            nb = (current[0] + _MOORE[d][0], current[1] + _MOORE[d][1])
            if padded[nb]:
                if current == start:
                    if first_out_dir is not None and d == first_out_dir:
                        return _done()  # left the start the same way twice
                    if first_out_dir is None:
                        first_out_dir = d
                boundary.append(nb)
                backtrack = last_bg
                current = nb
                moved = True
                break
            last_bg = nb
        if not moved:
            return _done()  # isolated pixel
    return _done()


def resample_closed(points: np.ndarray, n: int) -> np.ndarray:
    """Resample a closed polyline at n positions uniform in arc length."""
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) == 0:
        return np.zeros((n, 2))
    if len(pts) == 1:
        return np.repeat(pts, n, axis=0)
    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0:
        return np.repeat(pts[:1], n, axis=0)
    targets = np.arange(n) * total / n
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (targets - cum[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0)
    return closed[idx] + frac[:, None] * (closed[idx + 1] - closed[idx])


def centroid_distance_signal(mask: np.ndarray, n_samples: int) -> np.ndarray:
    """Distances from the mask centroid to n boundary samples uniform in arc
    length, normalized by the maximum distance. Zero signal for empty masks."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.zeros(n_samples)
    ys, xs = np.nonzero(mask)
    center = np.array([ys.mean(), xs.mean()])
    boundary = trace_boundary(mask)
    samples = resample_closed(boundary, n_samples)
    dist = np.linalg.norm(samples - center, axis=1)
    dmax = dist.max()
    if dmax <= 0:
        return np.zeros(n_samples)
    return dist / dmax


def fourier_magnitudes(signal: np.ndarray, n_coeffs: int) -> np.ndarray:
    """First n magnitudes of the DFT of the signal, scaled by signal length."""
    spec = np.abs(np.fft.rfft(signal)) / max(len(signal), 1)
    out = np.zeros(n_coeffs)
    take = min(n_coeffs, len(spec))
    out[:take] = spec[:take]
    return out
