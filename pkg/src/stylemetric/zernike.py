"""2D Zernike moment magnitudes of binary masks.

Masks are mapped onto the unit disk centered at the pixel centroid and scaled
by the maximum centroid distance, which makes the magnitudes invariant to
translation, scale, and (up to pixel discretization) rotation.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np


@lru_cache(maxsize=None)
def zernike_indices(order: int) -> tuple[tuple[int, int], ...]:
    """(n, m) pairs with 0 <= m <= n <= order and n - m even, in (n, m) order."""
    return tuple((n, m) for n in range(order + 1) for m in range(n % 2, n + 1, 2))


@lru_cache(maxsize=None)
def _radial_coeffs(n: int, m: int) -> tuple[tuple[int, float], ...]:
    coeffs = []
    for k in range((n - m) // 2 + 1):
        c = ((-1) ** k * factorial(n - k)) / (
            factorial(k) * factorial((n + m) // 2 - k) * factorial((n - m) // 2 - k)
        )
        coeffs.append((n - 2 * k, float(c)))
    return tuple(coeffs)


def _radial_poly(n: int, m: int, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for power, c in _radial_coeffs(n, m):
        out += c * rho**power
    return out


def zernike_magnitudes(mask: np.ndarray, order: int = 10, skip_dc: bool = False) -> np.ndarray:
    """|A_nm| for all (n, m) up to `order`; 36 values at order 10.

    `skip_dc` drops the (0, 0) moment, giving the 35-coefficient variant used
    per view by the light field descriptor. An empty mask yields zeros.
    """
    idx = zernike_indices(order)
    if skip_dc:
        idx = idx[1:]
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        return np.zeros(len(idx))

    cy, cx = ys.mean(), xs.mean()
    dy = ys - cy
    dx = xs - cx
    r = np.sqrt(dx * dx + dy * dy)
    rmax = r.max()
    if rmax <= 0:
        rmax = 1.0
    rho = r / rmax
    theta = np.arctan2(dy, dx)

    # pixel area in normalized disk units
    darea = 1.0 / (rmax * rmax)
    out = np.empty(len(idx))
    for i, (n, m) in enumerate(idx):
        radial = _radial_poly(n, m, rho)
        basis = radial * np.exp(-1j * m * theta)
        a = (n + 1) / np.pi * np.sum(basis) * darea
        out[i] = np.abs(a)
    return out
