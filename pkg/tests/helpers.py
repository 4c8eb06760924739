"""Shared test utilities: random images and literal-formula reference evaluators.

The reference evaluators compute the basis polynomials term by term with
compensated summation (math.fsum) and never touch the library's matrix
pipeline, so they can serve as independent oracles for it.
"""

import math

import numpy as np

from vpscale import RasterImage


def random_image(rng, height, width, channels=3, max_f=255):
    planes = tuple(
        rng.integers(0, max_f + 1, size=(height, width)).astype(np.float64)
        for _ in range(channels)
    )
    return RasterImage(channels=planes, max_f=max_f)


def node_angle(n, k):
    return (2 * k - 1) * math.pi / (2 * n)


def q_reference(n, m, r, t):
    if r <= n - m:
        return math.cos(r * t)
    return (n + m - r) / (2 * m) * math.cos(r * t) + \
        (n - m - r) / (2 * m) * math.cos((2 * n - r) * t)


def phi_reference(n, m, k, t):
    """Cardinal polynomial of node k at angle t, summed term by term."""
    t_k = node_angle(n, k)
    terms = [0.5]
    for r in range(1, n):
        terms.append(math.cos(r * t_k) * q_reference(n, m, r, t))
    return (2.0 / n) * math.fsum(terms)


def lagrange_reference(n, k, t):
    t_k = node_angle(n, k)
    terms = [0.5]
    for r in range(1, n):
        terms.append(math.cos(r * t_k) * math.cos(r * t))
    return (2.0 / n) * math.fsum(terms)


def resize_reference(plane, n1, n2, m1, m2, target_h, target_w):
    """Literal double-sum resample of one plane (the bivariate operator)."""
    phi_rows = np.array([
        [phi_reference(n1, m1, u, node_angle(target_h, i))
         for i in range(1, target_h + 1)]
        for u in range(1, n1 + 1)
    ])
    phi_cols = np.array([
        [phi_reference(n2, m2, v, node_angle(target_w, j))
         for j in range(1, target_w + 1)]
        for v in range(1, n2 + 1)
    ])
    out = np.empty((target_h, target_w))
    for i in range(target_h):
        for j in range(target_w):
            out[i, j] = math.fsum(
                plane[u, v] * phi_rows[u, i] * phi_cols[v, j]
                for u in range(n1)
                for v in range(n2)
            )
    return out


def gather_reference(image, s):
    """Index-copy downscale by the odd-subgrid formula, done longhand."""
    target_h = image.height // s
    target_w = image.width // s
    rows = [(s * (2 * h - 1) + 1) // 2 - 1 for h in range(1, target_h + 1)]
    cols = [(s * (2 * h - 1) + 1) // 2 - 1 for h in range(1, target_w + 1)]
    planes = tuple(
        np.array([[ch[r, c] for c in cols] for r in rows]) for ch in image.channels
    )
    return RasterImage(channels=planes, max_f=image.max_f)
