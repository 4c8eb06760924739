"""First-kind Chebyshev sampling grids.

A grid of size ``n`` consists of the angles ``t_k = (2k-1)*pi/(2n)`` for
``k = 1..n``, equally spaced in ``(0, pi)``, and the nodes ``x_k = cos(t_k)``,
the zeros of the degree-``n`` Chebyshev polynomial of the first kind.  Nodes
are kept in natural index order (decreasing ``x``), so image row 1 always maps
to node 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChebyshevGrid:
    """Angles and nodes of the first-kind Chebyshev grid of size ``n``."""

    n: int
    angles: np.ndarray
    nodes: np.ndarray


def chebyshev_angles(n: int) -> np.ndarray:
    """Return the ``n`` grid angles ``(2k-1)*pi/(2n)``, ``k = 1..n``.

    Each angle is computed in closed form from its index (no accumulation),
    so there is no drift for large ``n``.
    """
    if n < 1:
        raise ValueError(f"grid size must be >= 1, got {n}")
    k = np.arange(1, n + 1, dtype=np.float64)
    angles = (2.0 * k - 1.0) * (np.pi / (2.0 * n))
    angles.setflags(write=False)
    return angles


def chebyshev_grid(n: int) -> ChebyshevGrid:
    """Build the size-``n`` grid: angles plus nodes ``cos(angles)``."""
    angles = chebyshev_angles(n)
    nodes = np.cos(angles)
    nodes.setflags(write=False)
    return ChebyshevGrid(n=n, angles=angles, nodes=nodes)


def subset_indices(source_n: int, target_n: int) -> np.ndarray:
    """Indices (0-based) at which the target grid's nodes sit inside the source grid.

    Requires ``source_n = s * target_n`` with odd ``s``; then the target node
    ``h`` (1-based) coincides with source node ``i(h) = (s*(2h-1)+1)/2``.
    """
    if target_n < 1 or source_n < 1:
        raise ValueError("grid sizes must be >= 1")
    if source_n % target_n != 0:
        raise ValueError(f"{source_n} is not a multiple of {target_n}")
    s = source_n // target_n
    if s % 2 == 0:
        raise ValueError(f"size ratio must be odd, got {s}")
    h = np.arange(1, target_n + 1)
    return (s * (2 * h - 1) + 1) // 2 - 1
