"""Filtered de la Vallée Poussin interpolation basis on first-kind Chebyshev grids.

The basis is built from the filtered cosine polynomials

    q_r(cos t) = cos(r t)                                  for 0 <= r <= n - m
    q_r(cos t) = (n+m-r)/(2m) cos(r t)
                 + (n-m-r)/(2m) cos((2n-r) t)              for n - m < r < n

which are orthogonal under the Chebyshev weight ``1/sqrt(1 - x^2)``.  The
cardinal (fundamental) polynomial attached to node ``k`` is

    Phi_k(cos t) = (2/n) [ 1/2 + sum_{r=1}^{n-1} cos(r t_k) q_r(cos t) ]

and equals 1 at node ``k``, 0 at the other nodes, for every admissible filter
degree ``m``.  With ``m = 0`` the basis degenerates to the classical Lagrange
fundamental polynomials on the same nodes.

Internally angles ``t`` (not ``x = cos t``) are the canonical coordinates;
conversion happens once at grid construction, which avoids cancellation near
``x = +-1``.  All arithmetic is 64-bit.
"""

from __future__ import annotations

import functools
import math
import os
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .grid import chebyshev_angles

DEFAULT_CACHE_CAPACITY = 64
CACHE_SIZE_ENV_VAR = "VPSCALE_CACHE_SIZE"


@dataclass(frozen=True)
class VpParams:
    """Filter parameters for one axis: node count ``n`` and degree ``m = floor(theta*n)``."""

    n: int
    m: int
    theta: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"node count must be >= 1, got {self.n}")
        if not 0 <= self.m <= self.n:
            raise ValueError(f"filter degree must be in [0, {self.n}], got {self.m}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must be in [0, 1], got {self.theta}")

    @classmethod
    def from_theta(cls, n: int, theta: float) -> "VpParams":
        return cls(n=n, m=theta_to_m(n, theta), theta=theta)


@dataclass(frozen=True)
class ScalingMatrix:
    """Rectangular map from ``source_n`` grid samples to ``target_N`` grid samples.

    ``entries[i, j]`` is the ``i``-th cardinal polynomial evaluated at the
    ``j``-th target node, so every column sums to 1 (partition of unity) and
    ``source_n == target_N`` yields the identity.
    """

    source_n: int
    target_N: int
    m: int
    entries: np.ndarray


def theta_to_m(n: int, theta: float) -> int:
    """Filter degree for a grid of ``n`` nodes: ``floor(theta * n)``."""
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    return int(math.floor(theta * n))


def _check_nm(n: int, m: int) -> None:
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if not 0 <= m <= n:
        raise ValueError(f"filter degree must be in [0, {n}], got {m}")


def vp_orthogonal(n: int, m: int, r: int, t):
    """Evaluate the orthogonal basis polynomial of index ``r`` at angle(s) ``t``.

    For ``r <= n - m`` this is plain ``cos(r t)``; inside the filter's action
    ray (``n - m < r < n``) it is the two-term filtered combination of
    ``cos(r t)`` and ``cos((2n - r) t)``.
    """
    _check_nm(n, m)
    if not 0 <= r <= n - 1:
        raise ValueError(f"basis index must be in [0, {n - 1}], got {r}")
    t = np.asarray(t, dtype=np.float64)
    if r <= n - m:
        return np.cos(r * t)
    a = (n + m - r) / (2.0 * m)
    b = (n - m - r) / (2.0 * m)
    return a * np.cos(r * t) + b * np.cos((2.0 * n - r) * t)


def _q_rows(n: int, m: int, t: np.ndarray) -> np.ndarray:
    """All orthogonal basis polynomials at angles ``t``, as an (n, len(t)) array."""
    r = np.arange(n, dtype=np.float64)[:, None]
    q = np.cos(r * t[None, :])
    lo = n - m + 1
    if m > 0 and lo <= n - 1:
        rr = r[lo:]
        scale = (n + m - rr) / (2.0 * m)
        mirror = (n - m - rr) / (2.0 * m)
        q[lo:] = scale * q[lo:] + mirror * np.cos((2.0 * n - rr) * t[None, :])
    return q


@functools.lru_cache(maxsize=8)
def _halved_cos_table(n: int) -> np.ndarray:
    """cos(r * t_k) for r = 0..n-1, k = 1..n, with the r = 0 row halved."""
    t = chebyshev_angles(n)
    r = np.arange(n, dtype=np.float64)[:, None]
    table = np.cos(r * t[None, :])
    table[0, :] = 0.5
    table.setflags(write=False)
    return table


def fundamental_matrix(n: int, m: int, t) -> np.ndarray:
    """Cardinal polynomial values ``Phi_k(cos t_j)`` as an (n, len(t)) array.

    Computed as the factored product ``(2/n) * A^T C`` with ``A`` the halved
    cosine table on the source grid and ``C`` the orthogonal basis sampled at
    the requested angles; identical to per-entry evaluation but runs through a
    single matrix product with reused cosine tables.
    """
    _check_nm(n, m)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    table = _halved_cos_table(n)
    q = _q_rows(n, m, t)
    return (2.0 / n) * (table.T @ q)


def vp_fundamental(n: int, m: int, k: int, t):
    """Cardinal polynomial of node ``k`` (1-based) at angle(s) ``t``."""
    _check_nm(n, m)
    if not 1 <= k <= n:
        raise ValueError(f"node index must be in [1, {n}], got {k}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    t_k = (2 * k - 1) * math.pi / (2 * n)
    weights = np.cos(np.arange(n, dtype=np.float64) * t_k)
    weights[0] = 0.5
    values = (2.0 / n) * (weights @ _q_rows(n, m, t_arr))
    return values[0] if np.isscalar(t) or np.ndim(t) == 0 else values


def lagrange_fundamental(n: int, k: int, t):
    """Classical Lagrange cardinal polynomial of node ``k`` at angle(s) ``t``."""
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"node index must be in [1, {n}], got {k}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    t_k = (2 * k - 1) * math.pi / (2 * n)
    r = np.arange(n, dtype=np.float64)
    weights = np.cos(r * t_k)
    weights[0] = 0.5
    values = (2.0 / n) * (weights @ np.cos(r[:, None] * t_arr[None, :]))
    return values[0] if np.isscalar(t) or np.ndim(t) == 0 else values


def build_scaling_matrix(source_n: int, m: int, target_N: int) -> ScalingMatrix:
    """Build the ``source_n x target_N`` resampling matrix for filter degree ``m``."""
    _check_nm(source_n, m)
    if target_N < 1:
        raise ValueError(f"target size must be >= 1, got {target_N}")
    entries = fundamental_matrix(source_n, m, chebyshev_angles(target_N))
    entries.setflags(write=False)
    return ScalingMatrix(source_n=source_n, target_N=target_N, m=m, entries=entries)


class MatrixCache:
    """Bounded LRU cache of scaling matrices keyed by (source_n, m, target_N).

    Lookups and inserts are thread-safe; matrices are built outside the lock,
    so two threads racing on the same key may build redundantly, but a caller
    never sees a partially built matrix.  Cached entries are read-only.
    """

    def __init__(self, capacity: int = DEFAULT_CACHE_CAPACITY):
        if capacity < 1:
            raise ValueError(f"cache capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()
        self._entries: OrderedDict[tuple[int, int, int], ScalingMatrix] = OrderedDict()

    def get(self, source_n: int, m: int, target_N: int) -> ScalingMatrix:
        key = (source_n, m, target_N)
        with self._lock:
            cached = self._entries.get(key)
            if cached is not None:
                self._entries.move_to_end(key)
                self.hits += 1
                return cached
            self.misses += 1
        built = build_scaling_matrix(source_n, m, target_N)
        with self._lock:
            cached = self._entries.get(key)
            if cached is not None:
                return cached
            self._entries[key] = built
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
        return built

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self.hits = 0
            self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


def _capacity_from_env() -> int:
    raw = os.environ.get(CACHE_SIZE_ENV_VAR)
    if raw is None:
        return DEFAULT_CACHE_CAPACITY
    try:
        capacity = int(raw)
    except ValueError as exc:
        raise ValueError(f"{CACHE_SIZE_ENV_VAR} must be an integer, got {raw!r}") from exc
    if capacity < 1:
        raise ValueError(f"{CACHE_SIZE_ENV_VAR} must be >= 1, got {capacity}")
    return capacity


_default_cache: MatrixCache | None = None
_default_cache_lock = threading.Lock()


def default_cache() -> MatrixCache:
    """Process-wide cache; capacity taken from VPSCALE_CACHE_SIZE on first use."""
    global _default_cache
    with _default_cache_lock:
        if _default_cache is None:
            _default_cache = MatrixCache(_capacity_from_env())
        return _default_cache


def reset_default_cache() -> None:
    """Drop the process-wide cache (next use re-reads the env var)."""
    global _default_cache
    with _default_cache_lock:
        _default_cache = None


def matrix_cache_get(source_n: int, m: int, target_N: int) -> ScalingMatrix:
    """Fetch a scaling matrix through the process-wide cache."""
    return default_cache().get(source_n, m, target_N)
