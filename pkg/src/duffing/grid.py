"""Uniform time grids on [0, b] and sampled vector paths.

Everything here is composite-trapezoid based so that cumulative integrals
and full integrals agree to the last bit at ``t = b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

DEFAULT_M = 1024


@dataclass(frozen=True)
class Grid:
    b: float
    m: int = DEFAULT_M

    def __post_init__(self):
        if not (np.isfinite(self.b) and self.b > 0):
            raise ValueError("grid length b must be positive and finite")
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("grid needs m >= 2 subintervals")

    @property
    def h(self) -> float:
        return self.b / self.m

    @property
    def t(self) -> np.ndarray:
        # i*b/m rather than cumulative sums: t_m == b exactly
        return np.arange(self.m + 1) * self.b / self.m

    def __len__(self):
        return self.m + 1


class DiscreteFunction:
    """A path t -> R^N sampled at the nodes of a :class:`Grid`.

    ``values`` always has shape ``(m + 1, N)``; a 1-D array is read as a
    scalar path (N = 1). The array is copied and frozen.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        v = np.array(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != grid.m + 1:
            raise ValueError(f"expected {grid.m + 1} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite sample")
        v.flags.writeable = False
        self.grid = grid
        self.values = v

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable, dim: int | None = None):
        """Sample ``fn(t)`` (vectorised over the node array) on ``grid``."""
        t = grid.t
        out = np.asarray(fn(t), dtype=float)
        if out.ndim == 0:
            out = np.full(t.shape, float(out))
        if dim is not None and out.ndim == 1 and dim > 1:
            raise ValueError("callable returned a scalar path for dim > 1")
        if out.ndim == 2 and out.shape[0] != t.size and out.shape[1] == t.size:
            out = out.T
        return cls(grid, out)

    @classmethod
    def constant(cls, grid: Grid, value, dim: int = 1):
        vec = np.broadcast_to(np.asarray(value, dtype=float), (dim,))
        return cls(grid, np.tile(vec, (grid.m + 1, 1)))

    @classmethod
    def zeros(cls, grid: Grid, dim: int = 1):
        return cls(grid, np.zeros((grid.m + 1, dim)))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    def magnitude(self) -> np.ndarray:
        """Euclidean length |u(t_i)| at every node."""
        return np.linalg.norm(self.values, axis=1)

    def with_values(self, values) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, values)

    def __repr__(self):
        return f"DiscreteFunction(b={self.grid.b}, m={self.grid.m}, dim={self.dim})"


def _check_finite(values):
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite sample")


def _trapezoid(values: np.ndarray, h: float) -> np.ndarray:
    return h * (values[1:-1].sum(axis=0) + 0.5 * (values[0] + values[-1]))


def _cumtrapz(values: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values, dtype=float)
    np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0, out=out[1:])
    return out


def integrate(f: DiscreteFunction):
    """Composite trapezoid integral over [0, b].

    Returns a float for scalar paths and a length-N array otherwise.
    """
    _check_finite(f.values)
    total = _trapezoid(f.values, f.grid.h)
    return float(total[0]) if f.dim == 1 else total


def cumulative_integral(f: DiscreteFunction) -> DiscreteFunction:
    """H(t_i) = integral of f over [0, t_i]; H(0) = 0, componentwise."""
    _check_finite(f.values)
    out = _cumtrapz(f.values, f.grid.h)
    # make H(b) bit-identical to integrate(f)
    out[-1] = _trapezoid(f.values, f.grid.h)
    return DiscreteFunction(f.grid, out)


def differentiate(u: DiscreteFunction) -> DiscreteFunction:
    """Second-order differences: central inside, one-sided at the ends."""
    _check_finite(u.values)
    v, h = u.values, u.grid.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    if u.grid.m >= 2:
        d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return DiscreteFunction(u.grid, d)


class Norms(NamedTuple):
    Lp: float
    sup: float
    C1: float
    W1p: float


def lp_norm(u: DiscreteFunction, p: float) -> float:
    if not p > 1:
        raise ValueError("exponent out of range")
    return float(_trapezoid(u.magnitude() ** p, u.grid.h)) ** (1.0 / p)


def sup_norm(u: DiscreteFunction) -> float:
    return float(u.magnitude().max())


def c1_norm(u: DiscreteFunction, du: DiscreteFunction | None = None) -> float:
    if du is None:
        du = differentiate(u)
    return sup_norm(u) + sup_norm(du)


def norms(u: DiscreteFunction, p: float, du: DiscreteFunction | None = None) -> Norms:
    """Lp, sup, C1 and Sobolev (``||u'||_p``) norms of a sampled path.

    ``du`` is used for the derivative when supplied (e.g. the exact
    derivative a solver produced); otherwise it is differenced from ``u``.
    """
    if not p > 1:
        raise ValueError("exponent out of range")
    if du is None:
        du = differentiate(u)
    s = sup_norm(u)
    return Norms(Lp=lp_norm(u, p), sup=s, C1=s + sup_norm(du), W1p=lp_norm(du, p))
