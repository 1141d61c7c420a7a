"""Parametric set-valued fields F(t, x) and the set operations on their values.

A :class:`Multimap` evaluated at a batch of points returns a *set value*
object (``Interval``, ``Ball``, ``Box``, ``Points`` or ``Sphere``) whose
array fields carry the batch as leading axes. All set operations are
vectorised over that batch; the last axis is always R^N.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import DiscreteFunction, Grid

# set values -------------------------------------------------------------------


def _norm(v):
    return np.linalg.norm(v, axis=-1)


def _unit(d):
    """Normalise directions; zero vectors become e_1."""
    n = _norm(d)[..., None]
    e1 = np.zeros(d.shape[-1])
    e1[0] = 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 0, d / np.where(n > 0, n, 1.0), e1)


@dataclass(frozen=True)
class Interval:
    """[lo, hi] in R^1; ``lo``/``hi`` have the batch shape."""
    lo: np.ndarray
    hi: np.ndarray
    dim = 1
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if np.any(self.lo > self.hi):
            raise ValueError("interval with lo > hi")

    def distance(self, z):
        z = np.asarray(z, dtype=float)[..., 0]
        return np.maximum(np.maximum(self.lo - z, z - self.hi), 0.0)

    def project(self, z):
        z = np.asarray(z, dtype=float)[..., 0]
        return np.clip(z, self.lo, self.hi)[..., None]

    def support(self, d):
        d = np.asarray(d, dtype=float)[..., 0]
        return np.where(d >= 0, self.hi, self.lo)[..., None]

    def centroid(self):
        return (0.5 * (self.lo + self.hi))[..., None]

    def sup_norm(self):
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def farthest(self, z):
        z = np.asarray(z, dtype=float)[..., 0]
        return np.maximum(np.abs(z - self.lo), np.abs(z - self.hi))

    def sample(self, k):
        k = max(int(k), 2)
        w = np.linspace(0.0, 1.0, k)
        return ((1 - w) * self.lo[..., None] + w * self.hi[..., None])[..., None]

    def hull(self):
        return self

    def extreme(self):
        return Points(np.stack([self.lo, self.hi], axis=-1)[..., None])


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball."""
    center: np.ndarray
    radius: np.ndarray
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", np.asarray(self.radius, dtype=float))
        if np.any(self.radius < 0):
            raise ValueError("negative radius")

    @property
    def dim(self):
        return self.center.shape[-1]

    def distance(self, z):
        return np.maximum(_norm(np.asarray(z, dtype=float) - self.center) - self.radius, 0.0)

    def project(self, z):
        z = np.asarray(z, dtype=float)
        d = z - self.center
        n = _norm(d)
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(n > self.radius, self.radius / np.where(n > 0, n, 1.0), 1.0)
        return self.center + scale[..., None] * d

    def support(self, d):
        return self.center + self.radius[..., None] * _unit(np.asarray(d, dtype=float))

    def centroid(self):
        return self.center

    def sup_norm(self):
        return _norm(self.center) + self.radius

    def farthest(self, z):
        return _norm(np.asarray(z, dtype=float) - self.center) + self.radius

    def sample(self, k):
        return _sphere_points(self.center, self.radius, k)

    def hull(self):
        return self

    def extreme(self):
        return Sphere(self.center, self.radius)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box center +- halfwidths."""
    center: np.ndarray
    halfwidths: np.ndarray
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "halfwidths", np.asarray(self.halfwidths, dtype=float))
        if np.any(self.halfwidths < 0):
            raise ValueError("negative halfwidth")

    @property
    def dim(self):
        return self.center.shape[-1]

    def project(self, z):
        return np.clip(np.asarray(z, dtype=float), self.center - self.halfwidths, self.center + self.halfwidths)

    def distance(self, z):
        z = np.asarray(z, dtype=float)
        return _norm(z - self.project(z))

    def support(self, d):
        d = np.asarray(d, dtype=float)
        return self.center + np.where(d >= 0, 1.0, -1.0) * self.halfwidths

    def centroid(self):
        return self.center

    def sup_norm(self):
        return _norm(np.abs(self.center) + self.halfwidths)

    def farthest(self, z):
        return _norm(np.abs(np.asarray(z, dtype=float) - self.center) + self.halfwidths)

    def vertices(self):
        n = self.dim
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
        return self.center[..., None, :] + signs * self.halfwidths[..., None, :]

    def sample(self, k):
        return self.vertices()

    def hull(self):
        return self

    def extreme(self):
        return Points(self.vertices())


@dataclass(frozen=True)
class Points:
    """A finite set; ``points`` has shape batch + (K, N)."""
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim < 2 or pts.shape[-2] < 1:
            raise ValueError("finite set needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self):
        return self.points.shape[-1]

    @property
    def convex(self):
        return self.points.shape[-2] == 1

    def _dists(self, z):
        return _norm(self.points - np.asarray(z, dtype=float)[..., None, :])

    def distance(self, z):
        return self._dists(z).min(axis=-1)

    def project(self, z):
        # argmin returns the first index on ties
        idx = self._dists(z).argmin(axis=-1)
        return np.take_along_axis(self.points, idx[..., None, None], axis=-2)[..., 0, :]

    def support(self, d):
        score = np.einsum("...kn,...n->...k", self.points, np.asarray(d, dtype=float))
        idx = score.argmax(axis=-1)
        return np.take_along_axis(self.points, idx[..., None, None], axis=-2)[..., 0, :]

    def centroid(self):
        # the member nearest the barycentre, so the selection stays in the set
        return self.project(self.points.mean(axis=-2))

    def sup_norm(self):
        return _norm(self.points).max(axis=-1)

    def farthest(self, z):
        return self._dists(z).max(axis=-1)

    def sample(self, k):
        return self.points

    def hull(self):
        if self.dim != 1:
            raise ValueError("convex hull of a finite set only supported in R^1")
        return Interval(self.points[..., 0].min(axis=-1), self.points[..., 0].max(axis=-1))

    def extreme(self):
        return self


@dataclass(frozen=True)
class Sphere:
    """Boundary of a ball; the extreme points of ``Ball(center, radius)``."""
    center: np.ndarray
    radius: np.ndarray
    convex = False

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", np.asarray(self.radius, dtype=float))
        if np.any(self.radius < 0):
            raise ValueError("negative radius")

    @property
    def dim(self):
        return self.center.shape[-1]

    def distance(self, z):
        return np.abs(_norm(np.asarray(z, dtype=float) - self.center) - self.radius)

    def project(self, z):
        return self.center + self.radius[..., None] * _unit(np.asarray(z, dtype=float) - self.center)

    def support(self, d):
        return self.center + self.radius[..., None] * _unit(np.asarray(d, dtype=float))

    def centroid(self):
        raise ValueError("selection strategy unsupported: centroid of a sphere")

    def sup_norm(self):
        return _norm(self.center) + self.radius

    def farthest(self, z):
        return _norm(np.asarray(z, dtype=float) - self.center) + self.radius

    def sample(self, k):
        return _sphere_points(self.center, self.radius, k)

    def hull(self):
        return Ball(self.center, self.radius)

    def extreme(self):
        return self


def _sphere_directions(dim, k):
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        a = 2 * np.pi * np.arange(max(k, 1)) / max(k, 1)
        return np.column_stack([np.cos(a), np.sin(a)])
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    extra = max(k - len(axes), 0)
    rng = np.random.default_rng(12345)
    d = rng.standard_normal((extra, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.vstack([axes, d])[: max(k, 1)] if k >= len(axes) else axes[:k]


def _sphere_points(center, radius, k):
    dirs = _sphere_directions(center.shape[-1], k)
    return center[..., None, :] + radius[..., None, None] * dirs


SetValue = Interval | Ball | Box | Points | Sphere


# Hausdorff distance ----------------------------------------------------------------


def _as_interval(v):
    if isinstance(v, Interval):
        return v
    if isinstance(v, (Ball,)) and v.dim == 1:
        return Interval(v.center[..., 0] - v.radius, v.center[..., 0] + v.radius)
    if isinstance(v, Box) and v.dim == 1:
        return Interval(v.center[..., 0] - v.halfwidths[..., 0], v.center[..., 0] + v.halfwidths[..., 0])
    return None


def _as_points(v):
    if isinstance(v, Points):
        return v
    if isinstance(v, Sphere) and v.dim == 1:
        c, r = v.center[..., 0], v.radius
        return Points(np.stack([c - r, c + r], axis=-1)[..., None])
    return None


def _points_vs_interval(pts, iv):
    """h(P, [lo, hi]) in R^1 for a finite P, batch-wise."""
    P = np.asarray(pts.points[..., 0])
    lo, hi = np.broadcast_arrays(iv.lo, iv.hi)
    batch = np.broadcast_shapes(P.shape[:-1], lo.shape)
    P = np.broadcast_to(P, batch + P.shape[-1:])
    lo, hi = np.broadcast_to(lo, batch), np.broadcast_to(hi, batch)
    out = np.empty(batch)
    for idx in np.ndindex(batch):
        p = np.sort(P[idx])
        a, c = lo[idx], hi[idx]
        excess_p = np.maximum(np.maximum(a - p, p - c), 0.0).max()
        # farthest interval point from P: an endpoint or a midpoint between neighbours
        cand = [a, c] + [m for m in 0.5 * (p[1:] + p[:-1]) if a <= m <= c]
        excess_i = max(np.abs(p - x).min() for x in cand)
        out[idx] = max(excess_p, excess_i)
    return out


def hausdorff(A: SetValue, B: SetValue):
    """Hausdorff distance between two set values via closed forms.

    Works batch-wise; returns a float for unbatched values.
    """
    out = _hausdorff(A, B)
    return float(out) if np.ndim(out) == 0 else out


def _hausdorff(A, B):
    ia, ib = _as_interval(A), _as_interval(B)
    if ia is not None and ib is not None:
        return np.maximum(np.abs(ia.lo - ib.lo), np.abs(ia.hi - ib.hi))
    if isinstance(A, Ball) and isinstance(B, Ball):
        return _norm(A.center - B.center) + np.abs(A.radius - B.radius)
    if isinstance(A, Box) and isinstance(B, Box):
        dc = np.abs(A.center - B.center)
        dw = A.halfwidths - B.halfwidths
        return np.maximum(_norm(np.maximum(dc + dw, 0.0)), _norm(np.maximum(dc - dw, 0.0)))
    if isinstance(A, Sphere) and isinstance(B, Sphere):
        dc = _norm(A.center - B.center)
        ab = np.maximum(np.abs(A.radius + dc - B.radius), np.abs(np.abs(A.radius - dc) - B.radius))
        ba = np.maximum(np.abs(B.radius + dc - A.radius), np.abs(np.abs(B.radius - dc) - A.radius))
        return np.maximum(ab, ba)
    pa, pb = _as_points(A), _as_points(B)
    if pa is not None and pb is not None:
        d = _norm(pa.points[..., :, None, :] - pb.points[..., None, :, :])
        return np.maximum(d.min(axis=-1).max(axis=-1), d.min(axis=-2).max(axis=-1))
    # a single point against a closed set: the farthest-point distance
    for P, C in ((pa, B), (pb, A)):
        if P is not None and P.points.shape[-2] == 1 and hasattr(C, "farthest"):
            if isinstance(C, (Ball, Box, Interval, Sphere)):
                return C.farthest(P.points[..., 0, :])
    for P, C in ((pa, ib), (pb, ia)):
        if P is not None and C is not None and P.dim == 1:
            return _points_vs_interval(P, C)
    raise ValueError("hausdorff not closed-form for these kinds")


# multimaps ----------------------------------------------------------------------

CONVEX_KINDS = ("singleton", "interval", "ball", "box")
KINDS = CONVEX_KINDS + ("finite", "extreme_of")


def _const(value):
    value = np.asarray(value, dtype=float)

    def fn(t, x):
        return value

    return fn


def _scalar_coeff(arr, shape):
    arr = np.asarray(arr, dtype=float)
    if arr.shape == shape + (1,):
        arr = arr[..., 0]
    return np.broadcast_to(arr, shape)


def _vector_coeff(arr, shape, dim):
    arr = np.asarray(arr, dtype=float)
    if dim == 1 and arr.shape == shape and arr.ndim > 0:
        arr = arr[..., None]
    return np.broadcast_to(arr, shape + (dim,))


def _wrap(fn_or_value):
    return fn_or_value if callable(fn_or_value) else _const(fn_or_value)


@dataclass(frozen=True)
class Multimap:
    """F(t, x) from a closed-form family.

    Coefficients are callables ``fn(t, x)`` vectorised over a batch
    (``t`` of shape B, ``x`` of shape B + (N,)); plain numbers are
    accepted as constants. Use the classmethod constructors.
    """
    kind: str
    dim: int
    coeffs: dict = field(default_factory=dict, compare=False)
    inner: "Multimap | None" = None

    @classmethod
    def singleton(cls, f, dim=1):
        return cls("singleton", dim, {"value": _wrap(f)})

    @classmethod
    def interval(cls, lo, hi):
        return cls("interval", 1, {"lo": _wrap(lo), "hi": _wrap(hi)})

    @classmethod
    def ball(cls, center, radius, dim=1):
        return cls("ball", dim, {"center": _wrap(center), "radius": _wrap(radius)})

    @classmethod
    def box(cls, center, halfwidths, dim=1):
        return cls("box", dim, {"center": _wrap(center), "halfwidths": _wrap(halfwidths)})

    @classmethod
    def finite(cls, points, dim=1):
        return cls("finite", dim, {"points": [_wrap(p) for p in points]})

    @classmethod
    def extreme_of(cls, inner: "Multimap"):
        if inner.kind not in CONVEX_KINDS:
            raise ValueError("extreme_of needs a convex inner kind")
        return cls("extreme_of", inner.dim, {}, inner)

    @property
    def convex(self) -> bool:
        if self.kind == "extreme_of":
            return self.inner.kind == "singleton"
        if self.kind == "finite":
            return len(self.coeffs["points"]) == 1
        return True

    def value(self, t, x) -> SetValue:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        shape = t.shape
        c = self.coeffs

        def sc(fn):
            return _scalar_coeff(fn(t, x), shape)

        def vc(fn):
            return _vector_coeff(fn(t, x), shape, self.dim)

        if self.kind == "singleton":
            return Points(vc(c["value"])[..., None, :])
        if self.kind == "interval":
            return Interval(sc(c["lo"]), sc(c["hi"]))
        if self.kind == "ball":
            return Ball(vc(c["center"]), sc(c["radius"]))
        if self.kind == "box":
            return Box(vc(c["center"]), vc(c["halfwidths"]))
        if self.kind == "finite":
            return Points(np.stack([vc(f) for f in c["points"]], axis=-2))
        if self.kind == "extreme_of":
            return self.inner.value(t, x).extreme()
        raise ValueError(f"unknown multimap kind {self.kind!r}")

    def hull(self) -> "Multimap":
        """The closed convex hull field (interval/ball/box)."""
        if self.kind == "extreme_of":
            return self.inner
        if self.kind == "finite" and not self.convex:
            if self.dim != 1:
                raise ValueError("convex hull of a finite field only supported in R^1")
            pts = self.coeffs["points"]

            def stacked(t, x):
                return np.stack([_vector_coeff(f(t, x), np.shape(t), 1)[..., 0] for f in pts])

            def lo(t, x):
                return stacked(t, x).min(axis=0)

            def hi(t, x):
                return stacked(t, x).max(axis=0)

            return Multimap.interval(lo, hi)
        return self

    def along(self, u: DiscreteFunction) -> SetValue:
        """The set values F(t_i, u(t_i)) at every grid node."""
        return self.value(u.grid.t, u.values)


def value_sample(F: Multimap, t: float, x, k: int) -> np.ndarray:
    """Deterministic points of F(t, x), shape (K, N); K >= k except for finite sets.

    Interval, finite and extreme-of-interval values always include every
    extreme point.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.asarray(F.value(np.float64(t), x).sample(k))


def project(F: Multimap, t, x, z) -> np.ndarray:
    """Nearest point of F(t, x) to z; lowest index wins ties for finite sets."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return F.value(np.asarray(t, dtype=float), x).project(z)


def distance(F: Multimap, t, x, z):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return F.value(np.asarray(t, dtype=float), x).distance(z)


# selections ---------------------------------------------------------------------


@dataclass(frozen=True)
class Projection:
    """Nearest point to an anchor path; ``anchor=None`` means "follow the previous selection"."""
    anchor: DiscreteFunction | None = None


@dataclass(frozen=True)
class Centroid:
    pass


@dataclass(frozen=True)
class Extreme:
    """Support point in a fixed direction (seeded random unit vector if omitted)."""
    direction: tuple | None = None
    seed: int = 0


@dataclass(frozen=True)
class Oscillating:
    """Switch between two extreme points in 2**level equal blocks.

    With a ``target`` selection of the convex hull, the switching duty
    cycle inside each period is chosen so that period averages reproduce
    the target (a weakly convergent extreme-point sequence).
    """
    level: int
    target: DiscreteFunction | None = None
    direction: tuple | None = None


Strategy = Projection | Centroid | Extreme | Oscillating


def _direction(dim, direction, seed):
    if direction is not None:
        d = np.asarray(direction, dtype=float).reshape(dim)
    elif dim == 1:
        d = np.ones(1)
    else:
        d = np.random.default_rng(seed).standard_normal(dim)
    n = np.linalg.norm(d)
    if n == 0:
        raise ValueError("zero direction")
    return d / n


def oscillation_phase(grid: Grid, level: int) -> np.ndarray:
    """Position of each node inside its switching period, in [0, 1).

    A period spans two blocks of length b / 2**level. Computed from the
    node index so block boundaries land exactly on nodes when they can.
    """
    if level < 0:
        raise ValueError("oscillation level must be >= 0")
    i = np.arange(grid.m + 1, dtype=np.int64)
    # phase = frac(i * 2**level / (2 m)) in exact integer arithmetic
    num = (i * (1 << level)) % (2 * grid.m)
    return num / (2.0 * grid.m)


def _oscillate(hull, level_phase, target, direction):
    """Extreme-point selection of ``hull`` whose period averages match ``target``."""
    if isinstance(hull, Points):
        if hull.points.shape[-2] == 1:
            return hull.points[..., 0, :]
        raise ValueError("selection strategy unsupported: oscillation on a finite set in R^N, N > 1")
    phase = level_phase
    if target is None:
        hi = hull.support(np.broadcast_to(direction, hull.centroid().shape))
        lo = hull.support(np.broadcast_to(-direction, hull.centroid().shape))
        return np.where((phase < 0.5)[:, None], hi, lo)
    if isinstance(hull, Ball) and hull.dim > 1:
        off = target - hull.center
        rho = _norm(off)
        e = _unit(off)
        r = hull.radius
        with np.errstate(invalid="ignore", divide="ignore"):
            w = np.where(r > 0, 0.5 * (1.0 + rho / np.where(r > 0, r, 1.0)), 1.0)
        pick = np.where(phase < w, 1.0, -1.0)
        return hull.center + (pick * r)[:, None] * e
    if isinstance(hull, Ball):
        hull = Interval(hull.center[..., 0] - hull.radius, hull.center[..., 0] + hull.radius)
    if isinstance(hull, Interval):
        lo, hi = hull.lo[:, None], hull.hi[:, None]
    elif isinstance(hull, Box):
        lo, hi = hull.center - hull.halfwidths, hull.center + hull.halfwidths
    else:
        raise ValueError("selection strategy unsupported")
    span = hi - lo
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(span > 0, (target - lo) / np.where(span > 0, span, 1.0), 1.0)
    w = np.clip(w, 0.0, 1.0)
    return np.where(phase[:, None] < w, hi, lo)


def select(F: Multimap, u: DiscreteFunction, strategy: Strategy, prev: DiscreteFunction | None = None) -> DiscreteFunction:
    """A nodewise selection f(t_i) in F(t_i, u(t_i)).

    ``prev`` is the previous selection, used by ``Projection(anchor=None)``;
    without it the anchor is the origin.
    """
    grid, dim = u.grid, F.dim
    value = F.along(u) if not isinstance(strategy, Oscillating) else None
    if isinstance(strategy, Projection):
        anchor = strategy.anchor if strategy.anchor is not None else prev
        z = anchor.values if anchor is not None else np.zeros((grid.m + 1, dim))
        out = value.project(z)
    elif isinstance(strategy, Centroid):
        out = value.centroid()
    elif isinstance(strategy, Extreme):
        d = _direction(dim, strategy.direction, strategy.seed)
        out = value.support(np.broadcast_to(d, (grid.m + 1, dim)))
    elif isinstance(strategy, Oscillating):
        d = _direction(dim, strategy.direction, 0)
        phase = oscillation_phase(grid, strategy.level)
        target = strategy.target.values if strategy.target is not None else None
        out = _oscillate(F.hull().along(u), phase, target, d)
    else:
        raise ValueError("selection strategy unsupported")
    return DiscreteFunction(grid, np.broadcast_to(out, (grid.m + 1, dim)))


def selection_distance(F: Multimap, u: DiscreteFunction, f: DiscreteFunction) -> np.ndarray:
    """Nodewise distance from f(t_i) to F(t_i, u(t_i))."""
    return np.asarray(F.along(u).distance(f.values))


# hypothesis checks ---------------------------------------------------------------


@dataclass(frozen=True)
class GrowthWitness:
    """User-declared growth data: theta(t) and the bounds |F(t, x)| <= a_eta(t) for |x| <= eta."""
    theta: DiscreteFunction
    a_eta: list = field(default_factory=list)  # [(eta, DiscreteFunction)]
    k_eta: float | None = None

    @property
    def eta_list(self):
        return [eta for eta, _ in self.a_eta]


def _state_directions(dim, count=64, seed=7):
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    d = np.random.default_rng(seed).standard_normal((count, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.vstack([axes, d])


def support_along_rays(F: Multimap, t: np.ndarray, radii: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """sup_{h in F(t, R d)} (h, R d) for all (t, R, d); shape (len(t), len(radii), len(dirs))."""
    out = np.empty((t.size, radii.size, len(dirs)))
    T = np.broadcast_to(t[:, None], (t.size, radii.size))
    for j, d in enumerate(dirs):
        x = radii[None, :, None] * d
        x = np.broadcast_to(x, (t.size, radii.size, F.dim))
        val = F.value(T, x)
        h = val.support(x)
        out[:, :, j] = np.einsum("...n,...n->...", h, x)
    return out


def _aitken(seq):
    e1, e2, e3 = seq[-3:]
    den = e1 + e3 - 2 * e2
    if abs(den) <= 1e-14 * max(abs(e1), abs(e2), abs(e3), 1e-300):
        return e3
    return e3 - (e3 - e2) ** 2 / den


def check_growth(F: Multimap, witness: GrowthWitness, xi: float, lambda1: float,
                 sample_radii, p: float, tol: float = 1e-6) -> list:
    """Sampled checks of the limsup growth bound, the theta window and the a_eta bounds.

    Returns a list of ``{"name", "pass", "detail"}`` entries. The limsup
    is extrapolated (Aitken) from the excess of (h, x)/|x|^p over theta at
    the three largest radii, so it is a falsification test consistent only
    up to the sampled radius.
    """
    from .eigen import check_theta

    radii = np.asarray(sample_radii, dtype=float)
    if radii.size < 3 or np.any(np.diff(radii) <= 0) or radii[-1] < 100:
        raise ValueError("sample_radii must be increasing, >= 3 values, max >= 100")
    theta = witness.theta
    t = theta.grid.t
    th = theta.values[:, 0]
    results = []

    ok, reason = check_theta(theta, lambda1, xi)
    results.append({"name": "theta_window", "pass": bool(ok and xi > 0),
                    "detail": "sampled: 0 <= theta <= lambda1*xi, strict on a subinterval" if ok and xi > 0
                    else ("xi nonpositive" if xi <= 0 else reason)})

    dirs = _state_directions(F.dim)
    sup = support_along_rays(F, t, radii, dirs)
    ratio = sup.max(axis=2) / radii[None, :] ** p
    excess = (ratio - th[:, None]).max(axis=0)
    limit = _aitken(list(excess))
    scale = max(1.0, abs(lambda1 * xi))
    passed = bool(limit <= tol * scale)
    results.append({
        "name": "growth_limsup",
        "pass": passed,
        "detail": (f"sampled: max excess over theta {excess[-1]:.3e} at R={radii[-1]:g}, "
                   f"extrapolated {limit:.3e}; consistent up to radius R={radii[-1]:g}"
                   if passed else f"sampled: extrapolated excess {limit:.3e} > 0 at R={radii[-1]:g}"),
    })

    for eta, profile in witness.a_eta:
        rs = np.linspace(0.0, eta, 33)
        worst = -np.inf
        for d in _state_directions(F.dim, 16):
            x = rs[None, :, None] * d
            T = np.broadcast_to(t[:, None], (t.size, rs.size))
            val = F.value(T, np.broadcast_to(x, (t.size, rs.size, F.dim)))
            worst = max(worst, float((val.sup_norm() - profile.values[:, :1]).max()))
        results.append({"name": f"a_eta_bound[{eta:g}]", "pass": bool(worst <= tol),
                        "detail": f"sampled: max(|F(t,x)| - a_eta(t)) = {worst:.3e} over |x| <= {eta:g}"})
    return results


def check_lipschitz(F: Multimap, eta: float, samples: int = 2000, t_nodes=None, seed: int = 0) -> dict:
    """Sampled max of h(F(t,x), F(t,v)) / |x - v| over |x|, |v| <= eta."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    rng = np.random.default_rng(seed)
    t_nodes = np.linspace(0.0, 1.0, 9) if t_nodes is None else np.asarray(t_nodes, dtype=float)
    n = F.dim

    def in_ball(k):
        d = rng.standard_normal((k, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return d * eta * rng.random((k, 1)) ** (1.0 / n)

    x = in_ball(samples)
    v = in_ball(samples)
    close = rng.random(samples) < 0.5
    step = rng.standard_normal((samples, n))
    step *= eta * np.exp(rng.uniform(np.log(1e-6), np.log(1e-1), (samples, 1))) / np.linalg.norm(step, axis=1, keepdims=True)
    v[close] = x[close] + step[close]
    nv = np.linalg.norm(v, axis=1, keepdims=True)
    v = np.where(nv > eta, v * eta / nv, v)
    t = t_nodes[rng.integers(0, t_nodes.size, samples)]
    dist = np.linalg.norm(x - v, axis=1)
    keep = dist > 0
    h = np.asarray(_hausdorff(F.value(t, x), F.value(t, v)))
    return {"k_eta_estimate": float((h[keep] / dist[keep]).max()) if keep.any() else 0.0}


def from_config(spec: dict, dim: int) -> Multimap:
    """Build a multimap from a ``problem.multimap`` config block."""
    from .expr import compile_scalar, compile_vector

    kind = spec["kind"]
    ex = spec.get("expressions", {})
    allowed = {
        "singleton": {"value"}, "interval": {"lo", "hi"}, "ball": {"center", "radius"},
        "box": {"center", "halfwidths"}, "finite": {"points"}, "extreme_of": set(),
    }
    if kind not in allowed:
        raise ValueError(f"unknown multimap kind {kind!r}")
    extra = set(ex) - allowed[kind]
    if extra:
        raise ValueError(f"unknown keys for {kind}: {sorted(extra)}")
    missing = allowed[kind] - set(ex)
    if missing:
        raise ValueError(f"missing expressions for {kind}: {sorted(missing)}")
    if kind == "singleton":
        return Multimap.singleton(compile_vector(ex["value"], dim), dim)
    if kind == "interval":
        if dim != 1:
            raise ValueError("interval multimaps need N = 1")
        return Multimap.interval(compile_scalar(ex["lo"], 1), compile_scalar(ex["hi"], 1))
    if kind == "ball":
        return Multimap.ball(compile_vector(ex["center"], dim), compile_scalar(ex["radius"], dim), dim)
    if kind == "box":
        return Multimap.box(compile_vector(ex["center"], dim), compile_vector(ex["halfwidths"], dim), dim)
    if kind == "finite":
        return Multimap.finite([compile_vector(p, dim) for p in ex["points"]], dim)
    if "inner" not in spec:
        raise ValueError("extreme_of needs an 'inner' multimap")
    return Multimap.extreme_of(from_config(spec["inner"], dim))
