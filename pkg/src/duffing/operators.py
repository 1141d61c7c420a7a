"""Radial monotone homeomorphisms a(y) = g(|y|) y on R^N.

Every built-in family is described by its scalar profile
``phi(s) = g(s) * s`` (s >= 0), which must be continuous, strictly
increasing, zero at zero and unbounded. Inversion reduces to solving
``phi(s) = |z|`` for s.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

BRACKET_LIMIT = 1e12
_ABS_FLOOR = 1e-14
_REL_TOL = 1e-13


@dataclass(frozen=True)
class Operator:
    kind: str
    dim: int
    c0: float
    p: float
    params: dict = field(default_factory=dict)
    profile: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False, default=None)
    inverse_profile: Callable[[np.ndarray], np.ndarray] | None = field(
        repr=False, compare=False, default=None
    )

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if not self.p > 1:
            raise ValueError("exponent out of range")
        if self.profile is None:
            raise ValueError("operator needs a radial profile")

    def __call__(self, y):
        return self.eval(y)

    def eval(self, y) -> np.ndarray:
        """a(y) for one vector or a stack of vectors (last axis = R^N)."""
        y = np.asarray(y, dtype=float)
        s = np.linalg.norm(y, axis=-1, keepdims=True)
        phi = self.profile(s)
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(s > 0, phi / np.where(s > 0, s, 1.0), 0.0)
        return scale * y

    def radial_inverse(self, target: np.ndarray) -> np.ndarray:
        """Solve phi(s) = target elementwise (target >= 0)."""
        target = np.asarray(target, dtype=float)
        if self.inverse_profile is not None:
            return self.inverse_profile(target)
        return bisect_profile(self.profile, target)

    def invert(self, z) -> np.ndarray:
        """The unique y with a(y) = z; invert(0) = 0."""
        z = np.asarray(z, dtype=float)
        r = np.linalg.norm(z, axis=-1, keepdims=True)
        s = self.radial_inverse(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(r > 0, s / np.where(r > 0, r, 1.0), 0.0)
        return scale * z


def bisect_profile(phi: Callable, target: np.ndarray) -> np.ndarray:
    """Vectorised bisection for phi(s) = target with a doubling bracket."""
    target = np.asarray(target, dtype=float)
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    with np.errstate(over="ignore"):
        while True:
            short = phi(hi) < target
            if not short.any():
                break
            if np.any(hi[short] >= BRACKET_LIMIT):
                raise ArithmeticError("inverse out of bracket")
            lo = np.where(short, hi, lo)
            hi = np.where(short, 2.0 * hi, hi)
        for _ in range(400):
            width = hi - lo
            if np.all(width <= np.maximum(_ABS_FLOOR, _REL_TOL * hi)):
                break
            mid = 0.5 * (lo + hi)
            below = phi(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return np.where(target > 0, out, 0.0)


# built-in families ---------------------------------------------------------


def _pow(s, e):
    # s**e with 0**e == 0 for e > 0 and the s = 0 value of s^(p-1) for p < 2 kept finite
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s > 0, np.power(np.where(s > 0, s, 1.0), e), 0.0)


def p_laplacian(p: float, dim: int = 1) -> Operator:
    """a(y) = |y|^(p-2) y."""
    e = p - 1.0
    return Operator(
        "p_laplacian", dim, 1.0, p, {"p": p},
        profile=lambda s: _pow(s, e),
        inverse_profile=lambda z: _pow(z, 1.0 / e),
    )


def pq_laplacian(p: float, q: float, dim: int = 1) -> Operator:
    """a(y) = |y|^(p-2) y + |y|^(q-2) y with 1 < q < p."""
    if not 1 < q < p:
        raise ValueError("pq_laplacian needs 1 < q < p")
    return Operator(
        "pq_laplacian", dim, 1.0, p, {"p": p, "q": q},
        profile=lambda s: _pow(s, p - 1.0) + _pow(s, q - 1.0),
    )


def curvature(p: float, dim: int = 1) -> Operator:
    """a(y) = (1 + |y|^2)^((p-2)/2) y.

    Coercivity with exponent p only holds for p >= 2 (c0 = 1); for
    p < 2 the ratio (a(y), y) / |y|^p tends to 0 at the origin, so the
    declared c0 is 0 and the hypothesis check reports the failure.
    """
    c0 = 1.0 if p >= 2 else 0.0
    return Operator(
        "curvature", dim, c0, p, {"p": p},
        profile=lambda s: (1.0 + s * s) ** ((p - 2.0) / 2.0) * s,
    )


def exponential(p: float, c: float, offset: float = -1.0, dim: int = 1) -> Operator:
    """a(y) = |y|^(p-2) y (c exp(|y|^p) + offset).

    ``offset = -1`` with ``c > 1`` is the p-growth example family;
    ``p = 2, c = 2, offset = 1`` gives 2 y exp(|y|^2) + y.
    """
    if not (c > 0 and c + offset > 0):
        raise ValueError("exponential family needs c > 0 and c + offset > 0")
    return Operator(
        "exponential", dim, c + offset, p, {"p": p, "c": c, "offset": offset},
        profile=lambda s: _pow(s, p - 1.0) * (c * np.exp(np.power(s, p)) + offset),
    )


def linear(c: float, dim: int = 1, p: float = 2.0) -> Operator:
    """a(y) = c y."""
    if not c > 0:
        raise ValueError("linear operator needs c > 0")
    return Operator(
        "linear", dim, float(c), p, {"c": c},
        profile=lambda s: c * s,
        inverse_profile=lambda z: z / c,
    )


def piecewise_q(q: float, dim: int = 1) -> Operator:
    """a(y) = |y|^(q-2) y for |y| <= 1 and y beyond, 1 < q < 2 (p = 2)."""
    if not 1 < q < 2:
        raise ValueError("piecewise profile needs 1 < q < 2")

    def phi(s):
        return np.where(s <= 1.0, _pow(s, q - 1.0), s)

    def inv(z):
        return np.where(z <= 1.0, _pow(z, 1.0 / (q - 1.0)), z)

    return Operator(
        "custom_radial", dim, 1.0, 2.0, {"profile": "piecewise", "q": q},
        profile=phi, inverse_profile=inv,
    )


def custom_radial(profile: Callable, c0: float, p: float, dim: int = 1, **params) -> Operator:
    """User-supplied profile phi(s) = g(s) s; c0 is declared, not derived."""
    return Operator("custom_radial", dim, float(c0), p, dict(params), profile=profile)


# sampled hypothesis checks ---------------------------------------------------


def _ball_samples(rng, n, dim, radius):
    d = rng.standard_normal((n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    # radii log-uniform over many decades so the origin is probed too
    r = radius * np.exp(rng.uniform(np.log(1e-6), 0.0, size=(n, 1)))
    return d * r


def check_coercivity(op: Operator, samples: int = 2000, radius: float = 10.0, seed: int = 0) -> dict:
    """Sampled min of (a(y), y) / |y|^p over a ball; a check, not a proof."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    y = _ball_samples(rng, samples, op.dim, radius)
    s = np.linalg.norm(y, axis=1)
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = np.einsum("ij,ij->i", op.eval(y), y) / s**op.p
    ratio = ratio[np.isfinite(ratio)]
    est = float(ratio.min())
    return {"c0_estimate": est, "pass": bool(op.c0 > 0 and est >= op.c0 - 1e-9)}


def monotonicity_pairs(op: Operator, eta: float, samples: int, seed: int = 0):
    """Seeded pairs (y, v) in the ball of radius eta, mixing far and close pairs."""
    rng = np.random.default_rng(seed)
    y = _ball_samples(rng, samples, op.dim, eta)
    v = _ball_samples(rng, samples, op.dim, eta)
    close = rng.random(samples) < 0.5
    step = rng.standard_normal((samples, op.dim))
    step *= (eta * np.exp(rng.uniform(np.log(1e-3), np.log(1e-1), (samples, 1)))
             / np.linalg.norm(step, axis=1, keepdims=True))
    v[close] = y[close] + step[close]
    # keep close partners inside the ball
    nv = np.linalg.norm(v, axis=1, keepdims=True)
    v = np.where(nv > eta, v * eta / nv, v)
    return y, v


def check_strong_monotonicity(op: Operator, eta: float, samples: int = 4000, seed: int = 0) -> dict:
    """Sampled c_hat_eta = min (a(y) - a(v), y - v) / |y - v|^2 over |y|, |v| <= eta."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    y, v = monotonicity_pairs(op, eta, samples, seed)
    d = y - v
    dd = np.einsum("ij,ij->i", d, d)
    keep = dd > 0
    num = np.einsum("ij,ij->i", op.eval(y) - op.eval(v), d)
    return {"c_hat_eta": float((num[keep] / dd[keep]).min())}


def from_config(spec: dict, dim: int, p: float) -> Operator:
    """Build an operator from the ``problem.operator`` config block."""
    from .expr import compile_profile

    kind = spec["kind"]
    params = dict(spec.get("params", {}))
    if kind == "p_laplacian":
        op = p_laplacian(params.get("p", p), dim)
    elif kind == "pq_laplacian":
        op = pq_laplacian(params.get("p", p), params["q"], dim)
    elif kind == "curvature":
        op = curvature(params.get("p", p), dim)
    elif kind == "exponential":
        op = exponential(params.get("p", p), params["c"], params.get("offset", -1.0), dim)
    elif kind == "linear":
        op = linear(params.get("c", 1.0), dim, p)
    elif kind == "custom_radial":
        if params.get("profile") == "piecewise":
            op = piecewise_q(params["q"], dim)
        elif "expression" in params:
            if "c0" not in spec:
                raise ValueError("custom_radial needs a declared c0")
            op = custom_radial(compile_profile(params["expression"]), spec["c0"], p, dim,
                               expression=params["expression"])
        else:
            raise ValueError("custom_radial needs profile 'piecewise' or an expression")
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    if "c0" in spec and kind != "custom_radial":
        op = Operator(op.kind, op.dim, float(spec["c0"]), op.p, op.params,
                      op.profile, op.inverse_profile)
    if op.p != p:
        raise ValueError(f"operator exponent {op.p} differs from problem p = {p}")
    return op
