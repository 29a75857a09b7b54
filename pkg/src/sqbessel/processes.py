"""Exact squared Bessel / CIR transition sampling and the Euler baseline.

A CIR path X with dX = (a + bX) dt + c sqrt(X) dW is a scaled, time-changed
squared Bessel process: X_t = e^{bt} Y_{C(t)} with C(t) = (c^2/4b)(1-e^{-bt})
and dimension delta = 4a/c^2.  One squared-Bessel step over [s, t] draws a
non-central chi-square with lam = Y_s/(t-s) and scales by (t-s), so CIR
marginals are sampled exactly in a single step per monitoring date.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampler import RngStream, central_chi2_inverse, sample_noncentral_extra


@dataclass(frozen=True)
class BesselParams:
    """Squared Bessel dimension and start value."""

    delta: float
    y0: float

    def __post_init__(self) -> None:
        if self.delta <= 0.0:
            raise ValueError(f"dimension must be positive, got {self.delta}")
        if self.y0 < 0.0:
            raise ValueError(f"start value must be nonnegative, got {self.y0}")


@dataclass(frozen=True)
class CirParams:
    """CIR drift/diffusion parameters and start value; delta = 4a/c^2."""

    a: float
    b: float
    c: float
    x0: float

    def __post_init__(self) -> None:
        if self.a < 0.0:
            raise ValueError(f"a must be nonnegative, got {self.a}")
        if self.c <= 0.0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.x0 < 0.0:
            raise ValueError(f"x0 must be nonnegative, got {self.x0}")

    @property
    def delta(self) -> float:
        return 4.0 * self.a / (self.c * self.c)

    @classmethod
    def from_delta(cls, delta: float, b: float, c: float, x0: float) -> "CirParams":
        return cls(a=0.25 * delta * c * c, b=b, c=c, x0=x0)

    def mean_at(self, t: float) -> float:
        """E[X_t] = x0 e^{bt} + (a/b)(e^{bt} - 1), with the b -> 0 limit a*t."""
        if self.b == 0.0:
            return self.x0 + self.a * t
        ebt = math.exp(self.b * t)
        return self.x0 * ebt + (self.a / self.b) * (ebt - 1.0)


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing monitoring times starting at 0."""

    times: tuple[float, ...]

    def __post_init__(self) -> None:
        ts = self.times
        if len(ts) < 2 or ts[0] != 0.0:
            raise ValueError("grid must start at 0 and contain at least one step")
        if any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
            raise ValueError(f"grid times must be strictly increasing: {ts}")

    @classmethod
    def regular(cls, horizon: float, steps: int) -> "TimeGrid":
        if horizon <= 0.0 or steps < 1:
            raise ValueError("need horizon > 0 and steps >= 1")
        return cls(tuple(horizon * i / steps for i in range(steps + 1)))


def time_change(params: CirParams, t: float) -> float:
    """C(t) = (c^2 / 4b)(1 - e^{-bt}); the b -> 0 limit is c^2 t / 4."""
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if params.b == 0.0:
        return 0.25 * params.c * params.c * t
    return params.c * params.c / (4.0 * params.b) * -math.expm1(-params.b * t)


def transition_scale(params: CirParams, h: float) -> float:
    """eta(h) = -4b e^{bh} / (c^2 (1 - e^{bh})): X_{t+h} * eta ~ chi2(delta, lam).

    Positive for all h > 0 regardless of the sign of b; the b -> 0 limit is
    4 / (c^2 h).
    """
    if h <= 0.0:
        raise ValueError(f"step must be positive, got {h}")
    if params.b == 0.0:
        return 4.0 / (params.c * params.c * h)
    return -4.0 * params.b * math.exp(params.b * h) / (
        params.c * params.c * -math.expm1(params.b * h)
    )


def bessel_step(patches, params: BesselParams, u_n: float, u_next: float,
                rng: RngStream, size: int | None = None,
                y_n: float | np.ndarray | None = None):
    """One exact squared-Bessel transition from u_n to u_next.

    Draws chi-square with non-centrality Y_{u_n}/(u_next - u_n) and scales by
    the step; y_n overrides the start value (vectorized across paths).
    """
    h = u_next - u_n
    if h <= 0.0:
        raise ValueError(f"step must be positive, got {u_next} <= {u_n}")
    start = params.y0 if y_n is None else y_n
    lam = np.asarray(start, dtype=float) / h
    if np.ndim(lam) == 0:
        extra = sample_noncentral_extra(float(lam), rng, size)
        central = central_chi2_inverse(patches, params.delta, rng.uniform(size))
    else:
        extra = _noncentral_extra_varying(lam, rng)
        u = np.atleast_1d(rng.uniform(lam.size))
        central = central_chi2_inverse(patches, params.delta, u)
    return h * (extra + central)


def _noncentral_extra_varying(lam: np.ndarray, rng: RngStream) -> np.ndarray:
    """Non-central supplements for per-path lambdas (paths evolve separately)."""
    from .sampler import _neg2_log_uniform_sums, sample_poisson

    n = lam.size
    extra = np.zeros(n)
    lam_left = lam.astype(float).copy()
    active = np.ones(n, dtype=bool)
    while active.any():
        big = active & (lam_left > 10.0)
        if big.any():
            idx = np.flatnonzero(big)
            nbar = np.atleast_1d(sample_poisson(5.0, rng, idx.size))
            done = nbar != 0
            if done.any():
                d_idx = idx[done]
                extra[d_idx] += _neg2_log_uniform_sums(nbar[done] - 1, rng)
                v1 = np.atleast_1d(rng.normal(d_idx.size))
                v2 = np.atleast_1d(rng.normal(d_idx.size))
                extra[d_idx] += v1 * v1 + (v2 + np.sqrt(lam_left[d_idx] - 10.0)) ** 2
                active[d_idx] = False
            lam_left[idx[~done]] -= 10.0
        small = active & (lam_left <= 10.0)
        if small.any():
            idx = np.flatnonzero(small)
            means = 0.5 * lam_left[idx]
            u = np.atleast_1d(rng.uniform(idx.size))
            k = np.zeros(idx.size, dtype=np.int64)
            p = np.exp(-means)
            cdf = p.copy()
            pending = u > cdf
            while pending.any():
                k[pending] += 1
                p[pending] *= means[pending] / k[pending]
                cdf[pending] += p[pending]
                pending &= u > cdf
            extra[idx] += _neg2_log_uniform_sums(k, rng)
            active[idx] = False
    return extra


def cir_terminal_exact(patches, params: CirParams, horizon: float,
                       rng: RngStream, size: int | None = None,
                       route: str = "bessel"):
    """Exact draw of X_T in one step.

    route="bessel": step the squared Bessel process over [0, C(T)] and scale
    by e^{bT}.  route="direct": draw from the CIR transition law with
    lam = x0 * eta(T) and scale by e^{bT}/eta(T).  The two are algebraically
    identical maps of the same chi-square draw; both are kept so tests can
    assert the equivalence.
    """
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    delta = params.delta
    if route == "bessel":
        c_t = time_change(params, horizon)
        bess = BesselParams(delta=delta, y0=params.x0)
        y = bessel_step(patches, bess, 0.0, c_t, rng, size)
        return math.exp(params.b * horizon) * y
    if route == "direct":
        eta = transition_scale(params, horizon)
        lam = params.x0 * eta
        extra = sample_noncentral_extra(lam, rng, size)
        central = central_chi2_inverse(patches, delta, rng.uniform(size))
        return math.exp(params.b * horizon) / eta * (extra + central)
    raise ValueError(f"unknown route {route!r}")


def cir_path_exact(patches, params: CirParams, grid: TimeGrid,
                   rng: RngStream, size: int | None = None) -> np.ndarray:
    """Exact CIR path at the grid times (no discretization bias).

    Returns shape (len(times), n_paths); row 0 is x0.
    """
    n = 1 if size is None else int(size)
    delta = params.delta
    times = grid.times
    out = np.empty((len(times), n))
    out[0, :] = params.x0
    x = np.full(n, params.x0)
    for i in range(1, len(times)):
        h = times[i] - times[i - 1]
        eta = transition_scale(params, h)
        lam = x * eta
        extra = _noncentral_extra_varying(lam, rng)
        u = np.atleast_1d(rng.uniform(n))
        central = central_chi2_inverse(patches, delta, u)
        x = math.exp(params.b * h) / eta * (extra + central)
        out[i, :] = x
    return out


def cir_path_fte(params: CirParams, grid: TimeGrid, substep: float,
                 rng: RngStream, size: int | None = None) -> np.ndarray:
    """Full truncation Euler path observed at the grid times.

    Each grid interval is subdivided into steps of length <= substep; the
    state may go negative, drift and diffusion use max(X, 0), and reported
    values are floored at zero.  Normals come from quantile inversion so the
    scheme consumes the same uniform stream family as the exact sampler.
    """
    if substep <= 0.0:
        raise ValueError(f"substep must be positive, got {substep}")
    n = 1 if size is None else int(size)
    times = grid.times
    out = np.empty((len(times), n))
    out[0, :] = params.x0
    x = np.full(n, params.x0)
    for i in range(1, len(times)):
        span = times[i] - times[i - 1]
        n_sub = max(1, int(math.ceil(span / substep - 1e-12)))
        h = span / n_sub
        sqrt_h = math.sqrt(h)
        for _ in range(n_sub):
            z = np.atleast_1d(rng.normal(n))
            x_plus = np.maximum(x, 0.0)
            x = x + (params.a + params.b * x_plus) * h \
                + params.c * np.sqrt(x_plus) * sqrt_h * z
        out[i, :] = np.maximum(x, 0.0)
    return out
