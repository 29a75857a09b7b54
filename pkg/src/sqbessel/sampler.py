"""Runtime sampling: Chebyshev quantile evaluation and chi-square generators.

The central quantile is a hybrid: probabilities mapping into the steep left
zone (w below 0.1, where quantiles decay like u^(2/delta) and any absolute
polynomial error is distributionally visible) are inverted by the machine-
accurate incomplete-gamma series; the middle and tail patches of the
two-dimensional Chebyshev table serve the rest via Clenshaw's recurrence.
Non-central sampling composes the central draw with the Poisson / shifted-
normal decompositions.
"""

from __future__ import annotations

import math

import numpy as np

from .chebfit import ChebyshevPatch, PatchCollection, PatchSet, Region
from .specfun import (NoncentralParams, chi2_inv_series, normal_inv_cdf,
                      reg_gamma_p)

# probabilities above the cap are clamped; beyond F_delta(20) the tail patch
# saturates at w = 20 anyway
U_CAP = 1.0 - 1e-8


class RngStream:
    """Counter-based random stream; (seed, stream_id) pins the sequence.

    stream_id may be an int or a tuple of ints (block / purpose indices);
    distinct ids give statistically independent Philox streams.
    """

    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = 0):
        self.seed = int(seed)
        self.stream_id = stream_id if isinstance(stream_id, tuple) else int(stream_id)
        key = self.stream_id if isinstance(self.stream_id, tuple) else (self.stream_id,)
        self._gen = np.random.Generator(
            np.random.Philox(np.random.SeedSequence((self.seed,) + tuple(key)))
        )

    def spawn(self, stream_id: int | tuple[int, ...]) -> "RngStream":
        """Independent stream under the same seed."""
        return RngStream(self.seed, stream_id)

    def uniform(self, size: int | None = None) -> np.ndarray | float:
        """Uniform draws on (0, 1); exact zeros are rejected and redrawn."""
        n = 1 if size is None else int(size)
        u = self._gen.random(n)
        while True:
            zero = u == 0.0
            if not zero.any():
                break
            u[zero] = self._gen.random(int(zero.sum()))
        if size is None:
            return float(u[0])
        return u

    def normal(self, size: int | None = None) -> np.ndarray | float:
        """Standard normals by quantile inversion of uniforms (CRN friendly)."""
        return normal_inv_cdf(self.uniform(size))


# ---------------------------------------------------------------------------
# Chebyshev evaluation
# ---------------------------------------------------------------------------


def clenshaw2d(patch: ChebyshevPatch, alpha: float, x):
    """Evaluate sum c_mn T_m(alpha) T_n(x) by two nested Clenshaw sweeps.

    The first sweep runs over the degrees-of-freedom index with multiplier
    alpha, collapsing the matrix to per-order weights a_n; the second sweep
    runs over the probability index at x (scalar or array).
    """
    c = patch.coeffs
    m_max = patch.order_delta
    alpha = min(max(float(alpha), -1.0), 1.0)
    x_arr = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)

    d1 = np.zeros(patch.order_u + 1)
    d2 = np.zeros(patch.order_u + 1)
    for m in range(m_max, 0, -1):
        d1, d2 = 2.0 * alpha * d1 - d2 + c[m, :], d1
    a = alpha * d1 - d2 + c[0, :]

    g1 = np.zeros_like(x_arr)
    g2 = np.zeros_like(x_arr)
    for n in range(patch.order_u, 0, -1):
        g1, g2 = 2.0 * x_arr * g1 - g2 + a[n], g1
    s = x_arr * g1 - g2 + a[0]
    if np.ndim(x) == 0:
        return float(s)
    return s


def eval2d_naive(patch: ChebyshevPatch, alpha: float, x) -> float | np.ndarray:
    """Direct double summation over Chebyshev polynomials (test oracle)."""
    alpha = min(max(float(alpha), -1.0), 1.0)
    x_arr = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), -1.0, 1.0)
    tm = np.polynomial.chebyshev.chebvander(alpha, patch.order_delta)
    tn = np.polynomial.chebyshev.chebvander(x_arr, patch.order_u)
    s = (tm @ patch.coeffs @ tn.T)[0]
    if np.ndim(x) == 0:
        return float(s[0])
    return s


def _resolve(source, delta: float) -> PatchSet:
    if isinstance(source, PatchCollection):
        return source.for_delta(delta)
    if not source.covers(delta):
        raise ValueError(
            f"delta={delta} outside patch interval "
            f"[{source.delta_lo}, {source.delta_hi}]"
        )
    return source


def central_chi2_inverse(source, delta: float, u):
    """Approximate central chi-square quantile at probability u.

    u is clamped into (0, 1 - 1e-8]; the steep zone below w = 0.1 uses series
    inversion, the rest the middle/tail Chebyshev patches.  Probabilities
    beyond F_delta(20) saturate at the tail cap w = 20.
    """
    ps = _resolve(source, delta)
    ctx = ps.context(delta)
    scalar = np.ndim(u) == 0
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("central_chi2_inverse requires 0 < u < 1")
    u_arr = np.minimum(u_arr, U_CAP)

    u_split = ctx.u_series_split
    w = np.empty_like(u_arr)
    ser = u_arr <= u_split
    mid = (~ser) & (u_arr < ctx.u_plus)
    tail = (~ser) & (~mid)

    if ser.any():
        w[ser] = chi2_inv_series(delta, u_arr[ser])
    lg = ctx.log_gamma_half_delta
    if mid.any():
        xi_mid = np.log1p(-u_arr[mid]) + lg
        x = ctx.k1[1] * xi_mid + ctx.k2[1]
        w[mid] = clenshaw2d(ps.patches[Region.MIDDLE], ctx.alpha, x)
    if tail.any():
        inner = np.log1p(-u_arr[tail]) + lg
        x = ctx.k1[2] * np.log(-inner) + ctx.k2[2]
        w[tail] = clenshaw2d(ps.patches[Region.TAIL], ctx.alpha, x)
        # beyond F_delta(20) the patch saturates; those draws (mass a few
        # 1e-7 per unit delta) fall back to root finding so the clamp bias
        # stays at the 1e-8 cap mass, not the patch-top mass
        beyond = u_arr[tail] > ctx.u_tail_top
        if beyond.any():
            from .specfun import chi2_inv_reference

            idx = np.flatnonzero(tail)[beyond]
            w[idx] = [chi2_inv_reference(delta, float(u)) for u in u_arr[idx]]
    np.maximum(w, 0.0, out=w)
    if scalar:
        return float(w[0])
    return w


def patch_inverse(source, delta: float, u):
    """Pure-patch quantile (first region evaluated by its Chebyshev patch).

    Validation surface only: the steep first region carries the inherent
    absolute error of any polynomial fit there, so runtime sampling uses
    `central_chi2_inverse` instead.
    """
    ps = _resolve(source, delta)
    ctx = ps.context(delta)
    scalar = np.ndim(u) == 0
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("patch_inverse requires 0 < u < 1")
    u_arr = np.minimum(u_arr, U_CAP)

    w = np.empty_like(u_arr)
    first = u_arr < ctx.u_minus
    mid = (~first) & (u_arr < ctx.u_plus)
    tail = (~first) & (~mid)
    lg = ctx.log_gamma_half_delta
    if first.any():
        x = ctx.k1[0] * u_arr[first] + ctx.k2[0]
        w[first] = clenshaw2d(ps.patches[Region.FIRST], ctx.alpha, x)
    if mid.any():
        x = ctx.k1[1] * (np.log1p(-u_arr[mid]) + lg) + ctx.k2[1]
        w[mid] = clenshaw2d(ps.patches[Region.MIDDLE], ctx.alpha, x)
    if tail.any():
        x = ctx.k1[2] * np.log(-(np.log1p(-u_arr[tail]) + lg)) + ctx.k2[2]
        w[tail] = clenshaw2d(ps.patches[Region.TAIL], ctx.alpha, x)
    np.maximum(w, 0.0, out=w)
    if scalar:
        return float(w[0])
    return w


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def sample_central(source, delta: float, rng: RngStream, size: int | None = None):
    """Central chi-square draws by direct inversion of uniforms."""
    u = rng.uniform(size if size is not None else 1)
    w = central_chi2_inverse(source, delta, u)
    if size is None:
        return float(w[0])
    return w


def sample_poisson(mean: float, rng: RngStream, size: int | None = None):
    """Poisson draws: sequential-search inversion below mean 30 (one uniform
    per draw), transformed rejection above."""
    if mean < 0.0:
        raise ValueError(f"Poisson mean must be nonnegative, got {mean}")
    n = 1 if size is None else int(size)
    if mean == 0.0:
        out = np.zeros(n, dtype=np.int64)
    elif mean < 30.0:
        u = np.atleast_1d(rng.uniform(n))
        k = np.zeros(n, dtype=np.int64)
        p = np.full(n, math.exp(-mean))
        cdf = p.copy()
        pending = u > cdf
        while pending.any():
            k[pending] += 1
            p[pending] *= mean / k[pending]
            cdf[pending] += p[pending]
            # survivors this round still sit above the updated cdf
            pending &= u > cdf
        out = k
    else:
        out = _poisson_ptrs(mean, rng, n)
    if size is None:
        return int(out[0])
    return out


_lgamma_vec = np.vectorize(math.lgamma, otypes=[float])


def _poisson_ptrs(mean: float, rng: RngStream, n: int) -> np.ndarray:
    """Hormann's PTRS transformed rejection, batched (mean >= 10)."""
    slam = math.sqrt(mean)
    loglam = math.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)

    out = np.empty(n, dtype=np.int64)
    filled = 0
    while filled < n:
        m = max(int((n - filled) * 1.4) + 16, 32)
        u = np.atleast_1d(rng.uniform(m)) - 0.5
        v = np.atleast_1d(rng.uniform(m))
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a / us + b) * u + mean + 0.43)
        fast = (us >= 0.07) & (v <= v_r) & (k >= 0.0)
        feasible = (k >= 0.0) & ((us >= 0.013) | (v <= us))
        lhs = np.log(v * inv_alpha / (a / (us * us) + b))
        rhs = k * loglam - mean - _lgamma_vec(np.maximum(k, 0.0) + 1.0)
        accept = fast | (feasible & (lhs <= rhs))
        kk = k[accept].astype(np.int64)
        take = min(kk.size, n - filled)
        out[filled:filled + take] = kk[:take]
        filled += take
    return out


def sample_standard_normal(rng: RngStream, size: int | None = None):
    """Standard normal draws by quantile inversion."""
    return rng.normal(size)


def _neg2_log_uniform_sums(counts: np.ndarray, rng: RngStream) -> np.ndarray:
    """For each entry draw `count` uniforms and return -2 sum(log U)."""
    total = int(counts.sum())
    if total == 0:
        return np.zeros(counts.size)
    us = np.atleast_1d(rng.uniform(total))
    c = np.concatenate([[0.0], np.cumsum(-2.0 * np.log(us))])
    ends = np.cumsum(counts)
    starts = ends - counts
    return c[ends] - c[starts]


def sample_noncentral_extra(lam: float, rng: RngStream, size: int | None = None):
    """The non-centrality supplement: the draw minus its central component.

    lam <= 10: chi-square with 2N degrees of freedom, N ~ Poisson(lam/2).
    lam > 10: Poisson(5) count Nbar; when Nbar != 0 the supplement is
    -2 sum(log U_1..U_{Nbar-1}) + V1^2 + (V2 + sqrt(lam-10))^2; when Nbar = 0
    the non-centrality drops by 10 and the rule repeats (loop, not recursion).
    """
    if lam < 0.0:
        raise ValueError(f"non-centrality must be nonnegative, got {lam}")
    n = 1 if size is None else int(size)
    extra = np.zeros(n)
    lam_left = np.full(n, float(lam))
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
                shift = np.sqrt(lam_left[d_idx] - 10.0)
                extra[d_idx] += v1 * v1 + (v2 + shift) ** 2
                active[d_idx] = False
            lam_left[idx[~done]] -= 10.0
        small = active & (lam_left <= 10.0)
        if small.any():
            idx = np.flatnonzero(small)
            means = 0.5 * lam_left[idx]
            # Poisson draws with per-path means: sequential search on one
            # uniform each
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
    if size is None:
        return float(extra[0])
    return extra


def sample_noncentral(source, params: NoncentralParams, rng: RngStream,
                      size: int | None = None):
    """Non-central chi-square draws: supplement first, central component last."""
    extra = sample_noncentral_extra(params.lam, rng, size)
    central = sample_central(source, params.delta, rng, size)
    return extra + central
