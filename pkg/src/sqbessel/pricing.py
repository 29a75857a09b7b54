"""Monte Carlo and quadrature pricing of the put / Asian / basket experiments.

Prices are plain expectations of the payoff (no discounting).  Monte Carlo
loops run in fixed-size path blocks, one counter-based stream per block, so
results are deterministic for a given (seed, block partition) regardless of
how blocks are scheduled.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np

from .processes import (CirParams, TimeGrid, _noncentral_extra_varying,
                        cir_path_fte, transition_scale)
from .quadrature import gauss_kronrod
from .sampler import RngStream, central_chi2_inverse, sample_noncentral_extra
from .specfun import (NoncentralParams, noncentral_chi2_cdf,
                      noncentral_chi2_moments, noncentral_chi2_pdf)
from .stats import jackknife_moment_se

BLOCK_SIZE = 1 << 17


class OptionKind(enum.Enum):
    PUT = "put"
    ASIAN_PUT = "asian"
    BASKET_PUT = "basket"


class Coupling(enum.Enum):
    COMMON_U = "common"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class OptionSpec:
    """Payoff family, contract terms and per-asset CIR parameters."""

    kind: OptionKind
    strike: float
    maturity: float
    assets: tuple[CirParams, ...]
    fixings: int = 1
    weights: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.strike <= 0.0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if self.maturity <= 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if self.fixings < 1:
            raise ValueError(f"fixings must be >= 1, got {self.fixings}")
        if self.kind is OptionKind.BASKET_PUT:
            if len(self.weights) != len(self.assets):
                raise ValueError("one weight per asset required")
            if any(w < 0.0 for w in self.weights):
                raise ValueError("weights must be nonnegative")
            if abs(sum(self.weights) - 1.0) > 1e-12:
                raise ValueError(f"weights must sum to 1, got {sum(self.weights)}")
        elif len(self.assets) != 1:
            raise ValueError(f"{self.kind.value} option takes exactly one asset")


@dataclass
class McResult:
    price: float
    std_error: float
    n_paths: int
    elapsed: float

    def __post_init__(self) -> None:
        if self.std_error < 0.0:
            raise ValueError("std_error must be nonnegative")


class _PayoffAccumulator:
    """Blockwise mean/variance accumulation with compensated totals."""

    def __init__(self) -> None:
        self._sums: list[float] = []
        self._sumsqs: list[float] = []
        self._n = 0

    def add(self, payoffs: np.ndarray) -> None:
        self._sums.append(float(np.sum(payoffs)))
        self._sumsqs.append(float(np.sum(payoffs * payoffs)))
        self._n += payoffs.size

    def result(self, elapsed: float) -> McResult:
        n = self._n
        total = math.fsum(self._sums)
        total_sq = math.fsum(self._sumsqs)
        mean = total / n
        var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
        return McResult(price=mean, std_error=math.sqrt(var / n),
                        n_paths=n, elapsed=elapsed)


def _blocks(n_paths: int):
    start = 0
    block = 0
    while start < n_paths:
        yield block, min(BLOCK_SIZE, n_paths - start)
        start += BLOCK_SIZE
        block += 1


def relative_error(reference: float, estimate: float) -> float:
    """|reference - estimate| / |reference|."""
    if reference == 0.0:
        raise ValueError("relative error undefined for zero reference")
    return abs(reference - estimate) / abs(reference)


# ---------------------------------------------------------------------------
# exact put price by quadrature
# ---------------------------------------------------------------------------


def put_price_exact(asset: CirParams, strike: float, maturity: float,
                    abs_tol: float = 1e-9) -> float:
    """Put value E[(K - X_T)^+] by quadrature of the terminal CIR law.

    Evaluated both as the density integral (with a power substitution that
    flattens the x^{delta/2-1} singularity at zero) and as the integrated-CDF
    form; the two must agree to 1e-8 or the routine raises.
    """
    eta = transition_scale(asset, maturity)
    scale = eta / math.exp(asset.b * maturity)   # X * scale ~ chi2(delta, lam)
    lam = asset.x0 * eta
    law = NoncentralParams(asset.delta, lam)
    a = 0.5 * asset.delta

    def cdf_form(x: float) -> float:
        return noncentral_chi2_cdf(law, x * scale)

    by_cdf, _ = gauss_kronrod(cdf_form, 0.0, strike, abs_tol=abs_tol)

    # integrate the density only where the law carries mass, otherwise the
    # spike at small x can fall between quadrature nodes entirely
    w_cap = asset.delta + lam + 40.0
    while noncentral_chi2_cdf(law, w_cap) < 1.0 - 1e-13:
        w_cap *= 1.5
    x_hi = min(strike, w_cap / scale)

    # x = x_hi t^(1/a) turns the x^(a-1) singularity into a bounded factor
    inv_a = 1.0 / a

    def dens_form(t: float) -> float:
        x = x_hi * t ** inv_a
        if x <= 0.0:
            return 0.0
        jac = x_hi * inv_a * t ** (inv_a - 1.0)
        return (strike - x) * noncentral_chi2_pdf(law, x * scale) * scale * jac

    by_dens, _ = gauss_kronrod(dens_form, 0.0, 1.0, abs_tol=abs_tol)
    # the ignored piece (x_hi, K] carries mass below 1e-13

    if abs(by_cdf - by_dens) > 1e-8:
        raise RuntimeError(
            f"put quadrature cross-check failed: CDF form {by_cdf!r} vs "
            f"density form {by_dens!r}"
        )
    return by_cdf


# ---------------------------------------------------------------------------
# Monte Carlo pricers
# ---------------------------------------------------------------------------


def _terminal_exact_block(patches, asset: CirParams, maturity: float,
                          stream: RngStream, n: int) -> np.ndarray:
    eta = transition_scale(asset, maturity)
    lam = np.full(n, asset.x0 * eta)
    extra = _noncentral_extra_varying(lam, stream)
    central = central_chi2_inverse(patches, asset.delta,
                                   np.atleast_1d(stream.uniform(n)))
    return math.exp(asset.b * maturity) / eta * (extra + central)


def price_put_mc(patches, asset: CirParams, strike: float, maturity: float,
                 n_paths: int, seed: int, scheme: str = "exact",
                 fte_step: float = 0.1) -> McResult:
    """Put price by Monte Carlo; the exact scheme uses one step per path."""
    acc = _PayoffAccumulator()
    t0 = time.perf_counter()
    for block, n in _blocks(n_paths):
        stream = RngStream(seed, (1, block))
        if scheme == "exact":
            x_t = _terminal_exact_block(patches, asset, maturity, stream, n)
        elif scheme == "fte":
            grid = TimeGrid((0.0, maturity))
            x_t = cir_path_fte(asset, grid, fte_step, stream, size=n)[-1]
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        acc.add(np.maximum(strike - x_t, 0.0))
    return acc.result(time.perf_counter() - t0)


def price_asian_mc(patches, asset: CirParams, strike: float, maturity: float,
                   fixings: int, n_paths: int, seed: int,
                   scheme: str = "exact", fte_step: float = 0.1) -> McResult:
    """Arithmetic-average Asian put on fixings at m * T / M.

    The exact scheme simulates only at the monitoring dates; the Euler
    baseline subdivides each monitoring interval at fte_step.
    """
    grid = TimeGrid.regular(maturity, fixings)
    acc = _PayoffAccumulator()
    t0 = time.perf_counter()
    # same stream family as the put pricer: with a single fixing the draw
    # sequence coincides and the Asian collapses to the European path-for-path
    for block, n in _blocks(n_paths):
        stream = RngStream(seed, (1, block))
        if scheme == "exact":
            path = _asian_exact_path(patches, asset, grid, stream, n)
        elif scheme == "fte":
            path = cir_path_fte(asset, grid, fte_step, stream, size=n)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        avg = path[1:, :].mean(axis=0)
        acc.add(np.maximum(strike - avg, 0.0))
    return acc.result(time.perf_counter() - t0)


def _asian_exact_path(patches, asset: CirParams, grid: TimeGrid,
                      stream: RngStream, n: int) -> np.ndarray:
    from .processes import cir_path_exact

    return cir_path_exact(patches, asset, grid, stream, size=n)


def price_basket_mc(patches, spec: OptionSpec, n_paths: int, seed: int,
                    scheme: str = "exact", fte_step: float = 0.1,
                    coupling: Coupling = Coupling.COMMON_U) -> McResult:
    """Basket put on a weighted sum of CIR terminals.

    Common-uniform coupling draws one uniform per path shared by every
    asset's central chi-square inverse (assets with equal degrees of freedom
    reuse the evaluated inverse); the non-central supplements are independent
    across assets because their Poisson means differ.  The Euler baseline
    shares the driving normals across assets under the same coupling.
    """
    if spec.kind is not OptionKind.BASKET_PUT:
        raise ValueError("price_basket_mc requires a basket spec")
    if len(spec.assets) == 1 and spec.weights == (1.0,):
        # a one-asset basket is the European put
        return price_put_mc(patches, spec.assets[0], spec.strike,
                            spec.maturity, n_paths, seed, scheme=scheme,
                            fte_step=fte_step)
    maturity = spec.maturity
    weights = np.asarray(spec.weights)
    acc = _PayoffAccumulator()
    t0 = time.perf_counter()
    for block, n in _blocks(n_paths):
        common = RngStream(seed, (3, block))
        basket = np.zeros(n)
        if scheme == "exact":
            u_shared = np.atleast_1d(common.uniform(n)) \
                if coupling is Coupling.COMMON_U else None
            central_cache: dict[float, np.ndarray] = {}
            for i, asset in enumerate(spec.assets):
                stream = RngStream(seed, (3, block, 1 + i))
                eta = transition_scale(asset, maturity)
                extra = _noncentral_extra_varying(
                    np.full(n, asset.x0 * eta), stream)
                if coupling is Coupling.COMMON_U:
                    central = central_cache.get(asset.delta)
                    if central is None:
                        central = central_chi2_inverse(patches, asset.delta,
                                                       u_shared)
                        central_cache[asset.delta] = central
                else:
                    central = central_chi2_inverse(
                        patches, asset.delta, np.atleast_1d(stream.uniform(n)))
                x_t = math.exp(asset.b * maturity) / eta * (extra + central)
                basket += weights[i] * x_t
        elif scheme == "fte":
            grid = TimeGrid((0.0, maturity))
            if coupling is Coupling.COMMON_U:
                basket = _basket_fte_common(spec, grid, fte_step, common, n)
            else:
                for i, asset in enumerate(spec.assets):
                    stream = RngStream(seed, (3, block, 1 + i))
                    x_t = cir_path_fte(asset, grid, fte_step, stream, size=n)[-1]
                    basket += weights[i] * x_t
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        acc.add(np.maximum(spec.strike - basket, 0.0))
    return acc.result(time.perf_counter() - t0)


def _basket_fte_common(spec: OptionSpec, grid: TimeGrid, fte_step: float,
                       stream: RngStream, n: int) -> np.ndarray:
    """Euler basket with one shared Brownian motion for all assets."""
    maturity = grid.times[-1]
    n_sub = max(1, int(math.ceil(maturity / fte_step - 1e-12)))
    h = maturity / n_sub
    sqrt_h = math.sqrt(h)
    x = np.tile([[a.x0] for a in spec.assets], (1, n))
    a_vec = np.array([[a.a] for a in spec.assets])
    b_vec = np.array([[a.b] for a in spec.assets])
    c_vec = np.array([[a.c] for a in spec.assets])
    for _ in range(n_sub):
        z = np.atleast_1d(stream.normal(n))
        x_plus = np.maximum(x, 0.0)
        x = x + (a_vec + b_vec * x_plus) * h + c_vec * np.sqrt(x_plus) * sqrt_h * z
    x = np.maximum(x, 0.0)
    weights = np.asarray(spec.weights)[:, None]
    return (weights * x).sum(axis=0)


# ---------------------------------------------------------------------------
# moment diagnostics
# ---------------------------------------------------------------------------


@dataclass
class MomentReport:
    params: NoncentralParams
    n_samples: int
    analytic: list[float]
    sample: list[float]
    rel_errors: list[float]
    jackknife_se: list[float]
    elapsed: float


def moment_report(patches, params: NoncentralParams, n_samples: int,
                  seed: int, k_max: int = 10) -> MomentReport:
    """Relative errors of the first k_max raw sample moments vs analytic."""
    if n_samples < 10**3:
        raise ValueError(f"need at least 1e3 samples, got {n_samples}")
    analytic = noncentral_chi2_moments(params, k_max)
    t0 = time.perf_counter()
    draws = np.empty(n_samples)
    pos = 0
    for block, n in _blocks(n_samples):
        stream = RngStream(seed, (4, block))
        extra = sample_noncentral_extra(params.lam, stream, n)
        central = central_chi2_inverse(patches, params.delta,
                                       np.atleast_1d(stream.uniform(n)))
        draws[pos:pos + n] = extra + central
        pos += n
    elapsed = time.perf_counter() - t0
    sample_m = [float(np.mean(draws ** k)) for k in range(1, k_max + 1)]
    ses = [jackknife_moment_se(draws, k) for k in range(1, k_max + 1)]
    rel = [abs(s - m) / m for s, m in zip(sample_m, analytic)]
    return MomentReport(params=params, n_samples=n_samples, analytic=analytic,
                        sample=sample_m, rel_errors=rel, jackknife_se=ses,
                        elapsed=elapsed)
