"""Adaptive Gauss-Kronrod quadrature (7/15 pair).

Scalar `gauss_kronrod` follows the classic largest-error-first bisection
strategy with an absolute tolerance; `gauss_kronrod_vec` integrates a
vector-valued integrand (one adaptive partition shared by all components),
which is what the Chebyshev coefficient pipeline uses so every polynomial
order rides the same panels.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

# QUADPACK dqk15 abscissae (positive half) and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# all 15 Kronrod nodes on [-1, 1], ordered; Gauss subset at odd indices
_NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
_WK = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
_WGAUSS = np.zeros(15)
_WGAUSS[1:14:2] = np.concatenate([_WG[:3], [_WG[3]], _WG[2::-1]])


class QuadratureError(RuntimeError):
    """Raised when the subdivision limit is hit before reaching tolerance."""


def _kronrod_panel(f, a: float, b: float):
    """One K15/G7 evaluation on [a, b]; returns (value, err_est)."""
    h = 0.5 * (b - a)
    c = 0.5 * (a + b)
    fx = np.array([f(c + h * t) for t in _NODES])
    resk = float(_WK @ fx)
    resg = float(_WGAUSS @ fx)
    reskh = 0.5 * resk
    resasc = float(_WK @ np.abs(fx - reskh)) * abs(h)
    err = abs(resk - resg) * abs(h)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    return resk * h, err


def gauss_kronrod(f, a: float, b: float, abs_tol: float = 1e-10,
                  max_panels: int = 2000):
    """Adaptive 15-point Kronrod / 7-point Gauss integration of f over [a, b].

    Returns (value, err_est).  Raises QuadratureError if the panel budget is
    exhausted with err_est still above abs_tol.
    """
    if not a < b:
        raise ValueError(f"gauss_kronrod requires a < b, got [{a}, {b}]")
    val, err = _kronrod_panel(f, a, b)
    heap = [(-err, 0, a, b, val, err)]
    total_val, total_err = val, err
    count = 1
    tie = 0
    while total_err > abs_tol and count < max_panels:
        _, _, pa, pb, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        lval, lerr = _kronrod_panel(f, pa, mid)
        rval, rerr = _kronrod_panel(f, mid, pb)
        total_val += lval + rval - pval
        total_err += lerr + rerr - perr
        tie += 1
        heapq.heappush(heap, (-lerr, tie, pa, mid, lval, lerr))
        tie += 1
        heapq.heappush(heap, (-rerr, tie, mid, pb, rval, rerr))
        count += 1
    total_val = math.fsum(item[4] for item in heap)
    total_err = math.fsum(item[5] for item in heap)
    if total_err > abs_tol:
        raise QuadratureError(
            f"gauss_kronrod: err_est {total_err:.3e} > abs_tol {abs_tol:.3e} "
            f"after {count} panels on [{a}, {b}]"
        )
    return total_val, total_err


def _kronrod_panel_vec(f, a: float, b: float):
    """Vector-valued K15/G7 panel; f maps an array of points to (npts, ncomp)."""
    h = 0.5 * (b - a)
    c = 0.5 * (a + b)
    fx = np.asarray(f(c + h * _NODES))
    resk = _WK @ fx
    resg = _WGAUSS @ fx
    reskh = 0.5 * resk
    resasc = (_WK @ np.abs(fx - reskh)) * abs(h)
    err = np.abs(resk - resg) * abs(h)
    mask = (resasc != 0.0) & (err != 0.0)
    scaled = np.where(mask, np.minimum(1.0, (200.0 * err / np.where(mask, resasc, 1.0)) ** 1.5), 1.0)
    err = np.where(mask, resasc * scaled, err)
    return resk * h, err


def gauss_kronrod_vec(f, a: float, b: float, abs_tol: float = 1e-10,
                      max_panels: int = 2000):
    """Adaptive GK15 for a vector integrand; tolerance applies per component.

    One shared partition: panels are split (largest worst-component error
    first) until every component's summed error estimate is below abs_tol.
    Returns (values, err_ests) as 1-D arrays.
    """
    if not a < b:
        raise ValueError(f"gauss_kronrod_vec requires a < b, got [{a}, {b}]")
    val, err = _kronrod_panel_vec(f, a, b)
    panels = {0: (a, b, val, err)}
    heap = [(-float(err.max()), 0)]
    next_id = 1
    total_err = err.copy()
    while float(total_err.max()) > abs_tol and len(panels) < max_panels:
        while True:
            _, pid = heapq.heappop(heap)
            if pid in panels:
                break
        pa, pb, _, perr = panels.pop(pid)
        total_err -= perr
        mid = 0.5 * (pa + pb)
        for qa, qb in ((pa, mid), (mid, pb)):
            v, e = _kronrod_panel_vec(f, qa, qb)
            panels[next_id] = (qa, qb, v, e)
            total_err += e
            heapq.heappush(heap, (-float(e.max()), next_id))
            next_id += 1
    values = np.sum([p[2] for p in panels.values()], axis=0)
    errors = np.sum([p[3] for p in panels.values()], axis=0)
    if float(errors.max()) > abs_tol:
        raise QuadratureError(
            f"gauss_kronrod_vec: err_est {float(errors.max()):.3e} > abs_tol "
            f"{abs_tol:.3e} after {len(panels)} panels on [{a}, {b}]"
        )
    return values, errors
