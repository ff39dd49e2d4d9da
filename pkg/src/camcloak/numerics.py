"""Bracketed root finding and adaptive quadrature used by the solvers.

Both routines are deliberately plain: bisection trades speed for
guaranteed convergence on a verified bracket, and the quadrature is a
globally adaptive Gauss-Kronrod 7-15 rule with vectorized integrand
evaluation so that per-bond solves stay cheap.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import AccuracyError, NoRootError

# Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (positive half; the
# rule is symmetric).
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss-7 weights aligned with the odd Kronrod nodes (indices 1,3,5,7).
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])          # 15 ascending nodes
_WEIGHTS_K = np.concatenate([_WK[:-1], _WK[::-1]])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_WEIGHTS_G = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray):
    """Apply the 7-15 pair on a batch of intervals; returns (kronrod, err)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = f(x.ravel()).reshape(x.shape)
    k = half * (y @ _WEIGHTS_K)
    g = half * (y[:, _GAUSS_IDX] @ _WEIGHTS_G)
    return k, np.abs(k - g)


def adaptive_quadrature(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    breakpoints: list[float] | None = None,
    rtol: float = 1e-12,
    atol: float = 0.0,
    max_intervals: int = 8192,
) -> float:
    """Integrate f over [a, b], subdividing until the GK error estimate
    drops below ``atol + rtol*|integral|``.

    ``breakpoints`` lists interior abscissae where the integrand has
    kinks; the initial partition is split there so each panel sees a
    smooth integrand. ``f`` must accept a float ndarray.
    """
    if b <= a:
        if b == a:
            return 0.0
        return -adaptive_quadrature(f, b, a, breakpoints=breakpoints,
                                    rtol=rtol, atol=atol,
                                    max_intervals=max_intervals)
    pts = [a] + sorted(p for p in (breakpoints or []) if a < p < b) + [b]
    lo = np.array(pts[:-1], dtype=float)
    hi = np.array(pts[1:], dtype=float)
    vals, errs = _gk15(f, lo, hi)
    while True:
        total = vals.sum()
        tol = atol + rtol * abs(total)
        err = errs.sum()
        if err <= tol:
            return float(total)
        if lo.size >= max_intervals:
            raise AccuracyError(
                f"quadrature error {err:.3e} above tolerance {tol:.3e} "
                f"after {lo.size} intervals")
        # split every interval whose error exceeds its fair share
        bad = errs > tol / (2 * lo.size)
        if not bad.any():
            bad = errs == errs.max()
        mid = 0.5 * (lo[bad] + hi[bad])
        new_lo = np.concatenate([lo[~bad], lo[bad], mid])
        new_hi = np.concatenate([hi[~bad], mid, hi[bad]])
        keep_vals = vals[~bad]
        keep_errs = errs[~bad]
        split_vals, split_errs = _gk15(
            f, np.concatenate([lo[bad], mid]), np.concatenate([mid, hi[bad]]))
        lo, hi = new_lo, new_hi
        vals = np.concatenate([keep_vals, split_vals])
        errs = np.concatenate([keep_errs, split_errs])


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol_rel: float = 1e-15,
    ftol: float = 0.0,
    max_iter: int = 400,
) -> float:
    """Bisection on a sign-changing bracket [lo, hi].

    Stops when ``|f(mid)| <= ftol`` or the bracket width shrinks below
    ``xtol_rel`` relative to its magnitude. Raises NoRootError when the
    endpoints do not bracket a sign change.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoRootError(
            f"no sign change on [{lo:.6e}, {hi:.6e}] "
            f"(f = {flo:.6e}, {fhi:.6e})")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) <= ftol:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        if hi - lo <= xtol_rel * max(abs(lo), abs(hi)):
            return 0.5 * (lo + hi)
    raise AccuracyError(f"bisection did not converge in {max_iter} iterations")
