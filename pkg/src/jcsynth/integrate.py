"""Adaptive embedded Runge-Kutta propagation of one two-amplitude sector.

Dormand-Prince 5(4): fifth-order propagation with a fourth-order embedded
error estimate and the standard quartic dense-output interpolant.  The
stepper is specialized to the resonant sector equations

    dC_e/dt = -i g lam(t) C_g,      dC_g/dt = -i g lam(t) C_e,

written out as four real components and stepped in plain Python floats: the
per-step cost is several times below a generic array-based solver, which is
what keeps the distribution-weighted pipelines inside their time budgets.

No renormalization is applied during integration; norm drift is the
caller's health metric.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .exceptions import IntegrationError

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between the 5th- and 4th-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)
# dense-output polynomial, one theta-weight row per stage
_P1 = (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432)
_P3 = (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799)
_P4 = (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072)
_P5 = (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632)
_P6 = (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844)
_P7 = (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
#: steps below this fraction of the full span abort the integration
MIN_STEP_FRACTION = 1e-14

#: default local error tolerances (see the decisions on the acceptance bounds)
DEFAULT_RTOL = 3e-12
DEFAULT_ATOL = 1e-12


def _segment(lam, g, t0, t1, y, t_out, out, io, rtol, atol, min_step):
    """Advance y over [t0, t1], filling dense output for t_out[io:] <= t1."""
    a, b, c, d = y
    n_out = len(t_out)

    fa = g * lam(t0)
    k1a, k1b, k1c, k1d = fa * d, -fa * c, fa * b, -fa * a
    nfev = 1

    # initial step: conservative fraction of the segment and of the local period
    scale = abs(fa) + 1e-3
    h = min(t1 - t0, 0.05 / scale)

    t = t0
    while t < t1:
        remaining = t1 - t
        # a sub-resolution whisker left at the segment end is taken as-is:
        # whatever the error estimate thinks, the state change over it is nil
        force = remaining <= 2.0 * min_step
        if h > remaining or force:
            h = remaining

        fa = g * lam(t + _C2 * h)
        ya = a + h * _A21 * k1a
        yb = b + h * _A21 * k1b
        yc = c + h * _A21 * k1c
        yd = d + h * _A21 * k1d
        k2a, k2b, k2c, k2d = fa * yd, -fa * yc, fa * yb, -fa * ya

        fa = g * lam(t + _C3 * h)
        ya = a + h * (_A31 * k1a + _A32 * k2a)
        yb = b + h * (_A31 * k1b + _A32 * k2b)
        yc = c + h * (_A31 * k1c + _A32 * k2c)
        yd = d + h * (_A31 * k1d + _A32 * k2d)
        k3a, k3b, k3c, k3d = fa * yd, -fa * yc, fa * yb, -fa * ya

        fa = g * lam(t + _C4 * h)
        ya = a + h * (_A41 * k1a + _A42 * k2a + _A43 * k3a)
        yb = b + h * (_A41 * k1b + _A42 * k2b + _A43 * k3b)
        yc = c + h * (_A41 * k1c + _A42 * k2c + _A43 * k3c)
        yd = d + h * (_A41 * k1d + _A42 * k2d + _A43 * k3d)
        k4a, k4b, k4c, k4d = fa * yd, -fa * yc, fa * yb, -fa * ya

        fa = g * lam(t + _C5 * h)
        ya = a + h * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a)
        yb = b + h * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b)
        yc = c + h * (_A51 * k1c + _A52 * k2c + _A53 * k3c + _A54 * k4c)
        yd = d + h * (_A51 * k1d + _A52 * k2d + _A53 * k3d + _A54 * k4d)
        k5a, k5b, k5c, k5d = fa * yd, -fa * yc, fa * yb, -fa * ya

        t_new = t + h
        fa = g * lam(t_new)
        ya = a + h * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a)
        yb = b + h * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b)
        yc = c + h * (_A61 * k1c + _A62 * k2c + _A63 * k3c + _A64 * k4c + _A65 * k5c)
        yd = d + h * (_A61 * k1d + _A62 * k2d + _A63 * k3d + _A64 * k4d + _A65 * k5d)
        k6a, k6b, k6c, k6d = fa * yd, -fa * yc, fa * yb, -fa * ya

        na = a + h * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        nb = b + h * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        nc = c + h * (_B1 * k1c + _B3 * k3c + _B4 * k4c + _B5 * k5c + _B6 * k6c)
        nd = d + h * (_B1 * k1d + _B3 * k3d + _B4 * k4d + _B5 * k5d + _B6 * k6d)

        fa = g * lam(t_new)
        k7a, k7b, k7c, k7d = fa * nd, -fa * nc, fa * nb, -fa * na
        nfev += 6

        ea = h * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        eb = h * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)
        ec = h * (_E1 * k1c + _E3 * k3c + _E4 * k4c + _E5 * k5c + _E6 * k6c + _E7 * k7c)
        ed = h * (_E1 * k1d + _E3 * k3d + _E4 * k4d + _E5 * k5d + _E6 * k6d + _E7 * k7d)
        sa = atol + rtol * max(abs(a), abs(na))
        sb = atol + rtol * max(abs(b), abs(nb))
        sc = atol + rtol * max(abs(c), abs(nc))
        sd = atol + rtol * max(abs(d), abs(nd))
        err = math.sqrt(
            ((ea / sa) ** 2 + (eb / sb) ** 2 + (ec / sc) ** 2 + (ed / sd) ** 2) / 4.0
        )

        if err <= 1.0 or force:
            while io < n_out and t_out[io] <= t_new:
                th = (t_out[io] - t) / h
                th2 = th * th
                th3 = th2 * th
                th4 = th3 * th
                w1 = _P1[0] * th + _P1[1] * th2 + _P1[2] * th3 + _P1[3] * th4
                w3 = _P3[1] * th2 + _P3[2] * th3 + _P3[3] * th4
                w4 = _P4[1] * th2 + _P4[2] * th3 + _P4[3] * th4
                w5 = _P5[1] * th2 + _P5[2] * th3 + _P5[3] * th4
                w6 = _P6[1] * th2 + _P6[2] * th3 + _P6[3] * th4
                w7 = _P7[1] * th2 + _P7[2] * th3 + _P7[3] * th4
                out[io, 0] = a + h * (w1 * k1a + w3 * k3a + w4 * k4a + w5 * k5a + w6 * k6a + w7 * k7a)
                out[io, 1] = b + h * (w1 * k1b + w3 * k3b + w4 * k4b + w5 * k5b + w6 * k6b + w7 * k7b)
                out[io, 2] = c + h * (w1 * k1c + w3 * k3c + w4 * k4c + w5 * k5c + w6 * k6c + w7 * k7c)
                out[io, 3] = d + h * (w1 * k1d + w3 * k3d + w4 * k4d + w5 * k5d + w6 * k6d + w7 * k7d)
                io += 1
            t = t_new
            a, b, c, d = na, nb, nc, nd
            k1a, k1b, k1c, k1d = k7a, k7b, k7c, k7d  # first-same-as-last
            h *= min(_MAX_FACTOR, _SAFETY * err ** -0.2) if err > 0.0 else _MAX_FACTOR
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            if h < min_step:
                raise IntegrationError(f"step size underflow at t = {t!r}", t)

    return (a, b, c, d), io, nfev


def solve_sector(
    lam: Callable[[float], float],
    g: float,
    t_out: np.ndarray,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    breakpoints: Sequence[float] = (),
) -> tuple[np.ndarray, int]:
    """Propagate (C_e, C_g) = (1, 0) across t_out, restarting at breakpoints.

    Parameters
    ----------
    lam : coupling evaluated at a scalar time
    g : sector scaling sqrt(n + 1)
    t_out : sorted sample times; t_out[0] is the initial time
    breakpoints : interior times where the coupling is allowed to jump

    Returns
    -------
    out : array (len(t_out), 4) of (Re C_e, Im C_e, Re C_g, Im C_g)
    nfev : number of coupling evaluations
    """
    t_out = np.asarray(t_out, dtype=float)
    t0, t1 = float(t_out[0]), float(t_out[-1])
    span = t1 - t0
    if span <= 0.0:
        raise ValueError("t_out must span a positive interval")
    min_step = MIN_STEP_FRACTION * span

    inner = [float(b) for b in np.sort(np.asarray(breakpoints, dtype=float)) if t0 < b < t1]
    edges = [t0, *inner, t1]

    out = np.empty((len(t_out), 4))
    out[0] = (1.0, 0.0, 0.0, 0.0)
    io = int(np.searchsorted(t_out, t0, side="right"))

    y = (1.0, 0.0, 0.0, 0.0)
    nfev = 0
    for a, b in zip(edges[:-1], edges[1:]):
        y, io, ev = _segment(lam, g, a, b, y, t_out, out, io, rtol, atol, min_step)
        nfev += ev
    return out, nfev
