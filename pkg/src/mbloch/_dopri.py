"""Dormand-Prince 5(4) integrator with PI step control and dense output.

The right-hand side is passed as a first-class function ``rhs(t, y, args)``
returning a new float64 array; ``args`` is forwarded untouched, so any
numba-typable parameter bundle (array, tuple of arrays) works.
"""
import numpy as np

from ._jit import kernel

C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0

A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    -71.0 / 57600.0, 71.0 / 16695.0, -71.0 / 1920.0, 17253.0 / 339200.0, -22.0 / 525.0, 1.0 / 40.0)

# dense-output polynomial coefficients, rows = stages, columns = theta**1..theta**4
DENSE = np.array([
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
])

OK, MAX_STEPS, STEP_UNDERFLOW, NONFINITE = 0, 1, 2, 3

SAFE = 0.9
BETA = 0.04
EXPO1 = 0.2 - 0.75 * BETA
FAC_MIN = 0.2   # largest allowed growth is 1/FAC_MIN
FAC_MAX = 10.0  # largest allowed shrink is FAC_MAX


@kernel
def _rms(v, scale):
    s = 0.0
    for i in range(v.shape[0]):
        q = v[i] / scale[i]
        s += q * q
    return np.sqrt(s / v.shape[0])


@kernel
def initial_step(rhs, t0, y0, f0, args, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0, scale)
    d1 = _rms(f0, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    f1 = rhs(t0 + h0, y0 + h0 * f0, args)
    d2 = _rms(f1 - f0, scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


@kernel
def dopri5(rhs, y0, t0, t_end, t_eval, args, rtol, atol, h_init, max_steps):
    """Integrate from ``t0`` to ``t_end``; sample at sorted ``t_eval``.

    Returns ``(samples, status, t_last, y_last, h_next, n_steps)``. Samples
    that were not reached are NaN.
    """
    n = y0.shape[0]
    n_eval = t_eval.shape[0]
    out = np.full((n_eval, n), np.nan)
    k = np.empty((7, n))
    y = y0.copy()
    t = t0
    f = rhs(t, y, args)

    ie = 0
    while ie < n_eval and t_eval[ie] <= t0:
        out[ie, :] = y
        ie += 1

    if h_init > 0.0:
        h = h_init
    else:
        h = initial_step(rhs, t0, y, f, args, rtol, atol)

    err_old = 1e-4
    rejected = False
    status = OK
    n_steps = 0
    while t < t_end:
        if n_steps >= max_steps:
            status = MAX_STEPS
            break
        last = False
        if t + h >= t_end or t_end - (t + h) < 1e-12 * abs(t_end):
            h = t_end - t
            last = True
        if h <= 10.0 * np.spacing(max(abs(t), abs(t_end), 1e-300)):
            status = STEP_UNDERFLOW
            break

        k[0, :] = f
        k[1, :] = rhs(t + C2 * h, y + h * (A21 * k[0]), args)
        k[2, :] = rhs(t + C3 * h, y + h * (A31 * k[0] + A32 * k[1]), args)
        k[3, :] = rhs(t + C4 * h, y + h * (A41 * k[0] + A42 * k[1] + A43 * k[2]), args)
        k[4, :] = rhs(t + C5 * h, y + h * (A51 * k[0] + A52 * k[1] + A53 * k[2]
                                           + A54 * k[3]), args)
        k[5, :] = rhs(t + h, y + h * (A61 * k[0] + A62 * k[1] + A63 * k[2]
                                      + A64 * k[3] + A65 * k[4]), args)
        y_new = y + h * (B1 * k[0] + B3 * k[2] + B4 * k[3] + B5 * k[4] + B6 * k[5])
        t_new = t_end if last else t + h
        k[6, :] = rhs(t_new, y_new, args)
        err = h * (E1 * k[0] + E3 * k[2] + E4 * k[3] + E5 * k[4] + E6 * k[5] + E7 * k[6])
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = _rms(err, scale)
        n_steps += 1

        if not np.isfinite(en):
            h *= FAC_MIN
            rejected = True
            continue

        fac11 = en ** EXPO1
        if en <= 1.0:
            fac = fac11 / err_old ** BETA
            fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
            h_new = h / fac
            if rejected:
                h_new = min(h_new, h)
            err_old = max(en, 1e-4)

            while ie < n_eval and t_eval[ie] <= t_new:
                theta = (t_eval[ie] - t) / h
                for s in range(7):
                    bs = theta * (DENSE[s, 0] + theta * (DENSE[s, 1] + theta * (
                        DENSE[s, 2] + theta * DENSE[s, 3])))
                    if s == 0:
                        out[ie, :] = y + h * bs * k[0]
                    elif bs != 0.0:
                        out[ie, :] += h * bs * k[s]
                ie += 1

            t = t_new
            y = y_new
            f = k[6].copy()
            h = h_new
            rejected = False
            if not np.all(np.isfinite(y)):
                status = NONFINITE
                break
        else:
            h = h / min(1.0 / FAC_MIN, fac11 / SAFE)
            rejected = True

    return out, status, t, y, h, n_steps
