"""Pure-Python stepping kernel.

Fallback used when the compiled extension is unavailable. The arithmetic here
(expression shapes, evaluation order, constants) mirrors ``_kernel_c.pyx``
line for line so both backends produce bit-identical trajectories; any change
must be made in both files.
"""
from __future__ import annotations

from math import fabs, isfinite, sqrt

# Fehlberg 4(5) tableau.
A21 = 1.0 / 4.0
A31 = 3.0 / 32.0
A32 = 9.0 / 32.0
A41 = 1932.0 / 2197.0
A42 = -7200.0 / 2197.0
A43 = 7296.0 / 2197.0
A51 = 439.0 / 216.0
A52 = -8.0
A53 = 3680.0 / 513.0
A54 = -845.0 / 4104.0
A61 = -8.0 / 27.0
A62 = 2.0
A63 = -3544.0 / 2565.0
A64 = 1859.0 / 4104.0
A65 = -11.0 / 40.0
# Fifth-order solution weights (the propagated solution) and the coefficients
# of the embedded fourth/fifth-order difference used as the error estimate.
B1 = 16.0 / 135.0
B3 = 6656.0 / 12825.0
B4 = 28561.0 / 56430.0
B5 = -9.0 / 50.0
B6 = 2.0 / 55.0
E1 = 1.0 / 360.0
E3 = -128.0 / 4275.0
E4 = -2197.0 / 75240.0
E5 = 1.0 / 50.0
E6 = 2.0 / 55.0

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
ORDER_EXPONENT = -0.2  # 1/(order+1) for the 4th-order error estimate
H_INIT = 1e-2
H_MIN = 1e-12

STATUS_OK = 0
STATUS_STEP_BUDGET = 1
STATUS_NON_FINITE = 2


def _rk4_step(lam, mu, k, delta, p, c, h, yT, yI, yV):
    """One classical fixed RK4 step of size h. Returns the new state."""
    f = k * yT * yV
    k1T = lam - mu * yT - f
    k1I = f - delta * yI
    k1V = p * yI - c * yV

    sT = yT + 0.5 * h * k1T
    sI = yI + 0.5 * h * k1I
    sV = yV + 0.5 * h * k1V
    f = k * sT * sV
    k2T = lam - mu * sT - f
    k2I = f - delta * sI
    k2V = p * sI - c * sV

    sT = yT + 0.5 * h * k2T
    sI = yI + 0.5 * h * k2I
    sV = yV + 0.5 * h * k2V
    f = k * sT * sV
    k3T = lam - mu * sT - f
    k3I = f - delta * sI
    k3V = p * sI - c * sV

    sT = yT + h * k3T
    sI = yI + h * k3I
    sV = yV + h * k3V
    f = k * sT * sV
    k4T = lam - mu * sT - f
    k4I = f - delta * sI
    k4V = p * sI - c * sV

    nT = yT + h / 6.0 * (k1T + 2.0 * (k2T + k3T) + k4T)
    nI = yI + h / 6.0 * (k1I + 2.0 * (k2I + k3I) + k4I)
    nV = yV + h / 6.0 * (k1V + 2.0 * (k2V + k3V) + k4V)
    return nT, nI, nV


def _rkf45_step(lam, mu, k, delta, p, c, h, yT, yI, yV):
    """One embedded Fehlberg step. Returns the 5th-order state and error."""
    f = k * yT * yV
    k1T = lam - mu * yT - f
    k1I = f - delta * yI
    k1V = p * yI - c * yV

    sT = yT + h * (A21 * k1T)
    sI = yI + h * (A21 * k1I)
    sV = yV + h * (A21 * k1V)
    f = k * sT * sV
    k2T = lam - mu * sT - f
    k2I = f - delta * sI
    k2V = p * sI - c * sV

    sT = yT + h * (A31 * k1T + A32 * k2T)
    sI = yI + h * (A31 * k1I + A32 * k2I)
    sV = yV + h * (A31 * k1V + A32 * k2V)
    f = k * sT * sV
    k3T = lam - mu * sT - f
    k3I = f - delta * sI
    k3V = p * sI - c * sV

    sT = yT + h * (A41 * k1T + A42 * k2T + A43 * k3T)
    sI = yI + h * (A41 * k1I + A42 * k2I + A43 * k3I)
    sV = yV + h * (A41 * k1V + A42 * k2V + A43 * k3V)
    f = k * sT * sV
    k4T = lam - mu * sT - f
    k4I = f - delta * sI
    k4V = p * sI - c * sV

    sT = yT + h * (A51 * k1T + A52 * k2T + A53 * k3T + A54 * k4T)
    sI = yI + h * (A51 * k1I + A52 * k2I + A53 * k3I + A54 * k4I)
    sV = yV + h * (A51 * k1V + A52 * k2V + A53 * k3V + A54 * k4V)
    f = k * sT * sV
    k5T = lam - mu * sT - f
    k5I = f - delta * sI
    k5V = p * sI - c * sV

    sT = yT + h * (A61 * k1T + A62 * k2T + A63 * k3T + A64 * k4T + A65 * k5T)
    sI = yI + h * (A61 * k1I + A62 * k2I + A63 * k3I + A64 * k4I + A65 * k5I)
    sV = yV + h * (A61 * k1V + A62 * k2V + A63 * k3V + A64 * k4V + A65 * k5V)
    f = k * sT * sV
    k6T = lam - mu * sT - f
    k6I = f - delta * sI
    k6V = p * sI - c * sV

    nT = yT + h * (B1 * k1T + B3 * k3T + B4 * k4T + B5 * k5T + B6 * k6T)
    nI = yI + h * (B1 * k1I + B3 * k3I + B4 * k4I + B5 * k5I + B6 * k6I)
    nV = yV + h * (B1 * k1V + B3 * k3V + B4 * k4V + B5 * k5V + B6 * k6V)
    eT = h * (E1 * k1T + E3 * k3T + E4 * k4T + E5 * k5T + E6 * k6T)
    eI = h * (E1 * k1I + E3 * k3I + E4 * k4I + E5 * k5I + E6 * k6I)
    eV = h * (E1 * k1V + E3 * k3V + E4 * k4V + E5 * k5V + E6 * k6V)
    return nT, nI, nV, eT, eI, eV


def integrate_fixed(
    lam, mu, k, delta, p, c, yT, yI, yV, t_end, dt, max_steps, record_stride
):
    """Integrate to t_end with fixed RK4 steps of size dt.

    The final step is shortened so the last sample lands exactly on t_end.
    Returns (status, t_reached, T, I, V, rec_t, rec_y); rec_y holds
    (T, I, V) tuples, one per recorded sample, empty when record_stride == 0.
    """
    n_exact = t_end / dt
    rec_t = []
    rec_y = []
    if record_stride > 0:
        rec_t.append(0.0)
        rec_y.append((yT, yI, yV))
    # Beyond any countable budget (and beyond exact 64-bit step indices).
    if n_exact > 4.0e18:
        return STATUS_STEP_BUDGET, 0.0, yT, yI, yV, rec_t, rec_y
    n_full = int(n_exact)
    # A trailing fraction below 1e-9 steps is treated as roundoff, not as an
    # extra step.
    n_steps = n_full + 1 if n_exact - n_full > 1e-9 else n_full
    if n_steps == 0:
        n_steps = 1
    if n_steps > max_steps:
        return STATUS_STEP_BUDGET, 0.0, yT, yI, yV, rec_t, rec_y
    for i in range(n_steps):
        final = i == n_steps - 1
        h = t_end - i * dt if final else dt
        nT, nI, nV = _rk4_step(lam, mu, k, delta, p, c, h, yT, yI, yV)
        if not (isfinite(nT) and isfinite(nI) and isfinite(nV)):
            return STATUS_NON_FINITE, i * dt, yT, yI, yV, rec_t, rec_y
        yT, yI, yV = nT, nI, nV
        t = t_end if final else (i + 1) * dt
        if record_stride > 0 and ((i + 1) % record_stride == 0 or final):
            rec_t.append(t)
            rec_y.append((yT, yI, yV))
    return STATUS_OK, t_end, yT, yI, yV, rec_t, rec_y


def integrate_adaptive(
    lam, mu, k, delta, p, c, yT, yI, yV, t_end, rel_tol, abs_tol, max_steps, record_stride
):
    """Integrate to t_end with adaptive Fehlberg 4(5) steps.

    Step acceptance uses the weighted RMS error norm against the mixed
    tolerance abs_tol + rel_tol*max(|y_old|, |y_new|) per component; a step
    is accepted when the norm is <= 1. Both accepted and rejected attempts
    count against max_steps. Return shape matches integrate_fixed.
    """
    t = 0.0
    h = H_INIT if H_INIT < t_end else t_end
    rec_t = []
    rec_y = []
    if record_stride > 0:
        rec_t.append(0.0)
        rec_y.append((yT, yI, yV))
    attempts = 0
    accepted = 0
    while t < t_end:
        if attempts >= max_steps:
            return STATUS_STEP_BUDGET, t, yT, yI, yV, rec_t, rec_y
        attempts += 1
        final = h >= t_end - t
        h_try = t_end - t if final else h
        nT, nI, nV, eT, eI, eV = _rkf45_step(lam, mu, k, delta, p, c, h_try, yT, yI, yV)
        if not (
            isfinite(nT)
            and isfinite(nI)
            and isfinite(nV)
            and isfinite(eT)
            and isfinite(eI)
            and isfinite(eV)
        ):
            # Overflowed mid-step: retry with the strongest shrink.
            h = h_try * MIN_FACTOR
            if h < H_MIN:
                return STATUS_NON_FINITE, t, yT, yI, yV, rec_t, rec_y
            continue
        wT = eT / (abs_tol + rel_tol * max(fabs(yT), fabs(nT)))
        wI = eI / (abs_tol + rel_tol * max(fabs(yI), fabs(nI)))
        wV = eV / (abs_tol + rel_tol * max(fabs(yV), fabs(nV)))
        norm = sqrt((wT * wT + wI * wI + wV * wV) / 3.0)
        if norm <= 1.0:
            t = t_end if final else t + h_try
            yT, yI, yV = nT, nI, nV
            accepted += 1
            if record_stride > 0 and (accepted % record_stride == 0 or t == t_end):
                rec_t.append(t)
                rec_y.append((yT, yI, yV))
            if norm == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * norm**ORDER_EXPONENT
                if factor > MAX_FACTOR:
                    factor = MAX_FACTOR
                elif factor < MIN_FACTOR:
                    factor = MIN_FACTOR
            h = h_try * factor
        else:
            factor = SAFETY * norm**ORDER_EXPONENT
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h = h_try * factor
    return STATUS_OK, t, yT, yI, yV, rec_t, rec_y
