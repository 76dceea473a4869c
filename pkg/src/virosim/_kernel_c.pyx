# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernel.

The arithmetic here (expression shapes, evaluation order, constants) mirrors
``_kernel_py.py`` line for line so both backends produce bit-identical
trajectories; any change must be made in both files. The extension is built
with -ffp-contract=off for the same reason.
"""

from libc.math cimport fabs, fmax, isfinite, pow, sqrt

# Fehlberg 4(5) tableau.
cdef double A21 = 1.0 / 4.0
cdef double A31 = 3.0 / 32.0
cdef double A32 = 9.0 / 32.0
cdef double A41 = 1932.0 / 2197.0
cdef double A42 = -7200.0 / 2197.0
cdef double A43 = 7296.0 / 2197.0
cdef double A51 = 439.0 / 216.0
cdef double A52 = -8.0
cdef double A53 = 3680.0 / 513.0
cdef double A54 = -845.0 / 4104.0
cdef double A61 = -8.0 / 27.0
cdef double A62 = 2.0
cdef double A63 = -3544.0 / 2565.0
cdef double A64 = 1859.0 / 4104.0
cdef double A65 = -11.0 / 40.0
cdef double B1 = 16.0 / 135.0
cdef double B3 = 6656.0 / 12825.0
cdef double B4 = 28561.0 / 56430.0
cdef double B5 = -9.0 / 50.0
cdef double B6 = 2.0 / 55.0
cdef double E1 = 1.0 / 360.0
cdef double E3 = -128.0 / 4275.0
cdef double E4 = -2197.0 / 75240.0
cdef double E5 = 1.0 / 50.0
cdef double E6 = 2.0 / 55.0

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0
cdef double ORDER_EXPONENT = -0.2
cdef double H_INIT = 1e-2
cdef double H_MIN = 1e-12

STATUS_OK = 0
STATUS_STEP_BUDGET = 1
STATUS_NON_FINITE = 2


cdef inline void _rk4_step(double lam, double mu, double k, double delta,
                           double p, double c, double h,
                           double yT, double yI, double yV,
                           double* oT, double* oI, double* oV) noexcept nogil:
    cdef double f, sT, sI, sV
    cdef double k1T, k1I, k1V, k2T, k2I, k2V, k3T, k3I, k3V, k4T, k4I, k4V

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

    oT[0] = yT + h / 6.0 * (k1T + 2.0 * (k2T + k3T) + k4T)
    oI[0] = yI + h / 6.0 * (k1I + 2.0 * (k2I + k3I) + k4I)
    oV[0] = yV + h / 6.0 * (k1V + 2.0 * (k2V + k3V) + k4V)


cdef inline void _rkf45_step(double lam, double mu, double k, double delta,
                             double p, double c, double h,
                             double yT, double yI, double yV,
                             double* oT, double* oI, double* oV,
                             double* eT, double* eI, double* eV) noexcept nogil:
    cdef double f, sT, sI, sV
    cdef double k1T, k1I, k1V, k2T, k2I, k2V, k3T, k3I, k3V
    cdef double k4T, k4I, k4V, k5T, k5I, k5V, k6T, k6I, k6V

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

    oT[0] = yT + h * (B1 * k1T + B3 * k3T + B4 * k4T + B5 * k5T + B6 * k6T)
    oI[0] = yI + h * (B1 * k1I + B3 * k3I + B4 * k4I + B5 * k5I + B6 * k6I)
    oV[0] = yV + h * (B1 * k1V + B3 * k3V + B4 * k4V + B5 * k5V + B6 * k6V)
    eT[0] = h * (E1 * k1T + E3 * k3T + E4 * k4T + E5 * k5T + E6 * k6T)
    eI[0] = h * (E1 * k1I + E3 * k3I + E4 * k4I + E5 * k5I + E6 * k6I)
    eV[0] = h * (E1 * k1V + E3 * k3V + E4 * k4V + E5 * k5V + E6 * k6V)


def integrate_fixed(double lam, double mu, double k, double delta, double p,
                    double c, double yT, double yI, double yV, double t_end,
                    double dt, long max_steps, long record_stride):
    """Fixed-step RK4 drive loop; see the Python twin for semantics."""
    cdef double n_exact = t_end / dt
    cdef long n_full, n_steps, i
    cdef bint final
    cdef double h, t
    cdef double nT = 0.0, nI = 0.0, nV = 0.0

    rec_t = []
    rec_y = []
    if record_stride > 0:
        rec_t.append(0.0)
        rec_y.append((yT, yI, yV))
    if n_exact > 4.0e18:
        return STATUS_STEP_BUDGET, 0.0, yT, yI, yV, rec_t, rec_y
    n_full = <long> n_exact
    n_steps = n_full + 1 if n_exact - n_full > 1e-9 else n_full
    if n_steps == 0:
        n_steps = 1
    if n_steps > max_steps:
        return STATUS_STEP_BUDGET, 0.0, yT, yI, yV, rec_t, rec_y
    for i in range(n_steps):
        final = i == n_steps - 1
        h = t_end - i * dt if final else dt
        _rk4_step(lam, mu, k, delta, p, c, h, yT, yI, yV, &nT, &nI, &nV)
        if not (isfinite(nT) and isfinite(nI) and isfinite(nV)):
            return STATUS_NON_FINITE, i * dt, yT, yI, yV, rec_t, rec_y
        yT, yI, yV = nT, nI, nV
        t = t_end if final else (i + 1) * dt
        if record_stride > 0 and ((i + 1) % record_stride == 0 or final):
            rec_t.append(t)
            rec_y.append((yT, yI, yV))
    return STATUS_OK, t_end, yT, yI, yV, rec_t, rec_y


def integrate_adaptive(double lam, double mu, double k, double delta, double p,
                       double c, double yT, double yI, double yV, double t_end,
                       double rel_tol, double abs_tol, long max_steps,
                       long record_stride):
    """Adaptive Fehlberg 4(5) drive loop; see the Python twin for semantics."""
    cdef double t = 0.0
    cdef double h = H_INIT if H_INIT < t_end else t_end
    cdef long attempts = 0
    cdef long accepted = 0
    cdef bint final
    cdef double h_try, wT, wI, wV, norm, factor
    cdef double nT = 0.0, nI = 0.0, nV = 0.0
    cdef double eT = 0.0, eI = 0.0, eV = 0.0

    rec_t = []
    rec_y = []
    if record_stride > 0:
        rec_t.append(0.0)
        rec_y.append((yT, yI, yV))
    while t < t_end:
        if attempts >= max_steps:
            return STATUS_STEP_BUDGET, t, yT, yI, yV, rec_t, rec_y
        attempts += 1
        final = h >= t_end - t
        h_try = t_end - t if final else h
        _rkf45_step(lam, mu, k, delta, p, c, h_try, yT, yI, yV,
                    &nT, &nI, &nV, &eT, &eI, &eV)
        if not (isfinite(nT) and isfinite(nI) and isfinite(nV)
                and isfinite(eT) and isfinite(eI) and isfinite(eV)):
            h = h_try * MIN_FACTOR
            if h < H_MIN:
                return STATUS_NON_FINITE, t, yT, yI, yV, rec_t, rec_y
            continue
        wT = eT / (abs_tol + rel_tol * fmax(fabs(yT), fabs(nT)))
        wI = eI / (abs_tol + rel_tol * fmax(fabs(yI), fabs(nI)))
        wV = eV / (abs_tol + rel_tol * fmax(fabs(yV), fabs(nV)))
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
                factor = SAFETY * pow(norm, ORDER_EXPONENT)
                if factor > MAX_FACTOR:
                    factor = MAX_FACTOR
                elif factor < MIN_FACTOR:
                    factor = MIN_FACTOR
            h = h_try * factor
        else:
            factor = SAFETY * pow(norm, ORDER_EXPONENT)
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h = h_try * factor
    return STATUS_OK, t, yT, yI, yV, rec_t, rec_y
