"""Compiled stepping kernels for the adaptive and fixed-step integrators.

Everything here is numba-jitted and deliberately dumb: polynomial Horner
evaluation of the flavor's vector field plus the stepping loop, no objects.
The Python driver in dynamics.py owns buffers, event detection, and logs.

Flavor codes: 0 = MFQM, 1 = CCM, 2 = ClassicalReal.
Status codes: 0 = reached t1, 1 = escaped, 2 = step underflow / no
convergence, 3 = buffer full (caller resumes).
"""

import numpy as np
from numba import njit

STATUS_DONE = 0
STATUS_ESCAPED = 1
STATUS_UNDERFLOW = 2
STATUS_BUFFER_FULL = 3

# Dormand-Prince 5(4) tableau. B5 propagates; ERR = b5 - b4 estimates.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


@njit(cache=True)
def _rhs(flavor, dv, m, X, out):
    """Vector field into out. dv holds the coefficients of V'."""
    x, y, p, q = X[0], X[1], X[2], X[3]
    if flavor == 0:
        u = x + y
        w = x - y
        vpu = 0.0
        vpw = 0.0
        for i in range(len(dv) - 1, -1, -1):
            vpu = vpu * u + dv[i]
            vpw = vpw * w + dv[i]
        out[0] = p / m
        out[1] = q / m
        out[2] = -0.5 * (vpu + vpw)
        out[3] = -0.5 * (vpu - vpw)
    elif flavor == 1:
        z = complex(x, y)
        acc = complex(0.0, 0.0)
        for i in range(len(dv) - 1, -1, -1):
            acc = acc * z + dv[i]
        out[0] = p / m
        out[1] = -q / m
        out[2] = -acc.real
        out[3] = acc.imag
    else:
        vp = 0.0
        for i in range(len(dv) - 1, -1, -1):
            vp = vp * x + dv[i]
        out[0] = p / m
        out[1] = 0.0
        out[2] = -vp
        out[3] = 0.0


@njit(cache=True)
def dp45_drive(flavor, dv, m, X, f0, t0, t1, h0, rtol, atol, hmax, hmin, rmax,
               ts, xs, fs):
    """Advance from (t0, X) toward t1, writing accepted nodes into the buffers.

    X and f0 are modified in place to the final state and its derivative so
    the caller can resume after STATUS_BUFFER_FULL. Returns
    (n_written, status, t_final, h_next).
    """
    cap = ts.shape[0]
    n = 0
    t = t0
    s = 1.0 if t1 > t0 else -1.0
    h = h0
    k1 = f0
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    k5 = np.empty(4)
    k6 = np.empty(4)
    k7 = np.empty(4)
    ytmp = np.empty(4)
    y5 = np.empty(4)
    while True:
        if s * (t - t1) >= 0.0:
            return n, STATUS_DONE, t, h
        clamped = False
        if s * (t + h - t1) > 0.0:
            h = t1 - t
            clamped = True
        for i in range(4):
            ytmp[i] = X[i] + h * _A21 * k1[i]
        _rhs(flavor, dv, m, ytmp, k2)
        for i in range(4):
            ytmp[i] = X[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(flavor, dv, m, ytmp, k3)
        for i in range(4):
            ytmp[i] = X[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(flavor, dv, m, ytmp, k4)
        for i in range(4):
            ytmp[i] = X[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        _rhs(flavor, dv, m, ytmp, k5)
        for i in range(4):
            ytmp[i] = X[i] + h * (
                _A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i]
            )
        _rhs(flavor, dv, m, ytmp, k6)
        for i in range(4):
            y5[i] = X[i] + h * (
                _B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i]
            )
        _rhs(flavor, dv, m, y5, k7)

        finite = True
        for i in range(4):
            if not np.isfinite(y5[i]) or not np.isfinite(k7[i]):
                finite = False
                break
        if not finite:
            h *= 0.5
            if abs(h) < hmin:
                return n, STATUS_UNDERFLOW, t, h
            continue

        errsq = 0.0
        for i in range(4):
            sc = atol + rtol * max(abs(X[i]), abs(y5[i]))
            ei = h * (
                _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
            )
            r = ei / sc
            errsq += r * r
        err = np.sqrt(errsq / 4.0)

        if err > 1.0:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
            if abs(h) < hmin:
                return n, STATUS_UNDERFLOW, t, h
            continue

        # accepted
        t = t1 if clamped else t + h
        for i in range(4):
            X[i] = y5[i]
            k1[i] = k7[i]
        ts[n] = t
        for i in range(4):
            xs[n, i] = X[i]
            fs[n, i] = k1[i]
        n += 1

        amax = 0.0
        for i in range(4):
            a = abs(X[i])
            if a > amax:
                amax = a
        if amax >= rmax:
            return n, STATUS_ESCAPED, t, h

        if err > 1e-30:
            fac = 0.9 * err ** -0.2
        else:
            fac = 5.0
        if fac > 5.0:
            fac = 5.0
        elif fac < 0.2:
            fac = 0.2
        h *= fac
        if abs(h) > hmax:
            h = s * hmax
        if abs(h) < hmin:
            return n, STATUS_UNDERFLOW, t, h
        if n >= cap:
            return n, STATUS_BUFFER_FULL, t, h


@njit(cache=True)
def midpoint_drive(flavor, dv, m, X, t0, h, n_steps, stride, rmax, ts, xs):
    """Implicit midpoint with fixed step h; stores every stride-th node.

    The implicit stage is solved by fixed-point iteration (the flows here are
    smooth and h is small). Returns (n_written, status, t_final). X is updated
    in place.
    """
    n = 0
    t = t0
    f = np.empty(4)
    xm = np.empty(4)
    xm_new = np.empty(4)
    for step in range(n_steps):
        _rhs(flavor, dv, m, X, f)
        for i in range(4):
            xm[i] = X[i] + 0.5 * h * f[i]
        converged = False
        for _ in range(50):
            _rhs(flavor, dv, m, xm, f)
            delta = 0.0
            for i in range(4):
                xm_new[i] = X[i] + 0.5 * h * f[i]
                r = abs(xm_new[i] - xm[i]) / (1.0 + abs(xm_new[i]))
                if r > delta:
                    delta = r
                xm[i] = xm_new[i]
            if delta < 1e-14:
                converged = True
                break
        if not converged:
            return n, STATUS_UNDERFLOW, t
        for i in range(4):
            X[i] = 2.0 * xm[i] - X[i]
        t = t0 + (step + 1) * h
        if (step + 1) % stride == 0 or step == n_steps - 1:
            ts[n] = t
            for i in range(4):
                xs[n, i] = X[i]
            n += 1
        amax = 0.0
        for i in range(4):
            a = abs(X[i])
            if a > amax:
                amax = a
        if amax >= rmax:
            if (step + 1) % stride != 0 and step != n_steps - 1:
                ts[n] = t
                for i in range(4):
                    xs[n, i] = X[i]
                n += 1
            return n, STATUS_ESCAPED, t
    return n, STATUS_DONE, t
