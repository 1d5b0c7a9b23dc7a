# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled propagation of the stabilized invariant-imbedding system.

Hot kernel of the two-channel scattering solver: an embedded Dormand-Prince
5(4) integrator over the stacked 2x2 complex (S, T) state, with the
Gaussian-sum coupling evaluated inline.  Semantics are identical to the
pure-Python twin :mod:`asymscat._imbed_py`, which documents the contract.
The integration loop releases the GIL so velocity sweeps can thread.
"""

from libc.math cimport exp, sqrt


cdef double C2 = 1.0 / 5.0
cdef double C3 = 3.0 / 10.0
cdef double C4 = 4.0 / 5.0
cdef double C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 35.0 / 384.0 - 5179.0 / 57600.0
cdef double E3 = 500.0 / 1113.0 - 7571.0 / 16695.0
cdef double E4 = 125.0 / 192.0 - 393.0 / 640.0
cdef double E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0
cdef double E6 = 11.0 / 84.0 - 187.0 / 2100.0
cdef double E7 = -1.0 / 40.0

cdef double MIN_STEP = 1e-14


cdef inline void _rhs(double eta,
                      double complex* y,
                      double complex qk, double complex q2,
                      double complex vk, double complex v2,
                      double complex* amps, double* centers, double* widths,
                      Py_ssize_t nterms,
                      double complex* out) noexcept nogil:
    cdef double complex om = 0
    cdef double complex v12, v21, m11, m12, m21, m22
    cdef double z
    cdef Py_ssize_t j
    for j in range(nterms):
        z = (eta - centers[j]) / widths[j]
        om = om + amps[j] * exp(-z * z)
    v12 = vk * om
    v21 = v2 * om.conjugate()

    m11 = qk + v12 * y[2]
    m12 = v12 * y[3]
    m21 = v21 * y[0]
    m22 = q2 + v21 * y[1]
    out[0] = -2.0 * qk + qk * y[0] + y[0] * m11 + y[1] * m21
    out[1] = qk * y[1] + y[0] * m12 + y[1] * m22
    out[2] = q2 * y[2] + y[2] * m11 + y[3] * m21
    out[3] = -2.0 * q2 + q2 * y[3] + y[2] * m12 + y[3] * m22
    out[4] = y[4] * m11 + y[5] * m21
    out[5] = y[4] * m12 + y[5] * m22
    out[6] = y[6] * m11 + y[7] * m21
    out[7] = y[6] * m12 + y[7] * m22


cdef inline double _error_norm(double complex* err, double complex* y,
                               double complex* ynew, double rtol, double atol) noexcept nogil:
    cdef double acc = 0.0, ay, an, sc, q
    cdef int i
    for i in range(8):
        ay = abs(y[i])
        an = abs(ynew[i])
        sc = atol + rtol * (ay if ay > an else an)
        q = abs(err[i]) / sc
        acc += q * q
    return sqrt(acc / 8.0)


def propagate_stabilized(double kbar,
                         double complex kappa2,
                         double complex[::1] amps,
                         double[::1] centers,
                         double[::1] widths,
                         double rtol=1e-9,
                         double atol=1e-12,
                         double s_limit=1e8,
                         long max_steps=10_000_000):
    """Integrate the stabilized (S, T) equations over eta in [0, 1].

    See :func:`asymscat._imbed_py.propagate_stabilized` for the contract.
    """
    cdef Py_ssize_t nterms = amps.shape[0]
    cdef double complex* pa = &amps[0] if nterms > 0 else NULL
    cdef double* pc = &centers[0] if nterms > 0 else NULL
    cdef double* pw = &widths[0] if nterms > 0 else NULL

    cdef double complex qk = 1j * kbar
    cdef double complex q2 = 1j * kappa2
    cdef double complex vk = -0.5j / kbar
    cdef double complex v2 = -0.5j / kappa2

    cdef double complex y[8]
    cdef double complex ynew[8]
    cdef double complex ytmp[8]
    cdef double complex f[8]
    cdef double complex k2[8]
    cdef double complex k3[8]
    cdef double complex k4[8]
    cdef double complex k5[8]
    cdef double complex k6[8]
    cdef double complex k7[8]
    cdef double complex errv[8]

    cdef int i
    for i in range(8):
        y[i] = 0
    y[0] = 1; y[3] = 1; y[4] = 1; y[7] = 1

    cdef double eta = 0.0, h, enorm, factor, smax, a
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, dm, h1, sc, q
    cdef long n_steps = 0, n_rhs = 0
    cdef int status = 0
    cdef bint rejected = False

    with nogil:
        _rhs(eta, y, qk, q2, vk, v2, pa, pc, pw, nterms, f)
        n_rhs += 1

        # starting step a la Hairer/Norsett/Wanner
        for i in range(8):
            sc = atol + rtol * abs(y[i])
            q = abs(y[i]) / sc
            d0 += q * q
            q = abs(f[i]) / sc
            d1 += q * q
        d0 = sqrt(d0 / 8.0)
        d1 = sqrt(d1 / 8.0)
        h = 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6
        for i in range(8):
            ytmp[i] = y[i] + h * f[i]
        _rhs(eta + h, ytmp, qk, q2, vk, v2, pa, pc, pw, nterms, k2)
        n_rhs += 1
        for i in range(8):
            sc = atol + rtol * abs(y[i])
            q = abs(k2[i] - f[i]) / sc
            d2 += q * q
        d2 = sqrt(d2 / 8.0) / h
        dm = d1 if d1 > d2 else d2
        h1 = (0.01 / dm) ** 0.2 if dm > 1e-15 else (1e-6 if 1e-6 > h * 1e-3 else h * 1e-3)
        h = min(100.0 * h, h1, 1.0)

        while eta < 1.0:
            if h > 1.0 - eta:
                h = 1.0 - eta
            if h < MIN_STEP:
                status = 2
                break

            for i in range(8):
                ytmp[i] = y[i] + h * (A21 * f[i])
            _rhs(eta + C2 * h, ytmp, qk, q2, vk, v2, pa, pc, pw, nterms, k2)
            for i in range(8):
                ytmp[i] = y[i] + h * (A31 * f[i] + A32 * k2[i])
            _rhs(eta + C3 * h, ytmp, qk, q2, vk, v2, pa, pc, pw, nterms, k3)
            for i in range(8):
                ytmp[i] = y[i] + h * (A41 * f[i] + A42 * k2[i] + A43 * k3[i])
            _rhs(eta + C4 * h, ytmp, qk, q2, vk, v2, pa, pc, pw, nterms, k4)
            for i in range(8):
                ytmp[i] = y[i] + h * (A51 * f[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _rhs(eta + C5 * h, ytmp, qk, q2, vk, v2, pa, pc, pw, nterms, k5)
            for i in range(8):
                ytmp[i] = y[i] + h * (A61 * f[i] + A62 * k2[i] + A63 * k3[i]
                                      + A64 * k4[i] + A65 * k5[i])
            _rhs(eta + h, ytmp, qk, q2, vk, v2, pa, pc, pw, nterms, k6)
            for i in range(8):
                ynew[i] = y[i] + h * (B1 * f[i] + B3 * k3[i] + B4 * k4[i]
                                      + B5 * k5[i] + B6 * k6[i])
            _rhs(eta + h, ynew, qk, q2, vk, v2, pa, pc, pw, nterms, k7)
            n_rhs += 6

            for i in range(8):
                errv[i] = h * (E1 * f[i] + E3 * k3[i] + E4 * k4[i]
                               + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            enorm = _error_norm(errv, y, ynew, rtol, atol)

            if enorm <= 1.0:
                eta += h
                for i in range(8):
                    y[i] = ynew[i]
                    f[i] = k7[i]  # first-same-as-last
                n_steps += 1
                smax = 0.0
                for i in range(4):
                    a = abs(y[i])
                    if a > smax:
                        smax = a
                if smax > s_limit:
                    status = 1
                    break
                if enorm == 0.0:
                    factor = 5.0
                else:
                    factor = 0.9 * enorm ** -0.2
                    if factor > 5.0:
                        factor = 5.0
                    elif factor < 0.2:
                        factor = 0.2
                if rejected and factor > 1.0:
                    factor = 1.0
                rejected = False
                h *= factor
                if n_steps >= max_steps:
                    status = 2
                    break
            else:
                rejected = True
                factor = 0.9 * enorm ** -0.2
                if factor < 0.2:
                    factor = 0.2
                h *= factor

    return (
        (y[0], y[1], y[2], y[3]),
        (y[4], y[5], y[6], y[7]),
        {"status": status, "eta": eta, "n_steps": n_steps, "n_rhs": n_rhs},
    )
