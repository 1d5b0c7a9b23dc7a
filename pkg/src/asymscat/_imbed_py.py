"""Pure-Python propagation of the stabilized invariant-imbedding system.

Reference implementation of the hot kernel; :mod:`asymscat._imbed` is the
compiled twin with identical semantics, selected at import by
:mod:`asymscat._backend`.

The slab-edge variables (S, T) obey

    dS/deta = -2*Q + Q*S + S*(Q + V(eta)*S)
    dT/deta = T*(Q + V(eta)*S)          S(0) = T(0) = 1

with Q = i*diag(kbar, kappa2) and the rescaled coupling matrix

    V(eta) = -(i/2) * [[0, Om(eta)/kbar], [conj(Om(eta))/kappa2, 0]],
    Om(eta) = sum_j amps[j] * exp(-((eta - centers[j])/widths[j])^2).

In these variables the free solution is the fixed point S = 1, so the
integrator never tracks the exp(+i*kappa2*eta) growth that makes the raw
reflection/transmission equations stiff for evanescent channels.

Integration uses an embedded Dormand-Prince 5(4) pair with PI-free step
control (factor 0.9*err^(-1/5), clipped to [0.2, 5]).
"""

from __future__ import annotations

from math import exp, sqrt

__all__ = ["propagate_stabilized"]

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# error weights: 5th-order minus embedded 4th-order solution
_E1, _E3, _E4, _E5, _E6, _E7 = (
    35 / 384 - 5179 / 57600,
    500 / 1113 - 7571 / 16695,
    125 / 192 - 393 / 640,
    -2187 / 6784 + 92097 / 339200,
    11 / 84 - 187 / 2100,
    -1 / 40,
)

_MIN_STEP = 1e-14


def _rhs(eta, y, qk, q2, vk, v2, terms):
    """Derivative of the stacked (S, T) state.

    qk = i*kbar, q2 = i*kappa2; vk = -i/(2*kbar), v2 = -i/(2*kappa2).
    """
    om = 0j
    for amp, c, w in terms:
        z = (eta - c) / w
        om += amp * exp(-z * z)
    v12 = vk * om
    v21 = v2 * om.conjugate()

    s11, s12, s21, s22, t11, t12, t21, t22 = y
    m11 = qk + v12 * s21
    m12 = v12 * s22
    m21 = v21 * s11
    m22 = q2 + v21 * s12
    return (
        -2.0 * qk + qk * s11 + s11 * m11 + s12 * m21,
        qk * s12 + s11 * m12 + s12 * m22,
        q2 * s21 + s21 * m11 + s22 * m21,
        -2.0 * q2 + q2 * s22 + s21 * m12 + s22 * m22,
        t11 * m11 + t12 * m21,
        t11 * m12 + t12 * m22,
        t21 * m11 + t22 * m21,
        t21 * m12 + t22 * m22,
    )


def _error_norm(err, y, ynew, rtol, atol):
    acc = 0.0
    for i in range(8):
        ay = abs(y[i])
        an = abs(ynew[i])
        sc = atol + rtol * (ay if ay > an else an)
        q = abs(err[i]) / sc
        acc += q * q
    return sqrt(acc / 8.0)


def propagate_stabilized(
    kbar,
    kappa2,
    amps,
    centers,
    widths,
    rtol=1e-9,
    atol=1e-12,
    s_limit=1e8,
    max_steps=10_000_000,
):
    """Integrate the stabilized system over eta in [0, 1].

    Parameters mirror the compiled backend: ``amps`` are complex Gaussian
    amplitudes of the rescaled coupling, ``centers``/``widths`` its Gaussian
    centers and widths in the eta coordinate.  Returns

        (S, T, info)

    with S, T row-major 4-tuples of complex and info a dict with keys
    ``status`` (0 ok, 1 blow-up past s_limit, 2 step-size underflow),
    ``eta`` (where integration stopped), ``n_steps`` and ``n_rhs``.
    """
    terms = [(complex(a), float(c), float(w)) for a, c, w in zip(amps, centers, widths)]
    qk = 1j * float(kbar)
    q2 = 1j * complex(kappa2)
    vk = -0.5j / float(kbar)
    v2 = -0.5j / complex(kappa2)

    y = (1 + 0j, 0j, 0j, 1 + 0j, 1 + 0j, 0j, 0j, 1 + 0j)
    eta = 0.0
    n_rhs = 0
    n_steps = 0

    f = _rhs(eta, y, qk, q2, vk, v2, terms)
    n_rhs += 1

    # starting step a la Hairer/Norsett/Wanner
    sc = [atol + rtol * abs(y[i]) for i in range(8)]
    d0 = sqrt(sum((abs(y[i]) / sc[i]) ** 2 for i in range(8)) / 8.0)
    d1 = sqrt(sum((abs(f[i]) / sc[i]) ** 2 for i in range(8)) / 8.0)
    h = 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6
    y1 = tuple(y[i] + h * f[i] for i in range(8))
    f1 = _rhs(eta + h, y1, qk, q2, vk, v2, terms)
    n_rhs += 1
    d2 = sqrt(sum((abs(f1[i] - f[i]) / sc[i]) ** 2 for i in range(8)) / 8.0) / h
    dm = max(d1, d2)
    h1 = (0.01 / dm) ** 0.2 if dm > 1e-15 else max(1e-6, h * 1e-3)
    h = min(100.0 * h, h1, 1.0)

    rejected = False
    while eta < 1.0:
        if h > 1.0 - eta:
            h = 1.0 - eta
        if h < _MIN_STEP:
            return _pack(y, 2, eta, n_steps, n_rhs)

        k1 = f
        k2 = _rhs(
            eta + _C2 * h,
            tuple(y[i] + h * (_A21 * k1[i]) for i in range(8)),
            qk, q2, vk, v2, terms,
        )
        k3 = _rhs(
            eta + _C3 * h,
            tuple(y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(8)),
            qk, q2, vk, v2, terms,
        )
        k4 = _rhs(
            eta + _C4 * h,
            tuple(y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(8)),
            qk, q2, vk, v2, terms,
        )
        k5 = _rhs(
            eta + _C5 * h,
            tuple(
                y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
                for i in range(8)
            ),
            qk, q2, vk, v2, terms,
        )
        k6 = _rhs(
            eta + h,
            tuple(
                y[i]
                + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
                for i in range(8)
            ),
            qk, q2, vk, v2, terms,
        )
        ynew = tuple(
            y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(8)
        )
        k7 = _rhs(eta + h, ynew, qk, q2, vk, v2, terms)
        n_rhs += 6

        err = tuple(
            h
            * (
                _E1 * k1[i]
                + _E3 * k3[i]
                + _E4 * k4[i]
                + _E5 * k5[i]
                + _E6 * k6[i]
                + _E7 * k7[i]
            )
            for i in range(8)
        )
        enorm = _error_norm(err, y, ynew, rtol, atol)

        if enorm <= 1.0:
            eta += h
            y = ynew
            f = k7  # first-same-as-last
            n_steps += 1
            if max(abs(y[0]), abs(y[1]), abs(y[2]), abs(y[3])) > s_limit:
                return _pack(y, 1, eta, n_steps, n_rhs)
            factor = 5.0 if enorm == 0.0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
            if rejected:
                factor = min(factor, 1.0)
            rejected = False
            h *= factor
            if n_steps >= max_steps:
                return _pack(y, 2, eta, n_steps, n_rhs)
        else:
            rejected = True
            h *= max(0.2, 0.9 * enorm ** -0.2)

    return _pack(y, 0, eta, n_steps, n_rhs)


def _pack(y, status, eta, n_steps, n_rhs):
    return (
        (y[0], y[1], y[2], y[3]),
        (y[4], y[5], y[6], y[7]),
        {"status": status, "eta": eta, "n_steps": n_steps, "n_rhs": n_rhs},
    )
