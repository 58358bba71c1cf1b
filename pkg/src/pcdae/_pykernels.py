"""Pure-Python/numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
``pcdae.kernels`` picks the compiled module when it imports and falls back
to this one otherwise.

Network conventions: algebraic vectors interleave bus voltages as
``[Vre_0, Vim_0, Vre_1, Vim_1, ...]`` and machine states as
``[delta_0, omega_0, delta_1, omega_1, ...]``.
"""

import numpy as np

from .errors import SingularJacobian

PIVOT_RTOL = 1e-14


def lu_factor(a):
    """Row-pivoted LU of a square matrix, returned as ``(lu, piv)``.

    ``lu`` stores the unit-lower factor below the diagonal and the upper
    factor on and above it. ``piv[k]`` is the row swapped into position ``k``.
    Raises :class:`SingularJacobian` when a pivot is smaller than
    ``1e-14 * ||a||_inf``.
    """
    lu = np.array(a, dtype=float, copy=True)
    n = lu.shape[0]
    piv = np.arange(n, dtype=np.intp)
    if n == 0:
        return lu, piv
    thresh = PIVOT_RTOL * np.max(np.sum(np.abs(lu), axis=1))
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= thresh:
            raise SingularJacobian(
                f"pivot {lu[p, k]:.3e} in column {k} below threshold {thresh:.3e}",
                pivot=float(lu[p, k]), column=k)
        piv[k] = p
        if p != k:
            lu[[k, p], :] = lu[[p, k], :]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, piv


def lu_solve(lu, piv, b):
    z = np.array(b, dtype=float, copy=True)
    n = z.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            z[k], z[p] = z[p], z[k]
    for i in range(1, n):
        z[i] -= lu[i, :i] @ z[:i]
    for i in range(n - 1, -1, -1):
        z[i] = (z[i] - lu[i, i + 1:] @ z[i + 1:]) / lu[i, i]
    return z


def machine_f(x, y, mac_bus, emf, xd, pm, two_h, damping, omega_s):
    delta = x[0::2]
    omega = x[1::2]
    vr = y[2 * mac_bus]
    vi = y[2 * mac_bus + 1]
    pe = emf / xd * (vr * np.sin(delta) - vi * np.cos(delta))
    out = np.empty_like(x)
    out[0::2] = omega_s * (omega - 1.0)
    out[1::2] = (pm - pe - damping * (omega - 1.0)) / two_h
    return out


def machine_jac(x, y, mac_bus, emf, xd, two_h, damping, omega_s, fx, fy):
    """Fill ``fx`` (2nm x 2nm) and ``fy`` (2nm x 2nb) in place."""
    fx[:] = 0.0
    fy[:] = 0.0
    for m in range(mac_bus.shape[0]):
        d = x[2 * m]
        k = mac_bus[m]
        vr = y[2 * k]
        vi = y[2 * k + 1]
        c = emf[m] / xd[m] / two_h[m]
        sd = np.sin(d)
        cd = np.cos(d)
        fx[2 * m, 2 * m + 1] = omega_s
        fx[2 * m + 1, 2 * m] = -c * (vr * cd + vi * sd)
        fx[2 * m + 1, 2 * m + 1] = -damping[m] / two_h[m]
        fy[2 * m + 1, 2 * k] = -c * sd
        fy[2 * m + 1, 2 * k + 1] = c * cd


def _load_terms(vr, vi, p, q, vmin):
    """Injected load current and its 2x2 voltage derivative.

    Constant power above ``vmin``; below it, the constant impedance that
    draws the rated power at ``vmin`` (continuous at the threshold).
    """
    m = vr * vr + vi * vi
    u = p * vr + q * vi
    w = p * vi - q * vr
    if m >= vmin * vmin:
        m2 = m * m
        ire = -u / m
        iim = -w / m
        d = np.array([
            [-(p * m - 2.0 * u * vr) / m2, -(q * m - 2.0 * u * vi) / m2],
            [-(-q * m - 2.0 * w * vr) / m2, -(p * m - 2.0 * w * vi) / m2],
        ])
    else:
        z = vmin * vmin
        ire = -u / z
        iim = -w / z
        d = np.array([[-p / z, -q / z], [q / z, -p / z]])
    return ire, iim, d


def network_g(x, y, gmat, bmat, pinned, vspec, load_p, load_q, vmin,
              mac_bus, emf, xd):
    vr = y[0::2]
    vi = y[1::2]
    out = np.empty_like(y)
    out[0::2] = -(gmat @ vr - bmat @ vi)
    out[1::2] = -(gmat @ vi + bmat @ vr)
    for m in range(mac_bus.shape[0]):
        k = mac_bus[m]
        d = x[2 * m]
        out[2 * k] += (emf[m] * np.sin(d) - vi[k]) / xd[m]
        out[2 * k + 1] += (vr[k] - emf[m] * np.cos(d)) / xd[m]
    for k in range(vr.shape[0]):
        if load_p[k] != 0.0 or load_q[k] != 0.0:
            ire, iim, _ = _load_terms(vr[k], vi[k], load_p[k], load_q[k], vmin)
            out[2 * k] += ire
            out[2 * k + 1] += iim
        if pinned[k]:
            out[2 * k] = vr[k] - vspec[2 * k]
            out[2 * k + 1] = vi[k] - vspec[2 * k + 1]
    return out


def network_jac(x, y, gmat, bmat, pinned, load_p, load_q, vmin,
                mac_bus, emf, xd, gx, gy):
    """Fill ``gx`` (2nb x 2nm) and ``gy`` (2nb x 2nb) in place."""
    nb = gmat.shape[0]
    gx[:] = 0.0
    gy[0::2, 0::2] = -gmat
    gy[0::2, 1::2] = bmat
    gy[1::2, 0::2] = -bmat
    gy[1::2, 1::2] = -gmat
    for m in range(mac_bus.shape[0]):
        k = mac_bus[m]
        d = x[2 * m]
        gy[2 * k, 2 * k + 1] -= 1.0 / xd[m]
        gy[2 * k + 1, 2 * k] += 1.0 / xd[m]
        gx[2 * k, 2 * m] = emf[m] * np.cos(d) / xd[m]
        gx[2 * k + 1, 2 * m] = emf[m] * np.sin(d) / xd[m]
    for k in range(nb):
        if load_p[k] != 0.0 or load_q[k] != 0.0:
            _, _, d = _load_terms(y[2 * k], y[2 * k + 1], load_p[k], load_q[k], vmin)
            gy[2 * k:2 * k + 2, 2 * k:2 * k + 2] += d
        if pinned[k]:
            gy[2 * k:2 * k + 2, :] = 0.0
            gy[2 * k, 2 * k] = 1.0
            gy[2 * k + 1, 2 * k + 1] = 1.0
            gx[2 * k:2 * k + 2, :] = 0.0
