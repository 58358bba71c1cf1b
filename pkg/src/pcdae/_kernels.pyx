# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``; signatures match exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sin, cos

from .errors import SingularJacobian

cnp.import_array()

cdef double PIVOT_RTOL = 1e-14


def lu_factor(a):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr = np.array(a, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] lu = arr
    cdef Py_ssize_t n = lu.shape[0]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] parr = np.arange(n, dtype=np.intp)
    cdef cnp.intp_t[::1] piv = parr
    cdef Py_ssize_t i, j, k, p
    cdef double thresh = 0.0, row, best, tmp, lik
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += fabs(lu[i, j])
        if row > thresh:
            thresh = row
    thresh *= PIVOT_RTOL
    for k in range(n):
        p = k
        best = fabs(lu[k, k])
        for i in range(k + 1, n):
            if fabs(lu[i, k]) > best:
                best = fabs(lu[i, k])
                p = i
        if best <= thresh:
            raise SingularJacobian(
                f"pivot {lu[p, k]:.3e} in column {k} below threshold {thresh:.3e}",
                pivot=float(lu[p, k]), column=int(k))
        piv[k] = p
        if p != k:
            for j in range(n):
                tmp = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = tmp
        for i in range(k + 1, n):
            lu[i, k] /= lu[k, k]
            lik = lu[i, k]
            if lik != 0.0:
                for j in range(k + 1, n):
                    lu[i, j] -= lik * lu[k, j]
    return arr, parr


def lu_solve(lu_in, piv_in, b):
    cdef double[:, ::1] lu = np.ascontiguousarray(lu_in, dtype=np.float64)
    cdef cnp.intp_t[::1] piv = np.ascontiguousarray(piv_in, dtype=np.intp)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zarr = np.array(b, dtype=np.float64, copy=True)
    cdef double[::1] z = zarr
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t i, j, k, p
    cdef double s, tmp
    for k in range(n):
        p = piv[k]
        if p != k:
            tmp = z[k]
            z[k] = z[p]
            z[p] = tmp
    for i in range(1, n):
        s = z[i]
        for j in range(i):
            s -= lu[i, j] * z[j]
        z[i] = s
    for i in range(n - 1, -1, -1):
        s = z[i]
        for j in range(i + 1, n):
            s -= lu[i, j] * z[j]
        z[i] = s / lu[i, i]
    return zarr


def machine_f(double[::1] x, double[::1] y, cnp.intp_t[::1] mac_bus,
              double[::1] emf, double[::1] xd, double[::1] pm,
              double[::1] two_h, double[::1] damping, double omega_s):
    cdef Py_ssize_t nm = mac_bus.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] oarr = np.empty(2 * nm, dtype=np.float64)
    cdef double[::1] out = oarr
    cdef Py_ssize_t m, k
    cdef double d, w, pe
    for m in range(nm):
        k = mac_bus[m]
        d = x[2 * m]
        w = x[2 * m + 1]
        pe = emf[m] / xd[m] * (y[2 * k] * sin(d) - y[2 * k + 1] * cos(d))
        out[2 * m] = omega_s * (w - 1.0)
        out[2 * m + 1] = (pm[m] - pe - damping[m] * (w - 1.0)) / two_h[m]
    return oarr


def machine_jac(double[::1] x, double[::1] y, cnp.intp_t[::1] mac_bus,
                double[::1] emf, double[::1] xd, double[::1] two_h,
                double[::1] damping, double omega_s,
                double[:, ::1] fx, double[:, ::1] fy):
    cdef Py_ssize_t m, k
    cdef double d, c, sd, cd, vr, vi
    fx[:, :] = 0.0
    fy[:, :] = 0.0
    for m in range(mac_bus.shape[0]):
        k = mac_bus[m]
        d = x[2 * m]
        vr = y[2 * k]
        vi = y[2 * k + 1]
        c = emf[m] / xd[m] / two_h[m]
        sd = sin(d)
        cd = cos(d)
        fx[2 * m, 2 * m + 1] = omega_s
        fx[2 * m + 1, 2 * m] = -c * (vr * cd + vi * sd)
        fx[2 * m + 1, 2 * m + 1] = -damping[m] / two_h[m]
        fy[2 * m + 1, 2 * k] = -c * sd
        fy[2 * m + 1, 2 * k + 1] = c * cd


cdef inline void _load_terms(double vr, double vi, double p, double q, double vmin,
                             double* ire, double* iim, double* d) nogil:
    cdef double m = vr * vr + vi * vi
    cdef double u = p * vr + q * vi
    cdef double w = p * vi - q * vr
    cdef double m2, z
    if m >= vmin * vmin:
        m2 = m * m
        ire[0] = -u / m
        iim[0] = -w / m
        d[0] = -(p * m - 2.0 * u * vr) / m2
        d[1] = -(q * m - 2.0 * u * vi) / m2
        d[2] = -(-q * m - 2.0 * w * vr) / m2
        d[3] = -(p * m - 2.0 * w * vi) / m2
    else:
        z = vmin * vmin
        ire[0] = -u / z
        iim[0] = -w / z
        d[0] = -p / z
        d[1] = -q / z
        d[2] = q / z
        d[3] = -p / z


def network_g(double[::1] x, double[::1] y, double[:, ::1] gmat, double[:, ::1] bmat,
              cnp.int8_t[::1] pinned, double[::1] vspec, double[::1] load_p,
              double[::1] load_q, double vmin, cnp.intp_t[::1] mac_bus,
              double[::1] emf, double[::1] xd):
    cdef Py_ssize_t nb = gmat.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] oarr = np.empty(2 * nb, dtype=np.float64)
    cdef double[::1] out = oarr
    cdef Py_ssize_t i, j, m, k
    cdef double sr, si, ire, iim, d
    cdef double dl[4]
    for i in range(nb):
        sr = 0.0
        si = 0.0
        for j in range(nb):
            sr += gmat[i, j] * y[2 * j] - bmat[i, j] * y[2 * j + 1]
            si += gmat[i, j] * y[2 * j + 1] + bmat[i, j] * y[2 * j]
        out[2 * i] = -sr
        out[2 * i + 1] = -si
    for m in range(mac_bus.shape[0]):
        k = mac_bus[m]
        d = x[2 * m]
        out[2 * k] += (emf[m] * sin(d) - y[2 * k + 1]) / xd[m]
        out[2 * k + 1] += (y[2 * k] - emf[m] * cos(d)) / xd[m]
    for k in range(nb):
        if load_p[k] != 0.0 or load_q[k] != 0.0:
            _load_terms(y[2 * k], y[2 * k + 1], load_p[k], load_q[k], vmin, &ire, &iim, dl)
            out[2 * k] += ire
            out[2 * k + 1] += iim
        if pinned[k]:
            out[2 * k] = y[2 * k] - vspec[2 * k]
            out[2 * k + 1] = y[2 * k + 1] - vspec[2 * k + 1]
    return oarr


def network_jac(double[::1] x, double[::1] y, double[:, ::1] gmat, double[:, ::1] bmat,
                cnp.int8_t[::1] pinned, double[::1] load_p, double[::1] load_q,
                double vmin, cnp.intp_t[::1] mac_bus, double[::1] emf,
                double[::1] xd, double[:, ::1] gx, double[:, ::1] gy):
    cdef Py_ssize_t nb = gmat.shape[0]
    cdef Py_ssize_t nm = mac_bus.shape[0]
    cdef Py_ssize_t i, j, m, k
    cdef double d, ire, iim
    cdef double dl[4]
    gx[:, :] = 0.0
    for i in range(nb):
        for j in range(nb):
            gy[2 * i, 2 * j] = -gmat[i, j]
            gy[2 * i, 2 * j + 1] = bmat[i, j]
            gy[2 * i + 1, 2 * j] = -bmat[i, j]
            gy[2 * i + 1, 2 * j + 1] = -gmat[i, j]
    for m in range(nm):
        k = mac_bus[m]
        d = x[2 * m]
        gy[2 * k, 2 * k + 1] -= 1.0 / xd[m]
        gy[2 * k + 1, 2 * k] += 1.0 / xd[m]
        gx[2 * k, 2 * m] = emf[m] * cos(d) / xd[m]
        gx[2 * k + 1, 2 * m] = emf[m] * sin(d) / xd[m]
    for k in range(nb):
        if load_p[k] != 0.0 or load_q[k] != 0.0:
            _load_terms(y[2 * k], y[2 * k + 1], load_p[k], load_q[k], vmin, &ire, &iim, dl)
            gy[2 * k, 2 * k] += dl[0]
            gy[2 * k, 2 * k + 1] += dl[1]
            gy[2 * k + 1, 2 * k] += dl[2]
            gy[2 * k + 1, 2 * k + 1] += dl[3]
        if pinned[k]:
            for j in range(2 * nb):
                gy[2 * k, j] = 0.0
                gy[2 * k + 1, j] = 0.0
            for j in range(2 * nm):
                gx[2 * k, j] = 0.0
                gx[2 * k + 1, j] = 0.0
            gy[2 * k, 2 * k] = 1.0
            gy[2 * k + 1, 2 * k + 1] = 1.0
