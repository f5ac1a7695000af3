# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled collision kernels (hot path).

Mirrors charboltz._accel_py: same plan layout, per-row reductions
that do not depend on how rows are split across threads.  Across
backends results agree to roundoff (summation order differs).  The
loops run without the GIL so the solver can thread over grid rows.
"""

from libc.math cimport exp

BACKEND = "compiled"


def eval_u(double[::1] eta, double[::1] deta, long[::1] idx,
           double[::1] c0, double[::1] c1, double[::1] c2, double[::1] c3):
    import numpy as np
    out = np.empty(idx.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t k, i
    with nogil:
        for k in range(idx.shape[0]):
            i = idx[k]
            if i < 0:
                o[k] = 0.0
            else:
                o[k] = exp(c0[k] * eta[i] + c1[k] * deta[i]
                           + c2[k] * eta[i + 1] + c3[k] * deta[i + 1])
    return out


cdef inline double _u_at(double[::1] eta, double[::1] deta, long i,
                         double a, double b, double c, double d) nogil:
    if i < 0:
        return 0.0
    return exp(a * eta[i] + b * deta[i] + c * eta[i + 1] + d * deta[i + 1])


def collision_gain(double[::1] eta, double[::1] deta,
                   plan_plus, plan_minus,
                   double[::1] weights, rows, double[::1] out):
    cdef long[::1] ip = plan_plus[0]
    cdef double[::1] p0 = plan_plus[1], p1 = plan_plus[2], p2 = plan_plus[3], p3 = plan_plus[4]
    cdef long[::1] im = plan_minus[0]
    cdef double[::1] m0 = plan_minus[1], m1 = plan_minus[2], m2 = plan_minus[3], m3 = plan_minus[4]
    cdef Py_ssize_t lo = rows[0], hi = rows[1], n = weights.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc, up, um
    with nogil:
        for i in range(lo, hi):
            acc = 0.0
            k = i * n
            for j in range(n):
                up = _u_at(eta, deta, ip[k], p0[k], p1[k], p2[k], p3[k])
                um = _u_at(eta, deta, im[k], m0[k], m1[k], m2[k], m3[k])
                acc += weights[j] * (1.0 - up) * (1.0 - um)
                k += 1
            out[i] = acc


def collision_rhs(double[::1] u_nodes, double[::1] eta, double[::1] deta,
                  plan_plus, plan_minus,
                  double[::1] weights, rows, double[::1] out):
    cdef long[::1] ip = plan_plus[0]
    cdef double[::1] p0 = plan_plus[1], p1 = plan_plus[2], p2 = plan_plus[3], p3 = plan_plus[4]
    cdef long[::1] im = plan_minus[0]
    cdef double[::1] m0 = plan_minus[1], m1 = plan_minus[2], m2 = plan_minus[3], m3 = plan_minus[4]
    cdef Py_ssize_t lo = rows[0], hi = rows[1], n = weights.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc, up, um, ui
    with nogil:
        for i in range(lo, hi):
            acc = 0.0
            ui = u_nodes[i]
            k = i * n
            for j in range(n):
                up = _u_at(eta, deta, ip[k], p0[k], p1[k], p2[k], p3[k])
                um = _u_at(eta, deta, im[k], m0[k], m1[k], m2[k], m3[k])
                acc += weights[j] * (ui - up - um + up * um)
                k += 1
            out[i] = acc
