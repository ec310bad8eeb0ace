# cython: language_level=3
"""Compiled hot kernels. Mirrors ``_kernels_py`` function by function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, fabs, INFINITY
from libc.stdlib cimport qsort, malloc, free

cnp.import_array()

NAME = "cython"


def laplace_inverse_array(u):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64).ravel()
    out = np.empty(uv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef double x
    with nogil:
        for i in range(n):
            x = uv[i]
            if x < 0.5:
                ov[i] = log(2.0 * x)
            else:
                ov[i] = -log(2.0 * (1.0 - x))
    return out.reshape(np.shape(u))


def softmax_into(const double[::1] z, double eta, out):
    cdef double[::1] ov = out
    cdef Py_ssize_t i, d = z.shape[0]
    cdef double m = -INFINITY, s = 0.0, w
    with nogil:
        for i in range(d):
            if z[i] > m:
                m = z[i]
        # shift before scaling so that z + c gives bit-identical output
        for i in range(d):
            w = exp(eta * (z[i] - m))
            ov[i] = w
            s += w
        for i in range(d):
            ov[i] /= s
    return out


def ball_clip_into(const double[::1] z, double eta, out):
    cdef double[::1] ov = out
    cdef Py_ssize_t i, d = z.shape[0]
    cdef double s = 0.0, w
    with nogil:
        for i in range(d):
            w = eta * z[i]
            ov[i] = w
            s += w * w
        s = sqrt(s)
        if s > 1.0:
            for i in range(d):
                ov[i] /= s
    return out


def sign_axpy(z, double scale, const signed char[::1] signs):
    """z <- z - scale * signs, in place."""
    cdef double[::1] zv = z
    cdef Py_ssize_t i, d = zv.shape[0]
    with nogil:
        for i in range(d):
            if signs[i] > 0:
                zv[i] -= scale
            else:
                zv[i] += scale
    return z


def signs_of(const double[::1] zeta, out):
    cdef signed char[::1] ov = out
    cdef Py_ssize_t i, d = zeta.shape[0]
    with nogil:
        for i in range(d):
            ov[i] = 1 if zeta[i] >= 0.0 else -1
    return out


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const double*>a)[0]
    cdef double y = (<const double*>b)[0]
    return (x < y) - (x > y)


cdef void _project_simplex(double* v, double* work, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double css = 0.0, theta = 0.0, acc = 0.0
    for i in range(d):
        work[i] = v[i]
    qsort(work, d, sizeof(double), _cmp_desc)
    for i in range(d):
        acc += work[i]
        if work[i] - (acc - 1.0) / (i + 1.0) > 0.0:
            css = acc
            theta = (css - 1.0) / (i + 1.0)
    for i in range(d):
        v[i] = v[i] - theta
        if v[i] < 0.0:
            v[i] = 0.0


cdef double _dist_l1_l2(const double* x, const double* c, const double* a, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s2 = 0.0, s1 = 0.0, r
    for i in range(d):
        r = x[i] - c[i]
        s2 += r * r
        s1 += fabs(x[i] - a[i])
    return sqrt(s2) + s1


def simplex_subgradient_descent(c, a, starts, double step, long iterations):
    """Projected subgradient descent of ``||x - c||_2 + ||x - a||_1`` on the simplex.

    Runs every row of ``starts`` with step ``step / sqrt(k)`` and tracks the
    best iterate per row. Returns ``(best_values, best_points)``.
    """
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    xs = np.array(starts, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] X = xs
    cdef Py_ssize_t nstart = X.shape[0], d = X.shape[1]
    best_x = xs.copy()
    cdef double[:, ::1] BX = best_x
    best_v = np.empty(nstart, dtype=np.float64)
    cdef double[::1] BV = best_v
    cdef double* work = <double*>malloc(d * sizeof(double))
    cdef double* r = <double*>malloc(d * sizeof(double))
    cdef Py_ssize_t s, i
    cdef long k
    cdef double n, v, eta
    if work == NULL or r == NULL:
        free(work)
        free(r)
        raise MemoryError()
    try:
        with nogil:
            for s in range(nstart):
                _project_simplex(&X[s, 0], work, d)
                for i in range(d):
                    BX[s, i] = X[s, i]
                BV[s] = _dist_l1_l2(&X[s, 0], &cv[0], &av[0], d)
                for k in range(1, iterations + 1):
                    n = 0.0
                    for i in range(d):
                        r[i] = X[s, i] - cv[i]
                        n += r[i] * r[i]
                    n = sqrt(n)
                    eta = step / sqrt(<double>k)
                    for i in range(d):
                        v = (1.0 if X[s, i] - av[i] >= 0.0 else -1.0)
                        if n > 0.0:
                            v += r[i] / n
                        X[s, i] -= eta * v
                    _project_simplex(&X[s, 0], work, d)
                    v = _dist_l1_l2(&X[s, 0], &cv[0], &av[0], d)
                    if v < BV[s]:
                        BV[s] = v
                        for i in range(d):
                            BX[s, i] = X[s, i]
    finally:
        free(work)
        free(r)
    return best_v, best_x
