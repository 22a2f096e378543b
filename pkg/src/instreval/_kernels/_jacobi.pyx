# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Cyclic Jacobi eigensolver kernel for dense symmetric matrices."""

from libc.math cimport fabs, sqrt


def cyclic_jacobi(double[:, ::1] a, double[:, ::1] vt, bint accumulate,
                  double tol, int max_sweeps):
    """Diagonalize symmetric `a` in place with cyclic Jacobi sweeps.

    Returns the number of sweeps used, or -1 if the off-diagonal Frobenius
    norm is still above `tol` after max_sweeps.  `vt` must be the identity on
    entry; on exit its rows are the eigenvectors (untouched when `accumulate`
    is false).  Eigenvalues are left on the diagonal of `a`, unsorted.

    Rotations update rows p and q, then mirror the columns from the rows;
    symmetry of `a` is an invariant of every sweep.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef double off2, apq, app, aqq, theta, t, c, s, aip, aiq, pair_tol

    if n <= 1:
        return 0
    pair_tol = tol / <double> n

    for sweep in range(max_sweeps):
        off2 = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off2 += a[p, q] * a[p, q]
        if sqrt(2.0 * off2) <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) <= pair_tol:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    aip = a[p, i]
                    aiq = a[q, i]
                    a[p, i] = c * aip - s * aiq
                    a[q, i] = s * aip + c * aiq
                for i in range(n):
                    a[i, p] = a[p, i]
                    a[i, q] = a[q, i]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                if accumulate:
                    for i in range(n):
                        aip = vt[p, i]
                        aiq = vt[q, i]
                        vt[p, i] = c * aip - s * aiq
                        vt[q, i] = s * aip + c * aiq

    off2 = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off2 += a[p, q] * a[p, q]
    if sqrt(2.0 * off2) <= tol:
        return max_sweeps
    return -1
