# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mesh kernels; same contracts as ``_kernels_py``."""


def shunt_scatter(const double[:, :, ::1] inc, double[:, :, ::1] out):
    cdef Py_ssize_t ny = inc.shape[1], nx = inc.shape[2], i, j
    cdef double a0, a1, a2, a3, h
    with nogil:
        for i in range(ny):
            for j in range(nx):
                a0 = inc[0, i, j]
                a1 = inc[1, i, j]
                a2 = inc[2, i, j]
                a3 = inc[3, i, j]
                h = 0.5 * (a0 + a1 + a2 + a3)
                out[0, i, j] = h - a0
                out[1, i, j] = h - a1
                out[2, i, j] = h - a2
                out[3, i, j] = h - a3


def mesh_connect(const double[:, :, ::1] out, double rho, double[:, :, ::1] inc):
    cdef Py_ssize_t ny = out.shape[1], nx = out.shape[2], i, j
    with nogil:
        for i in range(ny):
            inc[0, i, 0] = rho * out[0, i, 0]
            for j in range(1, nx):
                inc[0, i, j] = out[1, i, j - 1]
            for j in range(nx - 1):
                inc[1, i, j] = out[0, i, j + 1]
            inc[1, i, nx - 1] = rho * out[1, i, nx - 1]
        for j in range(nx):
            inc[2, 0, j] = rho * out[2, 0, j]
            inc[3, ny - 1, j] = rho * out[3, ny - 1, j]
        for i in range(1, ny):
            for j in range(nx):
                inc[2, i, j] = out[3, i - 1, j]
        for i in range(ny - 1):
            for j in range(nx):
                inc[3, i, j] = out[2, i + 1, j]

