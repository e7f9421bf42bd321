# cython: language_level=3
"""Compiled field update kernel.

Mirrors kernels_py.step_fields operation for operation; compiled with
-ffp-contract=off so results stay bit-identical to the NumPy backend.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"


def step_fields(double[:, ::1] Ez, double[:, ::1] Hx, double[:, ::1] Hy,
                double[:, ::1] psi_hxy, double[:, ::1] psi_hyx,
                double[:, ::1] psi_ezx, double[:, ::1] psi_ezy,
                double[:, ::1] ca, double[:, ::1] cb,
                double[::1] bh_y, double[::1] ch_y,
                double[::1] bh_x, double[::1] ch_x,
                double[::1] be_x, double[::1] ce_x,
                double[::1] be_y, double[::1] ce_y,
                double coef_h):
    cdef Py_ssize_t nx = Ez.shape[0]
    cdef Py_ssize_t ny = Ez.shape[1]
    cdef Py_ssize_t i, j
    cdef double dE, dHy, dHx, p

    for i in range(nx):
        for j in range(ny - 1):
            dE = Ez[i, j + 1] - Ez[i, j]
            p = bh_y[j] * psi_hxy[i, j] + ch_y[j] * dE
            psi_hxy[i, j] = p
            Hx[i, j] = Hx[i, j] - coef_h * (dE + p)

    for i in range(nx - 1):
        for j in range(ny):
            dE = Ez[i + 1, j] - Ez[i, j]
            p = bh_x[i] * psi_hyx[i, j] + ch_x[i] * dE
            psi_hyx[i, j] = p
            Hy[i, j] = Hy[i, j] + coef_h * (dE + p)

    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            dHy = Hy[i, j] - Hy[i - 1, j]
            dHx = Hx[i, j] - Hx[i, j - 1]
            psi_ezx[i, j] = be_x[i] * psi_ezx[i, j] + ce_x[i] * dHy
            psi_ezy[i, j] = be_y[j] * psi_ezy[i, j] + ce_y[j] * dHx
            Ez[i, j] = ca[i, j] * Ez[i, j] + cb[i, j] * (
                (dHy - dHx) + (psi_ezx[i, j] - psi_ezy[i, j]))
