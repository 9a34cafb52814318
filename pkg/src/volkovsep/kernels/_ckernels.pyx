# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-node spinor kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin

cnp.import_array()


cdef inline void _hamiltonian(double complex a0, double complex a1,
                              double complex b0, double complex b1,
                              double kx, double ky, double kz, double m,
                              double complex* h) noexcept nogil:
    cdef double complex kminus = kx - 1j * ky
    cdef double complex kplus = kx + 1j * ky
    h[0] = m * a0 + kz * b0 + kminus * b1
    h[1] = m * a1 + kplus * b0 - kz * b1
    h[2] = kz * a0 + kminus * a1 - m * b0
    h[3] = kplus * a0 - kz * a1 - m * b1


def apply_hamiltonian(const double complex[:, ::1] values, const double[::1] kx,
                      const double[::1] ky, const double[::1] kz, double m):
    cdef Py_ssize_t n = values.shape[1], j
    out = np.empty((4, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double complex h[4]
    with nogil:
        for j in range(n):
            _hamiltonian(values[0, j], values[1, j], values[2, j], values[3, j],
                         kx[j], ky[j], kz[j], m, h)
            o[0, j] = h[0]
            o[1, j] = h[1]
            o[2, j] = h[2]
            o[3, j] = h[3]
    return out


def project(const double complex[:, ::1] values, const double[::1] kx, const double[::1] ky,
            const double[::1] kz, double m, int sign):
    cdef Py_ssize_t n = values.shape[1], j, c
    out = np.empty((4, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double complex h[4]
    cdef double energy, s = <double>sign
    with nogil:
        for j in range(n):
            energy = sqrt(m * m + kx[j] * kx[j] + ky[j] * ky[j] + kz[j] * kz[j])
            _hamiltonian(values[0, j], values[1, j], values[2, j], values[3, j],
                         kx[j], ky[j], kz[j], m, h)
            for c in range(4):
                o[c, j] = 0.5 * (values[c, j] + s * h[c] / energy)
    return out


def free_evolve(const double complex[:, ::1] values, const double[::1] kx, const double[::1] ky,
                const double[::1] kz, double m, double dt):
    cdef Py_ssize_t n = values.shape[1], j, c
    out = np.empty((4, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double complex h[4]
    cdef double complex eplus, eminus, hf
    cdef double energy
    with nogil:
        for j in range(n):
            energy = sqrt(m * m + kx[j] * kx[j] + ky[j] * ky[j] + kz[j] * kz[j])
            eplus = cos(energy * dt) - 1j * sin(energy * dt)
            eminus = cos(energy * dt) + 1j * sin(energy * dt)
            _hamiltonian(values[0, j], values[1, j], values[2, j], values[3, j],
                         kx[j], ky[j], kz[j], m, h)
            for c in range(4):
                hf = h[c] / energy
                o[c, j] = eplus * (0.5 * (values[c, j] + hf)) + eminus * (0.5 * (values[c, j] - hf))
    return out


def theta_accumulate(const double complex[:, :, ::1] g, const double[::1] weights, bint forward):
    cdef Py_ssize_t nt = g.shape[0], nc = g.shape[1], n = g.shape[2]
    cdef Py_ssize_t i, c, j, step, idx, start
    out = np.empty((nt, nc, n), dtype=np.complex128)
    cdef double complex[:, :, ::1] o = out
    cdef double complex running, term
    if forward:
        start = 0
        step = 1
    else:
        start = nt - 1
        step = -1
    with nogil:
        for c in range(nc):
            for j in range(n):
                running = 0.0
                idx = start
                for i in range(nt):
                    term = weights[idx] * g[idx, c, j]
                    running = running + term
                    o[idx, c, j] = running - 0.5 * term
                    idx = idx + step
    return out
