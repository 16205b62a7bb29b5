# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops; see ``mqpgsim.kernels`` for the public wrappers."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def pump_matrix(const double[::1] alpha_re, const double[::1] alpha_im,
                double mu0, double dmu,
                const double[::1] nu_out, const double[::1] nu_in):
    """P[o, i] = alpha(nu_out[o] - nu_in[i]), linear interpolation, zero outside."""
    cdef Py_ssize_t n_out = nu_out.shape[0], n_in = nu_in.shape[0]
    cdef Py_ssize_t n_mu = alpha_re.shape[0]
    cdef Py_ssize_t o, i, k
    cdef double x, fr, last = <double>(n_mu - 1)
    re = np.zeros((n_out, n_in), dtype=np.float64)
    im = np.zeros((n_out, n_in), dtype=np.float64)
    cdef double[:, ::1] pr = re
    cdef double[:, ::1] pi = im
    with nogil:
        for o in range(n_out):
            for i in range(n_in):
                x = (nu_out[o] - nu_in[i] - mu0) / dmu
                if x < 0.0 or x > last:
                    continue
                k = <Py_ssize_t>floor(x)
                if k >= n_mu - 1:
                    k = n_mu - 2
                fr = x - k
                pr[o, i] = (1.0 - fr) * alpha_re[k] + fr * alpha_re[k + 1]
                pi[o, i] = (1.0 - fr) * alpha_im[k] + fr * alpha_im[k + 1]
    out = np.empty((n_out, n_in), dtype=np.complex128)
    out.real = re
    out.imag = im
    return out
