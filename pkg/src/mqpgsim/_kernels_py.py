"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def pump_matrix(alpha_re, alpha_im, mu0, dmu, nu_out, nu_in):
    n_mu = len(alpha_re)
    diff = np.subtract.outer(np.asarray(nu_out, float), np.asarray(nu_in, float))
    # cast positions to grid index space so both backends interpolate identically
    x = (diff - mu0) / dmu
    inside = (x >= 0.0) & (x <= n_mu - 1)
    k = np.clip(np.floor(x).astype(np.int64), 0, n_mu - 2)
    fr = x - k
    re = (1.0 - fr) * alpha_re[k] + fr * alpha_re[k + 1]
    im = (1.0 - fr) * alpha_im[k] + fr * alpha_im[k + 1]
    out = re + 1j * im
    out[~inside] = 0.0
    return out

