"""Pure-Python RK4 fallback: one scipy.sparse matvec per stage."""

import numpy as np
import scipy.sparse as sp


def assemble(diag, rp, ri, rv, ip, ii, iv):
    n = diag.shape[0]
    re = sp.csr_matrix((rv, ri, rp), shape=(n, n))
    im = sp.csr_matrix((iv, ii, ip), shape=(n, n))
    return (sp.diags(diag) + re + 1j * im).tocsr()


def rk4_split(diag, rp, ri, rv, ip, ii, iv, y, h, nsteps):
    """Advance ``y`` in place by ``nsteps`` RK4 steps of size ``h``."""
    lv = assemble(diag, rp, ri, rv, ip, ii, iv)
    x = np.array(y, dtype=complex)
    for _ in range(nsteps):
        k1 = lv @ x
        k2 = lv @ (x + (0.5 * h) * k1)
        k3 = lv @ (x + (0.5 * h) * k2)
        k4 = lv @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    y[:] = x
