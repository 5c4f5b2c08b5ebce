"""Analytic-oracle self checks run by ``phonon-reset validate``.

Each check compares a library result with an independent closed form or
quadrature and reports the observed error next to its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .dynamics import Segment, evolve, liouvillian, lindblad_rhs
from .errbudget import displacement_estimate
from .model import build_lab_hamiltonian, default_device, iswap_time, mhz, thermal_occupation
from .qcore import (
    DensityMatrix, Operator, annihilation, basis, embed, partial_trace,
)
from .thermometry import compatibility_check, posterior


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    error: float
    tolerance: float


def _check(name: str, error: float, tol: float) -> CheckResult:
    return CheckResult(name, bool(error <= tol), float(error), float(tol))


def check_commutator() -> CheckResult:
    a = annihilation(6).matrix
    c = a @ a.conj().T - a.conj().T @ a
    return _check("[a, a+] = 1 below the truncation edge", np.abs(c[:5, :5] - np.eye(5)).max(), 1e-14)


def check_partial_trace() -> CheckResult:
    rng = np.random.default_rng(0)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    r1 = m @ m.conj().T
    r1 /= np.trace(r1)
    r2 = np.diag([0.2, 0.8])
    rho = DensityMatrix(np.kron(r1, r2), (3, 2))
    return _check("partial trace of a product state", np.abs(partial_trace(rho, [0]).matrix - r1).max(), 1e-14)


def check_thermal_occupation() -> CheckResult:
    h, k = 6.62607015e-34, 1.380649e-23
    expected = 1.0 / (math.exp(h * 5e9 / (k * 0.045)) - 1.0)
    got = thermal_occupation(0.045, mhz(5000.0))
    # hbar is the rounded CODATA value, h is exact: agreement at the 1e-9 relative level
    return _check("Bose-Einstein occupation at 45 mK, 5 GHz", abs(got / expected - 1), 1e-8)


def check_iswap_time() -> CheckResult:
    return _check("iSWAP time for g = 2pi 300 kHz", abs(iswap_time(mhz(0.3)) - 5.0 / 6.0), 1e-12)


def check_liouvillian() -> CheckResult:
    dev = default_device(n_modes=1)
    h = build_lab_hamiltonian(dev, mhz(-8.8))
    q = embed(annihilation(2), 0, dev.dims)
    a = embed(annihilation(3), 1, dev.dims)
    collapse = [(q, 0.05), (a, 0.01), (q.dag() @ q, 0.1)]
    rng = np.random.default_rng(1)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    lv = liouvillian(h, collapse)
    vec = lv @ rho.reshape(-1)
    err = np.abs(vec.reshape(6, 6) - lindblad_rhs(h, collapse, rho)).max()
    return _check("superoperator equals the Lindblad right-hand side", err, 1e-12)


def _qubit_only(rate_op: str, rate: float, t: float, step: float) -> DensityMatrix:
    q = Operator(annihilation(2).matrix, (2,))
    ops = {"decay": q, "dephase": q.dag() @ q}
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    ket = basis((2,), (1,)) if rate_op == "decay" else plus
    rho0 = DensityMatrix.from_ket(ket, (2,))
    h = Operator(np.zeros((2, 2)), (2,), hermitian=True)
    return evolve([Segment(h, t, rate_op)], rho0, [(ops[rate_op], rate)], step).final


def check_free_decay(t1: float = 23.1) -> CheckResult:
    rho = _qubit_only("decay", 1.0 / t1, t1, 0.05)
    return _check("free decay reaches exp(-1) at t = T1", abs(rho.matrix[1, 1].real - math.exp(-1)), 1e-4)


def check_dephasing(tphi: float = 17.1) -> CheckResult:
    rho = _qubit_only("dephase", 2.0 / tphi, tphi, 0.05)
    return _check("coherence envelope exp(-t/Tphi)", abs(2 * abs(rho.matrix[0, 1]) - math.exp(-1)), 1e-4)


def check_ideal_iswap() -> CheckResult:
    g = mhz(0.3)
    dims = (2, 3)
    q = embed(annihilation(2), 0, dims)
    a = embed(annihilation(3), 1, dims)
    h = Operator(((a @ q.dag()) + (a.dag() @ q)).matrix * g, dims, hermitian=True)
    rho0 = DensityMatrix.from_ket(basis(dims, (1, 0)), dims)
    rho = evolve([Segment(h, iswap_time(g), "iswap")], rho0, (), 5e-4).final
    return _check("noiseless resonant iSWAP transfer", 1.0 - rho.matrix[1, 1].real, 1e-6)


def check_truncnorm_quadrature() -> CheckResult:
    from scipy import integrate

    worst = 0.0
    for mu, sigma in ((-0.95e-4, 1.39e-4), (0.3, 0.2), (-2.0, 1.0)):
        post = posterior(mu, sigma)
        f = lambda p: math.exp(-0.5 * ((p - mu) / sigma) ** 2)
        points = [min(max(mu, 0.0), 1.0)]
        z, _ = integrate.quad(f, 0, 1, points=points, epsabs=0, epsrel=1e-13, limit=200)
        m, _ = integrate.quad(lambda p: p * f(p), 0, 1, points=points, epsabs=0, epsrel=1e-13, limit=200)
        worst = max(worst, abs(post.mean - m / z))
    return _check("truncated-normal mean against quadrature", worst, 1e-8)


def check_posterior_golden() -> CheckResult:
    post = posterior(-0.95e-4, 1.39e-4)
    err = max(abs(post.mean / 8.3e-5 - 1) / 0.02,
              abs(post.ci_low / 0.027e-4 - 1) / 0.03,
              abs(post.ci_high / 2.52e-4 - 1) / 0.03)
    return _check("posterior golden numbers (relative error / tolerance)", err, 1.0)


def check_ztest() -> CheckResult:
    z, ok = compatibility_check(4.00e-3, 0.37e-3, 3.72e-3, 0.30e-3)
    return _check("two-measurement compatibility z", abs(z - 0.59) if ok else math.inf, 0.01)


def check_displacement_estimate() -> CheckResult:
    g, d = mhz(0.3), mhz(34.0)
    omega = 4e-4 * d * d / g
    amp, pop = displacement_estimate(g, omega, d)
    return _check("back-solved displacement estimate", max(abs(amp - 4e-4), abs(pop - 1.6e-7)), 1e-15)


def check_backends() -> CheckResult:
    if len(kernels.BACKENDS) < 2:
        return CheckResult("compiled and Python kernels agree (compiled kernel not built)", True, 0.0, 1e-12)
    dev = default_device(n_modes=2)
    h = build_lab_hamiltonian(dev, mhz(-8.8))
    q = embed(annihilation(2), 0, dev.dims)
    rho0 = DensityMatrix.from_ket(basis(dev.dims, (1, 0, 0)), dev.dims)
    seg = [Segment(h, 0.2, "s")]
    out = [evolve(seg, rho0, [(q, 0.05)], 1e-3, backend=b).final.matrix for b in ("python", "cython")]
    return _check("compiled and Python kernels agree", np.abs(out[0] - out[1]).max(), 1e-12)


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_commutator, check_partial_trace, check_thermal_occupation, check_iswap_time,
    check_liouvillian, check_free_decay, check_dephasing, check_ideal_iswap,
    check_truncnorm_quadrature, check_posterior_golden, check_ztest,
    check_displacement_estimate, check_backends,
)


def run_checks() -> list[CheckResult]:
    return [c() for c in CHECKS]
