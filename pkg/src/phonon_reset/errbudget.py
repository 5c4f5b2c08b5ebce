"""Error channels outside the main reset simulation.

* off-resonant Jaynes-Cummings repopulation from an already-filled mode while
  the qubit swaps with another mode;
* spurious phonon displacement driven by a qubit control pulse, both as the
  closed-form g*Omega/Delta^2 estimate and by direct integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import Segment, evolve
from .errors import DomainError
from .model import (
    effective_hamiltonian, iswap_time, mhz, rwa_hamiltonian, sw_generator,
)
from .qcore import DensityMatrix, Operator, annihilation, basis, embed, expectation, identity, tensor

APPENDIX_STEP = 2e-4  # us; resolves the ~25-35 MHz detuned dynamics comfortably

# default parameters of the two channels
HYB_COUPLING = mhz(0.3)
HYB_DETUNING = mhz(25.0)
DISP_DETUNING = mhz(34.0)
DISP_RESPONSE = 4e-4


@dataclass(frozen=True)
class HybridizationResult:
    final_population: float
    max_population: float
    analytic_bound: float
    duration: float
    norm_drift: float


@dataclass(frozen=True)
class ErrorBudgetReport:
    hybridization_population: float
    hybridization_max_population: float
    hybridization_bound_analytic: float
    displacement_amplitude: float
    displacement_population: float
    displacement_sim_population: float
    displacement_sim_nominal: float
    dispersive_suppression: float
    drive_amplitude: float

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if v < 0:
                raise DomainError(f"{k} must be non-negative, got {v}")


def detuned_rabi_bound(g: float, detuning: float) -> float:
    """Maximum exchanged population 4g^2 / (Delta^2 + 4g^2) of a detuned vacuum-Rabi pair."""
    return 4.0 * g * g / (detuning * detuning + 4.0 * g * g)


def hybridization_hamiltonian(g: float, detuning: float, fock_dim: int = 2) -> Operator:
    """Qubit resonant with the swap mode, detuned by ``detuning`` from the filled mode.

    Frame where the filled mode has zero energy: H = (D/2) sz + D n_swap
    + g (sp a_filled + h.c.) + g (sp a_swap + h.c.).  Subsystems:
    (qubit, filled mode, swap mode).
    """
    dims = (2, fock_dim, fock_dim)
    sm = embed(annihilation(2), 0, dims)
    sp = sm.dag()
    sz = sp @ sm - sm @ sp
    a1 = embed(annihilation(fock_dim), 1, dims)
    a3 = embed(annihilation(fock_dim), 2, dims)
    h = (sz * (detuning / 2.0) + (a3.dag() @ a3) * detuning
         + (sp @ a1 + sm @ a1.dag()) * g + (sp @ a3 + sm @ a3.dag()) * g)
    return Operator(h.matrix, dims, hermitian=True)


def _sampled(h: Operator, rho0: DensityMatrix, duration: float, step: float, samples: int):
    n = max(1, math.ceil(duration / step - 1e-9))
    return evolve([Segment(h, duration, "appendix")], rho0, (), duration / n,
                  samples_per_segment=min(samples, n) - 1 if samples > 1 else 0)


def hybridization_sim(g: float = HYB_COUPLING, detuning: float = HYB_DETUNING,
                      duration: float | None = None, fock_dim: int = 2,
                      step: float | None = None, samples: int = 2000) -> HybridizationResult:
    """Unitary evolution from |g>|1>_filled|0>_swap over one iSWAP of the swap mode."""
    t = iswap_time(g) if duration is None else duration
    if g == 0:
        return HybridizationResult(0.0, 0.0, 0.0, t, 0.0)
    step = _step_for(detuning) if step is None else step
    h = hybridization_hamiltonian(g, detuning, fock_dim)
    rho0 = DensityMatrix.from_ket(basis(h.dims, (0, 1, 0)), h.dims)
    traj = _sampled(h, rho0, t, step, samples)
    pe = embed(Operator(np.diag([0.0, 1.0])), 0, h.dims)
    pops = [expectation(pe, r) for r in traj.states]
    drift = max(abs(r.trace() - 1.0) for r in traj.states)
    return HybridizationResult(pops[-1], max(pops), detuned_rabi_bound(g, detuning), t, drift)


def displacement_estimate(g: float, drive_amplitude: float, detuning: float) -> tuple[float, float]:
    """Closed-form phonon response amplitude g*Omega/Delta^2 and its square."""
    if detuning == 0:
        raise DomainError("displacement estimate undefined at zero detuning")
    amp = g * drive_amplitude / (detuning * detuning)
    return amp, amp * amp


def _drive_detunings(g: float, detuning: float) -> tuple[float, float]:
    """Qubit and mode detunings from a drive resonant with the Lamb-shifted qubit."""
    chi = g * g / detuning
    return -chi, -detuning - chi


def displacement_sim(g: float = HYB_COUPLING, detuning: float = DISP_DETUNING,
                     drive_amplitude: float | None = None, duration: float | None = None,
                     fock_dim: int = 4, model: str = "eff", step: float | None = None,
                     average: int = 8) -> float:
    """Phonon occupation (dressed frame) left behind by a square qubit pi pulse.

    ``model="eff"`` integrates the first-order Schrieffer-Wolff Hamiltonian;
    ``model="rwa"`` integrates the full driven Hamiltonian and maps the final
    state to the dressed frame with exp(S) before measuring a^+ a.  The pulse
    length is pi/(2 Omega) for the Omega(s+ + s-) drive term.

    After a square pulse the switch-on and switch-off ring-downs interfere with
    a phase set by the pulse length modulo 2 pi / Delta, so a single duration can
    land near a node.  With ``average > 1`` the result is the mean over that many
    durations spread evenly across one ringing period; ``average=1`` gives the
    nominal single-duration value.
    """
    if g == 0:
        return 0.0
    if drive_amplitude is None:
        drive_amplitude = DISP_RESPONSE * detuning * detuning / g
    if drive_amplitude <= 0:
        raise DomainError("drive amplitude must be positive")
    if model not in ("eff", "rwa"):
        raise ValueError(f"unknown model {model!r}")
    t0 = math.pi / (2.0 * drive_amplitude) if duration is None else duration
    dq, dr = _drive_detunings(g, detuning)
    step = _step_for(dr) if step is None else step
    if model == "eff":
        h = effective_hamiltonian(g, dq, dr, drive_amplitude, fock_dim)
    else:
        h = rwa_hamiltonian(g, dq, dr, drive_amplitude, fock_dim)
    rho0 = DensityMatrix.from_ket(basis(h.dims, (0, 0)), h.dims)
    n_op = tensor(identity(2), annihilation(fock_dim).dag() @ annihilation(fock_dim))
    u = None
    if model == "rwa":
        u = scipy.linalg.expm(sw_generator(g, detuning, fock_dim).matrix)
    period = 2.0 * math.pi / abs(dr)
    k = max(1, int(average))
    occ = []
    for j in range(k):
        rho = _sampled(h, rho0, t0 + j * period / k, step, 1).final
        if u is not None:
            rho = DensityMatrix(u @ rho.matrix @ u.conj().T, h.dims)
        occ.append(expectation(n_op, rho))
    return float(np.mean(occ))


def _step_for(rate: float) -> float:
    return min(APPENDIX_STEP, 0.05 / abs(rate))


def sw_consistency(g: float, detuning: float, drive_amplitude: float, duration: float | None = None,
                   fock_dim: int = 4, step: float | None = None, samples: int = 1000) -> float:
    """Max bare-population discrepancy between full and effective evolutions.

    Both start from |g, 0>; the drive is resonant with the Lamb-shifted qubit.
    Returned value is the largest |difference| in qubit excitation or phonon
    number over the sampled interval.
    """
    if abs(g / detuning) > 0.1 + 1e-12:
        raise DomainError("sw_consistency requires g/|Delta| <= 0.1")
    if g == 0:
        return 0.0
    t = math.pi / (2.0 * drive_amplitude) if duration is None else duration
    dq, dr = _drive_detunings(g, detuning)
    step = _step_for(dr) if step is None else step
    h_full = rwa_hamiltonian(g, dq, dr, drive_amplitude, fock_dim)
    h_eff = effective_hamiltonian(g, dq, dr, drive_amplitude, fock_dim)
    rho0 = DensityMatrix.from_ket(basis(h_full.dims, (0, 0)), h_full.dims)
    a = _sampled(h_full, rho0, t, step, samples)
    b = _sampled(h_eff, rho0, t, step, samples)
    pe = tensor(Operator(np.diag([0.0, 1.0])), identity(fock_dim))
    n = tensor(identity(2), annihilation(fock_dim).dag() @ annihilation(fock_dim))
    worst = 0.0
    for ra, rb in zip(a.states, b.states):
        for op in (pe, n):
            worst = max(worst, abs(expectation(op, ra) - expectation(op, rb)))
    return worst


def error_budget(g: float = HYB_COUPLING, hyb_detuning: float = HYB_DETUNING,
                 disp_detuning: float = DISP_DETUNING, response: float = DISP_RESPONSE,
                 step: float | None = None) -> ErrorBudgetReport:
    omega = response * disp_detuning * disp_detuning / g
    hyb = hybridization_sim(g, hyb_detuning, step=step)
    amp, pop = displacement_estimate(g, omega, disp_detuning)
    sim = displacement_sim(g, disp_detuning, omega, step=step)
    nominal = displacement_sim(g, disp_detuning, omega, step=step, average=1)
    return ErrorBudgetReport(
        hybridization_population=hyb.final_population,
        hybridization_max_population=hyb.max_population,
        hybridization_bound_analytic=hyb.analytic_bound,
        displacement_amplitude=amp,
        displacement_population=pop,
        displacement_sim_population=sim,
        displacement_sim_nominal=nominal,
        dispersive_suppression=(g / hyb_detuning) ** 2,
        drive_amplitude=omega,
    )
