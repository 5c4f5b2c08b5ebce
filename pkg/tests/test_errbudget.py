import math

import pytest

from phonon_reset.errbudget import (
    DISP_DETUNING, HYB_COUPLING, ErrorBudgetReport, detuned_rabi_bound, displacement_estimate,
    displacement_sim, error_budget, hybridization_hamiltonian, hybridization_sim, sw_consistency,
)
from phonon_reset.errors import DomainError
from phonon_reset.model import iswap_time, mhz


def test_detuned_rabi_bound_limits():
    assert detuned_rabi_bound(1.0, 0.0) == 1.0
    assert detuned_rabi_bound(mhz(0.3), mhz(25)) == pytest.approx(4 * 0.09 / (625 + 0.36))


def test_hybridization_hamiltonian_structure():
    h = hybridization_hamiltonian(mhz(0.3), mhz(25))
    assert h.dims == (2, 2, 2)
    assert h.is_hermitian()


def test_hybridization_stays_below_bound():
    res = hybridization_sim()
    assert res.duration == pytest.approx(iswap_time(HYB_COUPLING))
    assert res.max_population <= res.analytic_bound * (1 + 1e-3)
    assert 0.5e-4 <= res.final_population <= 6e-4
    assert res.norm_drift < 1e-10


def test_hybridization_zero_coupling():
    res = hybridization_sim(g=0.0, duration=1.0)
    assert res.final_population == 0.0


def test_hybridization_is_off_resonant_rabi():
    # with the swap mode removed the exchange is a pure detuned Rabi oscillation
    g, d = mhz(0.3), mhz(25)
    t = 0.3
    res = hybridization_sim(g, d, duration=t, samples=1)
    omega = math.sqrt(d**2 + 4 * g**2)
    rabi = detuned_rabi_bound(g, d) * math.sin(0.5 * omega * t) ** 2
    # the resonant swap mode only hands population along afterwards; it cannot exceed the single-pair value
    assert res.final_population <= rabi + 1e-4


def test_displacement_estimate_values():
    omega = 4e-4 * DISP_DETUNING**2 / HYB_COUPLING
    amp, pop = displacement_estimate(HYB_COUPLING, omega, DISP_DETUNING)
    assert amp == pytest.approx(4e-4, rel=1e-14)
    assert pop == pytest.approx(1.6e-7, rel=1e-14)
    with pytest.raises(DomainError):
        displacement_estimate(1.0, 1.0, 0.0)


def test_displacement_models_agree():
    eff = displacement_sim(model="eff")
    rwa = displacement_sim(model="rwa")
    assert eff == pytest.approx(rwa, rel=0.05)


def test_displacement_timing_average_tracks_estimate():
    _, pop = displacement_estimate(HYB_COUPLING, 4e-4 * DISP_DETUNING**2 / HYB_COUPLING, DISP_DETUNING)
    avg = displacement_sim()
    # after a square pulse |alpha|^2 = 4 (g Omega / Delta^2)^2 cos^2(phase); its mean is twice the estimate
    assert avg == pytest.approx(2 * pop, rel=0.1)


def test_displacement_nominal_square_pulse_ring_down():
    """Single-duration value follows 4 A^2 cos^2(Delta_r T / 2) of the forced oscillator."""
    g, d = HYB_COUPLING, DISP_DETUNING
    omega = 4e-4 * d * d / g
    chi = g * g / d
    dr = d + chi
    t = math.pi / (2 * omega)
    amp = g * omega / (d * d)
    expected = 4 * amp**2 * math.cos(0.5 * dr * t) ** 2
    assert displacement_sim(average=1) == pytest.approx(expected, rel=0.2, abs=2e-10)


def test_displacement_scales_inverse_fourth_power_of_detuning():
    omega = 4e-4 * DISP_DETUNING**2 / HYB_COUPLING
    near = displacement_sim(HYB_COUPLING, DISP_DETUNING, omega)
    far = displacement_sim(HYB_COUPLING, 10 * DISP_DETUNING, omega)
    assert near / far == pytest.approx(1e4, rel=0.3)
    assert displacement_sim(g=0.0) == 0.0


def test_displacement_input_checks():
    with pytest.raises(DomainError):
        displacement_sim(drive_amplitude=-1.0)
    with pytest.raises(ValueError):
        displacement_sim(model="exact")


def test_sw_consistency_quadratic():
    g = HYB_COUPLING
    omega = mhz(0.1)  # weak drive, Omega << Delta
    d1 = sw_consistency(g, g / 0.1, omega)
    d2 = sw_consistency(g, g / 0.05, omega)
    assert d1 / d2 == pytest.approx(4.0, rel=0.25)


def test_sw_consistency_at_device_ratio():
    g = HYB_COUPLING
    d = mhz(25.0)
    assert sw_consistency(g, d, mhz(0.1)) <= 5 * (g / d) ** 2
    assert sw_consistency(0.0, d, mhz(0.1)) == 0.0


def test_sw_consistency_domain():
    with pytest.raises(DomainError):
        sw_consistency(1.0, 5.0, 1.0)


def test_error_budget_report():
    rep = error_budget()
    assert rep.dispersive_suppression == pytest.approx((0.3 / 25) ** 2)
    assert rep.displacement_sim_nominal < rep.displacement_sim_population
    with pytest.raises(DomainError):
        ErrorBudgetReport(*([1.0] * 8), drive_amplitude=-1.0)
