"""Transmon + multimode phonon Hamiltonians and dispersive (Schrieffer-Wolff) quantities.

Units: angular frequencies in rad/us, times in us, hbar = 1.  ``mhz(x)`` converts
a frequency in MHz to rad/us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .qcore import Operator, annihilation, embed_product, identity, tensor

TWO_PI = 2.0 * math.pi
HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K


def mhz(f: float) -> float:
    """Frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * f


def to_mhz(omega: float) -> float:
    return omega / TWO_PI


# default geometry: qubit idles at 5 GHz, modes spaced by one FSR starting 8.8 MHz below
DEFAULT_QUBIT_GHZ = 5.0
DEFAULT_FSR_MHZ = 12.6
DEFAULT_FIRST_OFFSET_MHZ = -8.8
DEFAULT_COUPLING_KHZ = 300.0
DEFAULT_ANHARMONICITY_MHZ = 200.0


def default_mode_offsets_mhz(n_modes: int = 5) -> list[float]:
    return [round(DEFAULT_FIRST_OFFSET_MHZ - i * DEFAULT_FSR_MHZ, 10) for i in range(n_modes)]


@dataclass(frozen=True)
class DeviceModel:
    """Transmon coupled to N phonon modes; all frequencies angular (rad/us)."""

    qubit_freq: float
    anharmonicity: float
    mode_freqs: tuple[float, ...]
    couplings: tuple[float, ...]
    fsr: float
    qubit_levels: int = 2
    fock_dim: int = 3

    def __post_init__(self):
        object.__setattr__(self, "mode_freqs", tuple(float(w) for w in self.mode_freqs))
        object.__setattr__(self, "couplings", tuple(float(g) for g in self.couplings))
        if len(self.mode_freqs) != len(self.couplings):
            raise ConfigError("mode_freqs and couplings must have equal length")
        if any(g <= 0 for g in self.couplings):
            raise ConfigError("all couplings must be positive")
        if self.fsr <= 0:
            raise ConfigError("fsr must be positive")
        if self.qubit_levels < 2 or self.fock_dim < 2:
            raise ConfigError("qubit_levels and fock_dim must be >= 2")
        det = [abs(w - self.qubit_freq) for w in self.mode_freqs]
        if any(b <= a for a, b in zip(det, det[1:])):
            raise ConfigError("modes must be labeled in strictly increasing |detuning| from the qubit")

    @property
    def n_modes(self) -> int:
        return len(self.mode_freqs)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.qubit_levels,) + (self.fock_dim,) * self.n_modes

    def mode_detuning(self, label: int) -> float:
        """omega_i - omega_q for 1-based mode ``label``."""
        return self.mode_freqs[label - 1] - self.qubit_freq

    def coupling(self, label: int) -> float:
        if not 1 <= label <= self.n_modes:
            raise ConfigError(f"mode {label} has no coupling data (device has {self.n_modes} modes)")
        return self.couplings[label - 1]

    def select_modes(self, labels: Sequence[int]) -> DeviceModel:
        """Sub-device keeping only the listed modes (relabelled 1..len(labels))."""
        labels = sorted(labels)
        for lab in labels:
            self.coupling(lab)
        return replace(
            self,
            mode_freqs=tuple(self.mode_freqs[i - 1] for i in labels),
            couplings=tuple(self.couplings[i - 1] for i in labels),
        )


def default_device(n_modes: int = 5, qubit_levels: int = 2, fock_dim: int = 3) -> DeviceModel:
    wq = mhz(DEFAULT_QUBIT_GHZ * 1e3)
    return DeviceModel(
        qubit_freq=wq,
        anharmonicity=mhz(DEFAULT_ANHARMONICITY_MHZ),
        mode_freqs=tuple(wq + mhz(o) for o in default_mode_offsets_mhz(n_modes)),
        couplings=(mhz(DEFAULT_COUPLING_KHZ * 1e-3),) * n_modes,
        fsr=mhz(DEFAULT_FSR_MHZ),
        qubit_levels=qubit_levels,
        fock_dim=fock_dim,
    )


@dataclass(frozen=True)
class DriveConfig:
    amplitude: float
    frequency: float
    duration: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ConfigError("drive amplitude must be >= 0")
        if self.duration <= 0:
            raise ConfigError("drive duration must be > 0")


@dataclass(frozen=True)
class EffectiveParams:
    chi: float
    lamb_shifted_detuning: float
    displacement_coeff: float
    response_amplitude: float
    spurious_population: float
    dispersive_ratio: float = field(default=0.0)


def build_lab_hamiltonian(
    device: DeviceModel, stark_shift: float = 0.0, reference: float | None = None
) -> Operator:
    """Multimode Jaynes-Cummings Hamiltonian in a frame rotating at ``reference``.

    The rotating frame removes ``reference * N_total`` (N_total commutes with H),
    so only detunings from ``reference`` appear.  ``reference`` defaults to the
    unshifted qubit frequency.
    """
    ref = device.qubit_freq if reference is None else reference
    dims = device.dims
    q = annihilation(device.qubit_levels)
    qd = q.dag()
    h = embed_product({0: qd @ q}, dims) * (device.qubit_freq + stark_shift - ref)
    if device.qubit_levels > 2:
        h = h - embed_product({0: qd @ qd @ q @ q}, dims) * (device.anharmonicity / 2.0)
    a = annihilation(device.fock_dim)
    ad = a.dag()
    for i, (w, g) in enumerate(zip(device.mode_freqs, device.couplings), start=1):
        h = (h + embed_product({i: ad @ a}, dims) * (w - ref)
             + embed_product({0: qd, i: a}, dims) * g + embed_product({0: q, i: ad}, dims) * g)
    return Operator(h.matrix, dims, hermitian=True)


def _qubit_mode_ops(fock_dim: int):
    sm = tensor(annihilation(2), identity(fock_dim))
    a = tensor(identity(2), annihilation(fock_dim))
    sz = sm.dag() @ sm - sm @ sm.dag()  # +1 on |e>, -1 on |g>
    return sm, a, sz


def build_rwa_hamiltonian(device: DeviceModel, drive: DriveConfig, mode: int = 1) -> Operator:
    """Driven single-mode Hamiltonian in the frame of the drive (two-level qubit)."""
    g = device.coupling(mode)
    dq = device.qubit_freq - drive.frequency
    dr = device.mode_freqs[mode - 1] - drive.frequency
    return rwa_hamiltonian(g, dq, dr, drive.amplitude, device.fock_dim)


def rwa_hamiltonian(g: float, qubit_detuning: float, mode_detuning: float, amplitude: float,
                    fock_dim: int) -> Operator:
    sm, a, sz = _qubit_mode_ops(fock_dim)
    sp = sm.dag()
    h = (sz * (qubit_detuning / 2.0) + (a.dag() @ a) * mode_detuning
         + (a @ sp + a.dag() @ sm) * g + (sp + sm) * amplitude)
    return Operator(h.matrix, h.dims, hermitian=True)


def effective_hamiltonian(g: float, qubit_detuning: float, mode_detuning: float, amplitude: float,
                          fock_dim: int) -> Operator:
    """First-order Schrieffer-Wolff Hamiltonian in the dressed basis.

    ``qubit_detuning`` and ``mode_detuning`` are measured from the drive; the
    qubit-mode detuning is their difference.
    """
    delta = qubit_detuning - mode_detuning
    if delta == 0:
        raise DomainError("effective Hamiltonian undefined at zero qubit-mode detuning")
    sm, a, sz = _qubit_mode_ops(fock_dim)
    sp = sm.dag()
    n = a.dag() @ a
    chi = g * g / delta
    h = (sz * ((qubit_detuning + chi) / 2.0) + n * mode_detuning + (n @ sz) * chi
         + (sp + sm) * amplitude + ((a + a.dag()) @ sz) * (g * amplitude / delta))
    return Operator(h.matrix, h.dims, hermitian=True)


def sw_generator(g: float, detuning: float, fock_dim: int) -> Operator:
    """Anti-hermitian generator S with H_eff = exp(S) H exp(-S) to first order."""
    sm, a, _ = _qubit_mode_ops(fock_dim)
    return (a @ sm.dag() - a.dag() @ sm) * (g / detuning)


def schrieffer_wolff_params(g: float, detuning: float, drive_amplitude: float = 0.0,
                            qubit_drive_detuning: float = 0.0) -> EffectiveParams:
    if detuning == 0:
        raise DomainError("dispersive expansion undefined at zero detuning")
    chi = g * g / detuning
    coeff = g * drive_amplitude / detuning
    resp = coeff / detuning
    return EffectiveParams(
        chi=chi,
        lamb_shifted_detuning=qubit_drive_detuning + chi,
        displacement_coeff=coeff,
        response_amplitude=resp,
        spurious_population=resp * resp,
        dispersive_ratio=abs(g / detuning),
    )


def drive_amplitude_for_response(g: float, detuning: float, response: float) -> float:
    """Back-solve the drive amplitude giving response amplitude g*Omega/Delta^2."""
    if detuning == 0 or g == 0:
        raise DomainError("need nonzero g and detuning")
    return response * detuning * detuning / g


def thermal_occupation(temperature: float, frequency: float) -> float:
    """Bose-Einstein occupation at ``temperature`` (K) for angular ``frequency`` (rad/us)."""
    if frequency <= 0:
        raise DomainError("frequency must be positive")
    if temperature < 0:
        raise DomainError("temperature must be non-negative")
    if temperature == 0:
        return 0.0
    x = HBAR * frequency * 1e6 / (K_B * temperature)
    return float(1.0 / np.expm1(x))


def iswap_time(g: float) -> float:
    return math.pi / (2.0 * g)
