"""Reset schedule construction, simulation, RPM emulation and swap-count sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dynamics import (
    DEFAULT_STEP, NoiseModel, Segment, Trajectory, collapse_operators, evolve, thermal_state,
)
from .errors import ConfigError, DomainError
from .model import DeviceModel, build_lab_hamiltonian, iswap_time, mhz
from .qcore import DensityMatrix, Operator, embed_product, number

DEFAULT_MODE_ORDER = (1, 2, 5, 3)


@dataclass(frozen=True)
class ScheduleOptions:
    """Knobs of the reset sequence.

    Frequency jumps between segments are instantaneous.  Each transition is
    preceded by a short ramp pad spent at the midpoint between the departing
    and arriving detunings, a crude stand-in for a finite Stark ramp that
    neither lengthens nor shortens the resonant iSWAP interaction.
    """

    mode_order: tuple[int, ...] = DEFAULT_MODE_ORDER
    prepare_pi_pulse: bool = True
    pi_fidelity: float = 0.966
    park_detuning: float = mhz(-70.0)
    ramp_pad: float = 0.01
    park_hold: float = 0.02

    def __post_init__(self):
        object.__setattr__(self, "mode_order", tuple(int(m) for m in self.mode_order))
        if not 0.0 <= self.pi_fidelity <= 1.0:
            raise ConfigError("pi_fidelity must lie in [0, 1]")
        if self.ramp_pad < 0 or self.park_hold < 0:
            raise ConfigError("ramp_pad and park_hold must be >= 0")
        if len(set(self.mode_order)) != len(self.mode_order):
            raise ConfigError("mode_order must not repeat a mode")


@dataclass(frozen=True)
class ProtocolSchedule:
    segments: tuple[Segment, ...]
    mode_order: tuple[int, ...]
    repetition_wait: float
    prepare_pi_pulse: bool
    pi_pulse_fidelity: float
    roles: tuple[str, ...] = ()
    stark_shifts: tuple[float, ...] = ()

    @property
    def total_duration(self) -> float:
        """Active reset duration (the preparation pulse is instantaneous and excluded)."""
        return float(sum(s.duration for s in self.segments))

    @property
    def iswap_durations(self) -> tuple[float, ...]:
        return tuple(s.duration for s, r in zip(self.segments, self.roles) if r == "iswap")


@dataclass(frozen=True)
class StepRecord:
    label: str
    time: float
    qubit_excited: float
    qubit_levels: tuple[float, ...]
    mode_fock1: tuple[float, ...]


@dataclass
class PopulationReport:
    records: list[StepRecord] = field(default_factory=list)
    p: float = float("nan")
    n_swaps: int = 0
    total_duration: float = 0.0

    @property
    def final(self) -> StepRecord:
        return self.records[-1]


def build_reset_schedule(device: DeviceModel, noise: NoiseModel, n_swaps: int,
                         options: ScheduleOptions | None = None) -> ProtocolSchedule:
    opts = options or ScheduleOptions()
    if n_swaps < 0 or n_swaps > len(opts.mode_order):
        raise ConfigError(f"n_swaps={n_swaps} outside 0..{len(opts.mode_order)} allowed by mode_order")
    order = opts.mode_order[:n_swaps]
    for m in order:
        device.coupling(m)
    targets = [device.mode_detuning(m) for m in order]
    if targets and opts.park_detuning >= min(targets):
        raise ConfigError("park_detuning must lie below every mode used in the sequence")

    base = build_lab_hamiltonian(device)
    qubit_number = embed_product({0: number(device.qubit_levels)}, device.dims).matrix
    cache: dict[float, Operator] = {}

    def ham(shift: float) -> Operator:
        # the Stark shift enters only through shift * n_q
        if shift not in cache:
            cache[shift] = Operator(base.matrix + shift * qubit_number, device.dims, hermitian=True)
        return cache[shift]

    segments, roles, shifts = [], [], []

    def add(shift, duration, label, role):
        segments.append(Segment(ham(shift), duration, label))
        roles.append(role)
        shifts.append(shift)

    prev = 0.0
    for k, (m, target) in enumerate(zip(order, targets), start=1):
        if opts.ramp_pad > 0:
            add(0.5 * (prev + target), opts.ramp_pad, f"ramp-{k}", "ramp")
        add(target, iswap_time(device.coupling(m)), f"iswap-mode-{m}", "iswap")
        prev = target
    if opts.ramp_pad > 0:
        add(0.5 * (prev + opts.park_detuning), opts.ramp_pad, "ramp-park", "ramp")
    add(opts.park_detuning, opts.park_hold, "park", "park")

    if order:
        wait = 6.0 * max(noise.phonon_t1[m - 1] for m in order)
    else:
        wait = 6.0 * noise.qubit_t1
    return ProtocolSchedule(
        segments=tuple(segments),
        mode_order=tuple(order),
        repetition_wait=wait,
        prepare_pi_pulse=opts.prepare_pi_pulse,
        pi_pulse_fidelity=opts.pi_fidelity,
        roles=tuple(roles),
        stark_shifts=tuple(shifts),
    )


def prepare_pi_ge(rho: DensityMatrix, fidelity: float) -> DensityMatrix:
    """Imperfect incoherent g<->e swap on the qubit (subsystem 0).

    Populations map as p_e' = F p_g + (1-F) p_e and vice versa; the g-e
    coherence is discarded.
    """
    if not 0.0 <= fidelity <= 1.0:
        raise DomainError("fidelity must lie in [0, 1]")
    dq = rho.dims[0]
    rest = rho.dim // dq
    blocks = rho.matrix.reshape(dq, rest, dq, rest)
    perm = np.arange(dq)
    perm[0], perm[1] = 1, 0
    swapped = blocks[perm][:, :, perm]
    out = fidelity * swapped + (1.0 - fidelity) * blocks
    out[0, :, 1, :] = 0.0
    out[1, :, 0, :] = 0.0
    return DensityMatrix(out.reshape(rho.dim, rho.dim), rho.dims)


def _populations(rho: DensityMatrix) -> tuple[tuple[float, ...], tuple[float, ...]]:
    diag = rho.diagonal_tensor()
    n = diag.ndim
    levels = diag.sum(axis=tuple(range(1, n)))
    fock1 = []
    for i in range(1, n):
        marg = diag.sum(axis=tuple(j for j in range(n) if j != i))
        fock1.append(float(marg[1]))
    return tuple(float(x) for x in levels), tuple(fock1)


def report_from_trajectory(traj: Trajectory, n_swaps: int = 0, total: float = 0.0) -> PopulationReport:
    rep = PopulationReport(n_swaps=n_swaps, total_duration=total)
    for t, lab, rho in zip(traj.times, traj.segment_labels, traj.states):
        levels, fock1 = _populations(rho)
        rep.records.append(StepRecord(lab, float(t), levels[1], levels, fock1))
    rep.p = rep.records[-1].qubit_excited
    return rep


def initial_state(schedule: ProtocolSchedule, device: DeviceModel, noise: NoiseModel) -> DensityMatrix:
    rho = thermal_state(device, noise)
    if schedule.prepare_pi_pulse:
        rho = prepare_pi_ge(rho, schedule.pi_pulse_fidelity)
    return rho


def simulate_reset(schedule: ProtocolSchedule, device: DeviceModel, noise: NoiseModel,
                   step: float = DEFAULT_STEP, backend: str | None = None,
                   samples_per_segment: int = 0) -> PopulationReport:
    """Evolve the thermal (optionally pi-prepared) state through the schedule."""
    rho0 = initial_state(schedule, device, noise)
    collapse = collapse_operators(device, noise)
    traj = evolve(schedule.segments, rho0, collapse, step,
                  samples_per_segment=samples_per_segment, backend=backend)
    return report_from_trajectory(traj, len(schedule.mode_order), schedule.total_duration)


def simulate_rpm_contrast(source) -> float:
    """Ideal-readout RPM contrast (P_e - P_f) / (P_g - P_f).

    ``source`` may be a PopulationReport (final record), a DensityMatrix
    (qubit first) or a sequence of level populations (P_g, P_e[, P_f]).
    """
    if isinstance(source, PopulationReport):
        levels = source.final.qubit_levels
    elif isinstance(source, DensityMatrix):
        levels, _ = _populations(source)
    else:
        levels = tuple(float(x) for x in source)
    pg, pe = levels[0], levels[1]
    pf = levels[2] if len(levels) > 2 else 0.0
    den = pg - pf
    if abs(den) < 1e-6:
        raise DomainError("degenerate RPM reference: P_g - P_f below 1e-6")
    return (pe - pf) / den


@dataclass
class SweepRow:
    n_swaps: int
    p: float
    total_duration: float
    reference: float | None = None
    report: PopulationReport | None = None


def sweep_swap_count(device: DeviceModel, noise: NoiseModel, n_range: Sequence[int] = range(5),
                     options: ScheduleOptions | None = None, step: float = DEFAULT_STEP,
                     reference: Mapping[int, float] | None = None,
                     backend: str | None = None) -> list[SweepRow]:
    """Residual population for each swap count.

    The n-swap schedule is a prefix of the n_max schedule followed by its own park
    tail, so the prefix is integrated once and each count branches off it.
    """
    opts = options or ScheduleOptions()
    counts = sorted(set(int(n) for n in n_range))
    if not counts or counts[0] < 0:
        raise ConfigError("swap counts must be non-negative")
    n_max = counts[-1]
    full = build_reset_schedule(device, noise, n_max, opts)
    collapse = collapse_operators(device, noise)
    rho0 = initial_state(full, device, noise)

    # prefix = everything before the park ramp / park hold
    n_prefix = next(i for i, s in enumerate(full.segments) if s.label in ("ramp-park", "park"))
    prefix = full.segments[:n_prefix]
    traj = evolve(prefix, rho0, collapse, step, backend=backend)
    # snapshot index after each iSWAP (evolve skips zero-length segments)
    after_swap = {0: (0, rho0)}
    snap = 0
    k = 0
    for seg, role in zip(prefix, full.roles[:n_prefix]):
        if seg.duration > 0:
            snap += 1
        if role == "iswap":
            k += 1
            after_swap[k] = (snap, traj.states[snap])

    rows = []
    for n in counts:
        sched = build_reset_schedule(device, noise, n, opts)
        tail_start = next(i for i, s in enumerate(sched.segments)
                          if s.label in ("ramp-park", "park"))
        snap_idx, rho_n = after_swap[n]
        tail = evolve(sched.segments[tail_start:], rho_n, collapse, step, backend=backend)
        head = Trajectory(traj.times[:snap_idx + 1], traj.states[:snap_idx + 1],
                          traj.segment_labels[:snap_idx + 1])
        t0 = head.times[-1]
        merged = Trajectory(
            head.times + [t0 + t for t in tail.times[1:]],
            head.states + tail.states[1:],
            head.segment_labels + tail.segment_labels[1:],
        )
        rep = report_from_trajectory(merged, n, sched.total_duration)
        ref = None if reference is None else reference.get(n)
        rows.append(SweepRow(n, rep.p, sched.total_duration, ref, rep))
    return rows


def is_non_increasing(values: Sequence[float], slack: float = 0.0) -> bool:
    return all(b <= a + slack for a, b in zip(values, values[1:]))
