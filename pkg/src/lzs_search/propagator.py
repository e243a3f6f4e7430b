"""Unitary propagation of the driven Hamiltonians.

The integrator is the exponential midpoint rule (second-order Magnus):
each step applies exp(-i h H(t_mid)), evaluated in closed form for
dim 2 (axis-angle) and by eigendecomposition for dim 3, so every step
is exactly unitary and the global error is O(h^2).  A commutator-free
fourth-order variant (two exponentials per step, Gauss nodes) is
available as StepControl(order=4) for very long windows.

Step density follows the fastest drive period (default 512 steps per
period, floor 64) and is additionally capped so the estimated local
error per step stays below StepControl.tolerance.  Strictly periodic
single-tone operators reuse the one-period step unitaries and their
ordered product across periods; this regroups the identical floating
products and makes 1e5-period windows cheap.  Populations are recorded
every record_stride steps (default: every step), sparse state
snapshots every snapshot_stride steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hamiltonians import HermitianOperator

__all__ = [
    "StateVector",
    "Trajectory",
    "StepControl",
    "InsufficientDataError",
    "basis_state",
    "steps_per_period",
    "propagate",
    "population",
    "max_population",
    "measure_rabi_frequency",
]

_NORM_TOL = 1e-10
_GAUSS_SHIFT = math.sqrt(3.0) / 6.0
_CF4_A1 = 0.25 + _GAUSS_SHIFT  # early-node weight of the first (rightmost) exponential
_CF4_A2 = 0.25 - _GAUSS_SHIFT


class InsufficientDataError(RuntimeError):
    """Raised when a trajectory does not contain enough oscillations to measure."""


@dataclass
class StateVector:
    """Normalized complex amplitudes in a declared basis."""

    amplitudes: np.ndarray
    basis_label: str

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(dim: int, index: int, basis_label: str) -> StateVector:
    """The index-th basis vector as a StateVector."""
    if not 0 <= index < dim:
        raise ValueError(f"index {index} outside dimension {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps, basis_label)


@dataclass
class Trajectory:
    """Time grid, per-step basis populations, and sparse state snapshots.

    For dim <= 3 the recorded complex amplitudes are kept as well
    (``amplitudes``), so derived populations such as the overlap with a
    rotated target state can be formed after the fact.
    """

    times: np.ndarray
    populations: np.ndarray
    basis_label: str
    final_state: StateVector
    snapshot_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    snapshot_states: np.ndarray = field(default_factory=lambda: np.empty((0, 0), dtype=complex))
    amplitudes: Optional[np.ndarray] = None


@dataclass
class StepControl:
    """Integrator controls; defaults match the module contract."""

    steps_per_drive_period: int = 512
    order: int = 2
    tolerance: float = 1e-6
    record_stride: int = 1
    snapshot_stride: int = 64

    def __post_init__(self):
        if self.steps_per_drive_period < 64:
            raise ValueError(
                f"steps_per_drive_period must be >= 64, got {self.steps_per_drive_period}"
            )
        if self.order not in (2, 4):
            raise ValueError(f"order must be 2 or 4, got {self.order}")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.record_stride < 1 or self.snapshot_stride < 1:
            raise ValueError("strides must be >= 1")


# ---------------------------------------------------------------------------
# step unitaries


def _expm_batch(hmats: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """exp(-i h H) for a stack of small Hermitian matrices."""
    d = hmats.shape[-1]
    if d == 2:
        c0 = 0.5 * (hmats[:, 0, 0] + hmats[:, 1, 1]).real
        dz = 0.5 * (hmats[:, 0, 0] - hmats[:, 1, 1]).real
        dx = hmats[:, 0, 1].real
        dy = -hmats[:, 0, 1].imag
        r = np.sqrt(dx * dx + dy * dy + dz * dz)
        theta = hs * r
        # sin(theta)/r with the r -> 0 limit h built in
        s = hs * np.sinc(theta / np.pi)
        phase = np.exp(-1j * hs * c0)
        u = np.empty_like(hmats)
        cos_t = np.cos(theta)
        u[:, 0, 0] = phase * (cos_t - 1j * s * dz)
        u[:, 1, 1] = phase * (cos_t + 1j * s * dz)
        u[:, 0, 1] = phase * (-1j * s * (dx - 1j * dy))
        u[:, 1, 0] = phase * (-1j * s * (dx + 1j * dy))
        return u
    w, v = np.linalg.eigh(hmats)
    ph = np.exp(-1j * hs[:, None] * w)
    return (v * ph[:, None, :]) @ v.conj().swapaxes(-1, -2)


def _step_unitaries(op: HermitianOperator, starts: np.ndarray, hs: np.ndarray, order: int):
    """Step propagators over [start, start+h] for each start."""
    if order == 2:
        return _expm_batch(op.batch_entries(starts + 0.5 * hs), hs)
    ha = op.batch_entries(starts + (0.5 - _GAUSS_SHIFT) * hs)
    hb = op.batch_entries(starts + (0.5 + _GAUSS_SHIFT) * hs)
    early = _CF4_A1 * ha + _CF4_A2 * hb
    late = _CF4_A2 * ha + _CF4_A1 * hb
    return _expm_batch(late, hs) @ _expm_batch(early, hs)


# ---------------------------------------------------------------------------
# grid selection


def _norm_estimate(op: HermitianOperator, t0: float, t1: float) -> float:
    if op.norm_bound is not None:
        return op.norm_bound
    ts = np.linspace(t0, t1, 33)
    mats = op.batch_entries(ts)
    return float(np.abs(np.linalg.eigvalsh(mats)).max()) * 1.05


def _pick_step(op: HermitianOperator, t0: float, t1: float, ctl: StepControl) -> float:
    tper = op.step_period
    if tper is None:
        tper = t1 - t0
    bound = _norm_estimate(op, t0, t1)
    if ctl.order == 4:
        hcap = (720.0 * ctl.tolerance) ** 0.2 / max(bound, 1e-300)
    else:
        hcap = (24.0 * ctl.tolerance) ** (1.0 / 3.0) / max(bound, 1e-300)
    steps = max(ctl.steps_per_drive_period, int(math.ceil(tper / hcap)))
    return tper / steps


# ---------------------------------------------------------------------------
# trajectory assembly


class _Recorder:
    """Collects populations at strided positions and sparse snapshots."""

    def __init__(self, total_steps: int, dim: int, ctl: StepControl, t0: float, h: float, t1: float):
        self.rs = ctl.record_stride
        self.snap = ctl.snapshot_stride
        # keep the snapshot count desk-scale for very long windows
        while total_steps // self.snap > 2048:
            self.snap *= 2
        pos = np.arange(0, total_steps + 1, self.rs)
        if pos[-1] != total_steps:
            pos = np.append(pos, total_steps)
        self.positions = pos
        self.index_of = {int(p): i for i, p in enumerate(pos)}
        self.pops = np.empty((len(pos), dim))
        self.amps = np.empty((len(pos), dim), dtype=complex) if dim <= 3 else None
        self.times = t0 + pos * h
        self.times[-1] = t1
        self.snap_pos: list[int] = []
        self.snap_states: list[np.ndarray] = []

    def record_pop(self, position: int, amps: np.ndarray):
        i = self.index_of.get(int(position))
        if i is not None:
            self.pops[i] = amps.real**2 + amps.imag**2
            if self.amps is not None:
                self.amps[i] = amps

    def record_pop_rows(self, positions: np.ndarray, amps: np.ndarray):
        """positions must all be multiples of record_stride within range."""
        idx = positions // self.rs
        self.pops[idx] = amps.real**2 + amps.imag**2
        if self.amps is not None:
            self.amps[idx] = amps

    def maybe_snapshot(self, position: int, amps: np.ndarray):
        if position > 0 and position % self.snap == 0:
            self.snap_pos.append(position)
            self.snap_states.append(amps.copy())

    def build(self, basis_label: str, final_amps: np.ndarray, t0: float, h: float) -> Trajectory:
        if self.snap_pos:
            order = np.argsort(self.snap_pos)
            st = np.array([self.snap_pos[i] for i in order], dtype=float) * h + t0
            ss = np.stack([self.snap_states[i] for i in order])
        else:
            st = np.empty(0)
            ss = np.empty((0, self.pops.shape[1]), dtype=complex)
        return Trajectory(
            times=self.times,
            populations=self.pops,
            basis_label=basis_label,
            final_state=StateVector(final_amps, basis_label),
            snapshot_times=st,
            snapshot_states=ss,
            amplitudes=self.amps,
        )


# ---------------------------------------------------------------------------
# propagation paths


def _scan_block(unitaries: np.ndarray, start: np.ndarray, base_pos: int, rec: _Recorder):
    """Apply a block of step unitaries, recording along the way.

    Returns the state after the block.  Uses a two-pass chunked scan so
    the sequential work is vectorized across chunks.
    """
    k, d = unitaries.shape[0], unitaries.shape[-1]
    L = 256
    c = (k + L - 1) // L
    padded = k != c * L
    if padded:
        u = np.empty((c * L, d, d), dtype=complex)
        u[:k] = unitaries
        u[k:] = np.eye(d)
    else:
        u = unitaries
    u = u.reshape(c, L, d, d)

    prod = np.broadcast_to(np.eye(d, dtype=complex), (c, d, d)).copy()
    for l in range(L):
        prod = u[:, l] @ prod
    bounds = np.empty((c + 1, d), dtype=complex)
    bounds[0] = start
    for i in range(c):
        bounds[i + 1] = prod[i] @ bounds[i]

    states = bounds[:-1].copy()
    rs, snap = rec.rs, rec.snap
    for l in range(L):
        states = np.einsum("cij,cj->ci", u[:, l], states)
        pos = base_pos + 1 + l + L * np.arange(c)
        ok = pos <= base_pos + k
        sel = ok & (pos % rs == 0)
        if sel.any():
            rec.record_pop_rows(pos[sel], states[sel])
        ssel = ok & (pos % snap == 0)
        for j in np.nonzero(ssel)[0]:
            rec.snap_pos.append(int(pos[j]))
            rec.snap_states.append(states[j].copy())
    return bounds[-1]


def _propagate_small(op, amps0, t0, t1, h, ctl) -> Trajectory:
    span = t1 - t0
    k = max(1, int(math.ceil(span / h - 1e-9)))
    h = span / k  # uniform steps covering the window exactly
    rec = _Recorder(k, op.dim, ctl, t0, h, t1)
    rec.record_pop(0, amps0)
    state = amps0
    block = 1 << 17
    for i0 in range(0, k, block):
        i1 = min(i0 + block, k)
        starts = t0 + h * np.arange(i0, i1, dtype=float)
        u = _step_unitaries(op, starts, np.full(i1 - i0, h), ctl.order)
        state = _scan_block(u, state, i0, rec)
    rec.record_pop(k, state)
    return rec.build(op.basis_label, state, t0, h)


def _propagate_periodic(op, amps0, t0, t1, h, ctl) -> Trajectory:
    """Single-tone periodic drive: one period of unitaries, reused."""
    tper = op.period
    s = int(round(tper / h))
    h = tper / s
    m = int((t1 - t0) / tper + 1e-12)
    rem = (t1 - t0) - m * tper
    r = max(0, int(math.ceil(rem / h - 1e-9)))
    k = m * s + r
    rs = ctl.record_stride
    while s % rs:
        rs -= 1  # stride must divide the period for strided assembly
    ctl_eff = StepControl(
        steps_per_drive_period=ctl.steps_per_drive_period,
        order=ctl.order,
        tolerance=ctl.tolerance,
        record_stride=rs,
        snapshot_stride=ctl.snapshot_stride,
    )
    rec = _Recorder(k, op.dim, ctl_eff, t0, h, t1)
    rec.record_pop(0, amps0)

    starts = t0 + h * np.arange(s, dtype=float)
    u = _step_unitaries(op, starts, np.full(s, h), ctl.order)
    prefix = np.empty((s + 1, op.dim, op.dim), dtype=complex)
    prefix[0] = np.eye(op.dim)
    for j in range(s):
        prefix[j + 1] = u[j] @ prefix[j]

    bounds = np.empty((m + 1, op.dim), dtype=complex)
    bounds[0] = amps0
    per_map = prefix[s]
    for i in range(m):
        bounds[i + 1] = per_map @ bounds[i]

    sr = s // rs
    if m:
        for jr in range(1, sr + 1):
            j = jr * rs
            amps = bounds[:-1] @ prefix[j].T if j < s else bounds[1:]
            positions = j + s * np.arange(m)
            rec.record_pop_rows(positions, amps)
    # sparse snapshots: period boundaries, thinned
    stride = max(1, (m + 1) // 1024)
    for i in range(stride, m + 1, stride):
        rec.snap_pos.append(i * s)
        rec.snap_states.append(bounds[i].copy())

    state = bounds[m]
    if r:
        ur = u[:r].copy()
        if r * h > rem + 1e-12 * tper:  # shorten the final step to land on t1
            h_last = rem - (r - 1) * h
            ur[r - 1] = _step_unitaries(
                op, np.array([t0 + (r - 1) * h]), np.array([h_last]), ctl.order
            )[0]
        state = _scan_block(ur, state, m * s, rec)
    rec.record_pop(k, state)
    return rec.build(op.basis_label, state, t0, h)


def _propagate_static(op, amps0, t0, t1, ctl) -> Trajectory:
    hmat = op.entries(t0)
    w, v = np.linalg.eigh(hmat)
    spread = float(w[-1] - w[0])
    span = t1 - t0
    k = int(math.ceil(span * spread * 16.0 / (2.0 * math.pi)))
    k = min(max(k, 512), 2_000_000)
    rec = _Recorder(k, op.dim, ctl, t0, span / k, t1)
    taus = rec.times - t0
    coeff = v.conj().T @ amps0
    amps = (np.exp(-1j * np.outer(taus, w)) * coeff) @ v.T
    rec.pops[:] = amps.real**2 + amps.imag**2
    if rec.amps is not None:
        rec.amps[:] = amps
    snap_positions = rec.positions[(rec.positions > 0) & (rec.positions % rec.snap == 0)]
    for p in snap_positions:
        rec.snap_pos.append(int(p))
        rec.snap_states.append(amps[rec.index_of[int(p)]])
    return rec.build(op.basis_label, amps[-1], t0, span / k)


def _apply_h(op, t, vec):
    if op.apply is not None:
        return op.apply(t, vec)
    return op.entries(t) @ vec


def _expmv(op, t, h, vec, bound):
    """exp(-i h H(t)) vec by substepped Taylor series, accurate to ~1e-15."""
    nsub = max(1, int(math.ceil(abs(h) * bound / 0.5)))
    hs = h / nsub
    for _ in range(nsub):
        term = vec
        out = vec.copy()
        for k in range(1, 64):
            term = _apply_h(op, t, term) * (-1j * hs / k)
            out = out + term
            if float(np.linalg.norm(term)) < 1e-16:
                break
        vec = out
    return vec


def _propagate_large(op, amps0, t0, t1, h, ctl) -> Trajectory:
    span = t1 - t0
    k = max(1, int(math.ceil(span / h - 1e-9)))
    h = span / k
    bound = _norm_estimate(op, t0, t1)
    rec = _Recorder(k, op.dim, ctl, t0, h, t1)
    rec.record_pop(0, amps0)
    state = amps0.astype(complex)
    for i in range(k):
        ts = t0 + i * h
        if ctl.order == 2:
            state = _expmv(op, ts + 0.5 * h, h, state, bound)
        else:
            # commutator-free order 4 needs the combined-node matrices
            ha = op.entries(ts + (0.5 - _GAUSS_SHIFT) * h)
            hb = op.entries(ts + (0.5 + _GAUSS_SHIFT) * h)
            early = _CF4_A1 * ha + _CF4_A2 * hb
            late = _CF4_A2 * ha + _CF4_A1 * hb
            tmp = HermitianOperator(op.dim, op.basis_label, lambda t, m=early: m)
            state = _expmv(tmp, 0.0, h, state, bound)
            tmp = HermitianOperator(op.dim, op.basis_label, lambda t, m=late: m)
            state = _expmv(tmp, 0.0, h, state, bound)
        rec.record_pop(i + 1, state)
        rec.maybe_snapshot(i + 1, state)
    return rec.build(op.basis_label, state, t0, h)


def steps_per_period(op: HermitianOperator, ctl: Optional[StepControl] = None) -> int:
    """Number of integrator steps taken per drive step-period.

    Useful for choosing a stroboscopic record_stride.
    """
    if op.step_period is None:
        raise ValueError("operator has no step period")
    if ctl is None:
        ctl = StepControl()
    h = _pick_step(op, 0.0, op.step_period, ctl)
    return int(round(op.step_period / h))


def propagate(
    op: HermitianOperator,
    psi0: StateVector,
    t0: float,
    t1: float,
    ctl: Optional[StepControl] = None,
) -> Trajectory:
    """Integrate i d/dt psi = H(t) psi over [t0, t1].

    psi0 must be normalized and carry the operator's basis label.  The
    returned trajectory stores populations on the step grid (possibly
    strided, see StepControl) and the exact final state.
    """
    if ctl is None:
        ctl = StepControl()
    if psi0.basis_label != op.basis_label:
        raise ValueError(
            f"basis mismatch: state is {psi0.basis_label!r}, operator is {op.basis_label!r}"
        )
    amps0 = np.asarray(psi0.amplitudes, dtype=complex)
    if amps0.shape != (op.dim,):
        raise ValueError(f"state dimension {amps0.shape} does not match operator dim {op.dim}")
    if abs(psi0.norm - 1.0) > _NORM_TOL:
        raise ValueError(f"state not normalized: |psi| = {psi0.norm!r}")
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got [{t0!r}, {t1!r}]")

    if op.static:
        return _propagate_static(op, amps0, t0, t1, ctl)
    h = _pick_step(op, t0, t1, ctl)
    if op.dim <= 3:
        if (
            op.period is not None
            and op.step_period == op.period
            and (t1 - t0) >= 2.0 * op.period
        ):
            return _propagate_periodic(op, amps0, t0, t1, h, ctl)
        return _propagate_small(op, amps0, t0, t1, h, ctl)
    return _propagate_large(op, amps0, t0, t1, h, ctl)


# ---------------------------------------------------------------------------
# observables


def population(traj: Trajectory, state_index: int, t: float) -> float:
    """Linearly interpolated population of one basis state at time t."""
    times = traj.times
    if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
        raise ValueError(f"time {t!r} outside trajectory range [{times[0]}, {times[-1]}]")
    return float(np.interp(t, times, traj.populations[:, state_index]))


def max_population(traj: Trajectory, state_index: int) -> tuple[float, float]:
    """(max population, time at which it occurs) over the stored grid."""
    col = traj.populations[:, state_index]
    i = int(np.argmax(col))
    return float(col[i]), float(traj.times[i])


def _crossings(times: np.ndarray, x: np.ndarray, ascending: bool) -> np.ndarray:
    if ascending:
        hit = (x[:-1] < 0.0) & (x[1:] >= 0.0)
    else:
        hit = (x[:-1] > 0.0) & (x[1:] <= 0.0)
    idx = np.nonzero(hit)[0]
    frac = x[idx] / (x[idx] - x[idx + 1])
    return times[idx] + frac * (times[idx + 1] - times[idx])


def _merge_jitter(crossings: np.ndarray) -> np.ndarray:
    """Merge crossing clusters produced by fast micro-oscillation."""
    if len(crossings) < 3:
        return crossings
    gaps = np.diff(crossings)
    med = float(np.median(gaps))
    out = [crossings[0]]
    group = [crossings[0]]
    for c in crossings[1:]:
        if c - group[-1] < 0.5 * med:
            group.append(c)
            out[-1] = float(np.mean(group))
        else:
            group = [c]
            out.append(c)
    return np.asarray(out)


def measure_rabi_frequency(traj: Trajectory, state_index: int) -> float:
    """Oscillation frequency of one population, from mean-crossing spacing.

    The population of a Rabi flop evolves as sin^2(Omega t / 2), whose
    period is 2 pi / Omega; Omega is returned.  Requires at least two
    full oscillations in the trajectory.
    """
    p = traj.populations[:, state_index]
    x = p - float(np.mean(p))
    periods = []
    for ascending in (True, False):
        c = _merge_jitter(_crossings(traj.times, x, ascending))
        if len(c) >= 2:
            periods.extend(np.diff(c).tolist())
    if len(periods) < 2:
        raise InsufficientDataError(
            "need at least two full population oscillations to extract a frequency"
        )
    period = float(np.mean(periods))
    if period <= 0.0:
        raise InsufficientDataError("degenerate crossing spacing")
    return 2.0 * math.pi / period
