"""Hamiltonian constructors for the driven two-level search problem.

The physical family: an n-qubit search Hamiltonian

    H_G(s) = (1-s)(I - |u><u|) + s(I - |y><y|),

with |u> the uniform superposition and |y> the marked computational state,
driven along s(t) = (1 - A cos(omega t))/2.  The span of {|u>, |y>} is
invariant under H_G for every s, so the dynamics reduce exactly to a
two-level problem in the orthonormal "bar" basis

    |0bar> = sqrt((1+xi)/2)|u> + sqrt((1-xi)/2)|uperp>,
    |1bar> = sqrt((1-xi)/2)|u> - sqrt((1+xi)/2)|uperp>,

where xi = sqrt(1-Delta^2), Delta = <y|u> = 2^(-n/2) and |uperp> is the
unit vector orthogonal to |u> in the span.  Additional pieces: a bare
Landau-Zener-Stuckelberg two-level drive, an optional leakage-suppression
modulation -B cos(omega t)|u><u|, a three-level toy extension with an
off-subspace coupling eta, and a harmonic control-error term
A1 cos(omega1 t + phi) sigma_z.

Energies are in units of ``epsilon`` (hbar = 1): the dimensionless cores
built from Delta, A, B, eta are multiplied by epsilon, while omega,
omega1 and A1 are absolute energies.  All entries(t) rules are pure
functions of t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DriveParams",
    "BarBasis",
    "HermitianOperator",
    "gap",
    "control_s",
    "bar_basis",
    "bar_states_full",
    "h_grover_full",
    "h_grover_projected",
    "h_lzs",
    "h_driven_projected",
    "h_three_level",
    "add_sigma_z_error",
]

FULL_DIM_CAP = 12  # dense 2^n builders stop here; beyond it use the reductions

_SZ = np.diag([1.0, -1.0]).astype(complex)


def gap(n: int) -> float:
    """Minimal gap Delta = 2^(-n/2) of the n-qubit search Hamiltonian."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"qubit count must be a positive integer, got {n!r}")
    return 2.0 ** (-0.5 * n)


def control_s(t, a: float, omega: float):
    """Sweep schedule s(t) = (1 - a cos(omega t))/2, guaranteed in [0, 1]."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"drive amplitude must lie in [0, 1], got {a!r}")
    return 0.5 * (1.0 - a * np.cos(omega * np.asarray(t, dtype=float)))


@dataclass(frozen=True)
class DriveParams:
    """All scalars defining one driven-Hamiltonian instance.

    Either ``n`` or ``delta`` must be given; with ``n`` set, delta is
    forced to 2^(-n/2).  ``a`` (sweep amplitude) is dimensionless in
    [0, 1]; ``b`` (modulation amplitude) and ``eta`` (off-subspace
    coupling) are dimensionless; ``a1``, ``omega``, ``omega1`` are
    absolute energies.
    """

    n: Optional[int] = None
    delta: Optional[float] = None
    epsilon: float = 1.0
    a: float = 0.0
    b: float = 0.0
    omega: float = 1.0
    a1: float = 0.0
    omega1: float = 0.0
    phi: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if self.n is not None:
            d = gap(self.n)
            if self.delta is None:
                object.__setattr__(self, "delta", d)
            elif not math.isclose(self.delta, d, rel_tol=1e-12):
                raise ValueError(
                    f"inconsistent parameters: n={self.n} forces delta={d!r}, got {self.delta!r}"
                )
        if self.delta is None:
            raise ValueError("either n or delta must be given")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta!r}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"drive amplitude a must lie in [0, 1], got {self.a!r}")
        if self.omega <= 0.0:
            raise ValueError(f"omega must be positive, got {self.omega!r}")
        if self.omega1 < 0.0:
            raise ValueError(f"omega1 must be non-negative, got {self.omega1!r}")

    @property
    def xi(self) -> float:
        """sqrt(1 - delta^2), the sigma_z projection weight."""
        return math.sqrt(max(0.0, 1.0 - self.delta * self.delta))


@dataclass
class HermitianOperator:
    """A small dense Hermitian matrix with a time-dependence rule.

    entries(t) must be Hermitian for every t.  ``period`` is the exact
    repetition period of entries (None when aperiodic or static);
    ``step_period`` is the shortest drive period and sets integrator
    step density.  ``apply`` is an optional exact fast action
    H(t) @ vec for large dimensions; ``norm_bound`` bounds the spectral
    norm over all t.
    """

    dim: int
    basis_label: str
    entries: Callable[[float], np.ndarray]
    batch_entries: Optional[Callable[[np.ndarray], np.ndarray]] = None
    static: bool = False
    period: Optional[float] = None
    step_period: Optional[float] = None
    norm_bound: Optional[float] = None
    apply: Optional[Callable[[float, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.basis_label not in ("computational", "bar", "three-level"):
            raise ValueError(f"unknown basis label {self.basis_label!r}")
        if self.batch_entries is None:
            single = self.entries
            self.batch_entries = lambda ts: np.stack([single(float(t)) for t in ts])


@dataclass(frozen=True)
class BarBasis:
    """Coefficients of |0bar>, |1bar> on {|u>, |uperp>}."""

    c0u: float
    c0p: float
    c1u: float
    c1p: float
    delta: float

    def image_of_u(self) -> np.ndarray:
        """Coordinates of |u> in the bar basis."""
        return np.array([self.c0u, self.c1u])

    def image_of_y(self) -> np.ndarray:
        """Coordinates of the marked state |y> = delta|u> + xi|uperp>."""
        xi = math.sqrt(max(0.0, 1.0 - self.delta * self.delta))
        return np.array(
            [self.c0u * self.delta + self.c0p * xi, self.c1u * self.delta + self.c1p * xi]
        )


def bar_basis(delta: float) -> BarBasis:
    """Orthonormal basis of the invariant span, exponentially close to (|u>, |y>).

    The signs are fixed by requiring the projected search Hamiltonian to
    take the constant-coupling form (off-diagonal identically -delta/2
    for every schedule value); see h_driven_projected.  As delta -> 0:
    |0bar> -> |u> and |1bar> -> |uperp>.  Useful exact identities:
    c0u*c1u = delta/2, c0u**2 = (1+xi)/2, c1u**2 = (1-xi)/2.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    xi = math.sqrt(max(0.0, 1.0 - delta * delta))
    cos_half = math.sqrt(0.5 * (1.0 + xi))
    # sqrt((1-xi)/2) rewritten to avoid the 1 - xi cancellation at small delta
    sin_half = delta / math.sqrt(2.0 * (1.0 + xi))
    return BarBasis(c0u=cos_half, c0p=-sin_half, c1u=sin_half, c1p=cos_half, delta=delta)


def bar_states_full(n: int, y: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """|0bar>, |1bar> embedded as 2^n computational-basis vectors."""
    N = _check_full_dims(n, y)
    delta = gap(n)
    xi = math.sqrt(1.0 - delta * delta)
    u = np.full(N, 1.0 / math.sqrt(N))
    ey = np.zeros(N)
    ey[y] = 1.0
    uperp = (ey - delta * u) / xi
    bb = bar_basis(delta)
    return bb.c0u * u + bb.c0p * uperp, bb.c1u * u + bb.c1p * uperp


def _check_full_dims(n: int, y: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"qubit count must be a positive integer, got {n!r}")
    if n > FULL_DIM_CAP:
        raise ValueError(
            f"resource limit: full 2^n construction is capped at n={FULL_DIM_CAP} "
            f"(got n={n}); use the projected forms instead"
        )
    N = 2**n
    if not 0 <= y < N:
        raise ValueError(f"marked index y must lie in [0, {N}), got {y!r}")
    return N


def h_grover_full(
    n: int,
    y: int = 0,
    s: Optional[float] = None,
    params: Optional[DriveParams] = None,
) -> HermitianOperator:
    """Full 2^n-dimensional search Hamiltonian, static at s or swept by params.

    H = eps*[(1-s)(I - |u><u|) + s(I - |y><y|)].  Exactly one of ``s``
    (static) and ``params`` (s(t) = control_s) must be given.  When
    params.b is nonzero the modulation term -eps*B cos(omega t)|u><u|
    is included.  The span of {|u>, |y>} is invariant in all cases.
    """
    N = _check_full_dims(n, y)
    if (s is None) == (params is None):
        raise ValueError("give exactly one of s (static) or params (driven)")
    u = np.full(N, 1.0 / math.sqrt(N))
    proj_u = np.outer(u, u)
    if params is not None and params.n is not None and params.n != n:
        raise ValueError(f"params.n={params.n} disagrees with n={n}")
    eps = 1.0 if params is None else params.epsilon

    def matrix_at(sv: float, bc: float = 0.0) -> np.ndarray:
        m = (-eps * (1.0 - sv) - eps * bc) * proj_u
        idx = np.arange(N)
        m[idx, idx] += eps
        m[y, y] -= eps * sv
        return m.astype(complex)

    if s is not None:
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"s must lie in [0, 1], got {s!r}")
        mat = matrix_at(float(s))
        return HermitianOperator(
            dim=N,
            basis_label="computational",
            entries=lambda t, _m=mat: _m,
            static=True,
            norm_bound=eps,
            apply=lambda t, v, _m=mat: _m @ v,
        )

    a, b, omega = params.a, params.b, params.omega

    def entries(t: float) -> np.ndarray:
        return matrix_at(float(control_s(t, a, omega)), b * math.cos(omega * t))

    def apply(t: float, vec: np.ndarray) -> np.ndarray:
        # exact O(N) action: H v = eps*v - eps[(1-s) + B cos]<u|v>|u> - eps*s*v[y]|y>
        sv = float(control_s(t, a, omega))
        bc = b * math.cos(omega * t)
        out = eps * vec.astype(complex, copy=True)
        out -= (eps * ((1.0 - sv) + bc) * np.dot(u, vec)) * u
        out[y] -= eps * sv * vec[y]
        return out

    driven = (a != 0.0) or (b != 0.0)
    return HermitianOperator(
        dim=N,
        basis_label="computational",
        entries=entries,
        static=not driven,
        period=(2.0 * math.pi / omega) if driven else None,
        step_period=(2.0 * math.pi / omega) if driven else None,
        norm_bound=eps * (1.0 + abs(b)),
        apply=apply,
    )


def h_grover_projected(s: float, delta: float, eps: float = 1.0) -> HermitianOperator:
    """Exact projection of the search Hamiltonian onto the invariant span.

    In the bar basis:  eps*[I/2 + (s-1/2) xi sigma_z - (Delta/2) sigma_x],
    with eigenvalues eps*(1/2 +- sqrt(Delta^2 + (2s-1)^2 (1-Delta^2))/2),
    so the gap at s=1/2 is exactly eps*Delta.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s!r}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    xi = math.sqrt(max(0.0, 1.0 - delta * delta))
    zz = (s - 0.5) * xi
    mat = eps * np.array([[0.5 + zz, -0.5 * delta], [-0.5 * delta, 0.5 - zz]], dtype=complex)
    return HermitianOperator(
        dim=2,
        basis_label="bar",
        entries=lambda t, _m=mat: _m,
        static=True,
        norm_bound=eps * (0.5 + abs(zz) + 0.5 * delta),
    )


def h_lzs(params: DriveParams) -> HermitianOperator:
    """Bare two-level avoided-crossing drive.

    (eps/2) * [[-a cos(omega t), -Delta], [-Delta, a cos(omega t)]]:
    avoided crossings of gap eps*Delta whenever cos(omega t) = 0.
    """
    eps, a, omega, delta = params.epsilon, params.a, params.omega, params.delta

    def entries(t: float) -> np.ndarray:
        c = math.cos(omega * t)
        return 0.5 * eps * np.array([[-a * c, -delta], [-delta, a * c]], dtype=complex)

    def batch(ts: np.ndarray) -> np.ndarray:
        c = np.cos(omega * np.asarray(ts, dtype=float))
        out = np.empty((len(c), 2, 2), dtype=complex)
        out[:, 0, 0] = -0.5 * eps * a * c
        out[:, 1, 1] = 0.5 * eps * a * c
        out[:, 0, 1] = out[:, 1, 0] = -0.5 * eps * delta
        return out

    return HermitianOperator(
        dim=2,
        basis_label="computational",
        entries=entries,
        batch_entries=batch,
        static=(a == 0.0),
        period=(2.0 * math.pi / omega) if a != 0.0 else None,
        step_period=(2.0 * math.pi / omega) if a != 0.0 else None,
        norm_bound=0.5 * eps * math.hypot(a, delta),
    )


def _driven_two_level_batch(params: DriveParams, exact: bool):
    """Batched entries rule for the swept and modulated two-level system."""
    eps, a, b, omega = params.epsilon, params.a, params.b, params.omega
    delta, xi = params.delta, params.xi
    bb = bar_basis(delta)
    # exact modulation projector <ibar|u><u|jbar>; note c0u*c1u = Delta/2
    p00, p01, p11 = bb.c0u**2, bb.c0u * bb.c1u, bb.c1u**2

    def batch(ts: np.ndarray) -> np.ndarray:
        c = np.cos(omega * np.asarray(ts, dtype=float))
        out = np.empty((len(c), 2, 2), dtype=complex)
        if exact:
            zz = -0.5 * a * c * xi  # (s - 1/2) xi
            out[:, 0, 0] = eps * (0.5 + zz - b * c * p00)
            out[:, 1, 1] = eps * (0.5 - zz - b * c * p11)
            out[:, 0, 1] = out[:, 1, 0] = eps * (-0.5 * delta - b * c * p01)
        else:
            out[:, 0, 0] = eps * (0.5 - (b + 0.5 * a) * c)
            out[:, 1, 1] = eps * (0.5 + 0.5 * a * c)
            out[:, 0, 1] = out[:, 1, 0] = -0.5 * eps * delta * (b * c + 1.0)
        return out

    return batch


def h_driven_projected(params: DriveParams, exact: bool = True) -> HermitianOperator:
    """Swept two-level search Hamiltonian, optionally with the -B cos(omega t)|u><u| term.

    With exact=True the modulation is projected through bar_basis (the
    span of {|u>, |y>} is invariant under |u><u|, so the projection is
    well defined); with exact=False the conventional truncation that
    drops O(Delta^2) diagonal corrections is used.  The off-diagonal
    -(Delta/2)(B cos(omega t) + 1) is common to both because
    <0bar|u><u|1bar> = c0u*c1u = Delta/2 exactly.  With b=0 and
    exact=True this is h_grover_projected evaluated along control_s(t).
    """
    batch = _driven_two_level_batch(params, exact)
    eps, a, b, delta = params.epsilon, params.a, params.b, params.delta
    driven = (a != 0.0) or (b != 0.0)
    bound = eps * (0.5 + 0.5 * a + abs(b) + 0.5 * delta * (abs(b) + 1.0))
    return HermitianOperator(
        dim=2,
        basis_label="bar",
        entries=lambda t: batch(np.array([t]))[0],
        batch_entries=batch,
        static=not driven,
        period=(2.0 * math.pi / params.omega) if driven else None,
        step_period=(2.0 * math.pi / params.omega) if driven else None,
        norm_bound=bound,
    )


def h_three_level(params: DriveParams, variant: str = "modulated") -> HermitianOperator:
    """Three-level toy model: bar-basis pair plus one off-subspace state.

    variant="modulated": driven two-level block (truncated form) with a
    constant coupling eta between level 0 and the extra level at energy
    eps.  variant="static": the same with the drive frozen at s = 1/2,

        eps * [[1/2, -Delta/2, eta], [-Delta/2, 1/2, 0], [eta, 0, 1]],

    time independent.  O(Delta^2) diagonal corrections are dropped in
    both, matching the regime where the toy model is meaningful.
    """
    if variant not in ("modulated", "static"):
        raise ValueError(f"variant must be 'modulated' or 'static', got {variant!r}")
    eps, a, b, omega = params.epsilon, params.a, params.b, params.omega
    delta, eta = params.delta, params.eta

    if variant == "static":
        mat = eps * np.array(
            [[0.5, -0.5 * delta, eta], [-0.5 * delta, 0.5, 0.0], [eta, 0.0, 1.0]],
            dtype=complex,
        )
        return HermitianOperator(
            dim=3,
            basis_label="three-level",
            entries=lambda t, _m=mat: _m,
            static=True,
            norm_bound=eps * (1.0 + abs(eta) + 0.5 * delta),
        )

    def batch(ts: np.ndarray) -> np.ndarray:
        c = np.cos(omega * np.asarray(ts, dtype=float))
        out = np.zeros((len(c), 3, 3), dtype=complex)
        out[:, 0, 0] = eps * (0.5 - (b + 0.5 * a) * c)
        out[:, 1, 1] = eps * (0.5 + 0.5 * a * c)
        out[:, 2, 2] = eps
        out[:, 0, 1] = out[:, 1, 0] = -0.5 * eps * delta * (b * c + 1.0)
        out[:, 0, 2] = out[:, 2, 0] = eps * eta
        return out

    driven = (a != 0.0) or (b != 0.0)
    bound = eps * (1.0 + 0.5 * a + abs(b) + abs(eta) + 0.5 * delta * (abs(b) + 1.0))
    return HermitianOperator(
        dim=3,
        basis_label="three-level",
        entries=lambda t: batch(np.array([t]))[0],
        batch_entries=batch,
        static=not driven,
        period=(2.0 * math.pi / omega) if driven else None,
        step_period=(2.0 * math.pi / omega) if driven else None,
        norm_bound=bound,
    )


def add_sigma_z_error(
    op: HermitianOperator, a1: float, omega1: float, phi: float = 0.0
) -> HermitianOperator:
    """Add the harmonic control-error term A1 cos(omega1 t + phi) sigma_z.

    Only defined for two-level operators in the bar basis.  A1 is an
    absolute energy (not scaled by epsilon).  With a1=0 the operator is
    returned unchanged.
    """
    if op.dim != 2:
        raise ValueError(f"sigma_z error term needs a two-level operator, got dim {op.dim}")
    if op.basis_label != "bar":
        raise ValueError(f"sigma_z error term is defined in the bar basis, got {op.basis_label!r}")
    if a1 == 0.0:
        return op
    if omega1 < 0.0:
        raise ValueError(f"omega1 must be non-negative, got {omega1!r}")

    base_batch = op.batch_entries

    if omega1 == 0.0:
        shift = a1 * math.cos(phi)

        def batch(ts: np.ndarray) -> np.ndarray:
            out = base_batch(np.asarray(ts, dtype=float)).copy()
            out[:, 0, 0] += shift
            out[:, 1, 1] -= shift
            return out

        return HermitianOperator(
            dim=2,
            basis_label="bar",
            entries=lambda t: batch(np.array([t]))[0],
            batch_entries=batch,
            static=op.static,
            period=op.period,
            step_period=op.step_period,
            norm_bound=(op.norm_bound + abs(shift)) if op.norm_bound else None,
        )

    def batch(ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = base_batch(ts).copy()
        term = a1 * np.cos(omega1 * ts + phi)
        out[:, 0, 0] += term
        out[:, 1, 1] -= term
        return out

    err_period = 2.0 * math.pi / omega1
    if op.static:
        period = err_period
        step_period = err_period
    else:
        # two incommensurate tones in general: no exact common period claimed
        period = None
        step_period = min(op.step_period, err_period) if op.step_period else err_period

    return HermitianOperator(
        dim=2,
        basis_label="bar",
        entries=lambda t: batch(np.array([t]))[0],
        batch_entries=batch,
        static=False,
        period=period,
        step_period=step_period,
        norm_bound=(op.norm_bound + abs(a1)) if op.norm_bound else None,
    )
