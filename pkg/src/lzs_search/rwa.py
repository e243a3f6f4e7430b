"""Rotating-wave effective models for the driven two- and three-level systems.

In a frame rotating with the accumulated diagonal phase, a periodically
swept two-level system has coupling Delta/2 multiplied by
exp(i z sin(omega t)), which the generating identity

    exp(i z sin g) = sum_k J_k(z) exp(i k g)

turns into a Bessel ladder of harmonics.  Keeping only the slow terms
gives closed-form Rabi rates; keeping the ladder gives truncated
effective Hamiltonians (EffectiveHamiltonian) whose near-resonant
harmonics are detected and reported rather than silently averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .bessel import bessel_j, j0_roots
from .hamiltonians import DriveParams

__all__ = [
    "EffectiveHamiltonian",
    "rabi_frequency_lzs",
    "rabi_frequency_algB",
    "rabi_frequency_noisy_half",
    "cdt_design_omega",
    "effective_h_noisy_algB",
    "effective_h_three_level",
]

_DROP_TOL = 1e-8


@dataclass
class EffectiveHamiltonian:
    """Truncated rotating-frame Hamiltonian.

    ``entries(t)`` evaluates the retained-harmonic matrix;  ``matrix``
    is set instead of varying in time when the model is static.
    ``resonances`` lists (k, k1, detuning) harmonic pairs whose net
    frequency k1*omega1 - k*omega is at or near zero: such terms do not
    average out.  Exactly-DC pairs (detuning 0, commensurate drives)
    are included in static_part(); near-DC pairs stay oscillatory in
    entries(t).  Either way a nonempty list means the bare J0*J0
    picture underdescribes the dynamics.
    """

    dim: int
    truncation: int
    entries: Callable[[float], np.ndarray]
    matrix: Optional[np.ndarray] = None
    resonances: tuple = ()
    _dc: Optional[np.ndarray] = field(default=None, repr=False)

    def static_part(self) -> np.ndarray:
        """The exactly time-independent component of the retained sum."""
        if self.matrix is not None:
            return self.matrix
        assert self._dc is not None
        return self._dc


def rabi_frequency_lzs(delta: float, a: float, omega: float, eps: float = 1.0) -> float:
    """Rabi rate of the swept search system: eps*Delta*|J0(A*eps*xi/omega)|.

    The xi = sqrt(1-Delta^2) factor is the exact sweep amplitude of the
    projected search drive; it tends to 1 for small gaps.  Valid for
    omega >> Delta (not enforced).
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    if omega <= 0.0 or eps <= 0.0:
        raise ValueError("omega and eps must be positive")
    xi = math.sqrt(1.0 - delta * delta)
    return eps * delta * abs(bessel_j(0, a * eps * xi / omega))


def rabi_frequency_algB(delta: float, a: float, b: float, omega: float) -> float:
    """Rabi rate of the modulated algorithm: Delta*|J0((A+B)/omega)|."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    return delta * abs(bessel_j(0, (a + b) / omega))


def rabi_frequency_noisy_half(delta: float, a1: float, omega1: float) -> float:
    """Rabi rate of the static midpoint Hamiltonian under a harmonic
    diagonal error of amplitude A1 and frequency omega1 >> Delta:
    Delta*|J0(A1/omega1)|.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    if a1 == 0.0:
        return delta
    if omega1 <= 0.0:
        raise ValueError("omega1 must be positive when a1 is nonzero")
    return delta * abs(bessel_j(0, a1 / omega1))


def cdt_design_omega(a: float, b: float, root_index: int = 1) -> float:
    """Drive frequency placing (B + A/2)/omega on the given J0 root.

    At that frequency the effective coupling out of the invariant pair
    vanishes (coherent destruction of tunneling) while the search
    transition keeps rate ~ Delta*|J0((A+B)/omega)|.
    """
    if not isinstance(root_index, (int, np.integer)) or isinstance(root_index, bool):
        raise ValueError(f"root_index must be an integer, got {root_index!r}")
    if root_index < 1:
        raise ValueError(f"root_index must be >= 1, got {root_index}")
    return (b + 0.5 * a) / j0_roots(root_index)[-1]


def _adaptive_truncation(z: float, tol: float = _DROP_TOL) -> int:
    """Smallest K with |J_k(z)| < tol for every |k| > K."""
    k = max(1, int(math.ceil(abs(z))))
    small = 0
    while small < 2:
        k += 1
        if abs(bessel_j(k, z)) < tol:
            small += 1
        else:
            small = 0
    return k - 2


def _detect_resonances(omega: float, omega1: float, trunc: int):
    """Harmonic pairs with k1*omega1 ~ k*omega, via a rational fit of omega1/omega."""
    if omega1 <= 0.0:
        return ()
    frac = Fraction(omega1 / omega).limit_denominator(32)
    p, q = frac.numerator, frac.denominator
    if p == 0 or abs(omega1 / omega - p / q) > 1e-3:
        return ()
    found = []
    m = 1
    while m * q <= trunc and m * p <= trunc:
        for sign in (1, -1):
            k, k1 = sign * m * p, sign * m * q
            found.append((k, k1, k1 * omega1 - k * omega))
        m += 1
    return tuple(found)


def effective_h_noisy_algB(
    params: DriveParams, truncation: Optional[int] = None
) -> EffectiveHamiltonian:
    """Rotating-frame Hamiltonian of the modulated drive with diagonal error.

    Off-diagonal -(eps*Delta/2)(B cos(omega t) + 1) * chi(t) with

        chi = sum_{k,k1} J_k((A+B)/omega) J_{k1}(2A1/omega1)
                  exp(i k1 (omega1 t + phi) - i k omega t),

    truncated at |k|, |k1| <= K.  K defaults to the smallest value
    keeping every dropped product below 1e-8.  static_part() collects
    the exactly-DC terms (including the B cos sideband shifts);
    near-resonant pairs are reported in ``resonances``.
    """
    eps, a, b, omega = params.epsilon, params.a, params.b, params.omega
    a1, omega1, phi = params.a1, params.omega1, params.phi
    delta = params.delta
    if a1 != 0.0 and omega1 <= 0.0:
        raise ValueError("omega1 must be positive when a1 is nonzero")

    z1 = (a + b) / omega
    z2 = 2.0 * a1 / omega1 if omega1 > 0.0 else 0.0
    if truncation is None:
        truncation = max(_adaptive_truncation(z1), _adaptive_truncation(z2))
    k_rng = np.arange(-truncation, truncation + 1)

    jk = np.array([bessel_j(int(k), z1) for k in k_rng])
    jk1 = np.array([bessel_j(int(k), z2) for k in k_rng])
    kk, kk1 = np.meshgrid(k_rng, k_rng, indexing="ij")
    coeff = (jk[:, None] * jk1[None, :]).ravel()
    kk, kk1 = kk.ravel(), kk1.ravel()
    keep = np.abs(coeff) >= _DROP_TOL * 1e-3
    coeff, kk, kk1 = coeff[keep], kk[keep], kk1[keep]
    freqs = kk1 * omega1 - kk * omega
    phase0 = kk1 * phi
    scale = -0.5 * eps * delta

    def entries(t: float) -> np.ndarray:
        chi = np.sum(coeff * np.exp(1j * (freqs * t + phase0)))
        off = scale * (b * math.cos(omega * t) + 1.0) * chi
        return np.array([[0.0, off], [np.conj(off), 0.0]], dtype=complex)

    # DC part: each chi term contributes at freq, and at freq -+ omega
    # through B cos(omega t) with weight B/2
    child_freqs = np.concatenate([freqs, freqs + omega, freqs - omega])
    child_amps = np.concatenate([coeff * np.exp(1j * phase0),
                                 0.5 * b * coeff * np.exp(1j * phase0),
                                 0.5 * b * coeff * np.exp(1j * phase0)])
    dc_off = scale * np.sum(child_amps[np.abs(child_freqs) < 1e-9 * omega])
    dc = np.array([[0.0, dc_off], [np.conj(dc_off), 0.0]], dtype=complex)

    return EffectiveHamiltonian(
        dim=2,
        truncation=truncation,
        entries=entries,
        resonances=_detect_resonances(omega, omega1, truncation),
        _dc=dc,
    )


def effective_h_three_level(params: DriveParams) -> EffectiveHamiltonian:
    """Static rotating-frame model of the modulated three-level system.

    [[0, -(Delta/2) J0((B+A)/w), eta J0((B+A/2)/w)],
     [., 0, 0],
     [., 0, 1/2]] * eps.

    The 0<->2 coupling vanishes when (B+A/2)/omega is a J0 root while
    the 0<->1 search coupling is only reduced by J0((B+A)/omega).
    """
    eps, a, b, omega = params.epsilon, params.a, params.b, params.omega
    delta, eta = params.delta, params.eta
    c01 = -0.5 * delta * bessel_j(0, (b + a) / omega)
    c02 = eta * bessel_j(0, (b + 0.5 * a) / omega)
    mat = eps * np.array(
        [[0.0, c01, c02], [c01, 0.0, 0.0], [c02, 0.0, 0.5]], dtype=complex
    )
    return EffectiveHamiltonian(
        dim=3,
        truncation=0,
        entries=lambda t, _m=mat: _m,
        matrix=mat,
    )
