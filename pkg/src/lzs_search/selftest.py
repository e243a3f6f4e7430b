"""Built-in verification suite behind the ``selftest`` subcommand.

Each check exercises one documented example or invariant of the
package against frozen reference values (high-precision Bessel
constants, closed-form rotations, convergence ratios).  All checks are
deterministic and desk-scale; the whole suite runs in a few seconds.
"""

from __future__ import annotations

import math
import os
import sys
import tempfile
from typing import Callable, List, Optional, Tuple

import numpy as np

from .bessel import bessel_j, j0_roots
from .hamiltonians import (
    DriveParams,
    bar_basis,
    bar_states_full,
    gap,
    h_driven_projected,
    h_grover_full,
    h_grover_projected,
    h_lzs,
    h_three_level,
)
from .propagator import (
    StateVector,
    StepControl,
    basis_state,
    max_population,
    measure_rabi_frequency,
    propagate,
)
from .rwa import (
    cdt_design_omega,
    effective_h_noisy_algB,
    effective_h_three_level,
    rabi_frequency_algB,
    rabi_frequency_lzs,
    rabi_frequency_noisy_half,
)
from .experiments import Axis, double_crossing_scan, grover_run, runtime_scaling, success_time

__all__ = ["run_selftest"]

# High-precision references (25-digit arithmetic, independent of the
# series/recurrence implementation under test).
_J0_1 = 0.76519768655796655
_J1_2P5 = 0.49709410246427404
_J2_3P5 = 0.45862918419430748
_J0_0P05 = 0.99937509764946858
_J0_ROOTS = (2.4048255576957728, 5.5200781102863106, 8.6537279129110122)
_LZS_RABI_FACTOR_W0P5 = 0.22445415522570218  # |J0(2 sqrt(1-2^-10))|
_ALGB_RABI_FACTOR_W4 = 0.063183923764692066  # |J0(2.53)|
_CDT_OMEGA_B9P1193 = 3.9999990723721794


def _close(got: float, want: float, tol: float, label: str) -> Optional[str]:
    if not abs(got - want) <= tol:
        return f"{label}: got {got!r}, want {want!r} (tol {tol:g})"
    return None


def check_bessel_at_zero() -> Optional[str]:
    if bessel_j(0, 0.0) != 1.0:
        return f"J0(0) = {bessel_j(0, 0.0)!r}, want exactly 1"
    for k in (1, 2, 5):
        if bessel_j(k, 0.0) != 0.0:
            return f"J{k}(0) = {bessel_j(k, 0.0)!r}, want exactly 0"
    return None


def check_bessel_spot_values() -> Optional[str]:
    for k, z, want in ((0, 1.0, _J0_1), (1, 2.5, _J1_2P5), (2, 3.5, _J2_3P5)):
        err = _close(bessel_j(k, z), want, 1e-14, f"J{k}({z})")
        if err:
            return err
    return None


def check_bessel_negative_order() -> Optional[str]:
    for z in (0.3, 2.7):
        if bessel_j(-1, z) != -bessel_j(1, z):
            return f"J_-1({z}) != -J_1({z})"
        if bessel_j(-2, z) != bessel_j(2, z):
            return f"J_-2({z}) != J_2({z})"
    return None


def check_bessel_sum_identity() -> Optional[str]:
    for z in (0.5, 2.5, 5.0, 10.0):
        total = bessel_j(0, z) ** 2 + 2.0 * sum(
            bessel_j(k, z) ** 2 for k in range(1, 41)
        )
        err = _close(total, 1.0, 1e-8, f"sum J_k({z})^2")
        if err:
            return err
    return None


def check_j0_roots() -> Optional[str]:
    roots = j0_roots(3)
    for got, want in zip(roots, _J0_ROOTS):
        err = _close(got, want, 1e-9, "J0 root")
        if err:
            return err
    worst = max(abs(bessel_j(0, r)) for r in roots)
    if worst > 1e-10:
        return f"|J0(root)| = {worst:g} > 1e-10"
    return None


def check_gap_values() -> Optional[str]:
    if gap(10) != 2.0**-5 or gap(20) != 2.0**-10:
        return f"gap(10)={gap(10)!r}, gap(20)={gap(20)!r}"
    return None


def check_bar_basis_identities() -> Optional[str]:
    for delta in (0.5, 2.0**-5):
        bb = bar_basis(delta)
        xi = math.sqrt(1.0 - delta * delta)
        for got, want, label in (
            (bb.c0u**2 - bb.c1u**2, xi, "c0u^2-c1u^2"),
            (2.0 * bb.c0u * bb.c1u, delta, "2 c0u c1u"),
            (bb.c0u * bb.c0p + bb.c1u * bb.c1p, 0.0, "row orthogonality"),
        ):
            err = _close(got, want, 1e-14, f"delta={delta}: {label}")
            if err:
                return err
        u, y = np.asarray(bb.image_of_u()), np.asarray(bb.image_of_y())
        err = _close(float(u @ y), delta, 1e-14, f"delta={delta}: <u|y>")
        if err:
            return err
        for v, name in ((u, "u"), (y, "y")):
            err = _close(float(v @ v), 1.0, 1e-14, f"delta={delta}: |{name}|^2")
            if err:
                return err
    return None


def check_projection_oracle() -> Optional[str]:
    n = 4
    params = DriveParams(n=n, a=0.6, b=3.0, omega=1.3)
    full = h_grover_full(n, params=params)
    proj = h_driven_projected(params, exact=True)
    bar = np.vstack(bar_states_full(n))
    for t in (0.0, 0.4, 1.1):
        dense = full.entries(t)
        want = bar @ dense @ bar.conj().T
        got = proj.entries(t)
        worst = float(np.max(np.abs(got - want)))
        if worst > 1e-12:
            return f"t={t}: projected entries deviate from subspace conjugation by {worst:g}"
    return None


def check_truncation_residue() -> Optional[str]:
    params = DriveParams(delta=0.5, a=0.8, b=2.0, omega=1.0)
    exact = h_driven_projected(params, exact=True)
    trunc = h_driven_projected(params, exact=False)
    xi = params.xi
    for t in (0.0, 0.3):
        c = math.cos(params.omega * t)
        want = 0.5 * (1.0 - xi) * (params.a + params.b) * c
        diff = trunc.entries(t) - exact.entries(t)
        checks = (
            (diff[0, 0].real, -want, "diag0"),
            (diff[1, 1].real, want, "diag1"),
            (abs(diff[0, 1]), 0.0, "offdiag"),
        )
        for got, wanted, label in checks:
            err = _close(got, wanted, 1e-14, f"t={t} {label}")
            if err:
                return err
    return None


def check_three_level_static_form() -> Optional[str]:
    params = DriveParams(delta=0.25, eta=0.3)
    mat = h_three_level(params, variant="static").entries(0.0)
    want = np.array(
        [[0.5, -0.125, 0.3], [-0.125, 0.5, 0.0], [0.3, 0.0, 1.0]], dtype=complex
    )
    if not np.array_equal(mat, want):
        return f"static three-level matrix deviates: {mat!r}"
    return None


def check_static_rotation_analytic() -> Optional[str]:
    delta = 0.125
    op = h_grover_projected(0.5, delta)
    traj = propagate(op, basis_state(2, 0, "bar"), 0.0, 60.0)
    want = np.sin(0.5 * delta * traj.times) ** 2
    worst = float(np.max(np.abs(traj.populations[:, 1] - want)))
    if worst > 1e-9:
        return f"static sin^2 law deviates by {worst:g}"
    return None


def check_norm_drift() -> Optional[str]:
    params = DriveParams(delta=2.0**-5, a=1.0, omega=0.5)
    op = h_lzs(params)
    period = 2.0 * math.pi / params.omega
    ctl = StepControl(record_stride=512)
    n_steps = 1_000_000
    span = (n_steps / 512.0) * period
    traj = propagate(op, basis_state(2, 0, "computational"), 0.0, span, ctl)
    drift = abs(float(np.linalg.norm(traj.amplitudes[-1])) - 1.0)
    if drift > 1e-10:
        return f"norm drift {drift:g} > 1e-10 over {n_steps} steps"
    return None


def check_self_convergence_order() -> Optional[str]:
    params = DriveParams(delta=2.0**-5, a=1.0, omega=2.0)
    op = h_lzs(params)
    start = basis_state(2, 0, "computational")
    span = 6.0 * math.pi / params.omega
    finals = {}
    for spp in (128, 256, 1024):
        ctl = StepControl(steps_per_drive_period=spp, record_stride=spp)
        finals[spp] = propagate(op, start, 0.0, span, ctl).populations[-1, 1]
    e_coarse = abs(finals[128] - finals[1024])
    e_fine = abs(finals[256] - finals[1024])
    ratio = e_coarse / e_fine if e_fine else math.inf
    if ratio < 3.5:
        return f"step-halving error ratio {ratio:.3f} < 3.5"
    return None


def check_double_crossing_convergence() -> Optional[str]:
    params = DriveParams(delta=2.0**-5, a=1.0, omega=0.5)
    op = h_lzs(params)
    start = basis_state(2, 0, "computational")
    period = 2.0 * math.pi / params.omega
    vals = {}
    for spp in (512, 4096):
        ctl = StepControl(steps_per_drive_period=spp, record_stride=spp)
        vals[spp] = propagate(op, start, 0.0, period, ctl).populations[-1, 1]
    err = abs(vals[512] - vals[4096])
    if err > 1e-6:
        return f"one-period population differs by {err:g} at 8x step density"
    return None


def check_rabi_measurement() -> Optional[str]:
    delta = 2.0**-3
    op = h_grover_projected(0.5, delta)
    span = 3.5 * 2.0 * math.pi / delta
    traj = propagate(op, basis_state(2, 0, "bar"), 0.0, span)
    got = measure_rabi_frequency(traj, 1)
    return _close(got, delta, 1e-6, "measured Rabi frequency")


def check_rwa_lzs_example() -> Optional[str]:
    got = rabi_frequency_lzs(2.0**-5, 1.0, 0.5)
    return _close(got, 2.0**-5 * _LZS_RABI_FACTOR_W0P5, 1e-12, "lzs Rabi at omega=0.5")


def check_rwa_algB_example() -> Optional[str]:
    got = rabi_frequency_algB(2.0**-5, 1.0, 9.12, 4.0)
    return _close(got, 2.0**-5 * _ALGB_RABI_FACTOR_W4, 1e-12, "algB Rabi at omega=4")


def check_cdt_design_omega() -> Optional[str]:
    got = cdt_design_omega(1.0, 9.1193)
    err = _close(got, _CDT_OMEGA_B9P1193, 1e-6, "cdt design omega")
    if err:
        return err
    if abs(got - 4.0) > 1e-3:
        return f"design omega {got!r} not within 1e-3 of 4.0"
    return None


def check_noisy_half_freeze() -> Optional[str]:
    got = rabi_frequency_noisy_half(0.125, 0.125, 2.5)
    return _close(got, 0.125 * _J0_0P05, 1e-12, "frozen half-drive Rabi")


def check_effective_three_level_design() -> Optional[str]:
    params = DriveParams(delta=2.0**-10, a=1.0, b=9.12, eta=0.3, omega=4.0)
    eff = effective_h_three_level(params)
    mat = eff.matrix
    c02 = abs(mat[0, 2])
    if c02 > 3e-4:
        return f"leakage coupling {c02:g} not suppressed at design frequency"
    want01 = -0.5 * 2.0**-10 * bessel_j(0, 10.12 / 4.0)
    return _close(float(mat[0, 1].real), want01, 1e-12, "search coupling")


def check_chi_truncation() -> Optional[str]:
    params = DriveParams(delta=0.125, a=1.0, b=9.12, omega=3.67, a1=0.05, omega1=2.5)
    base = effective_h_noisy_algB(params)
    wider = effective_h_noisy_algB(params, truncation=base.truncation + 6)
    worst = 0.0
    for t in (0.0, 0.7):
        worst = max(worst, float(np.max(np.abs(base.entries(t) - wider.entries(t)))))
    if worst > 1e-8:
        return f"widening the sideband truncation moves entries by {worst:g}"
    return None


def check_grover_static_success() -> Optional[str]:
    t_s = success_time(grover_run(6, 0.0, 1.0))
    want = math.pi / (2.0 * gap(6))
    return _close(t_s, want, 1e-9, "static success time")


def check_double_crossing_limits() -> Optional[str]:
    delta = 2.0**-2
    fast = double_crossing_scan(delta, 1.0, Axis("omega", 100.0, 100.0, 1))
    got = fast.column("one_minus_p_plus_2")[0]
    if not got > 0.99:
        return f"fast limit 1-P+ = {got:.6f}, want > 0.99"
    slow = double_crossing_scan(delta, 1.0, Axis("omega", 0.01 * delta**2, 0.01 * delta**2, 1))
    got = slow.column("one_minus_p_plus_2")[0]
    if not got > 0.98:
        return f"adiabatic limit 1-P+ = {got:.6f}, want > 0.98"
    return None


def check_eta_decoupling() -> Optional[str]:
    params = DriveParams(delta=0.25, a=1.0, b=2.0, omega=2.0, eta=0.0)
    traj = propagate(
        h_three_level(params, "modulated"), basis_state(3, 0, "three-level"), 0.0, 50.0
    )
    leak = max_population(traj, 2)[0]
    if leak > 1e-12:
        return f"eta=0 still leaks {leak:g} into the third level"
    return None


def check_scaling_static() -> Optional[str]:
    fit = runtime_scaling((8, 10, 12), 0.0)
    return _close(fit.exponent, 0.5, 0.01, "static scaling exponent")


def check_axis_parse() -> Optional[str]:
    from .cli import parse_axis

    ax = parse_axis("0.01:10:200:log", "omega1_axis")
    if (ax.name, ax.points, ax.log) != ("omega1", 200, True):
        return f"parsed axis {ax!r}"
    vals = ax.values()
    if abs(vals[0] - 0.01) > 1e-15 or abs(vals[-1] - 10.0) > 1e-12:
        return f"axis endpoints {vals[0]!r}..{vals[-1]!r}"
    return None


def check_flag_precedence() -> Optional[str]:
    from .cli import parse_config

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "run.cfg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# comment line\ndelta = 0.125\na = 1.0\n")
        cfg = parse_config(
            ["grover-run", "--config", path, "--delta", "0.25"]
        )
    if cfg.get("delta") != 0.25:
        return f"flag should override file: delta = {cfg.get('delta')!r}"
    if cfg.get("a") != 1.0:
        return f"file value lost: a = {cfg.get('a')!r}"
    return None


def check_missing_key_error() -> Optional[str]:
    from .cli import ConfigError, parse_config, _RUNNERS

    cfg = parse_config(["grover-run", "--n", "6", "--amplitude-a", "1", "--out", "x.csv"])
    try:
        _RUNNERS["grover-run"](cfg)
    except ConfigError as e:
        if "omega" not in str(e):
            return f"error does not name the missing key: {e}"
        return None
    return "missing omega was not rejected"


def check_unknown_key_error() -> Optional[str]:
    from .cli import ConfigError, parse_config

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "run.cfg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("delta = 0.125\njunk = 1\n")
        try:
            parse_config(["grover-run", "--config", path])
        except ConfigError as e:
            msg = str(e)
            if "junk" not in msg or ":2" not in msg:
                return f"error should name key and line: {msg}"
            return None
    return "unknown key was not rejected"


def check_csv_round_trip() -> Optional[str]:
    from .cli import emit_csv, read_csv

    grid = double_crossing_scan(0.25, 1.0, Axis("omega", 0.7, 2.9, 5))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "grid.csv")
        emit_csv(grid, path, config={"subcommand": "double-crossing"})
        table = read_csv(path)
        for name in ("p_plus_2", "one_minus_p_plus_2"):
            if not np.array_equal(table.column(name), grid.column(name)):
                return f"column {name} not bit-identical after round trip"
        if table.params.get("delta") != "0.25":
            return f"params line lost delta: {table.params!r}"
        # degenerate table: headers only
        empty_path = os.path.join(tmp, "empty.csv")
        emit_csv({"time": np.empty(0), "p0": np.empty(0)}, empty_path)
        lines = open(empty_path, encoding="utf-8").read().splitlines()
        if lines[-1] != "time,p0" or len(lines) != 2:
            return f"empty table layout unexpected: {lines!r}"
    return None


CHECKS: List[Tuple[str, Callable[[], Optional[str]]]] = [
    ("bessel-at-zero", check_bessel_at_zero),
    ("bessel-spot-values", check_bessel_spot_values),
    ("bessel-negative-order", check_bessel_negative_order),
    ("bessel-sum-identity", check_bessel_sum_identity),
    ("bessel-j0-roots", check_j0_roots),
    ("gap-values", check_gap_values),
    ("bar-basis-identities", check_bar_basis_identities),
    ("projection-oracle-n4", check_projection_oracle),
    ("truncation-residue", check_truncation_residue),
    ("three-level-static-form", check_three_level_static_form),
    ("static-rotation-analytic", check_static_rotation_analytic),
    ("norm-drift-1e6-steps", check_norm_drift),
    ("self-convergence-order", check_self_convergence_order),
    ("double-crossing-convergence", check_double_crossing_convergence),
    ("rabi-measurement", check_rabi_measurement),
    ("rwa-lzs-example", check_rwa_lzs_example),
    ("rwa-algB-example", check_rwa_algB_example),
    ("cdt-design-omega", check_cdt_design_omega),
    ("noisy-half-freeze", check_noisy_half_freeze),
    ("effective-three-level-design", check_effective_three_level_design),
    ("chi-truncation", check_chi_truncation),
    ("grover-static-success", check_grover_static_success),
    ("double-crossing-limits", check_double_crossing_limits),
    ("eta-decoupling", check_eta_decoupling),
    ("runtime-scaling-static", check_scaling_static),
    ("axis-parse", check_axis_parse),
    ("flag-precedence", check_flag_precedence),
    ("missing-key-error", check_missing_key_error),
    ("unknown-key-error", check_unknown_key_error),
    ("csv-round-trip", check_csv_round_trip),
]


def run_selftest(stream=None) -> int:
    """Run every check, print one line each; return the failure count."""
    out = stream if stream is not None else sys.stdout
    failures = 0
    for name, fn in CHECKS:
        try:
            detail = fn()
        except Exception as e:  # a crash is a failure, not an abort
            detail = f"raised {type(e).__name__}: {e}"
        if detail is None:
            print(f"ok   {name}", file=out)
        else:
            failures += 1
            print(f"FAIL {name}: {detail}", file=out)
    total = len(CHECKS)
    print(f"selftest: {total - failures}/{total} checks passed", file=out)
    return failures
