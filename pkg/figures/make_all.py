#!/usr/bin/env python3
"""Generate the four standard figures from freshly computed CSVs.

Runs the ``lzs-search-sim`` command line once per data set, then renders
each CSV with :mod:`render`.  The four figures are:

- ``three_level``    modulated three-level transfer windows versus drive
                     frequency (peak and leakage populations, dual line)
- ``noise_map``      excited population under a control-error tone as a
                     map of error frequency (y) against time (x)
- ``trajectory``     marked-state population along a single search run
- ``rwa_accuracy``   relative error of the averaged-drive rate estimate
                     across drive strength and frequency

``--profile full`` (default) uses publication-scale sweeps and takes
about half a minute; ``--profile quick`` uses small grids for smoke
testing.  Everything runs single-threaded; CSVs are written once and
then only read.
"""

from __future__ import annotations

import argparse
import shutil
import subprocess
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

sys.path.insert(0, str(Path(__file__).resolve().parent))

from render import FigureSpec, render  # noqa: E402


def simulator_command() -> List[str]:
    exe = shutil.which("lzs-search-sim")
    if exe:
        return [exe]
    return [sys.executable, "-m", "lzs_search.cli"]


def jobs(profile: str) -> List[Tuple[str, List[str], Dict[str, object]]]:
    """(name, simulator args, figure-spec kwargs) for each figure."""
    if profile == "full":
        three_level_axis = "1.5:4.5:601"
        three_level_window = "30000"
        noise_omega1 = "0.25:5:39"
        noise_t = "0:250:126"
        traj_n = "16"
        rwa_a = "0.1:2.2:22"
        rwa_w = "10:80:8"
    elif profile == "quick":
        three_level_axis = "3.6:3.8:21"
        three_level_window = "30000"
        noise_omega1 = "1:3:5"
        noise_t = "0:40:9"
        traj_n = "8"
        rwa_a = "0.2:1:3"
        rwa_w = "10:40:3"
    else:
        raise ValueError(f"unknown profile {profile!r}")

    return [
        (
            "three_level",
            [
                "three-level-scan",
                "--delta", "0.0009765625",
                "--amplitude-a", "1",
                "--amplitude-b", "9.12",
                "--eta", "0.3",
                "--omega-axis", three_level_axis,
                "--window", three_level_window,
            ],
            dict(
                kind="dual-line",
                x="omega",
                y=("max_p1", "max_p2"),
                xlabel="drive frequency",
                ylabel="peak population",
                title="Three-level transfer windows",
            ),
        ),
        (
            "noise_map",
            [
                "noise-map",
                "--algorithm", "algB",
                "--delta", "0.125",
                "--amplitude-a", "1",
                "--amplitude-b", "9.12",
                "--omega", "3.67",
                "--a1", "0.05",
                "--omega1-axis", noise_omega1,
                "--t-axis", noise_t,
            ],
            dict(
                kind="heatmap",
                x="t",
                y=("omega1",),
                value="p_plus",
                xlabel="time",
                ylabel="error-tone frequency",
                title="Robustness to a harmonic control error",
            ),
        ),
        (
            "trajectory",
            [
                "grover-run",
                "--n", traj_n,
                "--amplitude-a", "1",
                "--omega", "1.25",
            ],
            dict(
                kind="line",
                x="time",
                y=("p1",),
                xlabel="time",
                ylabel="marked-state population",
                title="Single search run",
            ),
        ),
        (
            "rwa_accuracy",
            [
                "rwa-vs-exact",
                "--delta", "0.03125",
                "--a-over-omega-axis", rwa_a,
                "--omega-over-delta-axis", rwa_w,
            ],
            dict(
                kind="heatmap",
                x="a_over_omega",
                y=("omega_over_delta",),
                value="rel_error",
                xlabel="drive strength / frequency",
                ylabel="frequency / gap",
                title="Averaged-drive rate estimate accuracy",
            ),
        ),
    ]


def make_all(out_dir: Path, profile: str = "full") -> List[Path]:
    """Compute CSVs and render every figure; returns written image paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    base = simulator_command()
    written: List[Path] = []
    for name, sim_args, fig_kwargs in jobs(profile):
        csv_path = out_dir / f"{name}.csv"
        subprocess.run(
            base + sim_args + ["--out", str(csv_path)],
            check=True,
            stdout=subprocess.DEVNULL,
        )
        spec = FigureSpec(src=csv_path, out=out_dir / name, **fig_kwargs)
        written.extend(render(spec))
    return written


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--out", default="figures/out", metavar="DIR", help="output directory"
    )
    parser.add_argument("--profile", default="full", choices=("full", "quick"))
    args = parser.parse_args(argv)
    for path in make_all(Path(args.out), args.profile):
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
