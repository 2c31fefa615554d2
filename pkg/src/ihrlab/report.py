"""Experiment orchestration and artifact emission (CSV, JSON, plot data)."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import ConfigError, ExperimentSuiteConfig
from .core import IHRError, logistic_prob
from .drift import RegimeStats, run_noise_sweep
from .experiment1 import collapse_fraction, quantile_bins, run_experiment1
from .logistic import FitError, fit_logistic
from .regulator import report_from_arms, simulate_arms

EXPERIMENTS = ("exp1", "exp2", "exp3")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3

FIG2_GRID = np.round(0.30 + 0.01 * np.arange(421), 2)


def fmt(value) -> str:
    """CSV / plot-data number rendering: 6 significant digits."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"{path}: row has {len(row)} columns, header has {len(header)}")
            writer.writerow([fmt(v) for v in row])


def write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, allow_nan=False)
        fh.write("\n")


def emit_plot_data(series, path, metadata: dict | None = None) -> None:
    """Write tab-separated two-column plot data.

    ``series`` maps a block name to ``(x_label, y_label, points)`` where
    ``points`` is a sequence of ``(x, y)`` with strictly increasing x.
    Blocks are separated by a blank line (gnuplot ``index`` convention);
    ``metadata`` entries become ``# key<TAB>value`` lines at the top, e.g.
    the position of a vertical marker.
    """
    if not series:
        raise ValueError("emit_plot_data needs at least one series")
    lines = []
    for key, value in (metadata or {}).items():
        lines.append(f"# {key}\t{fmt(value)}")
    blocks = []
    for name, (x_label, y_label, points) in series.items():
        points = list(points)
        if not points:
            raise ValueError(f"series {name!r} is empty")
        xs = [float(x) for x, _ in points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError(f"series {name!r}: x values must be strictly increasing")
        block = [f"# series\t{name}", f"{x_label}\t{y_label}"]
        block += [f"{fmt(x)}\t{fmt(y)}" for x, y in points]
        blocks.append("\n".join(block))
    text = "\n".join(lines + ["\n\n".join(blocks)]) + "\n"
    Path(path).write_text(text)


class Suite:
    """Runs experiments for one config and writes their artifacts."""

    def __init__(self, config: ExperimentSuiteConfig, workers: int = 1, out=None) -> None:
        self.config = config
        self.workers = max(1, workers)
        self.out = out or sys.stdout
        self.dir = Path(config.output_dir)
        self.csv = config.format in ("csv", "both")
        self.json = config.format in ("json", "both")

    def say(self, text: str = "") -> None:
        print(text, file=self.out)

    def exp1(self) -> None:
        cfg = self.config.exp1
        trials = run_experiment1(cfg, workers=self.workers)
        bins = quantile_bins(trials, cfg.n_bins)
        fit = fit_logistic((np.array([t.ihr for t in trials]), np.array([t.collapsed for t in trials], float)))
        frac = collapse_fraction(trials)

        trial_cols = ["trial_index", "u", "k", "ihr", "accuracy", "collapsed"]
        bin_cols = ["ihr_lower", "ihr_upper", "mean_ihr", "collapse_prob", "count"]
        trial_rows = [[getattr(t, c) for c in trial_cols] for t in trials]
        bin_rows = [[b.lower, b.upper, b.mean_ihr, b.collapse_prob, b.count] for b in bins]
        if self.csv:
            write_csv(self.dir / "exp1_trials.csv", trial_cols, trial_rows)
            write_csv(self.dir / "exp1_bins.csv", bin_cols, bin_rows)
        if self.json:
            write_json(self.dir / "exp1_bins.json", [dict(zip(bin_cols, r)) for r in bin_rows])
        write_json(self.dir / "exp1_fit.json", {
            **fit.to_dict(),
            "n_trials": len(trials),
            "n_collapsed": sum(t.collapsed for t in trials),
            "collapse_fraction": frac,
            "master_seed": cfg.master_seed,
        })

        emit_plot_data(
            {"bin_estimates": ("mean_ihr", "collapse_prob", [(b.mean_ihr, b.collapse_prob) for b in bins])},
            self.dir / "fig1.dat",
        )
        curve = logistic_prob(fit.model, FIG2_GRID)
        emit_plot_data(
            {
                "logistic_fit": ("ihr", "collapse_prob", list(zip(FIG2_GRID, curve))),
                "bin_estimates": ("mean_ihr", "collapse_prob", [(b.mean_ihr, b.collapse_prob) for b in bins]),
            },
            self.dir / "fig2.dat",
            metadata={"vline_ihr_star": fit.ihr_star, "beta0": fit.model.beta0, "beta1": fit.model.beta1},
        )

        self.say("Experiment 1: collapse probability by IHR bin")
        self.say(f"  {'IHR range':<20}{'Mean IHR':>10}{'P(collapse)':>13}{'n':>6}")
        for b in bins:
            rng = f"({b.lower:.3f}, {b.upper:.3f}]"
            self.say(f"  {rng:<20}{b.mean_ihr:>10.3f}{b.collapse_prob:>13.2f}{b.count:>6d}")
        self.say(f"  collapse fraction {frac:.4f} ({sum(t.collapsed for t in trials)}/{len(trials)})")
        self.say(f"  beta0 = {fit.model.beta0:.3f}, beta1 = {fit.model.beta1:.3f}, IHR* = {fit.ihr_star:.3f}")
        self.say()

    def exp2(self) -> None:
        s = self.config.exp2
        sweep = run_noise_sweep(s.drift, s.sigmas, s.ihr_star, workers=self.workers, common_noise=s.common_noise)
        cols = ["sigma", "mean_ihr", "ihr_sd", "collapse_rate", "frac_below_star"]
        rows = [[sigma, r.mean_ihr, r.ihr_sd, r.collapse_rate, r.frac_below_star] for sigma, r in sweep]
        if self.csv:
            write_csv(self.dir / "exp2_sweep.csv", cols, rows)
        if self.json:
            write_json(self.dir / "exp2_sweep.json", {
                "ihr_star": s.ihr_star,
                "n_runs": s.drift.n_runs,
                "horizon_t": s.drift.horizon_t,
                "levels": [dict(zip(cols, r)) for r in rows],
            })
        stats = list(RegimeStats.__dataclass_fields__)
        ordered = sorted(sweep, key=lambda p: p[0])
        emit_plot_data(
            {f: ("sigma", f, [(sigma, getattr(r, f)) for sigma, r in ordered]) for f in stats},
            self.dir / "fig3.dat",
        )

        self.say("Experiment 2: noise sensitivity")
        self.say(f"  {'sigma':>7}{'Mean IHR':>10}{'IHR Std':>10}{'Collapse':>10}{'Below IHR*':>12}")
        for sigma, r in sweep:
            self.say(f"  {sigma:>7.3f}{r.mean_ihr:>10.3f}{r.ihr_sd:>10.3f}{r.collapse_rate:>10.3f}"
                     f"{r.frac_below_star:>12.3f}")
        self.say()

    def exp3(self) -> None:
        s = self.config.exp3
        plain, controlled = simulate_arms(s.drift, s.controller, workers=self.workers)
        report = report_from_arms(plain, controlled)
        rows = report.rows()
        payload = {
            "n_runs": report.n_runs,
            "horizon_t": s.drift.horizon_t,
            "metrics": {
                name: {"uncontrolled": a, "controlled": b, "relative_change": ch} for name, a, b, ch in rows
            },
            "observed_rate_change_pp": 100.0 * (report.observed_collapse_rate_controlled
                                                - report.observed_collapse_rate_uncontrolled),
        }
        write_json(self.dir / "exp3_comparison.json", payload)
        if self.csv:
            write_csv(self.dir / "exp3_comparison.csv", ["metric", "uncontrolled", "controlled", "change"],
                      [[n, a, b, ch] for n, a, b, ch in rows])
        if s.trajectory_run is not None:
            i = s.trajectory_run
            write_csv(
                self.dir / "exp3_trajectory.csv",
                ["t", "u", "k", "c_uncontrolled", "c_controlled", "ihr_uncontrolled", "ihr_controlled"],
                [[t, plain.u[i, t], plain.k[i, t], plain.c[i, t], controlled.c[i, t],
                  plain.ihr[i, t], controlled.ihr[i, t]] for t in range(s.drift.horizon_t)],
            )

        self.say(f"Experiment 3: uncontrolled vs controlled ({report.n_runs} runs)")
        self.say(f"  {'Metric':<24}{'Uncontrolled':>14}{'Controlled':>12}{'Change':>9}")
        for name, a, b, ch in rows:
            self.say(f"  {name:<24}{a:>14.3f}{b:>12.3f}{ch:>+9.1%}")
        self.say(f"  final capacity (mean over runs): {float(np.mean(controlled.c[:, -1])):.3f}")
        self.say()


def run_suite(config: ExperimentSuiteConfig, selection: Iterable[str], workers: int = 1, out=None,
              err=None) -> int:
    """Run the selected experiments; returns a process exit status."""
    err = err or sys.stderr
    selection = set(selection)
    unknown = selection - set(EXPERIMENTS)
    if unknown:
        print(f"error: unknown experiment(s): {', '.join(sorted(unknown))}", file=err)
        return EXIT_CONFIG
    suite = Suite(config, workers=workers, out=out)
    if not selection:
        suite.say("nothing selected")
        return EXIT_OK
    try:
        suite.dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"I/O error: {suite.dir}: {exc.strerror or exc}", file=err)
        return EXIT_IO
    for name in EXPERIMENTS:
        if name not in selection:
            continue
        try:
            getattr(suite, name)()
        except OSError as exc:
            path = exc.filename or suite.dir
            print(f"I/O error in {name}: {path}: {exc.strerror or exc}", file=err)
            return EXIT_IO
        except ConfigError as exc:
            print(f"config error in {name}: {exc}", file=err)
            return EXIT_CONFIG
        except (FitError, IHRError, ValueError, ArithmeticError) as exc:
            print(f"error in {name}: {exc}", file=err)
            return EXIT_RUNTIME
    return EXIT_OK
