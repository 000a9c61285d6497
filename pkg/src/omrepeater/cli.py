"""
Command-line front end: single runs, parameter sweeps and figure presets.

All physics inputs are dimensionless with lambda1 = 1: ``--lambda1-t``,
``--lambda1-tau``, ``--omega-m`` (omega_M / lambda1) and ``--g``
(G / lambda1).  Sweep axes accept a single value, a comma list, or a range
``start:stop[:num]`` (``num`` defaults to ``--points``).

Exit codes: 0 success, 1 usage error, 2 failed invariant check.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .dynamics import stage_a_coefficients, stage_b_coefficients
from .metrics import linear_entropy_two_term, success_probability
from .models import ModelParams
from .protocol import (
    Classification,
    ProtocolTree,
    Stage,
    check_invariants,
    run_full_protocol,
    verify_symmetries,
)

__all__ = [
    "QUANTITIES",
    "CSV_COLUMNS",
    "SweepConfig",
    "parse_axis",
    "evaluate",
    "sweep_rows",
    "run_sweep",
    "figure_configs",
    "run_figure",
    "main",
]

QUANTITIES = ("E14", "P14_1", "P14_2", "E18", "P18", "tree")
TAU_QUANTITIES = ("E18", "P18", "tree")
CSV_COLUMNS = (
    "quantity", "case_id", "lambda1_t", "lambda1_tau",
    "omega_m_over_lambda1", "g_over_lambda1", "value",
)
AXES = ("lambda1_t", "lambda1_tau", "omega_m", "g")
DEFAULT_POINTS = 400
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")


class UsageError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_axis(text: str, points: int = DEFAULT_POINTS) -> np.ndarray:
    """``"0.5"``, ``"0.5,1,1.5"`` or ``"0:10"`` / ``"0:10:400"`` to an array."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (2, 3):
                raise ValueError
            num = int(parts[2]) if len(parts) == 3 else points
            values = np.linspace(float(parts[0]), float(parts[1]), num)
        else:
            values = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError(f"cannot parse axis {text!r}") from None
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise UsageError(f"axis {text!r} is empty or not finite")
    return values


@dataclass
class SweepConfig:
    quantity: str
    case_id: Optional[int] = None
    grid: dict[str, np.ndarray] = field(default_factory=dict)
    output_path: Optional[Path] = None
    # lambda1_tau values are offsets lambda1 (tau - t) instead of absolute times
    tau_relative: bool = False
    threads: int = 1
    label: str = ""

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise UsageError(f"unknown quantity {self.quantity!r}; choose from {QUANTITIES}")
        self.grid = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in self.grid.items()}
        self.grid.setdefault("omega_m", np.array([0.5]))
        self.grid.setdefault("g", np.array([2.0]))
        self.grid.setdefault("lambda1_t", np.array([1.0]))
        for name, values in self.grid.items():
            if name not in AXES:
                raise UsageError(f"unknown grid axis {name!r}")
            if values.size == 0 or not np.all(np.isfinite(values)):
                raise UsageError(f"grid axis {name} is empty or not finite")
        if np.any(self.grid["omega_m"] <= 0) or np.any(self.grid["g"] <= 0):
            raise UsageError("omega_m and g must be positive")
        if np.any(self.grid["lambda1_t"] < 0):
            raise UsageError("lambda1_t must be non-negative")
        if self.quantity in TAU_QUANTITIES:
            if self.case_id not in (1, 2, 3, 4):
                raise UsageError(f"{self.quantity} needs --case 1..4")
            if "lambda1_tau" not in self.grid:
                raise UsageError(f"{self.quantity} needs a lambda1_tau axis")
            if self.grid["lambda1_tau"].size > 1 and self.grid["lambda1_t"].size > 1:
                raise UsageError("a lambda1_tau range needs a single fixed lambda1_t")
        else:
            self.grid.pop("lambda1_tau", None)
            self.case_id = None

    def describe(self) -> str:
        parts = [f"quantity={self.quantity}"]
        if self.case_id is not None:
            parts.append(f"case={self.case_id}")
        for name in AXES:
            if name in self.grid:
                v = self.grid[name]
                desc = fmt(v[0]) if v.size == 1 else f"{fmt(v[0])}..{fmt(v[-1])}({v.size})"
                if name == "lambda1_tau" and self.tau_relative:
                    desc = "lambda1_t+" + desc
                parts.append(f"{name}={desc}")
        if self.label:
            parts.insert(0, f"preset={self.label}")
        return " ".join(parts)


def _tau_values(config: SweepConfig, t: float) -> np.ndarray:
    taus = config.grid["lambda1_tau"]
    return t + taus if config.tau_relative else taus


def evaluate(quantity: str, case_id: Optional[int], t: float, taus: Sequence[float], omega_m: float, g: float) -> list[float]:
    """Values of ``quantity`` at one (omega_m, g, t) point for every tau (or one value)."""
    params = ModelParams.simplified(omega_m, g)
    sa = stage_a_coefficients(params, t)
    if quantity == "E14":
        return [linear_entropy_two_term(sa.a[1], sa.a[9])]
    if quantity == "P14_1":
        return [sa.p_pair]
    if quantity == "P14_2":
        return [2 * abs(sa.a[3]) ** 2]
    out = []
    for tau in taus:
        if tau < t:
            raise UsageError(f"lambda1_tau={tau} is smaller than lambda1_t={t}")
        if quantity == "tree":
            tree = run_full_protocol(params, t, tau)
            hits = [
                b.cumulative_probability
                for b in tree.stage_branches(Stage.B, case_id)
                if b.classification == Classification.SUCCESS and b.name == "psi"
            ]
            out.append(hits[0] if hits else 0.0)
            continue
        b = stage_b_coefficients(sa, params, case_id, tau).b
        if quantity == "P18":
            out.append(success_probability(b[1], b[4]))
        else:
            p = success_probability(b[1], b[4])
            out.append(linear_entropy_two_term(b[1], b[4]) if p > 0 else 0.0)
    return out


def sweep_rows(config: SweepConfig) -> list[tuple[str, ...]]:
    """CSV rows in canonical order: omega_m, g, lambda1_t, then lambda1_tau."""
    g_axis = config.grid
    points = [
        (float(w), float(g), float(t))
        for w in g_axis["omega_m"]
        for g in g_axis["g"]
        for t in g_axis["lambda1_t"]
    ]
    with_tau = config.quantity in TAU_QUANTITIES

    def work(point):
        w, g, t = point
        taus = _tau_values(config, t) if with_tau else [None]
        values = evaluate(config.quantity, config.case_id, t, taus, w, g)
        case = "" if config.case_id is None else str(config.case_id)
        return [
            (config.quantity, case, fmt(t), "" if tau is None else fmt(tau), fmt(w), fmt(g), fmt(v))
            for tau, v in zip(taus, values)
        ]

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            blocks = list(pool.map(work, points))
    else:
        blocks = [work(p) for p in points]
    return [row for block in blocks for row in block]


def write_csv(path: Optional[Path], configs: Sequence[SweepConfig], rows: Iterable[Sequence[str]]) -> str:
    """Write comment lines, the header and rows; returns the text written."""
    buf = io.StringIO()
    for config in configs:
        buf.write(f"# {config.describe()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from None
    return text


def run_sweep(config: SweepConfig) -> str:
    return write_csv(config.output_path, [config], sweep_rows(config))


def figure_configs(name: str, points: int = DEFAULT_POINTS, threads: int = 1) -> list[SweepConfig]:
    """Sweep blocks reproducing one figure's curves.

    Stage-A figures run lambda1_t over [0, 10]; stage-B figures fix
    lambda1_t = 1 and run lambda1 (tau - t) over [0, 10].
    """
    t_axis = np.linspace(0.0, 10.0, points)
    rel_tau = np.linspace(0.0, 10.0, points)
    omegas = np.array([0.5, 1.0, 1.5])
    if name in ("fig2", "fig3"):
        grid = {"lambda1_t": t_axis}
        grid.update({"omega_m": omegas, "g": [2.0]} if name == "fig2" else {"omega_m": [0.5], "g": [2.0, 2.5, 3.0]})
        return [SweepConfig(q, None, dict(grid), threads=threads, label=name) for q in ("E14", "P14_1")]
    if name == "fig4":
        return [
            SweepConfig("P14_2", None, {"lambda1_t": t_axis, "omega_m": omegas, "g": [2.0]}, threads=threads, label="fig4a"),
            SweepConfig("P14_2", None, {"lambda1_t": t_axis, "omega_m": [0.5], "g": [2.0, 2.5, 3.0]}, threads=threads, label="fig4b"),
        ]
    if name in ("fig5", "fig6"):
        grid = {"lambda1_t": [1.0], "lambda1_tau": rel_tau}
        grid.update({"omega_m": omegas, "g": [2.0]} if name == "fig5" else {"omega_m": [0.5], "g": [0.5, 0.7, 0.9]})
        return [
            SweepConfig(q, case, dict(grid), tau_relative=True, threads=threads, label=name)
            for q in ("E18", "P18")
            for case in (1, 2, 3, 4)
        ]
    raise UsageError(f"unknown figure {name!r}")


def run_figure(name: str, output: Optional[Path], points: int = DEFAULT_POINTS, threads: int = 1) -> str:
    configs = figure_configs(name, points, threads)
    rows = [row for c in configs for row in sweep_rows(c)]
    return write_csv(output, configs, rows)


# --------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def read_config(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes equal underscores."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


_OPTIONS = ("omega_m", "g", "lambda1_t", "lambda1_tau", "case", "points", "output", "threads", "quantity")


def _settings(args) -> dict[str, str]:
    merged = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(merged) - set(_OPTIONS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key in _OPTIONS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = str(value)
    return merged


def _add_common(p, tau=True):
    p.add_argument("--config", type=Path, help="key=value file; flags override it")
    p.add_argument("--omega-m", dest="omega_m", help="omega_M / lambda1")
    p.add_argument("--g", dest="g", help="G / lambda1")
    p.add_argument("--lambda1-t", dest="lambda1_t", help="stage-A time lambda1 t")
    if tau:
        p.add_argument("--lambda1-tau", dest="lambda1_tau", help="stage-B time lambda1 tau")
    p.add_argument("--output", type=Path, help="CSV output path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="omrepeater", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stage-a", help="stage-A amplitudes, entropy and heralding probabilities")
    _add_common(p, tau=False)

    p = sub.add_parser("protocol", help="full branch table for one (t, tau) point")
    _add_common(p)
    p.add_argument("--check", action="store_true", help="run the full invariant suite")

    p = sub.add_parser("sweep", help="grid sweep of one quantity to CSV")
    _add_common(p)
    p.add_argument("--quantity", choices=QUANTITIES)
    p.add_argument("--case", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--points", type=int, help=f"points for ranges without a count (default {DEFAULT_POINTS})")
    p.add_argument("--threads", type=int)

    for name in FIGURES:
        p = sub.add_parser(name, help=f"curves of figure {name[3:]} to CSV")
        p.add_argument("--config", type=Path)
        p.add_argument("--points", type=int)
        p.add_argument("--output", type=Path)
        p.add_argument("--threads", type=int)
    return parser


def _float(settings, key, default):
    try:
        return float(settings.get(key, default))
    except ValueError:
        raise UsageError(f"{key} must be a number") from None


def _cmd_stage_a(settings, out) -> int:
    params = ModelParams.simplified(_float(settings, "omega_m", 0.5), _float(settings, "g", 2.0))
    t = _float(settings, "lambda1_t", 1.0)
    sa = stage_a_coefficients(params, t)
    rows = [("A%d" % (k + 1), fmt(a.real), fmt(a.imag)) for k, a in enumerate(sa.a)]
    print(f"# omega_m={fmt(params.omega_m)} g={fmt(params.g)} lambda1_t={fmt(t)}", file=out)
    for name, re, im in rows:
        print(f"{name:>4s}  {float(re):+.12f} {float(im):+.12f}i", file=out)
    print(f"E14 = {linear_entropy_two_term(sa.a[1], sa.a[9]):.12f}", file=out)
    print(f"P14_1 = {sa.p_pair:.12f}", file=out)
    print(f"P14_2 = {2 * abs(sa.a[3]) ** 2:.12f}", file=out)
    if "output" in settings:
        text = "coefficient,real,imag\n" + "".join(",".join(r) + "\n" for r in rows)
        Path(settings["output"]).write_text(text)
    return 0


def branch_table(tree: ProtocolTree) -> list[tuple[str, ...]]:
    rows = []
    for b in tree.branches:
        s = b.pair_summary
        rows.append((
            b.stage.value,
            "" if b.case_id is None else str(b.case_id),
            b.outcome_label.label(),
            b.name,
            b.classification.value,
            fmt(b.conditional_probability),
            fmt(b.cumulative_probability),
            "" if s is None else fmt(s.E),
            "" if s is None else fmt(s.P),
        ))
    return rows


BRANCH_COLUMNS = (
    "stage", "case_id", "outcome", "name", "classification",
    "conditional_probability", "cumulative_probability", "E", "P",
)


def _cmd_protocol(settings, check: bool, out) -> int:
    params = ModelParams.simplified(_float(settings, "omega_m", 0.5), _float(settings, "g", 2.0))
    t = _float(settings, "lambda1_t", 1.0)
    tau = _float(settings, "lambda1_tau", 2.0)
    if tau < t:
        raise UsageError("lambda1_tau must not be smaller than lambda1_t")
    tree = run_full_protocol(params, t, tau)
    rows = branch_table(tree)
    print(f"# omega_m={fmt(params.omega_m)} g={fmt(params.g)} lambda1_t={fmt(t)} lambda1_tau={fmt(tau)}", file=out)
    print(f"{'stage':8s}{'case':>5s}  {'outcome':38s}{'name':6s}{'class':15s}{'P(cond)':>12s}{'P(cum)':>12s}{'E':>10s}", file=out)
    for r in rows:
        e = "" if not r[7] else f"{float(r[7]):.6f}"
        print(f"{r[0]:8s}{r[1]:>5s}  {r[2]:38s}{r[3]:6s}{r[4]:15s}{float(r[5]):12.8f}{float(r[6]):12.8f}{e:>10s}", file=out)
    print("final pair (1,8) results:", file=out)
    for (case, primed), s in sorted(tree.final_results.items()):
        tag = f"{case}{chr(39) if primed else ''}"
        print(f"  E{tag:<3s}= {s.E:.12f}   P{tag:<3s}= {s.P:.12f}", file=out)
    report = check_invariants(tree) if check else verify_symmetries(tree)
    print("invariant checks:" if check else "symmetry checks:", file=out)
    for line in report.lines():
        print("  " + line, file=out)
    if "output" in settings:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BRANCH_COLUMNS)
        writer.writerows(rows)
        Path(settings["output"]).write_text(buf.getvalue())
    return 0 if report.passed else 2


def _cmd_sweep(settings) -> int:
    points = int(settings.get("points", DEFAULT_POINTS))
    if "quantity" not in settings:
        raise UsageError("sweep needs --quantity")
    grid = {
        axis: parse_axis(settings[axis], points)
        for axis in AXES
        if axis in settings
    }
    case = settings.get("case")
    config = SweepConfig(
        settings["quantity"],
        None if case is None else int(case),
        grid,
        Path(settings["output"]) if "output" in settings else None,
        threads=int(settings.get("threads", 1)),
    )
    text = run_sweep(config)
    if config.output_path is None:
        sys.stdout.write(text)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings(args)
        if args.command == "stage-a":
            return _cmd_stage_a(settings, sys.stdout)
        if args.command == "protocol":
            return _cmd_protocol(settings, args.check, sys.stdout)
        if args.command == "sweep":
            return _cmd_sweep(settings)
        output = Path(settings["output"]) if "output" in settings else None
        text = run_figure(
            args.command,
            output,
            int(settings.get("points", DEFAULT_POINTS)),
            int(settings.get("threads", 1)),
        )
        if output is None:
            sys.stdout.write(text)
        return 0
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"omrepeater: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
