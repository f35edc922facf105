"""Command-line front end.

Parses a flat INI-style configuration, runs solves, sweeps and audits, and
emits CSV tables sufficient to regenerate every model figure with any
plotting tool. Every run also writes ``manifest.ini`` holding the fully
resolved configuration (valid as a config for an identical re-run) with
solver diagnostics as comments. Identical configurations produce
byte-identical CSVs.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analysis
from .params import EconParams, GridSpec
from .solver import (
    ConvergenceError,
    DECISION_LABELS,
    solve_closed,
    solve_open,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

COMMANDS = (
    "solve-open", "solve-closed", "window", "sweep-size", "sweep-phi",
    "sweep-qb", "phi-compare", "develop", "audit", "all-figures",
)


class ConfigError(ValueError):
    """Invalid or unknown configuration input."""


@dataclass
class Experiment:
    q_b: float = 100.0
    m_values: tuple = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9)
    phi_values: tuple = (0.02, 0.05, 0.1, 0.2, 0.35, 0.5)
    qb_values: tuple = (50.0, 100.0, 150.0, 200.0, 250.0)
    dev_m_values: tuple = (0.1, 0.2, 0.4)
    dev_qb_values: tuple = (20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0, 160.0, 180.0, 200.0)
    quadrature_nodes: int = 101
    phi_low: float = 0.1
    phi_high: float = 0.5


@dataclass
class RunConfig:
    params: EconParams = field(default_factory=EconParams)
    grid: GridSpec = field(default_factory=GridSpec)
    tol: float = 1e-6
    max_iter: int = 10000
    interpolation: str = "linear"
    experiment: Experiment = field(default_factory=Experiment)
    out_dir: Path = Path("out")


def _parse_scalar(section: str, key: str, raw: str, target_type):
    try:
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        if target_type is tuple:
            return tuple(float(v) for v in raw.replace(",", " ").split())
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def _apply_section(cfg_obj, section_name: str, items: dict):
    fields = {f.name: f for f in dataclasses.fields(cfg_obj)}
    updates = {}
    for key, raw in items.items():
        if key not in fields:
            raise ConfigError(f"unknown key '{key}' in section [{section_name}]")
        ftype = fields[key].type
        target = {"int": int, "float": float, "tuple": tuple, "str": str}.get(ftype, float)
        updates[key] = _parse_scalar(section_name, key, raw, target)
    try:
        return replace(cfg_obj, **updates)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None) -> RunConfig:
    """Read and validate a run configuration; defaults are the baseline."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    known = {"params", "grid", "solver", "experiment", "output"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    if parser.has_section("params"):
        cfg.params = _apply_section(cfg.params, "params", dict(parser.items("params")))
    if parser.has_section("grid"):
        grid_items = {k: v for k, v in parser.items("grid")}
        cfg.grid = _apply_section(cfg.grid, "grid", grid_items)
    if parser.has_section("solver"):
        for key, raw in parser.items("solver"):
            if key == "tol":
                cfg.tol = _parse_scalar("solver", key, raw, float)
            elif key == "max_iter":
                cfg.max_iter = _parse_scalar("solver", key, raw, int)
            elif key == "interpolation":
                if raw not in ("linear", "nearest"):
                    raise ConfigError(f"[solver] interpolation must be linear or nearest, got {raw!r}")
                cfg.interpolation = raw
            else:
                raise ConfigError(f"unknown key '{key}' in section [solver]")
    if parser.has_section("experiment"):
        cfg.experiment = _apply_section(cfg.experiment, "experiment", dict(parser.items("experiment")))
    if parser.has_section("output"):
        for key, raw in parser.items("output"):
            if key != "directory":
                raise ConfigError(f"unknown key '{key}' in section [output]")
            cfg.out_dir = Path(raw.strip())
    return cfg


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _grid_fields(cfg: RunConfig):
    return {f.name: getattr(cfg.grid, f.name) for f in dataclasses.fields(cfg.grid)}


def write_manifest(path: Path, cfg: RunConfig, command: str, diagnostics: dict):
    lines = [f"# oswindow run manifest: command={command}", "#"]
    for key, val in diagnostics.items():
        lines.append(f"# {key} = {val}")
    lines.append("")
    lines.append("[params]")
    for f in dataclasses.fields(cfg.params):
        lines.append(f"{f.name} = {_fmt(getattr(cfg.params, f.name))}")
    lines.append("")
    lines.append("[grid]")
    for name, val in _grid_fields(cfg).items():
        lines.append(f"{name} = {_fmt(val)}")
    lines.append("")
    lines.append("[solver]")
    lines.append(f"tol = {_fmt(cfg.tol)}")
    lines.append(f"max_iter = {cfg.max_iter}")
    lines.append(f"interpolation = {cfg.interpolation}")
    lines.append("")
    lines.append("[experiment]")
    for f in dataclasses.fields(cfg.experiment):
        val = getattr(cfg.experiment, f.name)
        if isinstance(val, tuple):
            lines.append(f"{f.name} = {', '.join(_fmt(v) for v in val)}")
        else:
            lines.append(f"{f.name} = {_fmt(val)}")
    lines.append("")
    lines.append("[output]")
    lines.append(f"directory = {cfg.out_dir}")
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _solve_pair(cfg: RunConfig, p=None):
    p = p or cfg.params
    v_open = solve_open(p, cfg.grid, tol=cfg.tol, max_iter=cfg.max_iter,
                        interpolation=cfg.interpolation)
    closed = solve_closed(v_open, p, cfg.grid, tol=cfg.tol, max_iter=cfg.max_iter,
                          interpolation=cfg.interpolation)
    return v_open, closed


def _open_rows(v_open):
    return [(q, v, k) for q, v, k in zip(v_open.q_grid, v_open.value, v_open.policy_k)]


def _closed_rows(closed):
    q = closed.q_grid
    rows = []
    for i in range(len(q)):
        for j in range(len(q)):
            rows.append((q[i], q[j], closed.value[i, j], closed.policy_k[i, j],
                         closed.policy_p[i, j], DECISION_LABELS[int(closed.decision[i, j])]))
    return rows


def _window_rows(parameter_values, windows):
    return [(pv, w.q_b, w.q_star, w.abs_width, w.rel_width)
            for pv, w in zip(parameter_values, windows)]


WINDOW_HEADER = ("parameter", "q_b", "q_star", "abs_width", "rel_width")


def run(command: str, cfg: RunConfig, out_dir: Path = None) -> list:
    """Execute one command, returning the list of files written.

    On any failure partially written outputs are removed before the
    exception propagates.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    out = Path(out_dir) if out_dir is not None else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    written = []
    diagnostics = {}

    def emit(name, header, rows):
        path = out / name
        _write_csv(path, header, rows)
        written.append(path)

    def note_solution(tag, sol):
        diagnostics[f"{tag}_iterations"] = sol.iterations
        diagnostics[f"{tag}_residual"] = _fmt(sol.residual)
        diagnostics[f"{tag}_clamped_transitions"] = sol.n_clamped

    ex = cfg.experiment
    try:
        if command == "solve-open":
            v_open = solve_open(cfg.params, cfg.grid, tol=cfg.tol, max_iter=cfg.max_iter,
                                interpolation=cfg.interpolation)
            note_solution("open", v_open)
            emit("open_value.csv", ("q", "value", "policy_k"), _open_rows(v_open))

        elif command == "solve-closed":
            v_open, closed = _solve_pair(cfg)
            note_solution("open", v_open)
            note_solution("closed", closed)
            emit("closed_value.csv",
                 ("q_a", "q_b", "value", "policy_k", "policy_p", "decision"),
                 _closed_rows(closed))

        elif command == "window":
            v_open, closed = _solve_pair(cfg)
            note_solution("closed", closed)
            win = analysis.open_source_window(closed, ex.q_b)
            diagnostics["window_contiguous"] = win.contiguous
            emit("window.csv", WINDOW_HEADER, _window_rows([ex.q_b], [win]))

        elif command == "sweep-size":
            res = analysis.sweep_firm_size(ex.m_values, cfg.params, cfg.grid, ex.q_b,
                                           tol=cfg.tol, max_iter=cfg.max_iter,
                                           interpolation=cfg.interpolation)
            emit("sweep_size.csv", WINDOW_HEADER, _window_rows(res.values, res.windows))

        elif command == "sweep-phi":
            res = analysis.sweep_phi(ex.phi_values, cfg.params, cfg.grid, ex.q_b,
                                     tol=cfg.tol, max_iter=cfg.max_iter,
                                     interpolation=cfg.interpolation)
            emit("sweep_phi.csv", WINDOW_HEADER, _window_rows(res.values, res.windows))

        elif command == "sweep-qb":
            res = analysis.sweep_qb(ex.qb_values, cfg.params, cfg.grid,
                                    tol=cfg.tol, max_iter=cfg.max_iter,
                                    interpolation=cfg.interpolation)
            emit("sweep_qb.csv", WINDOW_HEADER, _window_rows(res.values, res.windows))

        elif command == "phi-compare":
            crossing, low, high = analysis.phi_value_crossing(
                cfg.params, cfg.grid, ex.q_b, ex.phi_low, ex.phi_high,
                tol=cfg.tol, max_iter=cfg.max_iter, interpolation=cfg.interpolation)
            diagnostics["phi_crossing"] = "none" if crossing is None else _fmt(crossing)
            q = cfg.grid.q_grid
            j = len(q) - len(low)
            rows = [(q[j + i], ex.q_b, low[i], high[i]) for i in range(len(low))]
            emit("phi_compare.csv", ("q_a", "q_b", "value_phi_low", "value_phi_high"), rows)

        elif command == "develop":
            rows = []
            for m in ex.dev_m_values:
                p_m = replace(cfg.params, m=float(m))
                v_open, closed = _solve_pair(cfg, p_m)
                for qb in ex.dev_qb_values:
                    dev = analysis.development_value(float(qb), v_open, closed, p_m,
                                                    n_quadrature=ex.quadrature_nodes)
                    rows.append((dev.q_b, m, dev.expected_value))
            emit("develop.csv", ("q_b", "m", "expected_value"), rows)

        elif command == "audit":
            v_open, closed = _solve_pair(cfg)
            note_solution("closed", closed)
            report = analysis.audit_propositions(closed, v_open, cfg.params)
            rows = [("threshold", qa, qb, detail) for qa, qb, detail in report.threshold_violations]
            rows += [("price-cap", qa, qb, detail) for qa, qb, detail in report.price_violations]
            diagnostics["audit_states_checked"] = report.n_states_checked
            diagnostics["audit_clean"] = report.clean
            emit("audit.csv", ("proposition", "q_a", "q_b", "detail"), rows)

        elif command == "all-figures":
            v_open, closed = _solve_pair(cfg)
            note_solution("open", v_open)
            note_solution("closed", closed)
            q = cfg.grid.q_grid
            j = int(np.argmin(np.abs(q - ex.q_b)))
            fig6 = [(q[i], q[j], v_open.value[i], closed.value[i, j],
                     DECISION_LABELS[int(closed.decision[i, j])]) for i in range(j, len(q))]
            emit("fig6.csv", ("q_a", "q_b", "v_open", "v_closed", "decision"), fig6)

            crossing, low, high = analysis.phi_value_crossing(
                cfg.params, cfg.grid, ex.q_b, ex.phi_low, ex.phi_high,
                tol=cfg.tol, max_iter=cfg.max_iter, interpolation=cfg.interpolation)
            diagnostics["phi_crossing"] = "none" if crossing is None else _fmt(crossing)
            rows = [(q[j + i], ex.q_b, low[i], high[i]) for i in range(len(low))]
            emit("fig7.csv", ("q_a", "q_b", "value_phi_low", "value_phi_high"), rows)

            res = analysis.sweep_firm_size(ex.m_values, cfg.params, cfg.grid, ex.q_b,
                                           tol=cfg.tol, max_iter=cfg.max_iter,
                                           interpolation=cfg.interpolation)
            emit("fig8.csv", WINDOW_HEADER, _window_rows(res.values, res.windows))

            rows = []
            for m in ex.dev_m_values:
                p_m = replace(cfg.params, m=float(m))
                vo_m, cl_m = _solve_pair(cfg, p_m)
                for qb in ex.dev_qb_values:
                    dev = analysis.development_value(float(qb), vo_m, cl_m, p_m,
                                                    n_quadrature=ex.quadrature_nodes)
                    rows.append((dev.q_b, m, dev.expected_value))
            emit("fig9.csv", ("q_b", "m", "expected_value"), rows)

            res = analysis.sweep_qb(ex.qb_values, cfg.params, cfg.grid,
                                    tol=cfg.tol, max_iter=cfg.max_iter,
                                    interpolation=cfg.interpolation)
            emit("figC1.csv", WINDOW_HEADER, _window_rows(res.values, res.windows))

            res = analysis.sweep_phi(ex.phi_values, cfg.params, cfg.grid, ex.q_b,
                                     tol=cfg.tol, max_iter=cfg.max_iter,
                                     interpolation=cfg.interpolation)
            emit("figC2.csv", WINDOW_HEADER, _window_rows(res.values, res.windows))

        manifest = out / "manifest.ini"
        run_cfg = replace(cfg, out_dir=out)
        write_manifest(manifest, run_cfg, command, diagnostics)
        written.append(manifest)
    except Exception:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oswindow",
        description="Solve the open-sourcing model and export figure tables as CSV.",
    )
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--config", type=Path, default=None, help="INI configuration file")
    parser.add_argument("--out", type=Path, default=None, help="output directory override")
    parser.add_argument("--nearest-node", action="store_true",
                        help="use nearest-node continuation instead of linear interpolation")
    parser.add_argument("--seedless", action="store_true",
                        help="assert that the run involves no randomness (always true here)")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.nearest_node:
            cfg.interpolation = "nearest"
        files = run(args.command, cfg, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in files:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
