#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
nehari spectrum|gap-check|assumptions|solve|sweep --config <path> [--seed N] [--out DIR]

Коди виходу: 0 успіх, 1 використання/конфіг, 2 порушення гіпотези, 3 немає збіжності.
"""
import argparse
import os
import sys
from datetime import datetime
from typing import Dict, List, Optional, Sequence

import numpy as np

import config
import run_config
from errors import ConfigError, HypothesisViolation, NehariError, NonconvergenceError
from nonlinearity import audit_all
from run_config import RunConfig
from solver import SolveResult, minimax_audit, multistart_search, verify_solution
from spectral import assemble_operator, bloch_spectrum, check_gap, eigendecompose, potential_cell
from telegram_notify import send_error, send_message
from utils import clean_log, delete_file, get_logger, write_csv, write_json, write_plot_data

log = get_logger("main")

BLOCH_SAMPLES = {1: 64, 2: 16}  # квазіімпульсів на вісь; для N ≥ 3 — 8
MINIMAX_SAMPLES = 200


class UsageParser(argparse.ArgumentParser):
    """argparse з кодом виходу 1 замість 2 для помилок використання."""

    def error(self, message):
        raise ConfigError(f"використання: {message}")


class Outputs:
    """Файли, записані поточною командою; при збої видаляються."""

    def __init__(self, cfg: RunConfig, command: str):
        self.dir = cfg.output.dir
        self.prefix = cfg.output.prefix
        self.formats = cfg.output.formats
        self.plot = cfg.output.emit_plot_data
        self.command = command
        self.written: List[str] = []

    def path(self, suffix: str) -> str:
        return os.path.join(self.dir, f"{self.prefix}_{suffix}")

    def json(self, suffix: str, data: Dict) -> Optional[str]:
        if "json" not in self.formats:
            return None
        return self._record(write_json(self.path(suffix), data))

    def csv(self, suffix: str, header, rows) -> Optional[str]:
        if "csv" not in self.formats:
            return None
        return self._record(write_csv(self.path(suffix), header, rows))

    def plot_data(self, suffix: str, header, rows) -> Optional[str]:
        if not self.plot:
            return None
        return self._record(write_plot_data(self.path(suffix), header, rows))

    def _record(self, path: str) -> str:
        self.written.append(path)
        log(f"💾 Записано {path}")
        return path

    def keep(self) -> None:
        """Записане лишається навіть при подальшій помилці."""
        self.written = []

    def discard(self) -> None:
        for path in self.written:
            if delete_file(path):
                log(f"🗑 Видалено {path} через помилку команди {self.command}")
        self.written = []


def envelope(cfg: RunConfig) -> Dict:
    return {
        "version": config.VERSION,
        "generated_at": datetime.now(config.TIMEZONE).isoformat(timespec="seconds"),
        "config_echo": run_config.to_dict(cfg),
    }


# ----------------- КОМАНДИ -----------------

def cmd_spectrum(cfg: RunConfig, out: Outputs) -> int:
    torus = run_config.make_torus(cfg)
    potential = run_config.make_potential(cfg, torus)
    eig = eigendecompose(assemble_operator(torus, potential))
    report = check_gap(eig, strict=False)
    lam = eig.eigenvalues
    bands = bloch_spectrum(torus.dim, torus.period, potential_cell(torus, potential),
                           BLOCH_SAMPLES.get(torus.dim, 8))
    extra = {}
    if not np.any(potential.values):
        # V ≡ 0: σ(−Δ) ⊂ [0, 4N]
        extra["laplacian_band_ok"] = bool(lam.min() >= -1e-10 and lam.max() <= 4 * torus.dim + 1e-10)
    log(f"✔️ Спектр: {lam.size} власних значень у [{lam.min():.6g}, {lam.max():.6g}]")
    out.csv("spectrum.csv", ["index", "eigenvalue"], ((i, float(x)) for i, x in enumerate(lam)))
    out.plot_data("spectrum.dat", ["index", "eigenvalue"], ((i, float(x)) for i, x in enumerate(lam)))
    out.json("spectrum.json", {
        **envelope(cfg),
        "min": float(lam.min()),
        "max": float(lam.max()),
        "gap": {"lambda_minus_max": report.lambda_minus_max, "lambda_plus_min": report.lambda_plus_min},
        "gap_report": report.to_dict(),
        "bloch_bands": [list(b) for b in bands.bands],
        "reconstruction_error": eig.reconstruction_error(),
        **extra,
    })
    return 0


def cmd_gap_check(cfg: RunConfig, out: Outputs) -> int:
    torus = run_config.make_torus(cfg)
    eig = eigendecompose(assemble_operator(torus, run_config.make_potential(cfg, torus)))
    report = check_gap(eig, strict=False)
    out.json("gap.json", {**envelope(cfg), "gap_report": report.to_dict()})
    if not report.passed:
        out.keep()
        raise HypothesisViolation(f"немає спектральної щілини: {report.reason}", report=report)
    return 0


def cmd_assumptions(cfg: RunConfig, out: Outputs) -> int:
    torus = run_config.make_torus(cfg)
    bundle = audit_all(run_config.make_nonlinearity(cfg, torus))
    failed = [name for name, audit in bundle.items() if isinstance(audit, dict) and not audit["pass"]]
    if failed:
        log(f"⚠️ Не пройдено аудити: {', '.join(failed)}")
    out.json("assumptions.json", {**envelope(cfg), "audits": bundle, "failed": failed})
    return 0


def solution_entries(prob, result: SolveResult) -> List[Dict]:
    entries = []
    for cp in result.critical_points:
        report = verify_solution(prob, cp.point.u, result.c_estimate)
        entries.append({
            "energy": cp.point.energy,
            "residual_pointwise": report.residual_pointwise,
            "residual_nehari": list(report.residual_nehari),
            "norm_plus": report.norm_plus,
            "norm_minus": report.norm_minus,
            "orbit_class": cp.orbit_class,
            "start_index": cp.start_index,
            "grad_norm": cp.grad_norm,
            "values": [float(v) for v in cp.point.u.values],
        })
    return entries


def cmd_solve(cfg: RunConfig, out: Outputs) -> int:
    try:
        prob = run_config.make_problem(cfg)
    except HypothesisViolation as e:
        if e.report is not None and hasattr(e.report, "to_dict"):
            out.json("gap.json", {**envelope(cfg), "gap_report": e.report.to_dict()})
            out.keep()  # звіт про щілину пояснює код 2
        raise
    result = multistart_search(prob, cfg.solver)
    entries = solution_entries(prob, result)
    diagnostics = dict(result.diagnostics)
    diagnostics["orbit_classes"] = result.orbit_classes
    diagnostics["minimax_audit"] = minimax_audit(prob, result.c_estimate, MINIMAX_SAMPLES, cfg.solver.seed,
                                                 opts=cfg.solver)
    out.json("solve.json", {
        **envelope(cfg),
        "gap_report": prob.split.report.to_dict(),
        "solutions": entries,
        "c_estimate": result.c_estimate,
        "diagnostics": diagnostics,
    })
    coords = prob.torus.all_coords()
    axes = [f"x{i}" for i in range(prob.torus.dim)]
    for i, cp in enumerate(result.critical_points):
        rows = [(j, *map(int, coords[j]), float(v)) for j, v in enumerate(cp.point.u.values)]
        out.csv(f"solution_{i}.csv", ["index", *axes, "value"], rows)
        out.plot_data(f"solution_{i}.dat", [*axes, "value"], [row[1:] for row in rows])
    send_message(f"✔️ solve: ĉ={result.c_estimate:.10g}, точок {len(entries)}, "
                 f"класів орбіт {len(result.orbit_classes)}", silent=True)
    return 0


def _trend(values: Sequence[float]) -> str:
    if len(values) < 2:
        return "n/a"
    diffs = np.diff(values)
    if np.all(diffs <= 0):
        return "nonincreasing"
    if np.all(diffs >= 0):
        return "nondecreasing"
    return "mixed"


def cmd_sweep(cfg: RunConfig, out: Outputs, sides: Sequence[int]) -> int:
    if not sides:
        raise ConfigError("sweep: потрібен --sides")
    variants = [run_config.with_side(cfg, side) for side in sides]
    rows = []
    for side, variant in zip(sides, variants):
        log(f"⏳ sweep: сторона {side}")
        try:
            prob = run_config.make_problem(variant)
            result = multistart_search(prob, variant.solver)
            residual = max(verify_solution(prob, cp.point.u, result.c_estimate).residual_pointwise
                           for cp in result.critical_points)
            rows.append((side, "ok", result.c_estimate, residual, len(result.orbit_classes), ""))
        except NehariError as e:
            log(f"❌ sweep: сторона {side}: {type(e).__name__}: {e}")
            rows.append((side, type(e).__name__, "", "", "", str(e)))
    header = ["side", "status", "c_estimate", "residual", "n_orbits", "message"]
    out.csv("sweep.csv", header, rows)
    ok = [row for row in rows if row[1] == "ok"]
    out.plot_data("sweep.dat", ["side", "c_estimate", "residual"], [(r[0], r[2], r[3]) for r in ok])
    out.json("sweep.json", {
        **envelope(cfg),
        "rows": [dict(zip(header, row)) for row in rows],
        "trend": _trend([row[2] for row in ok]),
    })
    if not ok:
        raise NonconvergenceError("sweep: жодна сторона не дала розв'язку")
    return 0


# ----------------- ТОЧКА ВХОДУ -----------------

def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="nehari", description="Розв'язувач дискретного НРШ на узагальненому многовиді Нехарі")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)
    for name in ("spectrum", "gap-check", "assumptions", "solve", "sweep"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON-файл запуску")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--out", default=None, help="каталог результатів")
        cmd.add_argument("--emit-plot-data", action="store_true", help="колонки .dat для gnuplot")
        if name == "sweep":
            cmd.add_argument("--sides", type=int, nargs="+", required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    removed = clean_log(config.LOG_FILE, days=config.LOG_RETENTION_DAYS)
    if removed:
        log(f"🧹 Логи очищено — видалено {removed} старих рядків")

    try:
        args = build_parser().parse_args(argv)
        cfg = run_config.with_overrides(run_config.load_config(args.config), seed=args.seed,
                                        out_dir=args.out, emit_plot_data=args.emit_plot_data)
    except ConfigError as e:
        log(f"❌ {e}")
        return e.exit_code

    out = Outputs(cfg, args.command)
    log(f"⚡ Запуск {args.command} ({args.config})")
    try:
        if args.command == "spectrum":
            code = cmd_spectrum(cfg, out)
        elif args.command == "gap-check":
            code = cmd_gap_check(cfg, out)
        elif args.command == "assumptions":
            code = cmd_assumptions(cfg, out)
        elif args.command == "solve":
            code = cmd_solve(cfg, out)
        else:
            code = cmd_sweep(cfg, out, args.sides)
    except NehariError as e:
        log(f"❌ {args.command}: {type(e).__name__}: {e}")
        send_error(f"❌ {args.command}: {e}")
        out.discard()
        return e.exit_code
    except Exception as e:
        log(f"❌ {args.command}: непередбачена помилка: {e!r}")
        send_error(f"❌ {args.command}: непередбачена помилка: {e!r}")
        out.discard()
        return 1

    log("🎉 УСПІХ")
    return code


if __name__ == "__main__":
    sys.exit(main())
