"""Command-line front end: validation tables, parameter sweeps and figure CSVs.

Subcommands: validate, fig2, fig3, fig4, sweep. Every command reads an
optional flat config file, applies CLI overrides, and emits deterministic
CSV (fixed seed => byte-identical output, independent of worker count).
Exit codes: 0 pass, 1 validation failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import analytic, simulator
from .analytic import QuadratureConstants
from .config import ConfigError, ExperimentConfig, load_config
from .simulator import TrialSpec, estimate_sop

_VALIDATE_HEADER = ("formula", "scenario", "analytic", "mc", "mc_stderr",
                    "abs_diff", "tolerance", "status")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _write_csv(path: str, config: ExperimentConfig, header, rows) -> None:
    meta = (f"# config_hash={config.config_hash()} "
            f"master_seed={config.master_seed} "
            f"quadrature_n={config.quadrature_n} "
            f"abs_tol={config.abs_tol:g} "
            f"mc_tolerance=max(0.02,3*stderr)")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(meta + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _models(config: ExperimentConfig):
    geometry = config.geometry()
    pair = config.pair()
    mode = config.sampling_mode()
    constants = QuadratureConstants.build(geometry, config.quadrature_n)
    return geometry, pair, mode, constants


def cmd_validate(config: ExperimentConfig, out_path: str | None = None,
                 corrupt: str | None = None) -> int:
    """Run every analytic-vs-MC oracle pair; nonzero exit on any miss."""
    geometry, pair, mode, constants = _models(config)
    seed, n_trials = config.master_seed, config.n_trials
    abs_tol = config.abs_tol

    spec1 = TrialSpec(config=pair, geometry=geometry, mode=mode,
                      scenario=simulator.CASE1)
    rates = simulator.case1_event_rates(spec1, n_trials, seed)
    sop1 = analytic.sop_case1(pair, geometry, constants, abs_tol)

    rows_raw = [
        ("sop_case1", "case1", sop1.value, rates["sop"]),
        ("pr_secrecy_outage_strong", "case1",
         sop1.metadata["pr_e2_bar"], rates["e2_bar"]),
        ("pr_E4_bar", "case1", sop1.metadata["pr_e4_bar"], rates["e4_bar"]),
    ]
    for strategy, scenario in ((analytic.RELAY, simulator.CASE2_RELAY),
                               (analytic.FJR, simulator.CASE2_FJR)):
        est = analytic.sop_weak_high_snr(pair, geometry, constants, strategy,
                                         abs_tol)
        spec2 = TrialSpec(config=pair, geometry=geometry, mode=mode,
                          scenario=scenario)
        mc = estimate_sop(spec2, n_trials, seed, workers=config.workers)
        rows_raw.append((f"sop_weak_high_snr[{strategy}]", scenario,
                         est.value, mc))

    rows = []
    failed = False
    for formula, scenario, value, mc in rows_raw:
        if corrupt == formula:
            value = min(1.0, value + 0.05)
        tol = max(0.02, 3.0 * mc.stderr)
        diff = abs(value - mc.estimate)
        ok = diff <= tol
        failed |= not ok
        rows.append((formula, scenario, value, mc.estimate, mc.stderr, diff,
                     tol, "pass" if ok else "FAIL"))

    widths = [max(len(h), 24) for h in _VALIDATE_HEADER]
    print("  ".join(h.ljust(w) for h, w in zip(_VALIDATE_HEADER, widths)))
    for row in rows:
        print("  ".join(_fmt(v).ljust(w) for v, w in zip(row, widths)))
    _write_csv(out_path or "validate.csv", config, _VALIDATE_HEADER, rows)
    return 1 if failed else 0


def cmd_fig2(config: ExperimentConfig, out_path: str | None = None) -> int:
    """SOP versus protected-zone radius for each eavesdropper density."""
    _, pair, mode, _ = _models(config)
    rows = []
    for lam in config.fig2_lambda_e_values:
        for r_p in config.fig2_r_p_values:
            geometry = config.with_values(r_p=r_p, lambda_e=lam).geometry()
            constants = QuadratureConstants.build(geometry,
                                                  config.quadrature_n)
            est = analytic.sop_case1(pair, geometry, constants,
                                     config.abs_tol)
            spec = TrialSpec(config=pair, geometry=geometry, mode=mode,
                             scenario=simulator.CASE1)
            mc = estimate_sop(spec, config.n_trials, config.master_seed,
                              workers=config.workers)
            rows.append((r_p, lam, est.value, mc.estimate, mc.stderr))
    _write_csv(out_path or "fig2.csv", config,
               ("r_p", "lambda_e", "sop_analytic", "sop_mc", "mc_stderr"),
               rows)
    print(f"fig2: wrote {len(rows)} rows to {out_path or 'fig2.csv'}")
    return 0


def cmd_fig3(config: ExperimentConfig, out_path: str | None = None) -> int:
    """Cooperative vs non-cooperative SOP across BS power (shared seeds)."""
    geometry, _, mode, _ = _models(config)
    rows = []
    for p_bs_db in config.fig3_p_bs_db_values:
        pair = config.with_values(p_bs_db=float(p_bs_db)).pair()
        coop = estimate_sop(
            TrialSpec(config=pair, geometry=geometry, mode=mode,
                      scenario=simulator.CASE1),
            config.n_trials, config.master_seed, workers=config.workers)
        noeves = estimate_sop(
            simulator.no_eves_spec(
                TrialSpec(config=pair, geometry=geometry, mode=mode,
                          scenario=simulator.CASE1)),
            config.n_trials, config.master_seed, workers=config.workers)
        noncoop = estimate_sop(
            TrialSpec(config=pair, geometry=geometry, mode=mode,
                      scenario=simulator.NONCOOP_NOMA),
            config.n_trials, config.master_seed, workers=config.workers)
        rows.append((p_bs_db, coop.estimate, noeves.estimate,
                     noncoop.estimate))
    _write_csv(out_path or "fig3.csv", config,
               ("p_bs_db", "sop_sec_coop", "sop_coop_noeves",
                "sop_sec_noncoop"), rows)
    print(f"fig3: wrote {len(rows)} rows to {out_path or 'fig3.csv'}")
    return 0


def cmd_fig4(config: ExperimentConfig, out_path: str | None = None) -> int:
    """Weak-user SOP versus cooperation power per jamming split (1.0 = relay)."""
    geometry, _, mode, constants = _models(config)
    rows = []
    for beta in config.fig4_beta_values:
        strategy = analytic.RELAY if beta >= 1.0 else analytic.FJR
        scenario = (simulator.CASE2_RELAY if beta >= 1.0
                    else simulator.CASE2_FJR)
        for p_c_db in config.fig4_p_c_db_values:
            pair = config.with_values(p_c_db=float(p_c_db),
                                      beta=float(beta)).pair()
            est = analytic.sop_weak_high_snr(pair, geometry, constants,
                                             strategy, config.abs_tol)
            mc = estimate_sop(
                TrialSpec(config=pair, geometry=geometry, mode=mode,
                          scenario=scenario, high_snr_proxy=True),
                config.n_trials, config.master_seed, workers=config.workers)
            rows.append((p_c_db, beta, est.value, mc.estimate, mc.stderr))
    _write_csv(out_path or "fig4.csv", config,
               ("p_c_db", "beta", "sop_n_analytic", "sop_n_mc", "mc_stderr"),
               rows)
    print(f"fig4: wrote {len(rows)} rows to {out_path or 'fig4.csv'}")
    return 0


def cmd_sweep(config: ExperimentConfig, out_path: str | None = None) -> int:
    """Generic one-parameter case-1 sweep from the config's sweep descriptor."""
    sweep = config.sweep()
    rows = []
    for value in sweep.values:
        cfg = config.with_values(**{sweep.param: value})
        geometry, pair, mode, constants = _models(cfg)
        est = analytic.sop_case1(pair, geometry, constants, cfg.abs_tol)
        mc = estimate_sop(
            TrialSpec(config=pair, geometry=geometry, mode=mode,
                      scenario=simulator.CASE1),
            cfg.n_trials, cfg.master_seed, workers=cfg.workers)
        rows.append((value, est.value, mc.estimate, mc.stderr))
    unit = "dB" if sweep.db_scale else "linear"
    _write_csv(out_path or "sweep.csv", config,
               (f"{sweep.param}[{unit}]", "sop_analytic", "sop_mc",
                "mc_stderr"), rows)
    print(f"sweep over {sweep.param}: wrote {len(rows)} rows to "
          f"{out_path or 'sweep.csv'}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secnoma",
        description="Secrecy-outage laboratory for secure cooperative NOMA. "
                    "Config files are flat `key = value` text with # "
                    "comments; see the README for the key set.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("validate", "run every analytic-vs-Monte-Carlo oracle pair"),
            ("fig2", "SOP vs protected radius CSV"),
            ("fig3", "cooperation comparison CSV"),
            ("fig4", "weak-user SOP vs cooperation power CSV"),
            ("sweep", "generic one-parameter sweep CSV")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--seed", type=int, help="master seed (64-bit)")
        p.add_argument("--trials", type=int, help="Monte Carlo trials")
        p.add_argument("--workers", type=int, help="parallel workers")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--mode", choices=["paper", "analytic"],
                       help="sampling geometry")
        if name == "validate":
            p.add_argument("--corrupt", help=argparse.SUPPRESS)
        if name == "sweep":
            p.add_argument("--param", help="config field to sweep")
            p.add_argument("--values",
                           help="comma-separated sweep values")
            p.add_argument("--db", action="store_true",
                           help="mark the swept field as a dB quantity")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.mode is not None:
        overrides["mode"] = args.mode
    if getattr(args, "param", None):
        overrides["sweep_param"] = args.param
    if getattr(args, "values", None):
        overrides["sweep_values"] = tuple(
            float(v) for v in args.values.split(","))
    if getattr(args, "db", False):
        overrides["sweep_db"] = True
    try:
        return config.with_values(**overrides) if overrides else config
    except (ConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code in (0, 2) else 2
    try:
        config = _resolve_config(args)
        if args.command == "validate":
            return cmd_validate(config, args.out, corrupt=args.corrupt)
        if args.command == "fig2":
            return cmd_fig2(config, args.out)
        if args.command == "fig3":
            return cmd_fig3(config, args.out)
        if args.command == "fig4":
            return cmd_fig4(config, args.out)
        return cmd_sweep(config, args.out)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
