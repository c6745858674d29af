"""``symcool`` command-line front end.

Exit status is 0 on success, 1 when ``validate`` finds a failing check and
2 for any configuration, input or output error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import cascade, montecarlo, rotation, validation
from .config import ConfigError, RunConfig, load_run_config, with_values
from .numerics import QuadratureError, RootError
from .species import SpeciesError, UnknownSpeciesError, apply_override, load_species_file
from .units import HARTREE_INVCM, to_ev, to_ms, um

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

COOL_COLUMNS = ("i", "E_cm_eV", "E_lab_eV", "width_eV", "mean_loss_eV", "n_coll", "tau_ms", "t_ms")
EXCITE_COLUMNS = ("E_cm_eV", "E_lab_eV", "phi_mean", "phi_lo", "phi_hi", "reliability_flag")
SWEEP_COLUMNS = ("E_cm_eV", "E_lab_eV", "T_ms", "N_coll", "lower_bound")
SPECIES_COLUMNS = ("name", "mass_amu", "charge", "polarity", "B_invcm", "QZ_au", "D_au")


class UsageError(Exception):
    """Bad command-line input detected after argument parsing."""


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


class Console:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def info(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def note(self, msg: str) -> None:
        if not self.quiet:
            print(msg, file=sys.stderr)

    def warn(self, msg: str) -> None:
        print(f"warning: {msg}", file=sys.stderr)


def _emit(args, text: str) -> None:
    """Table output goes to ``--out`` if given, otherwise to stdout."""
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


# -- argument parsing -------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--config", metavar="PATH", help="config file with a [run] section", **d)
    p.add_argument("--out", metavar="PATH", help="write the CSV table here (atomically)", **d)
    p.add_argument("--seed", type=int, **d)
    p.add_argument("--frame", choices=("cm", "lab"), help="frame of every energy given in eV", **d)
    p.add_argument("--convention", choices=cascade.CONVENTIONS, **d)
    p.add_argument("--quiet", action="store_true", **d)
    p.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE",
                   help="species.<name>.<key>=<value> or run.<key>=<value>; repeatable", **d)
    p.add_argument("--species-file", metavar="PATH", help="replace the default species file", **d)


def _pair_flags(p):
    p.add_argument("--mol", help="molecular ion, e.g. MgH+")
    p.add_argument("--atom", help="coolant ion, e.g. Mg+")


def _scenario_flags(p):
    p.add_argument("--scenario", choices=("CC", "SA"))
    p.add_argument("--d-um", type=float, dest="d_um", help="crystal lattice spacing")
    p.add_argument("--b-max-um", type=float, dest="b_max_um", help="crystal cutoff (default d/2)")
    p.add_argument("--trap-mhz", type=float, dest="trap_mhz", help="single-atom trap frequency f (omega = 2 pi f)")


def _energy_flags(p, init=True):
    if init:
        p.add_argument("--E-init", type=float, dest="E_init_eV", metavar="EV")
    p.add_argument("--E-final", type=float, dest="E_final_eV", metavar="EV")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symcool", description="Sympathetic cooling of molecular ions.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _global_flags(p, suppress=True)
        return p

    p = add("cool", "cooling time and collision number for one cycle")
    _pair_flags(p)
    _scenario_flags(p)
    _energy_flags(p)
    p.add_argument("--N", type=int, help="number of energy intervals")
    p.add_argument("--rule", choices=("geometric", "uniform"))
    p.add_argument("--mode", choices=("sum", "integral"))
    p.set_defaults(func=cmd_cool)

    p = add("excite", "accumulated rotational excitation versus initial energy")
    _pair_flags(p)
    p.add_argument("--d-um", type=float, dest="d_um")
    _energy_flags(p, init=False)
    p.add_argument("--E-inits", type=_float_list, metavar="LIST", help="comma-separated initial energies (eV)")
    p.add_argument("--E-range", type=float, nargs=3, metavar=("LO", "HI", "POINTS"),
                   help="evenly spaced initial energies (eV)")
    p.add_argument("--budget", type=float, help="report the initial energy where phi reaches this")
    p.add_argument("--estimator", choices=rotation.ESTIMATORS, help="polar molecules only")
    p.add_argument("--step-eV", type=float, dest="step_eV", help="polar step size (default 0.05)")
    p.add_argument("--N", type=int)
    p.set_defaults(func=cmd_excite)

    p = add("mc", "Monte Carlo collision cascade")
    _pair_flags(p)
    _scenario_flags(p)
    _energy_flags(p)
    p.add_argument("--n-runs", type=int, dest="n_runs")
    p.add_argument("--no-excitation", action="store_true", help="skip the apolar excitation tally")
    p.add_argument("--trace", metavar="PATH", help="write the collision trace of run 0 as CSV")
    p.add_argument("--cap", type=int, default=montecarlo.COLLISION_CAP, help="collision cap per run")
    p.add_argument("--schedule", type=_int_list, metavar="LIST",
                   help="convergence report over these run counts, written to --out or stdout")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_mc)

    p = add("sweep", "cooling time versus initial energy")
    _pair_flags(p)
    _scenario_flags(p)
    _energy_flags(p, init=False)
    p.add_argument("--E-inits", type=_float_list, metavar="LIST")
    p.add_argument("--E-range", type=float, nargs=3, metavar=("LO", "HI", "POINTS"))
    p.add_argument("--mode", choices=("sum", "integral"))
    p.add_argument("--N", type=int)
    p.set_defaults(func=cmd_sweep)

    p = add("validate", "rerun the reference checks; exit 1 if any fails")
    p.set_defaults(func=cmd_validate)

    p = add("species", "species registry")
    ssub = p.add_subparsers(dest="species_command", required=True, metavar="ACTION")
    q = ssub.add_parser("list", help="print the registry as CSV")
    _global_flags(q, suppress=True)
    q.set_defaults(func=cmd_species_list)
    return parser


_RUN_FLAGS = ("mol", "atom", "scenario", "d_um", "b_max_um", "trap_mhz", "E_init_eV", "E_final_eV",
              "N", "rule", "mode", "budget", "n_runs", "seed", "frame", "convention")


def resolve(args) -> tuple[RunConfig, object]:
    """Config file, then ``--set run.*``, then explicit flags; plus the species registry."""
    registry = load_species_file(getattr(args, "species_file", None))
    cfg = load_run_config(args.config) if getattr(args, "config", None) else RunConfig()
    run_values = {}
    for item in getattr(args, "overrides", None) or ():
        if item.startswith("run."):
            key, sep, value = item[4:].partition("=")
            if not sep:
                raise ConfigError(f"override must look like run.<key>=<value>, got {item!r}")
            run_values[key.strip()] = value.strip()
        else:
            registry = apply_override(registry, item)
    cfg = with_values(cfg, run_values, "--set")
    flags = {k: getattr(args, k) for k in _RUN_FLAGS if getattr(args, k, None) is not None}
    cfg = with_values(cfg, flags, "command line")
    return cfg, registry


def _final_energy(cfg: RunConfig, con: Console) -> float:
    if cfg.E_final_eV == 0:
        con.note(f"notice: E_final = 0 replaced by {cfg.floored_E_final:g} eV")
    return cfg.floored_E_final


def _initial_energies(args, cfg: RunConfig) -> list[float]:
    if getattr(args, "E_inits", None):
        return list(args.E_inits)
    if getattr(args, "E_range", None):
        lo, hi, n = args.E_range
        if n < 1 or n != int(n):
            raise UsageError("--E-range POINTS must be a positive integer")
        return list(np.linspace(lo, hi, int(n)))
    return [cfg.E_init_eV]


# -- commands -----------------------------------------------------------------

def cmd_cool(args, cfg: RunConfig, registry, con: Console) -> int:
    pair = cfg.pair(registry)
    sc = cfg.build_scenario()
    E_hi = cfg.energy(cfg.E_init_eV, pair)
    E_lo = cfg.energy(_final_energy(cfg, con), pair)
    if not E_hi > E_lo:
        raise UsageError("E_init must exceed E_final")
    res = cascade.total_cooling_time(E_hi, E_lo, pair, sc, mode=cfg.mode, N=cfg.N, rule=cfg.rule,
                                     convention=cfg.convention)
    bound = " (lower bound)" if res.lower_bound else ""
    con.info(f"pair {pair.label}, scenario {sc.kind}, convention {cfg.convention}, frame {cfg.frame}")
    con.info(f"E {to_ev(E_hi):.6g} -> {to_ev(E_lo):.6g} eV CM, {res.grid.N} intervals, mode {res.mode}")
    con.info(f"T = {to_ms(res.time):.6g} ms{bound}")
    con.info(f"N_coll = {res.n_collisions:.6g}{bound}")
    if args.out:
        t = np.cumsum(res.interval_times)
        rows = [(i, to_ev(E), to_ev(E) * (1 + pair.xi), to_ev(w), to_ev(l), n, to_ms(tau), to_ms(tt))
                for i, (E, w, l, n, tau, tt) in enumerate(zip(res.energies, res.grid.widths, res.mean_loss,
                                                               res.collisions, res.tau, t))]
        write_atomic(args.out, to_csv(COOL_COLUMNS, rows))
    return EXIT_OK


def cmd_excite(args, cfg: RunConfig, registry, con: Console) -> int:
    pair = cfg.pair(registry)
    if not pair.mol.is_molecule:
        raise UsageError(f"{pair.mol.name} is an atom; excitation needs a molecule")
    d = um(cfg.d_um)
    E_final = cfg.energy(_final_energy(cfg, con), pair)
    kw = {}
    if pair.mol.polarity == "polar":
        kw["estimator"] = args.estimator or "mean"
        if args.step_eV is not None:
            kw["step"] = cfg.energy(args.step_eV, pair)
    elif args.N is not None or cfg.N != RunConfig().N:
        kw["N"] = cfg.N
    rows = []
    unreliable = False
    for E_user in _initial_energies(args, cfg):
        E = cfg.energy(E_user, pair)
        if E < E_final:
            raise UsageError(f"initial energy {E_user:g} eV lies below E_final")
        res = rotation.cycle_excitation(E, E_final, pair, d, **kw)
        if pair.mol.polarity == "polar":
            lo, hi = res.phi_lo, res.phi_hi
        else:
            lo = hi = res.phi
        ok = res.reliable
        unreliable |= not ok
        rows.append((to_ev(E), to_ev(E) * (1 + pair.xi), res.phi, lo, hi, "ok" if ok else "unreliable"))
    _emit(args, to_csv(EXCITE_COLUMNS, rows))
    if unreliable:
        con.warn("some rows are outside the model's validity (high-field or large single-collision excitation)")
    if args.budget is not None:
        c = rotation.excitation_budget_inverse(pair, d, E_final, args.budget, **kw)
        con.note(f"phi = {args.budget:g} reached at E_init = {to_ev(c.E_cm):.6g} eV CM ({to_ev(c.E_lab):.6g} eV lab)")
    return EXIT_OK


def cmd_mc(args, cfg: RunConfig, registry, con: Console) -> int:
    if cfg.convention != "strict":
        raise UsageError("mc supports only the strict convention")
    pair = cfg.pair(registry)
    sc = cfg.build_scenario()
    E_init = cfg.energy(cfg.E_init_eV, pair)
    E_final = cfg.energy(_final_energy(cfg, con), pair)
    excitation = False if args.no_excitation else None
    mc_cfg = montecarlo.McConfig(pair, sc, E_init, E_final, seed=cfg.seed, n_runs=cfg.n_runs,
                                 record_trace=bool(args.trace), excitation=excitation,
                                 collision_cap=args.cap, workers=args.workers)
    if args.schedule:
        _emit(args, montecarlo.report_csv(montecarlo.convergence_report(mc_cfg, args.schedule)))
        return EXIT_OK
    summary = montecarlo.run(mc_cfg)
    con.info(f"pair {pair.label}, scenario {sc.kind}, {summary.n_runs} runs, seed {cfg.seed}")
    for q, label, conv in (("N_coll", "N_coll", float), ("T", "T [ms]", to_ms), ("phi", "phi", float)):
        if q == "phi" and not mc_cfg.excite:
            continue
        mean, se = summary.stat(q)
        se_txt = "n/a" if se is None else f"{conv(se):.6g}"
        con.info(f"{label} = {conv(mean):.6g} +- {se_txt}")
    if summary.partial:
        con.warn(f"collision cap {args.cap} reached; results are partial")
    if args.trace:
        write_atomic(args.trace, montecarlo.trace_csv(summary.traces[0]))
    if args.out:
        rows = [(i, r.n_collisions, to_ms(r.time), r.phi if mc_cfg.excite else None, r.capped)
                for i, r in enumerate(summary.runs)]
        write_atomic(args.out, to_csv(("run", "N_coll", "T_ms", "phi", "capped"), rows))
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig, registry, con: Console) -> int:
    pair = cfg.pair(registry)
    sc = cfg.build_scenario()
    E_lo = cfg.energy(_final_energy(cfg, con), pair)
    rows = []
    for E_user in _initial_energies(args, cfg):
        E = cfg.energy(E_user, pair)
        if not E > E_lo:
            raise UsageError(f"initial energy {E_user:g} eV does not exceed E_final")
        res = cascade.total_cooling_time(E, E_lo, pair, sc, mode=cfg.mode, N=cfg.N, rule=cfg.rule,
                                         convention=cfg.convention)
        rows.append((to_ev(E), to_ev(E) * (1 + pair.xi), to_ms(res.time), res.n_collisions, res.lower_bound))
    _emit(args, to_csv(SWEEP_COLUMNS, rows))
    return EXIT_OK


def cmd_validate(args, cfg: RunConfig, registry, con: Console) -> int:
    results = validation.run_checks(registry)
    rows = [(c.name, c.target, c.computed, c.tolerance, c.verdict) for c in results]
    if args.out:
        write_atomic(args.out, to_csv(("check", "target", "computed", "tolerance", "verdict"), rows))
    for c in results:
        con.info(c.line())
    failed = sum(not c.passed for c in results)
    con.info(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if validation.all_passed(results) else EXIT_FAIL


def cmd_species_list(args, cfg: RunConfig, registry, con: Console) -> int:
    rows = [(s.name, s.mass, s.charge, s.polarity, None if s.B is None else s.B * HARTREE_INVCM, s.QZ, s.D)
            for s in registry.values()]
    _emit(args, to_csv(SPECIES_COLUMNS, rows))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    con = Console(getattr(args, "quiet", False))
    try:
        cfg, registry = resolve(args)
        return args.func(args, cfg, registry, con)
    except UnknownSpeciesError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ConfigError, SpeciesError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (QuadratureError, RootError) as exc:
        # only reachable with inputs far outside the physical range
        print(f"error: numerical failure: {exc}", file=sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
