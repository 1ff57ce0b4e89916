"""Command-line interface: ``ladder build|check``, ``cells``, ``verify``, ``omega-scan``.

Exit codes: 0 success, 1 residual-gate failure, 2 configuration error,
3 numerical non-convergence.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
from pathlib import Path
import sys

import numpy as np

from . import reports
from .errors import (
    AdmissibilityError,
    BracketError,
    ConvergenceError,
    DeformationError,
    DomainError,
    IsolationError,
    MeanValueError,
    QuadratureError,
    TableError,
)
from .generators import (
    DeformationSpec,
    make_bessel_generator,
    make_cn_generator,
    make_hardy_z_generator,
    make_sn_generator,
    validate_cell,
)
from .ladder import LadderConfig, build_ladder_table, check_ladder_asymptotics, export_csv, load_table, read_header
from .theorem_lab import CellProfile, functional_F, solve_exponent, verify_cell

EXIT_OK = 0
EXIT_GATE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("jacobs_ladder")

FAMILIES = ("sn", "cn", "bessel", "z")
DEFAULT_TABLE = "ladder_table.bin"


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    family: str = None
    k_sq: float = 0.5
    nu: float = 0.0
    deform_amps: tuple = ()
    deform_at: tuple = ()
    index: int = None
    near: float = None
    cell_range: tuple = None
    max_cells: int = 8
    ladder: LadderConfig = field(default_factory=LadderConfig)
    t_max: float = 1e4
    table: str = DEFAULT_TABLE
    tolerance: float = 1e-4
    allow_inadmissible: bool = False
    json_out: str = None
    csv_out: str = None
    emit: tuple = ()
    out_dir: str = "."
    workers: int = 1

    def validate(self):
        if self.family is not None and self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if len(self.deform_amps) != len(self.deform_at):
            raise ConfigError("--deform-amps and --deform-at need the same length")
        if any(not 0 < u < 1 for u in self.deform_at):
            raise ConfigError("--deform-at positions are fractions in (0, 1)")
        if self.deform_amps and self.family is None:
            raise ConfigError("a deformation needs a base family")
        if not self.t_max >= self.ladder.t_min:
            raise ConfigError("--t-max below t_min")


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def read_config_file(path):
    """``key = value`` lines mirroring the long flags; ``#`` starts a comment."""
    tokens = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens.append(flag)
            tokens.extend(value.split())
    return tokens


def _common(parser):
    parser.add_argument("--config", help="key=value file mirroring the flags")
    parser.add_argument("--table", default=DEFAULT_TABLE, help="ladder table path")
    parser.add_argument("--t-max", type=float, default=1e4)
    parser.add_argument("--t-min", type=float, default=30.0)
    parser.add_argument("--c0", type=float, default=0.0, help="TKA constant c0")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for per-cell jobs")
    parser.add_argument("-v", "--verbose", action="store_true")


def _family(parser):
    parser.add_argument("--family", choices=FAMILIES, required=True)
    parser.add_argument("--k2", type=float, default=0.5, help="squared modulus for sn/cn")
    parser.add_argument("--nu", type=float, default=0.0, help="Bessel order")


def _selector(parser):
    g = parser.add_mutually_exclusive_group(required=True)
    g.add_argument("--index", type=int, help="family cell index")
    g.add_argument("--near", type=float, help="first cell with gamma' >= this value")
    g.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    parser.add_argument("--max-cells", type=int, default=8)


def build_parser():
    p = argparse.ArgumentParser(prog="jacobs-ladder", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    lad = sub.add_parser("ladder", help="ladder table operations")
    lsub = lad.add_subparsers(dest="action", required=True)
    b = lsub.add_parser("build", help="build and persist the ladder table")
    _common(b)
    b.add_argument("--force", action="store_true", help="rebuild even if the table matches")
    b.add_argument("--csv", help="also export (T, phi1, hl) as CSV")
    c = lsub.add_parser("check", help="asymptotic residual report of the persisted table")
    _common(c)
    c.add_argument("--json", dest="json_out")

    cells = sub.add_parser("cells", help="list and validate cells of a family")
    _common(cells)
    _family(cells)
    cells.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    cells.add_argument("--json", dest="json_out")

    v = sub.add_parser("verify", help="run the mean-value pipeline on selected cells")
    _common(v)
    _family(v)
    _selector(v)
    v.add_argument("--tolerance", type=float, default=1e-4)
    v.add_argument("--allow-inadmissible", action="store_true")
    v.add_argument("--deform-amps", type=_floats, default=(), help="comma-separated bump amplitudes")
    v.add_argument("--deform-at", type=_floats, default=(), help="bump centers as fractions of the cell")
    v.add_argument("--json", dest="json_out")
    v.add_argument("--csv", dest="csv_out")
    v.add_argument("--emit", action="append", default=[], choices=["plot"])
    v.add_argument("--out-dir", default=".")

    o = sub.add_parser("omega-scan", help="omega across gamma' bands")
    _common(o)
    _family(o)
    o.add_argument("--bands", nargs="+", required=True, metavar="LO:HI")
    o.add_argument("--max-cells", type=int, default=8)
    o.add_argument("--allow-inadmissible", action="store_true")
    o.add_argument("--json", dest="json_out")
    return p


def parse(argv):
    """Parse ``argv``, splicing config-file tokens before the command-line flags."""
    argv = list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        head = 2 if argv and argv[0] == "ladder" else 1
        argv = argv[:head] + read_config_file(known.config) + argv[head:]
    return build_parser().parse_args(argv)


def run_config(args):
    ladder = LadderConfig(tka_c0=args.c0, t_min=args.t_min)
    rc = RunConfig(
        family=getattr(args, "family", None),
        k_sq=getattr(args, "k2", 0.5),
        nu=getattr(args, "nu", 0.0),
        deform_amps=tuple(getattr(args, "deform_amps", ())),
        deform_at=tuple(getattr(args, "deform_at", ())),
        index=getattr(args, "index", None),
        near=getattr(args, "near", None),
        cell_range=tuple(args.range) if getattr(args, "range", None) else None,
        max_cells=getattr(args, "max_cells", 8),
        ladder=ladder,
        t_max=args.t_max,
        table=args.table,
        tolerance=getattr(args, "tolerance", 1e-4),
        allow_inadmissible=getattr(args, "allow_inadmissible", False),
        json_out=getattr(args, "json_out", None),
        csv_out=getattr(args, "csv_out", None),
        emit=tuple(getattr(args, "emit", ())),
        out_dir=getattr(args, "out_dir", "."),
        workers=args.workers,
    )
    rc.validate()
    return rc


def make_generator(family, k_sq=0.5, nu=0.0):
    if family == "sn":
        return make_sn_generator(k_sq)
    if family == "cn":
        return make_cn_generator(k_sq)
    if family == "bessel":
        return make_bessel_generator(nu)
    if family == "z":
        return make_hardy_z_generator()
    raise ConfigError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# ladder table


def _table_matches(path, config, t_max):
    try:
        stored, stored_t_max, _ = read_header(path)
    except (OSError, TableError):
        return False
    if not Path(str(path) + ".hl").exists():
        return False
    return stored == config and stored_t_max == t_max


def obtain_table(rc, force=False):
    """Load the persisted table when it matches the configuration, else build it."""
    path = Path(rc.table)
    if not force and _table_matches(path, rc.ladder, rc.t_max):
        try:
            return load_table(path), True
        except TableError as exc:
            log.warning("stored table unusable (%s); rebuilding", exc)
    if path.exists() and not force:
        log.info("stored table missing, corrupt or built for another configuration; rebuilding")
    table = build_ladder_table(rc.t_max, rc.ladder)
    table.save(path)
    return table, False


def cmd_ladder_build(args, rc):
    table, cached = obtain_table(rc, force=args.force)
    if cached:
        print(f"cache hit: {rc.table} ({table.T.size} points up to T = {table.t_hi:g})")
    else:
        print(f"built {rc.table}: {table.T.size} points up to T = {table.t_hi:g}")
    if args.csv:
        export_csv(table, args.csv)
    return EXIT_OK


def cmd_ladder_check(args, rc):
    table, _ = obtain_table(rc)
    rep = check_ladder_asymptotics(table)
    text = reports.dumps(rep)
    if rc.json_out:
        reports.write_text(rc.json_out, text)
    for d, v in sorted(rep.decade_max_rel.items()):
        print(f"decade 1e{d}: max relative residual {v:.3e}")
    for f in rep.flags:
        print(f"FLAG: {f}")
    return EXIT_OK if rep.ok else EXIT_GATE


# ---------------------------------------------------------------------------
# cells


def cmd_cells(args, rc):
    G = make_generator(rc.family, rc.k_sq, rc.nu)
    lo, hi = rc.cell_range
    cells = G.cells(lo, hi) if hi > lo else []
    rows = []
    print(f"{'index':>7} {'gamma_lo':>20} {'gamma_hi':>20} {'t0':>20} {'width':>10} status")
    for c in cells:
        v = validate_cell(G, c)
        status = "ok" if v.ok else "INVALID"
        if not v.admissible:
            status += " inadmissible"
        print(f"{c.index:>7} {c.gamma_lo:>20.12f} {c.gamma_hi:>20.12f} {c.t0:>20.12f} {c.width:>10.6f} {status}")
        rows.append(v.to_dict())
    skipped = getattr(G, "skipped", [])
    for a, b, why in skipped:
        if lo <= a and b <= hi:
            print(f"skipped [{a:.12f}, {b:.12f}]: {why}")
    if rc.json_out:
        reports.write_text(rc.json_out, reports.dumps({"generator": G.to_dict(), "cells": rows}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# per-cell jobs

_WORKER = {}


def _init_worker(table_path):
    _WORKER["table"] = load_table(table_path)
    _WORKER["gens"] = {}


def _worker_generator(family, k_sq, nu):
    key = (family, k_sq, nu)
    gens = _WORKER.setdefault("gens", {})
    if key not in gens:
        gens[key] = make_generator(family, k_sq, nu)
    return gens[key]


def _verify_job(job):
    """One cell: returns (report dict, profile csv or None) or an error tuple."""
    table = _WORKER["table"]
    G = _worker_generator(job["family"], job["k_sq"], job["nu"])
    cell = job["cell"]
    try:
        if job["deform_amps"]:
            centers = tuple(cell.gamma_lo + u * cell.width for u in job["deform_at"])
            spec = DeformationSpec(G, cell, job["deform_amps"], centers)
            _, rep = functional_F(
                table, spec, tolerance=job["tolerance"], allow_inadmissible=job["allow_inadmissible"]
            )
            G = None
        else:
            rep = verify_cell(
                table, G, cell, tolerance=job["tolerance"], allow_inadmissible=job["allow_inadmissible"]
            )
        plot = None
        if job["plot"]:
            from .generators import make_deformed_generator

            gen = G if G is not None else make_deformed_generator(spec)
            prof = CellProfile(table, gen, rep.cell, hat=rep.hat_cell)
            plot = reports.profile_csv(prof, rep.exponent.alpha_star)
        return ("ok", rep.to_dict(), plot)
    except AdmissibilityError as exc:
        return ("config", str(exc), None)
    except (DeformationError, DomainError) as exc:
        return ("config", str(exc), None)
    except (ConvergenceError, QuadratureError, MeanValueError, BracketError, IsolationError) as exc:
        return ("numeric", f"{type(exc).__name__}: {exc}", None)


def _omega_job(job):
    table = _WORKER["table"]
    G = _worker_generator(job["family"], job["k_sq"], job["nu"])
    cell = job["cell"]
    try:
        exp = solve_exponent(table, G, cell, allow_inadmissible=job["allow_inadmissible"])
    except (ConvergenceError, QuadratureError) as exc:
        return ("numeric", f"{type(exc).__name__}: {exc}", None)
    return ("ok", {"index": cell.index, "gamma_lo": cell.gamma_lo, "omega": exp.omega_star,
                   "alpha_star": exp.alpha_star, "iterations": exp.iterations}, None)


def run_jobs(fn, jobs, rc, table):
    """Run per-cell jobs in order; a pool of ``rc.workers`` processes when > 1."""
    if rc.workers == 1 or len(jobs) <= 1:
        _WORKER["table"] = table
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=rc.workers, initializer=_init_worker, initargs=(rc.table,)) as pool:
        return list(pool.map(fn, jobs))


def select_cells(G, rc):
    if rc.index is not None:
        return [G.cell(rc.index)]
    if rc.near is not None:
        return [G.cell_near(rc.near)]
    lo, hi = rc.cell_range
    cells = G.cells(lo, hi) if hi > lo else []
    return cells[: rc.max_cells]


def _jobs(rc, cells, plot=False):
    base = dict(family=rc.family, k_sq=rc.k_sq, nu=rc.nu, tolerance=rc.tolerance,
                allow_inadmissible=rc.allow_inadmissible, deform_amps=rc.deform_amps,
                deform_at=rc.deform_at, plot=plot)
    return [dict(base, cell=c) for c in cells]


def cmd_verify(args, rc):
    table, _ = obtain_table(rc)
    G = make_generator(rc.family, rc.k_sq, rc.nu)
    cells = select_cells(G, rc)
    for c in cells:
        if not c.admissible and not rc.allow_inadmissible:
            print(
                f"refused: cell [{c.gamma_lo:.10g}, {c.gamma_hi:.10g}] is inadmissible "
                f"(width {c.width:.6g} > gamma'/ln gamma' = {c.width_bound:.6g}); "
                "pass --allow-inadmissible to override",
                file=sys.stderr,
            )
            return EXIT_CONFIG
    results = run_jobs(_verify_job, _jobs(rc, cells, plot="plot" in rc.emit), rc, table)
    status = EXIT_OK
    done = []
    for cell, (kind, payload, plot) in zip(cells, results):
        if kind == "config":
            print(f"cell {cell.index}: {payload}", file=sys.stderr)
            return EXIT_CONFIG
        if kind == "numeric":
            print(f"cell {cell.index}: {payload}", file=sys.stderr)
            status = max(status, EXIT_NUMERIC)
            continue
        done.append(payload)
        row = reports.summary_row(payload)
        mark = "PASS" if payload["passed"] else "FAIL"
        print(
            f"{mark} {row['cell_id']} gamma'={row['gamma_lo']:.6f} omega={row['omega']:.6f} "
            f"alpha*={row['alpha_star']:.6f} I={row['I']:.6e} t_H={row['t_H']:.8f} "
            f"residual={row['residual']:.2e}"
        )
        if not payload["passed"] and status == EXIT_OK:
            status = EXIT_GATE
        if plot is not None:
            out = Path(rc.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            reports.write_text(out / f"profile_{rc.family}_{cell.index}.csv", plot)
    if rc.json_out:
        reports.write_text(rc.json_out, reports.dumps(done))
    if rc.csv_out:
        reports.write_text(rc.csv_out, reports.summary_csv(done))
    return status


def _parse_band(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"band {text!r} is not LO:HI") from None
    if not hi > lo:
        raise ConfigError(f"band {text!r} is empty")
    return lo, hi


def _spread(cells, n):
    if len(cells) <= n:
        return cells
    idx = np.unique(np.round(np.linspace(0, len(cells) - 1, n)).astype(int))
    return [cells[i] for i in idx]


def cmd_omega_scan(args, rc):
    bands = [_parse_band(b) for b in args.bands]
    table, _ = obtain_table(rc)
    G = make_generator(rc.family, rc.k_sq, rc.nu)
    out = []
    status = EXIT_OK
    for lo, hi in bands:
        if hi > table.x_hi:
            log.warning("band [%g, %g] reaches past the ladder image %g; truncated", lo, hi, table.x_hi)
        cells = [c for c in G.cells(lo, min(hi, table.x_hi)) if c.admissible or rc.allow_inadmissible]
        cells = _spread(cells, args.max_cells)
        results = run_jobs(_omega_job, _jobs(rc, cells), rc, table)
        ests = []
        for cell, (kind, payload, _) in zip(cells, results):
            if kind == "ok":
                ests.append(payload)
            else:
                print(f"cell {cell.index}: {payload}", file=sys.stderr)
                status = EXIT_NUMERIC
        summ = reports.band_summary(lo, hi, ests)
        out.append(summ)
        if summ["absent"]:
            print(f"band [{lo:g}, {hi:g}]: absent (no admissible cells)")
        else:
            print(
                f"band [{lo:g}, {hi:g}]: {summ['count']} cells, median omega {summ['median_omega']:.6f}, "
                f"median |omega-1| {summ['median_abs_dev']:.6f}"
            )
    if rc.json_out:
        reports.write_text(rc.json_out, reports.dumps({"generator": G.to_dict(), "bands": out}))
    return status


# ---------------------------------------------------------------------------


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse(argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        rc = run_config(args)
        if args.command == "ladder":
            return (cmd_ladder_build if args.action == "build" else cmd_ladder_check)(args, rc)
        if args.command == "cells":
            return cmd_cells(args, rc)
        if args.command == "verify":
            return cmd_verify(args, rc)
        return cmd_omega_scan(args, rc)
    except (ConfigError, DomainError, AdmissibilityError, DeformationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, QuadratureError, MeanValueError, BracketError, IsolationError, TableError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
