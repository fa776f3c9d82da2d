"""Command line front end: simulate, verify, window, moore.

Every command parses and validates its config before touching the output
directory, computes everything in memory and only then writes the files
through a temporary directory, so a failed run leaves no partial output.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import shutil
import sys
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, StringModelError
from .moore import moore_for
from .pipeline import ENERGY_HEADER, build_model, energy_rows, verify_scenario, window_rows
from .scenario import bundle_from_obj, load_bundle, load_scenario

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "MOVING_STRING_THREADS"
MOORE_ROWS = 4097

log = logging.getLogger("moving_string")


def fmt(value) -> str:
    """17 significant digits; booleans as true/false; None as an empty field."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        values = [row[k] for k in header] if isinstance(row, dict) else row
        w.writerow([fmt(v) for v in values])
    return buf.getvalue()


def write_outputs(out: Path, files: dict[str, str]) -> None:
    """Write all files or none: stage in a temp dir, then move into place."""
    out.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        for name, text in files.items():
            with open(stage / name, "w", newline="") as fh:
                fh.write(text)
        for name in files:
            os.replace(stage / name, out / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def _moore_table(moore, lo: float, hi: float):
    if moore.table is not None:
        xi, phi, dphi = moore.table
        keep = (xi >= lo) & (xi <= hi)
        return list(zip(xi[keep], phi[keep], dphi[keep]))
    xi = np.linspace(lo, hi, MOORE_ROWS)
    return list(zip(xi, moore.phi(xi), moore.phi_prime(xi)))


# -- commands ------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    sc = load_scenario(args.config)
    model = build_model(sc)
    rows = energy_rows(model, args.threads)
    files = {"energy.csv": csv_text(ENERGY_HEADER, rows)}
    files["moore.csv"] = csv_text(("xi", "phi", "phi_prime"),
                                  _moore_table(model.moore, -model.profile.L, model.profile.xi_max))
    if sc.outputs.modes_csv and model.modes is not None:
        m = model.modes
        files["modes.csv"] = csv_text(
            ("n", "re_omega", "im_omega", "re_c", "im_c"),
            zip(m.indices, m.omegas.real, m.omegas.imag, m.coeffs.real, m.coeffs.imag))
    if sc.outputs.fprime_csv:
        tab = model.table
        files["fprime.csv"] = csv_text(("xi", "fprime"), zip(tab.grid, tab.fprime_values))
    write_outputs(Path(args.out), files)
    return EXIT_OK


def cmd_moore(args) -> int:
    sc = load_scenario(args.config)
    prof = sc.profile.build()
    moore = moore_for(prof)
    write_outputs(Path(args.out), {"moore.csv": csv_text(
        ("xi", "phi", "phi_prime"), _moore_table(moore, -prof.L, prof.xi_max))})
    return EXIT_OK


def cmd_window(args) -> int:
    sc = load_scenario(args.config)
    rows = window_rows(sc.profile.build(), sc.times())
    write_outputs(Path(args.out), {"window.csv": csv_text(
        ("t", "lprime", "eta1", "eta2", "regime"), rows)})
    return EXIT_OK


def default_bundle():
    text = resources.files("moving_string").joinpath("data/default_bundle.json").read_text()
    return bundle_from_obj(json.loads(text))


def cmd_verify(args) -> int:
    scenarios = load_bundle(args.config) if args.config else default_bundle()
    if not scenarios:
        log.warning("empty scenario bundle: nothing to verify")
    records = []
    for sc in scenarios:
        records.extend(verify_scenario(sc, perturb=args.perturb_coefficients,
                                       threads=args.threads))
    passed = all(r.passed for r in records)
    report = {"passed": passed, "records": [r.as_dict() for r in records]}
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        write_outputs(Path(args.out), {"report.json": text})
    sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_VERIFY


# -- argument parsing ------------------------------------------------------------------

def _threads(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON scenario (or bundle for verify)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--threads", metavar="N", type=_threads,
                        default=_threads(os.environ.get(THREADS_ENV, "1")),
                        help=f"worker threads over time samples (env {THREADS_ENV})")
    parser = argparse.ArgumentParser(prog="moving-string", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, hlp in [("simulate", cmd_simulate, "energy, Moore map and optional mode tables"),
                          ("moore", cmd_moore, "export the phi table only"),
                          ("window", cmd_window, "critical damping window over time"),
                          ("verify", cmd_verify, "run the invariant suites on a bundle")]:
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.set_defaults(func=fn)
    sub.choices["verify"].add_argument(
        "--perturb-coefficients", type=float, default=0.0, metavar="EPS",
        help="fault injection: scale every spectral coefficient by (1 + EPS)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command != "verify" and (not args.config or not args.out):
        log.error("%s needs --config and --out", args.command)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (StringModelError, ArithmeticError, ValueError) as exc:
        log.error("numerical failure: %s: %s", type(exc).__name__, exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
