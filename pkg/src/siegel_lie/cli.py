"""
Command-line driver.

Usage::

    siegel-lie normalize RUN.cfg --order 15 --out run/
    siegel-lie divisors  RUN.cfg --rmax 1023
    siegel-lie bounds    RUN.cfg --order 15 --rmax 1023
    siegel-lie verify    RUN.cfg --order 15 --out run/
    siegel-lie report    run/

The input is either a map file or a configuration file made of ``key = value``
lines followed by a ``[map]`` block holding a map file.  Command-line flags
override configuration keys.  Every report starts with a single header line
carrying the timestamp; the rest is deterministic for a given input and seed.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .bounds import (audit_iteration_lemma, chain_sup_norms, composed_series_audit,
                     composed_series_certificate, empirical_floor, explie_domain_check,
                     radius_lower_bound)
from .divisors import (DiophantineFloor, divisor_table, istar_properties_check,
                       jset_lemmas_check)
from .errors import (EnumerationTooLarge, GammaDiverged, InsufficientData, NonResonanceViolated,
                     RepresentationObstruction, ResonantDivisor)
from .maps import EPS_RES, AnalyticMap, parse_map
from .normalizer import normalize, write_archive
from .verify import (DEFAULT_SEED, conjugacy_residual, koenigs_oracle, map_coefficients_1d,
                     root_test_radius, transform_coefficients_1d)

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_RESONANT = 3
EXIT_ENUMERATION = 4
EXIT_CERTIFICATE = 5

CONFIG_KEYS = {"order": int, "rmax": int, "rho": float, "delta": float, "eps_res": float,
               "out": str, "seed": int, "precision": int, "floor_c": float, "floor_tau": float}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    input: Optional[Path]
    amap: Optional[AnalyticMap]
    N: Optional[int]
    R_max: int
    rho: Optional[float]
    delta: Optional[float]
    eps_res: float
    out: Optional[Path]
    seed: int
    precision: Optional[int]
    floor: Optional[DiophantineFloor]


def parse_config_text(text: str):
    """Split a configuration into ``(settings, map_text)``.

    A file without a ``[map]`` line is taken to be a bare map file.
    """
    lines = text.splitlines()
    marker = next((i for i, ln in enumerate(lines) if ln.strip().lower() == "[map]"), None)
    if marker is None:
        return {}, text
    settings = {}
    for ln in lines[:marker]:
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ConfigError(f"expected key = value, got {ln!r}")
        key, value = (t.strip() for t in ln.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            settings[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return settings, "\n".join(lines[marker + 1:])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="siegel-lie",
                                description="Linearize analytic maps by Lie transforms.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("input", type=Path, help="map file or configuration file")
        sp.add_argument("--order", type=int, help="truncation order N")
        sp.add_argument("--rmax", type=int, help="divisor truncation R_max")
        sp.add_argument("--rho", type=float, help="polydisk radius for certificates")
        sp.add_argument("--delta", type=float, help="radius loss for certificates")
        sp.add_argument("--eps-res", type=float, dest="eps_res", help="resonance threshold")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--seed", type=int, help="seed for sample points")
        sp.add_argument("--precision", type=int, help="working precision in bits")
        sp.add_argument("--floor", type=float, nargs=2, metavar=("C", "TAU"),
                        help="assumed Diophantine floor alpha_r >= C / r**TAU")

    for name, text in [("normalize", "compute the normalizing transformation"),
                       ("divisors", "small-divisor table and combinatorial checks"),
                       ("bounds", "constants, certificates and the certified radius"),
                       ("verify", "residuals and independent oracles")]:
        common(sub.add_parser(name, help=text))
    rp = sub.add_parser("report", help="summarize a run directory")
    rp.add_argument("rundir", type=Path)
    return p


def load_config(args) -> RunConfig:
    path: Path = args.input
    if not path.is_file():
        raise FileNotFoundError(f"no such input file: {path}")
    settings, map_text = parse_config_text(path.read_text())
    amap = parse_map(map_text)

    def pick(name, default=None):
        v = getattr(args, name, None)
        return settings.get(name, default) if v is None else v

    N = pick("order")
    if N is not None and N < 1:
        raise ConfigError("order must be >= 1")
    floor = None
    if args.floor is not None:
        floor = DiophantineFloor(*args.floor)
    elif "floor_c" in settings:
        floor = DiophantineFloor(settings["floor_c"], settings.get("floor_tau", 2.0))
    out = pick("out")
    return RunConfig(args.subcommand, path, amap, N, pick("rmax", 1023), pick("rho"),
                     pick("delta"), pick("eps_res", EPS_RES), Path(out) if out else None,
                     pick("seed", DEFAULT_SEED), pick("precision"), floor)


def header(cmd: str) -> str:
    stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return f"# siegel-lie {cmd} {stamp}"


def _g(x: float) -> str:
    return f"{x:.12g}"


# -- subcommands ---------------------------------------------------------------------

def _run_normalize(cfg: RunConfig):
    res = normalize(cfg.amap, cfg.N, cfg.eps_res, precision=cfg.precision)
    table = divisor_table(cfg.amap.spectrum, max(res.N, 1), eps_res=cfg.eps_res)
    audit = audit_iteration_lemma(res, table)
    return res, table, audit


def cmd_normalize(cfg: RunConfig) -> List[str]:
    res, table, audit = _run_normalize(cfg)
    N = res.N
    lines = [f"n = {res.n}, N = {N}, spectrum mu = {list(res.spectrum.mu)}, "
             f"omega = {list(res.spectrum.omega)}"]
    lines.append(f"precision = {cfg.precision or 53} bits")
    lines.append("r,norm_X,annihilation")
    for r in range(1, N + 1):
        lines.append(f"{r},{res.x_norms[r]:.17g},{res.annihilation[r]:.3e}")
    lines.append(f"hypothesis constants (N={N}): A = {_g(audit.A)}, C0 = {_g(audit.C0)}")
    lines.append(f"iteration bounds (N={N}, R_max={table.R_max}): "
                 f"{len(audit.violations)} violations")
    if cfg.out is not None:
        write_archive(res, AnalyticMap(res.spectrum, cfg.amap.nonlinear.truncate(N)),
                      cfg.out, audit.rows)
        lines.append(f"archive written to {cfg.out}")
    return lines


def cmd_divisors(cfg: RunConfig) -> List[str]:
    R = cfg.R_max
    table = divisor_table(cfg.amap.spectrum, R, floor=cfg.floor, eps_res=cfg.eps_res)
    gp = table.gamma_partial_seq
    rows = ["r,beta,alpha,sigma,gamma_partial"]
    for r in range(R + 1):
        rows.append(f"{r},{table.beta[r]:.17g},{table.alpha[r]:.17g},"
                    f"{table.sigma[r]:.17g},{gp[r]:.17g}")
    lines = [f"R_max = {R}",
             f"Gamma (R_max={R}) = {table.gamma}",
             f"Bruno (K={table.bruno.truncation}, R_max={R}) = {table.bruno}"]
    if cfg.floor is not None:
        lines.append(f"tail bounds assume alpha_r >= {cfg.floor.c} / r^{cfg.floor.tau}")
    lines.append("lemma checks (sizes <= 12):")
    reports = istar_properties_check(12) + jset_lemmas_check(12, table.sigma)
    lines += ["  " + rep.line() for rep in reports]
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "divisors.csv").write_text("\n".join(rows) + "\n")
        lines.append(f"table written to {cfg.out / 'divisors.csv'}")
    else:
        lines = rows + lines
    if not all(rep.ok for rep in reports):
        raise CertificateFailed(lines)
    return lines


class CertificateFailed(Exception):
    def __init__(self, lines):
        self.lines = lines
        super().__init__("certificate failed")


def cmd_bounds(cfg: RunConfig) -> List[str]:
    res, _, _ = _run_normalize(cfg)
    N = res.N
    table_plain = divisor_table(cfg.amap.spectrum, max(cfg.R_max, N), eps_res=cfg.eps_res)
    floor, floor_note = cfg.floor, "supplied"
    if floor is None:
        floor, floor_note = empirical_floor(table_plain.alpha), \
            "fitted to the table (assumed beyond R_max)"
    table = divisor_table(cfg.amap.spectrum, table_plain.R_max, floor=floor, eps_res=cfg.eps_res)
    audit = audit_iteration_lemma(res, table)
    cert = radius_lower_bound(table, audit.A, audit.C0, delta=cfg.delta)
    lines = [f"N = {N}, R_max = {table.R_max}",
             f"Diophantine floor: alpha_r >= {floor.c:.6g} / r^{floor.tau:g} ({floor_note})",
             f"Gamma (R_max={table.R_max}) = {table.gamma}",
             f"Bruno (R_max={table.R_max}) = {table.bruno}",
             "radius chain:"]
    lines += ["  " + ln for ln in cert.lines()]
    lines.append(f"iteration lemma (N={N}): {len(audit.violations)} violations, "
                 f"hypothesis {'holds' if audit.hypothesis_ok else 'fails'}")
    ok = audit.ok
    if math.isfinite(cert.rho_bar):
        rho = cfg.rho if cfg.rho is not None else cert.rho_bar / 2
        delta = cfg.delta if cfg.delta is not None else rho / 3
        chain = res.chain()
        comp = composed_series_certificate(chain_sup_norms(chain, rho), rho, delta)
        lines += [f"(N={N}) " + ln for ln in comp.lines()]
        if chain.operators:
            single = explie_domain_check(chain.operators[0], rho, delta)
            lines += [f"(N={N}, first generator) " + ln for ln in single.lines()]
        if comp.passed and chain.operators:
            inc = composed_series_audit(chain, rho, delta, seed=cfg.seed)
            lines.append(f"(N={N}) inclusion audit: round trip {inc.roundtrip_error:.3e}, "
                         f"max |S(x)| {inc.forward_max_modulus:.6e}, "
                         f"max |S^-1(y)| on D(rho-2delta) {inc.preimage_max_modulus:.6e}, "
                         f"seed {inc.seed}: {'pass' if inc.ok else 'fail'}")
            ok = ok and inc.ok
        ok = ok and comp.passed
    if not ok:
        raise CertificateFailed(lines)
    return lines


def cmd_verify(cfg: RunConfig) -> List[str]:
    res = normalize(cfg.amap, cfg.N, cfg.eps_res, precision=cfg.precision)
    N = res.N
    amap = AnalyticMap(res.spectrum, cfg.amap.nonlinear.truncate(N))
    radius = cfg.rho
    if radius is None:
        try:
            radius = root_test_radius(res.transform).radius / 4
        except InsufficientData:
            radius = 0.01
    rep = conjugacy_residual(amap, res, radius=radius, seed=cfg.seed)
    lines = [f"N = {N}, ledger scale max(1, ||W||) = {rep.scale:.6e}",
             f"max graded residual (N={N}) = {rep.max_order_norm:.3e} "
             f"(relative {rep.max_relative:.3e})",
             f"point residuals on D({radius:.6e}), {len(rep.point_residuals)} Halton points, "
             f"seed {rep.seed}: max {rep.point_residuals.max():.3e}"]
    try:
        rt = root_test_radius(res.transform)
        lines.append(f"root-test radius (N={N}) = {rt}")
    except InsufficientData as exc:
        lines.append(f"root-test radius (N={N}) unavailable: {exc}")
    if res.n == 1:
        lam = complex(res.spectrum.lam[0])
        a = transform_coefficients_1d(res)
        b = koenigs_oracle(lam, map_coefficients_1d(amap), N)
        rel = max(abs(a[d] - b[d]) / abs(b[d]) for d in range(1, N + 2) if b[d] != 0)
        lines.append(f"Koenigs recursion (N={N}): max relative coefficient difference {rel:.3e}")
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "residuals.csv").write_text("\n".join(rep.table()) + "\n")
        if (cfg.out / "ledger.csv").exists():
            lines.append(f"archive: {cfg.out} (ledger.csv present)")
        lines.append(f"residual table written to {cfg.out / 'residuals.csv'}")
    else:
        lines += rep.table()
    return lines


def cmd_report(rundir: Path) -> List[str]:
    if not rundir.is_dir():
        raise FileNotFoundError(f"no such run directory: {rundir}")
    lines = [f"run directory {rundir}"]
    for name in ["map.txt", "transform.txt", "ledger.csv", "divisors.csv", "residuals.csv",
                 "normalize.txt", "divisors.txt", "bounds.txt", "verify.txt"]:
        path = rundir / name
        if not path.exists():
            continue
        text = path.read_text().splitlines()
        body = [ln for ln in text if not ln.startswith("# siegel-lie ")]
        lines.append(f"== {name} ({len(body)} lines)")
        lines += body
    gens = sorted((rundir / "generators").glob("X_*.txt")) if (rundir / "generators").is_dir() else []
    lines.append(f"== generators: {len(gens)} files")
    return lines


COMMANDS = {"normalize": cmd_normalize, "divisors": cmd_divisors,
            "bounds": cmd_bounds, "verify": cmd_verify}


def _emit(cmd: str, lines: List[str], out: Optional[Path], stream) -> None:
    text = "\n".join([header(cmd)] + lines) + "\n"
    try:
        stream.write(text)
        stream.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the exit-time flush
        import os
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{cmd}.txt").write_text(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    cmd = args.subcommand
    out = sys.stdout
    try:
        if cmd == "report":
            lines = cmd_report(args.rundir)
            _emit(cmd, lines, args.rundir, out)
            return EXIT_OK
        cfg = load_config(args)
        lines = COMMANDS[cmd](cfg)
        _emit(cmd, lines, cfg.out, out)
        return EXIT_OK
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ResonantDivisor, RepresentationObstruction, NonResonanceViolated) as exc:
        print(f"resonance: {exc}", file=sys.stderr)
        return EXIT_RESONANT
    except EnumerationTooLarge as exc:
        print(f"enumeration: {exc}", file=sys.stderr)
        return EXIT_ENUMERATION
    except (CertificateFailed, GammaDiverged) as exc:
        if isinstance(exc, CertificateFailed):
            _emit(cmd, exc.lines, getattr(args, "out", None), out)
        print(f"certificate failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE


if __name__ == "__main__":
    sys.exit(main())
