"""Command-line interface: ``finmeas <command> [options]``.

Exit codes: 0 success, 2 usage or parse error, 3 domain error (rank, size,
bad spectrum), 4 verification mismatch, 1 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ChannelError, DomainError, PartitionError, SizeError, UsageError
from .measure import check_properties
from .optimal import (
    build_optimal_general,
    build_optimal_qubit_pointer,
    c_max,
    c_max_qubit_closed_form,
    cost_curve,
    cost_curve_csv,
    delta_E_corr_analytic,
    delta_E_corr_numeric,
    fridge_grid,
)
from .oracle import brute_c_max, brute_min_energy
from .qmat import DEFAULT_TOL
from .states import SectoredSpectrum, load_spectrum, qubit_pointer_spectrum
from .worked import run_worked_examples

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_MISMATCH = 4
TOL_ENV = "FINMEAS_TOL"


def parse_beta(text: str) -> float:
    """``inf`` (any case) first, then a positive float."""
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0 or math.isnan(value):
        raise argparse.ArgumentTypeError("beta*E_P must be > 0 or 'inf'")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: Optional[int]
    d_S: Optional[int]
    beta_EP: float
    E_P: float
    E_S: Optional[float]
    system_energies: Optional[list]
    rho: Optional[list]
    gap_min: float
    gap_max: float
    gap_count: int
    gap_spacing: str
    spectrum: Optional[str]
    out: Optional[str]
    format: str
    tol: float
    workers: int


def resolve_tol(cli_tol: Optional[float]) -> float:
    if cli_tol is not None:
        return cli_tol
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw == "":
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV}={raw!r} is not a float") from None
    if not tol > 0:
        raise UsageError(f"{TOL_ENV} must be positive")
    return tol


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, help="number of pointer qubits")
    common.add_argument("--ds", type=int, dest="d_S", help="system dimension (default 2, or the spectrum file's d_S)")
    common.add_argument("--beta-ep", type=parse_beta, default=1.0, dest="beta_EP",
                        help="dimensionless beta*E_P, or 'inf'")
    common.add_argument("--ep", type=float, default=1.0, dest="E_P", help="pointer qubit gap")
    common.add_argument("--es", type=float, dest="E_S", help="qubit system gap (default E_P)")
    common.add_argument("--system-energies", type=_float_list, help="comma-separated system levels")
    common.add_argument("--rho", type=_float_list, help="comma-separated system diagonal (default uniform)")
    common.add_argument("--spectrum", help='pointer spectrum JSON {"energies": [...], "d_S": int}')
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"),
                        help="output format (cost-curve defaults to csv, everything else to json)")
    common.add_argument("--tol", type=float, help=f"verdict tolerance (default ${TOL_ENV} or 1e-10)")

    parser = argparse.ArgumentParser(prog="finmeas", description="Unbiased thermal-pointer measurements.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cmax", parents=[common], help="maximal achievable correlation")
    sub.add_parser("build", parents=[common], help="build the optimal correlating permutation")
    sub.add_parser("verify", parents=[common], help="run the worked-example suite")
    cc = sub.add_parser("cost-curve", parents=[common], help="cooling + correlating cost per fridge gap")
    cc.add_argument("--gap-min", type=float, default=1.0, help="smallest fridge gap in units of E_P")
    cc.add_argument("--gap-max", type=float, default=60.0)
    cc.add_argument("--gap-count", type=int, default=100)
    cc.add_argument("--gap-spacing", choices=("log", "linear"), default="log")
    cc.add_argument("--workers", type=int, default=1)
    sub.add_parser("oracle-check", parents=[common], help="compare the construction with brute force")
    sub.add_parser("demo", parents=[common], help="short tour of the main quantities")
    return parser


def make_config(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        N=ns.N,
        d_S=ns.d_S,
        beta_EP=ns.beta_EP,
        E_P=ns.E_P,
        E_S=ns.E_S,
        system_energies=ns.system_energies,
        rho=ns.rho,
        gap_min=getattr(ns, "gap_min", 1.0),
        gap_max=getattr(ns, "gap_max", 60.0),
        gap_count=getattr(ns, "gap_count", 100),
        gap_spacing=getattr(ns, "gap_spacing", "log"),
        spectrum=ns.spectrum,
        out=ns.out,
        format=ns.format or ("csv" if ns.command == "cost-curve" else "json"),
        tol=resolve_tol(ns.tol),
        workers=getattr(ns, "workers", 1),
    )


# -- helpers -------------------------------------------------------------------

def _beta(cfg: RunConfig) -> float:
    """Inverse temperature in the caller's energy units."""
    return cfg.beta_EP / cfg.E_P


def _pointer(cfg: RunConfig) -> tuple[SectoredSpectrum, bool]:
    """Pointer spectrum and whether it is an N-qubit pointer."""
    if cfg.spectrum:
        spec = load_spectrum(cfg.spectrum)
        d_S = cfg.d_S if cfg.d_S is not None else spec.d_S
        if d_S == 1 and cfg.d_S is None:
            d_S = 2
        return spec.with_sectors(d_S), False
    if cfg.N is None:
        raise UsageError("give --N or --spectrum")
    return qubit_pointer_spectrum(cfg.N, cfg.E_P, cfg.d_S or 2), True


def _system(cfg: RunConfig, ptr: SectoredSpectrum) -> SectoredSpectrum:
    d_S = ptr.d_S
    if cfg.system_energies is not None:
        if len(cfg.system_energies) != d_S:
            raise DomainError(f"--system-energies has {len(cfg.system_energies)} levels, expected {d_S}")
        return SectoredSpectrum.from_levels(cfg.system_energies)
    if d_S == 2:
        return SectoredSpectrum([0.0, cfg.E_P if cfg.E_S is None else cfg.E_S])
    # default: adjacent system gaps equal to the pointer bandwidth
    width = float(ptr.energies[-1] - ptr.energies[0]) or cfg.E_P
    return SectoredSpectrum(np.arange(d_S) * width)


def _rho(cfg: RunConfig, d_S: int) -> np.ndarray:
    return np.full(d_S, 1.0 / d_S) if cfg.rho is None else np.asarray(cfg.rho, dtype=float)


def _construction(cfg: RunConfig):
    ptr, is_qubit = _pointer(cfg)
    beta = _beta(cfg)
    sys_spec = _system(cfg, ptr)
    rho = _rho(cfg, ptr.d_S)
    if is_qubit and ptr.d_S == 2 and cfg.system_energies is None:
        return build_optimal_qubit_pointer(cfg.N, cfg.E_P, beta, rho, cfg.E_S)
    return build_optimal_general(sys_spec, rho, ptr, beta)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(type(o))


def _finite(x: float):
    return x if math.isfinite(x) else str(x)


# -- commands --------------------------------------------------------------------

def cmd_cmax(cfg: RunConfig) -> int:
    ptr, is_qubit = _pointer(cfg)
    beta = _beta(cfg)
    general = c_max(ptr, beta)
    result = {"beta_EP": _finite(cfg.beta_EP), "d_S": ptr.d_S, "d_P": ptr.dim,
              "c_max": general, "brute_c_max": brute_c_max(ptr, beta)}
    if is_qubit and ptr.d_S == 2:
        closed = c_max_qubit_closed_form(cfg.N, cfg.beta_EP)
        result["closed_form"] = closed
        result["delta"] = abs(closed - general)
    if cfg.format == "csv":
        keys = list(result)
        _emit(cfg, ",".join(keys) + "\n" + ",".join(str(result[k]) for k in keys) + "\n")
    else:
        _emit(cfg, _dump(result))
    return EXIT_OK


def cmd_build(cfg: RunConfig) -> int:
    constr = _construction(cfg)
    report = check_properties(constr.channel, constr.pointer_weights(), constr.partition, "all", cfg.tol)
    out = {
        "d_S": constr.d_S,
        "d_P": constr.d_P,
        "beta_EP": _finite(cfg.beta_EP),
        "c_max": constr.c_max,
        "system_energies": constr.system.energies,
        "rho_s_diag": constr.rho_s_diag,
        "partition": [list(b) for b in constr.partition.blocks],
        "pairing_pi": constr.pairing_pi,
        "x_star": constr.x_star,
        "permutation": constr.permutation.image,
        "dE_II": delta_E_corr_numeric(constr),
        "dE_II_analytic": delta_E_corr_analytic(constr),
        "properties": report.to_dict(),
    }
    _emit(cfg, _dump(out))
    return EXIT_OK if report.unbiased else EXIT_MISMATCH


def cmd_verify(cfg: RunConfig) -> int:
    results = run_worked_examples(cfg.tol)
    lines = [r.line() for r in results]
    failed = [r.name for r in results if not r.ok]
    lines.append(f"{len(results) - len(failed)}/{len(results)} cases passed")
    if failed:
        lines.append("failing: " + ", ".join(failed))
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_MISMATCH if failed else EXIT_OK


def cmd_cost_curve(cfg: RunConfig) -> int:
    N = 6 if cfg.N is None else cfg.N
    gaps = fridge_grid(cfg.gap_min, cfg.gap_max, cfg.gap_count, cfg.gap_spacing) * cfg.E_P
    points = cost_curve(N, cfg.E_P, _beta(cfg), gaps, workers=cfg.workers)
    if cfg.format == "json":
        rows = [dict(zip(("E_F_over_EP", "beta_prime", "c_max", "dE_I", "dE_II", "dE_total"), p.row(cfg.E_P)))
                for p in points]
        _emit(cfg, _dump(rows))
    else:
        _emit(cfg, cost_curve_csv(points, cfg.E_P))
    c = np.array([p.c_max for p in points])
    e1 = np.array([p.dE_I for p in points])
    summary = {
        "rows": len(points),
        "max_c_max": float(c.max()),
        "total_cost_first": points[0].dE_total,
        "total_cost_last": points[-1].dE_total,
        "c_max_increasing": bool(np.all(np.diff(c) > 0)),
        "dE_I_increasing": bool(np.all(np.diff(e1) > 0)),
    }
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    constr = _construction(cfg)
    res = brute_min_energy(constr.rho_s_diag, constr.pointer, constr.beta, construction=constr)
    out = {
        "construction_dE_II": res.construction_energy,
        "oracle_dE_II": res.best_energy,
        "difference": abs(res.construction_energy - res.best_energy),
        "match": bool(res.matches_construction),
        "search_space_size": res.search_space_size,
        "candidates_evaluated": res.candidates_evaluated,
        "oracle_blocks": res.best_assignment["blocks"],
    }
    _emit(cfg, _dump(out))
    return EXIT_OK if res.matches_construction else EXIT_MISMATCH


def cmd_demo(cfg: RunConfig) -> int:
    N = 6 if cfg.N is None else cfg.N
    beta_ep = cfg.beta_EP
    ptr = qubit_pointer_spectrum(N, 1.0)
    lines = [f"N={N} pointer qubits, beta*E_P={beta_ep:.6g}"]
    lines.append(f"C_max                = {c_max(ptr, beta_ep):.12f}")
    constr = build_optimal_qubit_pointer(N, 1.0, beta_ep)
    lines.append(f"Delta E_II (rho=1/2) = {delta_E_corr_numeric(constr):.12f} E_P")
    lines.append(f"Delta E_II at C=1    = {delta_E_corr_numeric(build_optimal_qubit_pointer(N, 1.0, math.inf)):.12f} E_P")
    for gap in (1.0, 10.0, 60.0):
        p = cost_curve(N, 1.0, beta_ep, [gap])[0]
        lines.append(f"E_F={gap:>4g} E_P: C_max={p.c_max:.6f}  dE_I={p.dE_I:.6f}  dE_II={p.dE_II:.6f}")
    results = run_worked_examples(cfg.tol)
    lines.append(f"worked examples: {sum(r.ok for r in results)}/{len(results)} pass")
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {
    "cmax": cmd_cmax,
    "build": cmd_build,
    "verify": cmd_verify,
    "cost-curve": cmd_cost_curve,
    "oracle-check": cmd_oracle_check,
    "demo": cmd_demo,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)  # exits with 2 on parse errors
    try:
        cfg = make_config(ns)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"finmeas: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, SizeError, PartitionError, ChannelError) as exc:
        print(f"finmeas: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"finmeas: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
