"""Command-line front end.

Subcommands: ``bounds``, ``rates``, ``attack`` and ``search``. Parameters may
also come from a plain ``key=value`` file passed with ``--config``; flags
take precedence over the file.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from hetqkd import attacks, bounds, search
from hetqkd.config import TOLERANCES
from hetqkd.errors import DomainError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3

RATES_HEADER = [
    "T",
    "eps",
    "V",
    "beta",
    "I_AB_hom",
    "I_EVE_hom",
    "dI_hom",
    "I_AB_het",
    "I_EVE_het_new",
    "dI_het_new",
    "I_EVE_het_old",
    "dI_het_old",
    "dI_eff_het_new",
]

DEFAULTS = {
    "T": 0.5,
    "eps": 0.02,
    "V": 11.0,
    "beta": 1.0,
    "grid": "0.05:1:96",
    "direction": "RR",
    "kind": "feedforward",
    "mode": "both",
    "pairs": 1,
    "samples": 10_000,
    "seed": 0,
    "workers": 1,
    "out": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".12g")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise UsageError(f"grid must be start:stop:steps[:log], got {text!r}")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must be start:stop:steps[:log], got {text!r}") from None
    if start <= 0 or stop <= 0:
        raise UsageError("grid bounds must be positive")
    if steps < 2:
        raise UsageError("grid needs at least 2 steps")
    if len(parts) == 4:
        return np.geomspace(start, stop, steps)
    return np.linspace(start, stop, steps)


def read_config(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _resolve(args: argparse.Namespace, file_values: dict, key: str, cast):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in file_values:
        try:
            return cast(file_values[key])
        except ValueError:
            raise UsageError(f"invalid value for {key}: {file_values[key]!r}") from None
    return DEFAULTS[key]


# -- commands ----------------------------------------------------------------------


def cmd_bounds(T: float, eps: float, V: float, out=None) -> int:
    out = sys.stdout if out is None else out
    chi = bounds.chi_total(T, eps)
    lines = [
        ("T", T),
        ("eps", eps),
        ("V", V),
        ("chi", chi),
        ("homodyne_RR_V_cond", bounds.homodyne_rr_bound(V, T, chi)),
        ("homodyne_DR_chi_E", bounds.homodyne_dr_chi(chi)),
        ("heterodyne_old_V_BcondE", bounds.hetero_old_conditional(V, T, chi)),
    ]
    chi_min = bounds.hetero_chi_E_min(T, eps)
    lines += [
        ("heterodyne_new_chi_E_min", chi_min),
        ("heterodyne_new_V_cond_min", bounds.hetero_V_min(V, chi_min)),
        ("coincidence_chi_RR", bounds.coincidence_chi(T, V, "RR")),
    ]
    if T >= 1:
        lines.append(("coincidence_chi_DR", bounds.coincidence_chi(T, V, "DR")))
    for name, value in lines:
        print(f"{name} = {fmt(value)}", file=out)
    return EXIT_OK


def rate_rows(grid: np.ndarray, eps: float, V: float, beta: float, direction: str = "RR") -> list[list[str]]:
    rows = []
    for T in grid:
        T = float(T)
        hom = bounds.mutual_informations(T, eps, V, "homodyne", direction, beta)
        new = bounds.mutual_informations(T, eps, V, "heterodyne_new", direction, beta)
        old = bounds.mutual_informations(T, eps, V, "heterodyne_old", direction, beta)
        values = [T, eps, V, beta, hom.I_AB, hom.I_EVE, hom.dI, new.I_AB, new.I_EVE, new.dI, old.I_EVE, old.dI, new.dI_eff]
        rows.append([fmt(v) for v in values])
    return rows


def cmd_rates(grid: np.ndarray, eps: float, V: float, beta: float, out: str | None, direction: str = "RR") -> int:
    if not 0.0 <= beta <= 1.0:
        raise UsageError(f"beta must lie in [0, 1], got {beta}")
    if direction not in bounds.DIRECTIONS:
        raise UsageError(f"direction must be RR or DR, got {direction!r}")
    rows = rate_rows(grid, eps, V, beta, direction)
    if out is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(RATES_HEADER)
        writer.writerows(rows)
        return EXIT_OK
    _atomic_csv(out, RATES_HEADER, rows)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _atomic_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    if not directory.is_dir() or not os.access(directory, os.W_OK):
        raise UsageError(f"cannot write to {path}")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_attack(kind: str, T: float, eps: float, V: float, out=None) -> int:
    out = sys.stdout if out is None else out
    attack = attacks.build(kind, T, eps)
    S = attack.symplectic
    ch = attacks.channel_params_from(S, V)
    view = attacks.eve_view_from(S, V)
    roundtrip = max(abs(ch.T_X - T), abs(ch.T_P - T), abs(ch.eps_X - eps), abs(ch.eps_P - eps))
    chi_min = bounds.hetero_chi_E_min(T, eps)
    v_min = bounds.hetero_V_min(V, chi_min)
    saturation = max(
        _gap(view.chi_XE1, chi_min),
        _gap(view.chi_PE2, chi_min),
        _gap(view.V_XcondE, v_min),
        _gap(view.V_PcondE, v_min),
    )
    print(f"attack = {attack.kind}", file=out)
    for name, value in attack.tuning.items():
        print(f"{name} = {fmt(value)}", file=out)
    print(f"channel_roundtrip_residual = {fmt(roundtrip)}", file=out)
    print(f"chi_XE1 = {fmt(view.chi_XE1)}", file=out)
    print(f"chi_PE2 = {fmt(view.chi_PE2)}", file=out)
    print(f"V_XcondE = {fmt(view.V_XcondE)}", file=out)
    print(f"V_PcondE = {fmt(view.V_PcondE)}", file=out)
    print(f"bound_chi_E_min = {fmt(chi_min)}", file=out)
    print(f"bound_V_cond_min = {fmt(v_min)}", file=out)
    print(f"saturation_residual = {fmt(saturation)}", file=out)
    if eps == 0:
        print("note = no excess noise: equivalent to a beam-splitting attack", file=out)
    ok = roundtrip <= TOLERANCES.channel_roundtrip and saturation <= TOLERANCES.bound_saturation
    print(f"[{'PASS' if ok else 'FAIL'}] {attack.kind} reaches the heterodyne bounds", file=out)
    return EXIT_OK if ok else EXIT_VERIFY


def _gap(value: float, reference: float) -> float:
    if math.isinf(value) and math.isinf(reference):
        return 0.0
    return abs(value - reference)


def cmd_search(cfg: search.SearchConfig, mode: str, out: str | None, workers: int = 1) -> int:
    modes = search.MODES if mode == "both" else (mode,)
    outcomes = []
    for m in modes:
        runner = search.verify_homodyne_optimality if m == "homodyne" else search.verify_heterodyne_bound
        outcome = runner(cfg, workers=workers)
        print(outcome.summary_line())
        outcomes.append(outcome)
    if out is not None:
        rows = [o.summary_row() for o in outcomes]
        header = list(rows[0])
        _atomic_csv(out, header, [[str(r[k]) for k in header] for r in rows])
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_VERIFY


# -- argument parsing ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")

    channel = argparse.ArgumentParser(add_help=False)
    channel.add_argument("--T", type=float, help="channel transmission")
    channel.add_argument("--eps", type=float, help="excess noise (shot-noise units)")
    channel.add_argument("--V", type=float, help="Alice's total variance (shot-noise units)")

    parser = _Parser(prog="hetqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sub.add_parser("bounds", parents=[common, channel], help="print homodyne and heterodyne bounds")

    p = sub.add_parser("rates", parents=[common, channel], help="sweep key rates over T and write CSV")
    p.add_argument("--beta", type=float, help="reconciliation efficiency")
    p.add_argument("--grid", help="transmission grid start:stop:steps[:log]")
    p.add_argument("--direction", choices=bounds.DIRECTIONS)
    p.add_argument("--out", help="CSV output path (stdout if omitted)")

    p = sub.add_parser("attack", parents=[common, channel], help="build and check an optimal attack")
    p.add_argument("--kind", choices=attacks.KINDS)

    p = sub.add_parser("search", parents=[common, channel], help="random-attack verification")
    p.add_argument("--mode", choices=("homodyne", "heterodyne", "both"))
    p.add_argument("--pairs", type=_positive_int, help="number of ancilla pairs given to Eve")
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=_positive_int)
    p.add_argument("--out", help="CSV summary path")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = read_config(args.config) if args.config else {}
        T = _resolve(args, file_values, "T", float)
        eps = _resolve(args, file_values, "eps", float)
        V = _resolve(args, file_values, "V", float)
        if args.cmd == "bounds":
            return cmd_bounds(T, eps, V)
        if args.cmd == "rates":
            grid = parse_grid(_resolve(args, file_values, "grid", str))
            beta = _resolve(args, file_values, "beta", float)
            direction = _resolve(args, file_values, "direction", str)
            return cmd_rates(grid, eps, V, beta, _resolve(args, file_values, "out", str), direction)
        if args.cmd == "attack":
            kind = _resolve(args, file_values, "kind", str)
            if kind not in attacks.KINDS:
                raise UsageError(f"unknown attack kind {kind!r}")
            return cmd_attack(kind, T, eps, V)
        mode = _resolve(args, file_values, "mode", str)
        if mode not in search.MODES + ("both",):
            raise UsageError(f"unknown search mode {mode!r}")
        samples = _resolve(args, file_values, "samples", int)
        pairs = _resolve(args, file_values, "pairs", int)
        if samples < 1 or pairs < 1:
            raise UsageError("samples and pairs must be positive")
        cfg = search.SearchConfig(
            n_pairs=pairs, samples=samples, seed=_resolve(args, file_values, "seed", int), V=V, T=T, eps=eps
        )
        return cmd_search(
            cfg,
            mode,
            _resolve(args, file_values, "out", str),
            _resolve(args, file_values, "workers", int),
        )
    except UsageError as exc:
        print(f"hetqkd: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"hetqkd: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
