"""Command-line interface.

Subcommands
-----------
rate      evaluate schemes on one channel (a file, or a model draw)
sweep     Monte Carlo sweep from a JSON configuration, written as CSV
wyner     per-user rates on the symmetric Wyner model versus backhaul rate
ifb       ergodic IFB / ZFB / DPC comparison on square Rayleigh channels
selftest  quick oracle checks

Exit status is 0 on success, 2 for a bad configuration or arguments and 1
for a failure while computing.
"""
from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import baselines as bl
from .channels import ChannelModel, draw_channel
from .config import DOWNLINK_SCHEMES, UPLINK_SCHEMES, ConfigError, SimConfig, config_from_dict, load_config
from .montecarlo import ResultRow, evaluate, run_montecarlo, write_csv
from .schemes import build_system_matrix

log = logging.getLogger("dascof")

EXIT_RUNTIME = 1
EXIT_CONFIG = 2
ALL_SCHEMES = UPLINK_SCHEMES + DOWNLINK_SCHEMES


def _floats(text: str) -> list:
    """Comma-separated numbers; ``a:b:step`` expands to an inclusive range."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            a, b, s = (float(x) for x in part.split(":"))
            out.extend(float(x) for x in np.arange(a, b + s / 2, s))
        elif part:
            out.append(float(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _schemes(text: str) -> list:
    names = [s.strip().lower() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in ALL_SCHEMES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown scheme(s): {', '.join(bad)}")
    return names


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, snr_default=None, r0_default=None):
    p.add_argument("--seed", type=int, default=None, help="master random seed")
    p.add_argument("--out", type=Path, default=None, help="output CSV (default: stdout)")
    p.add_argument("--snr-db", type=_floats, default=snr_default, help="SNR grid in dB")
    p.add_argument("--r0", type=_floats, default=r0_default, help="backhaul rates in bits")
    p.add_argument("--p", type=int, default=None, help="prime p = 3 mod 4")
    p.add_argument("--plot-layout", action="store_true", help="whitespace table for gnuplot")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dascof", description="Compute-and-forward rates for distributed antenna systems")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rate", help="evaluate schemes on one channel")
    p.add_argument("--channel", type=Path, help="channel matrix (.npy or text), one row per receiver")
    p.add_argument("--config", type=Path, help="draw the channel from this configuration's model")
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--schemes", type=_schemes, default=None)
    p.add_argument("--selection", default="none", help="greedy, none or random:N")
    _common(p, [20.0], [6.0])

    p = sub.add_parser("sweep", help="Monte Carlo sweep from a configuration file")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--schemes", type=_schemes, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _common(p)

    p = sub.add_parser("wyner", help="Wyner model rates per user versus backhaul")
    p.add_argument("--gamma", type=float, default=0.7)
    p.add_argument("--cells", type=int, default=10, help="cells for the downlink baselines")
    _common(p, [25.0], [float(r) for r in range(1, 11)])

    p = sub.add_parser("ifb", help="IFB versus ZFB and DPC on L x L Rayleigh channels")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--L", type=int, default=5)
    _common(p, [float(x) for x in range(0, 31, 5)], [float("inf")])

    p = sub.add_parser("selftest", help="quick oracle checks")
    p.add_argument("--seed", type=int, default=0)
    return ap


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load_channel(path: Path) -> np.ndarray:
    try:
        if path.suffix == ".npy":
            H = np.load(path)
        else:
            H = np.loadtxt(path, dtype=complex, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read channel {path}: {exc}") from None
    return np.atleast_2d(np.asarray(H, dtype=complex))


def cmd_rate(args) -> int:
    if (args.channel is None) == (args.config is None):
        raise ConfigError("give exactly one of --channel or --config")
    if args.config is not None:
        cfg = load_config(args.config, args.seed)
        H = draw_channel(cfg.model, args.trial, "uplink")
        p = args.p or cfg.p
        schemes = args.schemes or list(cfg.schemes)
    else:
        H = _load_channel(args.channel)
        p = args.p or 251
        schemes = args.schemes or ["cof", "rcof"]
    L, K = H.shape
    cfg = config_from_dict({
        "version": 1,
        "model": {"kind": "rayleigh", "K": K, "L": L},
        "snr_db": args.snr_db, "r0": args.r0, "p": p, "schemes": schemes,
        "trials": 1, "selection": args.selection, "seed": args.seed or 0,
    })
    rows = []
    for snr_db in cfg.snr_db:
        S = build_system_matrix(H, 10.0 ** (snr_db / 10.0), cfg.p)
        for r0 in cfg.r0:
            for s in cfg.schemes:
                rows.append(evaluate(s, H, S, snr_db, r0, cfg, args.trial))
    for r in rows:
        if r.error:
            log.warning("%s at %.1f dB, r0=%g: %s", r.scheme, r.snr_db, r.r0, r.error)
    with _sink(args.out) as fh:
        write_csv(rows, fh, args.plot_layout)
    return EXIT_RUNTIME if all(r.error for r in rows) else 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.seed)
    over = {}
    if args.schemes:
        over["schemes"] = tuple(args.schemes)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("field trials: must be at least 1")
        over["trials"] = args.trials
    if args.snr_db:
        over["snr_db"] = tuple(args.snr_db)
    if args.r0:
        over["r0"] = tuple(args.r0)
    if args.p is not None:
        from .gfield import GaussianPrime

        try:
            GaussianPrime(args.p)
        except ValueError as exc:
            raise ConfigError(f"field p: {exc}") from None
        over["p"] = args.p
    if over:
        cfg = SimConfig(**{**cfg.__dict__, **over})
    rows = run_montecarlo(cfg, workers=args.workers)
    nerr = sum(1 for r in rows if r.error)
    if nerr:
        log.warning("%d of %d rows failed; first: %s", nerr, len(rows), next(r.error for r in rows if r.error))
    with _sink(args.out) as fh:
        write_csv(rows, fh, args.plot_layout)
    return 0


def wyner_rows(gamma: float, snr_db: float, r0_list, p: int = 251, cells: int = 10) -> list:
    """Per-user rates on the Wyner model, one row per scheme and backhaul rate.

    Uplink: ``cof`` (equal powers), ``cof_pa`` and ``qcof_pa`` (optimized
    odd/even power split), ``qmf`` (infinite network), ``df`` and the
    ``cutset`` bound.  Downlink: ``rcof_pa``, ``rqcof_pa`` and the ``cdpc``
    and ``czfb`` baselines on a ``cells``-cell network.  The ``sum_rate``
    column holds the rate per user.
    """
    snr = 10.0 ** (snr_db / 10.0)
    Hw = bl.wyner_matrix(cells, gamma, circulant=False)
    rows = []
    for r0 in r0_list:
        prm = bl.WynerParams(gamma, snr, r0)
        eq = bl.wyner_rates(prm, 1.0)
        vals = {
            "cof": 0.0 if eq is None else min(r0, *eq),
            "cof_pa": bl.wyner_power_allocation(prm, "cof")[1],
            "qcof_pa": bl.wyner_power_allocation(prm, "cof", p=p)[1],
            "qmf": bl.qmf_wyner_per_user(prm),
            "df": bl.df_wyner_rate(prm),
            "cutset": bl.wyner_cutset_per_user(prm),
            "rcof_pa": bl.wyner_power_allocation(prm, "rcof")[1],
            "rqcof_pa": bl.wyner_power_allocation(prm, "rcof", p=p)[1],
            "cdpc": bl.cdpc_rate(Hw, snr, r0) / cells,
            "czfb": bl.czfb_rate(Hw, snr, r0) / cells,
        }
        for name in sorted(vals):
            rows.append(ResultRow(name, float(snr_db), float(r0), 0, float(vals[name]), False))
    rows.sort(key=ResultRow.sort_key)
    return rows


def cmd_wyner(args) -> int:
    rows = []
    for snr_db in args.snr_db:
        rows.extend(wyner_rows(args.gamma, snr_db, args.r0, args.p or 251, args.cells))
    with _sink(args.out) as fh:
        write_csv(rows, fh, args.plot_layout)
    return 0


def cmd_ifb(args) -> int:
    cfg = SimConfig(
        model=ChannelModel("rayleigh", K=args.L, L=args.L, seed=args.seed or 0),
        snr_db=tuple(args.snr_db),
        r0=tuple(args.r0),
        schemes=("dpc", "ifb", "zfb"),
        trials=args.trials,
        p=args.p or 251,
        selection="none",
        seed=args.seed or 0,
    )
    rows = run_montecarlo(cfg)
    with _sink(args.out) as fh:
        write_csv(rows, fh, args.plot_layout)
    means = {}
    for r in rows:
        means.setdefault((r.snr_db, r.scheme), []).append(r.sum_rate)
    for snr_db in args.snr_db:
        parts = [f"{s}={np.mean(means[(snr_db, s)]):.4f}" for s in ("zfb", "ifb", "dpc")]
        print(f"# {snr_db:g} dB: " + " ".join(parts), file=sys.stderr)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest(seed=args.seed) else EXIT_RUNTIME


COMMANDS = {"rate": cmd_rate, "sweep": cmd_sweep, "wyner": cmd_wyner, "ifb": cmd_ifb, "selftest": cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"dascof: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # anything else is a runtime failure
        log.debug("traceback", exc_info=True)
        print(f"dascof: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
