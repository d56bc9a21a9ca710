"""Monte Carlo engine: draw channels, select receivers, evaluate schemes.

Each trial is self-contained (its channel and random selection come from
streams keyed by the trial index), so trials may run serially or in a
process pool with identical rows.  Rows are sorted by
``(snr, r0, trial, scheme)`` before they are returned.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import baselines as bl
from .channels import draw_channel, trial_rng
from .config import DOWNLINK_SCHEMES, UPLINK_SCHEMES, SimConfig
from .ifb import ifb_design, ifb_sum_rate
from .lattice import RankDeficient
from .quantized import lqf_from_system, qcof_from_system, quantized_row_rates, rqcof_from_system
from .schemes import build_system_matrix, cof_sum_rate, rcof_from_system
from .selection import NoBasis, at_select_cof, at_select_lqf, ut_select_downlink

__all__ = ["ResultRow", "run_montecarlo", "run_trial", "write_csv", "ergodic_means", "CSV_COLUMNS", "evaluate"]

#: schemes whose rate does not depend on the backhaul rate
R0_FREE = ("dpc", "zfb", "ifb", "cooperative")

CSV_COLUMNS = (
    "scheme",
    "snr_db",
    "r0",
    "trial",
    "sum_rate",
    "outage",
    "n_selected",
    "selected_indices",
    "per_receiver_rates",
)


@dataclass(frozen=True)
class ResultRow:
    """One scheme on one channel draw at one (SNR, backhaul) point.

    ``outage`` marks a rank-deficient system (rate 0).  ``error`` holds the
    message of any other failure; such rows carry a NaN rate.
    """

    scheme: str
    snr_db: float
    r0: float
    trial: int
    sum_rate: float
    outage: bool
    selected: tuple = ()
    per_receiver_rates: tuple = ()
    error: str = ""

    def sort_key(self):
        return (self.snr_db, self.r0, self.trial, self.scheme)

    def csv_fields(self) -> list:
        return [
            self.scheme,
            repr(self.snr_db),
            repr(self.r0),
            str(self.trial),
            repr(float(self.sum_rate)),
            "1" if self.outage else "0",
            str(len(self.selected)),
            ";".join(str(i) for i in self.selected),
            ";".join(repr(float(x)) for x in self.per_receiver_rates),
        ]


def _random_rows(cfg: SimConfig, trial: int, n_rows: int) -> tuple:
    k = cfg.random_subset
    if k > n_rows:
        raise ValueError(f"cannot pick {k} of {n_rows} receivers")
    rng = trial_rng(cfg.seed, trial, "select")
    return tuple(sorted(int(i) for i in rng.choice(n_rows, size=k, replace=False)))


def _uplink(scheme, H, S, snr, r0, cfg, trial):
    """Returns ``(sum_rate, selected, per_receiver)`` for an uplink scheme."""
    sel = cfg.selection
    if scheme in ("cof", "qcof"):
        rates = S.per_row_rate if scheme == "cof" else quantized_row_rates(S)
        if sel == "greedy":
            rows = at_select_cof(S, r0, rates).chosen
        elif sel == "none":
            rows = None
        else:
            rows = _random_rows(cfg, trial, H.shape[0])
        if scheme == "cof":
            rep = cof_sum_rate(S, r0, rows)
        else:
            rep = qcof_from_system(S, r0, rows, rates)
        return rep.sum_rate, rep.selected, rep.per_receiver
    if scheme == "lqf":
        rates = quantized_row_rates(S)
        if sel == "greedy":
            rows = at_select_lqf(S, r0, rates).chosen
        elif sel == "none":
            rows = None
        else:
            rows = _random_rows(cfg, trial, H.shape[0])
        rep = lqf_from_system(S, r0, rows, rates)
        return rep.sum_rate, rep.selected, rep.per_receiver
    # information-theoretic relaying baselines
    K = H.shape[1]
    if sel == "greedy":
        rows, _ = bl.qf_greedy_select(H, snr, r0, min(K, H.shape[0]))
    elif sel == "none":
        rows = tuple(range(H.shape[0]))
    else:
        rows = _random_rows(cfg, trial, H.shape[0])
    Hs = H[list(rows)]
    rate = bl.qmf_rate(Hs, snr, r0) if scheme == "qmf" else bl.qf_rate(Hs, snr, r0)
    return rate, tuple(rows), ()


def _downlink_users(cfg, trial, Hd, S, r0, rates):
    K, L = Hd.shape
    if cfg.selection == "greedy":
        return ut_select_downlink(S.Q, np.minimum(r0, rates)).chosen
    if cfg.selection == "none":
        return tuple(range(K))
    return _random_rows(cfg, trial, K)


def _downlink(scheme, Hd, S, snr, r0, cfg, trial):
    K, L = Hd.shape
    if scheme in ("rcof", "rqcof"):
        rates = S.per_row_rate if scheme == "rcof" else quantized_row_rates(S)
        rows = _downlink_users(cfg, trial, Hd, S, r0, rates)
        if scheme == "rcof":
            rep = rcof_from_system(S, r0, rows)
        else:
            rep = rqcof_from_system(S, r0, rows, rates)
        return rep.sum_rate, rep.selected, rep.per_receiver
    if scheme == "czfb" and cfg.selection == "greedy" and K > L:
        rows, rate = bl.czfb_greedy_users(Hd, snr, r0, L)
        return rate, rows, ()
    if cfg.selection.startswith("random:"):
        rows = _random_rows(cfg, trial, K)
    else:
        rows = tuple(range(K))
    Hs = Hd[list(rows)]
    if scheme == "cdpc":
        return bl.cdpc_rate(Hs, snr, r0), rows, ()
    if scheme == "dpc":
        return bl.dpc_sum_capacity(Hs, snr), rows, ()
    if scheme == "cooperative":
        return bl.cooperative_bound(Hs, snr), rows, ()
    if scheme == "czfb":
        return bl.czfb_rate(Hs, snr, r0), rows, ()
    if scheme == "zfb":
        return bl.zfb_rate(Hs, snr), rows, ()
    if scheme == "ifb":
        rep = ifb_sum_rate(ifb_design(Hs, snr, cfg.p), snr, cfg.p)
        return rep.sum_rate, rows, rep.per_receiver
    raise ValueError(f"unknown scheme {scheme!r}")


def evaluate(scheme, H, S, snr_db, r0, cfg, trial) -> ResultRow:
    """Evaluate one scheme; outages and failures become rows, never exceptions."""
    snr = 10.0 ** (snr_db / 10.0)
    fn = _uplink if scheme in UPLINK_SCHEMES else _downlink
    try:
        rate, rows, per = fn(scheme, H, S, snr, r0, cfg, trial)
    except (RankDeficient, NoBasis):
        return ResultRow(scheme, snr_db, r0, trial, 0.0, True)
    except Exception as exc:  # recorded per row so the sweep continues
        return ResultRow(scheme, snr_db, r0, trial, math.nan, False, (), (), f"{type(exc).__name__}: {exc}")
    return ResultRow(scheme, snr_db, r0, trial, float(rate), False, tuple(int(i) for i in rows),
                     tuple(float(x) for x in per))


def run_trial(cfg: SimConfig, trial: int) -> list:
    """All rows of one trial (every SNR, backhaul rate and scheme)."""
    up = [s for s in cfg.schemes if s in UPLINK_SCHEMES]
    down = [s for s in cfg.schemes if s in DOWNLINK_SCHEMES]
    m = cfg.model
    H = draw_channel(m, trial, "uplink") if up else None
    Hd = draw_channel(m, trial, "downlink", shape=(m.K, m.L)) if down else None
    out = []
    memo = {}
    for snr_db in cfg.snr_db:
        snr = 10.0 ** (snr_db / 10.0)
        S = build_system_matrix(H, snr, cfg.p) if up else None
        Sd = build_system_matrix(Hd, snr, cfg.p) if any(s in ("rcof", "rqcof") for s in down) else None
        for r0 in cfg.r0:
            for s in up:
                out.append(evaluate(s, H, S, snr_db, r0, cfg, trial))
            for s in down:
                if s in R0_FREE:
                    if s not in memo:
                        memo[s] = evaluate(s, Hd, Sd, snr_db, r0, cfg, trial)
                    out.append(replace(memo[s], r0=r0))
                else:
                    out.append(evaluate(s, Hd, Sd, snr_db, r0, cfg, trial))
        memo.clear()
    return out


def _run_chunk(args):
    cfg, trials = args
    return [row for t in trials for row in run_trial(cfg, t)]


def run_montecarlo(cfg: SimConfig, workers: int = 1) -> list:
    """Evaluate every (SNR, r0, trial, scheme) point of ``cfg``.

    With ``workers > 1`` trials are spread over a process pool; the output
    is identical to the serial run.
    """
    trials = list(range(cfg.trials))
    if workers <= 1 or cfg.trials == 1:
        rows = _run_chunk((cfg, trials))
    else:
        chunks = [(cfg, trials[i::workers]) for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            rows = [r for part in pool.map(_run_chunk, chunks) for r in part]
    rows.sort(key=ResultRow.sort_key)
    return rows


def write_csv(rows, fh, plot_layout: bool = False):
    """Write rows as CSV.

    ``plot_layout`` writes a whitespace-separated table with a ``#`` header
    (readable by gnuplot) and the same columns.
    """
    if plot_layout:
        fh.write("# " + " ".join(CSV_COLUMNS) + "\n")
        for r in rows:
            fields = [f if f else "-" for f in r.csv_fields()]
            fh.write(" ".join(fields) + "\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())


def ergodic_means(rows) -> dict:
    """Mean sum rate per ``(scheme, snr_db, r0)``; outages count as zero, errors are skipped."""
    acc = {}
    for r in rows:
        if r.error:
            continue
        acc.setdefault((r.scheme, r.snr_db, r.r0), []).append(r.sum_rate)
    return {k: float(np.mean(v)) for k, v in acc.items()}
