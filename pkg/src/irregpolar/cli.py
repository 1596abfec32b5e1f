"""Command-line experiment runner.

Every subcommand reads an optional YAML config; flags override config keys.
Outputs are CSV files written atomically into ``--out-dir`` (default: the
``IRREGPOLAR_OUT_DIR`` environment variable, else the working directory).

Exit codes: 0 success, 1 usage or config error, 2 budget or infeasible
code, 3 oracle mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .awtc import secrecy_capacity, special_cases
from .channels import ErasureChannel, bhattacharyya, bsc, capacity
from .metrics import (BudgetError, brute_force_synth, leakage_exact_small,
                      simulate_session)
from .polarize import (METHODS, ChannelArray, ConstructionBudgetError,
                       ConstructionError, construct)
from .secure_code import ChainError, build_session

OUT_DIR_ENV = "IRREGPOLAR_OUT_DIR"
ORACLE_TOL = 1e-9
HIST_BINS = 100

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for budget errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# output helpers

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_outputs(out_dir, files: dict) -> list[Path]:
    """Write every file or none: stage to temporaries, then rename."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out)
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out / name))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, dest in staged:
        os.replace(tmp, dest)
    return [dest for _, dest in staged]


# --------------------------------------------------------------------------
# shorthand channel flags

def parse_channel(text: str):
    """``bec:EPS``, ``bsc:P`` or ``noiseless``."""
    if text == "noiseless":
        return ErasureChannel(0.0)
    kind, _, val = text.partition(":")
    try:
        x = float(val)
        if kind == "bec":
            return ErasureChannel(x)
        if kind == "bsc":
            return bsc(x)
    except ValueError as exc:
        raise UsageError(f"bad channel {text!r}: {exc}") from None
    raise UsageError(f"bad channel {text!r}; use bec:EPS, bsc:P or noiseless")


def _doc(args) -> cfgmod.Document:
    if args.config is None:
        return cfgmod.Document({}, {})
    return cfgmod.load(args.config)


def _pick(flag, doc: cfgmod.Document, key: str, default=None):
    if flag is not None:
        return flag
    return doc.data.get(key, default)


def _channel(flag, doc, key):
    if flag is not None:
        return parse_channel(flag)
    if key not in doc.data:
        raise UsageError(f"no '{key}' channel in config and no --{key} flag")
    return cfgmod.channel_from(doc, doc.data[key], key)


def _power_of_two(N) -> int:
    if isinstance(N, bool) or not isinstance(N, int) or N < 2 or N & (N - 1):
        raise UsageError(f"N must be a power of two >= 2, got {N!r}")
    return N


def _fraction(name, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
        raise UsageError(f"{name} must lie in [0, 1], got {v!r}")
    return float(v)


def _beta(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 < v < 0.5:
        raise UsageError(f"beta must satisfy 0 < beta < 0.5, got {v!r}")
    return float(v)


def _method(v, allow_auto=False) -> str:
    choices = METHODS + (("auto",) if allow_auto else ())
    if v not in choices:
        raise UsageError(f"method must be one of {', '.join(choices)}, got {v!r}")
    return v


def _positive(name, v) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise UsageError(f"{name} must be a positive integer, got {v!r}")
    return v


# --------------------------------------------------------------------------
# subcommands

def cmd_polarize(args) -> int:
    doc = _doc(args)
    if args.random_bec is not None:
        N, seed = args.random_bec
        _power_of_two(N)
        eps = np.random.default_rng(seed).uniform(0.0, 1.0, N)
        leaves = [ErasureChannel(e) for e in eps]
    elif args.eps is not None:
        leaves = [ErasureChannel(e) for e in args.eps]
    else:
        if "leaves" not in doc.data:
            raise UsageError("give leaves in the config, --eps, or --random-bec N SEED")
        leaves = cfgmod.leaves_from(doc)
    _power_of_two(len(leaves))
    default_method = "bec_exact" if all(isinstance(c, ErasureChannel) for c in leaves) else "merge"
    method = _method(_pick(args.method, doc, "method", default_method))
    params = construct(ChannelArray(tuple(leaves)), method,
                       mu=_positive("mu", _pick(args.mu, doc, "mu", 128)),
                       trials=_positive("mc_trials", _pick(args.mc_trials, doc, "mc_trials", 10_000)),
                       seed=_pick(args.seed, doc, "seed", 0), threads=args.threads)
    counts, edges = np.histogram(params.i_cap, bins=HIST_BINS, range=(0.0, 1.0))
    N = params.N
    hist = [(edges[k], edges[k + 1], int(counts[k]), counts[k] / N) for k in range(HIST_BINS)]
    files = {
        f"{args.prefix}.csv": csv_text(("index", "z", "i_cap", "method"), params.to_rows()),
        f"{args.prefix}_hist.csv": csv_text(("bin_low", "bin_high", "count", "frequency"), hist),
    }
    for p in write_outputs(args.out_dir, files):
        print(f"wrote {p}")
    hi = float(np.mean(params.i_cap > 0.99))
    lo = float(np.mean(params.i_cap < 0.01))
    print(f"N={N} method={method} mean I={params.i_cap.mean():.6f} "
          f"I>0.99: {hi:.4f}  I<0.01: {lo:.4f}  middle: {1 - hi - lo:.4f}")
    return EXIT_OK


def cmd_capacity(args) -> int:
    doc = _doc(args)
    W = _channel(args.main, doc, "main")
    Wt = _channel(args.wiretap, doc, "wiretap")
    rho_r = _fraction("rho_r", _pick(args.rho_r, doc, "rho_r", 0.0))
    rho_w = _fraction("rho_w", _pick(args.rho_w, doc, "rho_w", 0.0))
    cs = secrecy_capacity(W, Wt, rho_r, rho_w)
    labels = special_cases(W, Wt, rho_r, rho_w)
    row = (cs, capacity(W), capacity(Wt), rho_r, rho_w, ";".join(labels))
    text = csv_text(("secrecy_capacity", "capacity_main", "capacity_wiretap",
                     "rho_r", "rho_w", "special_cases"), [row])
    for p in write_outputs(args.out_dir, {f"{args.prefix}.csv": text}):
        print(f"wrote {p}")
    print(f"secrecy capacity: {cs!r}")
    for lab in labels:
        print(f"special case: {lab}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = _doc(args)
    W = _channel(args.main, doc, "main")
    Wt = _channel(args.wiretap, doc, "wiretap")
    N = _power_of_two(_pick(args.N, doc, "N"))
    T = _positive("T", _pick(args.T, doc, "T", 1))
    adv_doc = doc.data.get("adversary", {})
    if not isinstance(adv_doc, dict):
        raise doc.error("'adversary' must be a mapping", "adversary")
    adv_doc = dict(adv_doc)
    for key, flag in (("rho_r", args.rho_r), ("rho_w", args.rho_w), ("seed", args.adversary_seed)):
        if flag is not None:
            adv_doc[key] = flag
    adv_doc.setdefault("rho_r", 0.0)
    adv_doc.setdefault("rho_w", 0.0)
    _fraction("rho_r", adv_doc["rho_r"])
    _fraction("rho_w", adv_doc["rho_w"])
    adversary = cfgmod.adversary_from(cfgmod.Document({"adversary": adv_doc}, doc.lines, doc.source), N, T)
    beta = _beta(_pick(args.beta, doc, "beta", 0.3))
    method = _method(_pick(args.method, doc, "method", "auto"), allow_auto=True)
    trials = _positive("trials", _pick(args.trials, doc, "trials", 1000))
    seed = _pick(args.seed, doc, "master_seed", 0)
    pre_seed = _pick(args.preshared_seed, doc, "preshared_seed", 1)
    mu = _positive("mu", _pick(args.mu, doc, "mu", 128))
    mc_trials = _positive("mc_trials", _pick(args.mc_trials, doc, "mc_trials", 10_000))
    session = build_session(W, Wt, adversary, beta=beta, method=method, mu=mu,
                            mc_trials=mc_trials, master_seed=seed,
                            preshared_seed=pre_seed, threads=args.threads)
    report = simulate_session(session, adversary, W, Wt, trials, seed, threads=args.threads)
    if T == 1 and N <= 8:
        try:
            report.leakage_exact = leakage_exact_small(Wt, adversary, session)
        except BudgetError:
            pass
    report.inputs = {"beta": beta, "method": method, "mu": mu, "rho_r": adversary.rho_r,
                     "rho_w": adversary.rho_w, "secrecy_capacity":
                     secrecy_capacity(W, Wt, adversary.rho_r, adversary.rho_w),
                     "preshared_seed": pre_seed, "adversary_seed": adv_doc.get("seed", "")}
    row = report.csv_row()
    text = csv_text(list(row), [list(row.values())])
    for p in write_outputs(args.out_dir, {f"{args.prefix}.csv": text}):
        print(f"wrote {p}")
    print(report.summary())
    return EXIT_OK


def cmd_oracle(args) -> int:
    doc = _doc(args)
    if args.leaves is not None:
        leaves = [parse_channel(s) for s in args.leaves]
    elif "leaves" in doc.data:
        leaves = cfgmod.leaves_from(doc)
    else:
        raise UsageError("give leaves in the config or with --leaves")
    N = _power_of_two(len(leaves))
    if N > 8:
        raise BudgetError(f"the brute-force oracle needs N <= 8, got {N}")
    arr = ChannelArray(tuple(leaves))
    params = construct(arr, "exact", threads=args.threads)
    rows, worst = [], 0.0
    for i in range(N):
        ch = brute_force_synth(arr, i)
        z, c = bhattacharyya(ch), capacity(ch)
        dz, dc = abs(z - params.z[i]), abs(c - params.i_cap[i])
        worst = max(worst, dz, dc)
        rows.append((i, z, params.z[i], dz, c, params.i_cap[i], dc))
    text = csv_text(("index", "z_exact_oracle", "z_construct", "z_abs_diff",
                     "i_exact_oracle", "i_construct", "i_abs_diff"), rows)
    for p in write_outputs(args.out_dir, {f"{args.prefix}.csv": text}):
        print(f"wrote {p}")
    print(f"N={N} max |diff| = {worst!r}")
    if worst > ORACLE_TOL:
        print(f"oracle mismatch above {ORACLE_TOL}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Show defaults only for options that have one and do not name it already."""

    def _get_help_string(self, action):
        if action.default is None or "(default" in (action.help or ""):
            return action.help
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    p = _Parser(prog="irregpolar", formatter_class=fmt,
                description="Irregular polarization and secure polar coding experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, prefix):
        sp.add_argument("--config", help="YAML config file; flags override its keys")
        sp.add_argument("--out-dir", default=os.environ.get(OUT_DIR_ENV, "."),
                        help=f"output directory (env {OUT_DIR_ENV})")
        sp.add_argument("--prefix", default=prefix, help="output file name stem")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads; results do not depend on it")

    sp = sub.add_parser("polarize", formatter_class=fmt,
                        help="per-index Z and I of the synthesized channels")
    common(sp, "polarize")
    sp.add_argument("--random-bec", nargs=2, type=int, metavar=("N", "SEED"),
                    help="N erasure channels with eps ~ U(0, 1) from SEED")
    sp.add_argument("--eps", type=float, nargs="+", help="erasure probabilities of BEC leaves")
    sp.add_argument("--method", choices=METHODS,
                    help="construction method (default: bec_exact for BEC leaves, else merge)")
    sp.add_argument("--mu", type=int, help="output cap for merge (default 128)")
    sp.add_argument("--mc-trials", type=int, help="Monte-Carlo samples (default 10000)")
    sp.add_argument("--seed", type=int, help="Monte-Carlo seed (default 0)")
    sp.set_defaults(func=cmd_polarize)

    sp = sub.add_parser("capacity", formatter_class=fmt,
                        help="secrecy capacity with uniform input")
    common(sp, "capacity")
    sp.add_argument("--main", help="main channel: bec:EPS, bsc:P or noiseless")
    sp.add_argument("--wiretap", help="wiretap channel: bec:EPS, bsc:P or noiseless")
    sp.add_argument("--rho-r", type=float, help="read fraction (default 0)")
    sp.add_argument("--rho-w", type=float, help="rewrite fraction (default 0)")
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("simulate", formatter_class=fmt,
                        help="Monte-Carlo secure coding sessions")
    common(sp, "simulate")
    sp.add_argument("--main", help="main channel: bec:EPS, bsc:P or noiseless")
    sp.add_argument("--wiretap", help="wiretap channel: bec:EPS, bsc:P or noiseless")
    sp.add_argument("-N", type=int, help="block length, a power of two")
    sp.add_argument("-T", type=int, help="blocks per session (default 1)")
    sp.add_argument("--rho-r", type=float, help="read fraction (default 0)")
    sp.add_argument("--rho-w", type=float, help="rewrite fraction (default 0)")
    sp.add_argument("--adversary-seed", type=int, help="seed for random read/write sets (default 0)")
    sp.add_argument("--beta", type=float, help="polarized-set exponent, 0 < beta < 0.5 (default 0.3)")
    sp.add_argument("--method", choices=METHODS + ("auto",), help="construction method (default auto)")
    sp.add_argument("--mu", type=int, help="output cap for merge (default 128)")
    sp.add_argument("--mc-trials", type=int, help="Monte-Carlo construction samples (default 10000)")
    sp.add_argument("--trials", type=int, help="sessions to simulate (default 1000)")
    sp.add_argument("--seed", type=int, help="master seed (default 0)")
    sp.add_argument("--preshared-seed", type=int, help="seed of the pre-shared bits (default 1)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("oracle", formatter_class=fmt,
                        help="brute-force synthesized channels vs the recursion (N <= 8)")
    common(sp, "oracle")
    sp.add_argument("--leaves", nargs="+", help="leaf channels: bec:EPS, bsc:P or noiseless")
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except (UsageError, cfgmod.ConfigError) as exc:
        print(f"irregpolar {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ChainError, BudgetError, ConstructionBudgetError) as exc:
        print(f"irregpolar {args.command}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConstructionError as exc:
        print(f"irregpolar {args.command}: {exc}", file=sys.stderr)
        return EXIT_BUDGET if isinstance(exc, ConstructionBudgetError) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
