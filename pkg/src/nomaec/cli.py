"""Command-line front end.

Subcommands: sweep, recommend, plotdata, ec, pairings. Exit codes are 0 on
success, 1 on runtime failure and 2 on usage or configuration errors.
"""
import argparse
import csv
import io
import itertools
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .channel import ChannelModel
from .ec_engine import SMALL_BETA, effective_capacity
from .pairing import enumerate_pairings, optimal_pairing, sequential_pairing
from .ratelaw import PowerAllocation
from .recommend import ScenarioQuery, justify, recommend
from .scenarios import (DEFAULT_BLOCKS, PAIRINGS, PRESETS, SCHEMES, ScenarioConfig,
                        preset, run_scenario)

CSV_COLUMNS = ("snr_db", "scheme", "pairing", "user_rank", "ec", "ec_stderr",
               "sum_ec", "delta_ec_vs_oma", "p_noma")
BETA_COLUMNS = ("beta_weak", "beta_strong")
PLOT_KINDS = ("ec_vs_snr", "delta_ec", "sum_ec", "surface", "p_noma")

CONFIG_KEYS = {
    "channel.n_users": "number of users M",
    "channel.mean_gains": "comma-separated mean channel power gain per user",
    "powers.pair": "weak,strong power fractions inside a pair",
    "powers.full": "comma-separated power fractions for full NOMA / OMA",
    "delay.beta_weak": "comma-separated beta values for the weak users",
    "delay.beta_strong": "comma-separated beta values for the strong users",
    "delay.grid": "zip (pair the lists element-wise) or product",
    "sweep.snr_db": "comma list or start:step:stop of transmit SNRs in dB",
    "sweep.schemes": "comma list from " + ",".join(SCHEMES),
    "sweep.pairings": "comma list from " + ",".join(PAIRINGS),
    "sweep.blocks": "number of fading blocks",
    "sweep.seed": "64-bit unsigned seed",
    "sweep.workers": "worker threads (results do not depend on it)",
    "output.dir": "output directory",
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def parse_config_text(text, source="<config>"):
    """Parse ``section.key = value`` lines; ``[section]`` headers prefix bare keys."""
    out = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if "." not in key and section:
            key = f"{section}.{key}"
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown config key '{key}'")
        out[key] = value
    return out


def _floats(value, key):
    try:
        vals = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{key}: cannot parse numbers from {value!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{key}: values must be finite numbers")
    return vals


def _int(value, key):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _snr_grid(value):
    if ":" in value:
        parts = _floats(value.replace(":", ","), "sweep.snr_db")
        if len(parts) != 3 or parts[1] <= 0:
            raise ConfigError("sweep.snr_db: range must be start:step:stop with step > 0")
        start, step, stop = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(n))
    return tuple(_floats(value, "sweep.snr_db"))


def _names(value, allowed, key):
    names = tuple(v.strip() for v in value.split(",") if v.strip())
    for n in names:
        if n not in allowed:
            raise ConfigError(f"{key}: unknown value {n!r}; expected one of {','.join(allowed)}")
    return names


def config_to_dict(cfg, out_dir="."):
    """Flat resolved-config view of a ScenarioConfig (the run_meta format)."""
    fmt = lambda xs: ",".join(repr(float(x)) for x in xs)
    weak = [b[0] for b in cfg.beta_grid]
    strong = [b[1] for b in cfg.beta_grid]
    uw = list(dict.fromkeys(weak))
    us = list(dict.fromkeys(strong))
    if len(cfg.beta_grid) > 1 and list(itertools.product(uw, us)) == list(cfg.beta_grid):
        grid, weak, strong = "product", uw, us
    else:
        grid = "zip"
    return {
        "channel.n_users": str(cfg.n_users),
        "channel.mean_gains": fmt(cfg.channel.mean_gains),
        "powers.pair": fmt(cfg.powers_per_pair.fractions),
        "powers.full": fmt(cfg.full_powers.fractions),
        "delay.beta_weak": fmt(weak),
        "delay.beta_strong": fmt(strong),
        "delay.grid": grid,
        "sweep.snr_db": fmt(cfg.snr_db_grid),
        "sweep.schemes": ",".join(cfg.schemes),
        "sweep.pairings": ",".join(cfg.pairings),
        "sweep.blocks": str(cfg.n_blocks),
        "sweep.seed": str(cfg.seed),
        "output.dir": str(out_dir),
    }


def config_from_dict(d):
    try:
        m = _int(d["channel.n_users"], "channel.n_users")
        means = d.get("channel.mean_gains")
        seed = _int(d.get("sweep.seed", "1"), "sweep.seed")
        channel = ChannelModel(m, tuple(_floats(means, "channel.mean_gains")) if means else None,
                               seed=seed)
        pair = PowerAllocation(tuple(_floats(d.get("powers.pair", "0.2,0.8"), "powers.pair")))
        full = d.get("powers.full")
        full = PowerAllocation(tuple(_floats(full, "powers.full"))) if full else None
        weak = _floats(d.get("delay.beta_weak", "-5"), "delay.beta_weak")
        strong = _floats(d.get("delay.beta_strong", "-5"), "delay.beta_strong")
        mode = d.get("delay.grid", "zip")
        if mode == "product":
            betas = tuple(itertools.product(weak, strong))
        elif mode == "zip":
            if len(weak) != len(strong):
                raise ConfigError("delay.grid = zip needs beta_weak and beta_strong of equal length")
            betas = tuple(zip(weak, strong))
        else:
            raise ConfigError(f"delay.grid: expected zip or product, got {mode!r}")
        return ScenarioConfig(
            channel,
            powers_per_pair=pair,
            full_powers=full,
            snr_db_grid=_snr_grid(d.get("sweep.snr_db", "0:2:40")),
            beta_grid=betas,
            schemes=_names(d.get("sweep.schemes", "oma,noma_full"), SCHEMES, "sweep.schemes"),
            pairings=_names(d.get("sweep.pairings", ""), PAIRINGS, "sweep.pairings"),
            n_blocks=_int(d.get("sweep.blocks", str(DEFAULT_BLOCKS)), "sweep.blocks"),
        )
    except KeyError as e:
        raise ConfigError(f"missing required config key {e.args[0]}") from None
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _g(x):
    return "" if x is None else format(float(x), ".9g")


def sweep_csv_text(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = CSV_COLUMNS + (BETA_COLUMNS if result.multi_beta else ())
    w.writerow(header)
    for r in result.rows:
        row = [_g(r.snr_db), r.scheme, r.pairing, str(r.user_rank), _g(r.ec_value),
               _g(r.ec_std_error), _g(r.sum_ec), _g(r.delta_ec_vs_oma), _g(r.p_noma)]
        if result.multi_beta:
            row += [_g(r.beta_weak), _g(r.beta_strong)]
        w.writerow(row)
    return buf.getvalue()


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_sweep_csv(path):
    """Parse a sweep CSV into a list of dicts; ConfigError on malformed input."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty file")
    header = tuple(rows[0])
    if header not in (CSV_COLUMNS, CSV_COLUMNS + BETA_COLUMNS):
        raise ConfigError(f"{path}:1: unexpected header {','.join(header)}")
    body = rows[1:]
    if not body:
        raise ConfigError(f"{path}: no data rows")
    out = []
    numeric = set(header) - {"scheme", "pairing"}
    for lineno, row in enumerate(body, 2):
        if len(row) != len(header):
            raise ConfigError(f"{path}:{lineno}: expected {len(header)} columns, found {len(row)}")
        rec = {}
        for k, v in zip(header, row):
            if k in numeric:
                if v == "":
                    rec[k] = None
                    continue
                try:
                    rec[k] = float(v)
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: column {k} is not numeric: {v!r}") from None
            else:
                rec[k] = v
        out.append(rec)
    return out, len(header) > len(CSV_COLUMNS)


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------

_YLABEL = {"ec_vs_snr": "effective capacity (b/s/Hz)",
           "delta_ec": "EC minus OMA EC (b/s/Hz)",
           "sum_ec": "sum effective capacity (b/s/Hz)",
           "p_noma": "probability NOMA-R keeps NOMA",
           "surface": "sum effective capacity (b/s/Hz)"}


def _beta_tag(rec, has_beta):
    return f"/b{_g(rec['beta_weak'])},{_g(rec['beta_strong'])}" if has_beta else ""


def build_plotdata(records, has_beta, kind):
    """Return (dat_text, plt_text) for one plot kind."""
    if kind == "surface":
        return _surface_plot(records, has_beta)
    series = {}
    for rec in records:
        tag = _beta_tag(rec, has_beta)
        if kind == "ec_vs_snr":
            label, value = f"{rec['scheme']}/{rec['pairing']}/u{int(rec['user_rank'])}{tag}", rec["ec"]
        elif kind == "delta_ec":
            if rec["scheme"] == "OMA":
                continue
            label, value = f"{rec['scheme']}/{rec['pairing']}/u{int(rec['user_rank'])}{tag}", rec["delta_ec_vs_oma"]
        elif kind == "sum_ec":
            if int(rec["user_rank"]) != 0:
                continue
            label, value = f"{rec['scheme']}/{rec['pairing']}{tag}", rec["sum_ec"]
        else:
            if rec["scheme"] != "NOMA_R" or int(rec["user_rank"]) != 0:
                continue
            label, value = f"NOMA_R/{rec['pairing']}{tag}", rec["p_noma"]
        series.setdefault(label, {})[rec["snr_db"]] = value
    if not series:
        raise ConfigError(f"no rows in the CSV apply to plot kind {kind!r}")
    labels = list(series)
    xs = sorted({x for s in series.values() for x in s})
    lines = ["# snr_db " + " ".join(labels)]
    for x in xs:
        vals = [series[l].get(x) for l in labels]
        lines.append(" ".join([_g(x)] + ["nan" if v is None else _g(v) for v in vals]))
    dat = "\n".join(lines) + "\n"
    plots = [f'"{kind}.dat" using 1:{i + 2} with linespoints title "{l}"'
             if i == 0 else f'"" using 1:{i + 2} with linespoints title "{l}"'
             for i, l in enumerate(labels)]
    plt = "\n".join([
        "# gnuplot script generated by nomaec plotdata",
        'set xlabel "transmit SNR (dB)"',
        f'set ylabel "{_YLABEL[kind]}"',
        "set key outside",
        "set grid",
        "plot " + ", \\\n     ".join(plots),
    ]) + "\n"
    return dat, plt


def _surface_plot(records, has_beta):
    if not has_beta:
        raise ConfigError("surface plots need a beta sweep CSV (beta_weak/beta_strong columns)")
    series = {}
    points = []
    for rec in records:
        if int(rec["user_rank"]) != 0:
            continue
        label = f"{rec['scheme']}/{rec['pairing']}"
        pt = (rec["snr_db"], rec["beta_weak"], rec["beta_strong"])
        if pt not in points:
            points.append(pt)
        series.setdefault(label, {})[pt] = rec["sum_ec"]
    labels = list(series)
    points.sort()
    lines = ["# snr_db beta_weak beta_strong " + " ".join(labels)]
    prev = None
    for pt in points:
        if prev is not None and pt[:2] != prev[:2]:
            lines.append("")
        vals = [series[l].get(pt) for l in labels]
        lines.append(" ".join([_g(v) for v in pt] + ["nan" if v is None else _g(v) for v in vals]))
        prev = pt
    dat = "\n".join(lines) + "\n"
    plots = [f'"surface.dat" using 2:3:{i + 4} with lines title "{l}"'
             if i == 0 else f'"" using 2:3:{i + 4} with lines title "{l}"'
             for i, l in enumerate(labels)]
    plt = "\n".join([
        "# gnuplot script generated by nomaec plotdata",
        'set xlabel "beta weak"',
        'set ylabel "beta strong"',
        f'set zlabel "{_YLABEL["surface"]}"',
        "set key outside",
        "splot " + ", \\\n      ".join(plots),
    ]) + "\n"
    return dat, plt


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _out_dir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _resolve_sweep_config(args):
    values = {}
    if args.preset:
        values.update(config_to_dict(preset(args.preset)))
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {args.config}: {e.strerror}") from None
        values.update(parse_config_text(text, args.config))
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        values[key] = value
    if args.seed is not None:
        values["sweep.seed"] = str(args.seed)
    if args.blocks is not None:
        values["sweep.blocks"] = str(args.blocks)
    if args.workers is not None:
        values["sweep.workers"] = str(args.workers)
    if not values:
        raise ConfigError("sweep needs --preset, --config or --set channel.n_users=...")
    workers = _int(values.pop("sweep.workers", "1"), "sweep.workers")
    out = args.out or values.get("output.dir") or "."
    return config_from_dict(values), out, workers


def cmd_sweep(args):
    cfg, out, workers = _resolve_sweep_config(args)
    result = run_scenario(cfg, n_workers=workers)
    out = _out_dir(out)
    _write(out / "sweep.csv", sweep_csv_text(result))
    meta = [
        "# nomaec sweep run metadata",
        f"# version {__version__}, kernel backend {_accel.BACKEND}",
        f"# seed: {cfg.seed}",
        f"# n_blocks: {cfg.n_blocks}",
        f"# preset: {args.preset or 'none'}",
        "",
        "# resolved configuration (readable by --config)",
    ]
    meta += [f"{k} = {v}" for k, v in config_to_dict(cfg, out_dir=args.out or ".").items()]
    _write(out / "run_meta.txt", "\n".join(meta) + "\n")
    print(f"wrote {out / 'sweep.csv'} ({len(result.rows)} rows)")
    return 0


def _yes_no(value):
    return value == "yes"


def cmd_recommend(args):
    query = ScenarioQuery(_yes_no(args.weak), _yes_no(args.strong), args.snr)
    for tech in recommend(query).techniques:
        print(tech)
    if args.justify:
        base = preset(args.preset, seed=args.seed if args.seed is not None else 1,
                      n_blocks=args.blocks or DEFAULT_BLOCKS)
        if base.n_users == 2:
            base = base.replace(schemes=("oma", "noma_full", "nomar_paired"), pairings=("optimal",))
        result = justify(query, base, n_workers=args.workers or 1)
        out = _out_dir(args.out or ".")
        _write(out / "justify.csv", sweep_csv_text(result))
        print(f"wrote {out / 'justify.csv'}")
    return 0


def cmd_plotdata(args):
    records, has_beta = read_sweep_csv(args.csv)
    dat, plt = build_plotdata(records, has_beta, args.kind)
    out = _out_dir(args.out or ".")
    _write(out / f"{args.kind}.dat", dat)
    _write(out / f"{args.kind}.plt", plt)
    print(f"wrote {out / (args.kind + '.dat')} and {out / (args.kind + '.plt')}")
    return 0


def cmd_ec(args):
    try:
        beta = float(args.beta)
    except ValueError:
        raise ConfigError(f"--beta must be a number, got {args.beta!r}") from None
    if not math.isfinite(beta) or beta >= SMALL_BETA:
        raise ConfigError("--beta must be negative")
    samples = []
    try:
        fh = open(args.rates, encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {args.rates}: {e.strerror}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                v = float(s)
            except ValueError:
                raise ConfigError(f"{args.rates}:{lineno}: not a number: {s!r}") from None
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"{args.rates}:{lineno}: rate must be finite and non-negative")
            samples.append(v)
    try:
        est = effective_capacity(np.array(samples), beta)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    print(f"ec={est.value:.9g} stderr={est.std_error:.9g} n={est.n_samples}")
    return 0


def cmd_pairings(args):
    m = args.m
    try:
        plans = enumerate_pairings(m)
        opt = optimal_pairing(m)
        seq = sequential_pairing(m)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    print(f"all ({len(plans)}):")
    for p in plans:
        print("  " + p.label())
    print("optimal: " + opt.label())
    print("sequential: " + seq.label())
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nomaec",
        description="Effective capacity of uplink OMA, NOMA, paired NOMA and NOMA-R.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_flags = argparse.ArgumentParser(add_help=False)
    run_flags.add_argument("--seed", type=int, help="64-bit unsigned seed for the channel and random pairing")
    run_flags.add_argument("--blocks", type=int, help="number of fading blocks to simulate")
    run_flags.add_argument("--out", help="output directory (created if missing)")
    run_flags.add_argument("--workers", type=int, help="worker threads; outputs do not depend on it")

    p = sub.add_parser("sweep", parents=[run_flags], help="run a scenario and write sweep.csv",
                       description="Run a scenario and write sweep.csv plus run_meta.txt.")
    p.add_argument("--preset", choices=PRESETS, help="start from a figure preset")
    p.add_argument("--config", help="flat 'section.key = value' config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key (repeatable); keys: " + ", ".join(CONFIG_KEYS))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("recommend", parents=[run_flags], help="print the recommended MA techniques",
                       description="Print the recommended multiple-access techniques for a scenario.")
    p.add_argument("--weak", choices=("yes", "no"), required=True, help="weak user needs low latency")
    p.add_argument("--strong", choices=("yes", "no"), required=True, help="strong user needs low latency")
    p.add_argument("--snr", choices=("high", "low"), required=True, help="transmit SNR regime")
    p.add_argument("--justify", action="store_true",
                   help="also simulate 5 dB and 35 dB and write justify.csv")
    p.add_argument("--preset", choices=PRESETS, default="fig2",
                   help="base configuration for --justify (default fig2)")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("plotdata", help="reshape sweep.csv into .dat/.plt files",
                       description="Reshape sweep.csv into a .dat table and a gnuplot script.")
    p.add_argument("csv", help="sweep.csv produced by the sweep command")
    p.add_argument("--kind", choices=PLOT_KINDS, required=True, help="which figure to prepare")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.set_defaults(func=cmd_plotdata)

    p = sub.add_parser("ec", help="effective capacity of a rate trace",
                       description="Effective capacity of a rate trace (one rate per line, b/s/Hz).")
    p.add_argument("--rates", required=True, help="file with one non-negative rate per line")
    p.add_argument("--beta", required=True, help="negative delay exponent beta")
    p.set_defaults(func=cmd_ec)

    p = sub.add_parser("pairings", help="list pairing plans for M users",
                       description="List all, optimal and sequential pairing plans for M users.")
    p.add_argument("--m", type=int, required=True, help="even number of users (at most 10)")
    p.set_defaults(func=cmd_pairings)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"nomaec {args.command}: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure
        print(f"nomaec {args.command}: failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
