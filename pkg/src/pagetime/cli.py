"""Command-line entry point: ``pagetime <command> ...``.

Results go to stdout, logs to stderr. Exit status is 0 on success, 1 on a
domain or input error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .browser import Rounding, bpe, render_class, render_seconds
from .exceptions import PagetimeError
from .fitting import build_profile, iter_measurements, read_server_times, validate
from .manifest import read_manifest
from .predictor import DnsConnectMode, PredictionConfig, format_csv, format_table, predict
from .profile import read_profile, save_profile
from .waterfall import SimComponent, components_from_manifest, effective_parallelism, schedule_csv, simulate, sweep

logger = logging.getLogger("pagetime")

SIM_HEADER = ("doc_order", "fb_ms", "cd_ms", "is_js")


class InputError(PagetimeError):
    pass


def resolve(path: str) -> Path:
    """Use ``path`` if it exists, else a bundled fixture of the same name."""
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("pagetime") / "data" / p.name
    if bundled.is_file():
        logger.info("using bundled fixture %s", p.name)
        return Path(str(bundled))
    raise InputError(f"cannot read {path}: no such file")


def _read_bytes(path: str) -> bytes:
    p = resolve(path)
    try:
        return p.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _read_sim_components(data: bytes):
    reader = csv.DictReader(io.StringIO(data.decode("utf-8-sig")))
    comps = []
    for lineno, row in enumerate(reader, start=2):
        try:
            comps.append(
                SimComponent(
                    doc_order=int(row["doc_order"]),
                    fb_ms=float(row["fb_ms"]),
                    cd_ms=float(row["cd_ms"]),
                    is_js=row["is_js"].strip().lower() in ("1", "true", "yes", "y"),
                )
            )
        except (KeyError, ValueError, AttributeError) as exc:
            raise InputError(f"bad simulation row {lineno}: {exc}") from exc
    return comps


def _load_sim(path: str):
    data = _read_bytes(path)
    first_line = data.decode("utf-8-sig").split("\n", 1)[0].strip()
    if tuple(h.strip() for h in first_line.split(",")) == SIM_HEADER:
        return _read_sim_components(data)
    return components_from_manifest(read_manifest(resolve(path)))


def cmd_fit(args, out):
    server_times = None
    if args.server_times:
        server_times = read_server_times(_read_bytes(args.server_times))
    path = resolve(args.measurements)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        profile = build_profile(iter_measurements(fh), server_times, args.country, t_sr_ms=args.t_sr)
    Path(args.out).write_bytes(save_profile(profile))
    out.write(save_profile(profile).decode("utf-8"))


def cmd_predict(args, out):
    manifest = read_manifest(resolve(args.manifest))
    profile = read_profile(resolve(args.profile))
    config = PredictionConfig(
        bpe=args.bpe,
        dns_connect_mode=args.mode,
        include_render=args.include_render,
        include_server=not args.no_server,
        connections=args.connections,
    )
    breakdown = predict(manifest, profile, config)
    fmt = format_csv if args.format == "csv" else format_table
    out.write(fmt(breakdown, args.measured))


def cmd_bpe(args, out):
    value = bpe(args.fb, args.avg_cd, Rounding.NEAREST_INT if args.round else Rounding.RAW)
    out.write(f"{int(value)}\n" if args.round else f"{value:.2f}\n")


def cmd_render(args, out):
    if args.requests < 1:
        raise InputError("--requests must be >= 1")
    n = args.total_kb / args.requests
    seconds = render_seconds(args.total_kb, n)
    out.write(f"class {render_class(n).value} N {n:.2f} render_ms {seconds * 1000.0:.2f}\n")


def cmd_simulate(args, out):
    comps = _load_sim(args.manifest)
    if args.sweep is not None:
        out.write("k,makespan_ms\n")
        for k, makespan in sweep(comps, args.sweep):
            out.write(f"{k},{makespan:.2f}\n")
        return
    result = simulate(comps, args.k)
    if args.schedule:
        out.write(schedule_csv(result))
        return
    out.write(
        f"makespan_ms {result.makespan_ms:.2f} connections_used {result.connections_used} "
        f"parallelism {effective_parallelism(comps, args.k):.2f}\n"
    )


def cmd_validate(args, out):
    reader = csv.DictReader(io.StringIO(_read_bytes(args.pairs).decode("utf-8-sig")))
    names, pairs = [], []
    for lineno, row in enumerate(reader, start=2):
        try:
            pairs.append((float(row["predicted_ms"]), float(row["measured_ms"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad pairs row {lineno}: need predicted_ms and measured_ms") from exc
        names.append(row.get("property") or str(lineno - 1))
    stats = validate(pairs)
    if args.format == "csv":
        out.write("property,predicted_ms,measured_ms,error_pct\n")
        for name, (p, m), e in zip(names, pairs, stats.per_row_error_pct):
            out.write(f"{name},{p:.2f},{m:.2f},{e:.2f}\n")
        out.write(f"mean,,,{stats.mean_error_pct:.2f}\nstddev,,,{stats.stddev_error_pct:.2f}\n")
        return
    width = max(len(n) for n in names)
    for name, (p, m), e in zip(names, pairs, stats.per_row_error_pct):
        out.write(f"{name.ljust(width)}  {p:10.2f}  {m:10.2f}  {e:6.2f}%\n")
    suffix = " (n=1)" if stats.single else ""
    out.write(f"mean {stats.mean_error_pct:.2f}% stddev {stats.stddev_error_pct:.2f}%{suffix}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pagetime", description="Predict end-user web page response time.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a network profile from a measurement CSV")
    p.add_argument("--measurements", required=True, help="CSV: url,domain,kind,size_bytes,dns_ms,connect_ms,fb_ms,cd_ms")
    p.add_argument("--country", required=True)
    p.add_argument("--out", required=True, help="profile file to write")
    p.add_argument("--server-times", help="CSV: property,server_ms (base-page url or host)")
    p.add_argument("--t-sr", type=float, default=200.0, help="server processing time in ms (default 200)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict page response time")
    p.add_argument("--manifest", required=True, help="worksheet CSV or HAR file")
    p.add_argument("--profile", required=True)
    p.add_argument("--bpe", type=float, help="use this browser parallel efficiency instead of computing it")
    p.add_argument("--include-render", action="store_true")
    p.add_argument("--no-server", action="store_true", help="leave out server processing time")
    p.add_argument("--mode", choices=[m.value for m in DnsConnectMode], default=DnsConnectMode.SINGLE_CDN.value)
    p.add_argument("--connections", type=int, help="connection count for per-domain mode")
    p.add_argument("--measured", type=float, help="measured response time to compare against")
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bpe", help="browser parallel efficiency")
    p.add_argument("--fb", type=float, required=True, help="first byte time (ms)")
    p.add_argument("--avg-cd", type=float, required=True, help="average content download time (ms)")
    p.add_argument("--round", action="store_true", help="round half up to an integer")
    p.set_defaults(func=cmd_bpe)

    p = sub.add_parser("render", help="rendering time from page weight")
    p.add_argument("--total-kb", type=float, required=True)
    p.add_argument("--requests", type=int, required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("simulate", help="simulate parallel downloads")
    p.add_argument("--manifest", required=True, help="worksheet CSV, HAR, or doc_order,fb_ms,cd_ms,is_js CSV")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int, help="number of connections")
    group.add_argument("--sweep", type=int, metavar="K_MAX", help="simulate k = 1..K_MAX")
    p.add_argument("--schedule", action="store_true", help="dump the per-component schedule as CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="error statistics of predictions against measurements")
    p.add_argument("--pairs", required=True, help="CSV with predicted_ms,measured_ms columns")
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        args.func(args, out)
    except (PagetimeError, OSError) as exc:
        print(f"pagetime {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
