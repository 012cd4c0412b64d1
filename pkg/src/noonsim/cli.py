"""Command-line front end: ``noon-sim {run,sweep,fit,report,demo}``.

Exit codes: 0 ok, 1 usage, 2 configuration, 3 runtime.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__
from .analysis import FitError, NoOscillationError, debroglie_report, dump_columns, fit_cosine, harmonic_content
from .demos import FIGURES, figure_configs
from .experiment import (
    ExperimentConfig,
    FringeSeries,
    SeriesFormatError,
    load_config,
    read_series,
    run_experiment,
    run_sweep,
    series_to_csv,
    summarize,
    write_series,
)
from .fock import ConfigurationError
from .source import DEFAULT_WAVELENGTH_NM

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _ConfigFailure(Exception):
    pass


def _pattern_stem(pattern: str) -> str:
    return pattern.replace("+", "p").replace("-", "m") or "counts"


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load(path: str, args) -> ExperimentConfig:
    try:
        cfg = load_config(path)
    except FileNotFoundError:
        raise _ConfigFailure(f"config file not found: {path}") from None
    except OSError as exc:
        raise _ConfigFailure(f"cannot read config {path}: {exc}") from None
    patterns = [args.pattern] if getattr(args, "pattern", None) is not None else None
    return cfg.with_overrides(patterns=patterns, shots=getattr(args, "shots", None),
                              seed=getattr(args, "seed", None))


def _emit(series_list: list[FringeSeries], cfg: ExperimentConfig, out: Path, stem: str) -> list[dict]:
    out.mkdir(parents=True, exist_ok=True)
    summaries = []
    for s in series_list:
        name = f"{stem}_{_pattern_stem(s.pattern)}.csv"
        write_series(s, out / name)
        summaries.append(dict(summarize(s, cfg), file=name))
    return summaries


def cmd_run(args) -> int:
    cfg = _load(args.config, args)
    series = run_experiment(cfg)
    out = Path(args.out)
    stem = Path(args.config).stem
    summaries = _emit(series, cfg, out, stem)
    _write_json(out / f"{stem}_summary.json", {"config_hash": cfg.hash, "series": summaries})
    for s in summaries:
        print(f"wrote {out / s['file']} ({s['points']} points)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args.config, args)
    series = run_sweep(cfg)
    if args.out is None:
        for s in series:
            sys.stdout.write(series_to_csv(s))
        return EXIT_OK
    out = Path(args.out)
    for s in _emit(series, cfg, out, Path(args.config).stem):
        print(f"wrote {out / s['file']}")
    return EXIT_OK


def _fit_file(path: str, lambda_hint: float | None):
    try:
        series = read_series(path)
    except FileNotFoundError:
        raise _ConfigFailure(f"series file not found: {path}") from None
    except SeriesFormatError as exc:
        raise _ConfigFailure(f"{path}: {exc}") from None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return series, fit_cosine(series, lambda_hint=lambda_hint)


def cmd_fit(args) -> int:
    series, fit = _fit_file(args.csv, args.lambda_hint)
    print(fit.to_text())
    print(fit.to_json())
    if args.dump:
        Path(args.dump).write_text(dump_columns(series, fit))
    return EXIT_OK


def _parse_entry(text: str) -> tuple[int, str]:
    n, sep, path = text.partition(":")
    if not sep or not n.isdigit():
        raise argparse.ArgumentTypeError(f"expected N:path, got {text!r}")
    return int(n), path


def cmd_report(args) -> int:
    fits = [(n, _fit_file(path, args.lambda_hint and args.lambda_hint / n)[1]) for n, path in args.entries]
    report = debroglie_report(fits)
    print(report.to_text())
    print(report.to_json())
    return EXIT_OK


def cmd_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    configs = figure_configs(args.figure)
    fits, extra = [], {}
    for stem, (n, raw) in configs.items():
        _write_json(out / f"{stem}.config.json", raw)
        cfg = ExperimentConfig.from_dict(raw).with_overrides(seed=args.seed, shots=args.shots)
        series = run_experiment(cfg)
        (s,) = series
        write_series(s, out / f"{stem}.csv")
        fit = fit_cosine(s, lambda_hint=DEFAULT_WAVELENGTH_NM / n) if args.figure == "fig3" else None
        if fit is not None:
            fits.append((n, fit))
            Path(out / f"{stem}.dat").write_text(dump_columns(s, fit))
        else:
            weights = harmonic_content(s, DEFAULT_WAVELENGTH_NM, harmonics=(1, 2, 3, 4))
            extra[stem] = {"pattern": s.pattern, "harmonic_amplitudes": {str(k): v for k, v in weights.items()}}
        print(f"wrote {out / (stem + '.csv')}")
    if fits:
        report = debroglie_report(fits)
        (out / f"{args.figure}_report.txt").write_text(report.to_text() + "\n")
        _write_json(out / f"{args.figure}_report.json", report.to_dict())
        print(report.to_text())
    if extra:
        _write_json(out / f"{args.figure}_spectrum.json", extra)
        for stem, info in extra.items():
            amps = info["harmonic_amplitudes"]
            print(f"{stem} {info['pattern']}: " + ", ".join(f"{k}dphi={float(v):.6g}" for k, v in amps.items()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noon-sim",
                     description="Simulate multi-photon interference fringes and fit their wavelengths.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="sweep, sample and write CSV + summary")
    p.add_argument("config", help="experiment config (JSON)")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--shots", type=int, help="override shots per point")
    p.add_argument("--pattern", help="evaluate only this sign pattern, e.g. +-++")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="noiseless sweep only")
    p.add_argument("config", help="experiment config (JSON)")
    p.add_argument("--out", help="output directory; CSV goes to stdout when omitted")
    p.add_argument("--pattern", help="evaluate only this sign pattern")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit A + B cos(kx + phi0) to a series CSV")
    p.add_argument("csv", help="series CSV written by run or sweep")
    p.add_argument("--lambda-hint", type=float, help="expected wavelength (nm); centers the scan")
    p.add_argument("--dump", help="write gnuplot-friendly x/y/model columns here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="de Broglie wavelength table from N:csv entries")
    p.add_argument("entries", nargs="+", type=_parse_entry, metavar="N:CSV",
                   help="photon number and series file")
    p.add_argument("--lambda-hint", type=float, help="single-photon wavelength hint (nm)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("demo", help="reproduce a fringe figure")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--seed", type=int, help="sampling seed")
    p.add_argument("--shots", type=int, help="add Poisson noise with this many shots per point")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "shots", None) is not None and args.shots <= 0:
        parser.error("--shots must be positive")
    try:
        return args.func(args)
    except (_ConfigFailure, ConfigurationError) as exc:
        print(f"noon-sim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, NoOscillationError, ValueError, OSError) as exc:
        print(f"noon-sim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
