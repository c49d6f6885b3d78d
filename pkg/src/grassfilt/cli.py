"""Command-line driver for the experiments.

Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .exceptions import ConfigInvalid, MissingLabels
from .experiments import (
    CSBM_DEFAULTS,
    DPG_DEFAULTS,
    EXPERIMENTS,
    INTERP_DEFAULTS,
    TABLE_COLUMNS,
)

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

_TABLES = {
    "interp-convergence": ("convergence", "probes"),
    "csbm": ("weight_quantiles", "neighbour_distances", "interp_errors"),
    "dpg-classify": ("splits", "summary", "grid"),
    "karate": ("splits", "summary", "grid"),
}

_DEFAULTS = {
    "interp-convergence": INTERP_DEFAULTS,
    "csbm": CSBM_DEFAULTS,
    "dpg-classify": DPG_DEFAULTS,
    "karate": DPG_DEFAULTS,
}


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _ConfigError(message)


def _epilog(name):
    keys = ", ".join(sorted(_DEFAULTS[name]))
    tables = "\n".join(f"  {t}.csv: {TABLE_COLUMNS[t]}" for t in _TABLES[name])
    return f"config keys: {keys}\n\noutput tables:\n{tables}"


def build_parser():
    parser = _Parser(prog="grassfilt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"grassfilt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=EXPERIMENTS[name].__doc__.splitlines()[0],
                           epilog=_epilog(name), formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="JSON config file; unknown keys are rejected")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key; VALUE is parsed as JSON when possible, "
                            "dotted keys address nested objects")
        p.add_argument("--out", help="output directory for report.json and CSV tables")
        p.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_config(path):
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigInvalid(f"config file not found: {path}")
    try:
        with open(p, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigInvalid(f"{path}: config must be a JSON object")
    return cfg


def _apply_override(cfg, item):
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigInvalid(f"--set expects KEY=VALUE, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    *parents, leaf = key.split(".")
    node = cfg
    for part in parents:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigInvalid(f"--set {key}: {part!r} is not an object")
    node[leaf] = value


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except _ConfigError as exc:
        print(f"grassfilt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _load_config(args.config)
        for item in args.set:
            _apply_override(cfg, item)
        out = args.out or cfg.get("out_path")
        report = EXPERIMENTS[args.command](cfg, args.seed)
        if out:
            report.config_echo["out_path"] = str(out)
            report.write(out)
    except (ConfigInvalid, MissingLabels) as exc:
        print(f"grassfilt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        print(f"grassfilt: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _print_summary(report, out)
    return EXIT_OK


def _print_summary(report, out):
    lines = [f"{report.name}: seed {report.seed}"]
    if report.name in ("karate", "dpg-classify"):
        gs = report.config_echo["graph"]
        lines.append(f"graph: n={gs['n']} m={gs['m']}")
        for row in report.rows["summary"]:
            lines.append(f"{row['method']}: median {row['median']:.4f} "
                         f"[{row['q25']:.4f}, {row['q75']:.4f}]")
    elif report.name == "interp-convergence":
        for row in report.rows["convergence"]:
            lines.append(f"N={row['N']}: max subspace err {row['max_subspace_err']:.3e}, "
                         f"max filter err {row['max_filter_err']:.3e}")
    elif report.name == "csbm" and "speedup" in report.timings:
        lines.append(f"interpolation speedup over exact eigensolve: {report.timings['speedup']:.2f}x")
    if out:
        lines.append(f"wrote {out}")
    print("\n".join(lines))


if __name__ == "__main__":
    sys.exit(main())
