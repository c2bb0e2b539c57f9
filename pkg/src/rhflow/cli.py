"""Command line front end.

Subcommands:
  simulate <config>            run a scenario, write trace + report
  verify <config> --suite=...  run the identity/variation suites
  report <dir>                 re-print a stored report, re-using its status

Flags --dt, --grid, --alpha, --mode, --out override the matching config
keys; RHFLOW_OUT supplies the default output directory.  Exit status:
0 all checks pass, 1 a check failed, 2 runtime or configuration error.
"""

import argparse
import sys

from . import harness
from .config import load_config
from .errors import RhflowError

_OVERRIDE_FLAGS = ("dt", "grid", "alpha", "mode", "out")


def _add_overrides(sub):
    sub.add_argument("--dt", help="reporting interval override")
    sub.add_argument("--grid", help="grid override, e.g. 64x32 or 129")
    sub.add_argument("--alpha", help="coupling constant override")
    sub.add_argument("--mode", help="map handling: hold or reharmonize")
    sub.add_argument("--out", help="output directory override")


def build_parser():
    p = argparse.ArgumentParser(
        prog="rhflow",
        description="curvature-map flow simulator and identity checker")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a configured scenario")
    sim.add_argument("config", help="key=value config file")
    _add_overrides(sim)

    ver = sub.add_parser("verify", help="run the verification suites")
    ver.add_argument("config", help="key=value config file")
    ver.add_argument("--suite", default="all", choices=harness.SUITES,
                     help="which suite to run (default all)")
    _add_overrides(ver)

    rep = sub.add_parser("report", help="re-print a stored run report")
    rep.add_argument("dir", help="output directory of a previous run")
    return p


def _overrides(args):
    out = {}
    for key in _OVERRIDE_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = load_config(args.config, overrides=_overrides(args))
            return harness.run_scenario(cfg)
        if args.command == "verify":
            cfg = load_config(args.config, overrides=_overrides(args))
            return harness.verify(cfg, suite=args.suite)
        return harness.replay_report(args.dir)
    except RhflowError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
