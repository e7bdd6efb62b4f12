"""Command-line entry point: ``multilandau run | convergence | check-config``.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure
(fixed-point non-convergence or non-finite velocities).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import THREADS_ENV

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multilandau",
                                description="Particle solver for the multispecies Landau equation.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate a scenario and write diagnostics")
    r.add_argument("config", help="scenario TOML file or bundled preset name")
    r.add_argument("--desk", action="store_true", help="apply the scenario's [desk] overrides")
    r.add_argument("--threads", type=int, default=None, help=f"thread count (overrides ${THREADS_ENV})")
    r.add_argument("--out", default=None, help="output directory (default: output.directory)")

    c = sub.add_parser("convergence", help="grid refinement study against the BKW solution")
    c.add_argument("config")
    c.add_argument("--n", required=True, help="comma-separated grid sizes, e.g. 20,30,40")
    c.add_argument("--desk", action="store_true")
    c.add_argument("--threads", type=int, default=None)
    c.add_argument("--out", default=None)

    k = sub.add_parser("check-config", help="validate a scenario and print derived quantities")
    k.add_argument("config")
    return p


def _parse_n_list(text: str) -> list:
    try:
        vals = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        vals = []
    if not vals or any(v < 2 for v in vals):
        raise ValueError(f"--n: expected a comma-separated list of integers >= 2, got {text!r}")
    return vals


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    threads = getattr(args, "threads", None)
    if threads is not None:
        if threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return EXIT_INVALID
        # must happen before numba is first imported
        os.environ[THREADS_ENV] = str(threads)
        os.environ.setdefault("NUMBA_NUM_THREADS", str(threads))

    from . import set_threads
    from .config import apply_desk, load_config
    from .errors import ConfigParseError, ConfigValidationError, LandauError, NonConvergence, NonFiniteError
    from .runner import check_report, convergence, run

    try:
        cfg = load_config(args.config)
        if getattr(args, "desk", False):
            cfg = apply_desk(cfg)
        if args.command == "check-config":
            print(check_report(cfg))
            return EXIT_OK
        used = set_threads(threads)
        if args.command == "run":
            res = run(cfg, args.out, threads=used)
            d = res.summary["relative_drift"]
            print(f"{cfg.name}: {res.steps} steps in {res.wall_clock:.2f} s; "
                  f"drift mass={d['mass']:.3g} momentum={d['momentum']:.3g} energy={d['energy']:.3g}")
        else:
            rows = convergence(cfg, _parse_n_list(args.n), args.out)
            for r in rows:
                print(f"species {r['species']} n={r['n']} rel_L2={r['rel_L2']:.6e} "
                      f"order_L2={r['order_L2']:.3f}")
        return EXIT_OK
    except (ConfigParseError, ConfigValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NonConvergence, NonFiniteError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except LandauError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
