"""Command-line scenario runner.

    wptsim validate <cfg>
    wptsim run <cfg> [--jobs N] [--out DIR]
    wptsim sweep <cfg> [--var <name> --values <v1,v2,...>] [--jobs N] [--out DIR]

``<cfg>`` is a TOML file or the name of a built-in scenario.  The output
directory defaults to the scenario's ``output.dir`` and can be overridden
with ``$WPTSIM_OUTPUT_DIR`` or ``--out``.  Exit codes: 0 ok, 1 validation
error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .scenario import BUILTIN_SCENARIOS, SWEEP_VARIABLES, ConfigError, load_scenario, run, sweep, sub_seeds

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _report(exc: ConfigError) -> None:
    for key, message in exc.errors:
        print(f"error: {key}: {message}", file=sys.stderr)


def _print_seeds(sc) -> None:
    print("realization,sub_seed")
    for i, s in enumerate(sub_seeds(sc.seed, sc["realizations"])):
        print(f"{i},{s}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wptsim", description="WPT/SWIPT scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check a scenario and print its resolved configuration")
    p_val.add_argument("config")

    p_run = sub.add_parser("run", help="run a scenario")
    p_run.add_argument("config", help=f"TOML file or built-in: {', '.join(BUILTIN_SCENARIOS)}")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--out", default=None)

    p_sw = sub.add_parser("sweep", help="sweep one variable and write a long-form CSV")
    p_sw.add_argument("config")
    p_sw.add_argument("--var", default=None, help=f"{', '.join(SWEEP_VARIABLES)} (default: sweep.variable)")
    p_sw.add_argument("--values", default=None, help="comma-separated list (default: sweep.values)")
    p_sw.add_argument("--jobs", type=int, default=1)
    p_sw.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        sc = load_scenario(args.config)
        if args.command == "validate":
            sys.stdout.write(sc.resolved_json())
            return EXIT_OK
        if args.command == "run":
            _print_seeds(sc)
            out = run(sc, jobs=args.jobs, output_dir=args.out)
        else:
            variable = args.var or sc["sweep"]["variable"]
            if args.values is None:
                values = list(sc["sweep"]["values"])
            else:
                values = [_parse_value(v) for v in args.values.split(",") if v.strip()]
            if variable is None:
                raise ConfigError([("sweep.variable", "no sweep variable given")])
            _print_seeds(sc)
            out = sweep(sc, variable, values, jobs=args.jobs, output_dir=args.out)
    except ConfigError as exc:
        _report(exc)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
