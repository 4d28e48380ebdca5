# -*- coding: utf-8 -*-
"""
    wholegrid.cli
    ~~~~~~~~~~~~~

    CLI entry command

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
import argparse
import json
import shutil
import sys
from importlib import resources

import numpy as np
import pandas as pd

from wholegrid import emtsim, sysmodel, utils
from wholegrid.case import prepare_case
from wholegrid.config import load_config
from wholegrid.errors import SchemaError, WholeGridError
from wholegrid.logger import logger

FLOAT_FORMAT = "%.12g"
FIXTURES = ("sg_infinite_bus", "gfl_infinite_bus", "composite_3bus")
PM_ENTRIES = (("pp", 0, 0), ("pm", 0, 1), ("mp", 1, 0), ("mm", 1, 1))


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """
    Parser that reports usage errors with exit code 1, keeping 2 for model
    errors.
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def write_table(table, path):
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def samples_table(samples):
    """
    One row per frequency with the four +- entries split into real and
    imaginary columns.
    """
    values = np.array([sample.value for sample in samples], dtype=complex).reshape(-1, 2, 2)
    table = pd.DataFrame({"f_hz": [sample.frequency for sample in samples]})
    for name, r, c in PM_ENTRIES:
        for column, data in utils.format_complex_columns(f"y_{name}", values[:, r, c]).items():
            table[column] = data
    return table


def poles_table(poles):
    return pd.DataFrame([
        {
            "re": p.value.real,
            "im": p.value.imag,
            "f_hz": p.frequency_hz,
            "damping": p.damping_ratio,
            "group": p.group_label,
        }
        for p in poles
    ])


def _bands(config):
    return tuple(config.solver["bands"])


def _check_bus(config, bus):
    n = config.network["n_buses"]
    if not 1 <= bus <= n:
        raise SchemaError(f"bus {bus} does not exist in a {n} bus network", path="/bus")


def cmd_powerflow(config, args):
    op = prepare_case(config).operating_point
    result = {
        "iterations": op.iterations,
        "buses": [
            {
                "bus": k + 1,
                "V_re": float(v.real), "V_im": float(v.imag),
                "V_abs": float(abs(v)), "V_angle": float(np.angle(v)),
                "P": float(s.real), "Q": float(s.imag),
                "I_re": float(i.real), "I_im": float(i.imag),
            }
            for k, (v, s, i) in enumerate(zip(op.V, op.S, op.I))
        ],
    }
    with open(args.output, "w", encoding="utf-8") as fp:
        json.dump(result, fp, indent=2, sort_keys=True)
        fp.write("\n")


def cmd_poles(config, args):
    model = sysmodel.build_model(config, args.formulation)
    poles = sysmodel.system_poles(model, _bands(config))
    summary = sysmodel.stability_summary(poles)
    logger.info(
        "%d poles, %s, rightmost %.6g%+.6gj",
        len(poles), "stable" if summary.stable else "unstable",
        summary.rightmost.value.real, summary.rightmost.value.imag,
    )
    write_table(poles_table(poles), args.output)


def cmd_spectrum(config, args):
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    _check_bus(config, args.bus)
    model = sysmodel.build_model(config, args.formulation)
    grid = np.linspace(args.fmin, args.fmax, args.points)
    write_table(samples_table(sysmodel.bus_spectrum(model, args.bus, grid)), args.output)


def cmd_participation(config, args):
    model = sysmodel.build_model(config, args.formulation)
    poles = sysmodel.system_poles(model, _bands(config))
    target = 2.0 * np.pi * args.freq_hz
    # nearest pole in frequency, the least damped one among ties
    pole = min(poles, key=lambda p: (round(abs(p.value.imag - target), 9), p.damping_ratio)).value
    logger.info("participation in the mode %.6g%+.6gj", pole.real, pole.imag)
    rows = sysmodel.participation(model, pole, config.solver["eig_tol"])
    table = pd.DataFrame(
        [{"bus": bus, "pole_re": pole.real, "pole_im": pole.imag, "participation": mag} for bus, mag in rows]
    )
    write_table(table, args.output)


def cmd_sweep(config, args):
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    values = np.linspace(args.start, args.stop, args.points)
    points = sysmodel.parameter_sweep(config, args.param, values, args.formulation, args.workers)
    rows = []
    for point in points:
        if point.error is not None:
            rows.append({"value": point.value, "index": -1, "re": np.nan, "im": np.nan,
                         "group": "", "error": point.error["code"]})
            continue
        for index, pole in enumerate(point.poles):
            rows.append({"value": point.value, "index": index, "re": pole.value.real,
                         "im": pole.value.imag, "group": pole.group_label, "error": ""})
    write_table(pd.DataFrame(rows, columns=["value", "index", "re", "im", "group", "error"]), args.output)


def cmd_simulate(config, args):
    try:
        with open(args.scenario, encoding="utf-8") as fp:
            data = json.load(fp)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read scenario: {exc}", path="")
    scenario = emtsim.SimScenario.from_dict(data)
    write_table(emtsim.simulate(config, scenario), args.output)


def cmd_measure(config, args):
    try:
        freqs = [float(f) for f in args.freqs.split(",") if f.strip()]
        spec = emtsim.InjectionSpec(
            target=args.bus, frame=args.frame, amplitude=args.amp, frequencies=freqs,
            settle_cycles=args.settle_cycles, measure_cycles=args.measure_cycles,
            compensate_delay=args.compensate_delay,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    _check_bus(config, args.bus)
    write_table(samples_table(emtsim.measure_admittance(config, spec)), args.output)


def cmd_fixtures(args):
    if args.name is None:
        for name in FIXTURES:
            print(name)
        return
    if args.name not in FIXTURES:
        raise UsageError(f"unknown fixture {args.name!r}")
    source = resources.files("wholegrid") / "fixtures" / f"{args.name}.json"
    with resources.as_file(source) as path:
        if args.output:
            shutil.copyfile(path, args.output)
        else:
            sys.stdout.write(path.read_text(encoding="utf-8"))


COMMANDS = {
    "powerflow": cmd_powerflow,
    "poles": cmd_poles,
    "spectrum": cmd_spectrum,
    "participation": cmd_participation,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "measure": cmd_measure,
}


def build_parser():
    parser = ArgumentParser(prog="wholegrid", description="Impedance-based whole-system stability analysis")
    parser.add_argument("--debug", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    def command(name, help, output=True):
        p = sub.add_parser(name, help=help)
        p.add_argument("-c", "--config", required=True, help="grid description (JSON)")
        if output:
            p.add_argument("-o", "--output", required=True, help="output file")
        return p

    def formulation(p):
        p.add_argument("--formulation", choices=(sysmodel.AUTO, sysmodel.PRIMAL, sysmodel.DUAL),
                       default=sysmodel.AUTO)

    command("powerflow", "solve the power flow, write JSON")
    formulation(command("poles", "closed-loop poles"))

    p = command("spectrum", "whole-system admittance at a bus")
    p.add_argument("--bus", type=int, required=True)
    p.add_argument("--fmin", type=float, required=True)
    p.add_argument("--fmax", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    formulation(p)

    p = command("participation", "bus participation in the mode nearest a frequency")
    p.add_argument("--freq-hz", type=float, required=True)
    formulation(p)

    p = command("sweep", "poles over a parameter range")
    p.add_argument("--param", action="append", required=True,
                   help="parameter locator, repeat to set several to the same value")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--workers", type=int, default=None)
    formulation(p)

    p = command("simulate", "time-domain simulation")
    p.add_argument("-s", "--scenario", required=True, help="scenario (JSON)")

    p = command("measure", "admittance measurement by injection")
    p.add_argument("--bus", type=int, required=True)
    p.add_argument("--frame", choices=(emtsim.STEADY, emtsim.SWING), default=emtsim.STEADY)
    p.add_argument("--amp", type=float, default=1e-3)
    p.add_argument("--freqs", required=True, help="comma separated signed frequencies in Hz")
    p.add_argument("--settle-cycles", type=int, default=20)
    p.add_argument("--measure-cycles", type=int, default=5)
    p.add_argument("--compensate-delay", action="store_true")

    p = sub.add_parser("fixtures", help="list or copy the shipped grid descriptions")
    p.add_argument("name", nargs="?")
    p.add_argument("-o", "--output")
    return parser


def main(argv=None):
    """
    Main CLI handler
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    # defaults to info
    logger.setLevel("DEBUG" if args.debug else "INFO")

    try:
        if args.command == "fixtures":
            cmd_fixtures(args)
            return 0
        config = load_config(args.config)
        if config.debug_mode:
            logger.setLevel("DEBUG")
        COMMANDS[args.command](config, args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except WholeGridError as exc:
        logger.debug("model error: %s", exc.message)
        print(json.dumps(exc.to_dict(), sort_keys=True, default=str), file=sys.stderr)
        return 2

    return 0


if __name__ == "__main__":
    sys.exit(main())
