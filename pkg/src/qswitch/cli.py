"""Command-line front end: ``qswitch {point,sweep,verify,figures}``.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import analytic, sweep
from .errors import QSwitchError
from .params import InputParams, SwitchParams
from .protocols import ProtocolRun, averaged, run
from .qmat import l1_coherence, projector
from .states import hadamard, switch_state
from .verify import run_verification

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _angle(text: str) -> float:
    try:
        return sweep.parse_angle(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--degrees", action="store_true", default=None,
                   help="angles given (and theta/phi printed) in degrees")
    p.add_argument("--protocol", default=None, help="1, 2 or all")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--config", default=None, help="key=value config file; flags override it")


def _add_grid(p: argparse.ArgumentParser):
    p.add_argument("--grid", default=None, help="THETA_POINTSxPHI_POINTS, default 181x360")
    p.add_argument("--theta-range", default=None, help="lo,hi (e.g. 0,pi)")
    p.add_argument("--phi-range", default=None, help="lo,hi (e.g. 0,2pi)")
    p.add_argument("--columns", default=None, help="comma-separated subset of output columns")
    p.add_argument("--perturb", type=float, default=None,
                   help="add this to one teleport Kraus entry (fault injection)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qswitch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="all closed-form values at one switch setting")
    p.add_argument("--theta", type=_angle, required=True)
    p.add_argument("--phi", type=_angle, default=0.0)
    p.add_argument("--theta-prime", type=_angle, default=None)
    p.add_argument("--phi-prime", type=_angle, default=None)
    p.add_argument("--outcome", choices=("on", "off"), default="on")
    p.add_argument("--verify", action="store_true", help="also evolve numerically and compare")
    _add_common(p)

    p = sub.add_parser("sweep", help="evaluate columns on a (theta, phi) grid")
    p.add_argument("--verify", action="store_true", default=None,
                   help="append *_num and *_err columns")
    _add_grid(p)
    _add_common(p)

    p = sub.add_parser("verify", help="analytic-vs-numeric suite and invariants")
    _add_grid(p)
    _add_common(p)

    p = sub.add_parser("figures", help="write fig*.csv surface data")
    p.add_argument("out_dir", nargs="?", default=None)
    _add_grid(p)
    _add_common(p)
    return parser


def _config(args) -> sweep.SweepConfig:
    raw = sweep.read_config_raw(args.config) if args.config else {}
    for key in ("degrees", "protocol", "format", "tolerance", "jobs", "grid", "theta_range",
                "phi_range", "columns", "perturb", "verify", "out"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = str(value)
    return sweep.SweepConfig(**sweep.config_kwargs(raw))


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, newline="")


def _point_numeric(theta: float, phi: float, q: InputParams | None, outcome: str) -> dict:
    num = {}
    keys = {1: "Pr1", 2: "Pr2"}
    for p in (1, 2):
        f_keep, _ = averaged(p, "trace", theta, phi)
        f_on, p_on = averaged(p, "on", theta, phi)
        f_off, _ = averaged(p, "off", theta, phi)
        num[f"F_{keys[p]}Pa1"] = float(f_keep)
        num[f"F_{keys[p]}Pa2_on"] = float(f_on)
        num[f"F_{keys[p]}Pa2_off"] = float(f_off)
        num[f"D{p}"] = float(f_on - f_keep)
        num[f"D{p}max"] = float(max(f_on, f_off) - f_keep)
        if p == 1:
            num["P_on"] = float(p_on)
    rho_s = projector(switch_state(SwitchParams(theta, phi)))
    num["c_z"] = l1_coherence(rho_s)
    num["c_x"] = l1_coherence(rho_s, hadamard())
    num["Delta1"] = num["G1"] = num["D1"]
    num["Delta2"] = num["G2"] = num["D2"]
    if q is not None:
        s = SwitchParams(theta, phi)
        num["F1_input"] = run(ProtocolRun(2, 1, None, s, q)).fidelity
        num[f"F2_input_{outcome}"] = run(ProtocolRun(2, 2, outcome, s, q)).fidelity
    return num


def cmd_point(args) -> int:
    scale = math.pi / 180 if args.degrees else 1.0
    theta, phi = args.theta * scale, args.phi * scale
    SwitchParams(theta, phi)  # domain validation
    q = None
    if args.theta_prime is not None or args.phi_prime is not None:
        q = InputParams((args.theta_prime or 0.0) * scale, (args.phi_prime or 0.0) * scale)
    rep = analytic.report(theta, phi)
    if q is not None:
        rep.analytic["F1_input"] = analytic.f1_pointwise(theta, q.theta_prime)
        rep.analytic[f"F2_input_{args.outcome}"] = analytic.f2_pointwise(
            theta, phi, q.theta_prime, args.outcome)
    if args.verify:
        rep.attach_numeric(_point_numeric(theta, phi, q, args.outcome))

    shown_theta = math.degrees(theta) if args.degrees else theta
    shown_phi = math.degrees(phi) if args.degrees else phi
    if args.format == "json":
        doc = rep.as_dict()
        doc["theta"], doc["phi"] = shown_theta, shown_phi
        doc["angle_unit"] = "degrees" if args.degrees else "radians"
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        unit = "deg" if args.degrees else "rad"
        lines = [f"theta = {shown_theta:.15g} {unit}", f"phi = {shown_phi:.15g} {unit}"]
        lines += [f"{k} = {v:.6g}" for k, v in rep.analytic.items()]
        if rep.numeric is not None:
            lines += [f"{k}_num = {v:.6g}  (err {rep.discrepancies[k]:.2e})"
                      for k, v in rep.numeric.items()]
            lines.append(f"max_abs_discrepancy = {rep.max_abs_discrepancy:.3e}")
        _emit("\n".join(lines) + "\n", args.out)
    if args.verify:
        tol = args.tolerance if args.tolerance is not None else 1e-10
        return EXIT_OK if rep.max_abs_discrepancy <= tol else EXIT_VERIFY
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _config(args)
    result = sweep.compute(config)
    _emit(sweep.render(result, config.format), config.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _config(args)
    summary = run_verification(config)
    _emit(json.dumps(summary, indent=2) + "\n", config.out)
    return EXIT_OK if summary["passed"] else EXIT_VERIFY


def cmd_figures(args) -> int:
    config = _config(args)
    out_dir = args.out_dir or config.out or "figures"
    summary = sweep.write_figures(out_dir, config)
    summary["out_dir"] = str(out_dir)
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {"point": cmd_point, "sweep": cmd_sweep, "verify": cmd_verify, "figures": cmd_figures}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except OSError as exc:
        print(f"qswitch: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QSwitchError, ValueError) as exc:
        print(f"qswitch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
