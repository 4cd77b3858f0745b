"""Command-line front end.

Subcommands: ``channel``, ``teleport``, ``qfi``, ``figure`` and ``selftest``.
Any subcommand accepts ``--config FILE`` with ``key=value`` lines (``#``
starts a comment). Keys are flag names, with ``_`` or ``-`` and an optional
``params.`` prefix (``params.n=2``); flags given on the command line win.

Exit codes: 0 success, 1 validation error, 2 numeric failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import channel, selftest, sweeps
from .errors import JCError, OutputError, ValidationError

log = logging.getLogger("jcteleport")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_expr(text: str) -> float:
    """Float, also accepting ``pi`` multiples such as ``pi/4`` or ``0.5*pi``."""
    s = str(text).strip().lower().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    if "pi" not in s:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    num, _, den = s.partition("/")
    coef = num.replace("*pi", "").replace("pi*", "").replace("pi", "")
    coef = {"": "1", "+": "1", "-": "-1"}.get(coef, coef)
    try:
        value = float(coef) * math.pi
        if den:
            value /= float(den)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return value


def _float_list(text: str) -> tuple:
    return tuple(_float_expr(x) for x in str(text).split(",") if x.strip())


def read_config(path) -> dict:
    """Parse a ``key=value`` file into a dict with normalized keys."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise OutputError(f"cannot read config {path}: {err}") from err
    out = {}
    for num, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{num}: expected key=value, got {line!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        if key.startswith("params."):
            key = key[len("params."):]
        out[key.replace("-", "_").replace(".", "_")] = value
    return out


def _add_tau(p, count=sweeps.DEFAULT_TAU[2]):
    p.add_argument("--tau-start", type=_float_expr, default=sweeps.DEFAULT_TAU[0])
    p.add_argument("--tau-stop", type=_float_expr, default=sweeps.DEFAULT_TAU[1])
    p.add_argument("--tau-count", type=int, default=count)


def _add_channel(p, series=True):
    p.add_argument("--n", type=int, default=2, help="Fock reference index")
    if series:
        p.add_argument("--nbar", type=_float_list, default=(2.0,), help="comma-separated list")
        p.add_argument("--delta", type=_float_list, default=(0.0,), help="comma-separated list")
    else:
        p.add_argument("--nbar", type=_float_expr, default=2.0)
        p.add_argument("--delta", type=_float_expr, default=0.0)


def _add_common(p):
    p.add_argument("--config", help="key=value file supplying defaults")
    p.add_argument("--out", help="output CSV path (stdout when omitted)")
    p.add_argument("--workers", type=int, default=1)


def _add_input(p):
    p.add_argument("--protocol", choices=("ftp", "stp"), default="ftp")
    p.add_argument("--theta", type=_float_expr, default=math.pi / 4)
    p.add_argument("--phi", type=_float_expr, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jcteleport", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("channel", help="channel coefficients versus tau")
    _add_common(p)
    _add_channel(p, series=False)
    _add_tau(p, count=201)

    p = sub.add_parser("teleport", help="fidelity sweep")
    _add_common(p)
    _add_input(p)
    _add_channel(p)
    _add_tau(p)
    p.add_argument("--mode", choices=("hermitian", "literal"), default="hermitian")
    p.add_argument("--construction", choices=("closed", "oracle"), default="closed")

    p = sub.add_parser("qfi", help="QFI(theta) sweep")
    _add_common(p)
    _add_input(p)
    _add_channel(p)
    _add_tau(p)
    p.add_argument("--engine", choices=("matrix", "spectral", "eq7", "sld"), default="matrix",
                   help="eq7 is an alias of spectral")
    p.add_argument("--derivative", choices=("analytic", "fd"), default="analytic")
    p.add_argument("--raw", action="store_true", help="use the un-normalized Bob state")

    p = sub.add_parser("figure", help="run a figure preset and write CSV + gnuplot script")
    p.add_argument("id", help="preset id such as fig1a, or 'all'")
    p.add_argument("--config")
    p.add_argument("--out-dir", default="figures")
    p.add_argument("--tau-count", type=int)
    p.add_argument("--tau-stop", type=_float_expr)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("selftest", help="run the built-in cross-checks")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=selftest.SEED)
    return parser


def _apply_config(parser, argv):
    """Re-parse with config-file values installed as defaults."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        if key not in known or key in ("config", "help"):
            raise ValidationError(f"unknown config key {key!r} for '{args.command}'")
        action = known[key]
        if action.const is True and action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            continue
        conv = action.type or str
        try:
            value = conv(raw)
        except (argparse.ArgumentTypeError, ValueError) as err:
            raise ValidationError(f"config key {key!r}: {err}") from err
        if action.choices is not None and value not in action.choices:
            raise ValidationError(f"config key {key!r} must be one of {list(action.choices)}")
        defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _write(result, out):
    if out:
        path = sweeps.emit_csv(result, out)
        log.info("wrote %s", path)
        return
    for line in result.comments:
        sys.stdout.write(f"# {line}\n")
    sys.stdout.write(",".join(result.columns) + "\n")
    for row in result.rows:
        sys.stdout.write(",".join(format(float(x), ".17g") for x in row) + "\n")


def _cmd_channel(args):
    p = channel.ChannelParams(args.n, args.nbar, args.delta, args.tau_start)
    if not args.tau_start < args.tau_stop or args.tau_count < 2:
        raise ValidationError("need tau_start < tau_stop and tau_count >= 2")
    tau = np.linspace(args.tau_start, args.tau_stop, args.tau_count)
    a1, a2, a3, a4, a5, log_norm = channel.alpha_arrays(p.n, p.nbar, p.delta, tau)
    columns = ["tau", "a1", "a2", "re_a3", "im_a3", "a4", "a5", "log_norm"]
    rows = np.column_stack([tau, a1, a2, a3.real, a3.imag, a4, a5, log_norm])
    result = sweeps.SweepResult(
        columns=columns, rows=rows, kinds=columns,
        comments=[f"channel n={p.n} nbar={p.nbar!r} delta={p.delta!r}"],
        quantity="channel",
    )
    _write(result, args.out)
    return 0


def _sweep_spec(args, quantity, **extra):
    return sweeps.SweepSpec(
        protocol=args.protocol, quantity=quantity, n=args.n, nbar=args.nbar,
        delta=args.delta, tau_start=args.tau_start, tau_stop=args.tau_stop,
        tau_count=args.tau_count, theta=args.theta, phi=args.phi, **extra,
    )


def _cmd_teleport(args):
    spec = _sweep_spec(args, "fidelity_closed", construction=args.construction, mode=args.mode)
    _write(sweeps.run_sweep(spec, workers=args.workers), args.out)
    return 0


_ENGINE_ALIASES = {"eq7": "spectral"}


def _cmd_qfi(args):
    spec = _sweep_spec(
        args, "qfi_theta", engine=_ENGINE_ALIASES.get(args.engine, args.engine), derivative=args.derivative,
        normalized=not args.raw,
    )
    _write(sweeps.run_sweep(spec, workers=args.workers), args.out)
    return 0


def _cmd_figure(args):
    ids = sorted(sweeps.PRESETS, key=lambda s: (int(s[3:-1]), s[-1])) if args.id == "all" else [args.id]
    overrides = {}
    if args.tau_count is not None:
        overrides["tau_count"] = args.tau_count
    if args.tau_stop is not None:
        overrides["tau_stop"] = args.tau_stop
    for fid in ids:
        t0 = time.perf_counter()
        _, csv_path, script = sweeps.run_figure(fid, args.out_dir, workers=args.workers, **overrides)
        print(f"{fid}: {csv_path} {script} ({time.perf_counter() - t0:.2f} s)")
    return 0


def _cmd_selftest(args):
    results = selftest.self_test(args.seed)
    print(selftest.format_report(results))
    return 0 if all(c.passed for c in results) else 2


COMMANDS = {
    "channel": _cmd_channel,
    "teleport": _cmd_teleport,
    "qfi": _cmd_qfi,
    "figure": _cmd_figure,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(message)s",
        )
        return COMMANDS[args.command](args)
    except JCError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
