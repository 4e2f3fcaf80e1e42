"""Command-line front end: ``frlab <command> [options]``.

Every option can also be given in a flat ``key = value`` config file passed
with ``--config``; explicit flags win over the file, the file wins over the
built-in defaults.  Vector options are comma pairs (``--p 2,2``, ``inf`` for an
infinite exponent) and points are comma lists of complex coordinates
(``--z 0.5,1+2.25j`` for n = 2).

Exit codes: 0 when every check passes, 1 when a verification fails (the report
is still written), 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys

from . import __version__
from .closed_forms import is_divergent
from .criteria import BOUNDED, check_bounded, sum_condition
from .experiments import (KernelFamily, scaling_scan, scan_mc_check, unboundedness_witness,
                          verify_distance_bound, verify_duality, verify_identity, verify_reproducing)
from .geometry import SiegelPoint, in_domain
from .mixed_norm import mixed_norm_separable, test_function
from .operators import apply_S, apply_T
from .params import FRParams, Setting
from .report import emit_report
from .sampler import ConfigurationError, calibrate
from .schur import CertificateError, build_certificate, verify_certificate_algebra, verify_certificate_integrals

REQUIRED = object()
SEED_ENV = "FRLAB_SEED"
# options that never change the numbers and are left out of the emitted config
NOT_RECORDED = {"config", "output", "workers", "format"}


class UsageError(Exception):
    pass


# -- value parsers ---------------------------------------------------------------------

def _float(text: str) -> float:
    return float(text)


def floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def pair(text: str) -> tuple[float, float]:
    v = floats(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError(f"expected a comma pair, got {text!r}")
    return v


def quad(text: str) -> tuple[float, float, float, float]:
    v = floats(text)
    if len(v) != 4:
        raise argparse.ArgumentTypeError(f"expected s,t,theta,delta, got {text!r}")
    return v


def point(text: str) -> tuple[complex, ...]:
    try:
        return tuple(complex(x.strip().replace(" ", "")) for x in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated complex numbers, got {text!r}") from None


def flag(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# -- parser ------------------------------------------------------------------------------

class Options:
    """Registry of a subcommand's options: converter and default per destination."""

    def __init__(self, parser: argparse.ArgumentParser):
        self.parser = parser
        self.specs: dict[str, tuple] = {}

    def add(self, name: str, conv, default=REQUIRED, help: str = "", choices=None):
        dest = name.lstrip("-").replace("-", "_")
        self.parser.add_argument(name, dest=dest, type=conv, default=None, help=help,
                                 choices=choices)
        self.specs[dest] = (conv, default, choices)


def _common(opts: Options, budget: int = 10**6):
    opts.add("--seed", int, None, "random seed (default: $FRLAB_SEED or 0)")
    opts.add("--budget", int, budget, "Monte-Carlo samples per integral")
    opts.add("--format", str, "json", "report format", choices=("json", "csv"))
    opts.add("--workers", int, 1, "worker threads (results do not depend on it)")
    opts.add("--output", str, None, "write the report to this file instead of stdout")
    # --config is parsed by the top-level pre-pass; registered here for --help only
    opts.parser.add_argument("--config", dest="config", default=None, help="flat key = value config file")


def _setting_opts(opts: Options):
    opts.add("--n", int, REQUIRED, "complex dimension")
    opts.add("--p", pair, REQUIRED, "source exponents, e.g. 2,2 or inf,2")
    opts.add("--q", pair, REQUIRED, "target exponents")
    opts.add("--alpha", pair, REQUIRED, "source weights")
    opts.add("--beta", pair, REQUIRED, "target weights")


def _param_opts(opts: Options):
    opts.add("--a", pair, REQUIRED)
    opts.add("--b", pair, REQUIRED)
    opts.add("--c", pair, REQUIRED)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, Options]]:
    parser = argparse.ArgumentParser(prog="frlab", description="Forelli-Rudin operator laboratory")
    parser.add_argument("--version", action="version", version=f"frlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    registry = {}

    def command(name, help, budget=10**6):
        p = sub.add_parser(name, help=help, description=help)
        opts = Options(p)
        _common(opts, budget)
        registry[name] = opts
        return opts

    o = command("check", "boundedness verdict for a setting and parameters")
    _setting_opts(o)
    _param_opts(o)

    o = command("identity", "Monte-Carlo check of the key or two-kernel integral identity")
    o.add("--kind", str, "key", choices=("key", "pair"))
    o.add("--n", int, REQUIRED)

    o = command("calibrate", "sampler calibration against exact key integrals")
    o.add("--n", int, REQUIRED)

    o = command("norm", "mixed norm of the test function f_{theta,delta}")
    o.add("--n", int, REQUIRED)
    o.add("--p", pair, REQUIRED)
    o.add("--alpha", pair, REQUIRED)
    o.add("--s", _float, REQUIRED)
    o.add("--t", _float, REQUIRED)
    o.add("--theta", _float, 1.0)
    o.add("--delta", _float, 1.0)
    o.add("--method", str, "closed", choices=("closed", "mc"))

    o = command("apply", "T or S applied to f_{theta,delta} at a point pair")
    o.add("--op", str, "T", choices=("T", "S"))
    o.add("--n", int, REQUIRED)
    _param_opts(o)
    o.add("--s", _float, REQUIRED)
    o.add("--t", _float, REQUIRED)
    o.add("--theta", _float, 1.0)
    o.add("--delta", _float, 1.0)
    o.add("--z", point, None, "first point (default: height-1 point)")
    o.add("--w", point, None, "second point (default: height-1 point)")
    o.add("--engine", str, "closed", choices=("closed", "mc", "both"))

    o = command("scan", "test-function scaling scan")
    _setting_opts(o)
    _param_opts(o)
    o.add("--s", _float, None, "test-function s (default: chosen automatically)")
    o.add("--t", _float, None)
    o.add("--mc-check", flag, False, "also cross-check three grid points by Monte Carlo")

    o = command("schur", "build and verify a Schur certificate")
    _setting_opts(o)
    _param_opts(o)
    o.add("--points", int, 20, "sample points for the integral check")

    o = command("duality", "<T f, g>_beta against <f, T* g>_alpha")
    _setting_opts(o)
    _param_opts(o)
    o.add("--f", quad, REQUIRED, "f as s,t,theta,delta")
    o.add("--g", quad, REQUIRED, "g as s,t,theta,delta")

    o = command("reproduce", "weighted reproducing formula on the kernel family")
    o.add("--n", int, REQUIRED)
    o.add("--gamma", pair, (0.0, 0.0))
    o.add("--s", pair, (2.0, 3.0))
    o.add("--theta", _float, 1.0)
    o.add("--delta", _float, 2.0)
    o.add("--z", point, None)
    o.add("--w", point, None)

    o = command("distance", "fitted constant in delta_U <= C (1 + R^eps)")
    o.add("--n", int, REQUIRED)
    o.add("--eps", floats, (0.1, 0.5))
    o.add("--pairs", int, 10**5)

    return parser, registry


# -- config resolution ------------------------------------------------------------------

def read_config(path: str) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[frlab]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path!r}: {exc}") from None
    return {k.strip().lstrip("-").replace("-", "_"): v.strip() for k, v in cp["frlab"].items()}


def resolve(ns: argparse.Namespace, opts: Options, config: dict[str, str]) -> dict:
    unknown = sorted(set(config) - set(opts.specs) - {"command"})
    if unknown:
        raise UsageError(f"unknown config keys for {ns.command}: {', '.join(unknown)}")
    if "command" in config and config["command"] != ns.command:
        raise UsageError(f"config is for command {config['command']!r}, not {ns.command!r}")
    out = {}
    for dest, (conv, default, choices) in opts.specs.items():
        value = getattr(ns, dest)
        if value is None and dest in config:
            try:
                value = conv(config[dest])
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {dest}: {exc}") from None
            if choices is not None and value not in choices:
                raise UsageError(f"config key {dest}: {value!r} not in {choices}")
        if value is None:
            if default is REQUIRED:
                raise UsageError(f"missing required option --{dest.replace('_', '-')}")
            value = _default_seed() if dest == "seed" else default
        out[dest] = value
    if out["budget"] < 1:
        raise UsageError("--budget must be at least 1")
    if out["workers"] < 1:
        raise UsageError("--workers must be at least 1")
    return out


# -- commands -----------------------------------------------------------------------------

def _setting(cfg) -> Setting:
    return Setting(cfg["n"], cfg["p"], cfg["q"], cfg["alpha"], cfg["beta"])


def _params(cfg) -> FRParams:
    return FRParams(cfg["a"], cfg["b"], cfg["c"])


def _point(coords, n: int, height: float) -> SiegelPoint:
    if coords is None:
        return SiegelPoint.at_height(height, n)
    if len(coords) != n:
        raise UsageError(f"a point in dimension {n} needs {n} coordinates, got {len(coords)}")
    z = SiegelPoint.of(coords[:-1], coords[-1])
    if not in_domain(z):
        raise UsageError(f"point {list(coords)} is not in the domain")
    return z


def cmd_check(cfg):
    setting, params = _setting(cfg), _params(cfg)
    verdict = check_bounded(setting, params)
    result = {"verdict": verdict}
    if verdict.case_tag is not None and setting.finite():
        result["sum_condition"] = sum_condition(setting, params)
    witness = unboundedness_witness(setting, params) if setting.finite() else None
    if witness is not None:
        result["witness"] = witness
    rows = [c.to_dict() for c in verdict.conditions]
    return result, verdict.outcome == BOUNDED, rows


def cmd_identity(cfg):
    rep = verify_identity(cfg["kind"], cfg["n"], budget=cfg["budget"], seed=cfg["seed"],
                          workers=cfg["workers"])
    return rep, rep.passed, [r.to_dict() for r in rep.rows]


def cmd_calibrate(cfg):
    rep = calibrate(cfg["n"], budget=cfg["budget"], seed=cfg["seed"], workers=cfg["workers"])
    rows = [{"s": e.s, "t": e.t, "z": e.z.to_list(), "mc": e.estimate.value, "stderr": e.estimate.stderr,
             "exact": e.exact, "zscore": e.zscore, "rel_err": e.rel_err, "pass": e.passed}
            for e in rep.entries]
    return {"n": rep.n, "pass": rep.passed, "rows": rows}, rep.passed, rows


def cmd_norm(cfg):
    f = test_function(cfg["s"], cfg["t"], cfg["theta"], cfg["delta"])
    n, p, alpha = cfg["n"], cfg["p"], cfg["alpha"]
    for x in alpha:
        if not x > -1:
            raise UsageError("weights must exceed -1")
    closed = mixed_norm_separable(f, n, p, alpha)
    result = {"closed": closed}
    ok = True
    if cfg["method"] == "mc":
        est = mixed_norm_separable(f, n, p, alpha, "mc", cfg["budget"], cfg["seed"], workers=cfg["workers"])
        result["mc"] = {"value": est.real, "stderr": est.stderr}
        if is_divergent(closed):
            ok = False
        elif not any(math.isinf(x) for x in p):
            z = est.zscore(closed)
            rel = est.rel_err(closed)
            result["mc"].update(zscore=z, rel_err=rel)
            ok = z <= 3.0 and rel <= 0.02
        else:
            # the sup part is a lower bound
            ok = est.real <= closed * (1 + 1e-9)
    elif is_divergent(closed):
        ok = False
    return result, ok, [{"method": "closed", "value": closed}]


def cmd_apply(cfg):
    n = cfg["n"]
    params = _params(cfg)
    f = test_function(cfg["s"], cfg["t"], cfg["theta"], cfg["delta"])
    z, w = _point(cfg["z"], n, 1.0), _point(cfg["w"], n, 1.0)
    op = apply_T if cfg["op"] == "T" else apply_S
    engines = ("closed", "mc") if cfg["engine"] == "both" else (cfg["engine"],)
    result, ok = {"z": z.to_list(), "w": w.to_list()}, True
    for engine in engines:
        try:
            v = op(params, f, z, w, engine, cfg["budget"], cfg["seed"], workers=cfg["workers"])
        except TypeError as exc:
            raise UsageError(str(exc)) from None
        if engine == "mc":
            result["mc"] = {"value": v.value, "stderr": v.stderr}
        else:
            result["closed"] = v
            ok = ok and not is_divergent(v)
    if len(engines) == 2 and ok:
        mc = result["mc"]
        diff = abs(mc["value"] - result["closed"])
        zs = diff / mc["stderr"] if mc["stderr"] > 0 else (0.0 if diff == 0 else math.inf)
        result["zscore"] = zs
        ok = zs <= 3.0
    return result, ok, [{k: v for k, v in result.items() if k in ("closed", "zscore")}]


def cmd_scan(cfg):
    setting, params = _setting(cfg), _params(cfg)
    if not setting.finite():
        raise UsageError("scan needs finite exponents")
    st = None
    if cfg["s"] is not None or cfg["t"] is not None:
        if cfg["s"] is None or cfg["t"] is None:
            raise UsageError("give both --s and --t or neither")
        st = (cfg["s"], cfg["t"])
    res = scaling_scan(setting, params, st)
    out = res.to_dict()
    ok = res.ok and res.max_slope_error() <= 1e-9
    out["max_slope_error"] = res.max_slope_error() if res.ok else None
    if cfg["mc_check"] and res.ok:
        mc = scan_mc_check(setting, params, (res.s, res.t), budget=cfg["budget"], seed=cfg["seed"],
                           workers=cfg["workers"])
        out["mc_check"] = mc
        ok = ok and mc.passed
    out["pass"] = ok
    return out, ok, out["rows"]


def cmd_schur(cfg):
    setting, params = _setting(cfg), _params(cfg)
    try:
        cert = build_certificate(setting, params)
    except CertificateError as exc:
        return {"error": str(exc)}, False, []
    alg = verify_certificate_algebra(cert, setting, params)
    ints = verify_certificate_integrals(cert, setting, params, cfg["points"], seed=cfg["seed"])
    rows = [{"report": rep.kind, **c.to_dict()} for rep in (alg, ints) for c in rep.checks]
    return {"certificate": cert, "algebra": alg, "integrals": ints}, alg.passed and ints.passed, rows


def cmd_duality(cfg):
    setting, params = _setting(cfg), _params(cfg)
    rep = verify_duality(setting, params, KernelFamily(*cfg["f"]), KernelFamily(*cfg["g"]),
                         cfg["budget"], cfg["seed"], workers=cfg["workers"])
    return rep, rep.passed, [rep.to_dict()]


def cmd_reproduce(cfg):
    n = cfg["n"]
    for g in cfg["gamma"]:
        if not g > -1:
            raise UsageError("gamma must exceed -1")
    z, w = _point(cfg["z"], n, 1.0), _point(cfg["w"], n, 1.0)
    s1, s2 = cfg["s"]
    rep = verify_reproducing(n, cfg["gamma"], (s1, s2, cfg["theta"], cfg["delta"]), z, w)
    return rep, rep.passed, [rep.to_dict()]


def cmd_distance(cfg):
    rep = verify_distance_bound(cfg["n"], cfg["eps"], cfg["pairs"], cfg["seed"])
    return rep, rep.passed, rep.rows


COMMANDS = {
    "check": cmd_check, "identity": cmd_identity, "calibrate": cmd_calibrate, "norm": cmd_norm,
    "apply": cmd_apply, "scan": cmd_scan, "schur": cmd_schur, "duality": cmd_duality,
    "reproduce": cmd_reproduce, "distance": cmd_distance,
}


def _recorded(cfg: dict) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items() if k not in NOT_RECORDED}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = read_config(ns.config) if ns.config else {}
        cfg = resolve(ns, registry[ns.command], config)
        result, ok, rows = COMMANDS[ns.command](cfg)
    except (UsageError, ConfigurationError, ValueError) as exc:
        registry[ns.command].parser.print_usage(sys.stderr)
        print(f"frlab {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    report = {"command": ns.command, "config": _recorded(cfg), "seed": cfg["seed"],
              "budget": cfg["budget"], "version": __version__, "result": result, "pass": ok}
    data = emit_report(report, cfg["format"], rows)
    if cfg["output"]:
        with open(cfg["output"], "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
