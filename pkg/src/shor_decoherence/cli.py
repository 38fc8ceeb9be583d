"""Command-line front end.

    shor-decoherence spectrum --N 21 --x 5 --q 128 --kernel xi:0.1
    shor-decoherence factor --N 15 --x 7 --seed 1 --max-trials 50
    shor-decoherence budget --alpha 0.04 --max-factorable

Every option can also come from a JSON file (``--config``); flags win. A JSON
result envelope written by a previous run is itself a valid config file.

Exit codes: 0 ok, 1 usage, 2 runtime/resource, 3 factoring exhausted.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .budget import (
    SpinBosonParams,
    TimescaleParams,
    TwoLevelDensity,
    alpha_spin_boson,
    beta_from_visibility,
    budget_report,
    decoherence_time,
    max_factorable,
    spin_boson_bracket,
)
from .errors import DomainError, NotCoprime, ResourceLimit
from .instance import LogBase, Override, Standard, build_instance
from .recovery import estimate_success_rate, factor_number
from .sampler import SeededGenerator, samples_via_dephasing, sample_outcomes
from .spectrum import (
    ConstantBeta,
    Hamming,
    decohered_joint,
    coherent_joint,
    Coherent,
    fit_constant_beta,
    marginal,
    parse_kernel,
    peak_metrics,
)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_EXHAUSTED = 0, 1, 2, 3
COMMANDS = ("spectrum", "sample", "factor", "sweep", "fit-beta", "budget")
DEFAULT_FORMAT = {
    "spectrum": "csv",
    "sample": "csv",
    "factor": "json",
    "sweep": "csv",
    "fit-beta": "json",
    "budget": "json",
}


class UsageError(Exception):
    """One or more invalid config keys; each message names its key."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class RunConfig:
    command: str
    N: int | None = None
    x: int | None = None
    q: int | None = None
    kernel: str = "coherent"
    k: int | None = None
    seed: int = 0
    trials: int = 1000
    max_trials: int = 50
    method: str = "table"
    param: str = "beta"
    grid: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    workers: int = 1
    xi: float | None = None
    alpha: float | None = None
    L: float | None = None
    max_factorable: bool = False
    mu: float | None = None
    eta: float | None = None
    delta: float | None = None
    cutoff: float | None = None
    tau_rel: float | None = None
    lambda_db: float | None = None
    delta_x: float | None = None
    rho: list[float] | None = None
    log_base: str = "e"
    force: bool = False
    timing: bool = False
    output: str | None = None
    format: str | None = None

    def to_dict(self) -> dict:
        """Config echo. The output destination is left out: it does not affect the result."""
        d = dataclasses.asdict(self)
        del d["output"]
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError([message])


def _float_list(text: str) -> list[float]:
    if ":" in text:
        start, stop, num = text.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shor-decoherence", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    S = argparse.SUPPRESS

    def common(p, instance=True):
        p.add_argument("--config", default=None, help="JSON file of option values (flags override it)")
        p.add_argument("--output", "-o", default=S, help="output path (default stdout)")
        p.add_argument("--format", default=S, choices=["csv", "json", "gnuplot"])
        p.add_argument("--timing", action="store_true", default=S, help="record wall time in json output")
        if instance:
            p.add_argument("--N", type=int, default=S)
            p.add_argument("--x", type=int, default=S)
            p.add_argument("--q", type=int, default=S, help="override the Fourier modulus (power of two)")
            p.add_argument("--log-base", dest="log_base", default=S, choices=["e", "2", "10"])
            p.add_argument("--force", action="store_true", default=S, help="lift desk-scale guards")

    p = sub.add_parser("spectrum", help="measurement distribution over c")
    common(p)
    p.add_argument("--kernel", default=S, help="coherent | xi:<float> | beta:<float>")
    p.add_argument("--k", type=int, default=S, help="fix the second-register outcome (default: marginal)")

    p = sub.add_parser("sample", help="draw measurement outcomes")
    common(p)
    p.add_argument("--kernel", default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--trials", type=int, default=S, help="number of outcomes")
    p.add_argument("--method", default=S, choices=["table", "dephasing"])

    p = sub.add_parser("factor", help="run trials until verified factors appear")
    common(p)
    p.add_argument("--kernel", default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--max-trials", dest="max_trials", type=int, default=S)

    p = sub.add_parser("sweep", help="success rate and peak metrics over a beta or xi grid")
    common(p)
    p.add_argument("--param", default=S, choices=["beta", "xi"])
    p.add_argument("--grid", type=_float_list, default=S, help="v1,v2,... or start:stop:num")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--trials", type=int, default=S, help="trials per grid point")
    p.add_argument("--workers", type=int, default=S)

    p = sub.add_parser("fit-beta", help="least-squares constant beta for a Hamming xi")
    common(p)
    p.add_argument("--xi", type=float, default=S)

    p = sub.add_parser("budget", help="decoherence budget calculators")
    common(p, instance=False)
    p.add_argument("--N", type=int, default=S, help="sets L = ln N unless --L is given")
    p.add_argument("--log-base", dest="log_base", default=S, choices=["e", "2", "10"])
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--L", type=float, default=S)
    p.add_argument("--max-factorable", dest="max_factorable", action="store_true", default=S)
    p.add_argument("--mu", type=float, default=S)
    p.add_argument("--eta", type=float, default=S)
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--cutoff", type=float, default=S)
    p.add_argument("--tau-rel", dest="tau_rel", type=float, default=S)
    p.add_argument("--lambda-db", dest="lambda_db", type=float, default=S)
    p.add_argument("--delta-x", dest="delta_x", type=float, default=S)
    p.add_argument("--rho", type=_float_list, default=S, help="rho_uu,rho_dd,Re rho_ud,Im rho_ud")
    return parser


def _load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError([f"config: cannot read {path}: {exc}"]) from None
    if isinstance(data, dict) and "config" in data and "payload" in data:
        data = data["config"]
    if not isinstance(data, dict):
        raise UsageError(["config: top level must be a JSON object"])
    return data


def _check_type(key: str, value: Any) -> str | None:
    if value is None:
        return None
    kind = _FIELDS[key].type
    if kind.startswith("int") and not (isinstance(value, int) and not isinstance(value, bool)):
        return f"{key}: expected an integer, got {value!r}"
    if kind.startswith("float") and (isinstance(value, bool) or not isinstance(value, (int, float))):
        return f"{key}: expected a number, got {value!r}"
    if kind == "bool" and not isinstance(value, bool):
        return f"{key}: expected true/false, got {value!r}"
    if kind.startswith("str") and not isinstance(value, str):
        return f"{key}: expected a string, got {value!r}"
    if kind.startswith("list") and not (isinstance(value, list) and all(isinstance(v, (int, float)) for v in value)):
        return f"{key}: expected a list of numbers, got {value!r}"
    return None


def validate(cfg: RunConfig) -> None:
    problems = [p for p in (_check_type(k, getattr(cfg, k)) for k in _FIELDS) if p]
    if problems:
        raise UsageError(problems)
    if cfg.command not in COMMANDS:
        problems.append(f"command: unknown subcommand {cfg.command!r}")
    try:
        kernel = parse_kernel(cfg.kernel)
    except DomainError as exc:
        problems.append(f"kernel: {exc}")
        kernel = None
    if cfg.command in ("spectrum", "sample", "factor", "sweep", "fit-beta"):
        if cfg.N is None:
            problems.append("N: required")
        if cfg.x is None:
            problems.append("x: required")
    if cfg.N is not None and cfg.N < 3:
        problems.append(f"N: must be >= 3, got {cfg.N}")
    if cfg.x is not None and cfg.N is not None and not 2 <= cfg.x < cfg.N:
        problems.append(f"x: must lie in [2, N), got {cfg.x}")
    if cfg.q is not None and (cfg.q < 2 or cfg.q & (cfg.q - 1)):
        problems.append(f"q: must be a power of two >= 2, got {cfg.q}")
    if cfg.k is not None and cfg.k < 0:
        problems.append(f"k: must be non-negative, got {cfg.k}")
    if cfg.trials < 1:
        problems.append(f"trials: must be >= 1, got {cfg.trials}")
    if cfg.max_trials < 1:
        problems.append(f"max_trials: must be >= 1, got {cfg.max_trials}")
    if cfg.workers < 1:
        problems.append(f"workers: must be >= 1, got {cfg.workers}")
    if cfg.seed < 0:
        problems.append(f"seed: must be non-negative, got {cfg.seed}")
    if cfg.method not in ("table", "dephasing"):
        problems.append(f"method: must be table or dephasing, got {cfg.method!r}")
    if cfg.method == "dephasing" and kernel is not None and not isinstance(kernel, (Hamming, Coherent)):
        problems.append("method: dephasing sampling needs a coherent or xi:<float> kernel")
    if cfg.param not in ("beta", "xi"):
        problems.append(f"param: must be beta or xi, got {cfg.param!r}")
    elif cfg.param == "beta" and any(not 0 <= v <= 1 for v in cfg.grid):
        problems.append("grid: beta values must lie in [0, 1]")
    elif cfg.param == "xi" and any(v < 0 for v in cfg.grid):
        problems.append("grid: xi values must be non-negative")
    if not cfg.grid:
        problems.append("grid: empty")
    if cfg.command == "fit-beta" and (cfg.xi is None or cfg.xi < 0):
        problems.append("xi: required and non-negative")
    if cfg.log_base not in ("e", "2", "10"):
        problems.append(f"log_base: must be e, 2 or 10, got {cfg.log_base!r}")
    if cfg.format is not None and cfg.format not in ("csv", "json", "gnuplot"):
        problems.append(f"format: must be csv, json or gnuplot, got {cfg.format!r}")
    fmt = cfg.format or DEFAULT_FORMAT.get(cfg.command, "json")
    if cfg.command in ("factor", "fit-beta", "budget") and fmt != "json":
        problems.append(f"format: {cfg.command} only writes json")
    if cfg.rho is not None and len(cfg.rho) != 4:
        problems.append("rho: expected four numbers rho_uu,rho_dd,Re rho_ud,Im rho_ud")
    if problems:
        raise UsageError(problems)


def parse_config(argv: list[str]) -> RunConfig:
    """Parse argv (and an optional --config file) into a validated RunConfig."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    path = args.pop("config", None)
    values: dict[str, Any] = {}
    if path:
        values = _load_file(path)
        unknown = sorted(set(values) - set(_FIELDS))
        if unknown:
            raise UsageError([f"{key}: unknown key" for key in unknown])
        if values.get("command", command) != command:
            raise UsageError([f"command: config file is for {values['command']!r}, not {command!r}"])
    values.update(args)
    values["command"] = command
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


# --------------------------------------------------------------------------
# emission
# --------------------------------------------------------------------------


def fmt_float(value: float) -> str:
    """17 significant digits: every float64 round-trips."""
    return format(float(value), ".17g")


def dump_envelope(envelope: dict) -> str:
    return json.dumps(envelope, indent=2) + "\n"


def load_envelope(text: str) -> dict:
    return json.loads(text)


def _envelope(cfg: RunConfig, payload: Any, elapsed: float | None) -> dict:
    env = {"config": cfg.to_dict(), "version": __version__, "payload": payload}
    if cfg.timing and elapsed is not None:
        env["timing"] = {"seconds": elapsed}
    return env


def _table(header: list[str], rows, cfg: RunConfig, fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "gnuplot":
        buf.write(f"# shor-decoherence {__version__}\n")
        buf.write(f"# config: {json.dumps(cfg.to_dict(), sort_keys=True)}\n")
        buf.write("# set datafile separator ','\n")
        buf.write("# plot 'FILE' using 1:2 with impulses notitle\n")
        buf.write("# " + ",".join(header) + "\n")
    else:
        buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else str(v) for v in row) + "\n")
    return buf.getvalue()


def emit_spectrum(values: np.ndarray, cfg: RunConfig, fmt: str, payload: dict | None = None, elapsed=None) -> str:
    if fmt == "json":
        return dump_envelope(_envelope(cfg, payload, elapsed))
    rows = ((c, fmt_float(p)) for c, p in enumerate(values))
    return _table(["c", "p"], rows, cfg, fmt)


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _instance(cfg: RunConfig):
    policy = Override(cfg.q) if cfg.q is not None else Standard()
    return build_instance(cfg.N, cfg.x, policy, log_base=LogBase(cfg.log_base), force=cfg.force)


def _run_spectrum(cfg: RunConfig, fmt: str) -> tuple[str, int]:
    inst = _instance(cfg)
    kernel = parse_kernel(cfg.kernel)
    t0 = time.perf_counter()
    if cfg.k is None:
        spec = marginal(inst, kernel, force=cfg.force)
    elif isinstance(kernel, Coherent):
        spec = coherent_joint(inst, cfg.k)
    else:
        spec = decohered_joint(inst, cfg.k, kernel, force=cfg.force)
    elapsed = time.perf_counter() - t0
    payload = {
        "kind": "spectrum",
        "q": inst.q,
        "r": inst.r,
        "k": spec.k,
        "kernel": str(kernel),
        "values": [float(v) for v in spec.values],
    }
    return emit_spectrum(spec.values, cfg, fmt, payload, elapsed), EXIT_OK


def _run_sample(cfg: RunConfig, fmt: str) -> tuple[str, int]:
    inst = _instance(cfg)
    kernel = parse_kernel(cfg.kernel)
    gen = SeededGenerator(cfg.seed)
    if cfg.method == "dephasing":
        xi = kernel.xi if isinstance(kernel, Hamming) else 0.0
        ks, cs = samples_via_dephasing(inst, xi, gen, cfg.trials)
    else:
        ks, cs = sample_outcomes(inst, kernel, gen, cfg.trials)
    if fmt == "json":
        payload = {"kind": "samples", "k": ks.tolist(), "c": cs.tolist()}
        return dump_envelope(_envelope(cfg, payload, None)), EXIT_OK
    return _table(["k", "c"], zip(ks.tolist(), cs.tolist()), cfg, fmt), EXIT_OK


def _run_factor(cfg: RunConfig, fmt: str) -> tuple[str, int]:
    inst = _instance(cfg)
    kernel = parse_kernel(cfg.kernel)
    t0 = time.perf_counter()
    report = factor_number(inst, kernel, cfg.max_trials, SeededGenerator(cfg.seed))
    elapsed = time.perf_counter() - t0
    payload = {"kind": "factor", **report.to_dict()}
    code = EXIT_EXHAUSTED if report.exhausted else EXIT_OK
    if report.exhausted:
        print(f"exhausted: {report.diagnostic}", file=sys.stderr)
    return dump_envelope(_envelope(cfg, payload, elapsed)), code


def sweep_point(cfg_dict: dict, index: int, value: float) -> tuple[float, float, float, float]:
    """One row of a sweep; a top-level function so worker processes can run it."""
    cfg = RunConfig(**cfg_dict)
    inst = _instance(cfg)
    kernel = ConstantBeta(value) if cfg.param == "beta" else Hamming(value)
    est = estimate_success_rate(inst, kernel, cfg.trials, SeededGenerator(cfg.seed, index))
    metrics = peak_metrics(marginal(inst, kernel, force=cfg.force), inst)
    return value, est.rate, metrics.on_peak_mass, metrics.floor_to_peak_ratio


def sweep_rows(cfg: RunConfig) -> list[tuple[float, float, float, float]]:
    grid = sorted(set(float(v) for v in cfg.grid))
    _instance(cfg)  # fail fast on a bad instance before spawning workers
    d = dataclasses.asdict(cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            return list(pool.map(sweep_point, [d] * len(grid), range(len(grid)), grid))
    return [sweep_point(d, i, v) for i, v in enumerate(grid)]


def _run_sweep(cfg: RunConfig, fmt: str) -> tuple[str, int]:
    rows = sweep_rows(cfg)
    header = ["param", "success_rate", "on_peak_mass", "floor_to_peak"]
    if fmt == "json":
        payload = {"kind": "sweep", "param": cfg.param, "columns": header, "rows": [list(r) for r in rows]}
        return dump_envelope(_envelope(cfg, payload, None)), EXIT_OK
    text_rows = ([fmt_float(v) for v in row] for row in rows)
    return _table(header, text_rows, cfg, fmt), EXIT_OK


def _run_fit(cfg: RunConfig, fmt: str) -> tuple[str, int]:
    inst = _instance(cfg)
    t0 = time.perf_counter()
    beta = fit_constant_beta(inst, cfg.xi, force=cfg.force)
    payload = {"kind": "fit-beta", "xi": cfg.xi, "beta": beta, "objective": "least squares over marginal spectrum"}
    return dump_envelope(_envelope(cfg, payload, time.perf_counter() - t0)), EXIT_OK


def _run_budget(cfg: RunConfig, fmt: str) -> tuple[str, int]:
    out: dict[str, Any] = {"kind": "budget", "label": "order-of-magnitude estimate"}
    L = cfg.L
    if L is None and cfg.N is not None:
        L = LogBase(cfg.log_base).log(cfg.N)
    alpha = cfg.alpha
    if None not in (cfg.mu, cfg.eta, cfg.delta, cfg.cutoff):
        params = SpinBosonParams(cfg.mu, cfg.eta, cfg.delta, cfg.cutoff)
        a = alpha_spin_boson(params)
        out["spin_boson"] = {
            "alpha": a,
            "bracket": spin_boson_bracket(params),
            "note": "bracket is negative for delta < cutoff; alpha uses its magnitude",
            "ln_n_max_direct": max_factorable(params).ln_n_max,
        }
        if alpha is None:
            alpha = a
    if alpha is not None and L is not None:
        out["report"] = budget_report(alpha, L).to_dict()
    if cfg.max_factorable:
        if alpha is None:
            raise DomainError("max_factorable needs --alpha or spin-boson parameters")
        mf = max_factorable(alpha)
        out["max_factorable"] = {"alpha": alpha, "ln_n_max": mf.ln_n_max, "n_max": mf.n_max}
    if None not in (cfg.tau_rel, cfg.lambda_db, cfg.delta_x):
        out["decoherence_time"] = decoherence_time(TimescaleParams(cfg.tau_rel, cfg.lambda_db, cfg.delta_x))
    if cfg.rho is not None:
        uu, dd, re, im = cfg.rho
        out["visibility_beta"] = beta_from_visibility(TwoLevelDensity(uu, dd, complex(re, im)))
    if len(out) == 2:
        raise UsageError(["budget: nothing to compute; give --alpha with --L/--N, --max-factorable, "
                          "spin-boson, timescale or --rho parameters"])
    return dump_envelope(_envelope(cfg, out, None)), EXIT_OK


_RUNNERS = {
    "spectrum": _run_spectrum,
    "sample": _run_sample,
    "factor": _run_factor,
    "sweep": _run_sweep,
    "fit-beta": _run_fit,
    "budget": _run_budget,
}


def dispatch(cfg: RunConfig) -> int:
    fmt = cfg.format or DEFAULT_FORMAT[cfg.command]
    try:
        text, code = _RUNNERS[cfg.command](cfg, fmt)
    except UsageError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    except NotCoprime as exc:
        print(f"error: x: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"error: resource: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (DomainError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        _write(text, cfg.output)
    except OSError as exc:
        print(f"error: output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
