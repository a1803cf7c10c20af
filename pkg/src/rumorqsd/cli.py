"""Command line front end.

Subcommands ``solve``, ``redist``, ``verify`` and ``curve`` write plot-ready
CSV (or a text report) to ``--output`` or stdout. Exit codes: 0 success,
1 failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import asymptotics, evolve, redist, solver
from .chain import Kind, Mode, ParameterError, build_chain, build_state_space
from .paths import PathLimitError
from .reducible import ClassificationError
from .verify import run_checks

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
METHODS = ("dp", "enum", "mc", "evolve")


@dataclass
class RunConfig:
    model: str = "mt"
    n: int = 5
    mode: str | None = None
    beta: float | None = None
    mu: float | None = None
    method: str = "dp"
    t: float | None = None
    reps: int = 20000
    seed: int = 0
    threshold: float = 0.0
    output: str | None = None

    def validate(self, command: str) -> None:
        if self.model == "sir":
            if self.beta is None or self.mu is None:
                raise ParameterError("--beta and --mu are required for --model sir")
        elif self.beta is not None or self.mu is not None:
            raise ParameterError("--beta/--mu only apply to --model sir")
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method}")
        if self.method in ("mc", "evolve") and self.t is not None and self.t < 0:
            raise ParameterError("--t must be nonnegative")
        if self.reps < 1:
            raise ParameterError("--reps must be positive")
        if self.threshold < 0:
            raise ParameterError("--threshold must be nonnegative")

    def chain(self, default_mode: str):
        return build_chain(self.model, self.n, self.mode or default_mode, self.beta, self.mu)


def fmt(v: float) -> str:
    return "%.17g" % v


def _write(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(output))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, output)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(meta: list[tuple[str, object]], header: str, rows) -> str:
    lines = [f"# {k}={v}" for k, v in meta]
    lines.append(header)
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def _dist_rows(states, probs, log10s, threshold: float):
    log_thr = math.log10(threshold) if threshold > 0 else -math.inf
    order = sorted(range(len(states)), key=lambda i: (states[i].x, states[i].y))
    for i in order:
        lg = float(log10s[i])
        if lg == -math.inf or lg < log_thr:
            continue
        s = states[i]
        yield f"{s.x},{s.y},{fmt(float(probs[i]))},{fmt(lg)}"


def _model_meta(cfg: RunConfig, spec) -> list[tuple[str, object]]:
    meta = [("model", spec.kind.value), ("n", spec.n), ("mode", spec.mode.value)]
    if spec.kind is Kind.SIR:
        meta += [("beta", fmt(float(spec.beta))), ("mu", fmt(float(spec.mu)))]
    return meta


def _default_t(res: solver.QsdResult, space, method: str) -> float:
    rates = sorted(set(space.rates().tolist()))
    gap = rates[1] - res.lam if len(rates) > 1 else res.lam
    return 3.0 / gap if method == "mc" else (40.0 + 3.0 * space.spec.n) / gap


def cmd_solve(cfg: RunConfig) -> int:
    spec = cfg.chain(Mode.MODIFIED.value)
    space = build_state_space(spec)
    meta = _model_meta(cfg, spec)
    base = solver.solve_qsd(spec, space, "enum" if cfg.method == "enum" else "dp")
    method = base.method
    if cfg.method in ("dp", "enum"):
        probs, logs = base.dist.probs, base.dist.log10_probs()
        log_c = base.normalizer.log10()
    else:
        t = cfg.t if cfg.t is not None else _default_t(base, space, cfg.method)
        meta.append(("t", fmt(t)))
        if cfg.method == "mc":
            est = evolve.estimate_qsd_mc(spec, space, t, cfg.reps, cfg.seed)
            probs = est.dist.probs
            meta += [("reps", cfg.reps), ("seed", cfg.seed), ("acceptance", fmt(est.acceptance))]
        else:
            probs = evolve.conditioned_distribution(spec, space, spec.initial, t).probs
        with np.errstate(divide="ignore"):
            logs = np.log10(probs)
        log_c = base.normalizer.log10()
        method = cfg.method
    meta += [("lambda", fmt(base.lam)), ("log10_C", fmt(log_c)), ("method", method)]
    if base.warning:
        meta.append(("warning", base.warning))
    rows = _dist_rows(space.states, probs, logs, cfg.threshold)
    _write(_csv(meta, "x,y,prob,log10prob", rows), cfg.output)
    return EXIT_OK


def cmd_redist(cfg: RunConfig) -> int:
    spec = cfg.chain(Mode.STANDARD.value)
    space = build_state_space(spec)
    table = redist.sojourn_table(spec, space)
    dist = redist.re_distribution(table)
    meta = _model_meta(cfg, spec)
    meta += [
        ("E_T", fmt(float(table.total))),
        ("svensson", fmt(redist.svensson_mean_time(spec.n))),
        ("arithmetic", "rational" if isinstance(table.total, Fraction) else "float"),
        ("method", "re"),
    ]
    if isinstance(table.total, Fraction):
        meta.append(("E_T_exact", str(table.total)))
    rows = _dist_rows(space.states, dist.probs, dist.log10_probs(), cfg.threshold)
    _write(_csv(meta, "x,y,prob,log10prob", rows), cfg.output)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    spec = cfg.chain(Mode.MODIFIED.value)
    checks = run_checks(spec, reps=cfg.reps, seed=cfg.seed)
    head = [f"verify model={spec.kind.value} n={spec.n}"]
    if spec.kind is Kind.SIR:
        head[0] += f" beta={fmt(float(spec.beta))} mu={fmt(float(spec.mu))}"
    failed = sum(not c.passed for c in checks)
    lines = head + [c.line() for c in checks]
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    _write("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_curve(n: int, samples: int = 512, raw: bool = False, output: str | None = None) -> int:
    if n < 2:
        raise ParameterError("--n must be >= 2")
    if samples < 2:
        raise ParameterError("--samples must be >= 2")
    root = asymptotics.final_proportion()
    rows = []
    for xbar in np.linspace(root, 1.0, samples):
        f = asymptotics.deterministic_curve(float(xbar))
        if raw:
            rows.append(f"{fmt(float(xbar))},{fmt(f)}")
        else:
            rows.append(f"{fmt((n + 1) * float(xbar))},{fmt((n + 1) * f)}")
    meta = [("n", n), ("scale", "raw" if raw else "n+1"), ("final_proportion", fmt(root))]
    _write(_csv(meta, "x,y", rows), output)
    return EXIT_OK


def _add_model_args(p: argparse.ArgumentParser, mode_default: str) -> None:
    p.add_argument("--model", choices=[k.value for k in Kind], default="mt")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None, help=f"default: {mode_default}")
    p.add_argument("--beta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--threshold", type=float, default=0.0, help="omit states with smaller mass")
    p.add_argument("--output", "-o", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rumorqsd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="quasi-stationary distribution as CSV")
    _add_model_args(p, "modified")
    p.add_argument("--method", choices=METHODS, default="dp")
    p.add_argument("--t", type=float, default=None, help="time horizon for mc/evolve")
    p.add_argument("--reps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("redist", help="ratio-of-expectations distribution as CSV")
    _add_model_args(p, "standard")

    p = sub.add_parser("verify", help="cross-method consistency report")
    p.add_argument("--model", choices=[k.value for k in Kind], default="mt")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--reps", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("curve", help="deterministic MT curve as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--raw", action="store_true", help="emit (xbar, f) without rescaling")
    p.add_argument("--output", "-o", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "curve":
            return cmd_curve(args.n, args.samples, args.raw, args.output)
        cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__})
        cfg.validate(args.command)
        return {"solve": cmd_solve, "redist": cmd_redist, "verify": cmd_verify}[args.command](cfg)
    except (ParameterError, PathLimitError) as exc:
        print(f"rumorqsd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ClassificationError as exc:
        print(f"rumorqsd: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
