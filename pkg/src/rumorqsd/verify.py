"""Cross-method consistency checks behind ``rumorqsd verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import asymptotics, evolve, paths, redist, solver
from .chain import ChainSpec, Kind, Mode, State, build_chain, build_state_space, total_rate
from .distribution import total_variation
from .reducible import NonTrivial, TrivialPointMass, class_structure, classify_qsd


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name:<34} value={self.value:.6e}  tol={self.tol:.1e}"
        return text + (f"  ({self.note})" if self.note else "")


def _le(name, value, tol, note="") -> Check:
    value = float(value)
    return Check(name, value, tol, bool(value <= tol), note)


def _max_rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    mask = (a > 0) | (b > 0)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(a[mask] - b[mask]) / np.maximum(a[mask], b[mask])))


def run_checks(spec: ChainSpec, reps: int = 20000, seed: int = 0) -> list[Check]:
    """Run every applicable consistency check for the modified chain of ``spec``."""
    mod = build_chain(spec.kind, spec.n, Mode.MODIFIED, spec.beta, spec.mu)
    space = build_state_space(mod)
    n = mod.n
    checks: list[Check] = []

    verdict = classify_qsd(class_structure(space), {mod.initial: 1.0})
    if mod.kind is Kind.SIR:
        expect_nontrivial = mod.mu > mod.beta * n
        ok = isinstance(verdict, NonTrivial) == expect_nontrivial
        checks.append(Check("sir dichotomy (mu > beta N)", float(ok), 1.0, ok, type(verdict).__name__))
    else:
        ok = isinstance(verdict, NonTrivial) and verdict.start == mod.initial
        checks.append(Check("classification nontrivial", float(ok), 1.0, ok, type(verdict).__name__))
    if not isinstance(verdict, NonTrivial):
        checks.append(Check("trivial point mass", 1.0, 1.0, isinstance(verdict, TrivialPointMass), str(tuple(verdict.state))))
        return checks

    dp = solver.qsd_dp(mod, space)
    nu = dp.dist.probs
    checks.append(_le("eigen residual nuQ=-lam nu", solver.eigen_residual(mod, space, dp), 1e-10))
    reach = {s for s, w in zip(space.states, dp.weights) if w}
    lam_min = min(total_rate(mod, s) for s in space.states)
    checks.append(Check("decay rate = min exit rate", float(dp.lam), float(lam_min), dp.lam == lam_min))
    checks.append(Check("positive on reachable set", float(len(reach)), float(len(space)), all(p > 0 or s not in reach for s, p in zip(space.states, nu))))

    if n <= paths.DEFAULT_MAX_N:
        en = solver.qsd_path_enum_all(mod, space)
        checks.append(_le("dp == path enumeration", _max_rel(nu, en.dist.probs), 1e-10))
    else:
        checks.append(Check("dp == path enumeration", 0.0, 1e-10, True, f"skipped: N > {paths.DEFAULT_MAX_N}"))

    w = dp.dist.as_dict()
    top = w[State(n - 1, 2)] / w[State(n, 1)]
    first = float(paths.step_rate(mod, mod.initial, (-1, 1)))
    expected = first / float(total_rate(mod, State(n - 1, 2)) - total_rate(mod, mod.initial))
    checks.append(_le("nu(N-1,2)/nu(N,1)", abs(top / expected - 1.0), 1e-12))

    if mod.kind is Kind.MT:
        exact = solver.qsd_weights_exact(mod, space) if n <= 30 else None
        worst = 0.0
        for x in range(n):
            if exact is not None:
                if exact[State(x, n + 1 - x)] != asymptotics.mt_boundary_rational(n, x):
                    worst = math.inf
            else:
                ref = asymptotics.mt_boundary_exact(n, x)
                worst = max(worst, abs(float(dp.weight(State(x, n + 1 - x)) / ref) - 1.0))
        checks.append(_le("mt boundary closed form", worst, 0.0 if exact is not None else 1e-9, "rational" if exact else ""))
        if n <= 12:
            bad = sum(
                paths.count_paths_mt(n, s.x, s.y) != len(paths.enumerate_paths(mod, space, s))
                for s in space.states
                if s != mod.initial
            )
            checks.append(_le("ballot count == enumeration", bad, 0))
    if mod.kind is Kind.DK:
        exact = solver.qsd_weights_exact(mod, space) if n <= 30 else None
        worst = 0.0
        for x in range(n):
            printed = asymptotics.dk_boundary_exact(n, x)
            if exact is not None:
                if asymptotics.dk_boundary_rational(n, x) != 2 * exact[State(x, n + 1 - x)]:
                    worst = math.inf
            else:
                worst = max(worst, abs(float(printed / dp.weight(State(x, n + 1 - x))) / 2.0 - 1.0))
        checks.append(_le("dk boundary form == 2 x dp weight", worst, 0.0 if exact is not None else 1e-9))
        if n <= 12:
            bad = 0
            for s in space.states:
                if s == mod.initial:
                    continue
                found = {p.length for p in paths.enumerate_paths(mod, space, s)}
                try:
                    formula = paths.dk_path_lengths(n, s.x, s.y)
                except ValueError:
                    formula = set()
                bad += found != formula
            checks.append(_le("dk path lengths == enumeration", bad, 0))

    gap = sorted({float(total_rate(mod, s)) for s in reach})[1] - float(dp.lam)
    worst = max(total_variation(evolve.conditioned_distribution(mod, space, dp.dist, t).probs, nu) for t in (0.1, 1.0, 5.0))
    checks.append(_le("stationarity TV at t=0.1,1,5", worst, 1e-8))
    ts = np.linspace(0.5, 2.0, 7)
    slope = np.polyfit(ts, evolve.log_survival_curve(mod, space, dp.dist, ts), 1)[0]
    checks.append(_le("killing rate slope", abs(-slope / dp.lam - 1.0), 1e-8))
    # the second-smallest rate is shared by O(N) states, so the approach to
    # the limit carries a polynomial prefactor of degree O(N)
    t_lim = (40.0 + 3.0 * n) / gap
    yag = evolve.conditioned_distribution(mod, space, mod.initial, t_lim)
    checks.append(_le("yaglom limit from (N,1)", total_variation(yag.probs, nu), 1e-6, f"t={t_lim:.4g}"))

    t_mc = 1.0 / float(dp.lam)
    mc = evolve.estimate_qsd_mc(mod, space, t_mc, reps, seed)
    un = evolve.conditioned_distribution(mod, space, mod.initial, t_mc)
    surv = float(evolve.survival_probability(mod, space, mod.initial, t_mc))
    checks.append(_le("mc acceptance vs survival (SE)", abs(mc.acceptance - surv) / mc.acceptance_se, 4.0))
    bound = 4.0 * float(mc.se.max()) * math.sqrt(len(space))
    checks.append(_le("mc vs uniformization TV", total_variation(mc.dist.probs, un.probs) / bound, 1.0, f"bound={bound:.3e}"))

    std = build_chain(mod.kind, n, Mode.STANDARD, mod.beta, mod.mu)
    tab = redist.sojourn_table(std, build_state_space(std))
    if isinstance(tab.total, Fraction):
        checks.append(_le("re sums to one (rational)", abs(float(sum(redist.re_exact(tab).values()) - 1)), 0.0))
    else:
        checks.append(_le("re sums to one", abs(redist.re_distribution(tab).probs.sum() - 1.0), 1e-12))
    return checks
