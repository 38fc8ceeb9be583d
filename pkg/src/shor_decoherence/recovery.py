"""Classical post-processing: reading r off a measured c and turning it into factors."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .instance import ProblemInstance
from .numtheory import convergents, factors_from_order
from .sampler import SeededGenerator, outcome_table
from .spectrum import Kernel


def candidate_denominators(c: int, instance: ProblemInstance) -> list[int]:
    """Distinct convergent denominators d <= N of c/q that lie within 1/(2q) of c/q.

    The closeness filter is the usual continued-fraction guarantee: when c is
    within 1/2 of lambda*q/r, lambda/r (reduced) is one of these convergents.
    """
    q, n = instance.q, instance.N
    target = Fraction(c, q)
    out: list[int] = []
    for conv in convergents(c, q):
        d = conv.denominator
        if d > n:
            break
        if abs(target - conv) * 2 * q <= 1 and d not in out:
            out.append(d)
    return out


def recover_period(c: int, instance: ProblemInstance) -> int | None:
    """Smallest verified period candidate from a measurement c, or None.

    Each candidate denominator is tested directly first; then, in the same
    order, its multiples t*d <= N. The convergent denominator is r / gcd(lambda, r),
    so the multiple search restores r when lambda and r share a factor.
    """
    if not 0 <= c < instance.q:
        raise ValueError(f"c must lie in [0, q={instance.q}), got {c}")
    if c == 0:
        return None
    x, n = instance.x, instance.N
    dens = candidate_denominators(c, instance)
    for d in dens:
        if pow(x, d, n) == 1:
            return d
    for d in dens:
        for multiple in range(2 * d, n + 1, d):
            if pow(x, multiple, n) == 1:
                return multiple
    return None


@dataclass(frozen=True)
class TrialRecord:
    master_seed: int
    stream: tuple[int, ...]
    k: int
    c: int
    candidates: tuple[int, ...]
    recovered: int | None
    factors: tuple[int, int] | None

    @property
    def success(self) -> bool:
        return self.factors is not None

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "stream": list(self.stream),
            "k": self.k,
            "c": self.c,
            "candidates": list(self.candidates),
            "recovered": self.recovered,
            "factors": list(self.factors) if self.factors else None,
            "success": self.success,
        }


def trial_from_outcome(instance: ProblemInstance, k: int, c: int, gen: SeededGenerator) -> TrialRecord:
    r_hat = recover_period(c, instance)
    found = factors_from_order(instance.x, instance.N, r_hat) if r_hat is not None else None
    return TrialRecord(
        master_seed=gen.master_seed,
        stream=(gen.stream_index, *gen.path),
        k=k,
        c=c,
        candidates=tuple(candidate_denominators(c, instance)) if c else (),
        recovered=r_hat,
        factors=found,
    )


def run_trial(instance: ProblemInstance, kernel: Kernel, gen: SeededGenerator) -> TrialRecord:
    k, c = outcome_table(instance, kernel).draw(gen.numpy())
    return trial_from_outcome(instance, k, c, gen)


@dataclass(frozen=True)
class SuccessEstimate:
    trials: int
    successes: int
    kernel: Kernel

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        p = self.rate
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.trials)


def success_mask(instance: ProblemInstance) -> np.ndarray:
    """Which measured c lead to verified factors (independent of k and of the kernel)."""
    mask = np.zeros(instance.q, dtype=bool)
    for c in range(1, instance.q):
        r_hat = recover_period(c, instance)
        mask[c] = r_hat is not None and factors_from_order(instance.x, instance.N, r_hat) is not None
    return mask


def uniform_baseline_rate(instance: ProblemInstance) -> float:
    """Success probability when c is uniform over [0, q)."""
    return float(success_mask(instance).mean())


def _trial_outcomes(instance, kernel, gen, indices):
    table = outcome_table(instance, kernel)
    return [table.draw(gen.derive(i).numpy()) for i in indices]


def estimate_success_rate(
    instance: ProblemInstance,
    kernel: Kernel,
    n_trials: int,
    gen: SeededGenerator,
    *,
    workers: int = 1,
) -> SuccessEstimate:
    """Run n_trials trials, trial i on stream gen.derive(i).

    The result depends only on the master stream, not on ``workers``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    mask = success_mask(instance)
    indices = list(range(n_trials))
    if workers > 1:
        chunks = [indices[i::workers] for i in range(workers)]
        outcomes: list = [None] * n_trials
        with ThreadPoolExecutor(workers) as pool:
            for chunk, result in zip(chunks, pool.map(lambda ch: _trial_outcomes(instance, kernel, gen, ch), chunks)):
                for i, outcome in zip(chunk, result):
                    outcomes[i] = outcome
    else:
        outcomes = _trial_outcomes(instance, kernel, gen, indices)
    successes = sum(int(mask[c]) for _, c in outcomes)
    return SuccessEstimate(n_trials, successes, kernel)


@dataclass
class FactorReport:
    instance: ProblemInstance
    factors: tuple[int, int] | None
    trials: list[TrialRecord] = field(default_factory=list)
    diagnostic: str = ""

    @property
    def exhausted(self) -> bool:
        return self.factors is None

    def to_dict(self) -> dict:
        return {
            "N": self.instance.N,
            "x": self.instance.x,
            "q": self.instance.q,
            "factors": sorted(self.factors) if self.factors else None,
            "trials_used": len(self.trials),
            "exhausted": self.exhausted,
            "diagnostic": self.diagnostic,
            "trials": [t.to_dict() for t in self.trials],
        }


def structural_diagnostic(instance: ProblemInstance) -> str:
    """Why this base can never yield factors, or '' if it can."""
    x, n, r = instance.x, instance.N, instance.r
    if r % 2:
        return f"order r={r} is odd"
    if pow(x, r // 2, n) == n - 1:
        return f"x^(r/2) = -1 mod N ({x}^{r // 2} = {n - 1} mod {n})"
    return ""


def _verified(pair: tuple[int, int], n: int) -> bool:
    f1, f2 = pair
    return 1 < f1 < n and 1 < f2 < n and n % f1 == 0 and n % f2 == 0


def factor_number(
    instance: ProblemInstance, kernel: Kernel, max_trials: int, gen: SeededGenerator
) -> FactorReport:
    """Repeat trials (trial i on gen.derive(i)) until verified factors appear or max_trials is spent."""
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    report = FactorReport(instance, None)
    for i in range(max_trials):
        record = run_trial(instance, kernel, gen.derive(i))
        report.trials.append(record)
        if record.factors is not None and _verified(record.factors, instance.N):
            report.factors = tuple(sorted(record.factors))
            return report
    report.diagnostic = structural_diagnostic(instance) or f"no verified factors in {max_trials} trials"
    return report
