"""Order-of-magnitude decoherence budget for quantum factoring.

All formulas carry an implied proportionality constant of 1; results are
estimates, not predictions.

Sign conventions used throughout:

* accumulated decoherence is beta ~ n_op * alpha with n_op = L^2, which is
  what makes the trial count L / (1 - L^2 alpha) equal L / (1 - beta);
* the spin-boson bracket -C - pi^2/4 + ln(Delta/Lambda) is negative whenever
  Delta < Lambda, so alpha is taken as its magnitude.

A finite bath temperature would increase alpha further; that is not modelled.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DomainError, Divergent

EULER_GAMMA = 0.5772156649


@dataclass(frozen=True)
class TwoLevelDensity:
    rho_uu: float
    rho_dd: float
    rho_ud: complex
    rho_du: complex | None = None

    def __post_init__(self):
        du = self.rho_du if self.rho_du is not None else complex(self.rho_ud).conjugate()
        object.__setattr__(self, "rho_du", complex(du))
        object.__setattr__(self, "rho_ud", complex(self.rho_ud))
        if self.rho_uu < 0 or self.rho_dd < 0:
            raise DomainError("diagonal populations must be non-negative")
        if abs(self.rho_uu + self.rho_dd - 1.0) > 1e-9:
            raise DomainError(f"trace is {self.rho_uu + self.rho_dd}, expected 1")
        if abs(self.rho_du - self.rho_ud.conjugate()) > 1e-12:
            raise DomainError("rho_du must be the conjugate of rho_ud")
        if abs(self.rho_ud) ** 2 > self.rho_uu * self.rho_dd + 1e-12:
            raise DomainError("density matrix is not positive semidefinite")

    @classmethod
    def equal_superposition(cls, phase: float = 0.0) -> "TwoLevelDensity":
        return cls(0.5, 0.5, 0.5 * complex(math.cos(phase), -math.sin(phase)))


@dataclass(frozen=True)
class SpinBosonParams:
    mu: float
    eta: float
    delta: float
    lambda_cutoff: float

    def __post_init__(self):
        if min(self.mu, self.eta, self.delta, self.lambda_cutoff) <= 0:
            raise DomainError("spin-boson parameters must be strictly positive")
        if self.delta >= self.lambda_cutoff:
            raise DomainError("the bath cutoff must exceed the tunnelling frequency (delta < lambda_cutoff)")


@dataclass(frozen=True)
class TimescaleParams:
    tau_rel: float
    lambda_dB: float
    delta_x: float

    def __post_init__(self):
        if min(self.tau_rel, self.lambda_dB, self.delta_x) <= 0:
            raise DomainError("timescale parameters must be strictly positive")


def beta_from_visibility(rho: TwoLevelDensity) -> float:
    """1 - (rho_ud + rho_du) / (rho_uu + rho_dd); the off-diagonal sum is real."""
    den = rho.rho_uu + rho.rho_dd
    if den < 1e-12:
        raise DomainError("vanishing populations")
    return 1.0 - (rho.rho_ud + rho.rho_du).real / den


def spin_boson_bracket(params: SpinBosonParams) -> float:
    return -EULER_GAMMA - math.pi**2 / 4 + math.log(params.delta / params.lambda_cutoff)


def alpha_spin_boson(params: SpinBosonParams) -> float:
    """Per-operation coherence loss of a two-level system in a zero-temperature ohmic bath."""
    return params.mu**2 * params.eta / (2 * math.pi) * abs(spin_boson_bracket(params))


@dataclass(frozen=True)
class Accumulated:
    beta: float
    saturated: bool


def beta_accumulated(alpha: float, L: float) -> Accumulated:
    if alpha < 0 or L <= 0:
        raise DomainError("need alpha >= 0 and L > 0")
    raw = L * L * alpha
    return Accumulated(min(1.0, raw), raw >= 1.0)


def trials_needed(L: float, alpha: float) -> float:
    if alpha < 0 or L <= 0:
        raise DomainError("need alpha >= 0 and L > 0")
    lost = L * L * alpha
    if lost >= 1.0:
        raise Divergent(f"L^2 alpha = {lost:g} >= 1")
    return L / (1.0 - lost)


@dataclass(frozen=True)
class Efficiency:
    efficient: bool
    quantum_trials: float
    classical_cost: float
    diagnostic: str = ""


def is_quantum_efficient(L: float, alpha: float) -> Efficiency:
    classical = math.exp(L ** (1.0 / 3.0))
    try:
        trials = trials_needed(L, alpha)
    except Divergent as exc:
        return Efficiency(False, math.inf, classical, f"divergent: {exc}")
    return Efficiency(trials <= classical, trials, classical)


@dataclass(frozen=True)
class MaxFactorable:
    ln_n_max: float

    @property
    def n_max(self) -> float | None:
        """N_max itself, or None when it overflows a float."""
        try:
            return math.exp(self.ln_n_max)
        except OverflowError:
            return None


def max_factorable(alpha: float | SpinBosonParams) -> MaxFactorable:
    """ln N_max = 1/sqrt(alpha), or sqrt(2 pi / (mu^2 eta)) given bath parameters."""
    if isinstance(alpha, SpinBosonParams):
        return MaxFactorable(math.sqrt(2 * math.pi / (alpha.mu**2 * alpha.eta)))
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return MaxFactorable(1.0 / math.sqrt(alpha))


def decoherence_time(params: TimescaleParams) -> float:
    return params.tau_rel * (params.lambda_dB / params.delta_x) ** 2


@dataclass(frozen=True)
class BudgetReport:
    alpha: float
    L: float
    n_op: float
    beta_total: float
    saturated: bool
    trials: float | None
    efficient: bool
    ln_n_max: float | None
    n_max: float | None
    label: str = "order-of-magnitude estimate"

    def to_dict(self) -> dict:
        return asdict(self)


def budget_report(alpha: float, L: float) -> BudgetReport:
    acc = beta_accumulated(alpha, L)
    try:
        trials = trials_needed(L, alpha)
    except Divergent:
        trials = None
    mf = max_factorable(alpha) if alpha > 0 else None
    return BudgetReport(
        alpha=alpha,
        L=L,
        n_op=L * L,
        beta_total=acc.beta,
        saturated=acc.saturated,
        trials=trials,
        efficient=is_quantum_efficient(L, alpha).efficient,
        ln_n_max=mf.ln_n_max if mf else None,
        n_max=mf.n_max if mf else None,
    )
