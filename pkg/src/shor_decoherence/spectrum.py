"""Measurement statistics of the Fourier register, with and without decoherence.

For a fixed second-register outcome x^k the first register collapses onto the
index set A_k. Under decoherence its reduced density matrix is

    rho[a, a'] = K(a, a') / q          for a, a' in A_k

and the probability of reading c after the Fourier transform is

    P(c) = q^-2 * sum_{a, a'} K(a, a') exp(2 pi i (a - a') c / q).

Kernels K are the identity (coherent), exp(-xi * hamming(a, a')) and the
constant-beta model with off-diagonal weight 1 - beta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ResourceLimit
from .instance import IndexSet, ProblemInstance, index_set

MAX_SPECTRUM_Q = 2**12
MAX_ENTROPY_M = 4096
HERMITIAN_TOL = 1e-12
_C_BLOCK = 512


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Coherent:
    def weight(self, a: int, b: int) -> float:
        return 1.0

    def matrix(self, members: np.ndarray) -> np.ndarray:
        return np.ones((members.size, members.size))

    def __str__(self) -> str:
        return "coherent"


@dataclass(frozen=True)
class Hamming:
    """K(a, a') = exp(-xi * popcount(a XOR a'))."""

    xi: float

    def __post_init__(self):
        if not self.xi >= 0:
            raise DomainError(f"xi must be non-negative, got {self.xi}")

    def weight(self, a: int, b: int) -> float:
        return math.exp(-self.xi * (a ^ b).bit_count())

    def matrix(self, members: np.ndarray) -> np.ndarray:
        dist = np.bitwise_count(np.bitwise_xor.outer(members, members))
        return np.exp(-self.xi * dist.astype(float))

    def __str__(self) -> str:
        return f"xi:{self.xi!r}"


@dataclass(frozen=True)
class ConstantBeta:
    """K(a, a) = 1 and K(a, a') = 1 - beta off the diagonal."""

    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1], got {self.beta}")

    def weight(self, a: int, b: int) -> float:
        return 1.0 if a == b else 1.0 - self.beta

    def matrix(self, members: np.ndarray) -> np.ndarray:
        m = np.full((members.size, members.size), 1.0 - self.beta)
        np.fill_diagonal(m, 1.0)
        return m

    def __str__(self) -> str:
        return f"beta:{self.beta!r}"


Kernel = Coherent | Hamming | ConstantBeta


def parse_kernel(text: str) -> Kernel:
    """'coherent', 'xi:<float>' or 'beta:<float>'."""
    text = text.strip()
    if text == "coherent":
        return Coherent()
    name, sep, value = text.partition(":")
    if not sep:
        raise DomainError(f"unrecognised kernel {text!r}")
    try:
        number = float(value)
    except ValueError:
        raise DomainError(f"kernel parameter {value!r} is not a number") from None
    if name == "xi":
        return Hamming(number)
    if name == "beta":
        return ConstantBeta(number)
    raise DomainError(f"unrecognised kernel {text!r}")


def kernel_weight(kernel: Kernel, a: int, b: int) -> float:
    return kernel.weight(a, b)


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Probabilities over c in [0, q). ``k`` is None for the marginal over k."""

    q: int
    values: np.ndarray
    k: int | None = None

    @property
    def is_marginal(self) -> bool:
        return self.k is None

    @property
    def total(self) -> float:
        return float(math.fsum(self.values))

    def __len__(self) -> int:
        return self.q


def _check_guard(instance: ProblemInstance, force: bool) -> None:
    if instance.q > MAX_SPECTRUM_Q and not force:
        raise ResourceLimit(f"q={instance.q} exceeds the full-spectrum guard {MAX_SPECTRUM_Q} (pass force=True)")


def _phases(members: np.ndarray, cs: np.ndarray, q: int) -> np.ndarray:
    # (a * c) mod q is exact in integers, so phases carry no accumulated error
    return np.exp(2j * np.pi * (np.multiply.outer(members, cs) % q) / q)


def coherent_values(idx: IndexSet, q: int) -> np.ndarray:
    """|sum_{a in idx} exp(2 pi i a c / q)|^2 / q^2 via the geometric-sum closed form."""
    c = np.arange(q, dtype=np.int64)
    m = (idx.step * c) % q
    resonant = m == 0
    t = (idx.count * m) % (2 * q)
    num = np.where(t % q == 0, 0.0, np.sin(np.pi * t / q))
    den = np.sin(np.pi * m / q)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(resonant, float(idx.count) ** 2, (num / np.where(resonant, 1.0, den)) ** 2)
    return ratio / float(q) ** 2


def coherent_joint(instance: ProblemInstance, k: int) -> Spectrum:
    idx = index_set(instance, k)
    return Spectrum(instance.q, coherent_values(idx, instance.q), k)


def density_spectrum(members: np.ndarray, weights: np.ndarray, q: int) -> np.ndarray:
    """q^-2 sum_{a,a'} W[a,a'] e^{2 pi i (a - a') c / q} for every c, as a direct double sum.

    Returns the real part after checking the imaginary residue.
    """
    out = np.empty(q)
    for start in range(0, q, _C_BLOCK):
        cs = np.arange(start, min(start + _C_BLOCK, q), dtype=np.int64)
        e = _phases(members, cs, q)
        block = np.einsum("ac,ac->c", e, weights @ e.conj()) / float(q) ** 2
        residue = np.max(np.abs(block.imag)) if block.size else 0.0
        if residue >= HERMITIAN_TOL:
            raise ArithmeticError(f"imaginary residue {residue:.3g} in a Hermitian quadratic form")
        out[start : start + cs.size] = block.real
    return out


def decohered_joint(instance: ProblemInstance, k: int, kernel: Kernel, *, force: bool = False) -> Spectrum:
    _check_guard(instance, force)
    members = index_set(instance, k).members()
    values = density_spectrum(members, kernel.matrix(members), instance.q)
    return Spectrum(instance.q, values, k)


def marginal(instance: ProblemInstance, kernel: Kernel, *, force: bool = False) -> Spectrum:
    _check_guard(instance, force)
    total = np.zeros(instance.q)
    for k in range(instance.r):
        if isinstance(kernel, Coherent):
            total += coherent_joint(instance, k).values
        else:
            total += decohered_joint(instance, k, kernel, force=force).values
    return Spectrum(instance.q, total, None)


def constant_beta_mixture(instance: ProblemInstance, k: int, beta: float) -> Spectrum:
    """(1 - beta) * coherent + beta * M_k / q^2, the closed form of the constant-beta kernel."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    idx = index_set(instance, k)
    flat = idx.count / float(instance.q) ** 2
    values = (1.0 - beta) * coherent_values(idx, instance.q) + beta * flat
    return Spectrum(instance.q, values, k)


def constant_beta_marginal(instance: ProblemInstance, beta: float) -> Spectrum:
    values = sum(constant_beta_mixture(instance, k, beta).values for k in range(instance.r))
    return Spectrum(instance.q, values, None)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# --------------------------------------------------------------------------
# constant-beta fit
# --------------------------------------------------------------------------


def fit_constant_beta(instance: ProblemInstance, xi: float, *, force: bool = False) -> float:
    """Beta whose constant-kernel marginal best matches the Hamming(xi) marginal in least squares.

    Grid search at 1e-3 then ternary search to 1e-6; the objective is a convex
    quadratic in beta so the bracket around the grid minimum contains the optimum.
    """
    target = marginal(instance, Hamming(xi), force=force).values
    coherent = marginal(instance, Coherent()).values
    flat = sum(index_set(instance, k).count for k in range(instance.r)) / float(instance.q) ** 2

    def objective(beta: float) -> float:
        model = (1.0 - beta) * coherent + beta * flat
        return float(np.sum((target - model) ** 2))

    grid = np.linspace(0.0, 1.0, 1001)
    scores = [objective(b) for b in grid]
    best = int(np.argmin(scores))
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]
    while hi - lo > 1e-6:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if objective(m1) <= objective(m2):
            hi = m2
        else:
            lo = m1
    return float(min(max(0.5 * (lo + hi), 0.0), 1.0))


# --------------------------------------------------------------------------
# entropy
# --------------------------------------------------------------------------


class EntropyReport(NamedTuple):
    S: float
    S_max: float

    @property
    def fraction(self) -> float:
        return self.S / self.S_max


def _entropy_from_eigenvalues(eigenvalues: np.ndarray) -> float:
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def constant_beta_eigenvalues(m: int, beta: float) -> np.ndarray:
    """Spectrum of ((1-beta) J + beta I) / m: one ((1-beta) m + beta)/m, then m-1 copies of beta/m."""
    out = np.full(m, beta / m)
    out[0] = ((1.0 - beta) * m + beta) / m
    return np.sort(out)


def conditional_state(instance: ProblemInstance, k: int, kernel: Kernel) -> np.ndarray:
    """Normalised M_k x M_k state of the first register given outcome x^k."""
    idx = index_set(instance, k)
    if idx.count > MAX_ENTROPY_M:
        raise ResourceLimit(f"M_k={idx.count} exceeds the eigensolver guard {MAX_ENTROPY_M}")
    return kernel.matrix(idx.members()) / idx.count


def von_neumann_entropy(instance: ProblemInstance, k: int, kernel: Kernel) -> EntropyReport:
    rho = conditional_state(instance, k, kernel)
    m = rho.shape[0]
    if m < 2:
        raise DomainError("entropy fraction needs M_k >= 2")
    return EntropyReport(_entropy_from_eigenvalues(np.linalg.eigvalsh(rho)), math.log(m))


def constant_beta_entropy(m: int, beta: float) -> EntropyReport:
    return EntropyReport(_entropy_from_eigenvalues(constant_beta_eigenvalues(m, beta)), math.log(m))


# --------------------------------------------------------------------------
# peaks
# --------------------------------------------------------------------------


class PeakMetrics(NamedTuple):
    on_peak_mass: float
    floor_to_peak_ratio: float


def peak_bins(instance: ProblemInstance) -> np.ndarray:
    """Boolean mask of c strictly within one bin of some ideal peak lambda*q/r (cyclically)."""
    c = np.arange(instance.q, dtype=np.int64)
    lam = np.arange(instance.r + 1, dtype=np.int64)
    # |c - lam q / r| < 1  <=>  |c r - lam q| < r, exact in integers
    gap = np.abs(np.multiply.outer(c, np.full(lam.size, instance.r)) - lam * instance.q)
    return (gap < instance.r).any(axis=1)


def peak_metrics(spectrum: Spectrum, instance: ProblemInstance) -> PeakMetrics:
    if not spectrum.is_marginal or spectrum.q != instance.q:
        raise DomainError("peak metrics need the marginal spectrum of this instance")
    on = peak_bins(instance)
    values = spectrum.values
    on_mass = float(math.fsum(values[on]))
    peak = float(values[on].max())
    floor = float(values[~on].max()) if (~on).any() else 0.0
    return PeakMetrics(on_mass, floor / peak if peak > 0 else math.inf)
