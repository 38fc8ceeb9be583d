"""Sampling measurement outcomes (k, c).

Two routes:

* table sampling: precompute P(c | k) for any kernel and invert the CDF;
* dephasing sampling (Hamming kernel only): the kernel factorises over bits,

      exp(-xi * [b != b']) = (1 - p) + p * [b == b'],   p = 1 - exp(-xi),

  so the decohered state is an average over random sets S of bits that the
  environment has measured. Given S, the register collapses onto the members
  of A_k that agree on the bits in S, and c is drawn from the coherent
  spectrum of that block.

``exact_dephasing_average`` enumerates every S and is the oracle for the
factorisation; it never touches the kernel matrix.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceLimit
from .instance import ProblemInstance, index_set
from .spectrum import Coherent, Kernel, Spectrum, coherent_joint, decohered_joint

MAX_PATTERN_BITS = 16


@dataclass(frozen=True)
class SeededGenerator:
    """Counter-based stream identified by (master_seed, stream_index[, sub-stream path]).

    The stream is a Philox generator keyed through a SeedSequence, so any
    worker can reconstruct any stream without replaying others.
    """

    master_seed: int
    stream_index: int = 0
    path: tuple[int, ...] = field(default=())

    def numpy(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_index, *self.path))
        return np.random.Generator(np.random.Philox(seq))

    def derive(self, index: int) -> "SeededGenerator":
        return SeededGenerator(self.master_seed, self.stream_index, (*self.path, index))


def _cdf(probabilities: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probabilities, dtype=float)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return cdf


def _invert(cdf: np.ndarray, u):
    # side="right" skips zero-probability bins and resolves ties to the lower index
    return np.searchsorted(cdf, u, side="right")


class OutcomeTable:
    """Cumulative tables for k and for c given k under one kernel."""

    def __init__(self, instance: ProblemInstance, kernel: Kernel, *, force: bool = False):
        self.instance = instance
        self.kernel = kernel
        counts = instance.counts()
        self.k_cdf = _cdf(counts / instance.q)
        spectra = []
        for k in range(instance.r):
            if isinstance(kernel, Coherent):
                spectra.append(coherent_joint(instance, k).values)
            else:
                spectra.append(decohered_joint(instance, k, kernel, force=force).values)
        self.c_cdf = np.stack([_cdf(s) for s in spectra])

    def draw(self, rng: np.random.Generator) -> tuple[int, int]:
        k = int(_invert(self.k_cdf, rng.random()))
        c = int(_invert(self.c_cdf[k], rng.random()))
        return k, c

    def draw_many(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        u = rng.random((n, 2))
        ks = _invert(self.k_cdf, u[:, 0])
        cs = np.empty(n, dtype=np.int64)
        for k in np.unique(ks):
            sel = ks == k
            cs[sel] = _invert(self.c_cdf[k], u[sel, 1])
        return ks.astype(np.int64), cs


@functools.lru_cache(maxsize=64)
def outcome_table(instance: ProblemInstance, kernel: Kernel) -> OutcomeTable:
    return OutcomeTable(instance, kernel)


def sample_outcome(instance: ProblemInstance, kernel: Kernel, gen: SeededGenerator) -> tuple[int, int]:
    """First (k, c) of the stream ``gen``; the same gen always gives the same outcome."""
    return outcome_table(instance, kernel).draw(gen.numpy())


def sample_outcomes(
    instance: ProblemInstance, kernel: Kernel, gen: SeededGenerator, n: int
) -> tuple[np.ndarray, np.ndarray]:
    return outcome_table(instance, kernel).draw_many(gen.numpy(), n)


# --------------------------------------------------------------------------
# dephasing unravelling
# --------------------------------------------------------------------------


def dephasing_probability(xi: float) -> float:
    if not xi >= 0:
        raise DomainError(f"xi must be non-negative, got {xi}")
    return -math.expm1(-xi)


@dataclass(frozen=True)
class DephasingPattern:
    """Bits (as a mask over log2 q bits) whose value leaked to the environment."""

    mask: int
    bits: int
    p: float

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    @property
    def probability(self) -> float:
        return self.p**self.size * (1.0 - self.p) ** (self.bits - self.size)


def block_spectrum(block: np.ndarray, q: int) -> np.ndarray:
    """Normalised coherent spectrum of a uniform superposition over ``block``."""
    indicator = np.zeros(q)
    indicator[block] = 1.0
    amp = np.fft.fft(indicator)
    return (amp.real**2 + amp.imag**2) / (q * block.size)


class DephasingSampler:
    def __init__(self, instance: ProblemInstance, xi: float):
        self.instance = instance
        self.xi = xi
        self.p = dephasing_probability(xi)
        self.k_cdf = _cdf(instance.counts() / instance.q)
        self.members = [index_set(instance, k).members() for k in range(instance.r)]
        self._cache: dict[tuple[int, int, int], np.ndarray] = {}

    def _block_cdf(self, k: int, mask: int, value: int) -> np.ndarray:
        key = (k, mask, value)
        cdf = self._cache.get(key)
        if cdf is None:
            members = self.members[k]
            block = members[(members & mask) == value]
            cdf = _cdf(block_spectrum(block, self.instance.q))
            self._cache[key] = cdf
        return cdf

    def draw_many(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        bits = self.instance.bits
        ks = _invert(self.k_cdf, rng.random(n))
        leaked = rng.random((n, bits)) < self.p
        masks = (leaked * (1 << np.arange(bits))).sum(axis=1)
        picks = rng.random(n)
        u = rng.random(n)
        cs = np.empty(n, dtype=np.int64)
        for i in range(n):
            k = int(ks[i])
            members = self.members[k]
            # a uniformly chosen member fixes the leaked bit values with the right joint law
            a0 = int(members[min(int(picks[i] * members.size), members.size - 1)])
            mask = int(masks[i])
            cs[i] = _invert(self._block_cdf(k, mask, a0 & mask), u[i])
        return ks.astype(np.int64), cs

    def draw(self, rng: np.random.Generator) -> tuple[int, int]:
        ks, cs = self.draw_many(rng, 1)
        return int(ks[0]), int(cs[0])


def sample_via_dephasing(instance: ProblemInstance, xi: float, gen: SeededGenerator) -> tuple[int, int]:
    return DephasingSampler(instance, xi).draw(gen.numpy())


def samples_via_dephasing(
    instance: ProblemInstance, xi: float, gen: SeededGenerator, n: int
) -> tuple[np.ndarray, np.ndarray]:
    return DephasingSampler(instance, xi).draw_many(gen.numpy(), n)


def exact_dephasing_average(instance: ProblemInstance, k: int, xi: float) -> Spectrum:
    """Sum over all 2^bits dephasing patterns of Pr(S) times the S-dephased spectrum."""
    bits = instance.bits
    if bits > MAX_PATTERN_BITS:
        raise ResourceLimit(f"{bits} register bits exceed the enumeration guard {MAX_PATTERN_BITS}")
    p = dephasing_probability(xi)
    q = instance.q
    members = index_set(instance, k).members()
    phases = np.exp(2j * np.pi * (np.multiply.outer(members, np.arange(q)) % q) / q)
    total = np.zeros(q)
    for mask in range(1 << bits):
        weight = DephasingPattern(mask, bits, p).probability
        if weight == 0.0:
            continue
        _, labels = np.unique(members & mask, return_inverse=True)
        sums = np.zeros((labels.max() + 1, q), dtype=complex)
        np.add.at(sums, labels, phases)
        total += weight * (sums.real**2 + sums.imag**2).sum(axis=0)
    return Spectrum(q, total / float(q) ** 2, k)
