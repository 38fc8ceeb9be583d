import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shor_decoherence.errors import ResourceLimit
from shor_decoherence.instance import build_instance, index_set
from shor_decoherence.sampler import (
    DephasingPattern,
    DephasingSampler,
    OutcomeTable,
    SeededGenerator,
    _cdf,
    _invert,
    block_spectrum,
    dephasing_probability,
    exact_dephasing_average,
    sample_outcome,
    sample_outcomes,
    samples_via_dephasing,
)
from shor_decoherence.spectrum import (
    Coherent,
    ConstantBeta,
    Hamming,
    coherent_joint,
    decohered_joint,
    marginal,
    total_variation,
)


def empirical(cs, q):
    return np.bincount(cs, minlength=q) / len(cs)


@given(st.floats(0, 30), st.integers(0, 1), st.integers(0, 1))
def test_per_bit_kernel_identity(xi, b, b2):
    p = dephasing_probability(xi)
    assert (1 - p) + p * (b == b2) == pytest.approx(math.exp(-xi * (b != b2)), rel=0, abs=2e-16)


def test_pattern_probabilities_sum_to_one():
    p = dephasing_probability(0.3)
    total = math.fsum(DephasingPattern(m, 7, p).probability for m in range(128))
    assert total == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("xi", [0.05, 0.1, 0.5, 2.0])
def test_dephasing_average_equals_kernel(fig1, xi):
    for k in (0, 3):
        np.testing.assert_allclose(
            exact_dephasing_average(fig1, k, xi).values,
            decohered_joint(fig1, k, Hamming(xi)).values,
            rtol=0,
            atol=1e-9,
        )


def test_dephasing_average_xi_zero_is_coherent(fig1):
    np.testing.assert_allclose(
        exact_dephasing_average(fig1, 3, 0.0).values, coherent_joint(fig1, 3).values, rtol=0, atol=1e-14
    )


def test_dephasing_average_guard():
    inst = build_instance(301, 2)  # q = 2^17
    with pytest.raises(ResourceLimit):
        exact_dephasing_average(inst, 0, 0.1)


def test_block_spectrum_of_full_set_is_coherent(fig1):
    members = index_set(fig1, 3).members()
    expected = coherent_joint(fig1, 3).values * 128 / 21
    np.testing.assert_allclose(block_spectrum(members, 128), expected, rtol=0, atol=1e-14)


def test_inverse_cdf_skips_empty_bins_and_breaks_ties_low():
    cdf = _cdf(np.array([0.0, 0.5, 0.0, 0.5]))
    assert _invert(cdf, 0.0) == 1
    assert _invert(cdf, 0.4999) == 1
    assert _invert(cdf, 0.5) == 3
    assert _invert(cdf, 0.999999) == 3


def test_determinism(fig1):
    gen = SeededGenerator(1234, 5)
    assert sample_outcome(fig1, Hamming(0.1), gen) == sample_outcome(fig1, Hamming(0.1), gen)
    a = sample_outcomes(fig1, Coherent(), gen, 500)
    b = sample_outcomes(fig1, Coherent(), gen, 500)
    np.testing.assert_array_equal(a[1], b[1])
    d1 = samples_via_dephasing(fig1, 0.1, gen, 300)
    d2 = samples_via_dephasing(fig1, 0.1, gen, 300)
    np.testing.assert_array_equal(d1[1], d2[1])
    np.testing.assert_array_equal(d1[0], d2[0])


def test_streams_differ_and_are_uncorrelated(fig1):
    table = OutcomeTable(fig1, ConstantBeta(1.0))
    _, a = table.draw_many(SeededGenerator(7, 0).numpy(), 10_000)
    _, b = table.draw_many(SeededGenerator(7, 1).numpy(), 10_000)
    _, c = table.draw_many(SeededGenerator(7, 0).derive(3).numpy(), 10_000)
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.05


def test_k_frequencies(fig1):
    ks, _ = sample_outcomes(fig1, Coherent(), SeededGenerator(3), 60_000)
    freq = np.bincount(ks, minlength=6) / ks.size
    np.testing.assert_allclose(freq, fig1.counts() / 128, atol=0.01)


@pytest.mark.slow
@pytest.mark.parametrize("kernel", [Coherent(), Hamming(0.1), ConstantBeta(0.5), ConstantBeta(1.0)], ids=str)
def test_table_sampler_tv(fig1, kernel):
    _, cs = sample_outcomes(fig1, kernel, SeededGenerator(2024), 100_000)
    assert total_variation(empirical(cs, 128), marginal(fig1, kernel).values) < 0.02


@pytest.mark.slow
def test_dephasing_sampler_tv(fig1):
    _, cs = samples_via_dephasing(fig1, 0.1, SeededGenerator(2024), 100_000)
    assert total_variation(empirical(cs, 128), marginal(fig1, Hamming(0.1)).values) < 0.02


def test_dephasing_xi_zero_follows_coherent(fig1):
    sampler = DephasingSampler(fig1, 0.0)
    _, cs = sampler.draw_many(SeededGenerator(9).numpy(), 20_000)
    # with no leaked bits only peak bins can appear
    assert set(np.unique(cs)) <= set(np.flatnonzero(marginal(fig1, Coherent()).values > 1e-6))
    assert sampler._cache.keys() <= {(k, 0, 0) for k in range(6)}


def test_dephasing_xi_infinite_is_uniform_per_k(fig1):
    sampler = DephasingSampler(fig1, math.inf)
    assert sampler.p == 1.0
    ks, cs = sampler.draw_many(SeededGenerator(9).numpy(), 50_000)
    for k in (0, 3):
        assert total_variation(empirical(cs[ks == k], 128), np.full(128, 1 / 128)) < 0.05
    assert all(mask == 127 for (_, mask, _) in sampler._cache)


def test_estimator_consistency(fig1):
    exact = marginal(fig1, Hamming(0.1)).values
    small = sample_outcomes(fig1, Hamming(0.1), SeededGenerator(11), 1_000)[1]
    large = sample_outcomes(fig1, Hamming(0.1), SeededGenerator(11), 100_000)[1]
    assert total_variation(empirical(large, 128), exact) < total_variation(empirical(small, 128), exact)
