import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarshape.channels import builtin_channel, mutual_information, optimal_input
from polarshape.core import (InvalidArgument, RandomStream, bernoulli_product, bits_to_int,
                             int_to_bits, polar_transform, variational_distance)
from polarshape.polarization import build_index_sets, source_entropies_exact
from polarshape.sc import ARGMAX, GIVEN, SAMPLE
from polarshape.shaper import (DERANDOMIZED, GallagerSpec, ShaperSpec, best_rational_approx,
                               deterministic_choice_confidence, gallager_rate_gap, gallager_shape,
                               shape, shape_blocks, shaper_output_distribution, shaper_prefix_law,
                               source_lr)

ASYM = builtin_channel("asymmetric", [0.7, 0.2, 0.1, 0.05, 0.25, 0.7])


def brute_source_lr(p, prefix, L):
    """log P(U_i=0 | prefix) - log P(U_i=1 | prefix) by summing over all x."""
    i = len(prefix)
    num = [0.0, 0.0]
    for v in range(1 << L):
        x = int_to_bits(np.array([v]), L)[0]
        u = polar_transform(x)
        if list(u[:i]) == list(prefix):
            num[u[i]] += p ** int(x.sum()) * (1 - p) ** int(L - x.sum())
    return math.log(num[0]) - math.log(num[1])


# source LR

def test_source_lr_examples():
    p = 0.25
    assert source_lr(p, [], 1) == pytest.approx(math.log(3))
    # U_0 = X_0 ^ X_1 has P(1) = 2 p (1 - p)
    assert source_lr(p, [], 2) == pytest.approx(math.log(0.625 / 0.375))
    # given U_0 = 1 the pair is (1,0) or (0,1): U_1 = X_1 is uniform
    assert source_lr(p, [1], 2) == pytest.approx(0.0, abs=1e-12)
    # given U_0 = 0 the pair is (0,0) or (1,1): U_1 = X_1
    assert source_lr(p, [0], 2) == pytest.approx(math.log(0.75 ** 2 / 0.25 ** 2))


@pytest.mark.parametrize("L", [2, 4, 8])
@pytest.mark.parametrize("p", [0.1, 0.3])
def test_source_lr_matches_enumeration(L, p, rng):
    for _ in range(6):
        i = int(rng.integers(0, L))
        x = (rng.random(L) < p).astype(np.uint8)
        prefix = polar_transform(x)[:i].tolist()      # a reachable prefix
        assert source_lr(p, prefix, L) == pytest.approx(brute_source_lr(p, prefix, L), rel=1e-9,
                                                        abs=1e-9)


def test_source_lr_degenerate_sources():
    assert source_lr(0.0, [], 4) == math.inf
    assert source_lr(1.0, [], 1) == -math.inf
    with pytest.raises(InvalidArgument):
        source_lr(0.3, [0, 1], 2)


# shaping

def test_spec_validation():
    with pytest.raises(InvalidArgument):
        ShaperSpec(8, [3, 1], 0.3)
    with pytest.raises(InvalidArgument):
        ShaperSpec(8, [1, 8], 0.3)
    with pytest.raises(InvalidArgument):
        ShaperSpec(6, [1], 0.3)
    with pytest.raises(InvalidArgument):
        ShaperSpec(8, [1, 2], 0.3, DERANDOMIZED, [2, 5])
    s = ShaperSpec(8, [5, 6, 7], 0.3, DERANDOMIZED, [0, 1])
    assert ShaperSpec.from_dict(s.to_dict()) == s
    assert s.rules().tolist() == [ARGMAX, ARGMAX, SAMPLE, SAMPLE, SAMPLE, GIVEN, GIVEN, GIVEN]


def test_full_extractor_is_the_inverse_transform(rng):
    s = ShaperSpec(8, list(range(8)), 0.3)
    payload = rng.integers(0, 2, (20, 8)).astype(np.uint8)
    x, u = shape_blocks(s, payload, np.zeros((20, 8)))
    assert np.array_equal(u, payload)
    assert np.array_equal(x, polar_transform(payload))


def test_shape_small_examples():
    # L = 2, payload on position 1, p = 0.5: U_0 = 1 iff the variate is >= 1/2
    s = ShaperSpec(2, [1], 0.5)
    x, u = shape_blocks(s, np.array([[1], [0]]), np.array([[0.7, 0.0], [0.2, 0.0]]))
    assert u.tolist() == [[1, 1], [0, 0]]
    assert x.tolist() == [[0, 1], [0, 0]]
    # p = 0 forces every sampled bit to 0
    s = ShaperSpec(4, [], 0.0)
    x, _ = shape_blocks(s, np.zeros((1, 0), np.uint8), np.full((1, 4), 0.999))
    assert x.tolist() == [[0, 0, 0, 0]]


def test_shape_is_replayable():
    s = ShaperSpec(8, [3, 5, 6, 7], 0.3)
    a = shape(s, [1, 0, 1, 1], RandomStream(11, ("shaper", 0)))
    b = shape(s, [1, 0, 1, 1], RandomStream(11, ("shaper", 0)))
    assert np.array_equal(a, b)
    with pytest.raises(InvalidArgument):
        shape(s, [1, 0, 1], RandomStream(1))


def test_derandomized_without_leftover_is_deterministic():
    h = source_entropies_exact(0.5, 4)
    s = ShaperSpec(4, [0, 1, 2, 3], 0.5, DERANDOMIZED, [])
    assert s.randomness_per_block == 0
    outs = {tuple(shape(s, [1, 0, 0, 1], RandomStream(k))) for k in range(5)}
    assert len(outs) == 1 and h.sum() == 4


@pytest.mark.parametrize("L", [2, 4, 8])
@pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
def test_exact_inversion_without_payload(L, p):
    out = shaper_output_distribution(ShaperSpec(L, [], p))
    assert np.max(np.abs(out - bernoulli_product(p, L))) <= 1e-12


def test_empirical_histogram_matches_exact_law():
    s = ShaperSpec(4, [2, 3], 0.3)
    exact = shaper_output_distribution(s)
    B = 40000
    rs = RandomStream(12)
    payload = rs.bits(2 * B).reshape(B, 2)
    x, _ = shape_blocks(s, payload, rs.uniforms(4 * B).reshape(B, 4))
    counts = np.bincount(bits_to_int(x), minlength=16)
    se = np.sqrt(exact * (1 - exact) / B)
    assert np.all(np.abs(counts / B - exact) <= 5 * se + 1e-12)


# closeness of the shaped law to the target

GRID = [(p, L) for p in (0.2, 0.3, 0.4) for L in (4, 8)]


@pytest.mark.parametrize("p,L", GRID)
def test_distance_bound_and_monotonicity(p, L):
    h = source_entropies_exact(p, L)
    target = bernoulli_product(p, L)
    deltas = []
    for eps in (0.2, 0.1, 0.05):
        R = build_index_sets(h, eps).random_set
        d = variational_distance(shaper_output_distribution(ShaperSpec(L, R, p)), target)
        assert d < len(R) * math.sqrt(math.log(2) / 2 * eps)
        deltas.append(d)
    assert deltas[0] >= deltas[1] - 1e-15 and deltas[1] >= deltas[2] - 1e-15


def test_zero_random_set_gives_zero_distance():
    # no payload: the bound is 0 and the distance is exactly 0
    h = source_entropies_exact(0.2, 2)
    assert build_index_sets(h, 0.05).random_set == []
    d = variational_distance(shaper_output_distribution(ShaperSpec(2, [], 0.2)),
                             bernoulli_product(0.2, 2))
    assert d <= 1e-15


# derandomization

def test_randomness_budget():
    h = source_entropies_exact(0.2, 8)
    sets = build_index_sets(h, 0.2)
    st_ = ShaperSpec(8, sets.random_set, 0.2)
    dr = ShaperSpec(8, sets.random_set, 0.2, DERANDOMIZED, sets.deterministic_set)
    assert st_.randomness_per_block == 8 - len(sets.random_set)
    assert dr.randomness_per_block == len(sets.leftover_set)


@pytest.mark.parametrize("p,L,eps", [(0.2, 8, 0.2), (0.1, 8, 0.1), (0.1, 4, 0.2), (0.05, 8, 0.2)])
def test_deterministic_positions_error_on_average(p, L, eps):
    """Averaged over reachable prefixes, the argmax choice errs with prob <= 1 - 2^-eps."""
    sets = build_index_sets(source_entropies_exact(p, L), eps)
    assert sets.deterministic_set
    s = ShaperSpec(L, sets.random_set, p, DERANDOMIZED, sets.deterministic_set)
    law, cond = shaper_prefix_law(ShaperSpec(L, [], p))       # exact source prefix law
    for i in sets.deterministic_set:
        c = cond[i]
        err = float((law[i] * np.minimum(c, 1 - c)).sum())
        assert err <= 1 - 2 ** -eps + 1e-12
    assert set(deterministic_choice_confidence(s)) == set(sets.deterministic_set)


def test_deterministic_positions_can_be_uncertain_for_some_prefix():
    """A low-entropy position may still be a coin flip after a rare prefix."""
    p, L, eps = 0.2, 8, 0.2
    sets = build_index_sets(source_entropies_exact(p, L), eps)
    assert 7 in sets.deterministic_set
    s = ShaperSpec(L, sets.random_set, p, DERANDOMIZED, sets.deterministic_set)
    conf = deterministic_choice_confidence(s)
    assert conf[7] == pytest.approx(0.5)
    assert conf[7] < 2 ** -eps


# Gallager's shaper

def test_best_rational_examples():
    assert best_rational_approx(0.3, 4) == 1
    assert best_rational_approx(0.375, 8) == 3
    assert best_rational_approx(0.4210006, 16) == 7
    assert best_rational_approx(0.5 / 4, 4) == 0          # tie -> smaller k
    assert best_rational_approx(1.0, 8) == 8
    with pytest.raises(InvalidArgument):
        best_rational_approx(0.3, 6)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.integers(1, 10))
def test_best_rational_error_property(p, m):
    q = 1 << m
    k = best_rational_approx(p, q)
    assert abs(p - k / q) <= 1 / (2 * q) + 1e-15
    assert all(abs(p - k / q) <= abs(p - j / q) + 1e-15 for j in range(q + 1))


def test_gallager_shape_law():
    g = GallagerSpec(8, 3)
    words = int_to_bits(np.arange(8), 3)
    out = gallager_shape(g, words)
    assert out.tolist() == [1, 1, 1, 0, 0, 0, 0, 0]
    assert out.mean() == g.probability
    with pytest.raises(InvalidArgument):
        GallagerSpec(8, 9)


@pytest.mark.parametrize("channel", [builtin_channel("zchannel", [0.3]), ASYM])
def test_gallager_gap_within_bound(channel):
    p = optimal_input(channel).optimal_p
    gaps = []
    for m in range(2, 9):
        q = 1 << m
        gap, bound = gallager_rate_gap(channel, p, q)
        k = best_rational_approx(p, q)
        assert abs(p - k / q) <= 1 / (2 * q)
        assert gap <= bound
        assert gap == pytest.approx(abs(mutual_information(channel, p)
                                        - mutual_information(channel, k / q)))
        gaps.append(gap)
    assert gaps[-1] < 1e-4
