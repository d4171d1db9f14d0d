# pylint: disable=missing-function-docstring, missing-module-docstring, invalid-name
import numpy as np
import pytest
from scipy import stats as sps

from sampling import (
    MASK64,
    StreamKey,
    bernoulli,
    bernoulli_many,
    binomial,
    binomial_words,
    child_words,
    derive_stream,
    generator,
    replicate_blocks,
    uniforms,
)


def test_key_word_depends_on_seed_and_path():
    base = StreamKey(7, (1, 2))
    assert base.word == StreamKey(7, (1, 2)).word
    assert base.word != StreamKey(8, (1, 2)).word
    assert base.word != StreamKey(7, (2, 1)).word
    assert base.word != StreamKey(7, (1, 2, 0)).word


def test_seed_and_tags_are_reduced_to_64_bits():
    key = StreamKey(-1, (-2,))
    assert key.master_seed == MASK64
    assert key.path == (MASK64 - 1,)


def test_derive_stream_appends_tags():
    key = StreamKey(3)
    assert derive_stream(key, []) is key
    assert derive_stream(derive_stream(key, [4]), [5]) == StreamKey(3, (4, 5))


def test_child_words_match_derived_keys():
    key = StreamKey(11, (9,))
    words = child_words(key, np.arange(6))
    expected = [derive_stream(key, [i]).word for i in range(6)]
    assert words.tolist() == [int(w) for w in expected]


def test_uniforms_are_counter_addressed():
    key = StreamKey(5)
    u = uniforms(key, np.arange(1000))
    assert np.all((u >= 0.0) & (u < 1.0))
    # any counter can be read on its own
    assert uniforms(key, np.array([417]))[0] == u[417]
    assert abs(u.mean() - 0.5) < 0.05


def test_bernoulli_extremes_and_validation():
    key = StreamKey(1)
    assert not bernoulli_many(key, np.arange(100), 0.0).any()
    assert bernoulli_many(key, np.arange(100), 1.0).all()
    assert bernoulli(key, 1.0) == 1
    with pytest.raises(ValueError):
        bernoulli_many(key, np.arange(3), 1.5)
    with pytest.raises(ValueError):
        bernoulli(key, -0.1)


def test_bernoulli_frequency():
    draws = bernoulli_many(StreamKey(9), np.arange(100000), 0.3)
    se = np.sqrt(0.3 * 0.7 / draws.size)
    assert abs(draws.mean() - 0.3) <= 4 * se


def test_binomial_is_prefix_consistent():
    words = child_words(StreamKey(21), np.arange(500))
    small = binomial_words(words, np.full(500, 10), 0.4)
    large = binomial_words(words, np.full(500, 15), 0.4)
    assert np.all(large >= small)
    assert np.all(large - small <= 5)


def test_binomial_matches_its_law():
    reps, n, p = 20000, 10, 0.3
    draws = binomial_words(child_words(StreamKey(99), np.arange(reps)), np.full(reps, n), p)
    observed = np.bincount(np.minimum(draws, 8), minlength=9)
    expected = sps.binom.pmf(np.arange(9), n, p)
    expected[8] = sps.binom.sf(7, n, p)
    _, p_value = sps.chisquare(observed, expected * reps)
    assert p_value > 1e-4


def test_binomial_edge_cases():
    key = StreamKey(2)
    assert binomial(key, 0, 0.5) == 0
    assert binomial(key, 12, 1.0) == 12
    assert binomial(key, 12, 0.0) == 0
    assert 0 <= binomial(key, 12, 0.5, coupled=False) <= 12
    with pytest.raises(ValueError):
        binomial(key, -1, 0.5)
    with pytest.raises(ValueError):
        binomial_words(np.array([1], dtype=np.uint64), np.array([-3]), 0.5)


def test_generator_is_keyed():
    a = generator(StreamKey(4, (1,))).random(5)
    b = generator(StreamKey(4, (1,))).random(5)
    c = generator(StreamKey(4, (2,))).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_replicate_blocks():
    assert replicate_blocks(10, 4) == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]
    assert replicate_blocks(0, 4) == []
    with pytest.raises(ValueError):
        replicate_blocks(5, 0)
