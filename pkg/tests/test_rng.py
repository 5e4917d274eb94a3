import numpy as np
import pytest

from ordmatch.rng import Rng, _mix, derive_seed, mix64, stream_key, trial_keys


def test_mix_matches_compiled():
    for z in (0, 1, 12345, 2**63 + 7, 2**64 - 1):
        assert int(_mix(np.uint64(z))) == mix64(z)


def test_streams_reproducible_and_distinct():
    a = Rng(7, 3).uniforms(100)
    assert np.array_equal(a, Rng(7, 3).uniforms(100))
    assert not np.array_equal(a, Rng(7, 4).uniforms(100))
    assert not np.array_equal(a, Rng(8, 3).uniforms(100))
    assert np.all((a >= 0) & (a < 1))


def test_counter_advances():
    r = Rng(1)
    first = r.uniforms(5)
    second = r.uniforms(5)
    assert np.array_equal(np.concatenate([first, second]), Rng(1).uniforms(10))


def test_trial_keys_follow_xor_rule():
    keys = trial_keys(99, 3, 6)
    assert keys.tolist() == [stream_key(99, 99 ^ t) for t in (3, 4, 5)]


def test_derive_seed_distinct():
    seen = {derive_seed(1, j, a) for j in range(20) for a in range(5)}
    assert len(seen) == 100


def test_rejects_non_integer_seed():
    with pytest.raises(TypeError):
        Rng(1.5)


def test_uniformity():
    u = Rng(2024).uniforms(100_000)
    counts, _ = np.histogram(u, bins=10, range=(0, 1))
    chi2 = float(((counts - 10_000) ** 2 / 10_000).sum())
    assert chi2 < 27.9  # 99.9% quantile, 9 dof
