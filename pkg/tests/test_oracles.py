import math

import numpy as np
import pytest

from ordmatch.core import Instance
from ordmatch.generators import gen_euclidean, gen_figure2, gen_lb_two_sided, gen_metric_closure
from ordmatch.oracles import (
    brute_force_opt,
    exact_random_expectation,
    exact_rsd_expectation,
    min_matching,
    opt_matching,
    oracle_report,
    rsd_order_enumeration,
)


def test_opt_examples(diag2):
    assert opt_matching(diag2)[1] == 4
    for n in (2, 3, 17):
        assert opt_matching(gen_figure2(n))[1] == n + 2
    m, w = opt_matching(gen_lb_two_sided(0.001, "W1"))
    assert sorted(m.pairs) == [(0, 1), (1, 0)] and w == pytest.approx(4)


def test_min_examples(diag2):
    assert min_matching(diag2)[1] == 2
    assert min_matching(Instance([[7.0]]))[0].pairs == ((0, 0),)
    assert min_matching(Instance(np.full((5, 5), 2.5)))[1] == 12.5


def test_report(diag2):
    d = oracle_report(diag2).to_dict()
    assert d["opt_weight"] == 4 and d["min_weight"] == 2


def test_exact_rsd_examples(diag2):
    assert exact_rsd_expectation(diag2) == 4
    assert exact_rsd_expectation(gen_figure2(3)) == pytest.approx(11 / 3, abs=1e-12)
    assert exact_rsd_expectation(Instance([[4.5]])) == 4.5


def test_exact_rsd_agrees_with_enumeration():
    for s in range(10):
        inst = gen_metric_closure(5, s)
        for rounds in range(6):
            total, per_round, _ = rsd_order_enumeration(inst, rounds)
            assert exact_rsd_expectation(inst, rounds) == pytest.approx(total, rel=1e-12)
            assert len(per_round) == rounds


def test_zero_rounds_is_random(diag2):
    inst = gen_euclidean(6, 3, 4)
    assert exact_rsd_expectation(inst, 0) == pytest.approx(exact_random_expectation(inst), rel=1e-12)


def test_random_examples(diag2):
    assert exact_random_expectation(diag2) == 3
    assert exact_random_expectation(gen_figure2(3)) == pytest.approx(11 / 3)
    assert exact_random_expectation(Instance([[0.25]])) == 0.25


def test_brute_force_examples(diag2):
    assert brute_force_opt(diag2) == 4
    assert brute_force_opt(Instance([[9.0]])) == 9
    inst = Instance(np.random.default_rng(6).random((6, 6)))
    assert brute_force_opt(inst) == pytest.approx(opt_matching(inst)[1], abs=1e-12)


def test_sandwich():
    for s in range(20):
        inst = gen_metric_closure(6, s)
        lo, hi = min_matching(inst)[1], opt_matching(inst)[1]
        assert lo - 1e-12 <= exact_random_expectation(inst) <= hi + 1e-12
        assert lo - 1e-12 <= exact_rsd_expectation(inst) <= hi + 1e-12


def test_size_limits():
    with pytest.raises(ValueError):
        brute_force_opt(Instance(np.ones((11, 11))))
    with pytest.raises(ValueError):
        exact_rsd_expectation(Instance(np.ones((13, 13))))
    with pytest.raises(ValueError):
        exact_rsd_expectation(Instance(np.ones((3, 3))), rounds=4)


def test_enumeration_residual_average():
    total, rounds, avg = rsd_order_enumeration(Instance(np.ones((4, 4))), 2)
    assert total == 4 and rounds == [1, 1] and avg == 1
    assert math.isnan(rsd_order_enumeration(Instance(np.ones((3, 3))))[2])
