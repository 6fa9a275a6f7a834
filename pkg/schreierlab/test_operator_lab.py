import os
from fractions import Fraction

import pytest

from schreierlab.errors import LabError
from schreierlab import operator_lab
from schreierlab.params import load_param_system
from schreierlab.vectors import Vec00
from schreierlab.trees import leaf_tree
from schreierlab.norm_engine import NormEngine
from schreierlab.averages import build_family
from schreierlab.operator_lab import (build_operator, apply, certify_norm_bound,
                                     dual_lp_check, combination_member,
                                     kernel_check, band_decomposition,
                                     noncompact_witness, linf_embed)
from schreierlab.randomized import random_vector, random_tree
from schreierlab.seeds import get_rng

F = Fraction
HERE = os.path.dirname(os.path.abspath(__file__))
RELAXED = os.path.join(HERE, 'test', 'relaxed.yaml')
LADDER = os.path.join(HERE, 'test', 'ladder.yaml')


@pytest.fixture(scope='module')
def operator():
    sys = load_param_system(RELAXED)
    family = build_family(sys, 4, F(1, 2), 2)
    return build_operator(sys, family)


def _corpus(seed, count=8):
    rng = get_rng(seed)
    return [random_vector(rng, 16, 46, 8) for _ in range(count)]


def test_build_operator(operator):
    T = operator
    assert T.indices == [1, 2]
    assert T.functional(1).support == tuple(range(18, 27))
    assert T.functional(2).support == tuple(range(36, 45))
    assert T.bound == 1
    assert T.M == T.sys.M
    with pytest.raises(LabError) as e:
        build_operator(T.sys, build_family(T.sys, 1, F(1, 2), 2))
    assert e.value.code == 'INSUFFICIENT_FUNCTIONALS'


def test_apply(operator):
    T = operator
    assert apply(T, Vec00.basis(20)) == Vec00({1: F(1, 3 * 1024)})
    assert apply(T, Vec00.basis(40)) == Vec00({2: F(1, 3 * 2**40)})
    assert apply(T, Vec00.basis(9)).is_zero()
    x, y = Vec00({20: 1, 40: 2}), Vec00({21: F(-1, 2), 38: 3})
    assert apply(T, x + 3 * y) == apply(T, x) + 3 * apply(T, y)


def test_certify_norm_bound(operator, seed):
    T = operator
    report = certify_norm_bound(T, _corpus(seed))
    assert report['holds'], report['violations']
    assert report['max_ratio'] <= T.bound
    with pytest.raises(ValueError):
        certify_norm_bound(T, [Vec00()])


def test_certify_regrouped_family(seed):
    sys = load_param_system(LADDER)
    T = build_operator(sys, build_family(sys, 4, F(9, 10), 2))
    # y_1^* = x_2^* sits on 20..100 and y_2^* = x_4^* on 357..981
    assert T.functional(2).root.weight_index == 4
    assert apply(T, Vec00.basis(50)) == Vec00({1: F(1, 9 * 2**20)})
    assert apply(T, Vec00.basis(400)) == Vec00({2: F(1, 25 * 2**400)})
    rng = get_rng(seed)
    corpus = [random_vector(rng, 20, 981, 6) for _ in range(3)]
    report = certify_norm_bound(T, corpus)
    assert report['holds'], report['violations']
    assert report['max_ratio'] <= T.bound
    assert not report['hypotheses_hold']


def test_dual_check(operator):
    T = operator
    x = Vec00({j: 1 for j in range(18, 27)})
    check = dual_lp_check(T, x, [1, 2])
    assert check['admissible']
    assert check['holds']


def test_combination_member(operator):
    report = combination_member(operator, [1, 2], [F(3, 5), F(4, 5)])
    assert report['valid'], report['violations']


def test_kernel(operator):
    report = kernel_check(operator, range(1, 60))
    assert report['holds']
    assert report['checked'] == 59 - 18


def test_bands(operator, seed):
    T = operator
    rng = get_rng(seed)
    corpus = _corpus(seed, 5)
    engine = NormEngine(T.sys)
    for draw in range(10):
        xstar = random_tree(rng, T.sys, start=int(rng.randint(1, 30)))
        report = band_decomposition(T, xstar, corpus[draw % len(corpus)],
                                    engine)
        assert report['holds'], report['parts']
        assert all(p['contribution'] <= p['bound'] for p in report['parts'])
        assert report['bound_total'] <= report['allowed']
        assert abs(report['value']) <= sum(p['contribution']
                                           for p in report['parts'])


def test_bands_catch_inflated_operator(operator, monkeypatch):
    T = operator
    x = Vec00({j: F(1, 3) for j in range(18, 27)})
    report = band_decomposition(T, leaf_tree(1), x)
    assert report['value'] == F(1, 1024)
    assert report['holds']
    assert [p['k'] for p in report['parts']] == [0]
    exact = operator_lab.apply
    monkeypatch.setattr(operator_lab, 'apply',
                        lambda T, x: 10**6 * exact(T, x))
    report = band_decomposition(T, leaf_tree(1), x)
    assert report['value'] == F(10**6, 1024)
    assert not report['holds']
    assert not report['parts'][0]['holds']
    assert abs(report['value']) > report['allowed']


def test_noncompact_witness(operator):
    T = operator
    report = noncompact_witness(T, 2)
    assert report['holds']
    assert report['disjoint_images']
    assert report['delta'] >= F(3, 1024)
    assert report['images'][0] == Vec00({1: F(3, 1024)})
    with pytest.raises(LabError) as e:
        noncompact_witness(T, 3)
    assert e.value.code == 'INSUFFICIENT_FUNCTIONALS'


def test_linf_embed(operator, seed):
    T = operator
    corpus = _corpus(seed, 4)
    for a in [(1, -1), (F(1, 2), 1)]:
        report = linf_embed(T, a, corpus)
        assert report['holds']
        assert report['c'] == F(3, 2**40)
    zero = linf_embed(T, (0, 0), corpus)
    assert zero['holds'] and zero['op_norm_upper'] == 0
    with pytest.raises(LabError):
        linf_embed(T, (1, 1, 1), corpus)
