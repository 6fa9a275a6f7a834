from fractions import Fraction

import pytest

from schreierlab.params import load_param_system
from schreierlab.trees import validate_tree, evaluate, Leaf
from schreierlab.vectors import Vec00
from schreierlab.norm_engine import (NormEngine, norm, norm_interval,
                                     holder_optimal_coefficients,
                                     certificate_value, block_estimates)
from schreierlab.randomized import random_vector, random_block_sequence, \
    random_rational
from schreierlab.seeds import get_rng

F = Fraction


def test_basis_vector(params_path):
    sys = load_param_system(params_path)
    result = norm(Vec00.basis(5), sys)
    assert result.value == 1
    assert result.upper == 1
    assert result.gap == 0
    assert result.certificate.root == Leaf(1, 5)


def test_small_vector(params_path):
    sys = load_param_system(params_path)
    x = Vec00({3: F(1, 2), 7: -1})
    result = norm(x, sys)
    assert result.value == 1 and result.upper == 1
    assert certificate_value(result, x, sys) == 1
    assert validate_tree(result.certificate, sys).valid
    assert norm_interval(x, (1, 4), sys).value == F(1, 2)
    assert norm_interval(x, (8, 9), sys).value == 0


def test_zero_vector(params_path):
    sys = load_param_system(params_path)
    engine = NormEngine(sys)
    with pytest.raises(ValueError):
        engine.norm(Vec00())
    assert engine.norm_lower(Vec00()) == 0
    assert engine.norm_upper(Vec00()) == 0


def test_holder_coefficients():
    assert holder_optimal_coefficients([3, 4], 2) == [F(3, 5), F(4, 5)]
    assert holder_optimal_coefficients([0, 0], 2) == [0, 0]


def test_even_class_certificate(params_path):
    sys = load_param_system(params_path)
    x = Vec00({2: 1, 3: 1})
    engine = NormEngine(sys, prune=False)
    result = engine.norm(x)
    assert result.value == 1
    # two leaves under one m_2 node: sqrt(2)/1024
    assert F(1414, 1000 * 1024) < result.evenClassValue < F(1415, 1000 * 1024)
    table = engine.table(x)
    value, cert = table.W[1][(0, table.N)]
    assert value == result.evenClassValue
    assert cert.root.weight_index == 2
    assert validate_tree(cert, sys).valid
    assert evaluate(cert, x, sys) == value


def test_certificates_unpruned(params_path, seed):
    sys = load_param_system(params_path)
    rng = get_rng(seed)
    engine = NormEngine(sys, depth=3, prune=False)
    for _ in range(10):
        x = random_vector(rng, 2, 12, 4)
        result = engine.norm(x)
        assert validate_tree(result.certificate, sys).valid
        assert certificate_value(result, x, sys) == result.value
        assert x.linf() <= result.value <= result.upper
        table = engine.table(x)
        for c in table.W:
            value, cert = table.W[c][(0, table.N)]
            if cert is not None:
                assert validate_tree(cert, sys).valid
                assert evaluate(cert, x, sys) == value


def test_block_estimates(params_path, seed):
    sys = load_param_system(params_path)
    engine = NormEngine(sys)
    est = block_estimates([Vec00.basis(3), Vec00.basis(5)], [1, 1], sys, engine)
    assert est['lower_hypothesis']
    assert est['lower_holds'] and est['upper_holds']
    rng = get_rng(seed)
    for _ in range(10):
        blocks = random_block_sequence(rng, int(rng.randint(1, 4)),
                                       int(rng.randint(1, 6)), 4)
        coeffs = [random_rational(rng) for _ in blocks]
        est = block_estimates(blocks, coeffs, sys, engine)
        assert est['lower_holds'] and est['upper_holds'], est


def test_tail_classes(params_path):
    sys = load_param_system(params_path)
    x = Vec00({3: F(1, 2), 7: -1})
    table = NormEngine(sys).table(x)
    root = (0, table.N)
    # even classes past K weigh at least m_4; n_5 is missing, so m_5 bounds
    # the odd classes without a table
    assert table.tail_even[root] == F(3, 2) / 2**20
    assert table.tail_odd[root] == 3 / F(2**100)
    assert table.tail[root] == F(3, 2**21)
    assert table.U[root] >= table.tail[root]
    assert norm(x, sys).upper == 1
