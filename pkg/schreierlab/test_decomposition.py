import os
from fractions import Fraction

import pytest

from schreierlab.errors import LabError
from schreierlab.params import load_param_system, build_param_system
from schreierlab.schreier import is_member, validate_witness
from schreierlab.trees import (Leaf, Node, FunctionalTree, leaf_tree,
                               validate_tree, coefficients)
from schreierlab.decomposition import (flatten, antichain_admissibility,
                                       decompose, recombine,
                                       large_coefficient_set, compose_scaled,
                                       regroup_parts, regroup_average)
from schreierlab.averages import build_xk, AverageBlock
from schreierlab.randomized import random_tree
from schreierlab.seeds import get_rng

F = Fraction
HERE = os.path.dirname(os.path.abspath(__file__))
RELAXED = os.path.join(HERE, 'test', 'relaxed.yaml')
DESK_K3 = os.path.join(HERE, 'test', 'desk_k3.yaml')


def _sample_tree():
    inner = Node(2, ((F(1, 2), Leaf(1, 5)), (F(1, 2), Leaf(-1, 6))))
    return FunctionalTree(Node(2, ((F(1, 2), Leaf(1, 4)), (F(1, 2), inner))))


def test_flatten(params_path):
    sys = load_param_system(params_path)
    t = _sample_tree()
    terms = flatten(t, [(0,), (1,)], sys)
    assert [c for c, _ in terms] == [F(1, 2048), F(1, 2048)]
    total = {}
    for c, part in terms:
        for j, v in coefficients(part, sys).items():
            total[j] = total.get(j, 0) + c * v
    assert total == coefficients(t, sys)
    with pytest.raises(LabError) as e:
        flatten(t, [(0,)], sys)
    assert e.value.code == 'INVALID_ANTICHAIN'
    with pytest.raises(LabError) as e:
        flatten(t, [(1,), (1, 0), (0,)], sys)
    assert e.value.code == 'INVALID_ANTICHAIN'


def test_antichain_admissibility(params_path):
    sys = load_param_system(params_path)
    t = _sample_tree()
    cert = antichain_admissibility(t, [(0,), (1, 0), (1, 1)], sys)
    assert cert.d == 12
    assert cert.minima == (4, 5, 6)
    assert validate_witness(cert.witness, cert.minima) == []
    assert is_member(cert.minima, cert.d)


def test_decompose_sample(params_path):
    sys = load_param_system(params_path)
    t = _sample_tree()
    result = decompose(t, 2, sys)
    assert result.certified, result.checks
    assert len(result.I1) == 1 and len(result.I2) == 2
    assert recombine(result.terms, sys) == coefficients(t, sys)
    # the root's children already reach m_2, so k = 1 leaves I1 empty
    result = decompose(t, 1, sys)
    assert result.I1 == []
    assert result.certified
    with pytest.raises(LabError) as e:
        decompose(FunctionalTree(Leaf(1, 3)), 2, sys)
    assert e.value.code == 'SUPPORT_TOO_LOW'


def test_decompose_random(params_path, seed):
    sys = load_param_system(params_path)
    rng = get_rng(seed)
    for _ in range(20):
        k = int(rng.randint(1, sys.K + 1))
        t = random_tree(rng, sys, start=2 * k + int(rng.randint(0, 4)))
        result = decompose(t, k, sys)
        assert result.certified, (t, result.checks)
        assert all(lam >= 0 for lam, _ in result.terms)
        assert is_member(large_coefficient_set(t, k, sys), sys.pk(k) - 1)


def test_compose_scaled(params_path):
    sys = load_param_system(params_path)
    tree = compose_scaled(sys, [1], [leaf_tree(3), leaf_tree(5)],
                          [F(3, 5), F(-4, 5)])
    assert validate_tree(tree, sys).valid
    assert coefficients(tree, sys) == {3: F(3, 5 * 1024), 5: F(-4, 5 * 1024)}
    with pytest.raises(LabError) as e:
        compose_scaled(sys, [1], [leaf_tree(3), leaf_tree(5)], [1, 1])
    assert e.value.code == 'BALL_VIOLATION'
    with pytest.raises(LabError) as e:
        compose_scaled(sys, [0], [leaf_tree(3), leaf_tree(5)],
                       [F(1, 2), F(1, 2)])
    assert e.value.code == 'NOT_ADMISSIBLE'


def test_regroup_average(params_path):
    sys = load_param_system(params_path)
    a = {4: F(3, 5), 5: F(4, 5)}
    tree = regroup_average(sys, (4, 5), a, 2, 1)
    assert validate_tree(tree, sys).valid
    assert coefficients(tree, sys) == {j: v / sys.weight(4)
                                       for j, v in a.items()}


def test_regroup_relaxed():
    sys = load_param_system(RELAXED)
    F_ = tuple(range(27, 36))
    a = {j: F(1, 3) for j in F_}
    tree = regroup_average(sys, F_, a, 3, 1)
    assert validate_tree(tree, sys).valid
    assert tree.root.weight_index == 2
    assert coefficients(tree, sys) == {j: F(1, 3) / sys.weight(6) for j in F_}


def _tight_system():
    # p_1 = 5 and p_2 = 7, so x_2^* regroups at m_2 with S_1 pieces
    return build_param_system(4, [2, 3], {'odd1': 1, 'even': [1, 1],
                                          'oddRest': []}, '2', 2,
                              strict=False)


def test_regroup_at_first_level():
    sys = _tight_system()
    assert (sys.pk(1), sys.pk(2)) == (5, 7)
    F_ = (2, 3, 4)
    a = {2: F(3, 10), 3: F(2, 5), 4: F(1, 2)}
    parts = regroup_parts(sys, F_, a, 2, 1)
    assert [c for c, _ in parts] == [F(1, 2), F(1, 2)]
    assert [z.support for _, z in parts] == [(2, 3), (4,)]
    tree = regroup_average(sys, F_, a, 2, 1)
    assert validate_tree(tree, sys).valid
    assert tree.root.weight_index == 2
    assert coefficients(tree, sys) == {j: v / 2**20 for j, v in a.items()}
    with pytest.raises(LabError) as e:
        regroup_parts(sys, F_, a, 2, 3)
    assert e.value.code == 'NOT_ADMISSIBLE'


def test_build_xk_searches_levels():
    sys = _tight_system()
    a = {2: F(3, 10), 3: F(2, 5), 4: F(1, 2)}
    # F is too large for S_{n_4}, so x_2^* needs the level-1 regrouping
    assert not is_member((2, 3, 4), sys.n(4))
    avg = AverageBlock(k=2, F=(2, 3, 4), a=a, eps=F(1), levels=7, counts=(),
                       mass=F(1, 2), delta=F(0),
                       strict_support_lower_bound=0, q=sys.q)
    xk = build_xk(sys, avg)
    assert validate_tree(xk, sys).valid
    assert xk.root.weight_index == 2
    assert coefficients(xk, sys) == {j: v / 2**20 for j, v in a.items()}


def test_decompose_third_level(seed):
    sys = load_param_system(DESK_K3)
    assert sys.K == 3 and 4 * sys.f(3) < sys.n(6)
    rng = get_rng(seed)
    for _ in range(10):
        t = random_tree(rng, sys, start=6 + int(rng.randint(0, 4)))
        result = decompose(t, 3, sys)
        assert result.certified, (t, result.checks)
        assert recombine(result.terms, sys) == coefficients(t, sys)
        assert is_member(large_coefficient_set(t, 3, sys), sys.pk(3) - 1)
