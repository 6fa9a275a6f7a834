import os
from fractions import Fraction

import pytest
from yaml import load, Loader

from schreierlab.errors import LabError
from schreierlab.params import load_param_system, param_system_from_doc
from schreierlab.schreier import is_member
from schreierlab.trees import validate_tree, evaluate, coefficients
from schreierlab.averages import (build_average, verify_average, build_xk,
                                  flat_value, build_family, combination_tree,
                                  verify_upper_lqw, seminorm_lower,
                                  seminorm_witness, AverageBlock)
from schreierlab.decomposition import regroup_average
from schreierlab.randomized import random_vector
from schreierlab.seeds import get_rng

F = Fraction
HERE = os.path.dirname(os.path.abspath(__file__))
RELAXED = os.path.join(HERE, 'test', 'relaxed.yaml')
LADDER = os.path.join(HERE, 'test', 'ladder.yaml')


def _relaxed(**surrogate):
    with open(RELAXED, 'r') as f:
        doc = load(f, Loader=Loader)
    doc['pk_surrogate'].update({int(k): v for k, v in surrogate.items()})
    return param_system_from_doc(doc)


def test_single_level_average():
    sys = load_param_system(RELAXED)
    avg = build_average(sys, 1, F(1, 2), 2)
    assert avg.F == tuple(range(9, 18))
    assert set(avg.a.values()) == {F(1, 3)}
    assert avg.counts == (9,)
    assert avg.mass == F(1, 9)
    assert avg.delta == 0
    assert avg.strict_support_lower_bound == 1024**2
    report = verify_average(avg, sys)
    assert report['holds'], report['checks']
    avg = build_average(sys, 2, F(1, 4), 4)
    assert len(avg.F) == 25 and avg.F[0] == 25
    assert avg.mass < F(1, 16)


def test_two_level_counts():
    sys = _relaxed(**{'1': 2})
    assert sys.pk(1) == 2
    avg = build_average(sys, 1, None, 2, counts=(9, 9))
    assert avg.F == tuple(range(9, 90))
    assert set(avg.a.values()) == {F(1, 9)}
    assert avg.mass == F(5, 9)
    assert avg.heaviest == tuple(range(45, 90))
    assert avg.eps**2 > F(5, 9)
    assert avg.eps < F(746, 1000)
    assert verify_average(avg, sys)['holds']
    with pytest.raises(LabError) as e:
        build_average(sys, 1, F(1, 2), 2, counts=(9, 9))
    assert e.value.code == 'EPS_INFEASIBLE_AT_BUDGET'
    with pytest.raises(ValueError):
        build_average(sys, 1, F(1, 2), 2, counts=(9,))


def test_desk_averages_infeasible(params_path):
    sys = load_param_system(params_path)
    with pytest.raises(LabError) as e:
        build_average(sys, 1, F(1, 2), 2, budget=2000)
    assert e.value.code == 'EPS_INFEASIBLE_AT_BUDGET'
    with pytest.raises(ValueError):
        build_average(sys, 2, F(1, 2), 3)


def test_verify_rejects_heavy_block():
    sys = load_param_system(RELAXED)
    avg = build_average(sys, 1, F(1, 2), 2)
    avg.eps = F(1, 3)
    report = verify_average(avg, sys)
    assert not report['checks']['small_on_S_pk_minus_1']
    assert not report['holds']


def test_build_xk(seed):
    sys = load_param_system(RELAXED)
    avg = build_average(sys, 1, F(1, 2), 2)
    xk = build_xk(sys, avg)
    assert validate_tree(xk, sys).valid
    assert xk.root.weight_index == 2
    assert coefficients(xk, sys) == {j: F(1, 3 * 1024) for j in avg.F}
    rng = get_rng(seed)
    for _ in range(10):
        x = random_vector(rng, 5, 20, 8)
        assert evaluate(xk, x, sys) == flat_value(avg, x, sys)


def test_build_xk_desk(params_path):
    sys = load_param_system(params_path)
    # a hand-made two-element block at k = 2; desk averages are out of reach
    avg = AverageBlock(k=2, F=(4, 5), a={4: F(3, 5), 5: F(4, 5)}, eps=F(1),
                       levels=17, counts=(), mass=F(16, 25), delta=F(0),
                       strict_support_lower_bound=0, q=sys.q)
    xk = build_xk(sys, avg)
    assert validate_tree(xk, sys).valid
    assert coefficients(xk, sys) == {4: F(3, 5) / 2**20, 5: F(4, 5) / 2**20}


def test_family_and_combinations(seed):
    sys = load_param_system(RELAXED)
    family = build_family(sys, 4, F(1, 2), 2)
    assert [m.k for m in family] == [1, 2, 3, 4]
    assert [m.support[0] for m in family] == [9, 18, 27, 36]
    for m in family:
        assert validate_tree(m.functional, sys).valid
    tree = combination_tree(sys, family[1:3], [F(3, 5), F(4, 5)], 2)
    assert validate_tree(tree, sys).valid
    expected = {}
    for m, b in zip(family[1:3], [F(3, 5), F(4, 5)]):
        for j, v in m.average.a.items():
            expected[j] = b * v / sys.weight(2 * m.k)
    assert coefficients(tree, sys) == expected
    with pytest.raises(LabError) as e:
        combination_tree(sys, family[1:3], [1, 1], 2)
    assert e.value.code == 'BALL_VIOLATION'
    report = verify_upper_lqw(family, sys, 10, seed)
    assert report['holds'], report['failures']
    assert report['trials'] == 10


def test_seminorm_lower():
    sys = load_param_system(RELAXED)
    avg = build_average(sys, 1, F(1, 2), 2)
    x = seminorm_witness(avg, sys)
    assert set(x.values()) == {F(1, 3)}
    bound = seminorm_lower(avg, sys)
    assert bound.value == F(1, 1024)
    assert bound.upper == F(1, 3)
    assert bound.bound == F(3, 1024)
    assert bound.inequality_holds
    assert is_member(avg.F, sys.pk(1))


@pytest.fixture(scope='module')
def ladder():
    sys = load_param_system(LADDER)
    return sys, build_family(sys, 4, F(9, 10), 2)


def test_ladder_family(ladder, seed):
    sys, family = ladder
    starts = [4, 20, 101, 357]
    ends = [19, 100, 356, 981]
    assert [m.average.F[0] for m in family] == starts
    assert [m.average.F[-1] for m in family] == ends
    assert [m.average.counts for m in family] == [(4, 4), (9, 9), (16, 16),
                                                  (25, 25)]
    # x_3^* and x_4^* only fit N regrouped at m_4
    assert [m.functional.root.weight_index for m in family] == [2, 4, 4, 4]
    rng = get_rng(seed)
    for m in family:
        avg = m.average
        assert set(avg.a.values()) == {F(1, (m.k + 1)**2)}
        assert validate_tree(m.functional, sys).valid
        assert coefficients(m.functional, sys) == {
            j: v / sys.weight(2 * m.k) for j, v in avg.a.items()}
        x = random_vector(rng, avg.F[0], avg.F[-1] + 1, 8)
        assert evaluate(m.functional, x, sys) == flat_value(avg, x, sys)


def test_ladder_first_level(ladder):
    sys, family = ladder
    avg = family[1].average
    tree = regroup_average(sys, avg.F, avg.a, 2, 1)
    assert validate_tree(tree, sys).valid
    assert tree.root.weight_index == 2
    assert coefficients(tree, sys) == coefficients(family[1].functional, sys)


def test_ladder_combination(ladder):
    sys, family = ladder
    betas = [F(1, 3), F(2, 3), F(-2, 3)]
    tree = combination_tree(sys, family[1:], betas, 2)
    assert tree.root.weight_index == 4
    assert validate_tree(tree, sys).valid
    expected = {}
    for m, b in zip(family[1:], betas):
        for j, v in m.average.a.items():
            expected[j] = b * v / sys.weight(2 * m.k)
    assert coefficients(tree, sys) == expected
    with pytest.raises(LabError) as e:
        combination_tree(sys, family[1:], [1, 1, 1], 2)
    assert e.value.code == 'BALL_VIOLATION'
