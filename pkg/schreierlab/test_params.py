import os
from fractions import Fraction

import pytest

from schreierlab.errors import LabError
from schreierlab.params import (load_param_system, build_param_system,
                                param_report, verify_pk_bound,
                                verify_pk_budget, scale_exponents, exponent_of,
                                dump_param_system, Verdict, HYPOTHESES_NOTE)
from schreierlab.randomized import random_feasible_tuple
from schreierlab.seeds import get_rng

HERE = os.path.dirname(os.path.abspath(__file__))
RELAXED = os.path.join(HERE, 'test', 'relaxed.yaml')


def test_desk_values(params_path):
    print('loading', params_path)
    sys = load_param_system(params_path)
    assert sys.weight(1) == 4
    assert sys.weight(2) == 1024
    assert sys.weight(4) == 2**20
    assert sys.weight(3) == 1024**5
    assert sys.n(2) == 6 and sys.n(4) == 41 and sys.n(3) == 7
    assert sys.f(2) == 10
    assert sys.pk(1) == 5
    assert sys.pk(2) == 17
    assert sys.derived.f_witness[2] == (4, (1,))
    assert sys.M == sys.derived.M_truncated + sys.derived.M_tail
    assert Fraction(1, 2) < sys.M < Fraction(1, 2) + Fraction(13, 2**20)
    assert sys.operator_bound == 1
    assert sys.hypotheses_hold


def test_param_report(params_path):
    report = param_report(load_param_system(params_path))
    assert report['passed']
    assert report['m'][2] == 1024
    assert all(c['holds'] for c in report['checks'])
    assert verify_pk_bound(load_param_system(params_path))['holds']


def test_strict_violation():
    # 5 n_1 < n_2 fails
    with pytest.raises(LabError) as e:
        build_param_system(4, [2, 3], {'odd1': 2, 'even': [6, 41]}, '2', 2)
    assert e.value.code == 'STRICT_VIOLATION'
    with pytest.raises(LabError) as e:
        build_param_system(3, [2, 3], [1, 6, 41], '2', 2)
    assert e.value.code == 'STRICT_VIOLATION'


def test_unmaterialized_index(params_path):
    sys = load_param_system(params_path)
    with pytest.raises(LabError) as e:
        sys.weight(len(sys.weights) + 1)
    assert e.value.code == 'UNMATERIALIZED_INDEX'
    with pytest.raises(LabError):
        sys.n(5)


def test_relaxed_warnings():
    sys = load_param_system(RELAXED)
    assert not sys.hypotheses_hold
    assert HYPOTHESES_NOTE in sys.warnings
    assert sys.weight(4) == 1024 and sys.weight(6) == 2**20
    assert sys.f(2) == 4
    assert all(sys.pk(k) == 1 for k in range(1, 9))
    report = param_report(sys)
    assert report['passed']
    assert not all(c['holds'] for c in report['checks'])


def test_pk_budget(params_path, seed):
    sys = load_param_system(params_path)
    assert verify_pk_budget(sys, 2, 4, [1]) is Verdict.HOLDS
    assert verify_pk_budget(sys, 2, 10, [0]) is Verdict.VACUOUS
    rng = get_rng(seed)
    for _ in range(50):
        a, a_list = random_feasible_tuple(rng, sys, 2)
        assert verify_pk_budget(sys, 2, a, a_list) is Verdict.HOLDS


def test_scale_exponents(params_path):
    sys = load_param_system(params_path)
    assert scale_exponents(sys, 1, 2) == [1]
    assert scale_exponents(sys, 2, 2) == [0]
    assert exponent_of(sys, 4) == 10
    relaxed = load_param_system(RELAXED)
    for k0, k in [(1, 3), (2, 4), (1, 5)]:
        a = scale_exponents(relaxed, k0, k)
        prod = 1
        for l, al in enumerate(a, start=1):
            prod *= relaxed.weight(2 * l)**al
        assert relaxed.weight(2 * k0) * prod == relaxed.weight(2 * k)


def test_dump_reload(params_path, tmp_path):
    sys = load_param_system(params_path)
    path = str(tmp_path / 'params.yaml')
    dump_param_system(sys, path)
    again = load_param_system(path)
    assert again.weights == sys.weights
    assert again.derived.pk == sys.derived.pk
