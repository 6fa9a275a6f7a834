import json
import os
from fractions import Fraction

from schreierlab.lab import run, parse_vector, parse_set
from schreierlab.suite import run_suite, check_schreier_oracle
from schreierlab.vectors import Vec00

HERE = os.path.dirname(os.path.abspath(__file__))
RELAXED = os.path.join(HERE, 'test', 'relaxed.yaml')


def _run(argv, tmp_path):
    out = str(tmp_path / 'report.json')
    code = run(['-quiet', '-out', out] + argv)
    with open(out, 'r') as f:
        return code, json.load(f)


def test_parsers():
    assert parse_vector('3:1/2,5:-1') == Vec00({3: Fraction(1, 2), 5: -1})
    assert parse_set('5,3,4') == (3, 4, 5)


def test_usage_errors(tmp_path):
    assert run([]) == 2
    assert run(['-quiet', 'no-such-command']) == 2
    assert run(['-quiet', 'schreier', 'member', '-set', '1,2']) == 2
    code, report = _run(['schreier', 'mass', '-set', '3,4', '-n', '1'],
                        tmp_path)
    assert code == 2
    assert report['error']['code'] == 'USAGE'


def test_validate_params(params_path, tmp_path):
    code, report = _run(['validate-params', params_path], tmp_path)
    assert code == 0
    assert report['passed']
    assert report['m']['2'] == 1024
    assert report['derived']['f']['2'] == 10
    assert report['derived']['pk']['2'] == 17


def test_stdout_report(params_path, capsys):
    code = run(['validate-params', params_path])
    captured = capsys.readouterr()
    assert code == 0
    report = json.loads(captured.out)
    assert report['command'] == 'validate-params'
    assert report['derived']['pk']['2'] == 17
    assert 'schreierlab validate-params' in captured.err


def test_schreier_commands(tmp_path):
    code, report = _run(['schreier', 'member', '--set', '3,4,5', '--n', '1'],
                        tmp_path)
    assert code == 0 and report['member']
    code, report = _run(['schreier', 'split', '-set', '2,3,4,5,6,7,8',
                         '-n', '1'], tmp_path)
    assert report['pieces'] == [[2, 3], [4, 5, 6, 7], [8]]
    code, report = _run(['schreier', 'mass', '-set', '1,2,3,4,5', '-n', '1',
                         '-weights', '1,1,1,1,1'], tmp_path)
    assert report['mass'] == '3' and report['G'] == [3, 4, 5]


def test_norm_command(params_path, tmp_path):
    code, report = _run(['norm', params_path, '-vector', '3:1/2,7:-1'],
                        tmp_path)
    assert code == 0
    assert report['result']['value'] == '1'
    assert report['result']['upper'] == '1'


def test_build_averages_command(tmp_path, params_path):
    code, report = _run(['build-averages', RELAXED, '-k', '1', '-eps', '1/2',
                         '-start', '2'], tmp_path)
    assert code == 0
    assert report['average']['F'] == list(range(9, 18))
    assert report['validation']['valid']
    assert not report['hypotheses_hold']
    code, report = _run(['build-averages', params_path, '-k', '1', '-eps',
                         '1/2', '-start', '2', '-budget', '2000'], tmp_path)
    assert code == 1
    assert report['error']['code'] == 'EPS_INFEASIBLE_AT_BUDGET'


def test_operator_commands(tmp_path):
    flags = [RELAXED, '-count', '4', '-eps', '1/2']
    code, report = _run(['apply'] + flags + ['-vector', '20:1,40:1'], tmp_path)
    assert code == 0
    assert report['Tx'] == {'1': '1/3072', '2': '1/3298534883328'}
    code, report = _run(['witness'] + flags + ['-witnesses', '2'], tmp_path)
    assert code == 0 and report['holds']
    code, report = _run(['certify'] + flags + ['-trials', '5', '-size', '6',
                                               '-seed', '7'], tmp_path)
    assert code == 0 and report['holds']


def test_suite(tmp_path, seed):
    rdir = str(tmp_path / 'results')
    checks = ['schreier_oracle', 'family_properties']
    outcome = run_suite(rdir, seed, checks, 'unit', verbose=False)
    assert outcome == {name: True for name in checks}
    first = open(os.path.join(rdir, 'schreier_oracle_{}.json'.format(seed))).read()
    # existing reports are skipped
    assert run_suite(rdir, seed, checks, 'unit', verbose=False) == outcome
    run_suite(rdir, seed, checks[:1], 'unit', noskips=True, verbose=False)
    again = open(os.path.join(rdir, 'schreier_oracle_{}.json'.format(seed))).read()
    assert first == again
    assert check_schreier_oracle(seed, 'unit')['holds']
