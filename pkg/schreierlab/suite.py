"""Acceptance suite: seeded property checks, one JSON report per check.

    python -m schreierlab.suite -results results -seed 7 -n_jobs 4

Reports that already exist are skipped unless --noskips is given, so the same
command can be re-run after an interruption.
"""
import argparse
import itertools
import json
import os
from fractions import Fraction
from sys import stderr

from joblib import Parallel, delayed
from tqdm import tqdm

from .params import load_param_system, param_report, verify_pk_bound, \
    verify_pk_budget, Verdict
from .schreier import (is_member, brute_force_member, witness,
                       clear_brute_force_cache,
                       validate_witness, convolve_witnesses)
from .errors import LabError
from .trees import validate_tree, leaf_tree, evaluate, coefficients
from .decomposition import decompose, large_coefficient_set, compose_scaled
from .norm_engine import NormEngine, block_estimates, certificate_value
from .vectors import block_combination
from .averages import (build_family, verify_average, seminorm_lower,
                       combination_tree,
                       verify_upper_lqw, flat_value, random_ball_point)
from .operator_lab import (build_operator, certify_norm_bound,
                           noncompact_witness, linf_embed, kernel_check,
                           band_decomposition)
from .randomized import (random_subset, random_block_sequence, random_tree,
                         random_vector, random_feasible_tuple, random_rational)
from .seeds import get_rng, SEEDS
from .utils import jsonify

HERE = os.path.dirname(os.path.abspath(__file__))
DESK = os.path.join(HERE, 'test', 'desk.yaml')
RELAXED = os.path.join(HERE, 'test', 'relaxed.yaml')
LADDER = os.path.join(HERE, 'test', 'ladder.yaml')
DESK_K3 = os.path.join(HERE, 'test', 'desk_k3.yaml')

# trial counts per check; 'unit' keeps a run to seconds
SCALES = {
    'unit': {'oracle_top': 12, 'oracle_size': 5, 'oracle_jobs': 1,
             'family': 200, 'tuples': 200, 'compose': 10, 'blocks': 20,
             'trees': 20, 'combinations': 10, 'corpus': 20,
             'evaluations': 10},
    'full': {'oracle_top': 40, 'oracle_size': 8, 'oracle_jobs': -1,
             'family': 10**4, 'tuples': 10**4, 'compose': 100, 'blocks': 500,
             'trees': 200, 'combinations': 100, 'corpus': 200,
             'evaluations': 100},
}

# the oracle's memo is dropped after this many sets
ORACLE_CACHE_SETS = 10**5


def _summary(name, seed, cases, violations, **extra):
    report = {'check': name, 'seed': seed, 'cases': cases,
              'violations': violations, 'holds': not violations}
    report.update(extra)
    return report


def _oracle_chunk(top, size, first, max_n):
    """Every F in {first..top} with |F| = size and min F = first."""
    cases, mismatches = 0, []
    for count, rest in enumerate(
            itertools.combinations(range(first + 1, top + 1), size - 1), 1):
        F = (first,) + rest
        for n in range(max_n + 1):
            cases += 1
            if is_member(F, n) != brute_force_member(F, n):
                mismatches.append({'F': F, 'n': n})
        if count % ORACLE_CACHE_SETS == 0:
            clear_brute_force_cache()
    clear_brute_force_cache()
    return cases, mismatches


def oracle_grid(top, size, max_n=4, n_jobs=1):
    """Greedy membership against literal unfolding on every F of {1..top}
    with |F| <= size and every n <= max_n; returns (cases, mismatches).

    The grid is cut into chunks by (|F|, min F) and run in parallel.
    """
    cases = max_n + 1
    mismatches = [{'F': (), 'n': n} for n in range(max_n + 1)
                  if is_member((), n) != brute_force_member((), n)]
    chunks = [(s, first) for s in range(1, size + 1)
              for first in range(1, top - s + 2)]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_oracle_chunk)(top, s, first, max_n) for s, first in chunks)
    for chunk_cases, chunk_mismatches in results:
        cases += chunk_cases
        mismatches += chunk_mismatches
    return cases, mismatches


def check_schreier_oracle(seed, scale):
    """Greedy membership against literal unfolding, exhaustively."""
    counts = SCALES[scale]
    cases, mismatches = oracle_grid(counts['oracle_top'],
                                    counts['oracle_size'],
                                    n_jobs=counts['oracle_jobs'])
    return _summary('schreier_oracle', seed, cases, mismatches,
                    top=counts['oracle_top'], size=counts['oracle_size'])


def check_family_properties(seed, scale):
    """Hierarchy, spreading, convolution and subset closure."""
    rng = get_rng(seed)
    violations, cases = [], 0
    for draw in range(SCALES[scale]['family']):
        F = random_subset(rng, 60, 8)
        n = int(rng.randint(0, 4))
        if not is_member(F, n):
            continue
        cases += 1
        if not is_member(F, n + 1):
            violations.append({'draw': draw, 'property': 'hierarchy', 'F': F})
        shift = tuple(sorted(set(j + int(rng.randint(0, 5)) + i
                                 for i, j in enumerate(F))))
        if len(shift) == len(F) and not is_member(shift, n):
            violations.append({'draw': draw, 'property': 'spreading',
                               'F': F, 'G': shift})
        G = tuple(j for j in F if rng.rand() < 0.5)
        if not is_member(G, n):
            violations.append({'draw': draw, 'property': 'subset', 'F': F,
                               'G': G})
        # successive pieces of F at level n with minima at level m
        m = int(rng.randint(0, 3))
        pieces, start = [], F[-1] + 1 if F else 1
        for _ in range(int(rng.randint(1, 4))):
            P = tuple(range(start, start + int(rng.randint(1, 4))))
            if is_member(P, n):
                pieces.append(P)
            start += len(P) + int(rng.randint(0, 3))
        minima = tuple(P[0] for P in pieces)
        if pieces and is_member(minima, m):
            union = tuple(j for P in pieces for j in P)
            w = convolve_witnesses([witness(P, n) for P in pieces],
                                   witness(minima, m))
            if not is_member(union, n + m) or validate_witness(w, union):
                violations.append({'draw': draw, 'property': 'convolution',
                                   'pieces': pieces, 'n': n, 'm': m})
    return _summary('family_properties', seed, cases, violations)


def check_params(seed, scale, params=DESK):
    """Desk values, p_k <= 2 f_k, the p_k admissibility budget and composite trees."""
    sys = load_param_system(params)
    rng = get_rng(seed)
    counts = SCALES[scale]
    violations, cases = [], 0
    report = param_report(sys)
    if not report['passed']:
        violations.append({'property': 'conditions', 'checks': report['checks']})
    if not verify_pk_bound(sys)['holds']:
        violations.append({'property': 'p_k <= 2f_k'})
    for draw in range(counts['tuples']):
        k = int(rng.randint(2, sys.K + 1))
        a, a_list = random_feasible_tuple(rng, sys, k)
        cases += 1
        if verify_pk_budget(sys, k, a, a_list) is Verdict.FAILS:
            violations.append({'draw': draw, 'property': 'budget', 'k': k,
                               'a': a, 'a_list': a_list})
    for draw in range(counts['compose']):
        exponents = [int(rng.randint(0, 3)) for _ in range(sys.K - 1)]
        if not any(exponents):
            exponents[0] = 1
        budget = sum(e * sys.n(2 * l) for l, e in enumerate(exponents, 1))
        G = random_subset(rng, 60, 10)
        if not G or not is_member(G, budget):
            continue
        betas = random_ball_point(rng, len(G), sys.q)
        cases += 1
        tree = compose_scaled(sys, exponents, [leaf_tree(j) for j in G], betas)
        valid = validate_tree(tree, sys)
        if not valid.valid:
            violations.append({'draw': draw, 'property': 'composite',
                               'exponents': exponents, 'G': G,
                               'violations': valid.violations})
    return _summary('params', seed, cases, violations,
                    derived=sys.derived, warnings=list(sys.warnings))


def check_norm_estimates(seed, scale, params=DESK):
    """Lower 1/m_2 and upper 12 l_p estimates on normalized blocks."""
    sys = load_param_system(params)
    rng = get_rng(seed)
    engine = NormEngine(sys)
    violations, cases = [], 0
    for draw in range(SCALES[scale]['blocks']):
        count = int(rng.randint(1, 5))
        blocks = random_block_sequence(rng, count, int(rng.randint(1, 9)), 6)
        # sup norm one blocks are normalized once the engine closes the gap
        if any(engine.norm(b).upper != 1 for b in blocks):
            continue
        coeffs = [random_rational(rng) for _ in blocks]
        cases += 1
        est = block_estimates(blocks, coeffs, sys, engine)
        if not (est['lower_holds'] and est['upper_holds']):
            violations.append({'draw': draw, 'estimates': est})
        x = block_combination(blocks, coeffs)
        result = engine.norm(x)
        if certificate_value(result, x, sys) != result.value:
            violations.append({'draw': draw, 'property': 'certificate'})
    return _summary('norm_estimates', seed, cases, violations)


def check_decomposition(seed, scale, params=DESK_K3):
    """Split by weight on random trees for every k <= K, with the large
    coefficient sets."""
    sys = load_param_system(params)
    rng = get_rng(seed)
    violations, cases = [], 0
    for draw in range(SCALES[scale]['trees']):
        k = int(rng.randint(1, sys.K + 1))
        t = random_tree(rng, sys, start=2 * k + int(rng.randint(0, 4)))
        cases += 1
        result = decompose(t, k, sys)
        if not result.certified:
            violations.append({'draw': draw, 'k': k, 'tree': t,
                               'checks': result.checks})
        large = large_coefficient_set(t, k, sys)
        if not is_member(large, sys.pk(k) - 1):
            violations.append({'draw': draw, 'k': k, 'property': 'large set',
                               'set': large})
    return _summary('decomposition', seed, cases, violations)


def check_averages(seed, scale, params=RELAXED, ladder=LADDER):
    """Averages at eps 1/4 and 1/8, x_k^* membership and the seminorm bound,
    then the regrouped two-level family."""
    sys = load_param_system(params)
    rng = get_rng(seed)
    counts = SCALES[scale]
    engine = NormEngine(sys)
    violations, cases = [], 0
    for eps in (Fraction(1, 4), Fraction(1, 8)):
        family = build_family(sys, 2, eps, 2)
        for member in family:
            cases += 1
            report = verify_average(member.average, sys)
            if not report['holds']:
                violations.append({'eps': eps, 'k': member.k,
                                   'checks': report['checks']})
            valid = validate_tree(member.functional, sys)
            if not valid.valid:
                violations.append({'eps': eps, 'k': member.k,
                                   'violations': valid.violations})
            lo, hi = member.support[0], member.support[-1]
            for draw in range(counts['evaluations']):
                x = random_vector(rng, lo, hi, 8)
                if evaluate(member.functional, x, sys) != flat_value(
                        member.average, x, sys):
                    violations.append({'eps': eps, 'k': member.k,
                                       'draw': draw, 'property': 'evaluation'})
            bound = seminorm_lower(member.average, sys, engine)
            if not bound.inequality_holds:
                violations.append({'eps': eps, 'k': member.k,
                                   'seminorm': bound})
    family = build_family(sys, 4, Fraction(1, 4), 2)
    combos = verify_upper_lqw(family, sys, counts['combinations'], seed)
    cases += combos['trials']
    violations += combos['failures']
    deep_cases, deep_violations, roots = _regrouped_family(seed, counts,
                                                           ladder)
    return _summary('averages', seed, cases + deep_cases,
                    violations + deep_violations,
                    hypotheses_hold=sys.hypotheses_hold,
                    strict_support=[m.average.strict_support_lower_bound
                                    for m in family],
                    regrouped_roots=roots)


def _regrouped_family(seed, counts, params):
    """Two-level averages whose x_k^* need regrouping, and their
    combinations below m_4."""
    sys = load_param_system(params)
    rng = get_rng(seed)
    family = build_family(sys, 4, Fraction(9, 10), 2)
    violations, cases = [], 0
    for member in family:
        cases += 1
        valid = validate_tree(member.functional, sys)
        expected = {i: v / sys.weight(2 * member.k)
                    for i, v in member.average.a.items()}
        if not valid.valid or coefficients(member.functional, sys) != expected:
            violations.append({'params': params, 'k': member.k,
                               'violations': valid.violations})
        lo, hi = member.support[0], member.support[-1]
        x = random_vector(rng, lo, hi, 8)
        if evaluate(member.functional, x, sys) != flat_value(
                member.average, x, sys):
            violations.append({'params': params, 'k': member.k,
                               'property': 'evaluation'})
    for draw in range(counts['combinations']):
        betas = random_ball_point(rng, 3, sys.q)
        cases += 1
        try:
            tree = combination_tree(sys, family[1:], betas, 2)
        except LabError as e:
            violations.append({'params': params, 'draw': draw,
                               'error': e.to_doc()})
            continue
        expected = {i: b * v / sys.weight(2 * m.k)
                    for m, b in zip(family[1:], betas)
                    for i, v in m.average.a.items()}
        if not validate_tree(tree, sys).valid or coefficients(
                tree, sys) != expected:
            violations.append({'params': params, 'draw': draw,
                               'property': 'combination', 'betas': betas})
    roots = {m.k: m.functional.root.weight_index for m in family}
    return cases, violations, roots


def check_operator(seed, scale, params=RELAXED, ladder=LADDER):
    """Norm bound on a corpus, separated witnesses, sign-pattern embeddings
    and band bounds, then the norm bound for the operator built on the
    regrouped two-level family."""
    sys = load_param_system(params)
    rng = get_rng(seed)
    counts = SCALES[scale]
    engine = NormEngine(sys)
    family = build_family(sys, 8, Fraction(1, 4), 2)
    T = build_operator(sys, family)
    lo = min(T.functional(i).support[0] for i in T.indices)
    hi = max(T.functional(i).support[-1] for i in T.indices)
    corpus = [random_vector(rng, lo, hi, 24) for _ in range(counts['corpus'])]
    violations = []
    certified = certify_norm_bound(T, corpus)
    violations += [{'property': 'norm bound', 'record': r}
                   for r in certified['violations']]
    witness_report = noncompact_witness(T, 4, engine)
    if not witness_report['holds']:
        violations.append({'property': 'separation',
                           'delta': witness_report['delta']})
    patterns = 0
    for signs in range(16):
        a = [1 if signs >> b & 1 else -1 for b in range(4)]
        patterns += 1
        embedded = linf_embed(T, a, corpus[:5], engine)
        if not embedded['holds']:
            violations.append({'property': 'embedding', 'a': a})
    kernel = kernel_check(T, range(1, hi + 10))
    if not kernel['holds']:
        violations.append({'property': 'kernel', 'nonzero': kernel['nonzero']})
    for draw in range(counts['trees']):
        xstar = random_tree(rng, sys, start=1)
        bands = band_decomposition(T, xstar, corpus[draw % len(corpus)],
                                   engine)
        if not bands['holds']:
            violations.append({'property': 'bands', 'draw': draw,
                               'parts': bands['parts']})
    deep = load_param_system(ladder)
    deep_T = build_operator(deep, build_family(deep, 4, Fraction(9, 10), 2))
    lo = min(deep_T.functional(i).support[0] for i in deep_T.indices)
    hi = max(deep_T.functional(i).support[-1] for i in deep_T.indices)
    deep_corpus = [random_vector(rng, lo, hi, 6)
                   for _ in range(max(1, counts['corpus'] // 4))]
    deep_certified = certify_norm_bound(deep_T, deep_corpus)
    violations += [{'params': ladder, 'property': 'norm bound', 'record': r}
                   for r in deep_certified['violations']]
    return _summary('operator', seed,
                    len(corpus) + patterns + len(deep_corpus), violations,
                    M=T.M, max_ratio=certified['max_ratio'],
                    delta=witness_report['delta'],
                    regrouped_max_ratio=deep_certified['max_ratio'],
                    hypotheses_hold=sys.hypotheses_hold)


CHECKS = {
    'schreier_oracle': check_schreier_oracle,
    'family_properties': check_family_properties,
    'params': check_params,
    'norm_estimates': check_norm_estimates,
    'decomposition': check_decomposition,
    'averages': check_averages,
    'operator': check_operator,
}


def _run_check(name, seed, scale, save_file, verbose):
    if verbose:
        print(40 * '=', 'Running ' + name + ' with seed ' + str(seed), 40 * '=',
              sep='\n', file=stderr)
    report = CHECKS[name](seed, scale)
    report['scale'] = scale
    with open(save_file, 'w') as out:
        json.dump(jsonify(report), out, indent=4, sort_keys=True)
    if verbose:
        print('save_file:', save_file, 'holds:', report['holds'], file=stderr)
    return report


def run_suite(results_dir, seed=None, checks=None, scale='unit', n_jobs=1,
              noskips=False, verbose=True):
    """Run the named checks (all by default); returns {name: holds}."""
    seed = get_seed(seed)
    checks = checks or list(CHECKS)
    os.makedirs(results_dir, exist_ok=True)
    jobs = []
    outcome = {}
    for name in checks:
        if name not in CHECKS:
            raise ValueError('unknown check ' + name)
        save_file = os.path.join(results_dir, '{}_{}.json'.format(name, seed))
        if not noskips and os.path.exists(save_file):
            if verbose:
                print(save_file, 'already exists, skipping. Override with '
                      '--noskips.', file=stderr)
            with open(save_file, 'r') as f:
                outcome[name] = json.load(f)['holds']
            continue
        jobs.append((name, save_file))
    reports = Parallel(n_jobs=n_jobs)(
        delayed(_run_check)(name, seed, scale, save_file, verbose)
        for name, save_file in tqdm(jobs, disable=not verbose))
    for (name, _), report in zip(jobs, reports):
        outcome[name] = report['holds']
    return outcome


def get_seed(seed=None):
    return SEEDS[0] if seed is None else int(seed)


if __name__ == '__main__':
    parser = argparse.ArgumentParser(
        description='Run the acceptance suite.', add_help=False)
    parser.add_argument('-h', '--help', action='help',
                        help='Show this help message and exit.')
    parser.add_argument('-results', action='store', dest='RDIR',
                        default='results', type=str, help='Results directory')
    parser.add_argument('-seed', action='store', dest='SEED', default=None,
                        type=int, help='A specific random seed')
    parser.add_argument('-checks', action='store', dest='CHECKS', default=None,
                        type=str, help='Comma-separated list of checks')
    parser.add_argument('-scale', action='store', dest='SCALE', default='unit',
                        choices=list(SCALES), help='Trial counts to use')
    parser.add_argument('-n_jobs', action='store', dest='N_JOBS', default=1,
                        type=int, help='Number of parallel jobs')
    parser.add_argument('--noskips', action='store_true', dest='NOSKIPS',
                        default=False, help='Overwrite existing reports')
    args = parser.parse_args()
    outcome = run_suite(args.RDIR, args.SEED,
                        args.CHECKS.split(',') if args.CHECKS else None,
                        args.SCALE, args.N_JOBS, args.NOSKIPS)
    raise SystemExit(0 if all(outcome.values()) else 1)
