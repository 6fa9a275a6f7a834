"""Command line front end.

    python -m schreierlab.lab validate-params schreierlab/test/desk.yaml
    python -m schreierlab.lab schreier member -set 3,4,5 -n 1
    python -m schreierlab.lab norm PARAMS -vector 3:1/2,5:-1

Every subcommand writes one JSON report (stdout or -out) and exits 0 on
success, 1 when a certification fails and 2 on usage errors.
"""
import argparse
import json
import sys

from yaml import load, Loader

from .errors import LabError
from .params import load_param_system, param_report
from .schreier import (as_subset, is_member, witness, greedy_split,
                       max_admissible_mass)
from .trees import tree_from_doc, validate_tree
from .vectors import Vec00
from .norm_engine import NormEngine
from .decomposition import decompose
from .averages import (build_average, build_xk, build_family, verify_average,
                       seminorm_lower)
from .operator_lab import (build_operator, apply, certify_norm_bound,
                           noncompact_witness)
from .randomized import random_vector
from .seeds import get_rng
from .suite import run_suite, CHECKS, SCALES
from .utils import jsonify, parse_fraction

verbose = True


def log(*args, **kwargs):
    """Banners go to stderr; stdout carries only the report."""
    if verbose:
        print(*args, file=sys.stderr, **kwargs)


def parse_vector(text):
    """'3:1/2,5:-1' -> Vec00."""
    entries = {}
    for item in text.split(','):
        j, v = item.split(':')
        entries[int(j)] = parse_fraction(v)
    return Vec00(entries)


def parse_set(text):
    return as_subset(int(v) for v in text.split(',') if v.strip())


def _usage(message):
    raise LabError('USAGE', message)


###############################################################################
# subcommands
###############################################################################
def cmd_validate_params(args):
    sys_ = load_param_system(args.PARAMS)
    report = param_report(sys_)
    return report, report['passed']


def cmd_schreier(args):
    F = parse_set(args.SET)
    if args.ACTION == 'member':
        member = is_member(F, args.N)
        return {'set': F, 'n': args.N, 'member': member,
                'witness': witness(F, args.N)}, True
    if args.ACTION == 'split':
        return {'set': F, 'n': args.N, 'pieces': greedy_split(F, args.N)}, True
    if args.ACTION == 'mass':
        if not args.WEIGHTS:
            _usage('mass needs -weights')
        weights = [parse_fraction(v) for v in args.WEIGHTS.split(',')]
        if len(weights) != len(F):
            _usage('one weight per element')
        mass, G = max_admissible_mass(F, dict(zip(F, weights)), args.N)
        return {'set': F, 'n': args.N, 'mass': mass, 'G': G}, True
    _usage('unknown schreier action ' + args.ACTION)


def cmd_norm(args):
    sys_ = load_param_system(args.PARAMS)
    x = parse_vector(args.VECTOR)
    if x.is_zero():
        _usage('the zero vector has no norming certificate')
    engine = NormEngine(sys_, depth=args.DEPTH, tol=parse_fraction(args.TOL))
    result = engine.norm(x)
    return {'vector': x, 'result': result,
            'hypotheses_hold': sys_.hypotheses_hold}, True


def _read_doc(path):
    with open(path, 'r') as f:
        return load(f, Loader=Loader)


def cmd_decompose(args):
    sys_ = load_param_system(args.PARAMS)
    t = tree_from_doc(_read_doc(args.TREE))
    validation = validate_tree(t, sys_)
    if not validation.valid:
        return {'validation': validation}, False
    result = decompose(t, args.K, sys_)
    return {'decomposition': result,
            'comparison': validate_tree(t, sys_, comparison=2 * args.K),
            'hypotheses_hold': sys_.hypotheses_hold}, result.certified


def cmd_build_averages(args):
    sys_ = load_param_system(args.PARAMS)
    counts = ([int(c) for c in args.COUNTS.split(',')] if args.COUNTS
              else None)
    eps = parse_fraction(args.EPS) if args.EPS else None
    if eps is None and counts is None:
        _usage('build-averages needs -eps or -counts')
    avg = build_average(sys_, args.K, eps, args.START, counts=counts,
                        budget=args.BUDGET)
    xk = build_xk(sys_, avg)
    report = {'average': avg,
              'verification': verify_average(avg, sys_),
              'functional': xk,
              'validation': validate_tree(xk, sys_),
              'seminorm': seminorm_lower(avg, sys_),
              'hypotheses_hold': sys_.hypotheses_hold}
    return report, report['verification']['holds'] and report['validation'].valid


def _operator(args):
    sys_ = load_param_system(args.PARAMS)
    family = build_family(sys_, args.COUNT, parse_fraction(args.EPS),
                          args.START, verbose=verbose)
    return sys_, build_operator(sys_, family)


def cmd_build_operator(args):
    _, T = _operator(args)
    return {'operator': T}, True


def cmd_apply(args):
    _, T = _operator(args)
    x = parse_vector(args.VECTOR)
    return {'x': x, 'Tx': apply(T, x)}, True


def cmd_certify(args):
    _, T = _operator(args)
    rng = get_rng(args.SEED)
    lo = min(T.functional(i).support[0] for i in T.indices)
    hi = max(T.functional(i).support[-1] for i in T.indices)
    corpus = [random_vector(rng, lo, hi, args.SIZE) for _ in range(args.TRIALS)]
    report = certify_norm_bound(T, corpus, depth=args.DEPTH, n_jobs=args.N_JOBS)
    report['seed'] = args.SEED
    return report, report['holds']


def cmd_witness(args):
    _, T = _operator(args)
    report = noncompact_witness(T, args.WITNESSES)
    return report, report['holds']


def cmd_suite(args):
    checks = list(CHECKS) if args.ALL or not args.CHECKS else \
        args.CHECKS.split(',')
    outcome = run_suite(args.RDIR, args.SEED, checks, args.SCALE, args.N_JOBS,
                        args.NOSKIPS, verbose=verbose)
    return {'seed': args.SEED, 'results': args.RDIR, 'checks': outcome}, \
        all(outcome.values())


###############################################################################
# argument parsing
###############################################################################
def _subparser(subparsers, name, handler, description, params=True):
    p = subparsers.add_parser(name, description=description, add_help=False)
    p.add_argument('-h', '--help', action='help',
                   help='Show this help message and exit.')
    if params:
        p.add_argument('PARAMS', type=str,
                       help='Parameter system document (YAML)')
    p.set_defaults(HANDLER=handler)
    return p


def _operator_flags(p):
    p.add_argument('-count', action='store', dest='COUNT', default=8, type=int,
                   help='Number of functionals x_k^* to build')
    p.add_argument('-eps', action='store', dest='EPS', default='1/4', type=str,
                   help='Smallness level of every average')
    p.add_argument('-start', action='store', dest='START', default=2, type=int,
                   help='Smallest support element of the family')


def build_parser():
    parser = argparse.ArgumentParser(
        description='Laboratory for Schreier-type norming sets.',
        add_help=False)
    parser.add_argument('-h', '--help', action='help',
                        help='Show this help message and exit.')
    parser.add_argument('-out', action='store', dest='OUT', default=None,
                        type=str, help='Write the report here instead of stdout')
    parser.add_argument('-quiet', action='store_true', dest='QUIET',
                        default=False, help='No progress lines')
    subparsers = parser.add_subparsers(dest='COMMAND')

    _subparser(subparsers, 'validate-params', cmd_validate_params,
               'Check every growth condition and report m_i, f_j, p_k, M.')

    p = _subparser(subparsers, 'schreier', cmd_schreier,
                   'Schreier family queries.', params=False)
    p.add_argument('ACTION', choices=['member', 'split', 'mass'])
    p.add_argument('-set', '--set', action='store', dest='SET', required=True,
                   type=str, help='Comma-separated elements')
    p.add_argument('-n', '--n', action='store', dest='N', required=True,
                   type=int, help='Family level')
    p.add_argument('-weights', action='store', dest='WEIGHTS', default=None,
                   type=str, help='Comma-separated weights for mass')

    p = _subparser(subparsers, 'norm', cmd_norm, 'Norm of a finite vector.')
    p.add_argument('-vector', action='store', dest='VECTOR', required=True,
                   type=str, help='Entries like 3:1/2,5:-1')
    p.add_argument('-depth', action='store', dest='DEPTH', default=4, type=int,
                   help='Maximum number of iterations')
    p.add_argument('-tol', action='store', dest='TOL', default='0', type=str,
                   help='Stop once upper - lower is at most this')

    p = _subparser(subparsers, 'decompose', cmd_decompose,
                   'Split a functional tree at the weight m_2k.')
    p.add_argument('-tree', action='store', dest='TREE', required=True,
                   type=str, help='Functional tree document')
    p.add_argument('-k', action='store', dest='K', required=True, type=int)

    p = _subparser(subparsers, 'build-averages', cmd_build_averages,
                   'Build an average and its functional x_k^*.')
    p.add_argument('-k', action='store', dest='K', required=True, type=int)
    p.add_argument('-eps', action='store', dest='EPS', default=None, type=str)
    p.add_argument('-start', action='store', dest='START', required=True,
                   type=int)
    p.add_argument('-counts', action='store', dest='COUNTS', default=None,
                   type=str, help='Comma-separated block counts per level')
    p.add_argument('-budget', action='store', dest='BUDGET', default=10**4,
                   type=int, help='Largest support to try')

    p = _subparser(subparsers, 'build-operator', cmd_build_operator,
                   'Build T from the even functionals of a family.')
    _operator_flags(p)

    p = _subparser(subparsers, 'apply', cmd_apply, 'Apply T to a vector.')
    _operator_flags(p)
    p.add_argument('-vector', action='store', dest='VECTOR', required=True,
                   type=str, help='Entries like 3:1/2,5:-1')

    p = _subparser(subparsers, 'certify', cmd_certify,
                   'Certify ||Tx|| <= max{M,1} ||x|| on a random corpus.')
    _operator_flags(p)
    p.add_argument('-trials', action='store', dest='TRIALS', default=200,
                   type=int, help='Corpus size')
    p.add_argument('-size', action='store', dest='SIZE', default=24, type=int,
                   help='Largest support of a corpus vector')
    p.add_argument('-seed', action='store', dest='SEED', default=None,
                   type=int, help='A specific random seed')
    p.add_argument('-depth', action='store', dest='DEPTH', default=4, type=int)
    p.add_argument('-n_jobs', action='store', dest='N_JOBS', default=1,
                   type=int, help='Number of parallel jobs')

    p = _subparser(subparsers, 'witness', cmd_witness,
                   'Separated images of a bounded sequence.')
    _operator_flags(p)
    p.add_argument('-witnesses', action='store', dest='WITNESSES', default=4,
                   type=int, help='Number of witness vectors')

    p = _subparser(subparsers, 'suite', cmd_suite, 'Run the acceptance suite.',
                   params=False)
    p.add_argument('--all', action='store_true', dest='ALL', default=False,
                   help='Run every check')
    p.add_argument('-checks', action='store', dest='CHECKS', default=None,
                   type=str, help='Comma-separated list of checks')
    p.add_argument('-seed', '--seed', action='store', dest='SEED', default=None,
                   type=int, help='A specific random seed')
    p.add_argument('-scale', action='store', dest='SCALE', default='unit',
                   choices=list(SCALES))
    p.add_argument('-results', action='store', dest='RDIR', default='results',
                   type=str, help='Results directory')
    p.add_argument('-n_jobs', action='store', dest='N_JOBS', default=1,
                   type=int, help='Number of parallel jobs')
    p.add_argument('--noskips', action='store_true', dest='NOSKIPS',
                   default=False, help='Overwrite existing reports')
    return parser


def run(argv=None):
    """Parse ``argv``, run the subcommand and return the exit code."""
    global verbose
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    if args.COMMAND is None:
        parser.print_usage(sys.stderr)
        return 2
    verbose = not args.QUIET
    log(40 * '=', 'schreierlab ' + args.COMMAND, 40 * '=', sep='\n')
    try:
        report, ok = args.HANDLER(args)
    except LabError as e:
        report, ok = {'error': e}, False
        if e.code == 'USAGE':
            print('usage error:', e.message, file=sys.stderr)
            code = 2
        else:
            code = 1
    else:
        code = 0 if ok else 1
    report = dict(report)
    report['command'] = args.COMMAND
    text = json.dumps(jsonify(report), indent=4, sort_keys=True)
    if args.OUT:
        with open(args.OUT, 'w') as out:
            out.write(text)
        log('save_file:', args.OUT)
    else:
        print(text)
    return code


if __name__ == '__main__':
    sys.exit(run(sys.argv[1:]))
