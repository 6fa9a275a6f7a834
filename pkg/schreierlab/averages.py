"""Repeated averages and the seminormalized functionals x_k^* built on them.

An average of level L is built bottom up: level-0 blocks are singletons with
coefficient 1 and a level-(j+1) block strings together ``counts[j]``
successive level-j blocks, scaling them by counts[j]^(-1/q). Counts of the
form r^a for q = a/b keep every coefficient rational and the l_q norm exactly
one.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import math

from sympy import integer_nthroot
from tqdm import tqdm

from .errors import LabError
from .schreier import is_member, max_admissible_mass, witness, block_minima
from .trees import Leaf, Node, FunctionalTree, validate_tree, coefficients
from .decomposition import regroup_parts, regroup_average
from .vectors import Vec00
from .norm_engine import NormEngine
from .seeds import get_rng
from .utils import (power_bounds, power_lower, power_upper, power_sum_bounds,
                    in_lq_ball)

# largest support the automatic builder tries before giving up
SUPPORT_BUDGET = 10**4


@dataclass
class AverageBlock:
    k: int
    F: tuple
    a: dict
    eps: Fraction
    levels: int
    counts: tuple
    mass: Fraction
    delta: Fraction
    strict_support_lower_bound: int
    q: Fraction
    heaviest: tuple = ()

    def to_doc(self):
        return {'k': self.k,
                'F': list(self.F),
                'a': {str(i): v for i, v in self.a.items()},
                'eps': self.eps,
                'levels': self.levels,
                'counts': list(self.counts),
                'mass': self.mass,
                'delta': self.delta,
                'strict_support_lower_bound': self.strict_support_lower_bound,
                'q': self.q,
                'heaviest': list(self.heaviest)}


def _level_factor(count, q, denominator):
    """count^(-1/q), exact when count is a q-numerator power."""
    q = Fraction(q)
    r, exact = integer_nthroot(count, q.numerator)
    if exact:
        return Fraction(1, r**q.denominator)
    return power_lower(Fraction(1, count), 1 / q, denominator)


def _assemble(start, counts, q, denominator):
    """(F, a) for the given per-level counts, innermost level first."""
    coefficient = Fraction(1)
    for c in counts:
        coefficient *= _level_factor(c, q, denominator)
    size = math.prod(counts)
    F = tuple(range(start, start + size))
    return F, {i: coefficient for i in F}


def _admissible_start(start, counts):
    """Smallest start >= ``start`` with every block count at most its block's
    minimum; the first block of each level has the smallest minimum."""
    return max([start] + list(counts))


def _below(mass, eps, q):
    """mass^(1/q) < eps, decided exactly (q = a/b: mass^b < eps^a)."""
    q = Fraction(q)
    return mass**q.denominator < eps**q.numerator


def _q_masses(a, q, denominator):
    """Upper bounds of |a_i|^q, exact when rational."""
    return {i: power_bounds(abs(v), q, denominator)[1] for i, v in a.items()}


def _tail_mass(F, masses):
    """Mass of the longest S_1 tail of F, a cheap lower bound of the
    S_n-admissible mass for every n >= 1."""
    size = 0
    while size < len(F) and size + 1 <= F[len(F) - size - 1]:
        size += 1
    return sum((masses[i] for i in F[len(F) - size:]), Fraction(0))


def strict_support_lower_bound(sys, k):
    """Support size below which eps = 1/m_{2k} is out of reach: some single
    coefficient has |a_i|^q >= 1/|F|, so |F| > m_{2k}^q."""
    m = sys.weight(2 * k)
    return math.ceil(power_lower(m, sys.q, sys.denominator))


def achieved_eps(mass, q, denominator):
    """A rational strictly above mass^(1/q)."""
    lo, hi = power_bounds(mass, 1 / Fraction(q), denominator)
    return hi + Fraction(1, denominator) if lo == hi else hi


def build_average(sys, k, eps, start, counts=None, budget=SUPPORT_BUDGET,
                  delta=Fraction(0)):
    """AverageBlock for x_k^* with S_{p_k - 1} mass below eps.

    Without ``counts``, uniform counts r^a are tried for r = 2, 3, ... until
    the smallness holds or the support exceeds ``budget``. With ``counts`` the
    shape is fixed; eps = None then records the smallness the shape achieves.
    """
    if start < 2 * k:
        raise ValueError('start {} below 2k = {}'.format(start, 2 * k))
    levels = sys.pk(k)
    if levels < 1:
        raise ValueError('p_{} must be positive'.format(k))
    q = sys.q
    if counts is not None:
        counts = tuple(int(c) for c in counts)
        if len(counts) != levels or any(c < 1 for c in counts):
            raise ValueError('need {} positive block counts'.format(levels))
        avg = _average(sys, k, start, counts, delta)
        if eps is None:
            avg.eps = achieved_eps(avg.mass, q, sys.denominator)
        else:
            avg.eps = Fraction(eps)
            if not _below(avg.mass, avg.eps, q):
                raise LabError('EPS_INFEASIBLE_AT_BUDGET',
                               'counts {} reach only mass {}'.format(
                                   list(counts), avg.mass), k=k)
        _certified(avg, sys)
        return avg
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError('eps must be positive')
    r = 2
    while r**(q.numerator * levels) <= budget:
        counts = (r**q.numerator,) * levels
        first = _admissible_start(start, counts)
        F, a = _assemble(first, counts, q, sys.denominator)
        # the S_1 tail already decides most hopeless shapes
        if levels == 1 or _below(_tail_mass(F, _q_masses(a, q, sys.denominator)),
                                 eps, q):
            avg = _average(sys, k, start, counts, delta)
            if _below(avg.mass, eps, q):
                avg.eps = eps
                _certified(avg, sys)
                return avg
        r += 1
    raise LabError('EPS_INFEASIBLE_AT_BUDGET',
                   'no average for k={} below eps={} within {} elements'.format(
                       k, eps, budget), k=k, eps=eps, budget=budget)


def _average(sys, k, start, counts, delta):
    q = sys.q
    F, a = _assemble(_admissible_start(start, counts), counts, q,
                     sys.denominator)
    mass, G = max_admissible_mass(F, _q_masses(a, q, sys.denominator),
                                  len(counts) - 1)
    return AverageBlock(
        k=k, F=F, a=a, eps=None, levels=len(counts), counts=counts,
        mass=mass, delta=Fraction(delta),
        strict_support_lower_bound=strict_support_lower_bound(sys, k),
        q=q, heaviest=G)


def _certified(avg, sys):
    report = verify_average(avg, sys)
    if not report['holds']:
        failed = [name for name, ok in report['checks'].items() if not ok]
        raise LabError('HYPOTHESIS_FAILED', 'average fails ' + ', '.join(failed),
                       k=avg.k)
    return avg


def verify_average(avg, sys):
    """Re-certify the three AverageBlock invariants from scratch."""
    q = sys.q
    D = sys.denominator
    F = tuple(avg.F)
    levels = sys.pk(avg.k)
    lo, hi = power_sum_bounds(avg.a.values(), q, D)
    mass, G = max_admissible_mass(F, _q_masses(avg.a, q, D), levels - 1)
    checks = {
        'F_at_least_2k': bool(F) and F[0] >= 2 * avg.k,
        'F_in_S_pk': is_member(F, levels),
        'unit_mass': 1 - avg.delta <= lo and hi <= 1,
        'small_on_S_pk_minus_1': (avg.eps is not None
                                  and _below(mass, avg.eps, q)),
    }
    return {'k': avg.k,
            'checks': checks,
            'mass': mass,
            'heaviest': G,
            'witness': witness(F, levels),
            'holds': all(checks.values())}


###############################################################################
# seminormalized functionals
###############################################################################
def build_xk(sys, avg):
    """x_k^* = (1/m_{2k}) sum_{i in F} a_i e_i^* as a member of N.

    A single N_k node when F is S_{n_2k}-admissible, otherwise the regrouping
    at the highest level k0 < k whose parts are admissible and whose rounded
    l_q masses stay in the ball.
    """
    k = avg.k
    F = tuple(avg.F)
    if not is_member(F, sys.pk(k)):
        raise LabError('NOT_ADMISSIBLE', 'F_{} not in S_{}'.format(
            k, sys.pk(k)), k=k)
    if is_member(F, sys.n(2 * k)):
        children = tuple((avg.a[i], Leaf(1, i)) for i in F)
        return FunctionalTree(Node(2 * k, children))
    attempts = []
    for k0 in range(k - 1, 0, -1):
        try:
            return regroup_average(sys, F, avg.a, k, k0)
        except LabError as e:
            if e.code not in ('NOT_ADMISSIBLE', 'BALL_VIOLATION'):
                raise
            attempts.append({'k0': k0, 'error': e.to_doc()})
    raise LabError('NOT_ADMISSIBLE', 'x_{} fits no regrouping level'.format(k),
                   k=k, attempts=attempts)


def flat_value(avg, x, sys):
    """x_k^*(x) from the closed form."""
    total = sum((v * x[i] for i, v in avg.a.items()), Fraction(0))
    return total / sys.weight(2 * avg.k)


@dataclass
class FamilyMember:
    k: int
    average: AverageBlock
    functional: FunctionalTree

    @property
    def support(self):
        return self.functional.support

    def to_doc(self):
        return {'k': self.k, 'average': self.average,
                'functional': self.functional}


def build_family(sys, count, eps, start, budget=SUPPORT_BUDGET, verbose=False):
    """x_1^*, ..., x_count^* on successive averages F_1 < F_2 < ..."""
    members = []
    position = start
    for k in tqdm(range(1, count + 1), disable=not verbose):
        avg = build_average(sys, k, eps, max(position, 2 * k), budget=budget)
        members.append(FamilyMember(k, avg, build_xk(sys, avg)))
        position = avg.F[-1] + 1
    return members


def combination_tree(sys, members, betas, k0):
    """sum beta_k x_k^* as one tree rooted at weight m_{2k0}.

    Every x_k^* is regrouped at level k0 and the parts of all members become
    the root's children, with coefficients beta_k c_J.
    """
    betas = [Fraction(b) for b in betas]
    if len(members) != len(betas):
        raise ValueError('one coefficient per functional')
    if any(m.k < k0 for m in members):
        raise LabError('NOT_ADMISSIBLE', 'functionals below k0={}'.format(k0))
    block_minima([m.support for m in members])
    if not in_lq_ball(betas, sys.q):
        raise LabError('BALL_VIOLATION', 'coefficients outside Ba(l_q)')
    children = []
    for member, beta in zip(members, betas):
        if beta == 0:
            continue
        avg = member.average
        for c, z in regroup_parts(sys, avg.F, avg.a, avg.k, k0):
            children.append((beta * c * z.gamma, z.root))
    if not children:
        raise ValueError('all coefficients are zero')
    minima = tuple(node.support[0] for _, node in children)
    if not is_member(minima, sys.n(2 * k0)):
        raise LabError('NOT_ADMISSIBLE', 'parts not S_{}-admissible'.format(
            sys.n(2 * k0)), minima=list(minima))
    if not in_lq_ball([g for g, _ in children], sys.q):
        raise LabError('BALL_VIOLATION', 'rounded part masses leave Ba(l_q)')
    return FunctionalTree(Node(2 * k0, tuple(children)))


def random_ball_point(rng, size, q, denominator=1000):
    """Nonzero rationals (beta_i) with sum |beta_i|^q <= 1."""
    scale = power_upper(Fraction(size), 1 / Fraction(q), denominator)
    betas = []
    for _ in range(size):
        u = 0
        while u == 0:
            u = int(rng.randint(-denominator, denominator + 1))
        betas.append(Fraction(u, denominator) / scale)
    return betas


def verify_upper_lqw(members, sys, trials, seed=None):
    """Random admissible combinations sum_{k in F} beta_k x_k^*, each built as
    one tree and checked for membership in N and exact coefficients."""
    rng = get_rng(seed)
    classes = sorted(set(m.k for m in members))
    levels = [l for l in range(2, sys.K + 1) if l <= classes[-1]]
    records = []
    for trial in range(trials):
        record = {'trial': trial}
        if not levels:
            record.update(skipped='no level l >= 2 below the family')
            records.append(record)
            continue
        l = int(rng.choice(levels))
        pool = [m for m in members if m.k >= l]
        size = int(rng.randint(1, min(4, len(pool)) + 1))
        chosen = sorted(rng.choice(len(pool), size=size, replace=False))
        picked = [pool[i] for i in chosen]
        # keep the longest S_{f_l}-admissible prefix
        while len(picked) > 1 and not is_member(
                tuple(m.support[0] for m in picked), sys.f(l)):
            picked.pop()
        betas = random_ball_point(rng, len(picked), sys.q)
        record.update(l=l, ks=[m.k for m in picked], betas=betas)
        try:
            tree = combination_tree(sys, picked, betas, l)
        except LabError as e:
            record.update(valid=False, error=e.to_doc())
            records.append(record)
            continue
        report = validate_tree(tree, sys)
        expected = {}
        for m, b in zip(picked, betas):
            for i, v in m.average.a.items():
                expected[i] = b * v / sys.weight(2 * m.k)
        record.update(valid=report.valid, violations=report.violations,
                      exact=coefficients(tree, sys) == expected)
        records.append(record)
    failures = [r for r in records
                if 'skipped' not in r and not (r['valid'] and r['exact'])]
    return {'trials': trials,
            'records': records,
            'failures': failures,
            'holds': not failures}


###############################################################################
# the seminormalization bound
###############################################################################
@dataclass
class SeminormBound:
    bound: Fraction
    witness: Vec00
    value: Fraction
    upper: Fraction
    inequality_rhs: Fraction
    inequality_holds: bool
    norm: dict = field(default_factory=dict)

    def to_doc(self):
        return {'bound': self.bound,
                'witness': self.witness,
                'value': self.value,
                'upper': self.upper,
                'inequality_rhs': self.inequality_rhs,
                'inequality_holds': self.inequality_holds,
                'norm': self.norm}


def seminorm_witness(avg, sys):
    """x_k = sum_{j in F} sign(a_j) |a_j|^(q-1) e_j, rounded down when
    irrational."""
    exponent = sys.q - 1
    entries = {}
    for j, v in avg.a.items():
        w = power_lower(abs(v), exponent, sys.denominator)
        entries[j] = w if v > 0 else -w
    return Vec00(entries)


def seminorm_lower(avg, sys, engine=None):
    """Certified lower bound x_k^*(x_k) / U(x_k) <= ||x_k^*||.

    Also checks U(x_k) <= 2 eps^(q-1) + 24/m_{2k}.
    """
    engine = engine or NormEngine(sys)
    x = seminorm_witness(avg, sys)
    value = flat_value(avg, x, sys)
    result = engine.norm(x)
    m = sys.weight(2 * avg.k)
    rhs = (2 * power_upper(avg.eps, sys.q - 1, sys.denominator)
           + Fraction(24, m))
    return SeminormBound(bound=value / result.upper, witness=x, value=value,
                         upper=result.upper, inequality_rhs=rhs,
                         inequality_holds=result.upper <= rhs,
                         norm=result.to_doc())
