"""The operator T x = sum_i y_i^*(x) e_i on the even subsequence y_i^* = x_{2i}^*.

Norm bounds are certified two ways: per vector through the norm engine, and
per norming functional through the band decomposition of its leaf expansion,
which transcribes the estimate ||T|| <= max{M, 1} term by term.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import itertools

from joblib import Parallel, delayed

from .errors import LabError
from .schreier import is_member, block_minima
from .trees import validate_tree, coefficients, leaf_expansion
from .vectors import Vec00
from .norm_engine import NormEngine
from .averages import combination_tree, seminorm_lower
from .decomposition import large_coefficient_set
from .utils import pnorm_bounds


@dataclass(frozen=True)
class OperatorT:
    """T with its functionals; ``pairs`` holds (i, FamilyMember) with
    y_i^* = member.functional."""
    pairs: tuple
    sys: object
    M: Fraction
    _coefficients: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, '_coefficients', {
            i: coefficients(member.functional, self.sys)
            for i, member in self.pairs})

    @property
    def indices(self):
        return [i for i, _ in self.pairs]

    def functional(self, i):
        return dict(self.pairs)[i].functional

    def member(self, i):
        return dict(self.pairs)[i]

    def y(self, i, x):
        """y_i^*(x), exactly."""
        return sum((c * x[j] for j, c in self._coefficients[i].items()),
                   Fraction(0))

    @property
    def bound(self):
        """max{M, 1}."""
        return max(self.M, Fraction(1))

    def to_doc(self):
        return {'M': self.M,
                'bound': self.bound,
                'functionals': [{'i': i, 'k': m.k, 'tree': m.functional}
                                for i, m in self.pairs],
                'hypotheses_hold': self.sys.hypotheses_hold}


def build_operator(sys, family):
    """T from a family x_1^*, x_2^*, ...: y_i^* = x_{2i}^*."""
    pairs = tuple((m.k // 2, m) for m in family if m.k % 2 == 0)
    if not pairs:
        raise LabError('INSUFFICIENT_FUNCTIONALS',
                       'family has no even-indexed functional')
    block_minima([m.support for _, m in pairs])
    for i, m in pairs:
        report = validate_tree(m.functional, sys)
        if not report.valid:
            raise LabError('NOT_ADMISSIBLE', 'y_{} is not in N'.format(i),
                           violations=report.violations)
    return OperatorT(pairs, sys, sys.M)


def apply(T, x):
    """T x, exactly."""
    return Vec00({i: T.y(i, x) for i in T.indices})


###############################################################################
# norm certification
###############################################################################
def _certify_one(T, x, depth):
    engine = NormEngine(T.sys, depth)
    result = engine.norm(x)
    Tx = apply(T, x)
    upper_Tx = engine.norm_upper(Tx)
    ratio = upper_Tx / result.value
    return {'x': x,
            'Tx': Tx,
            'norm_lower': result.value,
            'norm_upper': result.upper,
            'Tx_upper': upper_Tx,
            'ratio': ratio,
            # ratio <= bound up to the engine's gap on x
            'holds': upper_Tx <= T.bound * result.upper}


def certify_norm_bound(T, corpus, depth=4, n_jobs=1, dual=True):
    """norm_upper(Tx) against max{M, 1} norm(x) on every corpus vector.

    With ``dual`` each vector also gets the l_p check of (y_i^*(x)) over the
    image support.
    """
    if any(x.is_zero() for x in corpus):
        raise ValueError('corpus vectors must be nonzero')
    records = Parallel(n_jobs=n_jobs)(
        delayed(_certify_one)(T, x, depth) for x in corpus)
    if dual:
        engine = NormEngine(T.sys, depth)
        for record in records:
            F = [i for i in T.indices if record['Tx'][i] != 0]
            record['dual'] = (dual_lp_check(T, record['x'], F, engine)
                              if F else None)
    violations = [r for r in records
                  if not r['holds'] or (r.get('dual') and not r['dual']['holds'])]
    return {'bound': T.bound,
            'M': T.M,
            'max_ratio': max((r['ratio'] for r in records), default=Fraction(0)),
            'records': records,
            'violations': violations,
            'holds': not violations,
            'hypotheses_hold': T.sys.hypotheses_hold}


def dual_lp_check(T, x, F, engine=None):
    """(sum_{i in F} |y_i^*(x)|^p)^(1/p) <= ||x|| for F >= k with (y_i^*)_{i in F}
    S_{n_2k}-admissible, k = min F.

    Inadmissible F are reported and pass vacuously.
    """
    sys = T.sys
    engine = engine or NormEngine(sys)
    F = sorted(F)
    k = F[0]
    minima = tuple(T.functional(i).support[0] for i in F)
    admissible = sys.has_n(2 * k) and is_member(minima, sys.n(2 * k))
    values = [T.y(i, x) for i in F]
    lp = pnorm_bounds(values, sys.p, sys.denominator)[0]
    upper = engine.norm_upper(x)
    return {'F': F,
            'admissible': admissible,
            'lp_lower': lp,
            'norm_upper': upper,
            'holds': not admissible or lp <= upper}


def combination_member(T, F, betas):
    """sum_{i in F} beta_i y_i^* validated as a member of N."""
    F = sorted(F)
    members = [T.member(i) for i in F]
    tree = combination_tree(T.sys, members, betas, F[0])
    report = validate_tree(tree, T.sys)
    return {'F': F, 'betas': list(betas), 'tree': tree,
            'valid': report.valid, 'violations': report.violations}


def kernel_check(T, indices):
    """Basis vectors outside the functional supports are mapped to zero."""
    covered = set(j for i in T.indices for j in T.functional(i).support)
    outside = [j for j in indices if j not in covered]
    nonzero = [j for j in outside if not apply(T, Vec00.basis(j)).is_zero()]
    return {'checked': len(outside), 'nonzero': nonzero, 'holds': not nonzero}


###############################################################################
# band decomposition of a norming functional
###############################################################################
def _band(sys, gamma, c):
    """Band index of a leaf with |prod gamma| = gamma and coefficient c.

    2 for [2 gamma/m_4, gamma/m_1], k > 2 for [2 gamma/m_2k, 2 gamma/m_2(k-1)),
    0 above gamma/m_1 (a lone leaf) and None below the last materialized band.
    """
    c = abs(c)
    if c > gamma / sys.m1:
        return 0
    if c >= 2 * gamma / sys.weight(4):
        return 2
    for k in range(3, sys.K + 1):
        if 2 * gamma / sys.weight(2 * k) <= c < 2 * gamma / sys.weight(2 * k - 2):
            return k
    return None


def _band_factor(sys, name, band, group):
    """Multiple of ||x|| bounding sum |y_j^*(x)| |x^*(e_j)| over the group.

    H_2 and G_k use (sum |prod gamma|^q)^(1/q) against the band's top
    coefficient; H_k - G_k uses |y_j^*(x)| <= ||x|| leaf by leaf. Lone leaves
    and leaves below the last band only get |y_j^*(x)| <= ||x||.
    """
    D = sys.denominator
    gammas = [abs(t.gamma_product) for t in group]
    if name == 'H' and band == 2:
        return pnorm_bounds(gammas, sys.q, D)[1] / sys.m1
    if name == 'G':
        return pnorm_bounds(gammas, sys.q, D)[1] * 2 / sys.weight(2 * band - 2)
    if name == 'H-G':
        return 2 * sum(gammas, Fraction(0)) / sys.weight(2 * band - 2)
    return sum((abs(t.coefficient) for t in group), Fraction(0))


def band_decomposition(T, xstar, x, engine=None):
    """H_2, H_k and G_k for x^* with the band bounds on x^*(Tx).

    Leaves are banded by |x^*(e_j)| against |prod gamma|. Each band's
    contribution sum |y_j^*(x)| |x^*(e_j)| is compared with its bound times
    the upper norm of x, and the bounds must add up to at most
    max{M, 1} ||x||. G_k is certified in S_{p_k - 1} and inside the large
    coefficient set; both count towards ``holds`` when the parameter
    hypotheses hold and are reported otherwise.
    """
    sys = T.sys
    D = sys.denominator
    engine = engine or NormEngine(sys)
    norm_upper = engine.norm_upper(x)
    terms = leaf_expansion(xstar, sys)
    Tx = apply(T, x)
    value = sum((t.coefficient * Tx[t.index] for t in terms), Fraction(0))
    bands = {}
    for t in terms:
        bands.setdefault(_band(sys, abs(t.gamma_product), t.coefficient),
                         []).append(t)
    parts = []
    for key in sorted(bands, key=lambda b: (b is None, b)):
        members = bands[key]
        if key is not None and key > 2:
            G = [t for t in members if t.index >= 2 * key]
            rest = [t for t in members if t.index < 2 * key]
            groups = [('G', key, G), ('H-G', key, rest)]
        else:
            groups = [('H', key, members)]
        for name, band, group in groups:
            if not group:
                continue
            ys = [Tx[t.index] for t in group]
            cs = [t.coefficient for t in group]
            contribution = sum((abs(y * c) for y, c in zip(ys, cs)),
                               Fraction(0))
            bound = _band_factor(sys, name, band, group) * norm_upper
            lp = pnorm_bounds(ys, sys.p, D)[1]
            lq = pnorm_bounds(cs, sys.q, D)[1]
            part = {'set': name, 'k': band,
                    'indices': [t.index for t in group],
                    'contribution': contribution, 'bound': bound,
                    'holds': contribution <= bound,
                    'y_lp': lp, 'coefficient_lq': lq, 'holder': lp * lq}
            if name == 'G':
                G_set = tuple(sorted(t.index for t in group))
                part['in_S_pk_minus_1'] = is_member(G_set, sys.pk(band) - 1)
                part['inside_large_set'] = set(G_set) <= set(
                    large_coefficient_set(xstar, band, sys))
            if name == 'H-G':
                part['count_within'] = len(group) <= band - 1
            parts.append(part)
    bound_total = sum((p['bound'] for p in parts), Fraction(0))
    allowed = T.bound * norm_upper
    G_certified = all(p.get('in_S_pk_minus_1', True) for p in parts)
    inside = all(p.get('inside_large_set', True) for p in parts)
    holds = (all(p['holds'] for p in parts)
             and bound_total <= allowed
             and abs(value) <= allowed)
    if sys.hypotheses_hold:
        holds = holds and G_certified and inside
    return {'value': value,
            'norm_upper': norm_upper,
            'parts': parts,
            'holder_total': sum((p['holder'] for p in parts), Fraction(0)),
            'bound_total': bound_total,
            'allowed': allowed,
            'holds': holds,
            'G_certified': G_certified,
            'inside_large_set': inside,
            'hypotheses_hold': sys.hypotheses_hold}


###############################################################################
# non-compactness and the l_inf embedding
###############################################################################
def _witnesses(T, indices, engine):
    out = []
    for i in indices:
        s = seminorm_lower(T.member(i).average, T.sys, engine)
        out.append((i, s.witness * (1 / s.upper), s.bound))
    return out


def noncompact_witness(T, count, engine=None):
    """u_1, ..., u_count with ||u_i|| <= 1 and ||Tu_i - Tu_j|| >= delta > 0.

    u_i is the seminormalization witness of y_i^* scaled by its upper norm,
    so Tu_i = (y_i^*(u_i)) e_i has disjoint supports.
    """
    if count < 2 or count > len(T.pairs):
        raise LabError('INSUFFICIENT_FUNCTIONALS',
                       'need 2 <= count <= {}'.format(len(T.pairs)),
                       count=count)
    sys = T.sys
    engine = engine or NormEngine(sys)
    chosen = _witnesses(T, T.indices[:count], engine)
    images = [apply(T, u) for _, u, _ in chosen]
    disjoint = all(not set(a.supp) & set(b.supp)
                   for a, b in itertools.combinations(images, 2))
    pairs = []
    for (a, (i, _, bi)), (b, (j, _, bj)) in itertools.combinations(
            enumerate(chosen), 2):
        diff = images[a] - images[b]
        lower = engine.norm_lower(diff)
        lp = pnorm_bounds([bi, bj], sys.p, sys.denominator)[0]
        pairs.append({'i': i, 'j': j, 'separation': lower,
                      'lower_lp_estimate': lp / sys.weight(2)})
    delta = min(p['separation'] for p in pairs)
    return {'witnesses': [u for _, u, _ in chosen],
            'images': images,
            'seminorm_bounds': [b for _, _, b in chosen],
            'pairs': pairs,
            'disjoint_images': disjoint,
            'delta': delta,
            'holds': disjoint and delta > 0,
            'hypotheses_hold': sys.hypotheses_hold}


@dataclass(frozen=True)
class LinfEmbedding:
    """S_a x = sum_i a_i y_i^*(x) e_i."""
    T: OperatorT
    a: tuple

    def __call__(self, x):
        return Vec00({i: ai * self.T.y(i, x)
                      for i, ai in zip(self.T.indices, self.a)})

    @property
    def is_zero(self):
        return all(ai == 0 for ai in self.a)


def linf_embed(T, a, corpus, engine=None):
    """Finite truncation S_a with its two-sided operator norm bounds.

    The lower side is max_i |a_i| times the certified seminormalization
    bound, realized on the scaled witnesses; the upper side is sampled over
    ``corpus`` as upper(S_a x)/lower(x).
    """
    a = tuple(Fraction(v) for v in a)
    if len(a) > len(T.pairs):
        raise LabError('INSUFFICIENT_FUNCTIONALS',
                       '{} coefficients for {} functionals'.format(
                           len(a), len(T.pairs)))
    sys = T.sys
    engine = engine or NormEngine(sys)
    S = LinfEmbedding(T, a)
    amax = max((abs(v) for v in a), default=Fraction(0))
    if S.is_zero:
        return {'operator': S, 'a': a, 'c': Fraction(0),
                'op_norm_lower': Fraction(0), 'op_norm_upper': Fraction(0),
                'holds': all(S(x).is_zero() for x in corpus)}
    indices = [i for i, v in zip(T.indices, a) if v != 0]
    chosen = _witnesses(T, indices, engine)
    c = min(b for _, _, b in chosen)
    op_lower = max(engine.norm_lower(S(u)) for _, u, _ in chosen)
    op_upper, upper_holds = Fraction(0), True
    for x in corpus:
        Sx = engine.norm_upper(S(x))
        op_upper = max(op_upper, Sx / engine.norm_lower(x))
        # up to the engine gap on x
        upper_holds = upper_holds and Sx <= T.bound * amax * engine.norm_upper(x)
    return {'operator': S,
            'a': a,
            'c': c,
            'op_norm_lower': op_lower,
            'op_norm_upper': op_upper,
            'lower_holds': c * amax <= op_lower,
            'upper_holds': upper_holds,
            'holds': c * amax <= op_lower and upper_holds}
