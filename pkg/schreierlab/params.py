"""Integer parameter sequences of a Schreier norming set.

A parameter system fixes the weights (m_i), the admissibility indices (n_i)
and the exponents (s_i), together with the derived integers (f_j), (p_k) and
the operator-norm constant M. All weights are unbounded Python integers and
every comparison between them is an exact integer comparison.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from yaml import load, dump, Loader

from .errors import LabError
from .utils import parse_fraction, parse_int

HYPOTHESES_NOTE = 'hypotheses not satisfied'


class Verdict(Enum):
    HOLDS = 'holds'
    FAILS = 'fails'
    VACUOUS = 'vacuous'


@dataclass(frozen=True)
class DerivedParams:
    f: dict
    f_witness: dict
    pk: dict
    M: Fraction
    M_truncated: Fraction
    M_tail: Fraction

    def to_doc(self):
        return {'f': self.f,
                'f_witness': {j: {'rho': w[0], 'rho_i': list(w[1])}
                              for j, w in self.f_witness.items()},
                'pk': self.pk,
                'M': self.M,
                'M_truncated': self.M_truncated,
                'M_tail': self.M_tail}


@dataclass(frozen=True)
class ParamSystem:
    """Validated sequences; build with ``build_param_system``."""
    m1: int
    s: tuple
    n_odd1: int
    n_even: tuple
    n_odd_rest: tuple
    q: Fraction
    K: int
    strict: bool = True
    pk_surrogate: tuple = ()
    denominator: int = 10**12
    weights: tuple = ()
    derived: DerivedParams = None
    warnings: tuple = field(default=())

    @property
    def p(self):
        return self.q / (self.q - 1)

    @property
    def hypotheses_hold(self):
        return not self.warnings and not self.pk_surrogate

    def weight(self, i):
        """m_i."""
        if not 1 <= i <= len(self.weights):
            raise LabError('UNMATERIALIZED_INDEX',
                           'm_{} is not materialized'.format(i), index=i)
        return self.weights[i - 1]

    def has_n(self, i):
        if i == 1:
            return True
        if i % 2 == 0:
            return i // 2 <= len(self.n_even)
        return (i - 1) // 2 <= len(self.n_odd_rest)

    def n(self, i):
        """n_i."""
        if i < 1 or not self.has_n(i):
            raise LabError('UNMATERIALIZED_INDEX',
                           'n_{} is not materialized'.format(i), index=i)
        if i == 1:
            return self.n_odd1
        if i % 2 == 0:
            return self.n_even[i // 2 - 1]
        return self.n_odd_rest[(i - 1) // 2 - 1]

    def pk(self, k):
        """p_k, or its surrogate in a relaxed system."""
        surrogate = dict(self.pk_surrogate)
        if k in surrogate:
            return surrogate[k]
        if k not in self.derived.pk:
            raise LabError('UNMATERIALIZED_INDEX',
                           'p_{} is not materialized'.format(k), index=k)
        return self.derived.pk[k]

    def f(self, j):
        if j not in self.derived.f:
            raise LabError('UNMATERIALIZED_INDEX',
                           'f_{} is not materialized'.format(j), index=j)
        return self.derived.f[j]

    @property
    def M(self):
        return self.derived.M

    @property
    def operator_bound(self):
        """max{M, 1}."""
        return max(self.derived.M, Fraction(1))

    def is_odd_weight(self, i):
        return i % 2 == 1

    def even_classes(self):
        """k with m_{2k}, n_{2k} materialized."""
        return [k for k in range(1, self.K + 1) if self.has_n(2 * k)]

    def odd_classes(self):
        """k >= 0 with m_{2k+1}, n_{2k+1} materialized."""
        return [k for k in range(0, self.K + 1)
                if 2 * k + 1 <= len(self.weights) and self.has_n(2 * k + 1)]

    def odd_mass(self):
        """(base, exponent) of the q-th power radius 2^(q/p) of odd nodes."""
        return Fraction(2), self.q - 1

    def to_doc(self):
        doc = {'m1': self.m1,
               's': list(self.s),
               'n': {'odd1': self.n_odd1,
                     'even': list(self.n_even),
                     'oddRest': list(self.n_odd_rest)},
               'q': str(self.q),
               'K': self.K,
               'strict': self.strict,
               'denominator': self.denominator}
        if self.pk_surrogate:
            doc['pk_surrogate'] = dict(self.pk_surrogate)
        return doc


###############################################################################
# construction
###############################################################################
def materialize_weights(m1, s, K):
    """m_1 .. m_{2K+1}: m_2 = m_1^5, m_{2j} = prod_{i<j} m_{2i}^{s_i},
    m_{2j+1} = m_{2j}^5."""
    if len(s) < K - 1:
        raise LabError('UNMATERIALIZED_INDEX',
                       'm_{} needs s_1..s_{}'.format(2 * K, K - 1), K=K)
    even = {1: m1**5}
    for j in range(2, K + 1):
        prod = 1
        for i in range(1, j):
            prod *= even[i]**s[i - 1]
        even[j] = prod
    weights = [m1]
    for j in range(1, K + 1):
        weights.append(even[j])
        weights.append(even[j]**5)
    return tuple(weights)


def exponent_of(sys, i):
    """e with m_i = m_1^e; every weight is a power of m_1."""
    w, e = sys.weight(i), 0
    while w > 1:
        w, r = divmod(w, sys.m1)
        assert r == 0, 'weight is not a power of m_1'
        e += 1
    return e


def _largest_power_below(base, prod, target):
    """Largest r with prod * base^r < target (prod < target)."""
    r = 0
    while prod * base < target:
        prod *= base
        r += 1
    return r


def _compute_f(m1, n1, weights_even, n_even, j):
    """Branch and bound for f_j over integer products."""
    target = weights_even[j]
    items = [(weights_even[i], n_even[i], i) for i in range(1, j)]
    # exponents base m_1 give an exact fractional-relaxation bound
    expo = {}
    for w, _, i in items:
        e, x = 0, w
        while x > 1:
            x //= m1
            e += 1
        expo[i] = e
    e_target = 0
    x = target
    while x > 1:
        x //= m1
        e_target += 1
    best = {'value': -1, 'witness': None}

    def bound(idx, used):
        capacity = e_target - 1 - used
        ratio = Fraction(n1)
        for w, nv, i in items[:idx + 1]:
            ratio = max(ratio, Fraction(nv, expo[i]))
        return (ratio * capacity).__floor__()

    def branch(idx, prod, used, value, chosen):
        if idx < 0:
            rho = _largest_power_below(m1, prod, target)
            total = value + rho * n1
            if total > best['value']:
                best['value'] = total
                best['witness'] = (rho, tuple(reversed(chosen)))
            return
        w, nv, i = items[idx]
        rmax = _largest_power_below(w, prod, target)
        for r in range(rmax, -1, -1):
            next_used = used + r * expo[i]
            next_value = value + r * nv
            if next_value + bound(idx - 1, next_used) <= best['value']:
                continue
            branch(idx - 1, prod * w**r, next_used, next_value, chosen + [r])

    branch(len(items) - 1, 1, 0, 0, [])
    return best['value'], best['witness']


def compute_f(sys, j):
    """f_j: the maximum of rho n_1 + sum_{i<j} rho_i n_{2i} over nonnegative
    integers with m_1^rho prod_{i<j} m_{2i}^rho_i < m_{2j}.

    Returns 0 when only the all-zero tuple is feasible.
    """
    if j < 2 or 2 * j > len(sys.weights) or not sys.has_n(2 * (j - 1)):
        raise LabError('UNMATERIALIZED_INDEX',
                       'f_{} needs m_2..m_{} and n_2..n_{}'.format(
                           j, 2 * j, 2 * (j - 1)), index=j)
    weights_even = {i: sys.weight(2 * i) for i in range(1, j + 1)}
    n_even = {i: sys.n(2 * i) for i in range(1, j)}
    return _compute_f(sys.m1, sys.n_odd1, weights_even, n_even, j)[0]


def compute_pk(m_s, n1, n_even, k):
    """p_k = 5 n_1 + sum_{i<k} s_i n_{2i}."""
    return 5 * n1 + sum(m_s[i - 1] * n_even[i - 1] for i in range(1, k))


def compute_M(weights, m1, K):
    """M = 2/m_1 + sum_{j>=2} 4(1+j)/m_{2j}, exact up to m_{2K} plus a tail.

    For j >= 2, m_{2j+2} = m_{2j}^{s_j+1} >= m_{2j}^2, so m_{2j} >= L^{j-K+1}
    with L = m_{2K}, and the tail is bounded by the closed form of
    sum_{t>=1} 4(1+K+t) r^{t+1}, r = 1/L.
    """
    assert K >= 2, 'M needs m_4'
    even = {j: weights[2 * j - 1] for j in range(1, K + 1)}
    truncated = Fraction(2, m1)
    for j in range(2, K + 1):
        truncated += Fraction(4 * (1 + j), even[j])
    r = Fraction(1, even[K])
    tail = 4 * r * ((1 + K) * r / (1 - r) + r / (1 - r)**2)
    return truncated + tail, truncated, tail


def build_param_system(m1, s, n_values, q, K, strict=True, pk_surrogate=None,
                       denominator=10**12):
    """Validated parameter system with m_i, f_j, p_k and M materialized to K.

    ``n_values`` is a dict {'odd1': n_1, 'even': [n_2, n_4, ...],
    'oddRest': [n_3, n_5, ...]} or a flat list (n_1, n_2, n_4, ...) with no
    odd entries beyond n_1.
    """
    if isinstance(n_values, dict):
        n_odd1 = parse_int(n_values['odd1'])
        n_even = tuple(parse_int(v) for v in n_values.get('even', []))
        n_odd_rest = tuple(parse_int(v) for v in n_values.get('oddRest', []))
    else:
        n_values = [parse_int(v) for v in n_values]
        n_odd1, n_even, n_odd_rest = n_values[0], tuple(n_values[1:]), ()
    m1 = parse_int(m1)
    s = tuple(parse_int(v) for v in s)
    q = parse_fraction(q)
    K = parse_int(K)
    entries = (n_odd1,) + n_even + n_odd_rest + s
    if any(v < 1 for v in entries) or K < 2:
        raise ValueError('sequence entries must be positive and K >= 2')
    if q <= 1:
        raise ValueError('q must exceed 1')
    surrogate = tuple(sorted((parse_int(k), parse_int(v))
                             for k, v in (pk_surrogate or {}).items()))
    if strict and surrogate:
        raise LabError('USAGE', 'p_k surrogates need a relaxed system')
    # m_1 > 3 is used by every estimate downstream, relaxed or not
    if m1 <= 3:
        raise LabError('STRICT_VIOLATION', 'm_1 > 3', condition='m_1 > 3',
                       m1=m1)
    if len(n_even) < K:
        raise LabError('UNMATERIALIZED_INDEX',
                       'K={} needs n_2..n_{}'.format(K, 2 * K), K=K)

    warnings = []

    def violation(condition, **context):
        if strict:
            raise LabError('STRICT_VIOLATION', condition,
                           condition=condition, **context)
        warnings.append(condition + ' fails ' + str(context))

    if any(a >= b for a, b in zip(s, s[1:])):
        violation('(s_i) increasing', s=list(s))
    if not 5 * n_odd1 < n_even[0]:
        violation('5n_1 < n_2', n_1=n_odd1, n_2=n_even[0])

    weights = materialize_weights(m1, s, K)
    weights_even = {i: weights[2 * i - 1] for i in range(1, K + 1)}
    n_even_map = {i: n_even[i - 1] for i in range(1, K + 1)}
    f, f_witness = {}, {}
    for j in range(2, K + 1):
        f[j], f_witness[j] = _compute_f(m1, n_odd1, weights_even, n_even_map, j)
        if f[j] == 0:
            warnings.append('EMPTY_FEASIBLE_SET at f_{}: reported 0'.format(j))
        if not 4 * f[j] < n_even[j - 1]:
            violation('4f_j < n_2j', j=j, f_j=f[j], n_2j=n_even[j - 1])
    pk = {k: compute_pk(s, n_odd1, n_even, k)
          for k in range(1, min(K, len(s) + 1) + 1)}
    for k in range(2, K + 1):
        if k in pk and not pk[k] <= 2 * f[k]:
            violation('p_k <= 2f_k', k=k, p_k=pk[k], f_k=f[k])
    M, truncated, tail = compute_M(weights, m1, K)
    derived = DerivedParams(f=f, f_witness=f_witness, pk=pk, M=M,
                            M_truncated=truncated, M_tail=tail)
    if not strict and (warnings or surrogate):
        warnings.append(HYPOTHESES_NOTE)
    return ParamSystem(m1=m1, s=s, n_odd1=n_odd1, n_even=n_even,
                       n_odd_rest=n_odd_rest, q=q, K=K, strict=strict,
                       pk_surrogate=surrogate, denominator=int(denominator),
                       weights=weights, derived=derived,
                       warnings=tuple(warnings))


###############################################################################
# facts about the sequences
###############################################################################
def verify_pk_bound(sys):
    """p_k <= 2 f_k for every materialized k >= 2, with the f_k witness."""
    checks = []
    for k in range(2, sys.K + 1):
        if k not in sys.derived.pk:
            continue
        checks.append({'k': k,
                       'p_k': sys.derived.pk[k],
                       'f_k': sys.derived.f[k],
                       'witness': sys.derived.f_witness[k],
                       'holds': sys.derived.pk[k] <= 2 * sys.derived.f[k]})
    return {'check': 'p_k <= 2 f_k',
            'holds': all(c['holds'] for c in checks),
            'cases': checks}


def verify_pk_budget(sys, k, a, a_list):
    """If m_1^a prod_{i<k} m_{2i}^{a_i} < m_{2k} then
    a n_1 + sum_{i<k} a_i n_{2i} < p_k.

    Returns Verdict.VACUOUS when the weight budget is exceeded.
    """
    if len(a_list) != k - 1:
        raise ValueError('a_list needs one entry per i < k')
    prod = sys.m1**a
    for i, ai in enumerate(a_list, start=1):
        prod *= sys.weight(2 * i)**ai
    if not prod < sys.weight(2 * k):
        return Verdict.VACUOUS
    total = a * sys.n_odd1 + sum(ai * sys.n(2 * i)
                                 for i, ai in enumerate(a_list, start=1))
    return Verdict.HOLDS if total < sys.pk(k) else Verdict.FAILS


def scale_exponents(sys, k0, k):
    """(a_l)_{l<k} with m_{2k} / m_{2k0} = prod_l m_{2l}^{a_l}."""
    assert 1 <= k0 <= k
    a = [0] * (k - 1)
    if k0 == k:
        return a
    # m_{2k} = prod_{i<k} m_{2i}^{s_i}; m_{2k0} is the same product below k0
    # except m_2 = m_1^5, which is a single m_2 factor
    for i in range(1, k):
        a[i - 1] = sys.s[i - 1]
    if k0 == 1:
        a[0] -= 1
    else:
        for i in range(1, k0):
            a[i - 1] -= sys.s[i - 1]
    return a


def param_report(sys):
    """Materialized values and every condition check."""
    m = {i: sys.weight(i) for i in range(1, len(sys.weights) + 1)}
    checks = [
        {'check': 'm_1 > 3', 'holds': sys.m1 > 3},
        {'check': 'm_2 = m_1^5', 'holds': sys.weight(2) == sys.m1**5},
        {'check': '(s_i) increasing',
         'holds': all(a < b for a, b in zip(sys.s, sys.s[1:]))},
        {'check': '5n_1 < n_2', 'holds': 5 * sys.n_odd1 < sys.n(2)},
    ]
    for j in range(2, sys.K + 1):
        checks.append({'check': '4f_j < n_2j', 'j': j,
                       'holds': 4 * sys.f(j) < sys.n(2 * j)})
    pk_bound = verify_pk_bound(sys)
    checks.append({'check': pk_bound['check'], 'holds': pk_bound['holds']})
    return {'params': sys.to_doc(),
            'm': m,
            'derived': sys.derived,
            'checks': checks,
            'passed': all(c['holds'] for c in checks) or not sys.strict,
            'warnings': list(sys.warnings)}


###############################################################################
# config documents
###############################################################################
def param_system_from_doc(doc):
    return build_param_system(
        m1=doc['m1'], s=doc['s'], n_values=doc['n'], q=doc['q'], K=doc['K'],
        strict=doc.get('strict', True),
        pk_surrogate=doc.get('pk_surrogate'),
        denominator=parse_int(doc.get('denominator', 10**12)))


def load_param_system(path):
    with open(path, 'r') as f:
        doc = load(f, Loader=Loader)
    return param_system_from_doc(doc)


def dump_param_system(sys, path):
    doc = sys.to_doc()
    # unbounded integers as decimal strings
    doc['m1'] = str(doc['m1'])
    with open(path, 'w') as out:
        dump(doc, out, default_flow_style=False, sort_keys=True)
