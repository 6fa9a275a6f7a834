"""Unfolding functional trees along antichains and splitting them by weight."""
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import LabError
from .schreier import (is_member, witness, validate_witness, convolve_witnesses,
                       successive, greedy_split, block_minima, SchreierWitness)
from .params import scale_exponents
from .trees import (Leaf, Node, FunctionalTree, node_at, normalize, restrict,
                    leaf_expansion, coefficients, leaf_tree)
from .utils import in_lq_ball, power_sum_bounds, power_upper


def _is_prefix(a, b):
    return len(a) < len(b) and b[:len(a)] == a


def _check_antichain(t, A):
    A = sorted(set(tuple(a) for a in A))
    for a in A:
        node_at(t, a)
    for a in A:
        for b in A:
            if _is_prefix(a, b):
                raise LabError('INVALID_ANTICHAIN',
                               'nodes {} and {} are comparable'.format(a, b))
    return A


def _leaf_paths(node, path=()):
    if isinstance(node, Leaf):
        return [path]
    return [p for i, (_, c) in enumerate(node.children)
            for p in _leaf_paths(c, path + (i,))]


def flatten(t, A, sys):
    """[(coefficient, subtree)] for an antichain A meeting every branch.

    coefficient = prod_{b <= a} gamma_b / prod_{b < a} m_b; subtrees below odd
    nodes carry the interval restrictions met on the way down.
    """
    A = _check_antichain(t, A)
    for leaf in _leaf_paths(t.root):
        if not any(a == leaf[:len(a)] for a in A):
            raise LabError('INVALID_ANTICHAIN',
                           'branch {} misses the antichain'.format(leaf))
    terms = []
    for a in A:
        gamma, weight, E = t.gamma, 1, None
        node = t.root
        for i in a:
            if node.E is not None:
                E = node.E if E is None else (max(E[0], node.E[0]),
                                              min(E[1], node.E[1]))
            weight *= sys.weight(node.weight_index)
            gamma *= node.children[i][0]
            node = node.children[i][1]
        sub = FunctionalTree(node)
        if E is not None:
            sub = restrict(sub, E) if E[0] <= E[1] else None
        if sub is not None:
            terms.append((gamma / weight, sub))
    return terms


###############################################################################
# admissibility of antichains
###############################################################################
@dataclass(frozen=True)
class AntichainCertificate:
    d: int
    minima: tuple
    witness: SchreierWitness

    def to_doc(self):
        return {'d': self.d, 'minima': list(self.minima),
                'witness': self.witness}


def _phi(node, sys):
    if node.is_odd:
        return sys.n_odd1
    return sys.n(node.weight_index)


def antichain_admissibility(t, A, sys):
    """d = max over a in A of sum_{b < a} phi(b), with an S_d witness for the
    minima of (x_a^*)_{a in A}.

    Paths refer to the normalized tree. Odd nodes contribute n_1 and need
    their kept children S_{n_1}-admissible.
    """
    t = normalize(t)
    A = _check_antichain(t, A)
    if not A:
        return AntichainCertificate(0, (), SchreierWitness(0, ()))
    blocks = [node_at(t, a).support for a in A]
    if not successive(blocks):
        raise LabError('INVALID_ANTICHAIN', 'antichain supports not successive')
    level, w = _certify(t.root, (), set(A), sys)
    minima = tuple(b[0] for b in blocks)
    assert tuple(w.elements) == minima
    if validate_witness(w, minima) or not is_member(minima, level):
        raise LabError('NOT_ADMISSIBLE', 'antichain minima not in S_{}'.format(
            level), minima=list(minima))
    return AntichainCertificate(level, minima, w)


def _certify(node, path, A, sys):
    """(level, witness of the minima of A-nodes below ``node``)."""
    if path in A:
        return 0, SchreierWitness(0, (node.support[0],))
    kids = [(i, c) for i, (_, c) in enumerate(node.children)
            if any(a[:len(path) + 1] == path + (i,) for a in A)]
    phi = _phi(node, sys)
    mins = tuple(c.support[0] for _, c in kids)
    if not is_member(mins, phi):
        raise LabError('HYPOTHESIS_FAILED',
                       'children at {} not S_{}-admissible'.format(path, phi),
                       path=list(path))
    pieces = []
    level = 0
    for i, c in kids:
        lv, w = _certify(c, path + (i,), A, sys)
        level = max(level, lv)
        pieces.append(w)
    piece_minima = tuple(p.elements[0] for p in pieces)
    # piece minima spread the children minima to the right
    outer = witness(piece_minima, phi)
    return level + phi, convolve_witnesses(pieces, outer)


###############################################################################
# splitting by weight
###############################################################################
@dataclass
class DecompositionResult:
    k: int
    terms: list
    I1: list
    I2: list
    indices: dict
    checks: dict = field(default_factory=dict)

    @property
    def certified(self):
        return all(self.checks.values())

    def to_doc(self):
        return {'k': self.k,
                'terms': [{'lambda': lam, 'part': part}
                          for lam, part in self.terms],
                'I1': self.I1, 'I2': self.I2,
                'indices': self.indices,
                'checks': self.checks,
                'certified': self.certified}


def _split(node, gamma, weight, path, threshold, sys, A1, A2):
    if weight >= threshold:
        A2.append((path, gamma, weight, node))
        return
    if isinstance(node, Leaf):
        A1.append((path, gamma, weight, node))
        return
    m = sys.weight(node.weight_index)
    for i, (g, c) in enumerate(node.children):
        _split(c, gamma * g, weight * m, path + (i,), threshold, sys, A1, A2)


def decompose(t, k, sys):
    """x^* = sum_i lambda_i x_i^* split at the weight m_{2k}.

    I1 collects terminal nodes reached while prod_{b < a} m_b < m_{2k} and I2
    the first nodes where the product reaches m_{2k}. Every lambda_i is
    nonnegative; signs stay in the parts.
    """
    t = normalize(t)
    if t is None:
        raise ValueError('zero functional')
    if t.support[0] < 2 * k:
        raise LabError('SUPPORT_TOO_LOW', 'min supp {} < 2k = {}'.format(
            t.support[0], 2 * k), k=k)
    threshold = sys.weight(2 * k)
    A1, A2 = [], []
    _split(t.root, t.gamma, 1, (), threshold, sys, A1, A2)
    A = sorted(A1 + A2, key=lambda a: a[3].support[0])
    terms, I1, I2, indices = [], [], [], {}
    for i, (path, gamma, weight, node) in enumerate(A):
        lam = abs(gamma) / weight
        sign = 1 if gamma > 0 else -1
        if isinstance(node, Leaf):
            part = FunctionalTree(Leaf(1, node.index), Fraction(sign * node.sign))
        else:
            part = FunctionalTree(node, Fraction(sign))
        terms.append((lam, part))
        indices[i] = list(path)
        (I1 if any(path == a[0] for a in A1) else I2).append(i)
    result = DecompositionResult(k, terms, I1, I2, indices)
    result.checks = certify_decomposition(t, result, sys)
    return result


def recombine(terms, sys):
    """{j: sum_i lambda_i x_i^*(e_j)}."""
    out = {}
    for lam, part in terms:
        for j, c in coefficients(part, sys).items():
            out[j] = out.get(j, Fraction(0)) + lam * c
    return {j: v for j, v in out.items() if v != 0}


def certify_decomposition(t, result, sys):
    """Independent re-check of a decomposition."""
    k = result.k
    lambdas = [lam for lam, _ in result.terms]
    leaf_indices = tuple(sorted(result.terms[i][1].root.index
                                for i in result.I1))
    q = sys.q
    m = sys.weight(2 * k)
    return {
        'recombination': recombine(result.terms, sys) == coefficients(t, sys),
        'I1_in_S_pk_minus_1': is_member(leaf_indices, sys.pk(k) - 1),
        # (sum_{I2} |lambda|^q)^(1/q) <= 2/m_{2k}
        'I2_mass': in_lq_ball([lambdas[i] * m / 2 for i in result.I2], q),
        # (sum |lambda|^q)^(1/q) <= 2
        'total_mass': in_lq_ball([lam / 2 for lam in lambdas], q),
    }


def large_coefficient_set(t, k, sys):
    """{j >= 2k : |x^*(e_j)| >= 2 |prod gamma| / m_{2k}} on the leaf expansion."""
    m = sys.weight(2 * k)
    out = []
    for term in leaf_expansion(t, sys):
        if term.index < 2 * k:
            continue
        if abs(term.coefficient) >= 2 * abs(term.gamma_product) / m:
            out.append(term.index)
    return tuple(sorted(out))


###############################################################################
# scaled combinations
###############################################################################
def _group_mass(masses, q, denominator):
    """Rational upper bound of (sum |c|^q)^(1/q)."""
    hi = power_sum_bounds(masses, q, denominator)[1]
    return power_upper(hi, 1 / q, denominator)


def compose_scaled(sys, a, parts, betas):
    """(1/prod_l m_{2l}^{a_l}) sum_i beta_i x_i^* as one tree.

    ``a[l-1]`` is the exponent a_l. Parts are grouped level by level into
    maximal admissible runs, the smallest weight innermost; each group carries
    its l_q mass outward so the leaf coefficients stay exact.
    """
    betas = [Fraction(b) for b in betas]
    if len(parts) != len(betas):
        raise ValueError('one coefficient per part')
    kept = [(b, p) for b, p in zip(betas, parts) if b != 0]
    if not kept:
        raise ValueError('all coefficients are zero')
    minima = block_minima([p.support for _, p in kept])
    budget = sum(al * sys.n(2 * l) for l, al in enumerate(a, start=1))
    if not is_member(minima, budget):
        raise LabError('NOT_ADMISSIBLE', 'parts not S_{}-admissible'.format(
            budget), minima=list(minima))
    if not in_lq_ball(betas, sys.q):
        raise LabError('BALL_VIOLATION', 'coefficients outside Ba(l_q)')
    levels = [l for l, al in enumerate(a, start=1) for _ in range(al)]
    if not levels:
        if len(kept) == 1 and abs(kept[0][0]) == 1:
            b, p = kept[0]
            return FunctionalTree(p.root, b * p.gamma)
        raise LabError('NOT_ADMISSIBLE', 'no weight to combine several parts')
    q = sys.q
    D = sys.denominator
    # groups: (l_q mass, first support element, node, signed coefficient)
    groups = [(abs(b), p.support[0], p.root, b * p.gamma) for b, p in kept]
    for depth, l in enumerate(levels):
        outermost = depth == len(levels) - 1
        mins = [g[1] for g in groups]
        runs = greedy_split(mins, sys.n(2 * l))
        if outermost and len(runs) != 1:
            raise LabError('NOT_ADMISSIBLE',
                           'grouping leaves {} runs at the top'.format(len(runs)))
        pos, regrouped = 0, []
        for run in runs:
            members = groups[pos:pos + len(run)]
            pos += len(run)
            masses = [g[0] for g in members]
            mass = Fraction(1) if outermost else _group_mass(masses, q, D)
            children = tuple((g[3] / mass, g[2]) for g in members)
            regrouped.append((mass, members[0][1], Node(2 * l, children), mass))
        groups = regrouped
    root = groups[0][2]
    tree = FunctionalTree(root)
    top = [c for c, _ in root.children]
    if not in_lq_ball(top, q):
        raise LabError('BALL_VIOLATION', 'outer coefficients outside Ba(l_q)')
    return tree


def regroup_parts(sys, F, a, k, k0):
    """[(c_J, z_J^*)] with x_k^* = (1/m_{2k0}) sum_J c_J z_J^*.

    F splits greedily into successive S_b pieces J, where b = sum_l a_l n_{2l}
    is what the scale m_{2k}/m_{2k0} = prod_l m_{2l}^{a_l} admits: p_k - p_k0
    for k0 >= 2 and p_k - p_1 - n_2 for k0 = 1. c_J bounds the l_q mass of
    (a_i)_{i in J} from above and z_J^* = (m_{2k0}/m_{2k})
    sum_{i in J} (a_i/c_J) e_i^* is assembled by compose_scaled.
    """
    F = tuple(F)
    if not 1 <= k0 <= k:
        raise LabError('NOT_ADMISSIBLE',
                       'no regrouping of x_{} at level {}'.format(k, k0),
                       k=k, k0=k0)
    exponents = scale_exponents(sys, k0, k)
    level = sum(al * sys.n(2 * l) for l, al in enumerate(exponents, start=1))
    parts = []
    for J in greedy_split(F, level):
        c = _group_mass([a[i] for i in J], sys.q, sys.denominator)
        z = compose_scaled(sys, exponents, [leaf_tree(i) for i in J],
                           [a[i] / c for i in J])
        parts.append((c, z))
    return parts


def regroup_average(sys, F, a, k, k0):
    """x_k^* = (1/m_{2k}) sum_{i in F} a_i e_i^* as a tree rooted at weight
    m_{2k0}."""
    parts = regroup_parts(sys, F, a, k, k0)
    minima = tuple(z.support[0] for _, z in parts)
    if not is_member(minima, sys.n(2 * k0)):
        raise LabError('NOT_ADMISSIBLE', 'regrouped parts not S_{}-admissible'
                       .format(sys.n(2 * k0)), minima=list(minima))
    children = tuple((c * z.gamma, z.root) for c, z in parts)
    if not in_lq_ball([c for c, _ in children], sys.q):
        raise LabError('BALL_VIOLATION', 'rounded group masses leave Ba(l_q)')
    return FunctionalTree(Node(2 * k0, children))
