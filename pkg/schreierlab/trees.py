"""Functional trees: finitely supported elements of the norming set.

A tree is built from leaves (+-e_j^*) and weighted nodes. A node with weight
index w represents

    (1/m_w) sum_b gamma_b x_b^*

and, when w is odd, the result is further restricted to an interval E. Even
nodes draw (gamma_b) from the unit ball of l_q, odd nodes from the ball of
radius 2^(1/p), and odd nodes combine even nodes of pairwise distinct weights.
A ``FunctionalTree`` is a root together with its own coefficient +-1.

Nodes are addressed by paths: tuples of child positions from the root.
"""
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import LabError
from .schreier import is_member, successive
from .utils import parse_fraction, fraction_str, in_lq_ball


@dataclass(frozen=True)
class Leaf:
    sign: int
    index: int

    def __post_init__(self):
        assert self.sign in (1, -1), 'leaf sign must be +-1'

    @property
    def support(self):
        return (self.index,)

    @property
    def height(self):
        return 0

    def value(self, x):
        return self.sign * x[self.index]


@dataclass(frozen=True)
class Node:
    weight_index: int
    children: tuple
    E: tuple = None
    support: tuple = field(init=False, repr=False, compare=False)
    height: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        children = tuple((parse_fraction(g), c) for g, c in self.children)
        object.__setattr__(self, 'children', children)
        supp = sorted(j for _, c in children for j in c.support)
        if self.E is not None:
            lo, hi = self.E
            object.__setattr__(self, 'E', (int(lo), int(hi)))
            supp = [j for j in supp if lo <= j <= hi]
        object.__setattr__(self, 'support', tuple(supp))
        object.__setattr__(self, 'height',
                           1 + max((c.height for _, c in children), default=0))

    @property
    def adm_index(self):
        """Index i with n_alpha = n_i."""
        return self.weight_index

    @property
    def is_odd(self):
        return self.weight_index % 2 == 1

    def value(self, x, sys):
        if self.E is not None:
            x = x.restrict(self.E)
        total = Fraction(0)
        for g, c in self.children:
            total += g * (c.value(x) if isinstance(c, Leaf) else c.value(x, sys))
        return total / sys.weight(self.weight_index)


@dataclass(frozen=True)
class FunctionalTree:
    root: object
    gamma: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, 'gamma', parse_fraction(self.gamma))

    @property
    def support(self):
        return self.root.support

    @property
    def height(self):
        return self.root.height

    def to_doc(self):
        return tree_to_doc(self)


def leaf_tree(j, sign=1):
    return FunctionalTree(Leaf(1, j), Fraction(sign))


def node_at(t, path):
    node = t.root
    for i in path:
        if isinstance(node, Leaf) or not 0 <= i < len(node.children):
            raise LabError('INVALID_ANTICHAIN', 'no node at path {}'.format(
                path), path=list(path))
        node = node.children[i][1]
    return node


def evaluate(t, x, sys):
    """x^*(x), exactly."""
    if isinstance(t.root, Leaf):
        return t.gamma * t.root.value(x)
    return t.gamma * t.root.value(x, sys)


def negate(t):
    return FunctionalTree(t.root, -t.gamma)


def height(t):
    """o(x^*): the number of node levels above the leaves."""
    return t.height


###############################################################################
# validation
###############################################################################
@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.violations

    def add(self, path, clause):
        self.violations.append({'path': list(path), 'clause': clause})

    def to_doc(self):
        return {'valid': self.valid, 'violations': self.violations}


def validate_tree(t, sys, comparison=None):
    """Check every clause of membership in N; never raises.

    With ``comparison`` = 2k the children of odd nodes must also carry
    weights below m_{2k}.
    """
    report = ValidationReport()
    if t.gamma not in (1, -1):
        report.add((), 'root coefficient must be +-1')
    _validate(t.root, (), sys, report, comparison)
    return report


def _validate(node, path, sys, report, comparison=None):
    if isinstance(node, Leaf):
        if node.index < 1:
            report.add(path, 'basis index must be positive')
        return
    w = node.weight_index
    if not 1 <= w <= len(sys.weights) or not sys.has_n(w):
        report.add(path, 'weight index {} not materialized'.format(w))
        return
    if not node.children:
        report.add(path, 'node without children')
        return
    if not node.support:
        report.add(path, 'empty support')
    gammas = [g for g, _ in node.children]
    if any(g == 0 for g in gammas):
        report.add(path, 'zero coefficient')
    supports = [c.support for _, c in node.children]
    if any(len(s) == 0 for s in supports):
        report.add(path, 'child with empty support')
    elif not successive(supports):
        report.add(path, 'children supports not successive')
    elif not is_member(tuple(s[0] for s in supports), sys.n(w)):
        report.add(path, 'children not S_{}-admissible'.format(sys.n(w)))
    if node.is_odd:
        base, exp = sys.odd_mass()
        if not in_lq_ball(gammas, sys.q, base, exp):
            report.add(path, 'coefficients outside 2^(1/p) Ba(l_q)')
        kids = [c for _, c in node.children]
        if any(isinstance(c, Leaf) or c.is_odd for c in kids):
            report.add(path, 'odd node with a child outside the even classes')
        else:
            weights = [c.weight_index for c in kids]
            if len(set(weights)) != len(weights):
                report.add(path, 'odd node children weights not distinct')
            if comparison is not None and max(weights) >= comparison:
                report.add(path, 'odd node children weights not below m_{}'
                           .format(comparison))
    else:
        if node.E is not None:
            report.add(path, 'interval restriction on an even node')
        if not in_lq_ball(gammas, sys.q):
            report.add(path, 'coefficients outside Ba(l_q)')
    for i, (_, c) in enumerate(node.children):
        _validate(c, path + (i,), sys, report, comparison)


###############################################################################
# restriction
###############################################################################
def restrict_node(node, E):
    """E x_alpha^* with emptied subtrees pruned; None when nothing is left."""
    if isinstance(node, Leaf):
        if E is None or E[0] <= node.index <= E[1]:
            return node
        return None
    inner = node.E
    if E is not None and inner is not None:
        inner = (max(E[0], inner[0]), min(E[1], inner[1]))
        if inner[0] > inner[1]:
            return None
    elif E is not None:
        inner = E
    children = []
    for g, c in node.children:
        c = restrict_node(c, inner)
        if c is not None:
            children.append((g, c))
    if not children:
        return None
    return Node(node.weight_index, tuple(children))


def restrict(t, E):
    """Interval restriction E x^*; None for the zero functional."""
    root = restrict_node(t.root, E)
    return None if root is None else FunctionalTree(root, t.gamma)


def normalize(t):
    """Same functional with every odd-node interval pushed down to the leaves."""
    return restrict(t, None)


###############################################################################
# leaf expansion
###############################################################################
@dataclass(frozen=True)
class LeafTerm:
    index: int
    sign: int
    gamma_product: Fraction
    weight_product: int
    path: tuple

    @property
    def coefficient(self):
        """x^*(e_j) = sign prod gamma / prod m over strict ancestors."""
        return self.sign * self.gamma_product / self.weight_product


def leaf_expansion(t, sys):
    """LeafTerms of the normalized tree, in support order."""
    t = normalize(t)
    if t is None:
        return []
    terms = []
    _expand(t.root, t.gamma, 1, (), sys, terms)
    return terms


def _expand(node, gamma, weight, path, sys, terms):
    if isinstance(node, Leaf):
        terms.append(LeafTerm(node.index, node.sign, gamma, weight, path))
        return
    m = sys.weight(node.weight_index)
    for i, (g, c) in enumerate(node.children):
        _expand(c, gamma * g, weight * m, path + (i,), sys, terms)


def coefficients(t, sys):
    """{j: x^*(e_j)}."""
    return {term.index: term.coefficient for term in leaf_expansion(t, sys)}


###############################################################################
# documents
###############################################################################
def node_to_doc(node):
    if isinstance(node, Leaf):
        return {'leaf': node.index, 'sign': node.sign}
    doc = {'weight': node.weight_index,
           'children': [{'gamma': fraction_str(g), 'tree': node_to_doc(c)}
                        for g, c in node.children]}
    if node.E is not None:
        doc['E'] = list(node.E)
    return doc


def node_from_doc(doc):
    if 'leaf' in doc:
        return Leaf(int(doc['sign']), int(doc['leaf']))
    children = tuple((parse_fraction(c['gamma']), node_from_doc(c['tree']))
                     for c in doc['children'])
    E = tuple(doc['E']) if doc.get('E') is not None else None
    return Node(int(doc['weight']), children, E)


def tree_to_doc(t):
    return {'gamma': fraction_str(t.gamma), 'root': node_to_doc(t.root)}


def tree_from_doc(doc):
    return FunctionalTree(node_from_doc(doc['root']),
                          parse_fraction(doc['gamma']))
