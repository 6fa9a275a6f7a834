"""Seeded random draws for the property suites.

Every generator takes a numpy ``RandomState`` so a run replays from its seed.
"""
from fractions import Fraction

from .params import exponent_of
from .schreier import is_member
from .trees import Leaf, Node, FunctionalTree
from .vectors import Vec00
from .utils import power_upper


def random_rational(rng, max_den=10, nonzero=True):
    """u/d with |u/d| <= 1."""
    d = int(rng.randint(1, max_den + 1))
    while True:
        u = int(rng.randint(-d, d + 1))
        if u != 0 or not nonzero:
            return Fraction(u, d)


def random_subset(rng, hi, max_size):
    """Sorted distinct elements of {1..hi}."""
    size = int(rng.randint(0, max_size + 1))
    return tuple(sorted(int(v) + 1 for v in rng.choice(hi, size=min(size, hi),
                                                       replace=False)))


def random_vector(rng, lo, hi, size, max_den=10):
    """A nonzero vector with at most ``size`` entries in [lo, hi]."""
    size = max(1, min(size, hi - lo + 1))
    indices = rng.choice(hi - lo + 1, size=size, replace=False) + lo
    return Vec00({int(j): random_rational(rng, max_den) for j in indices})


def random_block(rng, start, max_size, max_den=10):
    """A vector supported in [start, start + 2 max_size) with sup norm 1."""
    x = random_vector(rng, start, start + 2 * max_size - 1,
                      int(rng.randint(1, max_size + 1)), max_den)
    j = x.supp[int(rng.randint(len(x.supp)))]
    entries = dict(x.items())
    entries[j] = Fraction(1 if entries[j] > 0 else -1)
    return Vec00(entries)


def random_block_sequence(rng, count, start, max_size, max_den=10):
    """Successive blocks of sup norm one."""
    blocks = []
    for _ in range(count):
        b = random_block(rng, start, max_size, max_den)
        blocks.append(b)
        start = b.supp[-1] + 1 + int(rng.randint(0, 3))
    return blocks


def _ball_coefficients(rng, size, q, max_den=10):
    scale = power_upper(Fraction(size), 1 / Fraction(q), 1000)
    return [random_rational(rng, max_den) / scale for _ in range(size)]


def random_tree(rng, sys, start=1, max_height=2, max_children=3, odd=True):
    """A random member of N with support starting at or after ``start``."""
    node, _ = _random_node(rng, sys, start, max_height, max_children, odd,
                           evens_only=False)
    return FunctionalTree(node, Fraction(int(rng.choice([1, -1]))))


def _random_node(rng, sys, pos, height, max_children, odd, evens_only,
                 weight=None):
    if weight is None:
        if height == 0 or (not evens_only and rng.rand() < 0.25):
            return Leaf(int(rng.choice([1, -1])), pos), pos + 1
        classes = [2 * k for k in sys.even_classes()]
        if odd and not evens_only and height >= 2:
            classes += [2 * k + 1 for k in sys.odd_classes()]
        weight = int(rng.choice(classes))
    if weight % 2 == 1:
        return _random_odd_node(rng, sys, weight, pos, height, max_children)
    children = []
    for _ in range(int(rng.randint(1, max_children + 1))):
        pos += int(rng.randint(0, 3))
        child, end = _random_node(rng, sys, pos, height - 1, max_children, odd,
                                  evens_only=False)
        if not child.support:
            continue
        children.append(child)
        pos = end
    children = _admissible_prefix(children, sys.n(weight))
    gammas = _ball_coefficients(rng, len(children), sys.q)
    return Node(weight, tuple(zip(gammas, children))), pos


def _random_odd_node(rng, sys, weight, pos, height, max_children):
    evens = [2 * k for k in sys.even_classes()]
    size = int(rng.randint(1, min(max_children, len(evens)) + 1))
    weights = [int(w) for w in rng.choice(evens, size=size, replace=False)]
    children = []
    for w in weights:
        pos += int(rng.randint(0, 3))
        child, pos = _random_node(rng, sys, pos, height - 1, max_children,
                                  odd=False, evens_only=True, weight=w)
        children.append(child)
    children = _admissible_prefix(children, sys.n(weight))
    gammas = _ball_coefficients(rng, len(children), sys.q)
    supp = sorted(j for c in children for j in c.support)
    E = None
    if rng.rand() < 0.5:
        E = (supp[0], supp[int(rng.randint(len(supp)))])
    return Node(weight, tuple(zip(gammas, children)), E), pos


def _admissible_prefix(children, n):
    while len(children) > 1 and not is_member(
            tuple(c.support[0] for c in children), n):
        children = children[:-1]
    return children


def random_feasible_tuple(rng, sys, k):
    """(a, (a_i)_{i<k}) with m_1^a prod_{i<k} m_{2i}^{a_i} < m_{2k}."""
    room = exponent_of(sys, 2 * k) - 1
    a_list = [0] * (k - 1)
    for i in rng.permutation(range(1, k)):
        i = int(i)
        e = exponent_of(sys, 2 * i)
        if e <= room:
            a_list[i - 1] = int(rng.randint(0, room // e + 1))
            room -= a_list[i - 1] * e
    a = int(rng.randint(0, room + 1))
    return a, a_list
