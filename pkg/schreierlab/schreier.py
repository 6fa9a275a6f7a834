"""Membership, witnesses and admissibility for the finite Schreier families.

S_0 holds the singletons and the empty set. F is in S_n (n >= 1) when
F = F_1 < ... < F_m with every F_i in S_{n-1} and m <= min F_1. Sets are
plain sorted tuples of positive integers.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import heapq

from .errors import LabError


def as_subset(elements):
    """Sorted tuple of distinct positive integers."""
    F = tuple(sorted(set(int(e) for e in elements)))
    if F and F[0] < 1:
        raise ValueError('subsets of N hold positive integers only')
    return F


def successive(blocks):
    """True when max E_i < min E_{i+1} for consecutive nonempty blocks."""
    return all(a[-1] < b[0] for a, b in zip(blocks, blocks[1:]))


###############################################################################
# membership
###############################################################################
def _prefix_end(F, i, n):
    """End j of the maximal S_n prefix F[i:j] of F[i:]."""
    if i >= len(F):
        return i
    if n == 0:
        return i + 1
    pos = i
    for _ in range(F[i]):
        if pos == len(F):
            break
        pos = _prefix_end(F, pos, n - 1)
    return pos


def greedy_split(F, n):
    """Successive maximal S_n pieces covering F."""
    F = tuple(F)
    pieces, pos = [], 0
    while pos < len(F):
        end = _prefix_end(F, pos, n)
        pieces.append(F[pos:end])
        pos = end
    return pieces


def is_member(F, n):
    """F in S_n, by greedy left-to-right decomposition."""
    F = tuple(F)
    assert n >= 0
    return _prefix_end(F, 0, n) == len(F)


def brute_force_member(F, n):
    """F in S_n by literal unfolding of the definition.

    Tries every split of F into successive pieces; only for small sets.
    """
    return _brute_force_member(tuple(F), n)


@lru_cache(maxsize=None)
def _brute_force_member(F, n):
    if len(F) <= 1:
        return True
    if n == 0:
        return False
    # fewest pieces, each in S_{n-1}, covering F[:j]
    fewest = [0] + [None] * len(F)
    for j in range(1, len(F) + 1):
        for i in range(j):
            if fewest[i] is None:
                continue
            if _brute_force_member(F[i:j], n - 1):
                if fewest[j] is None or fewest[i] + 1 < fewest[j]:
                    fewest[j] = fewest[i] + 1
    return fewest[-1] is not None and fewest[-1] <= F[0]


def clear_brute_force_cache():
    """Drop the memoized pieces; long enumerations call this between chunks."""
    _brute_force_member.cache_clear()


###############################################################################
# witnesses
###############################################################################
@dataclass(frozen=True)
class SchreierWitness:
    """F = F_1 < ... < F_m with sub-witnesses at level n-1; leaf when n = 0."""
    n: int
    elements: tuple
    parts: tuple = ()

    def to_doc(self):
        return {'n': self.n, 'set': list(self.elements),
                'parts': self._nested()}

    def _nested(self):
        if self.n == 0:
            return list(self.elements)
        return [p._nested() for p in self.parts]


def witness(F, n):
    """A SchreierWitness for F in S_n, or None."""
    F = tuple(F)
    if not is_member(F, n):
        return None
    return _build_witness(F, n)


def _build_witness(F, n):
    if n == 0:
        return SchreierWitness(0, F)
    parts = tuple(_build_witness(piece, n - 1)
                  for piece in greedy_split(F, n - 1))
    return SchreierWitness(n, F, parts)


def lift_witness(w, n):
    """Witness of the same set at level n >= w.n (S_k is inside S_{k+1})."""
    assert n >= w.n
    while w.n < n:
        w = SchreierWitness(w.n + 1, w.elements, (w,) if w.elements else ())
    return w


def validate_witness(w, F=None):
    """Re-check a witness from scratch; returns a list of violated clauses."""
    problems = []
    if F is not None and tuple(F) != tuple(w.elements):
        problems.append('witnessed set differs from F')
    _check_witness(w, (), problems)
    return problems


def _check_witness(w, path, problems):
    if list(w.elements) != sorted(set(w.elements)):
        problems.append('{}: set not strictly increasing'.format(path))
    if w.n == 0:
        if len(w.elements) > 1 or w.parts:
            problems.append('{}: S_0 holds singletons only'.format(path))
        return
    blocks = [p.elements for p in w.parts]
    if any(len(b) == 0 for b in blocks):
        problems.append('{}: empty part'.format(path))
        return
    if not successive(blocks):
        problems.append('{}: parts not successive'.format(path))
    if blocks and len(blocks) > blocks[0][0]:
        problems.append('{}: {} parts exceed min {}'.format(
            path, len(blocks), blocks[0][0]))
    union = tuple(e for b in blocks for e in b)
    if union != tuple(w.elements):
        problems.append('{}: parts do not cover the set'.format(path))
    for i, p in enumerate(w.parts):
        if p.n != w.n - 1:
            problems.append('{}: part level {} under level {}'.format(
                path + (i,), p.n, w.n))
        _check_witness(p, path + (i,), problems)


def convolve_witnesses(pieces, minima):
    """Witness of F_1 u ... u F_N in S_{n+m}.

    ``pieces`` are witnesses of successive F_i at a common level n and
    ``minima`` witnesses {min F_i} in S_m.
    """
    pieces = [p for p in pieces if p.elements]
    if not pieces:
        return SchreierWitness(minima.n, ())
    level = max(p.n for p in pieces)
    pieces = [lift_witness(p, level) for p in pieces]
    by_min = {p.elements[0]: p for p in pieces}
    if sorted(by_min) != list(minima.elements):
        raise LabError('NOT_ADMISSIBLE', 'minima witness does not match pieces')
    return _convolve(by_min, minima, level)


def _convolve(by_min, minima, level):
    if minima.n == 0:
        return by_min[minima.elements[0]]
    groups = [_convolve(by_min, g, level) for g in minima.parts]
    elements = tuple(e for g in groups for e in g.elements)
    return SchreierWitness(level + minima.n, elements, tuple(groups))


###############################################################################
# admissibility
###############################################################################
def block_minima(blocks):
    blocks = [tuple(b) for b in blocks]
    if any(len(b) == 0 for b in blocks):
        raise LabError('NON_SUCCESSIVE_BLOCKS', 'empty block')
    if not successive(blocks):
        raise LabError('NON_SUCCESSIVE_BLOCKS', 'blocks are not successive',
                       blocks=[list(b) for b in blocks])
    return tuple(b[0] for b in blocks)


def is_admissible(blocks, n):
    """(E_i) is S_n-admissible: {min E_i} in S_n."""
    return is_member(block_minima(blocks), n)


###############################################################################
# maximal admissible mass
###############################################################################
class _MassSearch:
    """max over G in S_n, G inside F[i:j], of the summed weights."""

    def __init__(self, F, w):
        self.F = F
        self.w = w
        self.best_memo = {}
        self.chain_memo = {}

    def total(self, i, j):
        return sum(self.w[i:j], Fraction(0)), tuple(self.F[i:j])

    def best(self, i, j, n):
        if i >= j:
            return Fraction(0), ()
        key = (i, j, n)
        if key in self.best_memo:
            return self.best_memo[key]
        if n == 0:
            c = max(range(i, j), key=lambda c: (self.w[c], -c))
            result = self.w[c], (self.F[c],)
        elif n == 1:
            result = Fraction(-1), ()
            for c in range(i, j):
                top = heapq.nlargest(min(self.F[c], j - c), range(c, j),
                                     key=lambda t: (self.w[t], -t))
                mass = sum((self.w[t] for t in top), Fraction(0))
                if mass > result[0]:
                    result = mass, tuple(self.F[t] for t in sorted(top))
        else:
            below = self.best(i, j, n - 1)
            if below[0] == self.total(i, j)[0]:
                # fixed point: every element already fits at level n-1
                result = below
            else:
                result = Fraction(-1), ()
                for c in range(i, j):
                    mass, G = self.chain(c, j, n - 1, self.F[c])
                    if mass > result[0]:
                        result = mass, G
        self.best_memo[key] = result
        return result

    def chain(self, c, j, level, budget):
        """At most ``budget`` consecutive ranges of F[c:j], S_level each."""
        if c >= j or budget == 0:
            return Fraction(0), ()
        budget = min(budget, j - c)
        if budget == j - c:
            return self.total(c, j)
        key = (c, j, level, budget)
        if key in self.chain_memo:
            return self.chain_memo[key]
        result = Fraction(-1), ()
        for t in range(c + 1, j + 1):
            head = self.best(c, t, level)
            rest = self.chain(t, j, level, budget - 1)
            mass = head[0] + rest[0]
            if mass > result[0]:
                result = mass, head[1] + rest[1]
        self.chain_memo[key] = result
        return result


def max_admissible_mass(F, weights, n):
    """(max_{G in S_n, G inside F} sum_{i in G} weights[i], attaining G).

    ``weights`` maps every element of F to a nonnegative rational.
    """
    F = tuple(F)
    if not F:
        return Fraction(0), ()
    w = [Fraction(weights[e]) for e in F]
    if any(v < 0 for v in w):
        raise ValueError('weights must be nonnegative')
    return _MassSearch(F, w).best(0, len(F), n)
