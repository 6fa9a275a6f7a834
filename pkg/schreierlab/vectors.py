"""Finitely supported exact vectors on the unit vector basis (e_i)."""
from fractions import Fraction

from .utils import parse_fraction, parse_int, fraction_str, pnorm_bounds


class Vec00:
    """x = sum_i a_i e_i with rational a_i; zero entries are never stored."""

    __slots__ = ('_entries',)

    def __init__(self, entries=None):
        clean = {}
        for i, v in (entries or {}).items():
            i = parse_int(i)
            if i < 1:
                raise ValueError('basis indices start at 1')
            v = parse_fraction(v)
            if v != 0:
                clean[i] = v
        self._entries = dict(sorted(clean.items()))

    @classmethod
    def basis(cls, j, coefficient=1):
        return cls({j: coefficient})

    @classmethod
    def from_doc(cls, doc):
        return cls({parse_int(k): parse_fraction(v) for k, v in doc.items()})

    def to_doc(self):
        return {str(i): fraction_str(v) for i, v in self._entries.items()}

    def __getitem__(self, i):
        return self._entries.get(i, Fraction(0))

    def items(self):
        return self._entries.items()

    def values(self):
        return list(self._entries.values())

    @property
    def supp(self):
        return tuple(self._entries)

    @property
    def range(self):
        """Smallest interval (lo, hi) holding supp(x); None for x = 0."""
        if not self._entries:
            return None
        s = self.supp
        return s[0], s[-1]

    def is_zero(self):
        return not self._entries

    def restrict(self, E):
        """E x for an interval E = (lo, hi), bounds included."""
        if E is None:
            return self
        lo, hi = E
        return Vec00({i: v for i, v in self._entries.items() if lo <= i <= hi})

    def restrict_to(self, indices):
        indices = set(indices)
        return Vec00({i: v for i, v in self._entries.items() if i in indices})

    def linf(self):
        return max((abs(v) for v in self._entries.values()), default=Fraction(0))

    def l1(self):
        return sum((abs(v) for v in self._entries.values()), Fraction(0))

    def lp_bounds(self, p, denominator):
        return pnorm_bounds(self.values(), p, denominator)

    def __add__(self, other):
        out = dict(self._entries)
        for i, v in other.items():
            out[i] = out.get(i, Fraction(0)) + v
        return Vec00(out)

    def __neg__(self):
        return Vec00({i: -v for i, v in self._entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        c = parse_fraction(c)
        return Vec00({i: c * v for i, v in self._entries.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Vec00) and self._entries == other._entries

    def __hash__(self):
        return hash(tuple(self._entries.items()))

    def __repr__(self):
        return 'Vec00({})'.format(
            ', '.join('{}: {}'.format(i, v) for i, v in self._entries.items()))


def block_combination(blocks, coefficients):
    """sum_i c_i x_i for blocks x_i."""
    out = Vec00()
    for x, c in zip(blocks, coefficients):
        out = out + x * c
    return out
