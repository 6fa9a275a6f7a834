from dataclasses import is_dataclass, fields
from enum import Enum
from fractions import Fraction
import numpy as np
import pandas as pd
from sympy import integer_nthroot

# integers at least this large are written as decimal strings
BIG_INT = 2**53

# denominators tried, in order, when deciding an inequality between sums of
# irrational powers
PRECISIONS = (2**32, 2**64, 2**128, 2**256, 2**512)


def jsonify(d):
    """recursively formats results for json serialization.

    Rationals become "num/den" strings and unbounded integers decimal strings,
    so a dumped report reads back exactly.
    """
    if isinstance(d, (list, tuple)):
        return [jsonify(v) for v in d]
    elif isinstance(d, (set, frozenset)):
        return [jsonify(v) for v in sorted(d)]
    elif isinstance(d, dict):
        return {str(k): jsonify(v) for k, v in d.items()}
    elif hasattr(d, 'to_doc'):
        return jsonify(d.to_doc())
    elif isinstance(d, Fraction):
        return fraction_str(d)
    elif isinstance(d, (bool, np.bool_)):
        return bool(d)
    elif isinstance(d, Enum):
        return d.value
    elif isinstance(d, np.ndarray):
        return jsonify(d.tolist())
    elif isinstance(d, pd.DataFrame) or isinstance(d, pd.Series):
        return jsonify(d.values.tolist())
    elif isinstance(d, (int, np.integer)):
        d = int(d)
        return d if abs(d) < BIG_INT else str(d)
    elif isinstance(d, (float, np.floating)):
        return float(d)
    elif d is None:
        return None
    elif is_dataclass(d):
        return jsonify({f.name: getattr(d, f.name) for f in fields(d)})
    elif not isinstance(d, str):
        print("WARNING: attempting to store ", d, "as a str for json")
        return str(d)
    return d


def fraction_str(x):
    return str(Fraction(x))


def parse_fraction(v):
    """Exact rational from an int, a Fraction or a "num/den" / decimal string.

    Floats are refused: they would silently round.
    """
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (bool, np.bool_)):
        raise ValueError('not an exact rational: ' + repr(v))
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    raise ValueError('not an exact rational: ' + repr(v))


def parse_int(v):
    """Unbounded integer from an int or a decimal string."""
    if isinstance(v, (bool, np.bool_)):
        raise ValueError('not an integer: ' + repr(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, str):
        return int(v.strip())
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    raise ValueError('not an integer: ' + repr(v))


def to_float(x):
    """Float view of an exact value for human-readable report columns."""
    try:
        return float(x)
    except OverflowError:
        return float('inf') if x > 0 else float('-inf')


###############################################################################
# exact roots and powers
###############################################################################
def exact_root(x, n):
    """x^(1/n) as a Fraction when it is rational, else None (x >= 0)."""
    x = Fraction(x)
    assert x >= 0, 'root of a negative number'
    num, num_exact = integer_nthroot(x.numerator, n)
    den, den_exact = integer_nthroot(x.denominator, n)
    if num_exact and den_exact:
        return Fraction(num, den)
    return None


def root_bounds(x, n, denominator):
    """Rationals lo <= x^(1/n) <= hi, with hi - lo <= 1/denominator.

    Both bounds equal the root when it is rational.
    """
    x = Fraction(x)
    r = exact_root(x, n)
    if r is not None:
        return r, r
    t = x * denominator**n
    lo = integer_nthroot(t.numerator // t.denominator, n)[0]
    return Fraction(lo, denominator), Fraction(lo + 1, denominator)


def power_bounds(x, e, denominator):
    """Bounds lo <= x^e <= hi for x >= 0 and a rational exponent e >= 0."""
    x = Fraction(x)
    e = Fraction(e)
    assert x >= 0 and e >= 0
    if e == 0:
        return Fraction(1), Fraction(1)
    base = x**e.numerator
    if e.denominator == 1:
        return base, base
    return root_bounds(base, e.denominator, denominator)


def power_lower(x, e, denominator):
    return power_bounds(x, e, denominator)[0]


def power_upper(x, e, denominator):
    return power_bounds(x, e, denominator)[1]


def power_sum_bounds(values, e, denominator):
    """Bounds on sum |v|^e."""
    lo = hi = Fraction(0)
    for v in values:
        a, b = power_bounds(abs(Fraction(v)), e, denominator)
        lo += a
        hi += b
    return lo, hi


def pnorm_bounds(values, p, denominator):
    """Bounds on (sum |v|^p)^(1/p)."""
    p = Fraction(p)
    lo_sum, hi_sum = power_sum_bounds(values, p, denominator)
    return (power_bounds(lo_sum, 1 / p, denominator)[0],
            power_bounds(hi_sum, 1 / p, denominator)[1])


def power_sum_at_most(values, e, bound_base=Fraction(1),
                      bound_exp=Fraction(1)):
    """Decide sum |v|^e <= bound_base^bound_exp exactly.

    Returns True or False, or None when both sides agree to the finest
    precision without being rational (never observed at lab scale).
    """
    values = [abs(Fraction(v)) for v in values]
    for denominator in PRECISIONS:
        lo, hi = power_sum_bounds(values, e, denominator)
        blo, bhi = power_bounds(bound_base, bound_exp, denominator)
        if hi <= blo:
            return True
        if lo > bhi:
            return False
    return None


def in_lq_ball(gammas, q, mass_base=Fraction(1), mass_exp=Fraction(1)):
    """(gammas) in the l_q ball whose q-th power radius is mass_base^mass_exp.

    Undecidable comparisons count as outside the ball.
    """
    return power_sum_at_most(gammas, q, mass_base, mass_exp) is True
