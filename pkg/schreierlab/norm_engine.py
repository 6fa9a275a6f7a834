"""Norms of finitely supported vectors by iterating the norm's implicit equation.

For a vector x with support j_0 < ... < j_{N-1} the engine tabulates, for
every position interval E = [i, j), a lower value L(E) attained by an explicit
functional tree and an upper value U(E). One iteration applies

    max( ||E x||_inf,
         max_k (1/m_{2k}) sup (sum_s V(E_s x)^p)^(1/p),
         max_k (2^(1/p)/m_{2k+1}) sup (sum_s W(E_s x)^p)^(1/p) )

where the inner sups range over admissible interval partitions of E and W
only sees even-class functionals. Lower values use rational Hölder
coefficients, so each certificate evaluates to its value exactly; upper values
start from min(12 ||E x||_p, ||E x||_1) and only ever decrease.
"""
from dataclasses import dataclass
from fractions import Fraction
import heapq

from .trees import Leaf, Node, FunctionalTree, evaluate
from .vectors import block_combination
from .utils import power_lower, power_upper, pnorm_bounds, power_sum_bounds

# odd-class lower search uses at most this many even classes per interval
ODD_CLASS_CAP = 3

# the upper l_p estimate for normalized blocks
UPPER_CONSTANT = 12


@dataclass
class NormResult:
    value: Fraction
    certificate: FunctionalTree
    depth: int
    stabilization: bool
    evenClassValue: Fraction
    upper: Fraction
    gap: Fraction

    def to_doc(self):
        return {'value': self.value,
                'certificate': self.certificate,
                'depth': self.depth,
                'stabilization': self.stabilization,
                'evenClassValue': self.evenClassValue,
                'upper': self.upper,
                'gap': self.gap}


def holder_optimal_coefficients(values, q, radius=Fraction(1),
                                denominator=10**12, mass=None):
    """Rational (gamma_s) in the l_q ball of the given radius maximizing
    sum gamma_s values_s, up to the rounding allowed by ``denominator``.

    ``mass`` = (base, exponent) overrides the q-th power radius^q, for radii
    such as 2^(1/p) that are not rational.
    """
    q = Fraction(q)
    p = q / (q - 1)
    values = [Fraction(v) for v in values]
    if mass is None:
        mass = (Fraction(radius), q)
    mass_lower = power_lower(mass[0], mass[1], denominator)
    w = [power_lower(v, p - 1, denominator) if v > 0 else Fraction(0)
         for v in values]
    total = power_sum_bounds(w, q, denominator)[1]
    if total == 0:
        return [Fraction(0)] * len(values)
    t = power_lower(mass_lower / total, 1 / q, denominator)
    return [wi * t for wi in w]


###############################################################################
# partition tables
###############################################################################
def _partition_levels(idx, weights, levels):
    """Best S_n-admissible interval partitions for n = 0..levels.

    ``weights[(i, j)]`` scores the piece [i, j). Returns a list whose entry n
    maps (i, j) to (score, pieces) over partitions of [i, j) whose first
    piece starts at i; the list stops early at a fixed point.
    """
    N = len(idx)
    current = {(i, j): (weights[(i, j)], ((i, j),))
               for i in range(N) for j in range(i + 1, N + 1)}
    tables = [current]
    for _ in range(levels):
        below = tables[-1]
        memo = {}

        def chain(c, j, budget):
            if c == j:
                return Fraction(0), ()
            if budget == 0:
                return None
            budget = min(budget, j - c)
            key = (c, j, budget)
            if key in memo:
                return memo[key]
            best = None
            for t in range(c + 1, j + 1):
                rest = chain(t, j, budget - 1)
                if rest is None:
                    continue
                head = below[(c, t)]
                score = head[0] + rest[0]
                if best is None or score > best[0]:
                    best = score, head[1] + rest[1]
            memo[key] = best
            return best

        nxt = {}
        for (i, j) in below:
            nxt[(i, j)] = chain(i, j, idx[i])
        tables.append(nxt)
        if all(nxt[key][0] == below[key][0] for key in below):
            break
    return tables


def _at_level(tables, n):
    return tables[min(n, len(tables) - 1)]


def _monotone(table, N):
    """Raise each interval to the best of its sub-intervals."""
    for length in range(2, N + 1):
        for i in range(0, N - length + 1):
            j = i + length
            best = table[(i, j)]
            for key in ((i + 1, j), (i, j - 1)):
                if table[key][0] > best[0]:
                    best = table[key]
            table[(i, j)] = best
    return table


###############################################################################
# the engine
###############################################################################
class _Table:
    """All interval values of one vector."""

    def __init__(self, x, sys, depth, tol, prune=True):
        self.sys = sys
        self.prune = prune
        self.x = x
        self.idx = list(x.supp)
        self.a = [x[j] for j in self.idx]
        self.N = len(self.idx)
        self.p = sys.p
        self.D = sys.denominator
        self.intervals = [(i, j) for i in range(self.N)
                          for j in range(i + 1, self.N + 1)]
        self.lp_upper = {E: pnorm_bounds(self.a[E[0]:E[1]], self.p, self.D)[1]
                         for E in self.intervals}
        self.leaf = {}
        for (i, j) in self.intervals:
            s = max(range(i, j), key=lambda s: (abs(self.a[s]), -s))
            sign = 1 if self.a[s] > 0 else -1
            self.leaf[(i, j)] = (abs(self.a[s]),
                                 FunctionalTree(Leaf(sign, self.idx[s])))
        self.L = dict(self.leaf)
        self.W = {c: {E: (Fraction(0), None) for E in self.intervals}
                  for c in sys.even_classes()}
        self.l1 = {E: sum((abs(v) for v in self.a[E[0]:E[1]]), Fraction(0))
                   for E in self.intervals}
        self.U = {E: min(UPPER_CONSTANT * self.lp_upper[E], self.l1[E])
                  for E in self.intervals}
        # even-class functionals carry a factor 1/m_{2k} <= 1/m_even
        self.m_even = min(sys.weight(2 * c) for c in sys.even_classes())
        self.UW = {E: self.U[E] / self.m_even for E in self.intervals}
        self.tail_even, self.tail_odd = self._tail_uppers()
        self.tail = {E: max(self.tail_even[E], self.tail_odd[E])
                     for E in self.intervals}
        self.depth = 0
        self.stabilization = False
        self._iterate(depth, tol)

    def _tail_uppers(self):
        """l_1 bounds for the classes without a table.

        Even classes past the tables weigh at least m_{2K}; odd classes
        past them at least m_{2c+1} for the first odd class c missing n,
        capped at m_{2K+1}.
        """
        sys = self.sys
        even, odd = set(sys.even_classes()), set(sys.odd_classes())
        c = 1
        while c in even:
            c += 1
        m_even = sys.weight(min(2 * c, 2 * sys.K))
        c = 0
        while c in odd:
            c += 1
        m_odd = sys.weight(min(2 * c + 1, 2 * sys.K + 1))
        return ({E: self.l1[E] / m_even for E in self.intervals},
                {E: 2 * self.l1[E] / m_odd for E in self.intervals})

    # ---------------------------------------------------------------------
    def _bound(self, E, m, odd):
        """Upper value of any functional of the class with weight m on E x."""
        b = UPPER_CONSTANT * self.lp_upper[E] / m
        return 2 * b / self.m_even if odd else b

    def _pruned(self, E, m, odd, L):
        return self.prune and self._bound(E, m, odd) <= L[E][0]

    def _active(self, m, odd, L):
        return not all(self._pruned(E, m, odd, L) for E in self.intervals)

    def _iterate(self, depth, tol):
        root = (0, self.N)
        for t in range(1, depth + 1):
            changed = self._step()
            self.depth = t
            if not changed:
                self.stabilization = True
                break
            if self.U[root] <= self.L[root][0]:
                break
            if self.U[root] - self.L[root][0] <= tol:
                break

    def _step(self):
        sys = self.sys
        L, W, U, UW = self.L, self.W, self.U, self.UW
        even = [(c, sys.weight(2 * c), sys.n(2 * c)) for c in sys.even_classes()]
        odd = [(c, sys.weight(2 * c + 1), sys.n(2 * c + 1))
               for c in sys.odd_classes()]
        active_even = [cls for cls in even if self._active(cls[1], False, L)]
        active_odd = [cls for cls in odd if self._active(cls[1], True, L)]

        # lower track: even classes over the previous values
        newW = {}
        tables = None
        if active_even:
            weights = {E: power_lower(L[E][0], self.p, self.D)
                       for E in self.intervals}
            tables = _partition_levels(self.idx, weights,
                                       max(n for _, _, n in active_even))
        for cls in even:
            c, m, n = cls
            table = {E: W[c][E] for E in self.intervals}
            if cls in active_even:
                level = _at_level(tables, n)
                for E in self.intervals:
                    if self._pruned(E, m, False, L):
                        continue
                    cand = self._even_node(2 * c, m, level[E][1], L)
                    if cand is not None and cand[0] > table[E][0]:
                        table[E] = cand
            newW[c] = _monotone(table, self.N)

        # lower track: odd classes over the previous even values
        odd_values = {}
        for c, m, n in active_odd:
            for E in self.intervals:
                if self._pruned(E, m, True, L):
                    continue
                cand = self._odd_node(2 * c + 1, m, E, W)
                if cand is not None and cand[0] > odd_values.get(E, (0,))[0]:
                    odd_values[E] = cand

        newL = {}
        for E in self.intervals:
            best = L[E]
            for c in newW:
                if newW[c][E][0] > best[0]:
                    best = newW[c][E]
            if E in odd_values and odd_values[E][0] > best[0]:
                best = odd_values[E]
            newL[E] = best
        newL = _monotone(newL, self.N)

        # upper track; pruned classes never exceed the lower values
        even_up = self._class_uppers(active_even, U, False)
        odd_up = self._class_uppers(active_odd, UW, True)
        pruned_even = [m for c, m, n in even if (c, m, n) not in active_even]
        newU, newUW = {}, {}
        for j in range(1, self.N + 1):
            run_u = run_w = Fraction(0)
            for i in range(j - 1, -1, -1):
                E = (i, j)
                run_u = max(run_u, self.leaf[E][0], even_up[E], odd_up[E],
                            self.tail[E])
                run_w = max([run_w, even_up[E], self.tail_even[E]] +
                            [self._bound(E, m, False) for m in pruned_even])
                newU[E] = min(U[E], max(run_u, newL[E][0]))
                best_w = max((newW[c][E][0] for c in newW), default=Fraction(0))
                newUW[E] = min(UW[E], max(run_w, best_w))

        changed = (any(newL[E][0] != L[E][0] for E in self.intervals)
                   or any(newU[E] != U[E] for E in self.intervals)
                   or any(newUW[E] != UW[E] for E in self.intervals)
                   or any(newW[c][E][0] != W[c][E][0]
                          for c in W for E in self.intervals))
        self.L, self.W, self.U, self.UW = newL, newW, newU, newUW
        return changed

    def _class_uppers(self, classes, values, odd):
        """Per interval, the largest upper value over ``classes`` among
        partitions whose first piece starts at the interval's left end."""
        out = {E: Fraction(0) for E in self.intervals}
        if not classes:
            return out
        weights = {E: power_upper(values[E], self.p, self.D)
                   for E in self.intervals}
        tables = _partition_levels(self.idx, weights,
                                   max(n for _, _, n in classes))
        for c, m, n in classes:
            level = _at_level(tables, n)
            for E in self.intervals:
                score = level[E][0] * (2 if odd else 1)
                bound = min(self._bound(E, m, odd),
                            power_upper(score, 1 / self.p, self.D) / m)
                out[E] = max(out[E], bound)
        return out

    def _even_node(self, weight_index, m, pieces, L):
        kids = [L[E] for E in pieces if L[E][0] > 0]
        if not kids:
            return None
        return self._combine(weight_index, m, kids, None)

    def _combine(self, weight_index, m, kids, mass):
        values = [v for v, _ in kids]
        gammas = holder_optimal_coefficients(values, self.sys.q,
                                             denominator=self.D, mass=mass)
        children = tuple((g, cert.root) for g, (_, cert) in zip(gammas, kids)
                         if g != 0)
        if not children:
            return None
        value = sum((g * v for g, v in zip(gammas, values)), Fraction(0)) / m
        return value, FunctionalTree(Node(weight_index, children))

    def _odd_node(self, weight_index, m, E, W):
        """Best distinct-class, S_1-admissible even children on E."""
        i, j = E
        root_values = [(W[c][E][0], c) for c in W if W[c][E][0] > 0]
        classes = [c for _, c in heapq.nlargest(ODD_CLASS_CAP, root_values)]
        if not classes:
            return None
        budget = self.idx[i]
        # states[pos][mask] = (score, [(piece, class)])
        states = {i: {0: (Fraction(0), ())}}
        for pos in range(i, j):
            for mask, (score, chosen) in list(states.get(pos, {}).items()):
                # skip position pos
                self._relax(states, pos + 1, mask, score, chosen)
                if bin(mask).count("1") >= budget:
                    continue
                for end in range(pos + 1, j + 1):
                    for b, c in enumerate(classes):
                        if mask & (1 << b):
                            continue
                        v = W[c][(pos, end)][0]
                        if v <= 0:
                            continue
                        self._relax(states, end, mask | (1 << b),
                                    score + power_lower(v, self.p, self.D),
                                    chosen + (((pos, end), c),))
        final = [s for mask, s in states.get(j, {}).items() if mask]
        if not final:
            return None
        score, chosen = max(final, key=lambda s: s[0])
        kids = [W[c][piece] for piece, c in chosen]
        return self._combine(weight_index, m, kids, self.sys.odd_mass())

    @staticmethod
    def _relax(states, pos, mask, score, chosen):
        bucket = states.setdefault(pos, {})
        if mask not in bucket or score > bucket[mask][0]:
            bucket[mask] = (score, chosen)

    # ---------------------------------------------------------------------
    def result(self, E=None):
        if E is None:
            E = (0, self.N)
        value, cert = self.L[E]
        even = max((self.W[c][E][0] for c in self.W), default=Fraction(0))
        return NormResult(value=value, certificate=cert, depth=self.depth,
                          stabilization=self.stabilization,
                          evenClassValue=even, upper=self.U[E],
                          gap=self.U[E] - value)


class NormEngine:
    """Norm session over one parameter system; tables are cached per vector."""

    def __init__(self, sys, depth=4, tol=Fraction(0), prune=True):
        self.sys = sys
        self.depth = depth
        self.tol = Fraction(tol)
        self.prune = prune
        self.cache = {}

    def table(self, x):
        key = (x, self.depth, self.tol)
        if key not in self.cache:
            self.cache[key] = _Table(x, self.sys, self.depth, self.tol,
                                     self.prune)
        return self.cache[key]

    def norm(self, x):
        if x.is_zero():
            raise ValueError('norm of the zero vector')
        return self.table(x).result()

    def norm_interval(self, x, I):
        """Norm of the restriction of x to the interval I = (lo, hi)."""
        lo, hi = I
        positions = [s for s, j in enumerate(x.supp) if lo <= j <= hi]
        if not positions:
            return NormResult(Fraction(0), None, 0, True, Fraction(0),
                              Fraction(0), Fraction(0))
        return self.table(x).result((positions[0], positions[-1] + 1))

    def norm_lower(self, x):
        return Fraction(0) if x.is_zero() else self.norm(x).value

    def norm_upper(self, x):
        return Fraction(0) if x.is_zero() else self.norm(x).upper


def norm(x, sys, depth=4, tol=Fraction(0)):
    return NormEngine(sys, depth, tol).norm(x)


def norm_interval(x, I, sys, depth=4, tol=Fraction(0)):
    return NormEngine(sys, depth, tol).norm_interval(x, I)


def certificate_value(result, x, sys):
    """Re-evaluate a norm certificate on x."""
    return evaluate(result.certificate, x, sys)


###############################################################################
# block estimates
###############################################################################
def block_estimates(blocks, coeffs, sys, engine=None, rel_tol=Fraction(1, 10**6)):
    """Lower (1/m_2) and upper (12) l_p estimates for sum_i a_i x_i.

    Blocks are taken as normalized. The lower side is certified by the
    engine's lower value, up to the relative rounding ``rel_tol`` of rational
    Hölder coefficients; the upper side by the engine's upper value.
    """
    engine = engine or NormEngine(sys)
    x = block_combination(blocks, coeffs)
    lo_p, hi_p = pnorm_bounds(coeffs, sys.p, sys.denominator)
    result = engine.norm(x)
    supports = [b.supp for b in blocks if not b.is_zero()]
    lower_hypothesis = bool(supports) and len(supports) <= supports[0][0]
    lower = lo_p / sys.weight(2)
    upper = UPPER_CONSTANT * hi_p
    return {'lower_hypothesis': lower_hypothesis,
            'lower_estimate': lower,
            'upper_estimate': upper,
            'norm_lower': result.value,
            'norm_upper': result.upper,
            'gap': result.gap,
            'lower_holds': (not lower_hypothesis
                            or result.value >= lower * (1 - rel_tol)),
            'upper_holds': result.upper <= upper}
