"""Operators sum_j S_j(b) a^j subject to a.S = S.a + b^2 S'.

Everything is computed modulo b^N, which is a two-sided ideal, so products
lose no order.
"""

from fractions import Fraction
from math import comb
from typing import NamedTuple

from .errors import NotAUnit, NotMonic, Obstruction
from .series import TruncSeries, rat, series_inv, solve_linear_b_ode


def _as_series(x, order):
    if isinstance(x, TruncSeries):
        return x if x.order == order else x.truncate(order)
    return TruncSeries.constant(x, order)


class OreOperator:
    """Left-normal form: ``coeffs[j]`` is the series standing left of a^j."""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order=None):
        coeffs = list(coeffs)
        if order is None:
            order = min(c.order for c in coeffs if isinstance(c, TruncSeries))
        cs = [_as_series(c, order) for c in coeffs] or [TruncSeries.zero(order)]
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        self.coeffs = cs
        self.order = order

    @classmethod
    def series(cls, S: TruncSeries):
        return cls([S], S.order)

    @classmethod
    def scalar(cls, c, order):
        return cls([TruncSeries.constant(c, order)], order)

    @classmethod
    def a(cls, order):
        return cls([TruncSeries.zero(order), TruncSeries.one(order)], order)

    @classmethod
    def b(cls, order):
        return cls([TruncSeries.b(order)], order)

    @classmethod
    def linear(cls, lam, order):
        """a - lam*b."""
        return cls([TruncSeries.monomial(-rat(lam), 1, order), TruncSeries.one(order)], order)

    @property
    def a_degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0].is_zero()

    def leading(self) -> TruncSeries:
        return self.coeffs[-1]

    def truncate(self, order):
        return OreOperator([c.truncate(order) for c in self.coeffs], order)

    def _coerce(self, other):
        if isinstance(other, OreOperator):
            return other
        if isinstance(other, TruncSeries):
            return OreOperator.series(other)
        return OreOperator.scalar(other, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        d = max(len(self.coeffs), len(other.coeffs))
        zero = TruncSeries.zero(n)
        cs = []
        for j in range(d):
            x = self.coeffs[j] if j < len(self.coeffs) else zero
            y = other.coeffs[j] if j < len(other.coeffs) else zero
            cs.append(x + y)
        return OreOperator(cs, n)

    __radd__ = __add__

    def __neg__(self):
        return OreOperator([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return op_mul(self, self._coerce(other))

    def __rmul__(self, other):
        return op_mul(self._coerce(other), self)

    def __pow__(self, m: int):
        out = OreOperator.scalar(1, self.order)
        for _ in range(m):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, OreOperator):
            return NotImplemented
        n = min(self.order, other.order)
        if len(self.coeffs) != len(other.coeffs):
            return False
        return all(x.truncate(n) == y.truncate(n) for x, y in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        parts = []
        for j, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            s = repr(c)[len("TruncSeries("):].rsplit(", order=", 1)[0]
            mono = "" if j == 0 else ("a" if j == 1 else f"a^{j}")
            parts.append(f"({s})" + (f"*{mono}" if mono else ""))
        return f"OreOperator({' + '.join(parts) or '0'}, order={self.order})"


def _d_powers(T: TruncSeries, r: int):
    """[T, D T, ..., D^r T] with D = b^2 d/db."""
    out = [T]
    for _ in range(r):
        out.append(out[-1].b2_derivative())
    return out


def op_mul(x: OreOperator, y: OreOperator) -> OreOperator:
    """Product in left-normal form using a^i T = sum_m C(i,m) D^(i-m)(T) a^m."""
    n = min(x.order, y.order)
    dx = x.a_degree
    out = [TruncSeries.zero(n) for _ in range(dx + y.a_degree + 1)]
    for j, T in enumerate(y.coeffs):
        if T.is_zero():
            continue
        Dp = _d_powers(T.truncate(n) if T.order != n else T, dx)
        for i, S in enumerate(x.coeffs):
            if S.is_zero():
                continue
            for m in range(i + 1):
                term = Dp[i - m]
                if term.is_zero():
                    continue
                c = comb(i, m)
                out[m + j] = out[m + j] + (S * term) * c
    return OreOperator(out, n)


def op_product(*factors) -> OreOperator:
    out = factors[0]
    for f in factors[1:]:
        out = out * f
    return out


def op_invert_unit(x: OreOperator, target_b_order=None) -> OreOperator:
    """Inverse of c(1 - y) as c^-1 * sum y^n, y of positive b-valuation."""
    n = x.order if target_b_order is None else min(x.order, target_b_order)
    x = x.truncate(n) if n != x.order else x
    c = x.coeffs[0][0]
    if not c or any(S[0] for S in x.coeffs[1:]):
        raise NotAUnit("operator is not of the form c(1 - y) with y in b.A")
    y = OreOperator.scalar(1, n) - x * (1 / c)
    total = OreOperator.scalar(1, n)
    power = OreOperator.scalar(1, n)
    for _ in range(1, n):
        power = power * y
        if power.is_zero():
            break
        total = total + power
    return total * (1 / c)


def op_from_factors(lambdas, S) -> OreOperator:
    """(a - l1 b) S1^-1 (a - l2 b) ... S_{k-1}^-1 (a - lk b)."""
    lambdas = [rat(l) for l in lambdas]
    if len(S) != len(lambdas) - 1:
        raise ValueError("need exactly one unit between consecutive linear factors")
    if S:
        order = min(s.order for s in S)
    else:
        raise ValueError("a single factor needs an explicit order; use OreOperator.linear")
    out = OreOperator.linear(lambdas[0], order)
    for lam, s in zip(lambdas[1:], S):
        out = out * OreOperator.series(series_inv(s.truncate(order)))
        out = out * OreOperator.linear(lam, order)
    return out


def op_left_divmod(Q: OreOperator, P: OreOperator):
    """Q = T P + R with deg_a R < deg_a P, P monic."""
    n = min(Q.order, P.order)
    k = P.a_degree
    if P.leading() != TruncSeries.one(n):
        raise NotMonic("divisor must have leading coefficient 1")
    P = P.truncate(n) if P.order != n else P
    R = Q.truncate(n) if Q.order != n else Q
    T = OreOperator.scalar(0, n)
    while R.a_degree >= k and not R.is_zero():
        d = R.a_degree
        lead = R.leading()
        mono = OreOperator([TruncSeries.zero(n)] * (d - k) + [lead], n)
        T = T + mono
        R = R - mono * P
        # the a^d coefficient cancels exactly; make sure it is dropped
        if R.a_degree >= d:
            raise AssertionError("leading term did not cancel")
    return T, R


def commuting_rewrite(lambda1, p: int, S: TruncSeries, resonant_value=0):
    """Swap the two linear factors around a unit.

    Returns U with b U' = p (U - S) and the two sides
    (a - l1 b) S^-1 (a - l2 b)  and  U^-1 (a - (l2+1) b) [S U^-2]^-1 (a - (l1-1) b) U^-1,
    where l2 = l1 + p - 1.  Raises Obstruction(p) if S has a b^p term.
    """
    lambda1 = rat(lambda1)
    n = S.order
    if S[0] != 1:
        raise NotAUnit("S(0) must be 1")
    lambda2 = lambda1 + p - 1
    U = solve_linear_b_ode(p, S * (-p), resonant_value)
    Ui = series_inv(U)
    left = op_from_factors([lambda1, lambda2], [S])
    right = op_product(
        OreOperator.series(Ui),
        OreOperator.linear(lambda2 + 1, n),
        OreOperator.series(series_inv(S * Ui * Ui)),
        OreOperator.linear(lambda1 - 1, n),
        OreOperator.series(Ui),
    )
    if left != right:
        raise AssertionError("commuting identity failed")
    return U, left, right


class StandardComputation(NamedTuple):
    U: TruncSeries
    V: TruncSeries
    rewritten: OreOperator
    coeff_p2: Fraction


def standard_computation(lambda1, p1: int, p2: int, S1: TruncSeries, S2: TruncSeries):
    """Move (a - l1 b) to the right end of (a-l1 b)S1^-1(a-l2 b)S2^-1(a-l3 b).

    The result is U^-1 (a-(l2+1)b) [S1 U^-2 V]^-1 (a-(l3+1)b) [U S2 V^-2]^-1
    (a-(l1-2)b) V^-1.  ``coeff_p2`` is the b^p2 coefficient of S1 U^-2 V.
    """
    lambda1 = rat(lambda1)
    n = min(S1.order, S2.order)
    S1, S2 = S1.truncate(n), S2.truncate(n)
    if S1[0] != 1 or S2[0] != 1:
        raise NotAUnit("S1(0) and S2(0) must be 1")
    lambda2 = lambda1 + p1 - 1
    lambda3 = lambda2 + p2 - 1
    q = p1 + p2
    U0 = solve_linear_b_ode(p1, S1 * (-p1), 0)
    alpha = S2[p2] if p2 < n else Fraction(0)
    U = U0
    if q < n:
        g = (U0 * S2)[q]
        if alpha:
            U = U0 + TruncSeries.monomial(-g / alpha, p1, n)
        elif g:
            raise Obstruction(q, f"b^{q} coefficient of U.S2 is {g} and cannot be cancelled")
    Ui = series_inv(U)
    V = solve_linear_b_ode(q, U * S2 * (-q), 0)
    Vi = series_inv(V)
    rewritten = op_product(
        OreOperator.series(Ui),
        OreOperator.linear(lambda2 + 1, n),
        OreOperator.series(series_inv(S1 * Ui * Ui * V)),
        OreOperator.linear(lambda3 + 1, n),
        OreOperator.series(series_inv(U * S2 * Vi * Vi)),
        OreOperator.linear(lambda1 - 2, n),
        OreOperator.series(Vi),
    )
    original = op_from_factors([lambda1, lambda2, lambda3], [S1, S2])
    if rewritten != original:
        raise AssertionError("double commutation does not reproduce the operator")
    ZV = Ui * V
    lhs = ZV.euler() - ZV * p2
    rhs = S1 * Ui * Ui * V * p1 - S2 * q
    if lhs != rhs:
        raise AssertionError("conservation identity failed")
    M = S1 * Ui * Ui * V
    coeff = M[p2] if p2 < n else None
    return StandardComputation(U, V, rewritten, coeff)


def op_monic(P: OreOperator) -> OreOperator:
    """Left multiple of P by the inverse of its leading series (same left ideal)."""
    return OreOperator.series(series_inv(P.leading())) * P
