"""Truncated power series in ``b`` with exact rational coefficients."""

from fractions import Fraction

from .errors import NonzeroConstantTerm, NotAUnit, Obstruction

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(x) -> Fraction:
    """Coerce an int, str ("p/q") or Fraction to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot read {x!r} as an exact rational")


class TruncSeries:
    """Sum of c_n b^n for n < order, known exactly up to that order.

    Binary operations truncate to the smaller order.  Nothing is ever padded:
    a result is only as long as what its inputs determine.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order=None):
        cs = [rat(c) for c in coeffs]
        if order is None:
            order = len(cs)
        if order < 1:
            raise ValueError("order must be positive")
        if len(cs) > order:
            cs = cs[:order]
        else:
            cs.extend([ZERO] * (order - len(cs)))
        self.coeffs = cs
        self.order = order

    @classmethod
    def _make(cls, coeffs, order):
        # trusted constructor: coeffs is a fresh list of Fractions of length order
        s = cls.__new__(cls)
        s.coeffs = coeffs
        s.order = order
        return s

    @classmethod
    def zero(cls, order):
        return cls._make([ZERO] * order, order)

    @classmethod
    def constant(cls, c, order):
        cs = [ZERO] * order
        cs[0] = rat(c)
        return cls._make(cs, order)

    @classmethod
    def one(cls, order):
        return cls.constant(1, order)

    @classmethod
    def monomial(cls, c, n, order):
        cs = [ZERO] * order
        if n < order:
            cs[n] = rat(c)
        return cls._make(cs, order)

    @classmethod
    def b(cls, order):
        return cls.monomial(1, 1, order)

    # access

    def __getitem__(self, n):
        return self.coeffs[n]

    def coefficient(self, n) -> Fraction:
        if n >= self.order:
            raise IndexError(f"coefficient {n} is beyond order {self.order}")
        return self.coeffs[n]

    def valuation(self):
        for n, c in enumerate(self.coeffs):
            if c:
                return n
        return None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return TruncSeries._make(self.coeffs[:order], order)

    # arithmetic

    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(other, self.order)
        n = min(self.order, other.order)
        x, y = self.coeffs, other.coeffs
        return TruncSeries._make([x[i] + y[i] for i in range(n)], n)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries._make([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(other, self.order)
        n = min(self.order, other.order)
        x, y = self.coeffs, other.coeffs
        return TruncSeries._make([x[i] - y[i] for i in range(n)], n)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return series_mul(self, other)
        c = rat(other)
        return TruncSeries._make([c * x for x in self.coeffs], self.order)

    __rmul__ = __mul__

    def __pow__(self, m: int):
        if m < 0:
            return series_inv(self) ** (-m)
        result = TruncSeries.one(self.order)
        base = self
        while m:
            if m & 1:
                result = result * base
            base = base * base
            m >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, TruncSeries):
            n = min(self.order, other.order)
            return self.coeffs[:n] == other.coeffs[:n]
        if isinstance(other, (int, Fraction)):
            return self == TruncSeries.constant(other, self.order)
        return NotImplemented

    __hash__ = None

    def inverse(self):
        return series_inv(self)

    def exp(self):
        return series_exp(self)

    def derivative(self):
        """dS/db; the top coefficient is lost, so the order drops by one."""
        if self.order == 1:
            raise ValueError("derivative of an order-1 series is undetermined")
        cs = self.coeffs
        return TruncSeries._make([(n + 1) * cs[n + 1] for n in range(self.order - 1)],
                                 self.order - 1)

    def b2_derivative(self):
        """b^2 dS/db, which loses no order."""
        cs = self.coeffs
        out = [ZERO] * self.order
        for n in range(2, self.order):
            out[n] = (n - 1) * cs[n - 1]
        return TruncSeries._make(out, self.order)

    def euler(self):
        """b dS/db."""
        return TruncSeries._make([n * c for n, c in enumerate(self.coeffs)], self.order)

    def shift(self, m: int = 1):
        """b^m S at the same order."""
        out = [ZERO] * m + self.coeffs[: self.order - m]
        return TruncSeries._make(out[: self.order], self.order)

    def divide_b(self, m: int = 1):
        """S / b^m; requires valuation >= m and lowers the order by m."""
        if any(self.coeffs[:m]):
            raise ValueError(f"series is not divisible by b^{m}")
        if m >= self.order:
            raise ValueError("nothing left after division")
        return TruncSeries._make(self.coeffs[m:], self.order - m)

    def integral(self):
        """Primitive without constant term (order rises by one)."""
        out = [ZERO] + [c / (n + 1) for n, c in enumerate(self.coeffs)]
        return TruncSeries._make(out, self.order + 1)

    def __repr__(self):
        terms = []
        for n, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if n == 0 else ("b" if n == 1 else f"b^{n}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}*{mono}")
        body = " + ".join(terms) if terms else "0"
        return f"TruncSeries({body}, order={self.order})"


def series_mul(x: TruncSeries, y: TruncSeries) -> TruncSeries:
    n = min(x.order, y.order)
    xs, ys = x.coeffs, y.coeffs
    out = [ZERO] * n
    xnz = [(i, c) for i, c in enumerate(xs[:n]) if c]
    ynz = [(j, c) for j, c in enumerate(ys[:n]) if c]
    for i, c in xnz:
        lim = n - i
        for j, d in ynz:
            if j >= lim:
                break
            out[i + j] += c * d
    return TruncSeries._make(out, n)


def series_inv(x: TruncSeries) -> TruncSeries:
    xs = x.coeffs
    if not xs[0]:
        raise NotAUnit("series with zero constant term is not invertible")
    n = x.order
    inv0 = 1 / xs[0]
    out = [ZERO] * n
    out[0] = inv0
    nz = [(i, c) for i, c in enumerate(xs) if c and i > 0]
    for m in range(1, n):
        acc = ZERO
        for i, c in nz:
            if i > m:
                break
            acc += c * out[m - i]
        out[m] = -acc * inv0
    return TruncSeries._make(out, n)


def series_exp(x: TruncSeries) -> TruncSeries:
    """exp via the recursion n E_n = sum_k k x_k E_{n-k} (from E' = x' E)."""
    xs = x.coeffs
    if xs[0]:
        raise NonzeroConstantTerm("exp needs a series without constant term")
    n = x.order
    out = [ZERO] * n
    out[0] = ONE
    nz = [(k, k * c) for k, c in enumerate(xs) if c]
    for m in range(1, n):
        acc = ZERO
        for k, kc in nz:
            if k > m:
                break
            acc += kc * out[m - k]
        out[m] = acc / m
    return TruncSeries._make(out, n)


def solve_linear_b_ode(c, F: TruncSeries, resonant_value=0) -> TruncSeries:
    """Solve b U' - c U = F coefficientwise.

    When c is a non-negative integer below the order, the coefficient U_c is
    free (set to ``resonant_value``) and F_c must vanish.
    """
    c = rat(c)
    rv = rat(resonant_value)
    n = F.order
    out = [ZERO] * n
    resonant = c.denominator == 1 and 0 <= c < n
    for m in range(n):
        if resonant and m == c:
            if F.coeffs[m]:
                raise Obstruction(int(c), f"b U' - {c} U = F needs F_{int(c)} = 0, got {F.coeffs[m]}")
            out[m] = rv
        else:
            out[m] = F.coeffs[m] / (m - c)
    return TruncSeries._make(out, n)
