"""Exact linear algebra over Q.

Large eliminations go through FLINT (python-flint); tiny matrices stay in
pure Python where conversion overhead would dominate.
"""

from fractions import Fraction

import flint

ZERO = Fraction(0)


def to_fmpq(x: Fraction):
    return flint.fmpq(x.numerator, x.denominator)


def from_fmpq(x) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def _to_mat(rows, ncols):
    flat = []
    for row in rows:
        flat.extend(flint.fmpq(c.numerator, c.denominator) if c else 0 for c in row)
    return flint.fmpq_mat(len(rows), ncols, flat)


def rref(rows, ncols):
    """Reduced row echelon form: (nonzero rows as Fractions, pivot columns)."""
    if not rows:
        return [], []
    R, r = _to_mat(rows, ncols).rref()
    ent = R.entries()
    out, pivots = [], []
    for i in range(r):
        row = [from_fmpq(x) for x in ent[i * ncols:(i + 1) * ncols]]
        pivots.append(next(j for j, c in enumerate(row) if c))
        out.append(row)
    return out, pivots


def nullspace(rows, ncols):
    """A basis of {x : rows . x = 0}, one vector per free column."""
    red, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [ZERO] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def rank(rows, ncols) -> int:
    if not rows:
        return 0
    return _to_mat(rows, ncols).rank()


def row_basis(rows, ncols):
    """Reduced basis of the row span."""
    return rref(rows, ncols)[0]


def solve(rows, rhs):
    """Solve the square invertible system rows . x = rhs."""
    n = len(rows)
    A = _to_mat(rows, n)
    B = flint.fmpq_mat(n, 1, [to_fmpq(c) for c in rhs])
    X = A.solve(B)
    return [from_fmpq(x) for x in X.entries()]


# small dense helpers (k x k with k ~ rank of a module)

def mat_mul(A, B):
    m, n = len(A), len(B[0])
    inner = len(B)
    return [[sum((A[i][t] * B[t][j] for t in range(inner) if A[i][t]), ZERO)
             for j in range(n)] for i in range(m)]


def mat_vec(A, v):
    return [sum((a * x for a, x in zip(row, v) if a), ZERO) for row in A]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def mat_inv(A):
    """Gauss-Jordan inverse; raises ZeroDivisionError when singular."""
    n = len(A)
    M = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


def det(A) -> Fraction:
    n = len(A)
    M = [list(row) for row in A]
    d = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            return ZERO
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            d = -d
        d *= M[col][col]
        for r in range(col + 1, n):
            if M[r][col]:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return d


def _poly_list(p):
    return [from_fmpq(c) for c in p.coeffs()]


def charpoly(A):
    """Coefficients (low degree first) of det(z - A)."""
    n = len(A)
    return _poly_list(_to_mat(A, n).charpoly())


def minpoly(A):
    n = len(A)
    return _poly_list(_to_mat(A, n).minpoly())


def rational_roots(coeffs):
    """Rational roots with multiplicity of a polynomial given low degree first.

    Returns (roots, splits) where ``splits`` tells whether the polynomial is a
    product of rational linear factors.
    """
    p = flint.fmpq_poly([to_fmpq(c) for c in coeffs])
    roots = [(from_fmpq(r), m) for r, m in p.roots()]
    return roots, sum(m for _, m in roots) == p.degree()
