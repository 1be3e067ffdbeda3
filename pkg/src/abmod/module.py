"""Free (a,b)-modules of finite rank, truncated at b^N.

A module is given by its action matrix: ``action[i][j]`` is the coefficient of
e_i in a.e_j, and a(v) = A v + b^2 v'.  Vectors (``ModuleVec``) are lists of
k series.  Since a preserves b^N E, every algorithm below is exact linear
algebra on the finite model E / b^N E.
"""

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import linalg
from .errors import (InsufficientOrder, NotAFresco, NotAGenerator, NotNormal,
                     NotRegular, NotStable, WrongShape)
from .ore import OreOperator
from .series import ONE, ZERO, TruncSeries, rat, series_inv

# how many extra b-levels a kernel is computed with before being projected
# extra levels solved beyond M, as a multiple of M plus the rank (see kernel_dim)
KERNEL_LOOKAHEAD_RANKS = 2
TIE_BREAK_SEED = 20240611


class AbModule:
    __slots__ = ("rank", "order", "action", "_sparse")

    def __init__(self, action, order=None):
        k = len(action)
        if any(len(row) != k for row in action):
            raise ValueError("action matrix must be square")
        if order is None:
            order = min(s.order for row in action for s in row)
        self.rank = k
        self.order = order
        self.action = [[s if s.order == order else s.truncate(order) for s in row]
                       for row in action]
        self._sparse = [[[(m, c) for m, c in enumerate(s.coeffs) if c] for s in row]
                        for row in self.action]

    def is_simple_pole(self) -> bool:
        return all(s[0] == 0 for row in self.action for s in row)

    def constant_matrix(self):
        return [[s[0] for s in row] for row in self.action]

    def coefficient_matrix(self, n):
        return [[s[n] for s in row] for row in self.action]

    def truncate(self, order):
        return AbModule([[s.truncate(order) for s in row] for row in self.action], order)

    def basis_vector(self, j, order=None):
        n = self.order if order is None else order
        return [TruncSeries.one(n) if i == j else TruncSeries.zero(n) for i in range(self.rank)]

    def __eq__(self, other):
        if not isinstance(other, AbModule):
            return NotImplemented
        return self.rank == other.rank and all(
            x == y for rx, ry in zip(self.action, other.action) for x, y in zip(rx, ry))

    __hash__ = None

    def __repr__(self):
        return f"AbModule(rank={self.rank}, order={self.order})"

    # raw vectors: k lists of Fractions of a common length

    def _a_raw(self, v):
        k = self.rank
        n = len(v[0])
        out = [[ZERO] * n for _ in range(k)]
        sp = self._sparse
        for i in range(k):
            oi = out[i]
            row = sp[i]
            for j in range(k):
                vj = v[j]
                for m, c in row[j]:
                    if m >= n:
                        break
                    for t in range(n - m):
                        x = vj[t]
                        if x:
                            oi[t + m] += c * x
            vi = v[i]
            for t in range(2, n):
                x = vi[t - 1]
                if x:
                    oi[t] += (t - 1) * x
        return out

    def apply_a(self, v):
        raw = self._a_raw([s.coeffs for s in v])
        n = len(raw[0])
        return [TruncSeries._make(r, n) for r in raw]


ModuleVec = list  # list of TruncSeries, one per basis vector


def _raw(v, order=None):
    n = min(s.order for s in v) if order is None else order
    return [list(s.coeffs[:n]) for s in v]


def _vec(raw):
    n = len(raw[0])
    return [TruncSeries._make(list(r), n) for r in raw]


def _mul_b_raw(v):
    return [[ZERO] + r[:-1] for r in v]


def _add_raw(x, y, c=ONE):
    if not c:
        return [list(r) for r in x]
    return [[p + c * q if q else p for p, q in zip(rx, ry)] for rx, ry in zip(x, y)]


def _series_times_raw(S, v):
    out = []
    for r in v:
        out.append(TruncSeries._make(list(r), len(r)) * S)
    n = min(s.order for s in out)
    return [list(s.coeffs[:n]) for s in out]


def _flatten(v, levels):
    k = len(v)
    return [v[i][n] for n in range(levels) for i in range(k)]


def _unflatten(flat, k):
    levels = len(flat) // k
    return [[flat[n * k + i] for n in range(levels)] for i in range(k)]


# ---------------------------------------------------------------------------
# series matrices (k x k lists of TruncSeries)

def smat_identity(k, order):
    return [[TruncSeries.one(order) if i == j else TruncSeries.zero(order) for j in range(k)]
            for i in range(k)]


def smat_mul(A, B):
    k, m, inner = len(A), len(B[0]), len(B)
    out = []
    for i in range(k):
        row = []
        for j in range(m):
            acc = None
            for t in range(inner):
                if A[i][t].is_zero() or B[t][j].is_zero():
                    continue
                term = A[i][t] * B[t][j]
                acc = term if acc is None else acc + term
            if acc is None:
                acc = TruncSeries.zero(min(A[i][0].order, B[0][j].order))
            row.append(acc)
        out.append(row)
    return out


def smat_vec(A, v):
    return [row[0] for row in smat_mul(A, [[s] for s in v])]


def smat_inv(M):
    """Inverse of a series matrix whose constant term is invertible."""
    k = len(M)
    n = min(s.order for row in M for s in row)
    M0 = [[M[i][j][0] for j in range(k)] for i in range(k)]
    try:
        M0i = linalg.mat_inv(M0)
    except ZeroDivisionError:
        raise NotNormal("constant term of the base change is singular") from None
    levels = [[[M[i][j][t] for j in range(k)] for i in range(k)] for t in range(n)]
    X = [M0i]
    for t in range(1, n):
        acc = [[ZERO] * k for _ in range(k)]
        for s in range(1, t + 1):
            Ms = levels[s]
            if not any(any(r) for r in Ms):
                continue
            P = linalg.mat_mul(Ms, X[t - s])
            for i in range(k):
                for j in range(k):
                    acc[i][j] += P[i][j]
        X.append([[-x for x in row] for row in linalg.mat_mul(M0i, acc)])
    return [[TruncSeries._make([X[t][i][j] for t in range(n)], n) for j in range(k)]
            for i in range(k)]


def change_basis(E: AbModule, B):
    """Action in the basis given by the columns of B: B^-1 (A B + b^2 B')."""
    k = E.rank
    AB = smat_mul(E.action, B)
    rhs = [[AB[i][j] + B[i][j].b2_derivative() for j in range(k)] for i in range(k)]
    return AbModule(smat_mul(smat_inv(B), rhs))


# ---------------------------------------------------------------------------
# presentations

@dataclass
class FrescoPresentation:
    lambda1: Fraction
    p: list
    S: list
    order: int

    def __post_init__(self):
        self.lambda1 = rat(self.lambda1)
        self.p = [int(x) for x in self.p]
        self.S = [s.truncate(self.order) if s.order > self.order else s for s in self.S]
        if len(self.S) != len(self.p):
            raise ValueError("need one unit S_j per gap p_j")
        if any(x < 0 for x in self.p):
            raise ValueError("gaps p_j must be non-negative")
        for s in self.S:
            if s.order < self.order:
                raise ValueError("every S_j must be known to the presentation order")
            if s[0] != 1:
                raise ValueError("every S_j must satisfy S_j(0) = 1")

    @property
    def rank(self) -> int:
        return len(self.p) + 1

    def lambdas(self):
        out = [self.lambda1]
        for p in self.p:
            out.append(out[-1] + p - 1)
        return out

    def operator(self) -> OreOperator:
        from .ore import op_from_factors
        if not self.p:
            return OreOperator.linear(self.lambda1, self.order)
        return op_from_factors(self.lambdas(), self.S)

    def truncate(self, order):
        return FrescoPresentation(self.lambda1, self.p, [s.truncate(order) for s in self.S], order)

    def __eq__(self, other):
        if not isinstance(other, FrescoPresentation):
            return NotImplemented
        return (self.lambda1 == other.lambda1 and self.p == other.p
                and all(x == y for x, y in zip(self.S, other.S)))

    __hash__ = None


def module_from_presentation(pres: FrescoPresentation):
    """Basis form (a - l_j b) e_j = S_{j-1} e_{j-1}; the generator is e_k."""
    k, N = pres.rank, pres.order
    lams = pres.lambdas()
    A = [[TruncSeries.zero(N) for _ in range(k)] for _ in range(k)]
    for j in range(k):
        A[j][j] = TruncSeries.monomial(lams[j], 1, N)
        if j > 0:
            A[j - 1][j] = pres.S[j - 1]
    E = AbModule(A, N)
    return E, E.basis_vector(k - 1)


def module_xi(lam, nlog: int, copies: int, order: int) -> AbModule:
    """Direct sum of copies of the rank nlog+1 module a e_j = lam b e_j + b e_{j-1}."""
    lam = rat(lam)
    size = nlog + 1
    k = size * copies
    A = [[TruncSeries.zero(order) for _ in range(k)] for _ in range(k)]
    for c in range(copies):
        for j in range(size):
            idx = c * size + j
            A[idx][idx] = TruncSeries.monomial(lam, 1, order)
            if j > 0:
                A[idx - 1][idx] = TruncSeries.b(order)
    return AbModule(A, order)


def module_e_lambda(lam, order) -> AbModule:
    return module_xi(lam, 0, 1, order)


def companion_module(P: OreOperator) -> AbModule:
    """A/AP for monic P, in the basis 1, a, ..., a^(k-1)."""
    k, N = P.a_degree, P.order
    if P.leading() != TruncSeries.one(N):
        raise ValueError("companion module needs a monic operator")
    A = [[TruncSeries.zero(N) for _ in range(k)] for _ in range(k)]
    for j in range(k - 1):
        A[j + 1][j] = TruncSeries.one(N)
    for j in range(k):
        A[j][k - 1] = -P.coeffs[j]
    return AbModule(A, N)


# ---------------------------------------------------------------------------
# evaluating operators

def apply_operator(E: AbModule, P: OreOperator, v):
    n = min(P.order, min(s.order for s in v))
    cur = _raw(v, n)
    total = None
    for j, S in enumerate(P.coeffs):
        if j > 0:
            cur = E._a_raw(cur)
        if S.is_zero():
            continue
        term = _series_times_raw(S.truncate(n), cur)
        total = term if total is None else _add_raw(total, term)
    if total is None:
        total = [[ZERO] * n for _ in range(E.rank)]
    return _vec(total)


def _solve_series_system(W, target):
    """Solve W c = target for a series vector c when W(0) is invertible."""
    k = len(W)
    n = min(min(s.order for row in W for s in row), min(s.order for s in target))
    W0i = linalg.mat_inv([[W[i][j][0] for j in range(k)] for i in range(k)])
    c = [[ZERO] * n for _ in range(k)]
    wsp = [[[(m, x) for m, x in enumerate(W[i][j].coeffs[:n]) if x] for j in range(k)]
           for i in range(k)]
    resid = [list(s.coeffs[:n]) for s in target]
    for t in range(n):
        rt = [resid[i][t] for i in range(k)]
        ct = linalg.mat_vec(W0i, rt)
        for j in range(k):
            if not ct[j]:
                continue
            c[j][t] = ct[j]
            for i in range(k):
                for m, x in wsp[i][j]:
                    if t + m >= n:
                        break
                    resid[i][t + m] -= x * ct[j]
    return [TruncSeries._make(r, n) for r in c]


def annihilator_of_generator(E: AbModule, phi) -> OreOperator:
    k = E.rank
    ws = [_raw(phi, E.order)]
    for _ in range(k):
        ws.append(E._a_raw(ws[-1]))
    W = [[TruncSeries._make(ws[j][i], len(ws[j][i])) for j in range(k)] for i in range(k)]
    M0 = [[W[i][j][0] for j in range(k)] for i in range(k)]
    if linalg.det(M0) == 0:
        raise NotAGenerator("phi, a.phi, ..., a^(k-1).phi are dependent modulo b")
    T = _solve_series_system(W, _vec(ws[k]))
    n = T[0].order
    return OreOperator([-t for t in T] + [TruncSeries.one(n)], n)


# ---------------------------------------------------------------------------
# kernels

def _eigen_matrix(E: AbModule, mu, levels):
    """Rows of (a - mu b) acting on E / b^levels, level-major coordinates."""
    k = E.rank
    dim = k * levels
    rows = [[ZERO] * dim for _ in range(dim)]
    for n in range(levels):
        for j in range(k):
            col = n * k + j
            for i in range(k):
                for m, c in E._sparse[i][j]:
                    if n + m >= levels:
                        break
                    rows[(n + m) * k + i][col] += c
            if n + 1 < levels:
                rows[(n + 1) * k + j][col] += n - mu
    return rows


def _kernel_raw(E: AbModule, mu, levels):
    rows = _eigen_matrix(E, rat(mu), levels)
    return [_unflatten(v, E.rank) for v in linalg.nullspace(rows, E.rank * levels)]


def kernel_dim(E: AbModule, mu, M: int, lookahead: Optional[int] = None):
    """Dimension and basis of Ker(a - mu b) seen in E / b^M E.

    The kernel is solved on E / b^(M+lookahead) E and projected: solutions that
    exist only because the top levels are cut off do not survive projection.
    A vector known up to b^M can meet lifting obstructions up to roughly M
    plus the rank further levels, hence the default lookahead M + 2k.
    """
    if lookahead is None:
        lookahead = M + KERNEL_LOOKAHEAD_RANKS * E.rank
    if M > E.order:
        raise InsufficientOrder(f"M={M} exceeds the module order {E.order}")
    levels = M + lookahead
    if levels > E.order:
        raise InsufficientOrder(
            f"kernel at M={M} needs order {levels}, module has {E.order}")
    K = _kernel_raw(E, mu, levels)
    flat = [_flatten(v, M) for v in K]
    basis = linalg.row_basis(flat, E.rank * M) if flat else []
    return len(basis), [_vec(_unflatten(v, E.rank)) for v in basis]


def module_delta(E: AbModule, mu, lambda1) -> int:
    M = math.floor(rat(mu) - rat(lambda1)) + 1
    return kernel_dim(E, mu, M)[0]


def delta_and_depth(pres: FrescoPresentation):
    E, _ = module_from_presentation(pres)
    lams = pres.lambdas()
    k = pres.rank
    mu = lams[-1] + k - 1
    delta = module_delta(E, mu, lams[0])
    return delta, k - delta + 1


# ---------------------------------------------------------------------------
# rank-one quotients and the principal Jordan-Holder sequence

def _eigen_vectors(E: AbModule, mu):
    """Kernel of (a - mu b) mod b^N, split into vectors outside / inside bE."""
    K = _kernel_raw(E, mu, E.order)
    k = E.rank
    consts = [[v[i][0] for i in range(k)] for v in K]
    red, pivots = linalg.rref(consts, k) if consts else ([], [])
    if not red:
        return [], K
    # recombine K so that the first vectors have independent constant terms
    flat = [_flatten(v, E.order) + c for v, c in zip(K, consts)]
    width = k * E.order
    # order coordinates so that constant terms pivot first
    perm = list(range(width, width + k)) + list(range(width))
    permuted = [[row[p] for p in perm] for row in flat]
    R, piv = linalg.rref(permuted, len(perm))
    outside, inside = [], []
    inv = {p: i for i, p in enumerate(perm)}
    for row, p in zip(R, piv):
        orig = [ZERO] * len(perm)
        for pos, x in enumerate(row):
            orig[perm[pos]] = x
        vec = _unflatten(orig[:width], k)
        (outside if p < k else inside).append(vec)
    del inv
    return outside, inside


def _line_basis(x, order):
    """Series basis [x, e_i (i != i0)] with i0 the first index where x(0) != 0."""
    k = len(x)
    i0 = next((i for i in range(k) if x[i][0]), None)
    if i0 is None:
        raise NotNormal("vector lies in bE")
    B = smat_identity(k, order)
    for i in range(k):
        B[i][i0] = TruncSeries._make(list(x[i][:order]), order)
    # move column i0 to the front
    cols = [i0] + [j for j in range(k) if j != i0]
    return [[B[i][j] for j in cols] for i in range(k)]


def quotient_with_lift(E: AbModule, x):
    """E / C[[b]]x together with the action in the basis [x, e_i (i != i0)].

    Returns (Q, A2, cols): coordinates of Q are those of the e_i in ``cols``, so
    a quotient vector y lifts to sum_m y_m e_(cols[m]).
    """
    k = E.rank
    n = min(s.order for s in x)
    if all(s[0] == 0 for s in x):
        raise NotNormal("x lies in bE")
    ax = E.apply_a(x)
    i0 = next(i for i in range(k) if x[i][0])
    c = ax[i0] * series_inv(x[i0])
    if any(not (ax[i] - c * x[i]).is_zero() for i in range(k)):
        raise NotStable("a.x is not a multiple of x")
    Et = E.truncate(n) if n < E.order else E
    A2 = change_basis(Et, _line_basis([s.coeffs for s in x], n)).action
    cols = [j for j in range(k) if j != i0]
    return AbModule([row[1:] for row in A2[1:]]), A2, cols


def quotient_by_normal_rank1(E: AbModule, x) -> AbModule:
    return quotient_with_lift(E, x)[0]


@dataclass
class JordanHolderData:
    exponents: list
    flag_bases: list
    basis: list = field(repr=False)          # y_1..y_k adapted to the flag, as columns
    triangular: AbModule = field(repr=False)  # the action in that basis (upper triangular)


def bernstein_candidates(E: AbModule, guard=None):
    """Values lambda_j + j - 1 predicted by the Bernstein roots (increasing)."""
    _, bern, _ = saturate_and_bernstein(E, guard if guard is not None else E.rank, want_module=False)
    roots, splits = linalg.rational_roots(bern)
    if not splits:
        raise NotAFresco("Bernstein polynomial does not split over Q")
    k = E.rank
    return sorted({-r + k - 1 for r, _ in roots})


def _lift_block(Y, B, start):
    """Replace columns start.. of Y by (those columns) . B."""
    k = len(Y)
    tail = [row[start:] for row in Y]
    new_tail = smat_mul(tail, B)
    return [Y[i][:start] + new_tail[i] for i in range(k)]


def principal_jh(E: AbModule) -> JordanHolderData:
    k, N = E.rank, E.order
    Y = smat_identity(k, N)
    cur = E
    exps = []
    rng = random.Random(TIE_BREAK_SEED)
    for step in range(k):
        mu_found, x = None, None
        for mu in bernstein_candidates(cur):
            outside, inside = _eigen_vectors(cur, mu)
            if not outside:
                continue
            if len(outside) == 1:
                x = outside[0]
            else:
                # ties: prefer a choice that keeps lambda_j + j nondecreasing later
                x = _break_tie(cur, mu, outside, inside, rng)
            mu_found = mu
            break
        if x is None:
            raise NotAFresco(f"no eigenvector outside bE at step {step + 1}")
        n = min(len(r) for r in x)
        B = _line_basis(x, n)
        if n < cur.order:
            cur = cur.truncate(n)
            Y = [[s.truncate(n) for s in row] for row in Y]
        A2 = change_basis(cur, B).action
        exps.append(mu_found)
        Y = _lift_block(Y, B, step)
        if step < k - 1:
            cur = AbModule([row[1:] for row in A2[1:]])
    for j in range(1, k):
        if exps[j] + j + 1 < exps[j - 1] + j:
            raise NotAFresco("exponents do not satisfy lambda_j + j nondecreasing")
    n = min(s.order for row in Y for s in row)
    Et = E.truncate(n) if n < E.order else E
    tri = change_basis(Et, Y)
    cols = [[Y[i][j] for i in range(k)] for j in range(k)]
    flags = [cols[:j] for j in range(1, k + 1)]
    return JordanHolderData(exps, flags, cols, tri)


def _break_tie(E, mu, outside, inside, rng):
    candidates = list(outside)
    combo = [[ZERO] * len(outside[0][0]) for _ in range(E.rank)]
    for v in outside:
        combo = _add_raw(combo, v, Fraction(rng.randint(1, 97), rng.randint(1, 13)))
    candidates.append(combo)
    for x in candidates:
        try:
            Q = quotient_by_normal_rank1(E, _vec(x))
            bernstein_candidates(Q)
            return x
        except (NotAFresco, NotNormal, NotStable):
            continue
    return outside[0]


def jh_subquotient(E: AbModule, i: int, j: int, jh: JordanHolderData = None) -> AbModule:
    if not 0 <= i < j <= E.rank:
        raise ValueError("need 0 <= i < j <= rank")
    jh = jh or principal_jh(E)
    A = jh.triangular.action
    return AbModule([row[i:j] for row in A[i:j]])


# ---------------------------------------------------------------------------
# presentations recovered from a module

def _rank1_normalizer(c: TruncSeries, lam):
    """Unit U with U(0)=1 turning a.y = c y into a.(U y) = lam b (U y)."""
    if c[0] != 0 or c[1] != lam:
        raise NotAFresco(f"rank-one quotient has exponent {c[1]}, expected {lam}")
    R = (c.divide_b(1) - lam)            # zero constant term
    return (-(R.divide_b(1).integral())).exp()


def presentation_from_module(E: AbModule, jh: JordanHolderData = None):
    """A presentation (lambda_1, p, S) of a fresco with its J-H flag.

    Returns (presentation, basis) where basis[j] = e_{j+1} in E-coordinates with
    (a - l_j b) e_j = S_{j-1} e_{j-1} and e_k a generator.
    """
    jh = jh or principal_jh(E)
    k = E.rank
    T = jh.triangular
    lams = jh.exponents
    Us = [_rank1_normalizer(T.action[j][j], lams[j]) for j in range(k)]
    n = min(u.order for u in Us)
    T = T.truncate(n)
    # vectors in the adapted basis
    cur = [TruncSeries.zero(n) for _ in range(k)]
    cur[k - 1] = Us[k - 1].truncate(n)
    basis = [None] * k
    basis[k - 1] = cur
    S_list = [None] * (k - 1)
    for j in range(k - 1, 0, -1):
        lam = lams[j]
        ap = T.apply_a(basis[j])
        ep = [ap[i] - basis[j][i].shift(1) * lam for i in range(k)]
        if any(not ep[i].is_zero() for i in range(j, k)):
            raise NotAFresco("image of the generator left the flag")
        c = ep[j - 1]
        if c[0] == 0:
            raise NotAFresco("successive quotient is not generated")
        S = c * series_inv(Us[j - 1].truncate(c.order) * c[0])
        S_list[j - 1] = S
        Si = series_inv(S)
        basis[j - 1] = [Si * s for s in ep]
    m = min(s.order for v in basis for s in v)
    m = min(m, min(s.order for s in S_list) if S_list else m)
    res = T.apply_a([s.truncate(m) for s in basis[0]])
    if any(not (res[i] - basis[0][i].truncate(m).shift(1) * lams[0]).is_zero() for i in range(k)):
        raise NotAFresco("first basis vector is not an eigenvector")
    p = [int(lams[j + 1] - lams[j] + 1) for j in range(k - 1)]
    if any(lams[j + 1] - lams[j] + 1 != p[j] for j in range(k - 1)):
        raise NotAFresco("exponents are not in a single class modulo Z")
    pres = FrescoPresentation(lams[0], p, [s.truncate(m) for s in S_list], m)
    Ycols = jh.basis
    Ymat = [[Ycols[j][i].truncate(m) for j in range(k)] for i in range(k)]
    ebasis = [smat_vec(Ymat, [s.truncate(m) for s in v]) for v in basis]
    return pres, ebasis


# ---------------------------------------------------------------------------
# saturation by b^-1 a and the Bernstein polynomial

def _t_raw(E: AbModule, x, g):
    """b^-1 a on a Laurent vector; index t holds the coefficient of b^(t-g)."""
    k = E.rank
    L = len(x[0])
    out = [[ZERO] * L for _ in range(k)]
    sp = E._sparse
    for i in range(k):
        oi = out[i]
        for j in range(k):
            xj = x[j]
            for m, c in sp[i][j]:
                for t in range(L):
                    v = xj[t]
                    if not v:
                        continue
                    pos = t + m - 1
                    if pos < 0:
                        raise InsufficientOrder("saturation needs more guard digits")
                    if pos < L:
                        oi[pos] += c * v
        xi = x[i]
        for t in range(L):
            if xi[t]:
                oi[t] += (t - g) * xi[t]
    return out


class _Echelon:
    """Incrementally maintained reduced basis of a subspace of Q^d."""

    def __init__(self):
        self.rows = {}   # pivot -> row (pivot entry 1)

    def reduce(self, v):
        v = list(v)
        for p, row in self.rows.items():
            c = v[p]
            if c:
                v = [a - c * b for a, b in zip(v, row)]
        return v

    def add(self, v):
        v = self.reduce(v)
        p = next((i for i, c in enumerate(v) if c), None)
        if p is None:
            return False
        inv = 1 / v[p]
        v = [c * inv for c in v]
        for q, row in self.rows.items():
            c = row[p]
            if c:
                self.rows[q] = [a - c * b for a, b in zip(row, v)]
        self.rows[p] = v
        return True

    def contains(self, v):
        return not any(self.reduce(v))

    def __len__(self):
        return len(self.rows)


def saturate_and_bernstein(E: AbModule, guard: int = None, want_module: bool = True):
    """Saturation E# of E by b^-1 a, with char. and minimal polynomials of -b^-1 a on E#/bE#.

    Works in b^-g E / b^h E (h = 2): b^-1 a is only defined there modulo
    b^(h-1) E, which already lies in E and hence in E#.
    """
    k = E.rank
    g = k if guard is None else guard
    h = 2
    L = g + h
    if E.order < L + 1:
        raise InsufficientOrder(f"saturation with guard {g} needs order >= {L + 1}")
    A0 = E.constant_matrix()
    P = A0
    for _ in range(k):
        P = linalg.mat_mul(P, A0)
    if any(any(r) for r in P):
        raise NotRegular("a is not nilpotent modulo b")

    def unit(j, n):
        v = [[ZERO] * L for _ in range(k)]
        v[j][n + g] = ONE
        return v

    ech = _Echelon()
    words = []   # (n, m, j): b^n (b^-1 a)^m e_j, with its Laurent vector
    queue = []
    for n in range(h):
        for j in range(k):
            v = unit(j, n)
            if ech.add(_flatten(v, L)):
                words.append(((n, 0, j), v))
                queue.append(((n, 0, j), v))
    while queue:
        (n, m, j), v = queue.pop(0)
        for word, w in (((n, m + 1, j), _t_raw(E, v, g)) if n == 0 else (None, None),
                        ((n + 1, m, j), _mul_b_raw(v))):
            if word is None:
                continue
            if ech.add(_flatten(w, L)):
                words.append((word, w))
                queue.append((word, w))
                if len(ech) > k * L:
                    raise NotRegular("saturation does not stabilize")
    # X / bX: choose words whose images are independent modulo bX
    bX = _Echelon()
    for _, v in words:
        bX.add(_flatten(_mul_b_raw(v), L))
    chosen = []
    span = _Echelon()
    span.rows = dict(bX.rows)
    for word, v in words:
        if span.add(_flatten(v, L)):
            chosen.append((word, v))
    if len(chosen) != k:
        raise NotRegular(f"E#/bE# has dimension {len(chosen)}, expected {k}")
    # coordinates of -b^-1 a (chosen) in the chosen basis modulo bX
    d = k * L
    basis_rows = [_flatten(v, L) for _, v in chosen] + list(bX.rows.values())
    Mt = []
    for _, v in chosen:
        target = _flatten(_t_raw(E, v, g), L)
        coords = _coordinates(basis_rows, target, d)
        Mt.append([-c for c in coords[:k]])
    Mneg = [[Mt[j][i] for j in range(k)] for i in range(k)]
    bern = linalg.charpoly(Mneg)
    minimal = linalg.minpoly(Mneg)
    Esharp = _saturation_module(E, [w for w, _ in chosen], g) if want_module else None
    return Esharp, bern, minimal


def _coordinates(basis_rows, target, d):
    """Coordinates of target in the given (independent) rows."""
    n = len(basis_rows)
    # solve sum c_i row_i = target via the transposed system
    rows = [[basis_rows[i][t] for i in range(n)] + [target[t]] for t in range(d)]
    red, piv = linalg.rref(rows, n + 1)
    if piv and piv[-1] == n:
        raise NotRegular("b^-1 a leaves the saturation")
    sol = [ZERO] * n
    for row, p in zip(red, piv):
        sol[p] = row[n]
    return sol


def _saturation_module(E: AbModule, words, g):
    """The a-action of E# in the C[[b]]-basis given by the chosen words."""
    k, N = E.rank, E.order
    L = g + N
    mmax = max(m for _, m, _ in words)
    vecs = []
    for n, m, j in words:
        v = [[ZERO] * L for _ in range(k)]
        v[j][g] = ONE
        for _ in range(m):
            v = _t_raw(E, v, g)
        for _ in range(n):
            v = _mul_b_raw(v)
        vecs.append(v)
    valid = L - mmax            # Laurent indices known exactly
    # Ytilde = b^g Y lives in E; the index t of a Laurent vector is b^t there
    top = valid
    Yt = [[r[:top] for r in v] for v in vecs]
    Etop = E.truncate(min(top, N))
    ntop = min(top, N)
    Yt = [[r[:ntop] for r in v] for v in Yt]
    targets = []
    for v in Yt:
        av = Etop._a_raw(v)
        bv = _mul_b_raw(v)
        targets.append(_add_raw(av, bv, Fraction(-g)))
    # Ytilde c = target modulo b^ntop; det Ytilde has valuation <= g k, so the
    # solution is determined modulo b^(ntop - g k)
    M = ntop - g * k
    if M < 2:
        raise InsufficientOrder("order too small to present the saturation")
    cols = k * ntop
    rows = [[ZERO] * cols for _ in range(k * ntop)]
    for l in range(k):
        for s in range(ntop):
            col = l * ntop + s
            for i in range(k):
                for t in range(ntop - s):
                    x = Yt[l][i][t]
                    if x:
                        rows[(t + s) * k + i][col] += x
    action = [[None] * k for _ in range(k)]
    for jcol, tv in enumerate(targets):
        rhs = _flatten(tv, ntop)
        aug = [r + [c] for r, c in zip(rows, rhs)]
        red, piv = linalg.rref(aug, cols + 1)
        if piv and piv[-1] == cols:
            raise NotRegular("a does not preserve the saturation")
        sol = [ZERO] * cols
        for row, p in zip(red, piv):
            sol[p] = row[cols]
        for l in range(k):
            action[l][jcol] = TruncSeries._make(sol[l * ntop:l * ntop + M], M)
    return AbModule(action, M)


# ---------------------------------------------------------------------------
# simple pole normal form

def _shift_matrix(k):
    return [[ONE if i == j - 1 else ZERO for j in range(k)] for i in range(k)]


def simple_pole_normalize(E: AbModule, lam):
    """Base change S with S^-1 (A S + b^2 S') = b (lam Id + N) exactly.

    N is the nilpotent shift N e_j = e_{j-1}.  Level nu solves
    nu S_nu + N S_nu - S_nu N = -sum_j Z_j S_{nu-1-j}, with A = b(lam + N) + b^2 Z.
    """
    lam = rat(lam)
    k, n = E.rank, E.order
    if not E.is_simple_pole():
        raise WrongShape("module does not have a simple pole")
    A1 = E.coefficient_matrix(1)
    Nk = _shift_matrix(k)
    D = [[A1[i][j] - (lam if i == j else 0) for j in range(k)] for i in range(k)]
    # D must be a single nilpotent Jordan block; bring it to the shift form
    if D == Nk:
        P0 = linalg.identity(k)
    else:
        P0 = _cyclic_basis(D, k)
        if P0 is None:
            raise WrongShape("b-linear part is not lam Id + one nilpotent Jordan block")
    E0 = change_basis(E, [[TruncSeries.constant(P0[i][j], n) for j in range(k)]
                          for i in range(k)])
    Z = [E0.coefficient_matrix(t + 2) for t in range(n - 2)]
    levels = [linalg.identity(k)]
    for nu in range(1, n - 1):
        R = [[ZERO] * k for _ in range(k)]
        for j in range(nu):
            if j >= len(Z):
                break
            P = linalg.mat_mul(Z[j], levels[nu - 1 - j])
            for i in range(k):
                for c in range(k):
                    R[i][c] -= P[i][c]
        levels.append(_solve_sylvester_shift(R, Nk, nu, k))
    m = len(levels)
    S = [[TruncSeries._make([levels[t][i][j] for t in range(m)], m) for j in range(k)]
         for i in range(k)]
    S_total = smat_mul([[TruncSeries.constant(P0[i][j], m) for j in range(k)]
                        for i in range(k)], S)
    check = change_basis(E.truncate(m), S_total)
    target = [[TruncSeries.monomial((lam if i == j else 0) + Nk[i][j], 1, m)
               for j in range(k)] for i in range(k)]
    if check.action != target:
        raise AssertionError("normal form check failed")
    return S_total


def _solve_sylvester_shift(R, Nk, nu, k):
    """X with nu X + N X - X N = R, via the terminating Neumann series."""
    X = [[ZERO] * k for _ in range(k)]
    term = [[x / nu for x in row] for row in R]
    for _ in range(2 * k):
        if not any(any(r) for r in term):
            break
        for i in range(k):
            for j in range(k):
                X[i][j] += term[i][j]
        NT = linalg.mat_mul(Nk, term)
        TN = linalg.mat_mul(term, Nk)
        term = [[-(NT[i][j] - TN[i][j]) / nu for j in range(k)] for i in range(k)]
    return X


def _cyclic_basis(D, k):
    """Columns f_1..f_k with D f_j = f_{j-1}, D f_1 = 0, or None."""
    powers = [linalg.identity(k)]
    for _ in range(k):
        powers.append(linalg.mat_mul(powers[-1], D))
    if any(any(r) for r in powers[k]):
        return None
    top = powers[k - 1]
    v = None
    for j in range(k):
        if any(top[i][j] for i in range(k)):
            v = [ONE if i == j else ZERO for i in range(k)]
            break
    if v is None:
        return None
    cols = [linalg.mat_vec(powers[k - 1 - t], v) for t in range(k)]
    return [[cols[j][i] for j in range(k)] for i in range(k)]


# ---------------------------------------------------------------------------
# filtration and isomorphism

def phi_weight(E: AbModule, v):
    """Largest nu with v in Phi_nu, for v in the J-H basis: weight(b^n e_j) = k n + k - j."""
    k = E.rank
    best = math.inf
    for j, s in enumerate(v):
        val = s.valuation()
        if val is None:
            continue
        best = min(best, k * val + (k - 1 - j))
    return best


def modules_isomorphic(E: AbModule, F: AbModule, seed: int = TIE_BREAK_SEED):
    """Search for Phi with Phi A_E = A_F Phi + b^2 Phi' and Phi(0) invertible."""
    if E.rank != F.rank:
        return False, None
    k = E.rank
    M = min(E.order, F.order)
    # unknown Phi[i][j][s] -> index s*k*k + i*k + j ; equation (level t, i, j)
    nunk = k * k * M
    rows = [[ZERO] * nunk for _ in range(k * k * M)]

    def idx(s, i, j):
        return s * k * k + i * k + j

    for s in range(M):
        for i in range(k):
            for j in range(k):
                col = idx(s, i, j)
                # (Phi A_E)[i][l] gets Phi[i][j] * A_E[j][l]
                for l in range(k):
                    for m, c in E._sparse[j][l]:
                        if s + m >= M:
                            break
                        rows[idx(s + m, i, l)][col] += c
                # -(A_F Phi)[r][j] gets -A_F[r][i] * Phi[i][j]
                for r in range(k):
                    for m, c in F._sparse[r][i]:
                        if s + m >= M:
                            break
                        rows[idx(s + m, r, j)][col] -= c
                # -b^2 Phi'
                if s >= 1 and s + 1 < M:
                    rows[idx(s + 1, i, j)][col] -= s
    sols = linalg.nullspace(rows, nunk)
    if not sols:
        return False, None
    rng = random.Random(seed)
    for _ in range(3):
        comb = [ZERO] * nunk
        for v in sols:
            c = Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 10 ** 3))
            comb = [x + c * y for x, y in zip(comb, v)]
        P0 = [[comb[idx(0, i, j)] for j in range(k)] for i in range(k)]
        if linalg.det(P0) != 0:
            Phi = [[TruncSeries._make([comb[idx(s, i, j)] for s in range(M)], M)
                    for j in range(k)] for i in range(k)]
            return True, Phi
    return False, None
