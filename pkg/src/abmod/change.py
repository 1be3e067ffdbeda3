"""Change of variable a -> theta(a): the operations alpha = theta(a), beta = b.theta'(a).

A module E pushed forward by theta is the same vector space with alpha playing
the role of a and beta that of b.  Since beta^n E = b^n E, rewriting over
beta-powers is a triangular problem level by level.
"""

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .errors import InsufficientOrder, NotAGenerator
from .module import (AbModule, FrescoPresentation, JordanHolderData, _add_raw,
                     _mul_b_raw, companion_module, module_from_presentation,
                     presentation_from_module)
from .ore import OreOperator
from .series import ONE, ZERO, TruncSeries, rat


@dataclass(frozen=True)
class ChangeOfVariable:
    coeffs: tuple

    def __init__(self, coeffs):
        cs = tuple(rat(c) for c in coeffs)
        if not cs or cs[0] == 0:
            raise ValueError("theta needs a nonzero linear coefficient")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def identity(cls):
        return cls([1])

    @classmethod
    def quadratic(cls, rho):
        return cls([1, rho])

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def derivative_coeffs(self):
        """theta'(a) = sum_m m theta_m a^(m-1), constant term first."""
        return [m * c for m, c in enumerate(self.coeffs, start=1)]

    def compose(self, inner: "ChangeOfVariable", degree=None):
        """self(inner(a)) truncated at a-degree ``degree``."""
        d = degree or self.degree * inner.degree
        inner_poly = [ZERO] + list(inner.coeffs)
        result = [ZERO] * (d + 1)
        power = [ONE]
        for c in self.coeffs:
            power = _poly_mul(power, inner_poly, d)
            for i, x in enumerate(power):
                result[i] += c * x
        while len(result) > 2 and result[-1] == 0:
            result.pop()
        return ChangeOfVariable(result[1:])

    def alpha(self, order) -> OreOperator:
        return OreOperator([ZERO] + list(self.coeffs), order)

    def beta(self, order) -> OreOperator:
        b = TruncSeries.b(order)
        return OreOperator([b * c for c in self.derivative_coeffs()], order)


def _poly_mul(p, q, d):
    out = [ZERO] * min(len(p) + len(q) - 1, d + 1)
    for i, x in enumerate(p):
        if not x:
            continue
        for j, y in enumerate(q):
            if i + j < len(out) and y:
                out[i + j] += x * y
    return out


# ---------------------------------------------------------------------------
# alpha and beta on a module

def _alpha_beta_raw(E: AbModule, theta: ChangeOfVariable, v, want_alpha=True):
    d = theta.degree
    powers = [v]
    for _ in range(d if want_alpha else d - 1):
        powers.append(E._a_raw(powers[-1]))
    k, n = E.rank, len(v[0])
    alpha = [[ZERO] * n for _ in range(k)] if want_alpha else None
    beta_pre = [[ZERO] * n for _ in range(k)]
    for m, c in enumerate(theta.coeffs, start=1):
        if want_alpha:
            alpha = _add_raw(alpha, powers[m], c)
        beta_pre = _add_raw(beta_pre, powers[m - 1], m * c)
    return alpha, _mul_b_raw(beta_pre)


def apply_alpha(E, theta, v):
    return _alpha_beta_raw(E, theta, v)[0]


def apply_beta(E, theta, v):
    return _alpha_beta_raw(E, theta, v)[1]


def alpha_beta_matrices(E: AbModule, theta: ChangeOfVariable):
    """Matrices of alpha and beta on E / b^N E (level-major coordinates).

    Column c is the image of the basis vector b^n e_i with c = n k + i.
    Checks alpha beta - beta alpha = beta^2.
    """
    k, N = E.rank, E.order
    dim = k * N
    cols_a, cols_b = [], []
    for n in range(N):
        for i in range(k):
            v = [[ZERO] * N for _ in range(k)]
            v[i][n] = ONE
            a_img, b_img = _alpha_beta_raw(E, theta, v)
            cols_a.append([a_img[r][t] for t in range(N) for r in range(k)])
            cols_b.append([b_img[r][t] for t in range(N) for r in range(k)])
    Am = [[cols_a[c][r] for c in range(dim)] for r in range(dim)]
    Bm = [[cols_b[c][r] for c in range(dim)] for r in range(dim)]
    AB = linalg.mat_mul(Am, Bm)
    BA = linalg.mat_mul(Bm, Am)
    BB = linalg.mat_mul(Bm, Bm)
    if any(AB[i][j] - BA[i][j] != BB[i][j] for i in range(dim) for j in range(dim)):
        raise AssertionError("alpha beta - beta alpha != beta^2")
    return Am, Bm


class _BetaRebaser:
    """Expresses vectors of E as sum_i T_i(beta) w_i for a fixed C[[b]]-basis w."""

    def __init__(self, E: AbModule, theta: ChangeOfVariable, basis_raw):
        self.k = E.rank
        self.N = len(basis_raw[0][0])
        k, N = self.k, self.N
        # powers[q][i] = beta^q w_i
        self.powers = []
        cur = [list(map(list, w)) for w in basis_raw]
        for q in range(N):
            if q:
                cur = [_alpha_beta_raw(E, theta, w, want_alpha=False)[1] for w in cur]
            self.powers.append(cur)
        self.ginv = []
        for q in range(N):
            G = [[self.powers[q][j][i][q] for j in range(k)] for i in range(k)]
            try:
                self.ginv.append(linalg.mat_inv(G))
            except ZeroDivisionError:
                raise NotAGenerator("vectors are not a basis over C[[beta]]") from None

    def coordinates(self, target):
        k, N = self.k, self.N
        r = [list(row[:N]) for row in target]
        coeffs = [[ZERO] * N for _ in range(k)]
        for q in range(N):
            t = linalg.mat_vec(self.ginv[q], [r[i][q] for i in range(k)])
            for j in range(k):
                c = t[j]
                if not c:
                    continue
                coeffs[j][q] = c
                w = self.powers[q][j]
                for i in range(k):
                    wi, ri = w[i], r[i]
                    for s in range(q, N):
                        x = wi[s]
                        if x:
                            ri[s] -= c * x
        return [TruncSeries._make(c, N) for c in coeffs]


def module_pushforward(E: AbModule, theta: ChangeOfVariable) -> AbModule:
    """theta_*(E) written in the same C[[b]]-basis (now a C[[beta]]-basis)."""
    k, N = E.rank, E.order
    basis = []
    for j in range(k):
        v = [[ZERO] * N for _ in range(k)]
        v[j][0] = ONE
        basis.append(v)
    reb = _BetaRebaser(E, theta, basis)
    cols = [reb.coordinates(_alpha_beta_raw(E, theta, w)[0]) for w in basis]
    return AbModule([[cols[j][i] for j in range(k)] for i in range(k)], N)


def pushforward_annihilator(E: AbModule, phi, theta: ChangeOfVariable) -> OreOperator:
    """Monic P(a, b) with P(alpha, beta) phi = 0, from alpha^k phi over beta."""
    k, N = E.rank, E.order
    ws = [[list(s.coeffs[:N]) for s in phi]]
    for _ in range(k):
        ws.append(_alpha_beta_raw(E, theta, ws[-1])[0])
    reb = _BetaRebaser(E, theta, ws[:k])
    T = reb.coordinates(ws[k])
    return OreOperator([-t for t in T] + [TruncSeries.one(N)], N)


def default_guard(rank: int) -> int:
    return rank + 2


def pushforward(pres: FrescoPresentation, theta: ChangeOfVariable, guard=None,
                method: str = "triangular") -> FrescoPresentation:
    """Presentation of theta_*(E) for the fresco E given by ``pres``.

    ``method="companion"`` follows the generator route: annihilator of e_k in
    (alpha, beta), its companion module, then the principal J-H sequence.
    ``method="triangular"`` rebases the presentation basis directly; the flag
    F_j = span(e_1..e_j) stays a-stable, so the result is already triangular.
    The presentation is reported ``guard`` orders below the input order.
    """
    k = pres.rank
    g = default_guard(k) if guard is None else guard
    target = pres.order - g
    if target < 2:
        raise InsufficientOrder(f"order {pres.order} leaves nothing after guard {g}")
    E, phi = module_from_presentation(pres)
    lams = pres.lambdas()
    if method == "companion":
        P = pushforward_annihilator(E, phi, theta)
        out, _ = presentation_from_module(companion_module(P))
    elif method == "triangular":
        F = module_pushforward(E, theta)
        n = F.order
        for i in range(k):
            for j in range(i):
                if not F.action[i][j].is_zero():
                    raise AssertionError("pushforward lost the flag")
        cols = [[TruncSeries.one(n) if r == c else TruncSeries.zero(n) for r in range(k)]
                for c in range(k)]
        jh = JordanHolderData(list(lams), [cols[:j] for j in range(1, k + 1)], cols, F)
        out, _ = presentation_from_module(F, jh)
    else:
        raise ValueError(f"unknown method {method!r}")
    if out.order < target:
        raise InsufficientOrder(f"pushforward only reached order {out.order} < {target}")
    return out.truncate(target)


# ---------------------------------------------------------------------------
# rank one

def _rank1_data(lam, theta: ChangeOfVariable, N: int):
    E = AbModule([[TruncSeries.monomial(lam, 1, N)]], N)
    e = [[ONE] + [ZERO] * (N - 1)]
    alpha_e, beta_e = _alpha_beta_raw(E, theta, e)
    reb = _BetaRebaser(E, theta, [e])
    return E, e, reb, alpha_e, beta_e


def rank1_eigen_series(lam, theta: ChangeOfVariable, N: int) -> TruncSeries:
    """S in C[[beta]] with S(0)=1 and (alpha - lam beta) S(beta) e = 0 in E_lam.

    alpha e = lam beta e + beta^2 R(beta) e, then S' + R S = 0, S = exp(-int R).
    """
    lam = rat(lam)
    M = N + 2
    E, e, reb, alpha_e, beta_e = _rank1_data(lam, theta, M)
    rest = _add_raw(alpha_e, beta_e, -lam)
    coords = reb.coordinates(rest)[0]
    if coords[0] or coords[1]:
        raise AssertionError("alpha - lam beta does not land in beta^2 E")
    R = coords.divide_b(2)
    S = (-R.integral()).exp()
    return S.truncate(N)


def rank1_eigenvector(lam, theta: ChangeOfVariable, N: int) -> TruncSeries:
    """The same eigenvector written in the b-basis: X(b) e with X(0) = 1."""
    lam = rat(lam)
    S = rank1_eigen_series(lam, theta, N)
    E, e, reb, _, _ = _rank1_data(lam, theta, N)
    acc = [[ZERO] * N]
    for q in range(N):
        if S[q]:
            acc = _add_raw(acc, reb.powers[q][0], S[q])
    X = TruncSeries._make(acc[0], N)
    a_img, b_img = _alpha_beta_raw(E, theta, acc)
    if any(x - lam * y for x, y in zip(a_img[0], b_img[0])):
        raise AssertionError("eigenvector check failed")
    return X


def s_rho_lambda_recursion(lam, rho, N: int) -> TruncSeries:
    """b-coordinates of the (a + rho a^2)-eigenvector from the closed recursion.

    gamma_0 = 1, gamma_{n+1} = (1 - 1/(n+1) + lam(1-lam)/(n+1)^2) gamma_n and
    s_n = n! (-rho)^n gamma_n.  Checked against
    rho b^2 S'' + (1 + 2 rho b) S' + lam rho (1 - lam) S = 0.
    """
    lam, rho = rat(lam), rat(rho)
    g = ONE
    fact = ONE
    out = [ONE]
    for n in range(N - 1):
        g = g * (1 - Fraction(1, n + 1) + lam * (1 - lam) / (n + 1) ** 2)
        fact *= n + 1
        out.append(fact * (-rho) ** (n + 1) * g)
    S = TruncSeries(out, N)
    d1 = S.derivative()
    d2 = d1.derivative()
    b = TruncSeries.b(N)
    lhs = (b * b * d2) * rho + (1 + b * (2 * rho)) * d1 + S * (lam * rho * (1 - lam))
    if not lhs.is_zero():
        raise AssertionError("recursion does not solve the eigen-equation")
    return S


def alpha_factor_through(lam, mu, rho, N: int):
    """Z0t, Z1t with (alpha - lam beta) S = (Z0t + Z1t (a - mu b)) (a - lam b) in A.

    alpha = a + rho a^2, beta = b + 2 rho b a and S = s_rho_lambda_recursion.
    """
    lam, mu, rho = rat(lam), rat(mu), rat(rho)
    S = s_rho_lambda_recursion(lam, rho, N + 1)
    Sp = S.derivative()
    S = S.truncate(N)
    b = TruncSeries.b(N)
    Z1 = S * rho
    Z0 = (1 - b * (lam * rho)) * S + b * b * Sp * rho
    Z0t = Z0 + b * Z1 * mu + Z1.b2_derivative()
    theta = ChangeOfVariable.quadratic(rho)
    alpha, beta = theta.alpha(N), theta.beta(N)
    lhs = (alpha - beta * lam) * OreOperator.series(S)
    rhs = (OreOperator.series(Z0t) + OreOperator.series(Z1) * OreOperator.linear(mu, N)) \
        * OreOperator.linear(lam, N)
    if lhs != rhs:
        raise AssertionError("factorisation through (a - lam b) failed")
    return Z0t, Z1


__all__ = [
    "ChangeOfVariable", "alpha_beta_matrices", "apply_alpha", "apply_beta",
    "module_pushforward", "pushforward_annihilator", "pushforward", "default_guard",
    "rank1_eigen_series", "rank1_eigenvector", "s_rho_lambda_recursion",
    "alpha_factor_through",
]
