"""Classification parameters: rank-2 themes, the rank-3 semi-simple family E(gamma),
the socle exponent L(E), the change-of-variable constant L and cross ratios."""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .change import ChangeOfVariable, pushforward
from .errors import (Degenerate, InsufficientOrder, NonUnique, NotAFresco, NotNormal,
                     NotSemisimple, NotStable, SearchExhausted, UniqueClass, WrongRank,
                     WrongShape)
from .module import (TIE_BREAK_SEED, AbModule, FrescoPresentation, _add_raw, _mul_b_raw,
                     _eigen_vectors, _vec, bernstein_candidates, jh_subquotient, module_delta, module_from_presentation,
                     presentation_from_module, principal_jh, quotient_by_normal_rank1,
                     saturate_and_bernstein)
from .series import TruncSeries, rat, solve_linear_b_ode
from . import linalg


def default_order(p1: int, p2: int) -> int:
    return 4 * (p1 + p2) + 16


def _as_presentation(E):
    if isinstance(E, FrescoPresentation):
        return E
    return presentation_from_module(E)[0]


def _as_module(E):
    if isinstance(E, AbModule):
        return E
    return module_from_presentation(E)[0]


def make_E_gamma(lambda1, p1: int, p2: int, gamma, N: int) -> FrescoPresentation:
    """(a - l1 b)(1 + gamma b)^-1 (a - l2 b)(a - l3 b)."""
    gamma = rat(gamma)
    return FrescoPresentation(lambda1, [p1, p2],
                              [TruncSeries([1, gamma], N), TruncSeries.one(N)], N)


# ---------------------------------------------------------------------------
# rank 2

def rank2_theme_param(E) -> Fraction:
    """The b^p coefficient of S in (a - l1 b) S^-1 (a - l2 b), normalised S(0) = 1.

    Moves e_2 -> e_2 + W e_1 change the b^m coefficient by (m - p) w_(m-1), so the
    b^p coefficient is the invariant.
    """
    pres = _as_presentation(E)
    if pres.rank != 2:
        raise WrongRank(f"rank-2 parameter asked of a rank {pres.rank} fresco")
    p = pres.p[0]
    if p == 0:
        raise UniqueClass("p = 0: there is a single isomorphism class")
    S = pres.S[0]
    if p >= S.order:
        raise InsufficientOrder(f"need order > {p} to read the parameter")
    return S[p]


# ---------------------------------------------------------------------------
# rank 3 semi-simple

def _gamma_from_presentation(pres: FrescoPresentation, check: bool = True):
    if pres.rank != 3:
        raise WrongRank("gamma is defined for rank 3 frescos")
    p1, p2 = pres.p
    if p1 < 2:
        raise WrongShape("gamma needs p1 >= 2")
    S1, S2 = pres.S
    n = min(S1.order, S2.order)
    if p1 + p2 + 1 > n:
        raise InsufficientOrder("order too small for the rank-3 normal form")
    if S2[p2]:
        raise NotSemisimple("F3/F1 is a theme (b^p2 coefficient of S2 is nonzero)")
    if S1[p1]:
        raise NotSemisimple("F2 is a theme (b^p1 coefficient of S1 is nonzero)")
    if p2 == 1:
        raise NonUnique("p2 = 1: every E(gamma) is isomorphic to E(0)")
    # e3 -> e3 + V e2 makes (a - l3 b) eps3 = eps2 with unit coefficient 1
    V = solve_linear_b_ode(p2 - 1, (S2 - 1).divide_b(1) * (-1), 0)
    # Sigma: the e1-part of eps2; sigma_(m-1) forced by (a - l2 b) eps2 = (1 + gamma b) e1
    sig = [Fraction(0)] * (n - 1)
    for m in range(2, n):
        if m != p1:
            sig[m - 1] = -S1[m] / (m - p1)
    sig[0] = V[0]
    gamma = S1[1] - (p1 - 1) * sig[0]
    # W from Sigma = V S1 + b^2 W' - (p1 + p2 - 2) b W
    VS1 = V * S1
    q = p1 + p2 - 1
    if sig[q] != VS1[q]:
        raise NotSemisimple("the b^(p1+p2) obstruction does not vanish")
    if check:
        _check_normal_form(pres, V, sig, gamma)
    return gamma


def _check_normal_form(pres, V, sig, gamma):
    p1, p2 = pres.p
    n = min(len(sig), V.order) - 1
    S1 = pres.S[0].truncate(n + 1)
    VS1 = (V.truncate(n + 1) * S1)
    q = p1 + p2 - 1
    w = [Fraction(0)] * n
    for m in range(1, n + 1):
        if m != q:
            w[m - 1] = (sig[m] - VS1[m]) / (m - q) if m < len(sig) else Fraction(0)
    n = n - 1
    E, _ = module_from_presentation(pres.truncate(n))
    Sig = TruncSeries(sig[:n], n)
    W = TruncSeries(w[:n], n)
    z = TruncSeries.zero(n)
    one = TruncSeries.one(n)
    eps1 = [one, z, z]
    eps2 = [Sig, one, z]
    eps3 = [W, V.truncate(n), one]
    lams = pres.lambdas()

    def minus(v, lam):
        av = E.apply_a(v)
        return [x - y.shift(1) * lam for x, y in zip(av, v)]

    r3 = minus(eps3, lams[2])
    r2 = minus(eps2, lams[1])
    g = TruncSeries([1, gamma], n)
    if any(not (x - y).is_zero() for x, y in zip(r3, eps2)):
        raise AssertionError("normal form check failed for eps3")
    if any(not (x - g * y).is_zero() for x, y in zip(r2, eps1)):
        raise AssertionError("normal form check failed for eps2")


def extract_gamma(E) -> Fraction:
    """gamma with E isomorphic to E(gamma), for semi-simple rank 3 with p1, p2 >= 2."""
    return _gamma_from_presentation(_as_presentation(E))


@dataclass
class SemisimplicityWitness:
    alpha_coeff: Fraction
    beta_coeff: Fraction
    gamma_coeff: Optional[Fraction]
    applicable: bool
    semisimple: Optional[bool]
    depth: Optional[int]


def semisimplicity_witness(lambda1, p1, p2, S1, S2) -> SemisimplicityWitness:
    """alpha = [S1]_p1, beta = [S2]_p2 and, when both vanish, gamma = [U S2]_(p1+p2)
    with b U' = p1 (U - S1).  Semi-simple iff gamma = 0; otherwise d = 2."""
    n = min(S1.order, S2.order)
    alpha = S1[p1]
    beta = S2[p2]
    if alpha or beta:
        return SemisimplicityWitness(alpha, beta, None, False, None, None)
    U = solve_linear_b_ode(p1, S1 * (-p1), 0)
    if p1 + p2 >= n:
        raise InsufficientOrder("order too small to read the obstruction")
    gamma = (U * S2)[p1 + p2]
    ss = gamma == 0
    return SemisimplicityWitness(alpha, beta, gamma, True, ss, 1 if ss else 2)


# ---------------------------------------------------------------------------
# delta, d and the socle exponent

def module_invariants(E: AbModule):
    """(exponents, delta, d) for a [lambda]-primitive fresco given as a module."""
    jh = principal_jh(E)
    k = E.rank
    exps = jh.exponents
    delta = module_delta(E, exps[-1] + k - 1, exps[0])
    return exps, delta, k - delta + 1, jh


def _depth(E: AbModule) -> int:
    if E.rank == 1:
        return 1
    return module_invariants(E)[2]


def _eigen_trials(E: AbModule, mu, rng):
    outside, _ = _eigen_vectors(E, mu)
    trials = list(outside)
    if len(outside) > 1:
        combo = [[Fraction(0)] * len(outside[0][0]) for _ in range(E.rank)]
        for v in outside:
            combo = _add_raw(combo, v, Fraction(rng.randint(1, 97), rng.randint(1, 13)))
        trials.append(combo)
    return trials


def normal_lines(E: AbModule, rng=None):
    """(mu, x) for a-stable normal lines C[[b]]x, x an eigenvector of a - mu b."""
    rng = rng or random.Random(TIE_BREAK_SEED)
    out = []
    for mu in bernstein_candidates(E):
        for x in _eigen_trials(E, mu, rng):
            out.append((mu, _vec(x)))
    return out


FAMILY_FIT_DEGREE = 4


def _line_family(E: AbModule, mu):
    """Normal eigenvectors at mu and the directions b^m w (w normal at mu - m).

    Every x0 + sum c_i dir_i is again an eigenvector of a - mu b outside bE, so
    the normal lines at mu form an affine family.
    """
    outside, _ = _eigen_vectors(E, mu)
    cands = bernstein_candidates(E)
    dirs = []
    m = 1
    while mu - m >= cands[0]:
        for w in _eigen_vectors(E, mu - m)[0]:
            for _ in range(m):
                w = _mul_b_raw(w)
            dirs.append(w)
        m += 1
    return outside, dirs


def _quotient_depth(E: AbModule, x):
    try:
        return _depth(quotient_by_normal_rank1(E, _vec(x)))
    except (NotAFresco, NotNormal, NotStable, InsufficientOrder):
        return None


def _quotient_param(E: AbModule, x):
    try:
        return rank2_theme_param(quotient_by_normal_rank1(E, _vec(x)))
    except (NotAFresco, NotNormal, NotStable, InsufficientOrder, UniqueClass):
        return None


def _param_roots(E: AbModule, x0, direction):
    """Rational c making E/(x0 + c.direction) semi-simple (rank-2 quotients).

    The theme parameter is interpolated as a polynomial in c of degree at most
    FAMILY_FIT_DEGREE and the fit is checked at one extra point.
    """
    D = FAMILY_FIT_DEGREE
    vals = []
    for c in range(D + 2):
        w = _quotient_param(E, _add_raw(x0, direction, Fraction(c)))
        if w is None:
            return []
        vals.append(w)
    rows = [[Fraction(c) ** i for i in range(D + 1)] for c in range(D + 1)]
    coeffs = linalg.solve(rows, vals[:D + 1])
    if sum(cf * (D + 1) ** i for i, cf in enumerate(coeffs)) != vals[D + 1]:
        return []
    if all(cf == 0 for cf in coeffs):
        return [Fraction(0)]
    return [r for r, _ in linalg.rational_roots(coeffs)[0]]


def _line_trials(E: AbModule, mu, rng):
    """Candidate normal eigenvectors at mu, including special members of the family."""
    outside, dirs = _line_family(E, mu)
    if not outside:
        return []
    trials = list(outside)
    if len(outside) > 1:
        combo = [[Fraction(0)] * len(outside[0][0]) for _ in range(E.rank)]
        for v in outside:
            combo = _add_raw(combo, v, Fraction(rng.randint(1, 97), rng.randint(1, 13)))
        trials.append(combo)
    for x0 in list(trials):
        for w in dirs:
            if E.rank == 3:
                for c in _param_roots(E, x0, w):
                    trials.append(_add_raw(x0, w, c))
            else:
                r = Fraction(rng.randint(1, 97), rng.randint(1, 13))
                trials.append(_add_raw(x0, w, r))
    return trials


@dataclass
class SocleSearch:
    mu: Optional[Fraction]
    depth: int
    drop_lines: list = field(default_factory=list)


def socle_search(E) -> SocleSearch:
    """Normal lines x of E with d(E/x) = d(E) - 1.

    ``drop_lines`` holds (mu, x) pairs; ``mu`` is set when all of them share
    one exponent.
    """
    E = _as_module(E)
    k = E.rank
    _, delta, d, _ = module_invariants(E)
    if delta == k:
        return SocleSearch(None, d)
    rng = random.Random(TIE_BREAK_SEED)
    drop = []
    for mu in bernstein_candidates(E):
        for x in _line_trials(E, mu, rng):
            if _quotient_depth(E, x) == d - 1:
                drop.append((mu, _vec(x)))
    mus = {mu for mu, _ in drop}
    return SocleSearch(mus.pop() if len(mus) == 1 else None, d, drop)


def find_L(E) -> Optional[Fraction]:
    """Exponent mu with L(E) = E_mu, or None for semi-simple E.

    L(E) is the normal line whose quotient has depth one less than E.
    """
    res = socle_search(E)
    if res.depth == 1:
        return None
    if res.mu is None:
        found = sorted({mu for mu, _ in res.drop_lines})
        raise SearchExhausted(f"no single exponent with a depth drop, found {found}")
    return res.mu


# ---------------------------------------------------------------------------
# change-of-variable law for E(gamma)

def printed_L_variants(lambda1, p1, p2):
    l1 = rat(lambda1)
    l2 = l1 + p1 - 1
    l3 = l2 + p2 - 1
    return {
        "lambda2^2-(2p1-3)lambda2+(p1-1)(p2-5)": l2 ** 2 - (2 * p1 - 3) * l2 + (p1 - 1) * (p2 - 5),
        "lambda1^2+lambda1+(p1-1)(p1-p2+3)": l1 ** 2 + l1 + (p1 - 1) * (p1 - p2 + 3),
        "lambda2^2-lambda2+(p1-1)(lambda2+lambda3-4)": l2 ** 2 - l2 + (p1 - 1) * (l2 + l3 - 4),
        "lambda1^2+lambda1-(p1-1)(p1-p2+3)": l1 ** 2 + l1 - (p1 - 1) * (p1 - p2 + 3),
    }


def transformed_gamma(lambda1, p1, p2, gamma, theta: ChangeOfVariable, N=None):
    N = N or default_order(p1, p2)
    pres = make_E_gamma(lambda1, p1, p2, gamma, N)
    return extract_gamma(pushforward(pres, theta))


@dataclass
class EmpiricalL:
    L: Fraction
    gamma_independent: bool
    rho_linear: bool
    gamma_shifts: dict = field(default_factory=dict)
    printed: dict = field(default_factory=dict)
    matches: list = field(default_factory=list)


def empirical_L(lambda1, p1: int, p2: int, N: int = None) -> EmpiricalL:
    N = N or default_order(p1, p2)
    quad = ChangeOfVariable.quadratic(1)
    shifts = {}
    for g in (0, 1, -2):
        shifts[Fraction(g)] = transformed_gamma(lambda1, p1, p2, g, quad, N) - g
    L = shifts[Fraction(0)]
    rho2 = transformed_gamma(lambda1, p1, p2, 0, ChangeOfVariable.quadratic(2), N)
    printed = printed_L_variants(lambda1, p1, p2)
    return EmpiricalL(
        L=L,
        gamma_independent=len(set(shifts.values())) == 1,
        rho_linear=rho2 == 2 * L,
        gamma_shifts=shifts,
        printed=printed,
        matches=[name for name, v in printed.items() if v == L],
    )


# ---------------------------------------------------------------------------
# cross ratio

def subquotient_gammas(E, js):
    E = _as_module(E)
    jh = principal_jh(E)
    out = []
    for j in js:
        sub = jh_subquotient(E, j - 3, j, jh)
        out.append(extract_gamma(sub))
    return out


def cross_ratio(E, j1: int, j2: int, j3: int) -> Fraction:
    """(g3 - g2)/(g3 - g1) for the gammas of F_j/F_(j-3), j = j1, j2, j3."""
    k = E.rank
    if k < 5:
        raise WrongRank("the cross ratio needs rank >= 5")
    if not 3 <= j1 < j2 < j3 <= k:
        raise ValueError("need 3 <= j1 < j2 < j3 <= rank")
    g1, g2, g3 = subquotient_gammas(E, (j1, j2, j3))
    if g3 == g1:
        raise Degenerate("gamma_3 = gamma_1")
    return (g3 - g2) / (g3 - g1)


# ---------------------------------------------------------------------------
# report

@dataclass
class InvariantReport:
    rank: int
    lambda1: Fraction
    p: list
    bernstein_roots: list
    delta: int
    d: int
    z_params: list
    gamma_params: list
    cross_ratio: Optional[Fraction]
    flags: list = field(default_factory=list)


def invariant_report(E, guard=None) -> InvariantReport:
    """All invariants of a [lambda]-primitive fresco given as module or presentation."""
    if isinstance(E, FrescoPresentation):
        pres = E
        M, _ = module_from_presentation(pres)
    else:
        M = E
        pres = presentation_from_module(M)[0]
    k = pres.rank
    _, bern, _ = saturate_and_bernstein(M, guard if guard is not None else k, want_module=False)
    roots, splits = linalg.rational_roots(bern)
    flags = []
    if not splits:
        flags.append("bernstein_not_split")
    root_list = sorted(r for r, m in roots for _ in range(m))
    lams = pres.lambdas()
    delta = module_delta(M, lams[-1] + k - 1, lams[0]) if k > 1 else 1
    zs = []
    for j in range(k - 1):
        p = pres.p[j]
        if p == 0 or p >= pres.S[j].order:
            zs.append(None)
        else:
            zs.append(pres.S[j][p])
    gammas = []
    for j in range(k - 2):
        sub = FrescoPresentation(lams[j], pres.p[j:j + 2], pres.S[j:j + 2], pres.order)
        try:
            gammas.append(_gamma_from_presentation(sub, check=False))
        except (NotSemisimple, NonUnique, WrongShape, InsufficientOrder):
            gammas.append(None)
    cr = None
    if k >= 5 and all(g is not None for g in gammas[:3]) and gammas[2] != gammas[0]:
        cr = (gammas[2] - gammas[1]) / (gammas[2] - gammas[0])
    return InvariantReport(k, pres.lambda1, list(pres.p), root_list, delta, k - delta + 1,
                           zs, gammas, cr, flags)
