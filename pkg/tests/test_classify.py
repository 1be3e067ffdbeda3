import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from abmod import linalg
from abmod.change import ChangeOfVariable, pushforward
from abmod.classify import (cross_ratio, empirical_L, extract_gamma, find_L, invariant_report,
                            make_E_gamma, printed_L_variants, rank2_theme_param,
                            semisimplicity_witness, socle_search, subquotient_gammas,
                            transformed_gamma)
from abmod.errors import Degenerate, NonUnique, UniqueClass, WrongRank
from abmod.module import (AbModule, FrescoPresentation, change_basis, delta_and_depth,
                          module_from_presentation, modules_isomorphic)
from abmod.ore import standard_computation
from abmod.series import TruncSeries, series_inv
from abmod.suites import crossratio_presentation, example35_presentation
from conftest import small_rats

lam = Fraction(7, 2)
N = 36


def ser(*cs, order=N):
    return TruncSeries(list(cs), order)


def module(pres):
    return module_from_presentation(pres)[0]


def test_make_E_gamma():
    pres = make_E_gamma(lam, 2, 3, 0, N)
    assert pres.S == [ser(1), ser(1)]
    for g in (0, 2, Fraction(-1, 3)):
        assert delta_and_depth(make_E_gamma(lam, 2, 3, g, N)) == (3, 1)


def test_rank2_theme_param():
    for z in (0, 1, Fraction(-2, 3)):
        assert rank2_theme_param(FrescoPresentation(lam, [3], [ser(1, 0, 0, z)], N)) == z
    assert rank2_theme_param(FrescoPresentation(lam, [2], [ser(1, 1)], N)) == 0
    with pytest.raises(WrongRank):
        rank2_theme_param(make_E_gamma(lam, 2, 3, 0, N))
    with pytest.raises(UniqueClass):
        rank2_theme_param(FrescoPresentation(lam, [0], [ser(1, 1)], N))


def test_rank2_param_is_a_module_invariant():
    E = module(FrescoPresentation(lam, [2], [ser(1, 3, 5)], N))
    F = change_basis(E, [[ser(1, 1), ser(0, 2)], [ser(3), ser(1, 0, 1)]])
    assert rank2_theme_param(F) == rank2_theme_param(E)


def test_extract_gamma():
    assert extract_gamma(make_E_gamma(lam, 2, 3, Fraction(5, 7), N)) == Fraction(5, 7)
    with pytest.raises(NonUnique):
        extract_gamma(make_E_gamma(lam, 2, 1, 1, N))


@st.composite
def unimodular3(draw):
    rng = random.Random(draw(st.integers(0, 10 ** 6)))
    while True:
        M0 = [[Fraction(rng.randint(-2, 2)) for _ in range(3)] for _ in range(3)]
        if linalg.det(M0):
            break
    return [[TruncSeries([M0[i][j]] + [Fraction(rng.randint(-2, 2)) for _ in range(2)], N)
             for j in range(3)] for i in range(3)]


@settings(max_examples=6)
@given(small_rats, unimodular3())
def test_extract_gamma_after_base_change(g, B):
    E = module(make_E_gamma(lam, 2, 3, g, N))
    assert extract_gamma(change_basis(E, B)) == g


@settings(max_examples=10)
@given(st.sampled_from([(lam, 2, 2), (Fraction(4), 3, 2), (Fraction(1, 3), 2, 4)]), small_rats)
def test_extract_make_round_trip(shape, g):
    l1, p1, p2 = shape
    assert extract_gamma(make_E_gamma(l1, p1, p2, g, 4 * (p1 + p2) + 16)) == g


@settings(max_examples=6)
@given(small_rats, small_rats)
def test_isomorphic_iff_same_gamma(g1, g2):
    E1 = module(make_E_gamma(lam, 2, 3, g1, 24))
    E2 = module(make_E_gamma(lam, 2, 3, g2, 24))
    assert modules_isomorphic(E1, E2)[0] == (g1 == g2)


def test_p2_equal_one_collapses():
    E0 = module(make_E_gamma(lam, 2, 1, 0, 24))
    E1 = module(make_E_gamma(lam, 2, 1, 3, 24))
    assert modules_isomorphic(E0, E1)[0]


def test_witness():
    w = semisimplicity_witness(lam, 2, 3, ser(1), ser(1))
    assert (w.alpha_coeff, w.beta_coeff, w.gamma_coeff, w.semisimple) == (0, 0, 0, True)
    w = semisimplicity_witness(lam, 2, 3, ser(1, 0, 0, 0, 0, 1), ser(1))
    assert w.gamma_coeff == Fraction(-2, 3) and w.depth == 2 and not w.semisimple
    w = semisimplicity_witness(lam, 2, 3, ser(1), ser(1, 0, 0, 1))
    assert w.beta_coeff == 1 and not w.applicable


def test_find_L_semisimple():
    assert find_L(module(make_E_gamma(lam, 2, 3, 1, N))) is None


@pytest.mark.parametrize("z,expected", [(1, lam + 2), (Fraction(1, 2), lam + 2),
                                        (-2, lam + 2), (0, lam)])
def test_find_L_example_family(z, expected):
    assert find_L(module(example35_presentation(Fraction(z), N))) == expected


def test_depth_drop_needs_the_right_line():
    # at 11/2 the normal eigenlines are x + c b^2 e1; only one c gives a
    # semi-simple quotient
    res = socle_search(module(example35_presentation(Fraction(1), N)))
    assert res.depth == 2 and len(res.drop_lines) == 1


def test_L_descends_to_subtheme():
    # rank-2 normal sub-theme read off the double commutation of the z = 1 member
    S1, S2 = ser(1, 0, 0, 0, 0, 1), ser(1, 0, 0, 1)
    sc = standard_computation(lam, 2, 3, S1, S2)
    Ui = series_inv(sc.U)
    M = S1 * Ui * Ui * sc.V
    F = AbModule([[ser(0, Fraction(11, 2)), M], [ser(0), ser(0, Fraction(15, 2))]], N)
    assert rank2_theme_param(F) != 0
    assert find_L(F) == find_L(module(example35_presentation(Fraction(1), N))) == Fraction(11, 2)


def test_empirical_L_values():
    # derived by pushing E(gamma) forward along a + a^2; fits -(p1-1)(p1+p2-1)
    for (l1, p1, p2), L in (((lam, 2, 2), -3), ((Fraction(4), 3, 2), -8),
                            ((Fraction(5, 2), 2, 3), -4)):
        emp = empirical_L(l1, p1, p2)
        assert emp.L == L == -(p1 - 1) * (p1 + p2 - 1)
        assert emp.gamma_independent and emp.rho_linear


def test_printed_L_variants_disagree():
    vals = printed_L_variants(Fraction(3), 4, 3)
    assert vals["lambda2^2-(2p1-3)lambda2+(p1-1)(p2-5)"] == 0
    assert vals["lambda1^2+lambda1-(p1-1)(p1-p2+3)"] == 0
    assert len(set(printed_L_variants(lam, 2, 2).values())) > 1


def test_tangent_change_fixes_gamma():
    for theta in ([1, 0, 1], [1, 0, 2, -1]):
        assert transformed_gamma(lam, 2, 2, Fraction(3), ChangeOfVariable(theta)) == 3


@settings(max_examples=4)
@given(st.sampled_from([1, 2, -1, Fraction(1, 2)]), st.sampled_from([0, 1, -2]), small_rats)
def test_affine_law(t1, t2, g):
    got = transformed_gamma(lam, 2, 2, g, ChangeOfVariable([t1, t2]))
    assert got == g / t1 + Fraction(t2) / t1 ** 2 * -3


def test_cross_ratio():
    pres = crossratio_presentation(40)
    E = module(pres)
    gs = []
    for j in range(2):
        sub = FrescoPresentation(pres.lambdas()[j], [2, 2], pres.S[j:j + 2], 40)
        gs.append(extract_gamma(sub))
    sub = FrescoPresentation(pres.lambdas()[2], [2, 2], pres.S[2:4], 40)
    gs.append(extract_gamma(sub))
    assert subquotient_gammas(E, (3, 4, 5)) == gs
    want = (gs[2] - gs[1]) / (gs[2] - gs[0])
    assert cross_ratio(E, 3, 4, 5) == want
    for theta in ([1, 1], [1, Fraction(-1, 2)], [3]):
        F = module(pushforward(pres, ChangeOfVariable(theta)))
        assert cross_ratio(F, 3, 4, 5) == want


def test_cross_ratio_errors():
    with pytest.raises(WrongRank):
        cross_ratio(module(make_E_gamma(lam, 2, 3, 0, N)), 1, 2, 3)
    pres = FrescoPresentation(Fraction(5, 2), [2, 2, 2, 2],
                              [ser(1, 1, order=40), ser(1, 0, order=40), ser(1, 1, order=40),
                               ser(1, 0, order=40)], 40)
    with pytest.raises(Degenerate):
        cross_ratio(module(pres), 3, 4, 5)


def test_invariant_report():
    rep = invariant_report(make_E_gamma(lam, 2, 3, Fraction(1, 2), N))
    assert (rep.delta, rep.d, rep.gamma_params) == (3, 1, [Fraction(1, 2)])
    assert rep.bernstein_roots == [Fraction(-13, 2), Fraction(-7, 2), Fraction(-3, 2)]
