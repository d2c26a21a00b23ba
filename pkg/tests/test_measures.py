import math
from fractions import Fraction

import pytest

from prpoint.curves import Curve, hecke_roots
from prpoint.measures import (
    DepthError,
    SlopeError,
    lp_jet,
    naive_base_change_jet,
    stabilized_measure,
    twisted_moment,
)
from prpoint.modsym import ManinSpace, TwistCharacter, calibrate, eigen_symbol
from prpoint.padics import Padic


@pytest.fixture(scope="module")
def phi37(e37):
    return calibrate(eigen_symbol(ManinSpace(37), e37, sign=1), e37, p=5)


@pytest.fixture(scope="module")
def roots37(e37):
    return hecke_roots(e37, 5, 8)


@pytest.fixture(scope="module")
def mu37(phi37, roots37):
    return stabilized_measure(phi37, roots37, depth=6, prec=8)


def test_slope_guard(phi37, roots37):
    from prpoint.curves import HeckeRoots
    swapped = HeckeRoots(ap=roots37.ap, alpha=roots37.beta,
                         beta=roots37.alpha, p=5, prec=8)
    with pytest.raises(SlopeError):
        stabilized_measure(phi37, swapped, depth=3, prec=8)


def test_distribution_relation_exact(mu37):
    for n in (1, 2, 3, 4):
        for a in range(1, 5**n, max(1, 5**n // 9)):
            if a % 5 == 0:
                continue
            assert mu37.distribution_residual(a, n) == math.inf


def test_total_mass_vanishes_rank1(mu37):
    # forced by interpolation at the trivial character: (1-1/alpha)^2 L(E,1)/Omega = 0
    assert mu37.total_unit_mass().is_zero()


def test_rank0_control_11a(e11):
    phi = calibrate(eigen_symbol(ManinSpace(11), e11, sign=1), e11, p=3)
    roots = hecke_roots(e11, 3, 8)
    mu = stabilized_measure(phi, roots, depth=5, prec=8)
    mass = mu.total_unit_mass()
    assert not mass.is_zero()
    assert mass.valuation() == 0


def test_measure_values_match_symbol(mu37, phi37, roots37):
    # mu(a + p^n) = alpha^-n phi{a/p^n} - alpha^-(n+1) phi{a/p^(n-1)}
    alpha = roots37.alpha
    for (a, n) in ((1, 1), (3, 1), (7, 2), (12, 2), (101, 3)):
        direct = (alpha**(-n) * Padic.from_rational(phi37.evaluate(Fraction(a, 5**n)), 5, 8)
                  - alpha**(-n - 1) * Padic.from_rational(
                      phi37.evaluate(Fraction(a % 5**(n - 1), 5**(n - 1))), 5, 8))
        assert mu37.value(a, n).congruent(direct, 8)


def test_minus_r_symmetry(mu37):
    for (a, n) in ((1, 1), (2, 1), (7, 2), (11, 2)):
        assert mu37.value(a, n).congruent(mu37.value(-a % 5**n, n), 8)


def test_odd_moments_vanish(mu37):
    # plus-symbol parity: m(eta-bar) = eta(-1) m(eta), so odd branches die
    for j in (1, 3):
        m = twisted_moment(mu37, TwistCharacter.teichmuller_power(5, j))
        assert m.is_zero()


def test_even_moment_conjugation(mu37):
    m2 = twisted_moment(mu37, TwistCharacter.teichmuller_power(5, 2))
    m2c = twisted_moment(mu37, TwistCharacter.teichmuller_power(5, -2))
    assert (m2 - m2c).is_zero()
    assert not m2.is_zero()


def test_trivial_moment_is_total_mass(mu37):
    m0 = twisted_moment(mu37, TwistCharacter.teichmuller_power(5, 0))
    assert (m0 - mu37.total_unit_mass()).is_zero()


# ------------------------------------------------------------------- jets

def test_jet_c0_vanishes_37a(mu37):
    jet = lp_jet(mu37, order=1, depth=6)
    assert jet.coeffs[0].is_zero()


def test_jet_c1_nonzero_37a(mu37):
    jet = lp_jet(mu37, order=1, depth=6)
    c1 = jet.coeffs[1]
    assert not c1.is_zero()
    assert c1.valuation() == 1


def test_jet_depth_stability(mu37):
    j5 = lp_jet(mu37, order=2, depth=5)
    j6 = lp_jet(mu37, order=2, depth=6)
    for a, b in zip(j5.coeffs, j6.coeffs):
        d = a - b
        assert d.is_zero() or d.valuation() >= min(a.abs_prec(), b.abs_prec())


def test_jet_linearity(mu37, phi37, roots37):
    from prpoint.modsym import EigenSymbol
    doubled = EigenSymbol(level=37, sign=1, space=phi37.space,
                          values=phi37.values, c_cal=phi37.c_cal * 2,
                          curve_key=phi37.curve_key)
    mu2 = stabilized_measure(doubled, roots37, depth=5, prec=8)
    j1 = lp_jet(mu37, order=1, depth=5)
    j2 = lp_jet(mu2, order=1, depth=5)
    assert (j2.coeffs[1] - j1.coeffs[1] * 2).is_zero()


def test_jet_depth_error(mu37):
    with pytest.raises(DepthError):
        lp_jet(mu37, order=1, prec=8, depth=4)


def test_jet_ledger(mu37):
    jet = lp_jet(mu37, order=1, depth=5)
    assert jet.ledger["depth"] == 5
    assert jet.ledger["claimed_abs_prec"] <= 5 + 3
    assert jet.render().startswith("s-center 1, [")


# ------------------------------------------------------- naive base change

def test_base_change_identity_jet(mu37):
    jet = lp_jet(mu37, order=2, depth=5)
    one = type(jet)(p=5, coeffs=[Padic.from_int(1, 5, 8),
                                 Padic.zero(5), Padic.zero(5)])
    prod = naive_base_change_jet(jet, one)
    for a, b in zip(prod.coeffs, jet.coeffs):
        assert (a - b).is_zero()


def test_base_change_cauchy_c0(mu37):
    jet = lp_jet(mu37, order=2, depth=5)
    prod = naive_base_change_jet(jet, jet)
    assert (prod.coeffs[0] - jet.coeffs[0] * jet.coeffs[0]).is_zero()


def test_base_change_rank1_split(mu37, phi37, e37, roots37):
    # c0(f-jet) = 0 makes c1(product) = c1(f) * c0(twist-jet): the split used
    # to reduce the quadratic-field derivative to the two Q-factors
    from prpoint.modsym import TwistCharacter, twist_symbol
    chi = TwistCharacter.quadratic(-4)
    tw = twist_symbol(phi37, chi)
    twc = stabilized_measure(_as_symbol_like(tw), _twist_roots(roots37, chi),
                             depth=4, prec=8)
    jet_f = lp_jet(mu37, order=1, depth=5)
    jet_fk = lp_jet(twc, order=1, depth=4)
    prod = naive_base_change_jet(jet_f, jet_fk)
    want = jet_f.coeffs[1] * jet_fk.coeffs[0]
    got = prod.coeffs[1]
    assert (got - want).congruent(Padic.zero(5), min(got.abs_prec(), 6))


def _as_symbol_like(tw):
    """Adapter: the twisted value map exposes the same batch interface by
    twisting numerators (conductor-scaled) under the hood."""
    from prpoint.measures import _TwistedBatchAdapter
    return _TwistedBatchAdapter(tw)


def _twist_roots(roots, chi):
    from prpoint.curves import HeckeRoots
    s = chi(roots.p)
    return HeckeRoots(ap=roots.ap * s, alpha=roots.alpha * s,
                      beta=roots.beta * s, p=roots.p, prec=roots.prec)
