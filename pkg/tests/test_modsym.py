import math
import random
from fractions import Fraction

import numpy as np
import pytest

from prpoint.curves import Curve
from prpoint.modsym import (
    EigenSymbol,
    IsolationFailure,
    ManinSpace,
    TwistCharacter,
    calibrate,
    eigen_symbol,
    twist_symbol,
    _twisted_sum_raw,
)

RNG = random.Random(99)


@pytest.fixture(scope="module")
def sp37():
    return ManinSpace(37)


@pytest.fixture(scope="module")
def phi37(sp37, e37):
    return eigen_symbol(sp37, e37, sign=1)


@pytest.fixture(scope="module")
def phi37c(phi37, e37):
    return calibrate(phi37, e37, p=5)


def matmul(A, B):
    n = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)]


# ------------------------------------------------------------------- space

def test_p1_count_37(sp37):
    assert len(sp37.p1) == 38  # 37 * (1 + 1/37)


def test_dimension_37(sp37):
    assert sp37.dim == 5  # 2g + #cusps - 1 = 4 + 2 - 1


def test_dimension_11():
    assert ManinSpace(11).dim == 3  # 2 + 2 - 1


def test_space_43_53():
    assert ManinSpace(43).dim == 2 * 3 + 2 - 1  # genus 3
    assert ManinSpace(53).dim == 2 * 4 + 2 - 1  # genus 4


# ------------------------------------------------------------------- Hecke

def test_hecke_commutativity(sp37):
    T2, T3, T5 = (sp37.hecke_matrix(ell) for ell in (2, 3, 5))
    assert matmul(T2, T3) == matmul(T3, T2)
    assert matmul(T2, T5) == matmul(T5, T2)


def test_hecke_eigenvalues_full_space(sp37):
    # the 5-dim space at N=37: plus part carries 37a (a_2=-2), 37b (a_2=0)
    # and the boundary piece with T_2 eigenvalue ell+1 = 3
    T2 = sp37.hecke_matrix(2)
    lams = sorted(np.linalg.eigvals(np.array(T2, dtype=float)).real)
    assert any(abs(l - 3) < 1e-8 for l in lams)       # Eisenstein piece
    assert any(abs(l + 2) < 1e-8 for l in lams)       # 37a
    assert any(abs(l) < 1e-8 for l in lams)           # 37b


def test_trace_t2_cuspidal_plus(sp37, e37):
    # plus cuspidal eigenvalues are a_2(37a) = -2 and a_2(37b) = 0
    star = sp37.star_matrix()
    T2 = sp37.hecke_matrix(2)
    plus = np.array(matmul(T2, star), dtype=float) + np.array(T2, dtype=float)
    tr_plus = (np.trace(plus)) / 2  # trace of T2 on the +1 eigenspace
    assert abs(tr_plus - (-2 + 0 + 3)) < 1e-9  # includes Eisenstein +3


# ------------------------------------------------------------- eigensymbol

def test_eigen_symbol_exists_and_exact(sp37, phi37, e37):
    for ell in (2, 3, 5, 7, 11, 13):
        mats_sum = Fraction(0)
        from prpoint.modsym import _heilbronn
        for i, (c, d) in enumerate(sp37.p1.reps):
            tot = Fraction(0)
            for (a, b, cc, dd) in _heilbronn(ell):
                c1, d1 = (a * c + cc * d) % 37, (b * c + dd * d) % 37
                if math.gcd(math.gcd(c1, d1), 37) == 1:
                    tot += phi37.values[sp37.p1.index(c1, d1)]
            assert tot == e37.ap(ell) * phi37.values[i]


def test_eigen_symbol_content_one(phi37):
    ints = [v for v in phi37.values if v != 0]
    assert all(v.denominator == 1 for v in ints)
    assert math.gcd(*[int(v) for v in ints]) == 1


def test_isolation_failure_on_wrong_curve(sp37):
    e43 = Curve(0, 1, 1, 0, 0, conductor=43)
    with pytest.raises(ValueError):
        eigen_symbol(sp37, e43)


# -------------------------------------------------------------- evaluation

def test_evaluate_at_infinity(phi37):
    assert phi37.evaluate(None, calibrated=False) == 0


def test_evaluate_path_additivity(phi37):
    for _ in range(20):
        r = Fraction(RNG.randrange(-40, 40), RNG.randrange(1, 60))
        s = Fraction(RNG.randrange(-40, 40), RNG.randrange(1, 60))
        lhs = phi37.evaluate_path(r, s, calibrated=False)
        rhs = (phi37.evaluate(r, calibrated=False)
               - phi37.evaluate(s, calibrated=False))
        assert lhs == rhs


def test_gamma0_invariance(phi37):
    # phi{gr -> gs} = phi{r -> s} for g in Gamma_0(37)
    gammas = [(1, 1, 0, 1), (1, 0, 37, 1), (2, 1, 37, 19), (21, 4, 37 * 2, 15)]
    for (a, b, c, d) in gammas:
        if a * d - b * c != 1 or c % 37:
            continue
        for _ in range(5):
            r = Fraction(RNG.randrange(-20, 20), RNG.randrange(1, 30))
            s = Fraction(RNG.randrange(-20, 20), RNG.randrange(1, 30))
            gr = Fraction(a * r.numerator + b * r.denominator,
                          c * r.numerator + d * r.denominator) \
                if c * r.numerator + d * r.denominator != 0 else None
            gs = Fraction(a * s.numerator + b * s.denominator,
                          c * s.numerator + d * s.denominator) \
                if c * s.numerator + d * s.denominator != 0 else None
            lhs = phi37.evaluate_path(gr, gs, calibrated=False)
            rhs = phi37.evaluate_path(r, s, calibrated=False)
            assert lhs == rhs


def test_path_hecke_identity(phi37, e37):
    for ell in (2, 3):
        for _ in range(10):
            r = Fraction(RNG.randrange(-30, 30), RNG.randrange(1, 40))
            lhs = sum(phi37._eval_raw((r + a) / ell) for a in range(ell))
            lhs += phi37._eval_raw(ell * r)
            assert lhs == e37.ap(ell) * phi37._eval_raw(r)


# -------------------------------------------------------------- calibration

def test_calibration_constant_37a(phi37c):
    assert phi37c.c_cal == Fraction(1, 2)


def test_calibration_d_independent(phi37, e37):
    from prpoint.archimedean import l_value_twisted, real_period
    om = real_period(e37)
    ratios = []
    for d in (5, 8, 13, 17):
        raw = _twisted_sum_raw(phi37, d)
        if raw == 0:
            continue
        lv = l_value_twisted(e37, d)
        ratios.append(lv.value * math.sqrt(d) / om.value / float(raw))
    assert len(ratios) >= 3
    assert max(ratios) - min(ratios) < 1e-8


def test_calibration_small_height(e37, e43, e53):
    for E in (e37, e43, e53):
        sp = ManinSpace(E.N)
        phi = eigen_symbol(sp, E, sign=1)
        phic = calibrate(phi, E)
        assert abs(phic.c_cal.numerator) <= 10**3
        assert phic.c_cal.denominator <= 10**3


def test_calibration_scales_linearly(phi37, e37):
    scaled = EigenSymbol(level=37, sign=1, space=phi37.space,
                         values=[7 * v for v in phi37.values],
                         curve_key=phi37.curve_key)
    cal = calibrate(scaled, e37)
    base = calibrate(phi37, e37)
    assert cal.c_cal == base.c_cal / 7


# ----------------------------------------------------------------- batch

def test_batch_eval_matches_scalar(phi37c):
    nums = np.arange(0, 125, dtype=np.int64)
    res, shift = phi37c.evaluate_batch_mod(nums, 125, 5, 8)
    assert shift == 0
    for a in range(0, 125, 7):
        want = phi37c.evaluate(Fraction(a, 125))
        got = int(res[a])
        assert (want.numerator * pow(want.denominator, -1, 5**8) - got) % 5**8 == 0


# ----------------------------------------------------------------- twists

def test_twist_characters():
    chi5 = TwistCharacter.quadratic(5)
    assert chi5.parity == 1 and chi5.conductor == 5
    assert [chi5(n) for n in range(1, 5)] == [1, -1, -1, 1]
    assert chi5.gauss_sum_squared() == 5
    m4 = TwistCharacter.quadratic(-4)
    assert m4.parity == -1
    assert m4.gauss_sum_squared() == -4
    with pytest.raises(ValueError):
        TwistCharacter.quadratic(6)


def test_teichmuller_character():
    om = TwistCharacter.teichmuller_power(5, 2)
    v = om.value_padic(2, 6)
    w = om.value_padic(3, 6)
    assert (v * v * w * w).residue(6) == om.value_padic(6, 6).residue(6)
    assert om.value_padic(5, 6).is_exact_zero()


def test_trivial_twist_is_identity(phi37c):
    tw = twist_symbol(phi37c, TwistCharacter.quadratic(1))
    for _ in range(5):
        r = Fraction(RNG.randrange(-10, 10), RNG.randrange(1, 20))
        assert tw.evaluate(r) == phi37c.evaluate(r)


def test_twisted_symbol_hecke(phi37c, e37):
    chi = TwistCharacter.quadratic(5)
    tw = twist_symbol(phi37c, chi)
    assert tw.level == 37 * 25
    for ell in (2, 3):
        lam = e37.ap(ell) * chi(ell)
        for _ in range(4):
            r = Fraction(RNG.randrange(-10, 10), RNG.randrange(1, 15))
            lhs = sum(tw.evaluate((r + a) / ell) for a in range(ell))
            lhs += tw.evaluate(ell * r)
            assert lhs == lam * tw.evaluate(r)


def test_double_twist_gauss_square(phi37c):
    # twisting twice by chi_d multiplies values consistently with
    # tau(chi)^2 = chi(-1) d: the double twist equals d * (projection of phi)
    chi = TwistCharacter.quadratic(5)
    tw2 = twist_symbol(twist_symbol(phi37c, chi), chi)
    for r in (Fraction(1, 7), Fraction(2, 11), Fraction(0)):
        base = sum(phi37c.evaluate(r - Fraction(a, 25))
                   for a in range(25) if a % 5 and chi(a % 5)**2 == 1)
        # double twisted sum: sum over a,b chi(a)chi(b) phi{r - a/5 - b/5}
        direct = tw2.evaluate(r)
        assert direct == sum(
            chi(a) * chi(b) * phi37c.evaluate(r - Fraction(a, 5) - Fraction(b, 5))
            for a in range(1, 5) for b in range(1, 5))


def test_gcd_guard(phi37c):
    with pytest.raises(ValueError):
        twist_symbol(phi37c, TwistCharacter.quadratic(37))  # 37 | N


def test_serialization_round_trip(phi37c):
    data = phi37c.to_dict()
    back = EigenSymbol.from_dict(data, space=phi37c.space)
    assert back.values == phi37c.values
    assert back.c_cal == phi37c.c_cal
    assert back.sign == phi37c.sign
