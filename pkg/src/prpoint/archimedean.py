"""Real and complex analytic quantities: the real period by AGM iteration,
L'(E,1) by the exponential-integral series, the Neron-Tate height by a
doubling limit with an explicit tail bound, and the rational constant
c = -L'(E,1) / (height * period).

Everything here is consumed through rational reconstruction of small
rationals, so double precision with tracked error bounds is enough.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import exp1

from .curves import INFINITY


class WrongRankError(ValueError):
    pass


class AmbiguousRationalError(ValueError):
    pass


@dataclass(frozen=True)
class RealScalar:
    """A float plus a bound dominating the truncation error of its series."""
    value: float
    err: float

    def __add__(self, other):
        if isinstance(other, RealScalar):
            return RealScalar(self.value + other.value, self.err + other.err)
        return RealScalar(self.value + other, self.err)

    def __mul__(self, other):
        if isinstance(other, RealScalar):
            v = self.value * other.value
            e = (abs(self.value) * other.err + abs(other.value) * self.err
                 + self.err * other.err)
            return RealScalar(v, e)
        return RealScalar(self.value * other, self.err * abs(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RealScalar):
            v = self.value / other.value
            e = (self.err + abs(v) * other.err) / (abs(other.value) - other.err)
            return RealScalar(v, e)
        return RealScalar(self.value / other, self.err / abs(other))


def _agm(a, b, tol=1e-15):
    for _ in range(80):
        if abs(a - b) < tol * abs(a):
            break
        a, b = (a + b) / 2, cmath.sqrt(a * b)
        # keep the "right" square-root branch: |a-b| <= |a+b|
        if abs(a - b) > abs(a + b):
            b = -b
    return a


def _cubic_roots(b2, b4, b6):
    # roots of 4x^3 + b2 x^2 + 2 b4 x + b6
    return np.roots([4.0, float(b2), 2.0 * float(b4), float(b6)])


def real_period(curve):
    """Omega^+ = integral of the unit differential over E(R), via AGM.

    With e1 >= e2 >= e3 the roots of 4x^3+b2x^2+2b4x+b6: for positive
    discriminant (two real components) Omega^+ = 2pi/AGM(sqrt(e1-e3),
    sqrt(e1-e2)); for negative discriminant, with e1 the real root and
    A = e1 - Re(e2), B = |e1 - e2|, it is 2pi/AGM(2 sqrt(B), sqrt(2B+2A)).
    Both agree with direct quadrature of dx/sqrt(quartic) to ~1e-10.
    """
    roots = _cubic_roots(curve.b2, curve.b4, curve.b6)
    if curve.disc > 0:
        e1, e2, e3 = sorted(r.real for r in roots)[::-1]
        om = 2 * math.pi / _agm(math.sqrt(e1 - e3), math.sqrt(e1 - e2)).real
    else:
        e1 = max(r.real for r in roots if abs(r.imag) < 1e-9)
        ec = next(r for r in roots if r.imag > 1e-9)
        A = e1 - ec.real
        B = abs(e1 - ec)
        om = 2 * math.pi / _agm(2 * math.sqrt(B), math.sqrt(2 * B + 2 * A)).real
    assert om > 0
    return RealScalar(om, 1e-11 * om)


def imaginary_period(curve):
    """Magnitude of the imaginary lattice direction (normalization partner
    of the minus-sign symbol calibration; any fixed convention works)."""
    roots = _cubic_roots(curve.b2, curve.b4, curve.b6)
    if curve.disc > 0:
        e1, e2, e3 = sorted(r.real for r in roots)[::-1]
        om = 2 * math.pi / _agm(math.sqrt(e1 - e3), math.sqrt(e2 - e3)).real
    else:
        e1 = max(r.real for r in roots if abs(r.imag) < 1e-9)
        ec = next(r for r in roots if r.imag > 1e-9)
        A = e1 - ec.real
        B = abs(e1 - ec)
        om = 2 * math.pi / _agm(2 * math.sqrt(B), math.sqrt(2 * B - 2 * A)).real
    return RealScalar(abs(om), 1e-9 * abs(om))


def functional_equation_sign(curve, n_terms=None):
    """Sign w in Lambda(s) = w Lambda(2-s), detected numerically from the
    Fricke symmetry g(1/t) = w t^2 g(t) of g(t) = sum a_n exp(-2 pi n t / sqrt(N))."""
    N = curve.N
    if n_terms is None:
        n_terms = max(600, int(22 * math.sqrt(N)))
    an = curve.an_list(n_terms)
    t0 = 1.15

    def g(t):
        n = np.arange(1, n_terms + 1)
        return float(np.sum(np.array(an[1:]) * np.exp(-2 * math.pi * n * t / math.sqrt(N))))

    w = g(1 / t0) / (t0 * t0 * g(t0))
    if abs(w - 1) < 0.01:
        return 1
    if abs(w + 1) < 0.01:
        return -1
    raise ArithmeticError(f"functional equation sign did not resolve: {w}")


_LPRIME_MEMO: dict = {}


def lprime_complex(curve):
    """L'(E,1) for sign -1 curves: 2 * sum a_n/n * E1(2 pi n / sqrt(N)).

    Truncation at ~22 sqrt(N) terms leaves an error far below 1e-10.
    """
    if curve.key() in _LPRIME_MEMO:
        return _LPRIME_MEMO[curve.key()]
    if functional_equation_sign(curve) != -1:
        raise WrongRankError("functional equation sign is +1: not rank one")
    N = curve.N
    n_terms = max(800, int(25 * math.sqrt(N)))
    an = curve.an_list(n_terms)
    n = np.arange(1, n_terms + 1, dtype=float)
    vals = np.array(an[1:], dtype=float) / n * exp1(2 * math.pi * n / math.sqrt(N))
    total = 2.0 * float(np.sum(vals))
    tail = 2.0 * float(exp1(2 * math.pi * n_terms / math.sqrt(N))) * n_terms
    out = RealScalar(total, max(tail, 1e-12))
    _LPRIME_MEMO[curve.key()] = out
    return out


def l_value_twisted(curve, d, n_terms=None):
    """L(E, chi_d, 1) for a fundamental discriminant d > 0 (even character)
    with the twisted root number +1, by the exponential-decay series at the
    twisted conductor N d^2."""
    N = curve.N * d * d
    if n_terms is None:
        n_terms = max(1200, int(25 * math.sqrt(N)))
    an = curve.an_list(n_terms)
    total = 0.0
    c = 2 * math.pi / math.sqrt(N)
    for n in range(1, n_terms + 1):
        if an[n] == 0:
            continue
        chi = _kronecker(d, n)
        if chi == 0:
            continue
        total += an[n] * chi / n * math.exp(-c * n)
    return RealScalar(2.0 * total, max(2 * math.exp(-c * n_terms) * n_terms, 1e-12))


def _kronecker(d, n):
    """Kronecker symbol (d/n)."""
    if math.gcd(d, n) != 1:
        return 0
    if n == 0:
        return 1 if abs(d) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if d < 0:
            sign = -sign
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v % 2 == 1:
        m = d % 8
        if m in (3, 5):
            sign = -sign
        elif m in (0, 2, 4, 6):
            return 0
    a = d % n
    # Jacobi symbol (a/n) for odd n > 0
    t = sign
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def _duplication_resultant(curve):
    """|Res_x(x^4 - b4 x^2 - 2 b6 x - b8, 4x^3 + b2 x^2 + 2 b4 x + b6)|.

    Any common factor of the homogenized duplication numerator/denominator
    divides this integer, so x-doubling can be kept in lowest terms by
    cancelling only its (small) prime support -- no big-integer gcds.
    """
    A = [-curve.b8, -2 * curve.b6, -curve.b4, 0, 1]
    B = [curve.b6, 2 * curve.b4, curve.b2, 4]
    n, m = 4, 3
    size = n + m
    rows = []
    for i in range(m):
        row = [0] * size
        for j, c in enumerate(reversed(A)):
            row[i + j] = c
        rows.append(row)
    for i in range(n):
        row = [0] * size
        for j, c in enumerate(reversed(B)):
            row[i + j] = c
        rows.append(row)
    return abs(_int_det(rows))


def _int_det(rows):
    """Determinant of a small integer matrix by fraction-free elimination."""
    from fractions import Fraction as F
    m = [[F(x) for x in r] for r in rows]
    n = len(m)
    det = F(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] * inv
            if f:
                for cc in range(c, n):
                    m[r][cc] -= f * m[c][cc]
    assert det.denominator == 1
    return det.numerator


def _small_prime_support(n):
    out = []
    for d in range(2, 10**5):
        if d * d > n:
            break
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
    if n > 1:
        out.append(n)  # composite leftover still works as a cancellation trial
    return out


_HEIGHT_MEMO: dict = {}


def neron_tate_height(curve, P, tol=2e-8):
    """Canonical height normalized so h(x(nP)) ~ n^2 h(P) (the regulator
    convention: L'(37a,1) = Omega * h(gen) exactly for trivial BSD factors).

    h = lim h_x(2^k P) / 4^k.  Doubling is done on the homogenized
    x-coordinate (a : b) with cancellation restricted to the prime support of
    the duplication resultant, which keeps the fraction exactly reduced
    without ever running gcd on the huge intermediate integers.  Increments
    of h_x(2^k P)/4^k are bounded by C/4^k; the reported error dominates the
    geometric tail.  Torsion points return exactly zero.
    """
    if P is INFINITY or curve.is_torsion(P):
        return RealScalar(0.0, 0.0)
    memo_key = (curve.key(), P.x, P.y, tol)
    if memo_key in _HEIGHT_MEMO:
        return _HEIGHT_MEMO[memo_key]
    support = _small_prime_support(_duplication_resultant(curve))
    b2, b4, b6, b8 = curve.b2, curve.b4, curve.b6, curve.b8
    a, b = P.x.numerator, P.x.denominator
    vals = [math.log(max(abs(a), b))]
    k = 0
    tail = math.inf
    while k < 13:
        a2, bsq = a * a, b * b
        anum = (a2 * a2 - b4 * a2 * bsq - 2 * b6 * a * bsq * b - b8 * bsq * bsq)
        aden = b * (4 * a2 * a + b2 * a2 * b + 2 * b4 * a * bsq + b6 * bsq * b)
        for ell in support:
            while anum % ell == 0 and aden % ell == 0:
                anum //= ell
                aden //= ell
        if aden < 0:
            anum, aden = -anum, -aden
        if aden == 0:
            raise ArithmeticError("hit 2-torsion while doubling a non-torsion point")
        a, b = anum, aden
        k += 1
        vals.append(math.log(max(abs(a), b)) / 4**k)
        if k >= 3:
            # defect |h_x(2Q) - 4 h_x(Q)| is bounded; estimate C empirically
            C = max(abs(vals[j + 1] - vals[j]) * 4**(j + 1) for j in range(1, k)) * 1.5
            tail = C / (3 * 4**k)
            if tail < tol:
                break
    out = RealScalar(vals[-1], max(tail, 1e-12))
    _HEIGHT_MEMO[memo_key] = out
    return out


def reconstruct_rational(value: RealScalar, den_bound=10**4,
                         num_bound=None):
    """The unique small fraction within the error bars, by Stern-Brocot
    (continued fraction) search; raises when two candidates fit."""
    x = value.value
    err = max(value.err, 1e-12)
    best = _cf_approx(x, den_bound)
    if num_bound is not None and abs(best.numerator) > num_bound:
        raise AmbiguousRationalError(f"no candidate below numerator bound: {best}")
    if abs(float(best) - x) > err * 4 + 1e-9:
        raise AmbiguousRationalError(
            f"value {x} not within error bars of any fraction with "
            f"denominator <= {den_bound}")
    # a second candidate within bars would differ by >= 1/(den_bound * den(best))
    gap = 1.0 / (den_bound * best.denominator)
    if gap < 2 * err:
        raise AmbiguousRationalError("two nearby rationals within error bars; "
                                     "raise float working precision")
    return best


def _cf_approx(x, den_bound):
    frac = Fraction(x).limit_denominator(den_bound)
    return frac


def compute_c_f(curve, P, report_square_factor=True):
    """c = -L'(E,1) / (h(P) * Omega^+), reconstructed as a rational.

    The Shimura period 2*pi*i*Omega_f^+ is pinned to the Neron period
    Omega^+; the modular-symbol calibration makes the same identification,
    so the two cancel in every end-to-end identity.  Replacing P by a
    multiple m*P scales the raw quotient by 1/m^2, which stays visible in
    the reconstructed rational rather than being corrected silently.
    """
    lp = lprime_complex(curve)
    h = neron_tate_height(curve, P)
    om = real_period(curve)
    if h.value == 0:
        raise WrongRankError("torsion point passed to compute_c_f")
    quotient = lp / (h * om)
    c = -reconstruct_rational(quotient, den_bound=10**4)
    return c
