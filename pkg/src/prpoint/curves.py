"""Elliptic curves over Q: exact point arithmetic, point counting, Hecke
roots, the formal-group logarithm/exponential, and rational point search.

Curves are given by a globally minimal Weierstrass model (minimality is an
input contract; the p-part of the discriminant is checked before any p-adic
work because the unit differential normalization depends on the model).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .padics import Padic, PadicError, padic_sqrt, rational_reconstruct, _vp


class BadReductionError(ValueError):
    pass


class NotOrdinaryError(ValueError):
    pass


INFINITY = None  # point at infinity marker


@dataclass(frozen=True)
class Point:
    """Affine rational point (x, y); the point at infinity is ``None``."""
    x: Fraction
    y: Fraction

    def __iter__(self):
        return iter((self.x, self.y))


class Curve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q."""

    def __init__(self, a1, a2, a3, a4, a6, conductor=None):
        self.a1, self.a2, self.a3, self.a4, self.a6 = (
            int(a1), int(a2), int(a3), int(a4), int(a6))
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        self.b2 = a1 * a1 + 4 * a2
        self.b4 = a1 * a3 + 2 * a4
        self.b6 = a3 * a3 + 4 * a6
        self.b8 = (a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4
                   + a2 * a3 * a3 - a4 * a4)
        self.c4 = self.b2**2 - 24 * self.b4
        self.c6 = -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6
        self.disc = (-self.b2**2 * self.b8 - 8 * self.b4**3
                     - 27 * self.b6**2 + 9 * self.b2 * self.b4 * self.b6)
        if self.disc == 0:
            raise ValueError("singular Weierstrass equation")
        if conductor is None:
            conductor = _radical(abs(self.disc))
        self.N = int(conductor)
        bad = set(_prime_factors(abs(self.disc)))
        declared = set(_prime_factors(self.N))
        if not declared <= bad:
            raise ValueError(f"conductor {conductor} has primes of good reduction")
        self._ap_cache: dict[int, int] = {}

    def __repr__(self):
        return f"Curve({self.a1},{self.a2},{self.a3},{self.a4},{self.a6}; N={self.N})"

    def key(self):
        return f"{self.a1}.{self.a2}.{self.a3}.{self.a4}.{self.a6}"

    # ----- model checks ---------------------------------------------------

    def check_p_minimal(self, p):
        """Reject models that are visibly non-minimal at p (p^12 | disc and
        p^4 | c4): the unit differential of a non-minimal model is off by p."""
        if self.disc % p**12 == 0 and self.c4 % p**4 == 0:
            raise ValueError(f"model is not minimal at {p}")

    def check_good_ordinary(self, p):
        if self.N % p == 0 or self.disc % p == 0:
            raise BadReductionError(f"bad reduction at {p}")
        ap = self.ap(p)
        if ap % p == 0:
            raise NotOrdinaryError(f"a_{p} = {ap} ≡ 0 mod {p}: not ordinary")
        self.check_p_minimal(p)

    # ----- exact point arithmetic ------------------------------------------

    def is_on_curve(self, P):
        if P is INFINITY:
            return True
        x, y = P.x, P.y
        return (y * y + self.a1 * x * y + self.a3 * y
                == x**3 + self.a2 * x * x + self.a4 * x + self.a6)

    def point(self, x, y):
        P = Point(Fraction(x), Fraction(y))
        if not self.is_on_curve(P):
            raise ValueError(f"({x}, {y}) is not on {self}")
        return P

    def negate(self, P):
        if P is INFINITY:
            return INFINITY
        return Point(P.x, -P.y - self.a1 * P.x - self.a3)

    def add(self, P, Q):
        if P is INFINITY:
            return Q
        if Q is INFINITY:
            return P
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
        if x1 == x2:
            if y1 + y2 + a1 * x2 + a3 == 0:
                return INFINITY
            lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
        else:
            lam = (y2 - y1) / (x2 - x1)
        nu = y1 - lam * x1
        x3 = lam * lam + a1 * lam - a2 - x1 - x2
        y3 = -(lam + a1) * x3 - nu - a3
        return Point(x3, y3)

    def mul(self, n, P):
        if n < 0:
            return self.mul(-n, self.negate(P))
        R = INFINITY
        Q = P
        while n:
            if n & 1:
                R = self.add(R, Q)
            Q = self.add(Q, Q)
            n >>= 1
        return R

    def is_torsion(self, P):
        """Exact test: by Mazur's theorem rational torsion has order <= 12."""
        if P is INFINITY:
            return True
        Q = P
        for _ in range(12):
            Q = self.add(Q, P)
            if Q is INFINITY:
                return True
        return False

    # ----- point counting ---------------------------------------------------

    def count_points(self, ell):
        """#E~(F_ell) by direct enumeration (quadratic-character count)."""
        if self.disc % ell == 0:
            raise BadReductionError(f"bad reduction at {ell}")
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        if ell == 2:
            cnt = 1
            for x in range(2):
                for y in range(2):
                    if (y * y + a1 * x * y + a3 * y
                            - (x**3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                        cnt += 1
            return cnt
        cnt = 1
        for x in range(ell):
            rhs = (x * x * x + a2 * x * x + a4 * x + a6) % ell
            b = (a1 * x + a3) % ell
            d = (b * b + 4 * rhs) % ell
            if d == 0:
                cnt += 1
            elif pow(d, (ell - 1) // 2, ell) == 1:
                cnt += 2
        return cnt

    def ap(self, ell):
        """Hecke eigenvalue a_ell = ell + 1 - #E~(F_ell) at good ell."""
        if ell not in self._ap_cache:
            if self.N % ell == 0:
                raise BadReductionError(f"ell = {ell} divides the conductor")
            a = ell + 1 - self.count_points(ell)
            assert a * a <= 4 * ell, "Hasse bound violated: counting bug"
            self._ap_cache[ell] = a
        return self._ap_cache[ell]

    def an_list(self, n_max):
        """Dirichlet coefficients a_1..a_n_max by multiplicativity.

        Good primes use the recursion a_{l^k} = a_l a_{l^{k-1}} - l a_{l^{k-2}};
        multiplicative primes contribute (+-1)^k, additive primes kill terms.
        """
        an = [0] * (n_max + 1)
        an[1] = 1
        spf = _smallest_prime_factors(n_max)
        ppow: dict[tuple[int, int], int] = {}

        def prime_power(ell, k):
            if (ell, k) in ppow:
                return ppow[(ell, k)]
            if self.N % ell:
                a = self.ap(ell)
                seq = [1, a]
                for _ in range(2, k + 1):
                    seq.append(a * seq[-1] - ell * seq[-2])
                val = seq[k]
            elif self.N % (ell * ell):
                # multiplicative: a_ell = ell - #E^ns(F_ell) = +1 split, -1 not
                aell = ell - self._count_singular(ell)
                assert aell in (1, -1)
                val = aell**k
            else:
                val = 0
            ppow[(ell, k)] = val
            return val

        for n in range(2, n_max + 1):
            m, res = n, 1
            while m > 1:
                ell = spf[m]
                k = 0
                while m % ell == 0:
                    m //= ell
                    k += 1
                res *= prime_power(ell, k)
                if res == 0:
                    break
            an[n] = res
        return an

    def _count_singular(self, ell):
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        cnt = 1
        for x in range(ell):
            for y in range(ell):
                lhs = (y * y + a1 * x * y + a3 * y) % ell
                rhs = (x**3 + a2 * x * x + a4 * x + a6) % ell
                if lhs == rhs:
                    # drop the singular point itself
                    dx = (3 * x * x + 2 * a2 * x + a4 - a1 * y) % ell
                    dy = (2 * y + a1 * x + a3) % ell
                    if dx == 0 and dy == 0:
                        continue
                    cnt += 1
        return cnt


def _radical(n):
    return math.prod(_prime_factors(n))


def _prime_factors(n):
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _smallest_prime_factors(n_max):
    spf = list(range(n_max + 1))
    for i in range(2, int(n_max**0.5) + 1):
        if spf[i] == i:
            for j in range(i * i, n_max + 1, i):
                if spf[j] == j:
                    spf[j] = i
    return spf


# --------------------------------------------------------------- Hecke roots

@dataclass(frozen=True)
class HeckeRoots:
    """Roots of x^2 - a_p x + p: alpha the unit, beta of valuation one."""
    ap: int
    alpha: Padic
    beta: Padic
    p: int
    prec: int


def hecke_roots(curve, p, prec):
    """Hensel-lift the unit root of x^2 - a_p x + p; beta = a_p - alpha.

    The root is lifted one digit past ``prec`` so that beta's unit part
    (beta has valuation one) also carries ``prec`` correct digits.
    """
    curve.check_good_ordinary(p)
    ap = curve.ap(p)
    deep = prec + 1
    r = ap % p  # unit root mod p: x(x - a_p) ≡ -p ≡ 0, unit branch x ≡ a_p
    k = 1
    while k < deep:
        k = min(2 * k, deep)
        m = p**k
        f = (r * r - ap * r + p) % m
        df = (2 * r - ap) % m
        r = (r - f * pow(df, -1, m)) % m
    alpha = Padic(p, 0, r % p**prec, prec)
    beta_lift = (ap - r) % p**deep
    assert beta_lift % p == 0 and beta_lift % (p * p) != 0
    beta = Padic(p, 1, beta_lift // p, prec)
    assert (alpha * beta).congruent(Padic.from_int(p, p, prec))
    return HeckeRoots(ap=ap, alpha=alpha, beta=beta, p=p, prec=prec)


# ----------------------------------------------------------- formal group

class FormalGroup:
    """Formal-group expansions at infinity in the parameter t = -x/y.

    Exact rational series:  x(t), y(t), the unit differential
    omega = (dx/(2y + a1 x + a3)) = w(t) dt, the logarithm lam(t) = ∫ w,
    and its reversion exp(s).  Series are extended lazily.
    """

    def __init__(self, curve, length=24):
        self.curve = curve
        self._build(length)

    def _build(self, L):
        self.L = L
        c = self.curve
        a1, a2, a3, a4, a6 = (Fraction(c.a1), Fraction(c.a2), Fraction(c.a3),
                              Fraction(c.a4), Fraction(c.a6))
        # w(t) = t^3(1 + ...) solving w = t^3 + a1 t w + a2 t^2 w + a3 w^2
        #                                + a4 t w^2 + a6 w^3
        w = [Fraction(0)] * (L + 1)
        if L >= 3:
            w[3] = Fraction(1)
        for _ in range(L):
            w2 = _ser_mul(w, w, L)
            w3 = _ser_mul(w2, w, L)
            new = [Fraction(0)] * (L + 1)
            if L >= 3:
                new[3] = Fraction(1)
            for i in range(L + 1):
                acc = new[i]
                if i >= 1:
                    acc += a1 * w[i - 1]
                if i >= 2:
                    acc += a2 * w[i - 2]
                acc += a3 * w2[i]
                if i >= 1:
                    acc += a4 * w2[i - 1]
                acc += a6 * w3[i]
                new[i] = acc
            if new == w:
                break
            w = new
        self.w = w
        # x = t/w - laurent: x(t) = t^{-2}(1 + ...); store t^2*x as power series
        t_over_w = _ser_div_t3(w, L)          # t^3 / w(t): power series, const 1
        self.x_t2 = t_over_w                  # t^2 * x(t)
        self.y_t3 = [-cc for cc in t_over_w]  # t^3 * y(t) = -t^3/w
        # omega = w'(t)-free form: omega = dx/(2y + a1 x + a3)
        dx = _ser_diff_laurent2(self.x_t2, L)   # t^3 * x'(t)
        den = self._denominator_series(L)       # t^3 * (2y + a1 x + a3)
        self.omega = _ser_div(dx, den, L)       # power series, const term 1
        self.log = _ser_integrate(self.omega, L)
        self.exp = _ser_reversion(self.log, L)

    def _denominator_series(self, L):
        # t^3 * (2y + a1 x + a3) = 2(t^3 y) + a1 t (t^2 x) + a3 t^3
        c = self.curve
        out = [Fraction(2) * v for v in self.y_t3]
        for i in range(1, L + 1):
            out[i] += c.a1 * self.x_t2[i - 1]
        if L >= 3:
            out[3] += Fraction(c.a3)
        return out

    def ensure_length(self, L):
        if L > self.L:
            self._build(L)

    def t_of_point(self, P):
        return -P.x / P.y

    def eval_log(self, t: Fraction, p, abs_prec):
        """lam(t) mod p^abs_prec for v_p(t) >= 1, as a Padic."""
        return self._eval_series(self.log, t, p, abs_prec)

    def eval_exp(self, s_res, p, abs_prec):
        """exp-series at a residue s mod p^abs_prec with v_p(s) >= 1."""
        return self._eval_series_res(self.exp, s_res, p, abs_prec)

    def _needed_length(self, p, abs_prec):
        # term c_n t^n with v(t)>=1 and v(c_n) >= -log_p(n): safe cutoff
        L = abs_prec + 1
        while L - math.log(L, p) < abs_prec + 1:
            L += 1
        return L

    def _eval_series(self, ser, t: Fraction, p, abs_prec):
        if _frac_vp(t, p) < 1:
            raise PadicError("formal series need v_p(t) >= 1")
        L = self._needed_length(p, abs_prec)
        self.ensure_length(L)
        head = _denom_headroom(ser, p, L)
        t_res = _frac_residue(t, p, abs_prec + head)
        return self._poly_eval(ser, t_res, p, abs_prec, L)

    def _eval_series_res(self, ser, s_res, p, abs_prec):
        L = self._needed_length(p, abs_prec)
        self.ensure_length(L)
        return self._poly_eval(ser, s_res, p, abs_prec, L)

    def _poly_eval(self, ser, t_res, p, abs_prec, L):
        """sum_{n<=L} c_n t^n mod p^abs_prec; needs v_p(c_n t^n) >= 0."""
        q = p**abs_prec
        total = 0
        for n in range(0, min(L, len(ser) - 1) + 1):
            c = ser[n]
            if c == 0:
                continue
            cd = c.denominator
            vd = _vp(cd, p) if cd % p == 0 else 0
            big = q * p**vd
            cres = c.numerator * pow(cd // p**vd, -1, big) % big
            term = cres * pow(t_res, n, big) % big
            if vd:
                if term % p**vd != 0:
                    raise ArithmeticError("series term below working precision")
                term //= p**vd
            total = (total + term) % q
        return Padic._from_residue(p, total, abs_prec)


def _denom_headroom(ser, p, L):
    return max((_vp(c.denominator, p) if c.denominator % p == 0 else 0)
               for c in ser[:L + 1]) if ser else 0


def _frac_vp(x: Fraction, p):
    if x == 0:
        raise ValueError("vp(0)")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _frac_residue(x: Fraction, p, n):
    d = x.denominator
    if d % p == 0:
        raise PadicError("negative valuation residue")
    return x.numerator * pow(d, -1, p**n) % p**n


def _ser_mul(a, b, L):
    out = [Fraction(0)] * (L + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > L:
            continue
        for j, bj in enumerate(b):
            if i + j > L:
                break
            if bj:
                out[i + j] += ai * bj
    return out


def _ser_div_t3(w, L):
    """t^3 / w(t) where w = t^3(1 + u): returns 1/(1+u) as power series."""
    u = [Fraction(0)] * (L + 1)
    for i in range(3, min(len(w), L + 4)):
        if i - 3 <= L:
            u[i - 3] = w[i]
    assert u[0] == 1
    inv = [Fraction(0)] * (L + 1)
    inv[0] = Fraction(1)
    for n in range(1, L + 1):
        inv[n] = -sum(u[k] * inv[n - k] for k in range(1, n + 1))
    return inv


def _ser_div(a, b, L):
    assert b[0] != 0
    out = [Fraction(0)] * (L + 1)
    binv0 = 1 / b[0]
    for n in range(L + 1):
        out[n] = (a[n] - sum(b[k] * out[n - k] for k in range(1, n + 1))) * binv0
    return out


def _ser_diff_laurent2(x_t2, L):
    """Given s(t) = t^2 x(t), return t^3 x'(t) = t s'(t) - 2 s(t)."""
    out = [Fraction(0)] * (L + 1)
    for n in range(L + 1):
        out[n] = (n - 2) * x_t2[n]
    return out


def _ser_integrate(a, L):
    out = [Fraction(0)] * (L + 2)
    for n in range(min(L, len(a) - 1) + 1):
        out[n + 1] = a[n] / (n + 1)
    return out[:L + 2]


def _ser_reversion(lam, L):
    """Series s with lam(exp(s)) = s, lam = t + O(t^2), by Newton iteration."""
    exp = [Fraction(0)] * (L + 2)
    exp[1] = Fraction(1)
    for n in range(2, L + 2):
        # determine exp[n] from lam(exp)(s) = s coefficient-wise
        comp = _compose_truncated(lam, exp, n)
        exp[n] -= comp[n]
    return exp


def _compose_truncated(outer, inner, n):
    """(outer o inner)(s) mod s^{n+1}; inner(0) = 0."""
    out = [Fraction(0)] * (n + 1)
    power = [Fraction(0)] * (n + 1)
    power[0] = Fraction(1)
    for k in range(1, min(len(outer), n + 1)):
        power = _ser_mul(power, inner, n)
        if outer[k]:
            for i in range(n + 1):
                out[i] += outer[k] * power[i]
    return out


def formal_group_log(curve, P, p, prec, roots=None):
    """log_omega(P): the formal logarithm pulled back from the unit
    differential, extended to all of E(Q_p)-rational points by
    (1/n) * lam(t(nP)) with n chosen so nP lies in the formal group.

    Torsion points map to exact zero.
    """
    curve.check_p_minimal(p)
    if curve.disc % p == 0:
        raise BadReductionError(f"bad reduction at {p}")
    if P is INFINITY or curve.is_torsion(P):
        return Padic.zero(p)
    n0 = curve.count_points(p)
    Q = curve.mul(n0, P)
    n = n0
    # ensure v(t) >= 1: automatic once reduction is trivial, but x-denominator
    # can still be a unit for small points; scale by p until in range
    while Q is INFINITY or _frac_vp(-Q.x / Q.y, p) < 1:
        Q = curve.mul(p, Q)
        n *= p
        if n > n0 * p**3:
            raise ArithmeticError("could not reach the formal group")
    fg = _formal_group_cache(curve)
    vn = _vp(n, p) if n % p == 0 else 0
    abs_prec = prec + vn
    lam = fg.eval_log(fg.t_of_point(Q), p, abs_prec)
    return lam / Padic.from_int(n, p, abs_prec)


_FG_CACHE: dict = {}


def _formal_group_cache(curve) -> FormalGroup:
    key = curve.key()
    if key not in _FG_CACHE:
        _FG_CACHE[key] = FormalGroup(curve)
    return _FG_CACHE[key]


def search_points(curve, height_bound):
    """All affine rational points with x = a/b^2, |a| <= bound^2, b <= bound."""
    out = []
    for b in range(1, height_bound + 1):
        for a in range(-height_bound**2, height_bound**2 + 1):
            if math.gcd(a, b) != 1:
                continue
            x = Fraction(a, b * b)
            ys = _solve_y(curve, x)
            for y in ys:
                out.append(Point(x, y))
    return out


def _solve_y(curve, x):
    # y^2 + (a1 x + a3) y - (x^3 + a2 x^2 + a4 x + a6) = 0
    bq = curve.a1 * x + curve.a3
    cq = -(x**3 + curve.a2 * x * x + curve.a4 * x + curve.a6)
    disc = bq * bq - 4 * cq
    if disc < 0:
        return []
    r = _frac_sqrt(disc)
    if r is None:
        return []
    if r == 0:
        return [(-bq) / 2]
    return [(-bq + r) / 2, (-bq - r) / 2]


def _frac_sqrt(q: Fraction):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def search_generator(curve, height_bound=12):
    """Smallest-naive-height non-torsion point found by exhaustive search,
    or None.  The caller is responsible for believing the rank is one.

    Ties break deterministically: smaller |x| numerator first, non-negative
    numerator first, then larger y, so e.g. (0,0) beats (-1,0).
    """
    pts = search_points(curve, height_bound)
    pts.sort(key=lambda P: (max(abs(P.x.numerator), P.x.denominator),
                            abs(P.x.numerator), P.x.numerator < 0, -P.y))
    for P in pts:
        if not curve.is_torsion(P):
            return P
    return None


def point_from_log(curve, t: Padic, p, prec, height_bound=40, roots=None):
    """Invert the extended logarithm: a rational point Q (possibly a small
    multiple of the minimal one) with log_omega(Q) = ±t, or None.

    For each divisor c of exponent(E~(F_p)), scaled by p to reach the formal
    domain, the formal exponential gives the x-coordinate of c*Q p-adically;
    rational reconstruction plus exact substitution then certifies a point.
    Returned point index (the c that worked) is reported alongside.
    """
    if t.is_zero():
        raise PadicError("point_from_log needs a nonzero logarithm")
    curve.check_p_minimal(p)
    fg = _formal_group_cache(curve)
    n0 = curve.count_points(p)
    exponent = _group_exponent(curve, p, n0)
    divisors = sorted({d for d in range(1, exponent + 1) if exponent % d == 0})
    m_avail = t.abs_prec()
    for c0 in divisors:
        for e in range(0, 3):
            c = c0 * p**e
            s = t * Padic.from_int(c, p, t.prec)
            if s.is_zero() or s.valuation() < 1:
                continue
            cand = _reconstruct_x_from_formal(curve, fg, s, p, m_avail, height_bound)
            if cand is not None:
                Q, _x = cand
                if not curve.is_torsion(Q):
                    return Q, c
            break  # larger e only shrinks usable precision
    return None


def _group_exponent(curve, p, n0):
    """Exponent of E~(F_p) = lcm of the orders of all points."""
    pts = [INFINITY]
    a1, a2, a3, a4, a6 = curve.a1, curve.a2, curve.a3, curve.a4, curve.a6
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % p == 0:
                pts.append((x, y))
    exp = 1
    for P in pts:
        if P is INFINITY:
            continue
        exp = math.lcm(exp, _order_mod_p(curve, P, p, n0))
    return exp


def _order_mod_p(curve, P, p, n0):
    for d in sorted(d for d in range(1, n0 + 1) if n0 % d == 0):
        if _mul_mod_p(curve, d, P, p) is INFINITY:
            return d
    raise ArithmeticError("order not dividing group size: counting bug")


def _mul_mod_p(curve, n, P, p):
    R = INFINITY
    Q = P
    while n:
        if n & 1:
            R = _add_mod_p(curve, R, Q, p)
        n >>= 1
        if n:
            Q = _add_mod_p(curve, Q, Q, p)
    return R


def _add_mod_p(curve, P, Q, p):
    if P is INFINITY:
        return Q
    if Q is INFINITY:
        return P
    a1, a2, a3, a4 = curve.a1, curve.a2, curve.a3, curve.a4
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and (y1 + y2 + a1 * x2 + curve.a3) % p == 0:
        return INFINITY
    if x1 == x2:
        num = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) % p
        den = (2 * y1 + a1 * x1 + curve.a3) % p
    else:
        num = (y2 - y1) % p
        den = (x2 - x1) % p
    lam = num * pow(den, -1, p) % p
    x3 = (lam * lam + a1 * lam - a2 - x1 - x2) % p
    y3 = (-(lam + a1) * x3 - (y1 - lam * x1) - curve.a3) % p
    return (x3, y3)


def _reconstruct_x_from_formal(curve, fg, s: Padic, p, m_avail, height_bound):
    """x-coordinate of the formal point exp(s), reconstructed and certified."""
    abs_prec = min(m_avail, s.abs_prec())
    t_res = fg.eval_exp(s.residue(abs_prec), p, abs_prec)
    if t_res.is_zero():
        return None
    # x(t) = (t^2 x)(t) / t^2
    x_val = fg._eval_series_res(fg.x_t2, t_res.residue(abs_prec), p, abs_prec)
    x_val = x_val / (t_res * t_res)
    bound = height_bound**2
    cap = math.isqrt(p**x_val.abs_prec() - 1)
    num_bound = den_bound = min(bound, max(1, cap - 1))
    try:
        xq = rational_reconstruct(x_val, num_bound, den_bound)
    except PadicError:
        return None
    if xq is None:
        return None
    for y in _solve_y(curve, xq):
        Q = Point(xq, y)
        if curve.is_on_curve(Q):
            return Q, xq
    return None
