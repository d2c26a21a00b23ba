"""Capped relative-precision arithmetic in Q_p.

Every value carries (valuation, unit, relative precision).  Arithmetic never
claims more digits than the inputs justify: multiplication and division keep
the minimum relative precision, addition converts to absolute precision and
eats whatever cancellation destroys.  Exact zero is a separate state from
"zero to the known precision"; operations that test vanishing must say which
of the two they assert.

The logarithm uses the Iwasawa branch (log p = 0).  Square roots pick the
representative whose unit part reduces into {1, ..., (p-1)/2} mod p.
"""

from __future__ import annotations

import math
from fractions import Fraction


class PrecisionError(ArithmeticError):
    """An operation would need more digits than its inputs carry."""


class PadicError(ValueError):
    """Invalid input for a p-adic operation (wrong valuation, non-residue, ...)."""


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class Padic:
    """An element of Q_p with capped relative precision.

    State is one of:
      * exact zero              -- absorbs +, annihilates *;
      * approximate zero O(p^n) -- ``unit is None``, ``val = n``, ``prec = 0``;
      * regular                 -- ``unit`` invertible mod p^prec, value
                                   p^val * unit known mod p^(val+prec).
    """

    __slots__ = ("p", "val", "unit", "prec", "exact")

    def __init__(self, p, val=0, unit=None, prec=0, exact=False):
        if p < 3 or p % 2 == 0:
            raise PadicError("prime must be odd (p=2 unsupported)")
        self.p = p
        self.exact = bool(exact)
        if self.exact:
            self.val = 0
            self.unit = None
            self.prec = 0
            return
        self.val = int(val)
        self.prec = int(prec)
        if unit is None:
            self.unit = None
            self.prec = 0
        else:
            unit = int(unit) % p ** max(prec, 1)
            if prec < 1:
                raise PadicError("regular value needs prec >= 1")
            if unit % p == 0:
                raise PadicError("unit part not invertible mod p")
            self.unit = unit

    # ----- constructors -------------------------------------------------

    @classmethod
    def zero(cls, p):
        return cls(p, exact=True)

    @classmethod
    def unknown(cls, p, abs_prec):
        """0 + O(p^abs_prec): all digits below p^abs_prec unknown."""
        return cls(p, val=abs_prec, unit=None, prec=0)

    @classmethod
    def from_int(cls, n, p, prec):
        if n == 0:
            return cls.zero(p)
        v = _vp(n, p)
        return cls(p, v, n // p**v, prec)

    @classmethod
    def from_rational(cls, q, p, prec):
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        num, den = q.numerator, q.denominator
        v = 0
        if num % p == 0:
            v = _vp(num, p)
            num //= p**v
        if den % p == 0:
            w = _vp(den, p)
            den //= p**w
            v -= w
        u = num * pow(den, -1, p**prec) % p**prec
        return cls(p, v, u, prec)

    # ----- state queries ------------------------------------------------

    def is_exact_zero(self):
        return self.exact

    def is_zero(self):
        """True when no nonzero digit is known (exact or approximate zero)."""
        return self.exact or self.unit is None

    def abs_prec(self):
        """Exponent n: the value is known mod p^n.  Infinite for exact zero."""
        if self.exact:
            return math.inf
        return self.val + self.prec

    def valuation(self):
        if self.exact:
            return math.inf
        if self.unit is None:
            raise PrecisionError(
                f"valuation of O({self.p}^{self.val}) not determined")
        return self.val

    def lift(self):
        """The integer p^val * unit in [0, p^(val+prec)), for val >= 0."""
        if self.is_zero():
            return 0
        if self.val < 0:
            raise PadicError("lift needs non-negative valuation")
        return self.unit * self.p**self.val

    def residue(self, n):
        """Value mod p^n as an integer in [0, p^n); requires abs_prec >= n."""
        if self.exact:
            return 0
        if self.abs_prec() < n:
            raise PrecisionError(f"known only mod {self.p}^{self.abs_prec()}")
        if self.unit is None or self.val >= n:
            return 0
        if self.val < 0:
            raise PadicError("negative valuation has no residue mod p^n")
        return self.unit * self.p**self.val % self.p**n

    # ----- arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Padic):
            if other.p != self.p:
                raise PadicError("mixed primes")
            return other
        if isinstance(other, (int, Fraction)):
            prec = self.prec if self.prec else DEFAULT_PREC
            return Padic.from_rational(other, self.p, prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.exact:
            return other
        if other.exact:
            return self
        shift = min(self.val, other.val, 0)
        a, b = self.shift(-shift), other.shift(-shift)
        n = min(a.abs_prec(), b.abs_prec())
        if n <= 0:
            return Padic.unknown(self.p, n + shift)
        r = (a._residue_nonneg(n) + b._residue_nonneg(n)) % self.p**n
        return Padic._from_residue(self.p, r, n).shift(shift)

    def _residue_nonneg(self, n):
        if self.unit is None or self.val >= n:
            return 0
        return self.unit * self.p**self.val % self.p**n

    @classmethod
    def _from_residue(cls, p, r, n):
        """Value known to be r mod p^n."""
        if n <= 0:
            raise PrecisionError("no digits survive cancellation")
        r %= p**n
        if r == 0:
            return cls.unknown(p, n)
        v = _vp(r, p)
        return cls(p, v, r // p**v, n - v)

    def __neg__(self):
        if self.exact:
            return self
        if self.unit is None:
            return self
        return Padic(self.p, self.val, -self.unit % self.p**self.prec, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    __radd__ = __add__

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.exact or other.exact:
            return Padic.zero(self.p)
        if self.unit is None or other.unit is None:
            # O(p^a) * (p^v u + O(p^b)) = O(p^(a+v)) (use the sharper bound)
            if self.unit is None and other.unit is None:
                return Padic.unknown(self.p, self.val + other.val)
            known, unknown = (self, other) if self.unit is not None else (other, self)
            return Padic.unknown(self.p, known.val + unknown.val)
        prec = min(self.prec, other.prec)
        u = self.unit * other.unit % self.p**prec
        return Padic(self.p, self.val + other.val, u, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.exact:
            raise ZeroDivisionError("division by exact p-adic zero")
        if other.unit is None:
            raise PrecisionError("division by a value indistinguishable from 0")
        if self.exact:
            return Padic.zero(self.p)
        if self.unit is None:
            return Padic.unknown(self.p, self.val - other.val)
        prec = min(self.prec, other.prec)
        u = self.unit * pow(other.unit, -1, self.p**prec) % self.p**prec
        return Padic(self.p, self.val - other.val, u, prec)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return other / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return Padic.from_int(1, self.p, self.prec if self.prec else DEFAULT_PREC)
        if n < 0:
            return 1 / self**(-n)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def shift(self, k):
        """Multiply by p^k (exact rescale)."""
        if self.exact:
            return self
        if self.unit is None:
            return Padic.unknown(self.p, self.val + k)
        return Padic(self.p, self.val + k, self.unit, self.prec)

    def with_prec(self, prec):
        """Truncate to at most ``prec`` relative digits."""
        if self.exact or self.unit is None:
            return self
        prec = min(prec, self.prec)
        if prec < 1:
            return Padic.unknown(self.p, self.val)
        return Padic(self.p, self.val, self.unit % self.p**prec, prec)

    # ----- comparisons ---------------------------------------------------

    def congruent(self, other, n=None):
        """Agreement mod p^n (default: the common known precision)."""
        other = self._coerce(other)
        d = self - other
        if d.exact:
            return True
        if n is None:
            return d.unit is None
        if d.unit is None:
            return d.val >= n
        return d.val >= n

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except PadicError:
            return False
        if other is NotImplemented:
            return NotImplemented
        if self.exact and other.exact:
            return True
        return (self.exact == other.exact and self.val == other.val
                and self.prec == other.prec and self.unit == other.unit)

    def __hash__(self):
        return hash((self.p, self.val, self.unit, self.prec, self.exact))

    # ----- rendering ------------------------------------------------------

    def __repr__(self):
        return str(self)

    def __str__(self):
        if self.exact:
            return "0"
        p = self.p
        if self.unit is None:
            return f"O({p}^{self.val})"
        digits = []
        u = self.unit
        for i in range(self.prec):
            u, d = divmod(u, p)
            digits.append(d)
        terms = []
        for i, d in enumerate(digits):
            k = self.val + i
            if k == 0:
                terms.append(f"{d}")
            elif k == 1:
                terms.append(f"{d}*{p}")
            else:
                terms.append(f"{d}*{p}^{k}")
        return " + ".join(terms) + f" + O({p}^{self.val + self.prec})"


DEFAULT_PREC = 20


def teichmuller(a, p, prec):
    """The (p-1)-th root of unity congruent to a mod p, to ``prec`` digits.

    Computed by iterating x -> x^p, which converges quadratically-in-digits
    (x^p agrees with the fixed point one digit deeper each pass).
    """
    a = int(a)
    if a % p == 0:
        raise PadicError("a must be coprime to p")
    if prec < 1:
        raise PadicError("prec must be >= 1")
    q = p**prec
    x = a % q
    for _ in range(prec + 1):
        y = pow(x, p, q)
        if y == x:
            break
        x = y
    return Padic(p, 0, x, prec)


def teichmuller_int(a, p, prec):
    """Integer lift of teichmuller(a) mod p^prec (hot-loop helper)."""
    q = p**prec
    x = a % q
    if x % p == 0:
        raise PadicError("a must be coprime to p")
    for _ in range(prec + 1):
        y = pow(x, p, q)
        if y == x:
            break
        x = y
    return x


def _log_one_units(x_res, p, n):
    """log(1+x) mod p^n for x ≡ x_res mod p^n with v_p(x) >= 1."""
    q = p**n
    # term x^k/k has valuation >= k - log_p(k); k_max below makes that >= n
    kmax = n + 1
    while kmax - math.floor(math.log(kmax, p)) < n + 1:
        kmax += 1
    total = 0
    xp = 1
    for k in range(1, kmax + 1):
        xp = xp * x_res % (q * p**_safe_vp(k, p))
        term_num = xp if k % 2 == 1 else -xp
        vk = _safe_vp(k, p)
        # divide exactly by p^vk, then by the unit part of k
        t = term_num // p**vk if term_num % p**vk == 0 else None
        if t is None:
            # x^k has valuation >= k >= vk+1, so exact division must succeed
            raise ArithmeticError("internal: inexact division in log series")
        t = t * pow(k // p**vk, -1, q) % q
        total = (total + t) % q
    return total


def _safe_vp(k, p):
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v


def padic_log(u):
    """Iwasawa logarithm of a unit: log(u) := log(u / teichmuller(u)).

    Fixing log p = 0 extends this to Q_p^x, but callers here must pass units;
    a nonzero valuation raises PadicError.
    """
    if u.is_zero():
        raise PadicError("log of zero")
    if u.valuation() != 0:
        raise PadicError("padic_log expects a unit (Iwasawa branch handled via Teichmuller division only)")
    p, n = u.p, u.prec
    w = teichmuller_int(u.unit % p, p, n)
    one_unit = u.unit * pow(w, -1, p**n) % p**n
    r = _log_one_units(one_unit - 1, p, n)
    return Padic._from_residue(p, r, n)


def padic_exp(t):
    """exp(t) for v_p(t) >= 1 (odd p), inverse to padic_log on 1 + pZ_p."""
    if t.is_exact_zero():
        return Padic(t.p, 0, 1, DEFAULT_PREC)
    if t.is_zero():
        return Padic(t.p, 0, 1, t.val)
    if t.valuation() < 1:
        raise PadicError("padic_exp diverges for valuation < 1")
    p = t.p
    n = t.abs_prec()
    q = p**n
    x = t.residue(n)
    # term x^k/k! has valuation >= k - (k-1)/(p-1) > k(p-2)/(p-1)
    kmax = 1
    while kmax * (p - 2) // (p - 1) < n + 1:
        kmax += 1
    total = 1
    xp = 1
    fact_unit_inv = 1
    fact_v = 0
    for k in range(1, kmax + 1):
        fact_v += _safe_vp(k, p)
        fact_unit_inv = fact_unit_inv * pow(k // p**_safe_vp(k, p), -1, q) % q
        xp = xp * x % (q * p**fact_v)
        if xp % p**fact_v != 0:
            raise ArithmeticError("internal: inexact division in exp series")
        total = (total + xp // p**fact_v * fact_unit_inv) % q
    return Padic._from_residue(p, total, n)


def padic_sqrt(x):
    """Canonical square root, or None when no root exists in Q_p.

    Requires even valuation and a quadratic-residue unit part; the returned
    root r has r mod p in {1, ..., (p-1)/2}.  Exact zero maps to exact zero.
    """
    if x.is_exact_zero():
        return x
    if x.is_zero():
        raise PrecisionError("cannot take sqrt of a value indistinguishable from 0")
    if x.val % 2 != 0:
        return None
    p, n = x.p, x.prec
    u0 = x.unit % p
    if pow(u0, (p - 1) // 2, p) != 1:
        return None
    # root mod p by exhaustive search (desk-scale primes), then Newton lift
    r = next(r for r in range(1, p) if r * r % p == u0)
    q = p**n
    k = 1
    while k < n:
        k = min(2 * k, n)
        m = p**k
        r = (r + x.unit % m * pow(r, -1, m)) * pow(2, -1, m) % m
    if r % p > (p - 1) // 2:
        r = q - r
    return Padic(p, x.val // 2, r % q, n)


def rational_reconstruct(x, num_bound, den_bound):
    """The unique a/b with |a| <= num_bound, 0 < b <= den_bound, p ∤ b and
    a/b ≡ x mod p^(abs prec); None when no such fraction exists.

    Candidates live on the lattice line found by the extended Euclidean
    algorithm on (p^n, x), stopping at the first remainder <= num_bound;
    the congruence is re-verified exactly before returning.  The bounds must
    satisfy num_bound * den_bound < p^prec or the answer is not unique.
    """
    if num_bound < 1 or den_bound < 1:
        raise PadicError("bounds must be positive")
    if x.is_exact_zero():
        return Fraction(0)
    p = x.p
    if x.unit is None:
        # zero to available precision: 0 is the unique candidate if bounds ok
        if num_bound * den_bound < p**x.val:
            return Fraction(0)
        raise PadicError("uniqueness bound violated")
    if x.val < 0:
        rec = rational_reconstruct(x.shift(-x.val), num_bound, den_bound)
        return None if rec is None else rec / p**(-x.val)
    n = x.abs_prec()
    m = p**n
    if num_bound * den_bound >= m:
        raise PadicError("uniqueness bound violated: need num*den < p^prec")
    r0, r1 = m, x.residue(n)
    s0, s1 = 0, 1
    while r1 > num_bound:
        qq = r0 // r1
        r0, r1 = r1, r0 - qq * r1
        s0, s1 = s1, s0 - qq * s1
    a, b = r1, s1
    if b == 0:
        return None
    if b < 0:
        a, b = -a, -b
    if b > den_bound or math.gcd(a, b) != 1 or b % p == 0:
        return None
    if (a - b * x.residue(n)) % m != 0:
        return None
    return Fraction(a, b)
