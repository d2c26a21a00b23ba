"""Exact weight-2 modular symbols for Gamma_0(N).

Symbols are stored as their value maps on P^1(Z/N) labels, subject to the
two- and three-term Manin relations; everything here is exact rational
arithmetic (no p-adics), so the relations hold with zero tolerance and the
p-adic reduction downstream starts from honest rationals.

The eigensymbol attached to a curve is pinned by its Hecke eigenvalues and
sign, scaled to integer values of content one, and calibrated against an
archimedean twisted L-value so that value * Omega^(sign) is the true period
integral.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .archimedean import (
    imaginary_period,
    l_value_twisted,
    real_period,
    reconstruct_rational,
    _kronecker,
)
from .padics import Padic, PadicError, padic_sqrt, teichmuller_int

SYMBOL_FORMAT_VERSION = 1


class IsolationFailure(RuntimeError):
    pass


class CalibrationFailure(RuntimeError):
    pass


# ------------------------------------------------------------------ P^1(Z/N)

def _gcdex(a, b):
    if b == 0:
        return (1, 0, a) if a >= 0 else (-1, 0, -a)
    x, y, g = _gcdex(b, a % b)
    return y, x - y * (a // b), g


def _lift_to_unit(n, d, a):
    """Lift a unit a mod d (d | n) to a unit mod n."""
    u, v = 1, n
    g = math.gcd(v, d)
    while g > 1:
        u *= g
        v //= g
        g = math.gcd(v, g)
    x, y, _ = _gcdex(u, v)
    return (u * x + a * y * v) % n


class P1List:
    """Representatives and index lookup for P^1(Z/N)."""

    def __init__(self, N):
        self.N = N
        seen = {}
        reps = []
        for c in range(N):
            for d in range(N):
                if math.gcd(math.gcd(c, d), N) != 1:
                    continue
                r = self.normalize(c, d)
                if r not in seen:
                    seen[r] = len(reps)
                    reps.append(r)
        self.reps = reps
        self._index = seen
        # dense lookup table for vectorized evaluation: -1 marks non-primitive
        table = np.full(N * N, -1, dtype=np.int64)
        for c in range(N):
            for d in range(N):
                if math.gcd(math.gcd(c, d), N) == 1:
                    table[c * N + d] = seen[self.normalize(c, d)]
        self.table = table

    def __len__(self):
        return len(self.reps)

    def normalize(self, c, d):
        N = self.N
        if N == 1:
            return (0, 0)
        c %= N
        d %= N
        if c == 0:
            if math.gcd(d, N) != 1:
                raise ValueError("not a projective point")
            return (0, 1)
        _, s, g = _gcdex(N, c)
        if math.gcd(g, d) > 1:
            raise ValueError("not a projective point")
        s = _lift_to_unit(N, N // g, s % N)
        c, d = g, (s * d) % N
        if g == 1:
            return (1, d)
        d = min((d * t) % N for t in range(1, N, N // g) if math.gcd(N, t) == 1)
        return (g, d)

    def index(self, c, d):
        return self._index[self.normalize(c, d)]


# ---------------------------------------------------------------- the space

class ManinSpace:
    """Weight-2 boundary-inclusive modular symbols for Gamma_0(N), presented
    as rational value maps on P^1(Z/N) with the sigma and tau relations."""

    def __init__(self, N):
        self.N = N
        self.p1 = P1List(N)
        n = len(self.p1)
        expected = N * math.prod(
            Fraction(ell + 1, ell) for ell in _prime_factors(N))
        assert n == expected, f"|P^1| = {n} != {expected}"
        rows = []
        seen = set()
        for i, (c, d) in enumerate(self.p1.reps):
            j = self.p1.index(d, -c)                      # x * sigma
            if (min(i, j), max(i, j), "s") not in seen:
                seen.add((min(i, j), max(i, j), "s"))
                r = [Fraction(0)] * n
                r[i] += 1
                r[j] += 1
                rows.append(r)
            k = self.p1.index(d, -c - d)                  # x * tau
            k2 = self.p1.index(-c - d, c)                 # x * tau^2
            key = tuple(sorted((i, k, k2))) + ("t",)
            if key not in seen:
                seen.add(key)
                r = [Fraction(0)] * n
                r[i] += 1
                r[k] += 1
                r[k2] += 1
                rows.append(r)
        self.basis, self.free = _kernel_basis(rows, n)
        self.dim = len(self.basis)

    def coordinates(self, vec):
        """Coordinates of a relation-satisfying value vector in the basis."""
        return [vec[i] for i in self.free]

    def from_coordinates(self, coords):
        n = len(self.p1)
        out = [Fraction(0)] * n
        for c, bvec in zip(coords, self.basis):
            if c:
                for i in range(n):
                    out[i] += c * bvec[i]
        return out

    def satisfies_relations(self, vec):
        p1 = self.p1
        for i, (c, d) in enumerate(p1.reps):
            if vec[i] + vec[p1.index(d, -c)] != 0:
                return False
            if vec[i] + vec[p1.index(d, -c - d)] + vec[p1.index(-c - d, c)] != 0:
                return False
        return True

    # ----- operators --------------------------------------------------------

    def star_matrix(self):
        """The involution (c:d) -> (-c:d) on basis coordinates."""
        return self._operator_matrix(lambda c, d: [(1, (-c) % self.N, d)])

    def hecke_matrix(self, ell):
        """T_ell (or U_ell for ell | N) on basis coordinates, via Heilbronn-
        style right translations of the labels."""
        mats = list(_heilbronn(ell))

        def images(c, d):
            out = []
            for (a, b, cc, dd) in mats:
                c1 = (a * c + cc * d) % self.N
                d1 = (b * c + dd * d) % self.N
                if math.gcd(math.gcd(c1, d1), self.N) == 1:
                    out.append((1, c1, d1))
            return out

        return self._operator_matrix(images)

    def _operator_matrix(self, images):
        """Matrix of phi -> (x -> sum_j coef_j phi(x * h_j)) on basis coords."""
        cols = []
        for bvec in self.basis:
            out = [Fraction(0)] * len(self.p1)
            for i, (c, d) in enumerate(self.p1.reps):
                acc = Fraction(0)
                for (coef, c1, d1) in images(c, d):
                    acc += coef * bvec[self.p1.index(c1, d1)]
                out[i] = acc
            assert self.satisfies_relations(out), "operator left the symbol space"
            cols.append(self.coordinates(out))
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]


def _prime_factors(n):
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


def _kernel_basis(rows, n):
    """Nullspace basis of the relation matrix over Q; returns (basis vectors,
    indices of free coordinates)."""
    m = [row[:] for row in rows]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for i, c in enumerate(pivots):
            vec[c] = -m[i][f]
        basis.append(vec)
    return basis, free


def _heilbronn(ell):
    """Merel's matrix set for T_ell (det ell), as (a, b, c, d) tuples."""
    for a in range(1, ell + 1):
        for d in range((ell + a - 1) // a, ell + 2 - a):
            bc = a * d - ell
            if bc == 0:
                for b in range(a):
                    yield (a, b, 0, d)
                for c in range(1, d):
                    yield (a, 0, c, d)
            else:
                for b in range((bc - 1) // (d - 1) + 1, a):
                    if bc % b == 0:
                        yield (a, b, bc // b, d)


# ------------------------------------------------------------- eigensymbols

@dataclass
class EigenSymbol:
    """The value map of the weight-2 eigensymbol of a rational newform.

    ``values[i]`` is the raw integer value on the i-th P^1 label (content 1);
    ``c_cal`` rescales раw values so that c_cal * value * Omega^(sign) is the
    true period integral.  Evaluation at cusps walks the continued-fraction
    path of the Manin trick.
    """
    level: int
    sign: int
    space: ManinSpace
    values: list
    c_cal: Fraction = None
    curve_key: str = ""

    def value_on_label(self, c, d):
        return self.values[self.space.p1.index(c, d)]

    def evaluate(self, r, calibrated=True):
        """phi{r -> oo} as an exact rational (r = None means the cusp oo)."""
        raw = self._eval_raw(r)
        if calibrated:
            if self.c_cal is None:
                raise CalibrationFailure("symbol has no calibration constant")
            return self.c_cal * raw
        return raw

    def _eval_raw(self, r):
        if r is None:
            return Fraction(0)
        r = Fraction(r)
        total = Fraction(0)
        for c, d in _manin_path_labels(r):
            total += self.value_on_label(c, d)
        return -total

    def evaluate_path(self, r, s, calibrated=True):
        """phi{r -> s} by path additivity."""
        a = self.evaluate(r, calibrated) if r is not None else Fraction(0)
        b = self.evaluate(s, calibrated) if s is not None else Fraction(0)
        return a - b

    def evaluate_batch_mod(self, numerators, denominator, p, width):
        """phi{a/denominator -> oo} * c_cal mod p^width for an int64 array of
        numerators, vectorized over the continued-fraction expansion.

        Returns (int64 array of residues, valuation_shift) where the true
        calibrated values are p^valuation_shift * residues mod p^(width+shift).
        """
        return _batch_eval(self, numerators, denominator, p, width)

    # ----- serialization -------------------------------------------------

    def to_dict(self):
        return {
            "format": SYMBOL_FORMAT_VERSION,
            "level": self.level,
            "sign": self.sign,
            "labels": [list(x) for x in self.space.p1.reps],
            "values": [str(v) for v in self.values],
            "c_cal": str(self.c_cal) if self.c_cal is not None else None,
            "curve": self.curve_key,
        }

    @classmethod
    def from_dict(cls, data, space=None):
        if data.get("format") != SYMBOL_FORMAT_VERSION:
            raise ValueError("stale symbol cache format")
        space = space or ManinSpace(data["level"])
        assert [list(x) for x in space.p1.reps] == data["labels"]
        values = [Fraction(v) for v in data["values"]]
        c_cal = Fraction(data["c_cal"]) if data["c_cal"] else None
        return cls(level=data["level"], sign=data["sign"], space=space,
                   values=values, c_cal=c_cal, curve_key=data.get("curve", ""))


def _manin_path_labels(r: Fraction):
    """Labels (q_k, (-1)^(k-1) q_(k-1)) of the unimodular path {oo -> r}:
    the Manin trick along continued-fraction convergents p_k/q_k."""
    a, b = r.numerator, r.denominator
    quotients = []
    x, y = a, b
    while y:
        q = x // y
        quotients.append(q)
        x, y = y, x - q * y
    q_prev, q_cur = 0, 1            # q_{-1}, q_0
    labels = [(1, 0)]               # k = 0 segment {oo -> c_0}
    sign = 1                        # (-1)^(k-1) at k = 1
    for c in quotients[1:]:
        q_prev, q_cur = q_cur, c * q_cur + q_prev
        labels.append((q_cur, sign * q_prev))
        sign = -sign
    return labels


def eigen_symbol(space, curve, sign=1, max_ops=20):
    """The one-dimensional simultaneous Hecke eigenspace with T_ell
    eigenvalue a_ell(curve) in the sign part, scaled to integer content 1."""
    if curve.N != space.N:
        raise ValueError("curve conductor does not match the space level")
    mats = [space.star_matrix()]
    targets = [Fraction(sign)]
    coords_basis = _eigen_intersection(mats, targets, space.dim)
    ell = 2
    ops = 0
    while len(coords_basis) > 1 and ops < max_ops:
        if curve.N % ell:
            mats.append(space.hecke_matrix(ell))
            targets.append(Fraction(curve.ap(ell)))
            coords_basis = _eigen_intersection(mats, targets, space.dim)
            ops += 1
        ell = _next_prime(ell)
    if len(coords_basis) != 1:
        raise IsolationFailure(
            f"eigenspace dimension {len(coords_basis)} after {ops} Hecke "
            f"operators (oldform collision or wrong level?)")
    vec = space.from_coordinates(coords_basis[0])
    den = math.lcm(*[v.denominator for v in vec if v != 0])
    ints = [v * den for v in vec]
    content = math.gcd(*[int(v) for v in ints if v != 0])
    values = [Fraction(int(v) // content) for v in ints]
    return EigenSymbol(level=space.N, sign=sign, space=space, values=values,
                       curve_key=curve.key())


def _eigen_intersection(mats, targets, dim):
    rows = []
    for M, lam in zip(mats, targets):
        for i in range(dim):
            row = [M[i][j] - (lam if i == j else 0) for j in range(dim)]
            rows.append(row)
    basis, _ = _kernel_basis(rows, dim)
    return basis


def _next_prime(n):
    n += 1
    while any(n % d == 0 for d in range(2, int(n**0.5) + 1)):
        n += 1
    return n


# ------------------------------------------------------------- calibration

FUNDAMENTAL_DISCS_POS = [5, 8, 12, 13, 17, 21, 24, 28, 29, 33, 37, 40, 41,
                         44, 53, 56, 57, 60, 61, 65, 69, 73, 76, 77, 85, 88,
                         89, 92, 93, 97, 101, 104, 105, 109, 113, 120, 124,
                         129, 133, 136, 137, 140, 141, 145, 149, 152, 156,
                         157, 161, 165, 168, 172, 173, 177, 181, 184, 185,
                         188, 193, 197]


def calibrate(symbol, curve, p=None, disc_bound=200):
    """Fix c_cal so that sum_a chi_d(a) phi{a/d} = tau(chi_d) L(E,chi_d,1)/Omega^+.

    An auxiliary positive fundamental discriminant d with nonvanishing twist
    pins the constant; the ratio is a small rational recovered from floats.
    Returns a new EigenSymbol carrying c_cal.
    """
    if symbol.sign != 1:
        return _calibrate_minus(symbol, curve, p=p, disc_bound=disc_bound)
    om = real_period(curve)
    for d in FUNDAMENTAL_DISCS_POS:
        if d > disc_bound:
            break
        if math.gcd(d, curve.N * (p or 1)) != 1:
            continue
        raw = _twisted_sum_raw(symbol, d)
        if raw == 0:
            continue
        lval = l_value_twisted(curve, d)
        if abs(lval.value) < 1e-5:
            continue
        target = lval * (math.sqrt(d) / om.value)
        ratio = reconstruct_rational(
            type(target)(target.value / float(raw), target.err / abs(float(raw))),
            den_bound=10**3)
        check = _cross_check_disc(symbol, curve, d, ratio, om)
        if check:
            sym = EigenSymbol(level=symbol.level, sign=symbol.sign,
                              space=symbol.space, values=symbol.values,
                              c_cal=ratio, curve_key=symbol.curve_key)
            return sym
    raise CalibrationFailure(f"all discriminants <= {disc_bound} gave "
                             f"vanishing or inconsistent twists")


def _cross_check_disc(symbol, curve, d_used, ratio, om):
    """A second discriminant must reproduce the same constant."""
    for d in FUNDAMENTAL_DISCS_POS:
        if d == d_used or math.gcd(d, curve.N) != 1:
            continue
        raw = _twisted_sum_raw(symbol, d)
        if raw == 0:
            continue
        lval = l_value_twisted(curve, d)
        if abs(lval.value) < 1e-5:
            continue
        expect = float(ratio * raw)
        got = lval.value * math.sqrt(d) / om.value
        return abs(expect - got) < 1e-5 * max(1.0, abs(got))
    return True


def _twisted_sum_raw(symbol, d):
    total = Fraction(0)
    for a in range(1, d):
        chi = _kronecker(d, a)
        if chi:
            total += chi * symbol._eval_raw(Fraction(a, d))
    return total


def _calibrate_minus(symbol, curve, p=None, disc_bound=200):
    om = imaginary_period(curve)
    negs = [-3, -4, -7, -8, -11, -15, -19, -20, -23, -24, -31, -35, -39, -40,
            -43, -47, -51, -52, -55, -56, -59, -67, -68, -71, -79, -83, -84]
    for d in negs:
        if abs(d) > disc_bound:
            break
        if math.gcd(abs(d), curve.N * (p or 1)) != 1:
            continue
        raw = Fraction(0)
        for a in range(1, abs(d)):
            chi = _kronecker(d, a)
            if chi:
                raw += chi * symbol._eval_raw(Fraction(a, abs(d)))
        if raw == 0:
            continue
        lval = _l_value_twisted_any(curve, d)
        if abs(lval.value) < 1e-5:
            continue
        target = lval * (math.sqrt(abs(d)) / om.value)
        ratio = reconstruct_rational(
            type(target)(target.value / float(raw), target.err / abs(float(raw))),
            den_bound=10**3)
        return EigenSymbol(level=symbol.level, sign=symbol.sign,
                           space=symbol.space, values=symbol.values,
                           c_cal=ratio, curve_key=symbol.curve_key)
    raise CalibrationFailure("no usable negative discriminant found")


def _l_value_twisted_any(curve, d):
    """L(E, chi_d, 1) for any fundamental discriminant d by the generic
    exponential series (valid when the twisted sign is +1)."""
    N = curve.N * d * d
    n_terms = max(1500, int(25 * math.sqrt(abs(N))))
    an = curve.an_list(n_terms)
    total = 0.0
    c = 2 * math.pi / math.sqrt(abs(N))
    for n in range(1, n_terms + 1):
        if an[n] == 0:
            continue
        chi = _kronecker(d, n)
        if chi:
            total += an[n] * chi / n * math.exp(-c * n)
    from .archimedean import RealScalar
    return RealScalar(2.0 * total, max(2 * math.exp(-c * n_terms) * n_terms, 1e-12))


# ---------------------------------------------------------------- twisting

@dataclass(frozen=True)
class TwistCharacter:
    """A quadratic character given by a fundamental discriminant, or a
    Teichmuller power mod p."""
    kind: str            # "quadratic" | "teichmuller"
    d: int = 1           # fundamental discriminant (quadratic case)
    p: int = 0           # prime (teichmuller case)
    power: int = 0       # omega^power

    @classmethod
    def quadratic(cls, d):
        if not _is_fundamental(d):
            raise ValueError(f"{d} is not a fundamental discriminant")
        return cls(kind="quadratic", d=d)

    @classmethod
    def teichmuller_power(cls, p, power):
        return cls(kind="teichmuller", p=p, power=power % (p - 1))

    @property
    def conductor(self):
        if self.kind == "quadratic":
            return abs(self.d)
        return 1 if self.power == 0 else self.p

    @property
    def parity(self):
        """chi(-1)."""
        if self.kind == "quadratic":
            return 1 if self.d > 0 else -1
        return (-1)**self.power

    def __call__(self, n):
        if self.kind == "quadratic":
            return _kronecker(self.d, n)
        if n % self.p == 0:
            return 0
        return 1 if self.power == 0 else None  # p-adic values via value_padic

    def value_padic(self, n, prec):
        if self.kind != "teichmuller":
            raise ValueError("p-adic values are for Teichmuller characters")
        if n % self.p == 0:
            return Padic.zero(self.p)
        w = teichmuller_int(n, self.p, prec)
        return Padic(self.p, 0, pow(w, self.power, self.p**prec), prec)

    def gauss_sum_squared(self):
        """tau(chi) * tau(chi-bar) = chi(-1) * conductor, exactly."""
        return self.parity * self.conductor

    def gauss_sum_padic(self, prec):
        """tau(chi) as a Padic when chi(-1)*conductor is a p-adic square
        (only then does the Gauss sum live in Q_p); None otherwise."""
        if self.kind != "quadratic":
            raise ValueError("only quadratic Gauss sums are pinned here")
        if self.p == 0:
            raise ValueError("no prime attached")
        return padic_sqrt(Padic.from_int(self.d, self.p, prec))

    def gauss_sum_real(self):
        if self.kind != "quadratic":
            raise ValueError("only quadratic Gauss sums supported")
        if self.d > 0:
            return complex(math.sqrt(self.d), 0.0)
        return complex(0.0, math.sqrt(-self.d))


def _is_fundamental(d):
    if d == 1:
        return True
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n):
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


class TwistedSymbol:
    """phi_chi{r} = sum_(a mod |d|) chi(a) phi{r - a/|d|}: an eigensymbol for
    the twisted eigenvalues a_ell * chi(ell) at level N d^2, represented by
    its value map (no new Manin space is built; oldform collisions at the
    twisted level are avoided by matching eigenvalues directly)."""

    def __init__(self, symbol, chi: TwistCharacter):
        if chi.kind != "quadratic":
            raise ValueError("only quadratic twists act on exact symbols")
        if math.gcd(chi.conductor, getattr(symbol, "newform_level", symbol.level)) != 1:
            raise ValueError("twist conductor must be prime to the newform level")
        self.base = symbol
        self.chi = chi
        self.level = symbol.level * chi.conductor**2
        self.newform_level = getattr(symbol, "newform_level", symbol.level)
        self.sign = symbol.sign * chi.parity
        self.c_cal = symbol.c_cal

    def evaluate(self, r, calibrated=True):
        d = self.chi.conductor
        if d == 1:
            return self.base.evaluate(r, calibrated)
        total = Fraction(0)
        r = Fraction(r) if r is not None else None
        for a in range(1, d):
            c = self.chi(a)
            if c == 0:
                continue
            if r is None:
                total += c * self.base.evaluate(None, calibrated)
            else:
                total += c * self.base.evaluate(r - Fraction(a, d), calibrated)
        return total

    def _eval_raw(self, r):
        d = self.chi.conductor
        total = Fraction(0)
        for a in range(1, d):
            c = self.chi(a)
            if c:
                total += c * self.base._eval_raw(Fraction(r) - Fraction(a, d))
        return total


def twist_symbol(symbol, chi: TwistCharacter):
    return TwistedSymbol(symbol, chi)


# ------------------------------------------------------ vectorized evaluation

def _values_mod(symbol, p, width):
    """(int64 value table mod p^width, valuation shift) for calibrated values."""
    if symbol.c_cal is None:
        raise CalibrationFailure("calibrate the symbol before p-adic work")
    vals = [symbol.c_cal * v for v in symbol.values]
    shift = 0
    den_l = math.lcm(*[v.denominator for v in vals]) if vals else 1
    while den_l % p == 0:
        den_l //= p
        shift -= 1
    q = p**width
    out = np.zeros(len(vals), dtype=np.int64)
    for i, v in enumerate(vals):
        num, den = v.numerator, v.denominator
        vd = 0
        while den % p == 0:
            den //= p
            vd += 1
        scaled = num * p**(-shift - vd) if -shift - vd >= 0 else None
        if scaled is None:
            raise ArithmeticError("inconsistent valuation shift")
        out[i] = scaled * pow(den, -1, q) % q
    return out, shift


def _batch_eval(symbol, numerators, denominator, p, width):
    """Vectorized phi{a_i/denominator -> oo} for int64 a_i, all reduced
    mod p^width (plus a global valuation shift from the calibration).

    Runs the continued-fraction label recursion of _manin_path_labels in
    lockstep across the whole numerator array; entries whose expansion
    terminates early simply stop contributing.
    """
    vals, shift = _values_mod(symbol, p, width)
    N = symbol.level
    q = p**width
    if q > 2**31:
        raise PadicError("width too large for int64 batch arithmetic")
    a = np.mod(np.asarray(numerators, dtype=np.int64), denominator)
    m = int(denominator)
    table = symbol.space.p1.table

    def lookup(c_arr, d_arr):
        idx = table[np.mod(c_arr, N) * N + np.mod(d_arr, N)]
        assert (idx >= 0).all(), "non-primitive label on a CF path"
        return vals[idx]

    # k = 0 label (1, 0) for every entry; then Euclid on (m, a) emits the rest
    total = np.full(a.shape, int(vals[table[1 * N + 0]]), dtype=np.int64)
    q_prev = np.zeros_like(a)       # q_{k-1}
    q_cur = np.ones_like(a)         # q_k
    r_hi = np.full_like(a, m)
    r_lo = a.copy()
    sign = 1                        # (-1)^(k-1) at the step being emitted
    active = r_lo > 0
    while active.any():
        quot = np.zeros_like(a)
        np.floor_divide(r_hi, r_lo, out=quot, where=active)
        r_hi, r_lo = np.where(active, r_lo, r_hi), np.where(active, r_hi - quot * r_lo, r_lo)
        q_prev, q_cur = (np.where(active, q_cur, q_prev),
                         np.where(active, quot * q_cur + q_prev, q_cur))
        contrib = lookup(q_cur, sign * q_prev)
        total = (total + np.where(active, contrib, 0)) % q
        sign = -sign
        active = active & (r_lo > 0)
    return (-total) % q, shift
