"""The slope-zero p-adic L-function as a measure on Z_p^x.

The measure comes from alpha-stabilized Riemann data of the calibrated
eigensymbol: mu(a + p^n Z_p) = alpha^-n phi{a/p^n} - alpha^-(n+1) phi{a/p^(n-1)}.
The distribution relation is an algebraic identity in alpha, so it holds
exactly before p-adic reduction and mod p^M after.

Jets at s = 1 integrate powers of log<x> against the measure by Riemann
sums on the deepest level; a depth-n sum is correct mod p^(n + min-valuation),
which the returned coefficients' precision honestly reflects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .padics import Padic, PadicError, teichmuller_int


class SlopeError(ValueError):
    """The Riemann-sum construction needs the unit root (slope zero)."""


class DepthError(ValueError):
    pass


_CHUNK = 1 << 19


def _log_chunk(nums, p, width_full, winv):
    """log<a> mod p^(width_full - ebuf) for an int64 array a (non-units: 0).

    width_full must satisfy p^width_full < 2^31 to keep int64 arithmetic safe.
    Returns (values, trustworthy width).
    """
    q = p**width_full
    unit_mask = (nums % p) != 0
    one_unit = nums * winv[nums % p] % q
    u = np.where(unit_mask, (one_unit - 1) % q, 0)
    # log(1+u) = sum (-1)^(k+1) u^k / k; v(u) >= 1 so K = width_full + 2 is ample
    K = width_full + 2
    ebuf = max(_vp_int(k, p) for k in range(1, K + 1))
    total = np.zeros(nums.shape, dtype=np.int64)
    upow = np.ones(nums.shape, dtype=np.int64)
    for k in range(1, K + 1):
        upow = upow * u % q
        e = _vp_int(k, p)
        kunit = k // p**e
        term = upow * pow(kunit, -1, q) % q
        if e:
            # u^k has valuation >= k > e: division is exact on true values
            term = term // p**e % (q // p**e)
        if k % 2 == 0:
            term = -term
        total = (total + term) % q
    return total % (q // p**ebuf), width_full - ebuf


def _teich_inv_table(p, width_full):
    q = p**width_full
    winv = np.zeros(p, dtype=np.int64)
    for r in range(1, p):
        winv[r] = pow(teichmuller_int(r, p, width_full), -1, q)
    return winv


def _vp_int(k, p):
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v


@dataclass
class PadicMeasure:
    """Stabilized measure data on Z_p^x intervals.

    ``tables[n]`` (1 <= n <= stored_depth) holds residues r with
    mu(a + p^n Z_p) = p^shift * r[a] mod p^(width + shift).  Deeper levels
    are streamed from the symbol on demand rather than stored.
    """
    p: int
    width: int
    shift: int
    depth: int
    stored_depth: int
    tables: dict
    symbol: object
    alpha: Padic
    growth: int = 0

    def value(self, a, n):
        """mu(a + p^n Z_p) as a Padic."""
        if n < 1 or n > self.depth:
            raise DepthError(f"level {n} outside 1..{self.depth}")
        if a % self.p == 0:
            raise PadicError("only unit-ball intervals are stored")
        row = self._level(n)
        r = int(row[a % self.p**n])
        return Padic._from_residue(self.p, r, self.width).shift(self.shift)

    def _level(self, n):
        if n in self.tables:
            return self.tables[n]
        return _measure_level(self.symbol, self.alpha, self.p, n, self.width)[0]

    def total_unit_mass(self):
        """mu(Z_p^x) = sum of the depth-1 intervals."""
        row = self._level(1)
        total = int(sum(int(row[a]) for a in range(1, self.p)) % self.p**self.width)
        return Padic._from_residue(self.p, total, self.width).shift(self.shift)

    def min_valuation(self):
        """min v_p(mu(interval)) over stored intervals, including the shift."""
        best = math.inf
        for n, row in self.tables.items():
            units = row[np.arange(len(row)) % self.p != 0]
            nz = units[units != 0]
            if len(nz) < len(units):
                best = min(best, self.width)  # a zero residue: only width-known
            if len(nz):
                vals = nz.copy()
                v = 0
                while len(vals) and v < self.width:
                    rem = vals % self.p
                    if (rem != 0).any():
                        break
                    vals //= self.p
                    v += 1
                best = min(best, v)
        return (0 if best is math.inf else best) + self.shift

    def distribution_residual(self, a, n):
        """v_p of mu(a+p^n) - sum_b mu(a + b p^n + p^(n+1)); math.inf if 0."""
        lhs = self.value(a, n)
        rhs = None
        for b in range(self.p):
            term = self.value(a + b * self.p**n, n + 1)
            rhs = term if rhs is None else rhs + term
        d = lhs - rhs
        if d.is_zero():
            return math.inf
        return d.valuation()


def _measure_level(symbol, alpha, p, n, width):
    """(residue row for level n, shift) streamed in chunks."""
    q = p**width
    ainv = pow(int(alpha.residue(width)), -1, q)
    ainv_n = pow(ainv, n, q)
    ainv_n1 = ainv_n * ainv % q
    size = p**n
    out = np.zeros(size, dtype=np.int64)
    shift = None
    for lo in range(0, size, _CHUNK):
        hi = min(lo + _CHUNK, size)
        nums = np.arange(lo, hi, dtype=np.int64)
        s_n, sh = symbol.evaluate_batch_mod(nums, p**n, p, width)
        if n >= 2:
            s_n1, sh1 = symbol.evaluate_batch_mod(nums % p**(n - 1), p**(n - 1),
                                                  p, width)
            assert sh1 == sh
        else:
            # phi{a/p^0} = phi{a -> oo} = phi{0 -> oo} by translation
            base, sh1 = symbol.evaluate_batch_mod(
                np.zeros(1, dtype=np.int64), 1, p, width)
            assert sh1 == sh
            s_n1 = np.full(hi - lo, int(base[0]), dtype=np.int64)
        shift = sh
        out[lo:hi] = (ainv_n * s_n - ainv_n1 * s_n1) % q
    return out, shift


def stabilized_measure(symbol, roots, depth, prec, stored_depth=None):
    """Build the ordinary stabilized measure from a calibrated eigensymbol.

    Demands the unit root: handing in beta (valuation one) is exactly the
    case where Riemann sums diverge and the overconvergent route is needed.
    """
    alpha = roots.alpha
    if alpha.valuation() != 0:
        raise SlopeError("stabilized Riemann sums need v_p(alpha) = 0; "
                         "use the overconvergent pipeline for the critical slope")
    p = roots.p
    width = prec
    if p**width > 2**31:
        raise PadicError(f"p^{width} exceeds the int64 batch range")
    if stored_depth is None:
        stored_depth = depth
        while p**stored_depth > 2 * 10**6:
            stored_depth -= 1
    tables = {}
    shift = 0
    for n in range(1, stored_depth + 1):
        tables[n], shift = _measure_level(symbol, alpha, p, n, width)
    return PadicMeasure(p=p, width=width, shift=shift, depth=depth,
                        stored_depth=stored_depth, tables=tables,
                        symbol=symbol, alpha=alpha, growth=0)


def twisted_moment(measure, chi, j=1):
    """integral of chi over Z_p^x against the measure: the basic twisted
    moment sum_(a mod p^r unit) chi(a) mu(a + p^r Z_p), for chi of conductor
    p^r (Teichmuller powers; r <= 1 here) or the trivial character."""
    p = measure.p
    if chi.kind != "teichmuller" or chi.p != p:
        raise ValueError("twisted moments take Teichmuller-power characters")
    r = 1  # conductor p for nontrivial powers; trivial chi uses depth-1 sums
    if r > measure.depth:
        raise DepthError("character conductor exceeds measure depth")
    row = measure._level(r)
    q = p**measure.width
    total = 0
    for a in range(1, p**r):
        if a % p == 0:
            continue
        if chi.power == 0:
            cv = 1
        else:
            w = teichmuller_int(a, p, measure.width)
            cv = pow(w, chi.power, q)
        total = (total + cv * int(row[a])) % q
    return Padic._from_residue(p, total, measure.width).shift(measure.shift)


@dataclass
class LJet:
    """Truncated expansion sum c_j (s-1)^j of the L-function at s = 1,
    on the tame branch omega^branch (branch 0 is the one entering every
    identity at weight 2)."""
    p: int
    coeffs: list
    branch: int = 0
    center: int = 1
    ledger: dict = field(default_factory=dict)

    def value(self):
        return self.coeffs[0]

    def derivative(self):
        return self.coeffs[1]

    def __add__(self, other):
        if (self.p, self.center, self.branch) != (other.p, other.center, other.branch):
            raise ValueError("jet centers/branches differ")
        n = min(len(self.coeffs), len(other.coeffs))
        return LJet(self.p, [self.coeffs[i] + other.coeffs[i] for i in range(n)],
                    self.branch, self.center)

    def render(self):
        inner = ", ".join(str(c) for c in self.coeffs)
        return f"s-center {self.center}, [{inner}]"


def lp_jet(measure, order=2, prec=None, depth=None, branch=0):
    """Jet coefficients c_j = (1/j!) int omega^branch(x) log<x>^j dmu by
    Riemann sums at the deepest available depth.

    A depth-n sum is correct mod p^(n + min-valuation), so asking for M
    digits needs depth >= M + 2 (raised as DepthError with the required
    depth); the ledger records the claimed precision actually achieved.
    """
    p = measure.p
    depth = depth or measure.depth
    if prec is not None and depth < prec + 2:
        raise DepthError(f"insufficient depth: jets to {prec} digits need "
                         f"depth >= {prec + 2}, have {depth}")
    width = measure.width
    q = p**width
    width_full = min(width + 2, _max_width(p))
    winv = _teich_inv_table(p, width_full)
    ainv = pow(int(measure.alpha.residue(width)), -1, q)
    a_n = pow(ainv, depth, q)
    a_n1 = a_n * ainv % q
    size = p**depth
    sums = [0] * (order + 1)
    teich_pows = _teich_power_table(p, branch, width)
    log_width = None
    for lo in range(0, size, _CHUNK):
        hi = min(lo + _CHUNK, size)
        nums = np.arange(lo, hi, dtype=np.int64)
        mask = (nums % p) != 0
        s_n, sh = measure.symbol.evaluate_batch_mod(nums, p**depth, p, width)
        s_n1, _ = measure.symbol.evaluate_batch_mod(nums % p**(depth - 1),
                                                    p**(depth - 1), p, width)
        mu = (a_n * s_n - a_n1 * s_n1) % q
        mu = np.where(mask, mu, 0)
        if branch:
            mu = mu * teich_pows[nums % p] % q
        lg, log_width = _log_chunk(nums, p, width_full, winv)
        lg = lg % q
        acc = mu.copy()
        for j in range(order + 1):
            sums[j] = (sums[j] + int(acc.sum())) % q
            acc = acc * lg % q
    coeffs = []
    vmin = measure.min_valuation() - measure.shift  # valuation of residues
    claimed = min(width, depth + max(vmin, 0))
    for j in range(order + 1):
        total = sums[j] * pow(math.factorial(j), -1, q) % q
        cl = min(claimed, log_width)
        c = Padic._from_residue(p, total % p**cl, cl).shift(measure.shift)
        coeffs.append(c)
    ledger = {"depth": depth, "width": width, "claimed_abs_prec": claimed,
              "shift": measure.shift}
    return LJet(p=p, coeffs=coeffs, branch=branch, ledger=ledger)


def _max_width(p):
    w = 1
    while p**(w + 1) <= 2**31:
        w += 1
    return w


def _teich_power_table(p, power, width):
    q = p**width
    out = np.zeros(p, dtype=np.int64)
    for r in range(1, p):
        out[r] = pow(teichmuller_int(r, p, width), power, q)
    return out


class _TwistedBatchAdapter:
    """Expose a quadratic TwistedSymbol through the batch-evaluation
    interface: phi_chi{a/m} = sum_b chi(b) phi{(a d - b m)/(m d)}."""

    def __init__(self, tw):
        self.tw = tw
        self.level = tw.level

    def evaluate_batch_mod(self, nums, denominator, p, width):
        d = self.tw.chi.conductor
        m = int(denominator)
        if math.gcd(d, m) != 1:
            raise ValueError("twist conductor must be prime to the depth")
        q = p**width
        total = None
        shift = None
        base = np.asarray(nums, dtype=np.int64)
        for b in range(1, d):
            c = self.tw.chi(b)
            if c == 0:
                continue
            nn = np.mod(base * d - b * m, m * d)
            res, sh = self.tw.base.evaluate_batch_mod(nn, m * d, p, width)
            shift = sh
            t = c * res % q
            total = t if total is None else (total + t) % q
        return total, shift

    def evaluate(self, r, calibrated=True):
        return self.tw.evaluate(r, calibrated)


def naive_base_change_jet(jet_f, jet_fk):
    """Cauchy product of two jets at the same center: the weight-2 shadow of
    the naive base-change L-function over the quadratic field."""
    if jet_f.center != jet_fk.center or jet_f.p != jet_fk.p:
        raise ValueError("jet centers must match")
    if jet_f.branch != jet_fk.branch:
        raise ValueError("jet branches must match")
    n = min(len(jet_f.coeffs), len(jet_fk.coeffs))
    out = []
    for k in range(n):
        acc = None
        for i in range(k + 1):
            t = jet_f.coeffs[i] * jet_fk.coeffs[k - i]
            acc = t if acc is None else acc + t
        out.append(acc)
    return LJet(p=jet_f.p, coeffs=out, branch=jet_f.branch, center=jet_f.center)
