"""The critical-slope p-adic L-function via overconvergent symbols.

The calibrated classical symbol is beta-stabilized to level Np, lifted to
finite-approximation distributions (moments mu_0..mu_{M-1}, the j-th known
mod p^(M-j)) by zero-padding higher moments, and projected onto the U_p
eigenline by iterating U_p/beta.  Each iteration divides by beta (valuation
one), so the working width carries an explicit per-iteration ledger; the
returned symbol reports exactly how many digits survived.

Conventions are pinned by two executable anchors rather than by symbol
pushing: the moment-0 specialization of the lift is the classical stabilized
symbol, and running the same machinery at the unit root must reproduce the
Riemann-sum measure interval by interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .padics import Padic, PadicError
from .modsym import P1List, _manin_path_labels


class LiftFailure(RuntimeError):
    pass


class ProjectionDivergence(RuntimeError):
    pass


# ------------------------------------------------------- classical at level Np

class StabilizedSymbol:
    """The lambda-stabilization of a level-N symbol to level Np:
    phi_lam{x -> y} = phi{x -> y} - lam^{-1} phi{px -> py}.

    Values are exact rationals paired with the p-adic 1/lam, carried as
    (rational part, rational-of-p-path part) so that U_p phi = lam phi can be
    verified as an algebraic identity before any reduction.
    """

    def __init__(self, symbol, root: Padic, p):
        self.base = symbol
        self.root = root
        self.p = p
        self.level = symbol.level * p

    def value_pair(self, x, y):
        """(phi{x->y}, phi{px->py}): the stabilized value is a - root^-1 b."""
        a = self.base.evaluate_path(x, y)
        px = None if x is None else self.p * x
        py = None if y is None else self.p * y
        b = self.base.evaluate_path(px, py)
        return a, b

    def value_padic(self, x, y, prec):
        a, b = self.value_pair(x, y)
        pa = Padic.from_rational(a, self.p, prec) if a else Padic.zero(self.p)
        pb = Padic.from_rational(b, self.p, prec) if b else Padic.zero(self.p)
        return pa - pb / self.root

    def up_residual_valuation(self, x, y, prec):
        """v_p of (U_p phi_lam - lam phi_lam){x->y}; math.inf when zero."""
        p = self.p
        acc = None
        for a in range(p):
            xs = None if x is None else (x + a) / p
            ys = None if y is None else (y + a) / p
            t = self.value_padic(xs, ys, prec)
            acc = t if acc is None else acc + t
        d = acc - self.root * self.value_padic(x, y, prec)
        if d.is_zero():
            return math.inf
        return d.valuation()


def beta_stabilize(symbol, roots, prec):
    """Critical-slope stabilization (U_p eigenvalue beta, slope one)."""
    return StabilizedSymbol(symbol, roots.beta, roots.p)


def alpha_stabilize(symbol, roots, prec):
    """Unit-root stabilization (U_p eigenvalue alpha, slope zero)."""
    return StabilizedSymbol(symbol, roots.alpha, roots.p)


# ----------------------------------------------------------- SL2 машинery

def _sl2_lift(c, d, level):
    """An SL2(Z) matrix with bottom row congruent to (c, d) mod level."""
    c %= level
    d %= level
    for i in range(60):
        cc = c + level * i
        for j in range(60):
            dd = d + level * j
            if (cc, dd) != (0, 0) and math.gcd(cc, dd) == 1:
                g, a, b = _xgcd(dd, -cc)
                assert g == 1 and a * dd - b * cc == 1
                return (a, b, cc, dd)
    raise ArithmeticError("no SL2 lift found")


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    aa, bb = a, b
    while bb:
        q = aa // bb
        aa, bb = bb, aa - q * bb
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if aa < 0:
        aa, x0, y0 = -aa, -x0, -y0
    return aa, x0, y0


def _mat_mul(g, h):
    return (g[0] * h[0] + g[1] * h[2], g[0] * h[1] + g[1] * h[3],
            g[2] * h[0] + g[3] * h[2], g[2] * h[1] + g[3] * h[3])


def _mat_inv_sl2(g):
    a, b, c, d = g
    assert a * d - b * c == 1
    return (d, -b, -c, a)


def _apply_mobius(g, x):
    """g acting on P^1(Q): x = Fraction or None (infinity)."""
    a, b, c, d = g
    if x is None:
        return None if c == 0 else Fraction(a, c)
    num = a * x + b
    den = c * x + d
    if den == 0:
        return None
    return num / den


def unimodular_segments(x, y):
    """SL2 matrices g with {x -> y} = sum of segments {g 0 -> g oo}."""
    segs = []
    for g in _segments_from_infinity(y):
        segs.append(g)
    for g in _segments_from_infinity(x):
        segs.append(("neg", g))
    return segs


def _segments_from_infinity(r):
    """Matrices for {oo -> r} with gamma_k = [[p_k, s p_{k-1}],[q_k, s q_{k-1}]]."""
    if r is None:
        return []
    r = Fraction(r)
    a, b = r.numerator, r.denominator
    quots = []
    x, y = a, b
    while y:
        q = x // y
        quots.append(q)
        x, y = y, x - q * y
    p_prev, q_prev = 1, 0
    p_cur, q_cur = quots[0], 1
    out = [(p_cur, -p_prev, q_cur, -q_prev)]
    sign = 1
    for c in quots[1:]:
        p_prev, p_cur = p_cur, c * p_cur + p_prev
        q_prev, q_cur = q_cur, c * q_cur + q_prev
        out.append((p_cur, sign * p_prev, q_cur, sign * q_prev))
        sign = -sign
    return out


# ------------------------------------------------------ distribution algebra

def moment_transform(g, p, n_moments, width, weight_factor=0):
    """Matrix T with (mu|g)_j = sum_m T[j][m] mu_m, for g in Sigma_0(p):
    T[j][m] = coefficient of z^m in (a+cz)^w ((b + d z)/(a + c z))^j mod
    p^width, where w = weight_factor (0 for the weight-two action; -2 gives
    the weight-zero action used to locate the theta-junk eigenvalue)."""
    a, b, c, d = g
    q = p**width
    assert a % p != 0 and c % p == 0, f"{g} is not in Sigma_0(p)"
    ainv = pow(a % q, -1, q)
    # 1/(a + cz) = ainv * sum (-c * ainv)^k z^k
    geom = [1]
    t = (-c) * ainv % q
    for _ in range(1, n_moments):
        geom.append(geom[-1] * t % q)
    inv_series = [ainv * geom[k] % q for k in range(n_moments)]
    s = _poly_mul([b % q, d % q], inv_series, n_moments, q)
    if weight_factor == 0:
        head = [1] + [0] * (n_moments - 1)
    elif weight_factor < 0:
        head = [1] + [0] * (n_moments - 1)
        for _ in range(-weight_factor):
            head = _poly_mul(head, inv_series, n_moments, q)
    else:
        lin = [a % q, c % q]
        head = [1] + [0] * (n_moments - 1)
        for _ in range(weight_factor):
            head = _poly_mul(head, lin, n_moments, q)
    rows = [head[:]]
    cur = head[:]
    for _ in range(1, n_moments):
        cur = _poly_mul(cur, s, n_moments, q)
        rows.append(cur)
    return rows


def _poly_mul(f, g, n, q):
    out = [0] * n
    for i, fi in enumerate(f):
        if fi == 0 or i >= n:
            continue
        for j, gj in enumerate(g):
            if i + j >= n:
                break
            if gj:
                out[i + j] = (out[i + j] + fi * gj) % q
    return out


@dataclass
class OCSymbol:
    """Distribution-valued symbol on the cosets of Gamma_0(Np).

    ``moments[i][j]`` = residue of the j-th moment at label i, with the true
    value p^shift * residue mod p^(width+shift).  The ledger records losses.
    """
    p: int
    level: int
    n_moments: int
    width: int
    shift: int
    p1: P1List
    lifts: list
    moments: list
    weight_factor: int = 0
    ledger: dict = field(default_factory=dict)
    tcache: dict = field(default_factory=dict, repr=False)

    def copy(self):
        return OCSymbol(p=self.p, level=self.level, n_moments=self.n_moments,
                        width=self.width, shift=self.shift, p1=self.p1,
                        lifts=self.lifts, moments=[row[:] for row in self.moments],
                        ledger=dict(self.ledger))

    def moment_padic(self, label, j):
        r = self.moments[label][j] % self.p**self.width
        avail = max(1, min(self.width, self.n_moments - j))  # mu_j mod p^(M-j)
        return Padic._from_residue(self.p, r % self.p**avail, avail).shift(self.shift)

    def fil_grade(self, rows=None):
        """Largest r with mu_j = 0 mod p^(r-j) for all labels/moments
        (computed on residues; capped by the working width)."""
        rows = rows if rows is not None else self.moments
        grade = math.inf
        for row in rows:
            for j, m in enumerate(row):
                m %= self.p**self.width
                if m == 0:
                    continue
                v = 0
                while m % self.p == 0:
                    m //= self.p
                    v += 1
                grade = min(grade, v + j)
        return min(grade, self.width)

    # ----- path evaluation -------------------------------------------------

    def value_on_segments(self, segments):
        """Distribution of Phi on a chain of unimodular segments."""
        out = [0] * self.n_moments
        q = self.p**self.width
        for seg in segments:
            neg = False
            if isinstance(seg, tuple) and seg and seg[0] == "neg":
                neg = True
                seg = seg[1]
            lab, delta_inv = self._classify(seg)
            T = self._transform(delta_inv)
            row = self.moments[lab]
            for j in range(self.n_moments):
                acc = 0
                Tj = T[j]
                for m in range(self.n_moments):
                    t = Tj[m]
                    if t:
                        acc += t * row[m]
                out[j] = (out[j] - acc if neg else out[j] + acc) % q
        return out

    def value_on_path(self, x, y):
        """Phi{x -> y} as a moment list (residues mod p^width)."""
        return self.value_on_segments(unimodular_segments(x, y))

    def _classify(self, g):
        """(label, delta^{-1}) with g = delta * lift(label), delta in Gamma_0."""
        lab = self.p1.index(g[2] % self.level, g[3] % self.level)
        glab = self.lifts[lab]
        delta = _mat_mul(g, _mat_inv_sl2(glab))
        assert delta[2] % self.level == 0, "classification left Gamma_0"
        return lab, _mat_inv_sl2(delta)

    def _transform(self, g):
        if g not in self.tcache:
            self.tcache[g] = moment_transform(
                g, self.p, self.n_moments,
                self.ledger.get("width0", self.width), self.weight_factor)
        return self.tcache[g]

    def modularity_residual(self, gamma, label):
        """Fil-grade of Phi(gamma D)|gamma - Phi(D) for gamma in Gamma_0(Np)."""
        g = self.lifts[label]
        gd = _mat_mul(gamma, g)
        val = self.value_on_segments(_segments_for_matrix_path(gd))
        T = self._transform(gamma)
        q = self.p**self.width
        twisted = []
        for j in range(self.n_moments):
            acc = 0
            for m in range(self.n_moments):
                if T[j][m]:
                    acc += T[j][m] * val[m]
            twisted.append(acc % q)
        base = self.value_on_segments(_segments_for_matrix_path(g))
        diff = [[(a - b) % q for a, b in zip(twisted, base)]]
        return self.fil_grade(diff)


def _segments_for_matrix_path(g):
    x = _apply_mobius(g, Fraction(0))
    y = _apply_mobius(g, None)
    return unimodular_segments(x, y)


# ----------------------------------------------------------------- the lift

def lift_to_distributions(stab: StabilizedSymbol, n_moments, width=None,
                          perturb=None):
    """Zero-padded lift: moment 0 is the classical stabilized value on each
    coset, higher moments start at zero (any choice differing in higher
    moments maps to the same eigensymbol after projection, which the
    perturbed-lift test exercises via ``perturb``).
    """
    p = stab.p
    level = stab.level
    if n_moments < 3:
        raise LiftFailure("need at least 3 moments")
    width = width or (3 * n_moments + 4)
    p1 = P1List(level)
    lifts = [_sl2_lift(c, d, level) for (c, d) in p1.reps]
    q = p**width
    root = stab.root
    if root.val not in (0, 1):
        raise LiftFailure("root must have valuation 0 or 1")
    vroot = root.val
    # critical-slope values carry the beta^{-1} pole: global shift -v(root)
    shift = -vroot
    root_unit_inv = pow(int(root.unit) % q, -1, q)
    moments = []
    for g in lifts:
        x = _apply_mobius(g, Fraction(0))
        y = _apply_mobius(g, None)
        va, vb = stab.value_pair(x, y)
        ra = _rat_residue(va, p, width)
        rb = _rat_residue(vb, p, width)
        # p^vroot * (a - root^-1 b) = p^vroot * a - unit^-1 * b  (integral)
        m0 = (p**vroot * ra - root_unit_inv * rb) % q
        row = [m0] + [0] * (n_moments - 1)
        if perturb:
            rng = perturb
            for j in range(1, n_moments):
                row[j] = rng.randrange(0, p**max(1, width - j))
        moments.append(row)
    sym = OCSymbol(p=p, level=level, n_moments=n_moments, width=width,
                   shift=shift, p1=p1, lifts=lifts, moments=moments,
                   ledger={"width0": width, "shift0": shift, "iterations": []})
    _solve_relations(sym, target_grade=min(n_moments + 2, width - 1))
    return sym


# ----------------------------------------------------- Manin relation solving

SIGMA = (0, -1, 1, 0)
TAU = (0, -1, 1, -1)


def relation_structure(oc: OCSymbol):
    """Constraint rows of the Manin presentation on coset values.

    Two-term: V[lab(x sigma)] | delta^-1 + V[x] = 0, and three-term:
    V[x] + V[lab(x tau)] | delta1^-1 + V[lab(x tau^2)] | delta2^-1 = 0,
    where each delta in Gamma_0 reconciles the chosen SL2 lifts.  Every
    matrix appearing lies in Sigma_0(p), so the rows act on distributions.
    """
    rows = []
    seen = set()
    for i, g in enumerate(oc.lifts):
        gs = _mat_mul(g, SIGMA)
        lab, delta_inv = oc._classify(gs)
        key = ("s",) + tuple(sorted((i, lab)))
        if key not in seen:
            seen.add(key)
            rows.append([(i, (1, 0, 0, 1)), (lab, delta_inv)])
        g1 = _mat_mul(g, TAU)
        g2 = _mat_mul(g, _mat_mul(TAU, TAU))
        lab1, dinv1 = oc._classify(g1)
        lab2, dinv2 = oc._classify(g2)
        key = ("t",) + tuple(sorted((i, lab1, lab2)))
        if key not in seen:
            seen.add(key)
            rows.append([(i, (1, 0, 0, 1)), (lab1, dinv1), (lab2, dinv2)])
    return rows


def _relation_residuals(oc: OCSymbol, rows):
    q = oc.p**oc.width
    out = []
    for row in rows:
        acc = [0] * oc.n_moments
        for (lab, g) in row:
            T = oc._transform(g)
            src = oc.moments[lab]
            for j in range(oc.n_moments):
                s = 0
                Tj = T[j]
                for m in range(oc.n_moments):
                    if Tj[m]:
                        s += Tj[m] * src[m]
                acc[j] = (acc[j] + s) % q
        out.append(acc)
    return out


def _graded_action(T, j, m, p):
    """(T[j][m] / p^(m-j)) mod p for m >= j (exactly divisible by theory)."""
    t = T[j][m]
    e = m - j
    pe = p**e
    assert t % pe == 0, "moment transform lost its filtration bound"
    return (t // pe) % p


def _solve_relations(oc: OCSymbol, target_grade, fix_moment0=True, rng=None):
    """Choose moments so the Manin relations hold filtration-deep; with
    fix_moment0 the classical symbol at moment zero never moves.

    The truncation mod p^G of any true overconvergent lift satisfies the
    relation system (with the moment-j row scaled by p^j, since dropped
    moments >= M leave that row true only mod p^(M-j)), so a single
    valuation-pivoted linear solve over Z/p^G finds one.  Grade-by-grade
    solving strands itself on filtration non-strictness; insolvability here
    means the classical symbol admits no overconvergent lift (the
    theta-critical trap).  With ``rng``, free columns are randomized, which
    samples a random genuine symbol when moment zero is left free.
    """
    rows = relation_structure(oc)
    p = oc.p
    M = oc.n_moments
    if fix_moment0:
        res = _relation_residuals(oc, rows)
        for row in res:
            assert row[0] == 0, "classical Manin relations fail at moment zero"
    G = min(M, _int64_width(p) - 1)
    q = p**G
    n_lab = len(oc.moments)
    m_lo = 1 if fix_moment0 else 0
    unknowns = [(lab, m) for lab in range(n_lab) for m in range(m_lo, M)]
    col_of = {u: i for i, u in enumerate(unknowns)}
    n_u = len(unknowns)
    eqs = []
    rhs = []
    for row in rows:
        for j in range(0 if not fix_moment0 else 1, M):
            arow = np.zeros(n_u, dtype=np.int64)
            b = 0
            for (lab, g) in row:
                T = oc._transform(g)
                if fix_moment0:
                    b = (b + p**j * T[j][0] % q * oc.moments[lab][0]) % q
                for m in range(m_lo, M):
                    t = p**j * T[j][m] % q
                    if t:
                        arow[col_of[(lab, m)]] = (arow[col_of[(lab, m)]] + t) % q
            eqs.append(arow)
            rhs.append((-b) % q)
    A = np.stack(eqs)
    b = np.array(rhs, dtype=np.int64)
    x = _solve_mod_pk(A, b, p, G, free_rng=rng)
    if x is None:
        raise LiftFailure("no relation-compatible lift exists "
                          "(theta-critical symbol?)")
    qw = p**oc.width
    for (lab, m), c in zip(unknowns, x):
        oc.moments[lab][m] = int(c) % qw
    res = _relation_residuals(oc, rows)
    final = oc.fil_grade(res)
    if final < min(G, oc.n_moments):
        raise LiftFailure(f"relation residual grade {final} below target {G}")
    oc.ledger["relation_grade"] = final


def _int64_width(p):
    w = 1
    while p**(w + 1) < 2**31:
        w += 1
    return w


def _solve_mod_pk(A, b, p, k, free_rng=None):
    """One solution of A x = b over Z/p^k, or None.

    Valuation-stratified elimination with full column pivoting: all
    valuation-0 pivots are exhausted before valuation-1 pivots and so on,
    which keeps every entry of the active block at valuation >= the current
    stratum.  Back-substitution divisions are then guaranteed to be exact
    whenever the system is solvable; free columns are zero, or random when
    ``free_rng`` is given (sampling the solution affine space).
    """
    q = p**k
    m, n = A.shape
    W = np.hstack([A % q, (b % q).reshape(-1, 1)])
    colperm = np.arange(n)
    pivots = []  # (row, permuted col position, stratum)
    r = 0
    s = 0
    while r < m and s < k:
        sub = W[r:, r:n]  # active block in permuted coordinates
        unit_mask = (sub // p**s % p) != 0
        if not unit_mask.any():
            s += 1
            continue
        i_rel, j_rel = np.argwhere(unit_mask)[0]
        i, j = r + int(i_rel), r + int(j_rel)
        if i != r:
            W[[r, i]] = W[[i, r]]
        if j != r:
            W[:, [r, j]] = W[:, [j, r]]
            colperm[[r, j]] = colperm[[j, r]]
        unit = int(W[r, r]) // p**s
        W[r] = W[r] * pow(unit % q, -1, q) % q
        mult = W[r + 1:, r] // p**s
        nz = mult != 0
        if nz.any():
            W[r + 1:][nz] = (W[r + 1:][nz] - mult[nz, None] * W[r][None, :]) % q
        pivots.append((r, s))
        r += 1
    for i in range(r, m):
        if int(W[i, n]) % q:
            return None
    x = np.zeros(n, dtype=np.int64)
    if free_rng is not None:
        npiv = len(pivots)
        for j in range(npiv, n):
            x[j] = free_rng.randrange(q)
    for (i, s) in reversed(pivots):
        acc = int(W[i, n])
        row = W[i, i + 1:n]
        nzc = np.nonzero(row)[0]
        for off in nzc:
            j = i + 1 + int(off)
            if x[j]:
                acc -= int(row[off]) * int(x[j])
        acc %= q
        if acc % p**s:
            return None  # genuinely inconsistent despite stratification
        x[i] = acc // p**s % (q // p**s)
    out = np.zeros(n, dtype=np.int64)
    out[colperm] = x
    return out


def _rat_residue(x: Fraction, p, width):
    q = p**width
    num, den = x.numerator, x.denominator
    v = 0
    while den % p == 0:
        den //= p
        v += 1
    if v:
        raise LiftFailure("calibration constant has p in its denominator; "
                          "increase width handling")
    return num * pow(den, -1, q) % q


# --------------------------------------------------------- Hecke operators

class HeckeOperator:
    """Block-sparse double-coset operator on coset-valued distribution
    symbols, built from a finite matrix set (U_p, or T_ell for ell != p).

    Structure table: for each label i, the (label, Sigma_0-matrix) pairs of
    Phi(nu D_i)|nu expanded through unimodular segments; the moment
    transforms are assembled once per working width.
    """

    def __init__(self, oc: OCSymbol, mats, weight_factor=0):
        self.p = oc.p
        self.level = oc.level
        self.n = oc.n_moments
        self.width = oc.width
        self.q = oc.p**oc.width
        self.mats = mats
        self.weight_factor = weight_factor
        self.structure = self._build_structure(oc)
        self.blocks = self._build_blocks(oc)

    def _build_structure(self, oc):
        table = []
        for i, g in enumerate(oc.lifts):
            terms = []
            for nu in self.mats:
                ga = _mat_mul(nu, g)
                x = _apply_mobius(ga, Fraction(0))
                y = _apply_mobius(ga, None)
                for seg in unimodular_segments(x, y):
                    sgn = 1
                    if isinstance(seg, tuple) and seg and seg[0] == "neg":
                        sgn, seg = -1, seg[1]
                    lab, delta_inv = oc._classify(seg)
                    h = _mat_mul(delta_inv, nu)
                    terms.append((lab, h, sgn))
            table.append(terms)
        return table

    def _build_blocks(self, oc):
        blocks = []
        tcache = {}
        for i, terms in enumerate(self.structure):
            acc = {}
            for (lab, h, sgn) in terms:
                if h not in tcache:
                    tcache[h] = moment_transform(h, self.p, self.n, self.width,
                                                 self.weight_factor)
                T = tcache[h]
                tgt = acc.setdefault(lab, [[0] * self.n for _ in range(self.n)])
                for j in range(self.n):
                    Tj = T[j]
                    tj = tgt[j]
                    for m in range(self.n):
                        if Tj[m]:
                            tj[m] = (tj[m] + sgn * Tj[m]) % self.q
            blocks.append(list(acc.items()))
        return blocks

    def apply(self, moments):
        out = []
        q = self.q
        for i in range(len(moments)):
            row = [0] * self.n
            for (lab, T) in self.blocks[i]:
                src = moments[lab]
                for j in range(self.n):
                    Tj = T[j]
                    acc = row[j]
                    for m in range(self.n):
                        t = Tj[m]
                        if t:
                            acc += t * src[m]
                    row[j] = acc % q
            out.append(row)
        return out


def up_operator(oc: OCSymbol):
    p = oc.p
    return HeckeOperator(oc, [(1, a, 0, p) for a in range(p)])


def tl_operator(oc: OCSymbol, ell):
    """T_ell for ell coprime to the level: the standard ell+1 matrices, all
    of which lie in the Sigma_0(p) monoid since p != ell."""
    if oc.level % ell == 0:
        raise ValueError("T_ell here needs ell coprime to the level")
    mats = [(1, a, 0, ell) for a in range(ell)] + [(ell, 0, 0, 1)]
    return HeckeOperator(oc, mats)


# --------------------------------------------- slope-one junk contraction

def _fp_relation_space(oc: OCSymbol):
    """Basis of the classical (trivial-coefficient) relation space mod p at
    the symbol's level, as a (dim x labels) int64 matrix over F_p."""
    p = oc.p
    p1 = oc.p1
    n = len(p1.reps)
    rows = []
    for i, (c, d) in enumerate(p1.reps):
        r = np.zeros(n, dtype=np.int64)
        r[i] += 1
        r[p1.index(d, -c)] += 1
        rows.append(r % p)
        r = np.zeros(n, dtype=np.int64)
        r[i] += 1
        r[p1.index(d, -c - d)] += 1
        r[p1.index(-c - d, c)] += 1
        rows.append(r % p)
    A = np.stack(rows) % p
    return _fp_nullspace(A, p)


def _fp_nullspace(A, p):
    A = A.copy() % p
    m, n = A.shape
    r = 0
    pivots = []
    for c in range(n):
        piv = None
        for i in range(r, m):
            if A[i, c] % p:
                piv = i
                break
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        mask = A[:, c] % p != 0
        mask[r] = False
        if mask.any():
            A[mask] = (A[mask] - np.outer(A[mask, c], A[r])) % p
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-A[i, f]) % p
        basis.append(v)
    return np.stack(basis) if basis else np.zeros((0, n), dtype=np.int64)


def _classical_tl_mod_p(oc: OCSymbol, ell, basis):
    """Matrix of T_ell mod p on the classical relation space at level Np."""
    from .modsym import _heilbronn
    p = oc.p
    p1 = oc.p1
    n = len(p1.reps)
    mats = list(_heilbronn(ell))
    imgs = []
    for vec in basis:
        out = np.zeros(n, dtype=np.int64)
        for i, (c, d) in enumerate(p1.reps):
            acc = 0
            for (a, b, cc, dd) in mats:
                c1 = (a * c + cc * d) % oc.level
                d1 = (b * c + dd * d) % oc.level
                if math.gcd(math.gcd(c1, d1), oc.level) == 1:
                    acc += vec[p1.index(c1, d1)]
            out[i] = acc % p
        imgs.append(out)
    # coordinates: solve basis^T x = img for each (basis rows independent)
    B = basis.T % p
    coords = []
    for img in imgs:
        x = _fp_solve_exact(B, img % p, p)
        coords.append(x)
    return np.stack(coords).T % p


def _fp_solve_exact(B, v, p):
    A = np.hstack([B % p, (v % p).reshape(-1, 1)])
    m, n1 = A.shape
    n = n1 - 1
    r = 0
    pivots = []
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i, c] % p), None)
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        mask = A[:, c] % p != 0
        mask[r] = False
        if mask.any():
            A[mask] = (A[mask] - np.outer(A[mask, c], A[r])) % p
        pivots.append(c)
        r += 1
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = A[i, n]
    return x


def _minpoly_fp(M, p, tries=4):
    """Minimal polynomial of M over F_p via Krylov sequences (lcm over a few
    random starts), as a coefficient list low-to-high."""
    import random as _random
    rng = _random.Random(11)
    n = M.shape[0]
    best = [1]
    for _ in range(tries):
        v = np.array([rng.randrange(p) for _ in range(n)], dtype=np.int64)
        if not v.any():
            continue
        kry = [v % p]
        for _ in range(n):
            kry.append(M @ kry[-1] % p)
        # first dependency
        K = np.stack(kry).T % p
        dep = _fp_first_dependency(K, p)
        best = _poly_lcm_fp(best, dep, p)
    return best


def _fp_first_dependency(K, p):
    """Monic coefficients c with sum c_i K[:,i] = 0, minimal length."""
    m, cols = K.shape
    A = K[:, :1] % p
    for j in range(1, cols):
        target = K[:, j] % p
        sol = _fp_solve_in_span(A, target, p)
        if sol is not None:
            return [(-int(s)) % p for s in sol] + [1]
        A = np.hstack([A, target.reshape(-1, 1)])
    raise ArithmeticError("no Krylov dependency found")


def _fp_solve_in_span(A, v, p):
    W = np.hstack([A % p, (v % p).reshape(-1, 1)]).astype(np.int64)
    m, n1 = W.shape
    n = n1 - 1
    r = 0
    pivots = []
    for c in range(n):
        piv = next((i for i in range(r, m) if W[i, c] % p), None)
        if piv is None:
            continue
        W[[r, piv]] = W[[piv, r]]
        W[r] = W[r] * pow(int(W[r, c]), -1, p) % p
        mask = W[:, c] % p != 0
        mask[r] = False
        if mask.any():
            W[mask] = (W[mask] - np.outer(W[mask, c], W[r])) % p
        pivots.append(c)
        r += 1
    for i in range(r, m):
        if W[i, n] % p:
            return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = W[i, n]
    return x


def _poly_lcm_fp(f, g, p):
    gg = _poly_gcd_fp(f, g, p)
    q, _ = _poly_divmod_fp(f, gg, p)
    return _poly_mul_fp(q, g, p)


def _poly_gcd_fp(f, g, p):
    a, b = f[:], g[:]
    while any(b):
        _, r = _poly_divmod_fp(a, b, p)
        a, b = b, r
        while b and b[-1] % p == 0:
            b.pop()
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def _poly_divmod_fp(f, g, p):
    f = [c % p for c in f]
    g = [c % p for c in g]
    while g and g[-1] == 0:
        g.pop()
    q = [0] * max(1, len(f) - len(g) + 1)
    r = f[:]
    inv = pow(g[-1], -1, p)
    while len(r) >= len(g) and any(r):
        if r[-1] % p == 0:
            r.pop()
            continue
        d = len(r) - len(g)
        c = r[-1] * inv % p
        q[d] = c
        for i in range(len(g)):
            r[d + i] = (r[d + i] - c * g[i]) % p
        r.pop()
    return q, r


def _poly_mul_fp(f, g, p):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return out


def _poly_factors_fp(f, p):
    """Split off linear factors by root scanning; return (roots, cofactor)."""
    roots = []
    cur = f[:]
    changed = True
    while changed and len(cur) > 1:
        changed = False
        for t in range(p):
            val = 0
            for c in reversed(cur):
                val = (val * t + c) % p
            if val == 0:
                cur, _ = _poly_divmod_fp(cur, [(-t) % p, 1], p)
                roots.append(t)
                changed = True
                break
    return roots, cur


def _poly_eval_int(poly, x, modulus):
    val = 0
    for c in reversed(poly):
        val = val * x + c
    return val if modulus is None else val % modulus



def _lowest_valuation_entry(moments, p, q):
    best = None
    best_v = None
    for row in moments:
        for x in row:
            x %= q
            if x == 0:
                continue
            v = 0
            while x % p == 0:
                x //= p
                v += 1
            if best_v is None or v < best_v:
                best_v, best = v, x * p**v
                if v == 0:
                    return x
    return best


def _residual_ratio(prev, cur, p, width):
    """Consensus ratio rho with cur = rho * prev across low-valuation
    entries, or None when the residuals are not proportional (several junk
    lines still alive).  Consecutive eigen-residuals of the U_p/root
    iteration satisfy R_{n+1} = (U_p/root) R_n exactly, so on a single
    surviving junk line the ratio is its U_p-eigenvalue over root."""
    q = p**width
    piv = _lowest_valuation_entry(prev, p, q)
    if piv is None:
        return None
    v = 0
    t = piv
    while t % p == 0:
        t //= p
        v += 1
    tol = max(2, width - v - 3)
    ratios = []
    for row_p, row_c in zip(prev, cur):
        for a, b in zip(row_p, row_c):
            a %= q
            if a == 0 or a % p**v:
                continue
            au = a // p**v
            if au % p == 0:
                continue
            bu = (b % q) // p**v if b % q % p**v == 0 else None
            if bu is None:
                return None
            ratios.append(bu * pow(au, -1, q // p**v) % (q // p**v))
            if len(ratios) >= 8:
                break
        if len(ratios) >= 8:
            break
    if len(ratios) < 2:
        return None
    base = ratios[0]
    for r in ratios[1:]:
        if (r - base) % p**tol:
            return None
    return base % p**tol, tol


def up_eigenproject(oc: OCSymbol, root: Padic, iterations=None, curve=None):
    """Iterate Phi <- (U_p Phi)/root toward the eigenline.

    Dividing by the critical root costs one digit of absolute precision per
    pass (recorded in the ledger as a shrinking width).  At critical slope
    the error also contains slope-one theta-image lines on which U_p/root
    has unit norm, so the plain iteration stalls; each stalled line is
    removed by measuring its eigenvalue lam from the ratio of consecutive
    eigen-residuals (they satisfy R_{n+1} = (U_p/root) R_n exactly) and
    applying the exact annihilator (U_p - lam)/(root - lam).  lam = root
    would mean a theta-critical symbol and raises.  The eigen-residual's
    filtration grade must reach the filtration floor by the end, else the
    projection reports failure.
    """
    n_mom = oc.n_moments
    iterations = iterations or 2 * n_mom
    up = up_operator(oc)
    p = oc.p
    vroot = root.val
    cur = oc.copy()
    history = []
    prev_resid = None
    kills = 0
    it = 0
    while it < iterations:
        q = p**cur.width
        runit_inv = pow(int(root.unit) % q, -1, q)
        nxt = up.apply(cur.moments)
        # residual U_p Phi - root Phi, before the division
        rmul = int(root.unit) * p**vroot
        resid = [[(a - rmul * b) % q for a, b in zip(ra, rb)]
                 for ra, rb in zip(nxt, cur.moments)]
        grade = cur.fil_grade(resid)
        history.append(grade)
        floor = min(cur.width - vroot, cur.n_moments)
        if grade >= floor:
            cur.ledger.setdefault("iterations", []).append(
                {"iter": it, "residual_grade": grade, "width": cur.width})
            break
        stalled = (vroot and len(history) >= 3
                   and history[-1] <= history[-3] and prev_resid is not None)
        if stalled and kills < 6:
            got = _residual_ratio(prev_resid, resid, p, cur.width)
            if got is not None:
                rho, tol = got
                lam = rmul * rho % (p**cur.width)
                killed = _apply_upfactor(cur, up, root, lam, p)
                if killed:
                    kills += 1
                    prev_resid = None
                    cur.ledger.setdefault("junk_kills", []).append(
                        {"iter": it, "lambda_over_root": rho % p**min(tol, 4),
                         "width_after": cur.width})
                    it += 1
                    continue
        prev_resid = resid
        if vroot:
            cur.width -= vroot
            q = p**cur.width
            nxt = [[(x - x % p**vroot) // p**vroot % q for x in row]
                   for row in nxt]
        cur.moments = [[x * runit_inv % q for x in row] for row in nxt]
        up.q = q
        up.width = cur.width
        cur.ledger.setdefault("iterations", []).append(
            {"iter": it, "residual_grade": grade, "width": cur.width})
        it += 1
    cur.ledger["residual_history"] = history
    cur.ledger["final_width"] = cur.width
    cur.ledger["eigen_residual_grade"] = history[-1] if history else None
    return cur


def _apply_upfactor(cur: OCSymbol, up, root: Padic, lam, p):
    """Apply (U_p - lam)/(root - lam); returns False when root = lam would
    divide by zero (theta-critical trap) or the cost exceeds the width."""
    q = p**cur.width
    den = (int(root.unit) * p**root.val - lam) % q
    if den == 0:
        raise ProjectionDivergence(
            "stalled junk eigenvalue equals the critical root: "
            "theta-critical symbol")
    dv = 0
    dd = den
    while dd % p == 0:
        dd //= p
        dv += 1
    if dv >= cur.width - 2:
        return False
    nxt = up.apply(cur.moments)
    num = [[(a - lam * b) % q for a, b in zip(ra, rb)]
           for ra, rb in zip(nxt, cur.moments)]
    cur.width -= dv
    qq = p**cur.width
    dinv = pow(dd % qq, -1, qq)
    cur.moments = [[(x - x % p**dv) // p**dv * dinv % qq for x in row]
                   for row in num]
    up.q = qq
    up.width = cur.width
    return True


class OCMeasure:
    """Unit-ball interval data read off an eigenprojected symbol:
    mu(a + p^n Z_p) = root^{-n} * moment_0(Phi{a/p^n -> oo})."""

    def __init__(self, oc: OCSymbol, root: Padic, depth=3):
        self.oc = oc
        self.root = root
        self.p = oc.p
        self.depth = depth
        self.width = min(oc.width, oc.n_moments)
        self.shift = oc.shift

    def value(self, a, n):
        p = self.p
        if a % p == 0 or n < 1:
            raise PadicError("unit-ball intervals only")
        mom = self.oc.value_on_path(Fraction(a, p**n), None)
        m0 = mom[0] % p**self.width
        base = Padic._from_residue(p, m0, self.width).shift(self.oc.shift)
        return base * self.root**(-n)

    def total_unit_mass(self):
        acc = None
        for a in range(1, self.p):
            v = self.value(a, 1)
            acc = v if acc is None else acc + v
        return acc

    def distribution_residual(self, a, n):
        lhs = self.value(a, n)
        rhs = None
        for b in range(self.p):
            t = self.value(a + b * self.p**n, n + 1)
            rhs = t if rhs is None else rhs + t
        d = lhs - rhs
        return math.inf if d.is_zero() else d.valuation()


def specialize_measure(oc: OCSymbol, root: Padic, depth=3, order=2):
    """(interval measure, jet at s=1) from an eigenprojected symbol.

    The jet integrates log<x>^j over Z_p^x through the depth-one moment
    expansion: on a + pZ_p, log<x> = log<a> + log(1 + p z / a) as a
    polynomial in the scaled variable z, evaluated against the moments of
    Phi{a/p -> oo}; growth-class-one error accounting (one extra digit lost
    to the final division by the critical root) is recorded in the ledger.
    """
    measure = OCMeasure(oc, root, depth=depth)
    jet = _jet_from_moments(oc, root, order)
    return measure, jet


def _jet_from_moments(oc: OCSymbol, root: Padic, order):
    from .measures import LJet
    from .padics import _log_one_units, teichmuller_int

    p = oc.p
    M = oc.n_moments
    width = min(oc.width, M)
    q = p**oc.width
    sums = [Padic.zero(p) for _ in range(order + 1)]
    for a in range(1, p):
        theta = oc.value_on_path(Fraction(a, p), None)
        # G(z) = log<a + p z> = log<a> + sum (-1)^(m+1) (p/a)^m z^m / m
        w = teichmuller_int(a, p, oc.width)
        la = _log_one_units(a * pow(w, -1, q) % q - 1, p, oc.width)
        G = [la % q]
        for m in range(1, M):
            e = _vp_int(m, p)
            coef = pow(p, m - e) * pow(pow(a, m, q) * (m // p**e) % q, -1, q) % q
            if m % 2 == 0:
                coef = -coef % q
            G.append(coef)
        ebuf = max(_vp_int(m, p) for m in range(1, M))
        Gj = [1] + [0] * (M - 1)
        for j in range(order + 1):
            # integral over a + pZ_p of log<x>^j: sum_m Gj[m] * mu_m, each
            # term good mod p^(M - m + v(Gj[m])) >= p^(width - ebuf)
            acc = 0
            for m in range(M):
                if Gj[m]:
                    acc += Gj[m] * theta[m]
            prec = width if j == 0 else max(1, width - ebuf)
            val = Padic._from_residue(p, acc % p**prec, prec).shift(oc.shift)
            sums[j] = sums[j] + val
            if j < order:
                Gj = _poly_mul(Gj, G, M, q)
    coeffs = []
    for j in range(order + 1):
        c = sums[j] / root
        c = c / Padic.from_int(math.factorial(j), p, width)
        coeffs.append(c)
    ledger = {"moments": M, "width": oc.width, "claimed_abs_prec": width,
              "shift": oc.shift, "growth_class": 1,
              "projection": oc.ledger.get("residual_history")}
    return LJet(p=p, coeffs=coeffs, branch=0, ledger=ledger)


def _vp_int(k, p):
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v


def twisted_moment_critical(oc: OCSymbol, root: Padic, chi):
    """sum_a chi(a) mu(a + pZ_p) for a Teichmuller-power character mod p."""
    p = oc.p
    width = min(oc.width, oc.n_moments)
    acc = None
    for a in range(1, p):
        m0 = oc.value_on_path(Fraction(a, p), None)[0] % p**width
        base = Padic._from_residue(p, m0, width).shift(oc.shift)
        if chi.power:
            base = base * chi.value_padic(a, width)
        acc = base if acc is None else acc + base
    return acc / root

