"""Coset homology of modular curves and limiting modular symbols.

The homology presentation is pure integer linear algebra over the finite
coset space P = Gamma/Gamma_0(N): relation matrices collapse sigma- and
tau-orbits, and the kernel of their stack realizes the cuspidal classes.
Limiting modular symbols ride on the exact shift dynamics of
:mod:`arithmos.contfrac`; the Levy boundary average pairs an adaptive
cylinder integration of the continued-fraction expansion against an
independent lattice-point sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import snf
from .contfrac import (ContinuedFraction, CosetSpace, QuadraticSurd, cf_expand,
                       generalized_shift, shift_matrix, surd_period_matrix)


@dataclass
class SymbolVector:
    """Coefficient vector over the coset space (exact entries)."""

    space: CosetSpace
    coefficients: tuple

    def __post_init__(self):
        if len(self.coefficients) != len(self.space):
            raise ValueError("coefficient length must match |P|")
        object.__setattr__(self, "coefficients", tuple(self.coefficients))

    @classmethod
    def delta(cls, space: CosetSpace, s: int) -> "SymbolVector":
        coeffs = [0] * len(space)
        coeffs[s] = 1
        return cls(space, tuple(coeffs))

    def __add__(self, other: "SymbolVector") -> "SymbolVector":
        return SymbolVector(self.space,
                            tuple(a + b for a, b in
                                  zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "SymbolVector") -> "SymbolVector":
        return SymbolVector(self.space,
                            tuple(a - b for a, b in
                                  zip(self.coefficients, other.coefficients)))

    def __mul__(self, scalar) -> "SymbolVector":
        return SymbolVector(self.space,
                            tuple(c * scalar for c in self.coefficients))

    __rmul__ = __mul__

    def sigma_reindexed(self) -> "SymbolVector":
        table = self.space.sigma_table()
        out = [0] * len(self.space)
        for i, c in enumerate(self.coefficients):
            out[table[i]] = c
        return SymbolVector(self.space, tuple(out))

    def antisymmetrized(self) -> "SymbolVector":
        return self - self.sigma_reindexed()

    def norm1(self) -> float:
        return float(sum(abs(c) for c in self.coefficients))


def intersection_number(x: SymbolVector, s: int) -> int:
    """Pairing of the class x with the coset symbol at s: lambda_s minus
    the coefficient at the sigma-image of s."""
    sig = x.space.sigma_table()
    return x.coefficients[s] - x.coefficients[sig[s]]


# ---------------------------------------------------------------------------
# Homology presentation.

@dataclass
class HomologyPresentation:
    space: CosetSpace
    beta_i: list          # |P_I| x |P| integer matrix (sigma-orbit sums)
    beta_r: list          # |P_R| x |P| integer matrix (tau-orbit sums)
    kernel: list          # list of SymbolVector
    torsion_free: bool

    @property
    def rank(self) -> int:
        return len(self.kernel)

    def counts(self) -> dict:
        return {"P": len(self.space), "P_I": len(self.beta_i),
                "P_R": len(self.beta_r)}

    def class_coordinates(self, coefficients) -> tuple:
        """Coordinates of a coefficient vector in Q[P] modulo the sigma- and
        tau-relations (the Manin-symbol quotient presenting the relative
        homology).  Two delta-count vectors represent the same limiting
        class iff these coordinates agree."""
        rref, pivots = self._relation_rref()
        v = [Fraction(c) for c in coefficients]
        for row, col in zip(rref, pivots):
            if v[col]:
                factor = v[col]
                v = [a - factor * b for a, b in zip(v, row)]
        free_cols = [j for j in range(len(self.space)) if j not in pivots]
        return tuple(v[j] for j in free_cols)

    def _relation_rref(self):
        cached = getattr(self, "_rref_cache", None)
        if cached is not None:
            return cached
        rows = [[Fraction(x) for x in row] for row in self.beta_i + self.beta_r]
        pivots = []
        rref = []
        for col in range(len(self.space)):
            pivot_row = next((r for r in rows if r[col] != 0), None)
            if pivot_row is None:
                continue
            rows.remove(pivot_row)
            pivot_row = [x / pivot_row[col] for x in pivot_row]
            rows = [[a - row[col] * b for a, b in zip(row, pivot_row)]
                    for row in rows]
            rref = [[a - row[col] * b for a, b in zip(row, pivot_row)]
                    for row in rref]
            rref.append(pivot_row)
            pivots.append(col)
        self._rref_cache = (rref, pivots)
        return self._rref_cache


def homology_presentation(space: CosetSpace) -> HomologyPresentation:
    """Relation matrices and cuspidal kernel of the four-term sequence
    0 -> H^cusps -> Z^|P| -> Z^|P_I| + Z^|P_R| -> Z -> 0.

    beta_I rows sum coefficients over sigma-orbits, beta_R over tau-orbits;
    the kernel is computed by exact Smith reduction.  The expected rank
    |P| - |P_I| - |P_R| + 1 and torsion-freeness of the quotient are
    checked and recorded.
    """
    npts = len(space)
    sigma_orbits = space.orbits(space.sigma_table())
    tau_orbits = space.orbits(space.tau_table())

    def orbit_rows(orbits):
        rows = []
        for orbit in orbits:
            row = [0] * npts
            for i in orbit:
                row[i] += 1
            rows.append(row)
        return rows

    beta_i = orbit_rows(sigma_orbits)
    beta_r = orbit_rows(tau_orbits)
    stacked = beta_i + beta_r
    basis = snf.kernel_basis(stacked)
    expected = npts - len(beta_i) - len(beta_r) + 1
    if len(basis) != expected:
        raise ArithmeticError(
            f"kernel rank {len(basis)} != Euler count {expected}: "
            "inconsistent action table")
    divisors = snf.elementary_divisors(stacked)
    torsion_free = all(d == 1 for d in divisors)
    kernel = [SymbolVector(space, tuple(v)) for v in basis]
    for vec in kernel:
        for row in stacked:
            if sum(a * b for a, b in zip(row, vec.coefficients)) != 0:
                raise AssertionError("kernel vector not annihilated")
    return HomologyPresentation(space, beta_i, beta_r, kernel, torsion_free)


def gamma0_genus_data(level: int) -> dict:
    """Independent arithmetic oracle for Gamma_0(N): index, elliptic point
    counts, cusps, and genus by the classical formulas."""
    if level < 1:
        raise ValueError("level must be >= 1")

    def prime_factors(n):
        out = []
        k = 2
        while k * k <= n:
            if n % k == 0:
                out.append(k)
                while n % k == 0:
                    n //= k
            k += 1
        if n > 1:
            out.append(n)
        return out

    primes = prime_factors(level)
    index = level
    for p in primes:
        index = index // p * (p + 1)

    def legendre_like(a, p):
        if p == 2:
            return None
        return pow(a % p, (p - 1) // 2, p)

    if level % 4 == 0:
        nu2 = 0
    else:
        nu2 = 1
        for p in primes:
            if p == 2:
                continue
            nu2 *= 1 + (1 if legendre_like(-1, p) == 1 else -1)
    if level % 9 == 0:
        nu3 = 0
    else:
        nu3 = 1
        for p in primes:
            if p == 3:
                continue
            if p == 2:
                nu3 *= 0
            else:
                nu3 *= 1 + (1 if legendre_like(-3, p) == 1 else -1)
    cusps = 0
    for d in range(1, level + 1):
        if level % d == 0:
            g = math.gcd(d, level // d)
            phi = sum(1 for t in range(1, g + 1) if math.gcd(t, g) == 1)
            cusps += phi
    genus = 1 + Fraction(index, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) \
        - Fraction(cusps, 2)
    if genus.denominator != 1:
        raise ArithmeticError("non-integral genus: formula misapplied")
    return {"index": index, "nu2": nu2, "nu3": nu3, "cusps": cusps,
            "genus": int(genus), "expected_kernel_rank": 2 * int(genus) + cusps - 1}


# ---------------------------------------------------------------------------
# Limiting modular symbols.

@dataclass
class LimitingSymbol:
    """Birkhoff data of a limiting modular symbol.

    ``counts[s]`` is the number of visits to coset s; the limiting class is
    counts/(lyapunov * steps).  For periodic inputs the closed form also
    carries the hyperbolic matrix data (ell, Lambda_g), and both published
    normalizations are exposed: by lyapunov*ell and by |log Lambda_g|
    (their ratio is exactly 2).
    """

    space: CosetSpace
    counts: tuple
    steps: int
    lyapunov: float
    ell: int | None = None
    lambda_g: float | None = None
    strip: int = 0
    skew_period: int | None = None
    skew_counts: tuple | None = None

    def vector(self) -> list:
        scale = self.lyapunov * self.steps
        return [c / scale for c in self.counts]

    def vector_exact(self) -> list:
        """counts/steps as exact fractions (the lyapunov scale is left out,
        being irrational for surd inputs)."""
        return [Fraction(c, self.steps) for c in self.counts]

    def vector_log_lambda(self) -> list:
        if self.lambda_g is None:
            raise ValueError("no hyperbolic matrix data: not a periodic input")
        scale = abs(math.log(self.lambda_g))
        return [c / scale for c in self.counts]

    def normalization_ratio(self) -> float:
        if self.lambda_g is None:
            raise ValueError("no hyperbolic matrix data")
        return (self.lyapunov * self.ell) / abs(math.log(self.lambda_g))

    def symbol_vector(self) -> SymbolVector:
        return SymbolVector(self.space, self.counts)

    def class_vector(self, presentation: "HomologyPresentation") -> tuple:
        """Exact homology-class coordinates of counts/steps (the lyapunov
        factor is common to any comparison, so it is left out)."""
        coords = presentation.class_coordinates(self.counts)
        return tuple(c / self.steps for c in coords)

    def skew_vector_exact(self) -> list:
        """Visit frequencies over one full recurrence period of (x, s),
        i.e. the exact value of the Birkhoff average at any multiple of
        ``skew_period``."""
        if self.skew_counts is None:
            raise ValueError("no skew-period data: not a periodic input")
        return [Fraction(c, self.skew_period) for c in self.skew_counts]

    def delta_closes(self) -> bool:
        """Whether the antisymmetrized count vector pairs to zero with the
        relation rows, i.e. the period sum closes a cycle."""
        vec = self.symbol_vector().antisymmetrized()
        pres = homology_presentation(self.space)
        for row in pres.beta_i + pres.beta_r:
            if sum(a * b for a, b in zip(row, vec.coefficients)) != 0:
                return False
        return True


def _coset_after_preperiod(cf: ContinuedFraction, space: CosetSpace, t0: int) -> int:
    s = t0
    for k in cf.preperiod:
        s = space.act(shift_matrix(k), s)
    return s


def _permutation_order(table) -> int:
    n = len(table)
    ident = tuple(range(n))
    perm = tuple(table)
    cur = perm
    order = 1
    while cur != ident:
        cur = tuple(perm[i] for i in cur)
        order += 1
    return order


def _skew_period(space: CosetSpace, period_digits, ell: int) -> int:
    table = tuple(range(len(space)))
    for k in period_digits:
        step = space.action_table(shift_matrix(k))
        table = tuple(step[i] for i in table)
    return ell * _permutation_order(table)


def limiting_symbol_closed(beta: QuadraticSurd, space: CosetSpace,
                           t0: int | None = None) -> LimitingSymbol:
    """Closed form of the limiting modular symbol of a quadratic irrational.

    The preperiod is stripped by advancing the starting coset; one period
    of the skew shift is then traversed, and the visit counts are scaled
    by lyapunov * ell with lyapunov = 2 log(Lambda_g)/ell.
    """
    if not isinstance(beta, QuadraticSurd):
        raise TypeError("need a QuadraticSurd; rationals end in a cusp")
    if beta.is_rational:
        raise ValueError("rational input: the limiting symbol is a cusp class")
    if t0 is None:
        t0 = space.identity_coset
    cf = cf_expand(beta)
    g, ell, lam_g, strip = surd_period_matrix(beta)
    tail = ContinuedFraction((), cf.period).value()
    s = _coset_after_preperiod(cf, space, t0)
    skew = _skew_period(space, cf.period, ell)
    counts = [0] * len(space)
    skew_counts = [0] * len(space)
    x = tail
    for step in range(skew):
        x, s, _ = generalized_shift(x, s, space)
        if step < ell:
            counts[s] += 1
        skew_counts[s] += 1
    lam_val = float(lam_g)
    lyap = 2.0 * math.log(lam_val) / ell
    return LimitingSymbol(space, tuple(counts), ell, lyap,
                          ell=ell, lambda_g=lam_val, strip=strip,
                          skew_period=skew, skew_counts=tuple(skew_counts))


def limiting_symbol_ergodic(beta, space: CosetSpace, iterations: int,
                            t0: int | None = None) -> LimitingSymbol:
    """Birkhoff average of the coset indicator along the exact shift orbit.

    ``beta`` may be a QuadraticSurd (exact orbit; lyapunov from its period
    matrix) or an iterable of digits (lyapunov from the exact growth of
    the convergent denominators).
    """
    if iterations < 1:
        raise ValueError("need iterations >= 1")
    if t0 is None:
        t0 = space.identity_coset
    counts = [0] * len(space)
    if isinstance(beta, QuadraticSurd):
        cf = cf_expand(beta)
        _, ell, lam_g, _ = surd_period_matrix(beta)
        s = _coset_after_preperiod(cf, space, t0)
        x = ContinuedFraction((), cf.period).value()
        for _ in range(iterations):
            x, s, _ = generalized_shift(x, s, space)
            counts[s] += 1
        lyap = 2.0 * math.log(float(lam_g)) / ell
        return LimitingSymbol(space, tuple(counts), iterations, lyap,
                              ell=ell, lambda_g=float(lam_g),
                              strip=len(cf.preperiod),
                              skew_period=_skew_period(space, cf.period, ell))
    digits = list(beta)[:iterations]
    if len(digits) < iterations:
        raise ValueError("digit stream shorter than the iteration count")
    s = t0
    log_q_prev, log_q = None, 0.0   # log q_0 = 0
    for k in digits:
        s = space.act(shift_matrix(k), s)
        counts[s] += 1
        if log_q_prev is None:
            log_q_prev, log_q = log_q, math.log(k)
        else:
            log_q_prev, log_q = log_q, log_q + math.log(
                k + math.exp(log_q_prev - log_q))
    lyap = 2.0 * log_q / len(digits)
    return LimitingSymbol(space, tuple(counts), iterations, lyap)


# ---------------------------------------------------------------------------
# Levy boundary average.

@dataclass
class LevyResult:
    lhs: float
    lhs_error: float
    rhs: float
    rhs_error: float

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def combined_error(self) -> float:
        return self.lhs_error + self.rhs_error


def _fib_tail_bound(bound: float, eps: float, q_cur: int, q_prev: int) -> float:
    # sum over future steps of bound * q^(-eps) with the slowest growth
    # q_{n+j} >= F_{j+1} q_n + F_j q_{n-1} (all-ones continuation).
    total = 0.0
    fa, fb = 1, 1   # F_1, F_2
    for _ in range(200):
        q = fb * q_cur + fa * q_prev
        term = bound * q ** (-eps)
        total += term
        if term < 1e-4 * total + 1e-300:
            break
        fa, fb = fb, fa + fb
    return total


def _ell_function(f, x: Fraction, bound: float, eps: float) -> float:
    # sum_k f(q_k, q_{k-1}) over the finite expansion of a rational point.
    num, den = x.numerator, x.denominator
    total = 0.0
    q_prev, q = 0, 1
    a, b = num, den
    while a:
        k = b // a
        a, b = b % a, a
        q_prev, q = q, k * q + q_prev
        total += f(q, q_prev)
    return total


def levy_average(f, decay: tuple, lhs_tol: float = 1e-6,
                 rhs_cutoff: int = 3000, max_leaves: int = 500000) -> LevyResult:
    """Both sides of the Levy identity, each with an error estimate.

    lhs: integral over (0,1) of sum_k f(q_k, q_{k-1}) by adaptive
    subdivision into continued-fraction cylinders; within a leaf the
    first-n terms are constant and the remainder is sampled at an exact
    rational midpoint, with the all-ones growth bound controlling the
    variation.  rhs: lattice sum over *ordered* coprime pairs (a, b) of
    f(max, min)/(max (a+b)) up to ``rhs_cutoff``, i.e. pairs with q > q'
    enter twice and (1, 1) once.  The doubling is forced by the two
    continued-fraction representations of q/q' (final digit 1 or not):
    each gives a cylinder of measure 1/(q(q+q')) carrying the pair, so
    the unordered convention would undercount every q > q' term by half
    (checked independently by Monte Carlo integration in the tests).

    ``decay`` = (bound, eps) declares |f(q, q')| <= bound * q**(-eps);
    eps must exceed 1 for usable cutoffs.
    """
    bound, eps = decay
    if eps <= 1.0:
        raise ValueError("declared decay too slow: need eps > 1")

    # ---- lhs: adaptive cylinder tree ----
    lhs = 0.0
    lhs_err = 0.0
    leaves = 0
    kcap = 32
    # Work items carry the convergent state of the cylinder's digit prefix:
    # (p_prev, p, q_prev, q).  The root covers (0, 1) split at first digits
    # 1..kcap plus the squeeze region of first digits > kcap.

    def child_state(state, k):
        p_prev, p, q_prev, q = state
        return (p, k * p + p_prev, q, k * q + q_prev)

    root = (1, 0, 0, 1)             # (p_{-1}, p_0, q_{-1}, q_0)
    work = [child_state(root, k) for k in range(1, kcap + 1)]

    def squeeze(state):
        # region of the cylinder whose next digit exceeds kcap
        p_prev, p, q_prev, q = state
        lo = Fraction(p, q)
        edge = Fraction(p * (kcap + 1) + p_prev, q * (kcap + 1) + q_prev)
        a, b = sorted((lo, edge))
        mid = (a + b) / 2
        length = float(b - a)
        tail = _fib_tail_bound(bound, eps, (kcap + 1) * q, q) \
            + bound * float((kcap + 1) * q) ** (-eps)
        return length, mid, tail

    length0, mid0, tail0 = squeeze(root)
    lhs += length0 * _ell_function(f, mid0, bound, eps)
    lhs_err += length0 * 2.0 * tail0

    while work:
        state = work.pop()
        if leaves > max_leaves:
            raise ArithmeticError("cylinder budget exceeded; loosen lhs_tol")
        p_prev, p, q_prev, q = state
        lo = Fraction(p, q)
        hi = Fraction(p + p_prev, q + q_prev)
        length = float(abs(hi - lo))
        tail = _fib_tail_bound(bound, eps, q, q_prev)
        if tail <= lhs_tol or length * tail < 1e-18:
            mid = (lo + hi) / 2
            lhs += length * _ell_function(f, mid, bound, eps)
            lhs_err += length * 2.0 * tail
            leaves += 1
            continue
        for k in range(1, kcap + 1):
            work.append(child_state(state, k))
        slen, smid, stail = squeeze(state)
        lhs += slen * _ell_function(f, smid, bound, eps)
        lhs_err += slen * 2.0 * stail
        leaves += 1

    # ---- rhs: ordered coprime lattice sum (blocked numpy gcd sieve) ----
    import numpy as np
    rhs = f(1, 1) / 2.0
    block = 512
    for q0 in range(2, rhs_cutoff + 1, block):
        qs = np.arange(q0, min(q0 + block, rhs_cutoff + 1))
        qp = np.arange(1, qs[-1])
        gg = np.gcd(qs[:, None], qp[None, :])
        mask = (qp[None, :] < qs[:, None]) & (gg == 1)
        qq, pp = np.broadcast_arrays(qs[:, None], qp[None, :])
        sel_q = qq[mask].astype(float)
        sel_p = pp[mask].astype(float)
        try:
            vals = np.asarray(f(sel_q, sel_p), dtype=float)
            if vals.shape != sel_q.shape:
                raise TypeError
        except (TypeError, ValueError):
            vals = np.array([f(int(a), int(b)) for a, b in zip(sel_q, sel_p)])
        # (q, q') and (q', q) both occur as ordered pairs
        rhs += 2.0 * float(np.sum(vals / (sel_q * (sel_q + sel_p))))
    rhs_err = 2.0 * bound * rhs_cutoff ** (1.0 - eps) / (eps - 1.0)
    return LevyResult(lhs, lhs_err, rhs, rhs_err)
