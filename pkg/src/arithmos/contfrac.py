"""Exact continued fractions: quadratic surds, the Gauss shift, coset spaces.

The whole dynamical side of the package (generalized shifts, limiting
modular symbols, mixmaster eras) runs on the exact arithmetic in this
module, so there is no floating point anywhere below: surds are integer
triples over a square-free radicand, and period detection is literal
recurrence of the surd state (Lagrange's theorem guarantees a cycle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def _squarefree(d: int) -> bool:
    if d <= 0:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def squarefree_split(n: int) -> tuple[int, int]:
    """n = f^2 * d with d square-free; returns (f, d).  n > 0."""
    if n <= 0:
        raise ValueError("need a positive integer")
    f, d = 1, n
    k = 2
    while k * k <= d:
        while d % (k * k) == 0:
            d //= k * k
            f *= k
        k += 1
    return f, d


class QuadraticSurd:
    """Exact number (a + b*sqrt(d))/c with integers a, b, c and square-free d.

    Canonical form: gcd(a, b, c) = 1, c > 0, and b = 0 forces d = 1, so
    equality and hashing are structural.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, c: int, d: int):
        if c == 0:
            raise ValueError("denominator c must be nonzero")
        if d == 1:
            a, b = a + b, 0
        elif not _squarefree(d):
            raise ValueError(f"radicand d = {d} is not square-free")
        if b == 0:
            d = 1
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(abs(a), abs(b)), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def from_rational(cls, q) -> "QuadraticSurd":
        q = Fraction(q)
        return cls(q.numerator, 0, q.denominator, 1)

    @classmethod
    def sqrt_of(cls, n: int) -> "QuadraticSurd":
        f, d = squarefree_split(n)
        return cls(0, f, 1, d)

    # -- predicates -------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("not a rational number")
        return Fraction(self.a, self.c)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QuadraticSurd.from_rational(other)
        if not isinstance(other, QuadraticSurd):
            return NotImplemented
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __repr__(self):
        if self.b == 0:
            return f"QuadraticSurd({self.a}/{self.c})"
        return f"QuadraticSurd(({self.a}+{self.b}*sqrt({self.d}))/{self.c})"

    # -- ordering ---------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of (a + b*sqrt(d))/c (c > 0 in canonical form)."""
        a, b, d = self.a, self.b, self.d
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # Opposite signs: compare a^2 with b^2 d.
        if a * a > b * b * d:
            return (a > 0) - (a < 0)
        if a * a < b * b * d:
            return (b > 0) - (b < 0)
        return 0

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    # -- arithmetic (same radicand, or rational second operand) -----------

    def _coerce(self, other) -> "QuadraticSurd":
        if isinstance(other, QuadraticSurd):
            if other.b != 0 and self.b != 0 and other.d != self.d:
                raise ValueError("mixed radicands")
            return other
        return QuadraticSurd.from_rational(other)

    def __add__(self, other):
        o = self._coerce(other)
        d = self.d if self.b else o.d
        return QuadraticSurd(self.a * o.c + o.a * self.c,
                             self.b * o.c + o.b * self.c,
                             self.c * o.c, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.c, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        d = self.d if self.b else o.d
        a = self.a * o.a + self.b * o.b * d
        b = self.a * o.b + self.b * o.a
        return QuadraticSurd(a, b, self.c * o.c, d)

    __rmul__ = __mul__

    def reciprocal(self) -> "QuadraticSurd":
        a, b, c, d = self.a, self.b, self.c, self.d
        norm = a * a - b * b * d
        if norm == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return QuadraticSurd(a * c, -b * c, norm, d)

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.a, -self.b, self.c, self.d)

    # -- floor / shift ----------------------------------------------------

    def __float__(self) -> float:
        return (self.a + self.b * math.sqrt(self.d)) / self.c

    def floor(self) -> int:
        n = math.floor(float(self))
        # Exact correction of the float estimate.
        while (self - n).sign() < 0:
            n -= 1
        while (self - (n + 1)).sign() >= 0:
            n += 1
        return n

    def moebius(self, m) -> "QuadraticSurd":
        """Fractional-linear image (p*x + q)/(r*x + s) for m = ((p,q),(r,s))."""
        (p, q), (r, s) = m
        num = self * p + q
        den = self * r + s
        if den.sign() == 0:
            raise ZeroDivisionError("pole of the fractional-linear map")
        return num / den

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @classmethod
    def from_json(cls, obj) -> "QuadraticSurd":
        return cls(obj["a"], obj["b"], obj["c"], obj["d"])


@dataclass(frozen=True)
class ContinuedFraction:
    """Digits of an expansion: finite preperiod plus (possibly empty) period."""

    preperiod: tuple
    period: tuple

    def __post_init__(self):
        for k in self.preperiod + self.period:
            if k < 1:
                raise ValueError("continued-fraction digits must be >= 1")

    @property
    def is_rational(self) -> bool:
        return not self.period

    def digit(self, i: int) -> int:
        """k_{i+1}: 0-based digit access, cycling through the period."""
        if i < len(self.preperiod):
            return self.preperiod[i]
        if not self.period:
            raise IndexError("finite expansion exhausted")
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def digits(self, n: int) -> list:
        return [self.digit(i) for i in range(n)]

    def __len__(self):
        if self.period:
            raise ValueError("infinite expansion")
        return len(self.preperiod)

    def value(self):
        """Exact value: Fraction if rational, QuadraticSurd otherwise."""
        if self.is_rational:
            val = Fraction(0)
            for k in reversed(self.preperiod):
                val = Fraction(1, 1) / (k + val)
            return val
        # Purely periodic tail: fixed point in (0,1) of the period matrix.
        (p0, p1), (q0, q1) = _digit_matrix_product(self.period)
        # y = (p0 y + p1)/(q0 y + q1)  =>  q0 y^2 + (q1 - p0) y - p1 = 0.
        disc = (q1 - p0) ** 2 + 4 * q0 * p1
        f, d = squarefree_split(disc)
        root = QuadraticSurd(p0 - q1, f, 2 * q0, d)
        if not (root.sign() > 0 and (root - 1).sign() < 0):
            root = QuadraticSurd(p0 - q1, -f, 2 * q0, d)
        y = root
        for k in reversed(self.preperiod):
            y = (QuadraticSurd.from_rational(k) + y).reciprocal()
        return y

    def to_json(self) -> dict:
        return {"preperiod": list(self.preperiod), "period": list(self.period)}

    @classmethod
    def from_json(cls, obj) -> "ContinuedFraction":
        return cls(tuple(obj["preperiod"]), tuple(obj["period"]))


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)


def _digit_matrix(k: int):
    return ((0, 1), (1, k))


def _mat_mul(m1, m2):
    (a, b), (c, d) = m1
    (e, f), (g, h) = m2
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def _digit_matrix_product(digits):
    m = ((1, 0), (0, 1))
    for k in digits:
        m = _mat_mul(m, _digit_matrix(k))
    return m


def cf_expand(x) -> ContinuedFraction:
    """Continued-fraction digits of x (rational, Fraction, or QuadraticSurd).

    Values outside (0, 1) are reduced by dropping the integer part; the
    expansion of the zero fractional part is empty.  For surds the period
    is detected exactly by recurrence of the shifted surd state; rationals
    terminate in the canonical form whose last digit is not 1 (greedy
    division produces it directly).
    """
    if not isinstance(x, QuadraticSurd):
        x = QuadraticSurd.from_rational(x)
    x = x - x.floor()
    if x.sign() == 0:
        return ContinuedFraction((), ())
    if x.is_rational:
        digits = []
        r = x.as_fraction()
        while r != 0:
            inv = 1 / r
            k = inv.numerator // inv.denominator
            digits.append(k)
            r = inv - k
        return ContinuedFraction(tuple(digits), ())
    digits = []
    seen: dict = {}
    state = x
    while state not in seen:
        seen[state] = len(digits)
        inv = state.reciprocal()
        k = inv.floor()
        digits.append(k)
        state = inv - k
    start = seen[state]
    return ContinuedFraction(tuple(digits[:start]), tuple(digits[start:]))


def convergents(cf: ContinuedFraction, n: int):
    """First n convergents p_k/q_k of the expansion.

    Returns (list of Convergent, truncated_flag); the flag is set when a
    finite expansion runs out before n digits.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    out = []
    p_prev, p_cur = 1, 0   # p_{-1}, p_0
    q_prev, q_cur = 0, 1   # q_{-1}, q_0
    truncated = False
    for i in range(n):
        try:
            k = cf.digit(i)
        except IndexError:
            truncated = True
            break
        p_prev, p_cur = p_cur, k * p_cur + p_prev
        q_prev, q_cur = q_cur, k * q_cur + q_prev
        out.append(Convergent(i + 1, p_cur, q_cur))
    return out, truncated


def gauss_shift(x: QuadraticSurd) -> QuadraticSurd:
    """T(x) = 1/x - floor(1/x) on (0, 1), exactly."""
    if not isinstance(x, QuadraticSurd):
        x = QuadraticSurd.from_rational(x)
    if x.sign() <= 0 or (x - 1).sign() >= 0:
        raise ValueError("gauss_shift needs 0 < x < 1")
    inv = x.reciprocal()
    return inv - inv.floor()


class CosetSpace:
    """P^1(Z/N) with the left action of integer 2x2 matrices mod N.

    Points are stored as canonical pairs (u, v); matrices act on column
    vectors, M.(u:v) = (au+bv : cu+dv), so scalar matrices act trivially
    and the PSL/PGL distinction is invisible, which pins the sign
    convention to the explicit mixmaster permutations.  Action tables are
    cached per matrix residue.
    """

    def __init__(self, modulus: int):
        if modulus < 1:
            raise ValueError("modulus must be >= 1")
        self.modulus = modulus
        pts = set()
        for u in range(modulus):
            for v in range(modulus):
                p = self._reduce(u, v)
                if p is not None:
                    pts.add(p)
        if modulus == 1:
            pts = {(0, 1)}
        self.points = sorted(pts)
        self.index = {p: i for i, p in enumerate(self.points)}
        self._tables: dict = {}

    def _reduce(self, u: int, v: int):
        """Canonical representative of (u : v), or None if not primitive."""
        n = self.modulus
        if n == 1:
            return (0, 1)
        u %= n
        v %= n
        if math.gcd(math.gcd(u, v), n) != 1:
            return None
        # Scale by every unit and keep the lexicographic minimum; N here is
        # small (a congruence level), so brute force is the simple choice.
        best = None
        for t in range(1, n):
            if math.gcd(t, n) != 1:
                continue
            cand = ((u * t) % n, (v * t) % n)
            if best is None or cand < best:
                best = cand
        return best

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(range(len(self.points)))

    def point_label(self, i: int) -> str:
        """Labels 0, 1, ..., 'inf' matching P^1: (u:v) with v invertible is
        u/v, and (1:0)-types print as 'inf'."""
        u, v = self.points[i]
        n = self.modulus
        if math.gcd(v, n) == 1:
            vinv = pow(v, -1, n) if n > 1 else 1
            return str((u * vinv) % n) if n > 1 else "0"
        if math.gcd(u, n) == 1:
            uinv = pow(u, -1, n)
            if (v * uinv) % n == 0:
                return "inf"
        return f"({u}:{v})"

    def label_index(self, label: str) -> int:
        for i in range(len(self.points)):
            if self.point_label(i) == label:
                return i
        raise KeyError(label)

    def action_table(self, m) -> tuple:
        """Permutation i -> index of M.point_i for the matrix m (mod N)."""
        n = self.modulus
        (a, b), (c, d) = m
        key = (a % n, b % n, c % n, d % n)
        cached = self._tables.get(key)
        if cached is not None:
            return cached
        if n > 1 and math.gcd((a * d - b * c) % n, n) != 1:
            raise ValueError("matrix not invertible mod N")
        table = []
        for (u, v) in self.points:
            p = self._reduce(a * u + b * v, c * u + d * v)
            if p is None:
                raise ValueError("action table inconsistent: non-primitive image")
            table.append(self.index[p])
        table = tuple(table)
        self._tables[key] = table
        return table

    def act(self, m, i: int) -> int:
        return self.action_table(m)[i]

    @property
    def identity_coset(self) -> int:
        """The coset fixed by Gamma_0(N): the point (1 : 0), i.e. 'inf'."""
        return self.index[self._reduce(1, 0)]

    def sigma_table(self) -> tuple:
        """Order-2 generator S = ((0,-1),(1,0)) as a permutation."""
        return self.action_table(((0, -1), (1, 0)))

    def tau_table(self) -> tuple:
        """Order-3 generator ST = ((0,-1),(1,1)) as a permutation."""
        return self.action_table(((0, -1), (1, 1)))

    def orbits(self, table) -> list:
        seen = [False] * len(self.points)
        orbits = []
        for i in range(len(self.points)):
            if seen[i]:
                continue
            orbit = []
            j = i
            while not seen[j]:
                seen[j] = True
                orbit.append(j)
                j = table[j]
            orbits.append(orbit)
        return orbits


def shift_matrix(k: int):
    """The matrix ((-k, 1), (1, 0)) carried by one step of the shift."""
    return ((-k, 1), (1, 0))


def generalized_shift(x: QuadraticSurd, s: int, space: CosetSpace):
    """One step of the skew shift: (x, s) -> (1/x - k, ((-k,1),(1,0)).s)."""
    if not isinstance(x, QuadraticSurd):
        x = QuadraticSurd.from_rational(x)
    if x.sign() <= 0 or (x - 1).sign() >= 0:
        raise ValueError("generalized_shift needs 0 < x < 1")
    inv = x.reciprocal()
    k = inv.floor()
    return inv - k, space.act(shift_matrix(k), s), k


def surd_period_matrix(x: QuadraticSurd):
    """Period data of a quadratic irrational: (g, ell, Lambda_g, strip).

    The preperiod is stripped first (its length is returned as ``strip``);
    g is the product of the digit matrices ((0,1),(1,k_i)) over one period
    of the purely periodic part, ell the period length, and Lambda_g the
    eigenvalue of g of modulus > 1, returned as an exact QuadraticSurd.
    """
    cf = cf_expand(x)
    if cf.is_rational:
        raise ValueError("rational input: no period")
    strip = len(cf.preperiod)
    ell = len(cf.period)
    g = _digit_matrix_product(cf.period)
    (a, b), (c, d) = g
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4 * det
    f, rad = squarefree_split(disc)
    lam_plus = QuadraticSurd(tr, f, 2, rad)
    lam_minus = QuadraticSurd(tr, -f, 2, rad)
    lam = lam_plus if abs(float(lam_plus)) >= abs(float(lam_minus)) else lam_minus
    if lam.sign() < 0:
        lam = -lam
    return g, ell, lam, strip


def morita_theta_action(theta, g):
    """theta' = (a theta + b)/(c theta + d): the fractional-linear action on
    the modulus of a noncommutative torus / pseudo-lattice Z + Z theta.

    Exact for rational or surd theta; floats go through float arithmetic.
    """
    (a, b), (c, d) = g
    if isinstance(theta, QuadraticSurd):
        return theta.moebius(g)
    if isinstance(theta, Fraction) or isinstance(theta, int):
        theta = Fraction(theta)
        den = c * theta + d
        if den == 0:
            raise ZeroDivisionError("pole of the fractional-linear map")
        return (a * theta + b) / den
    den = c * theta + d
    if den == 0:
        raise ZeroDivisionError("pole of the fractional-linear map")
    return (a * theta + b) / den
