"""Schottky groups on P^1(C), hyperbolic geodesics, and Green functions.

Conventions fixed here and used throughout:

* Points of P^1(C) are complex numbers or INF; internally every cross-ratio
  runs through projective pairs (x : w), so orbit points falling on or near
  infinity cost nothing special.
* The published cross-ratio is <a,b,c,d> = (a-b)(c-d)/((a-d)(c-b)).  The
  quantity whose log-modulus equals minus an oriented geodesic distance is
  the middle-swapped arrangement K(a,b,c,d) = <a,c,b,d> =
  (a-c)(b-d)/((a-d)(b-c)); the orientation was frozen against the axis
  configuration (x, y, 0, inf), where K gives log(x/y) exactly.  All Green
  summands use K.
* Third-kind differentials are summed in the convergent per-term pairing
  1/(z - h a) - 1/(z - h b); the literal slot-order differentiation of the
  published cross-ratio produces a divergent constant-term sum, and the
  adopted pairing is validated against the genus-1 closed form.
* Letters 0..g-1 are the generators, g..2g-1 their inverses; reduced words
  never follow a letter with its inverse.  For a marked group, generator k
  maps the interior of circle C_k to the exterior of C_{k+g}, so the word
  disks nest and their radius sums (shells) gate every orbit sum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

INF = complex("inf")


def _is_inf(z) -> bool:
    return z == INF or (isinstance(z, complex) and
                        (math.isinf(z.real) or math.isinf(z.imag)))


def _pair(z):
    """Projective representative (x, w) of a point of P^1(C)."""
    if _is_inf(z):
        return (1.0 + 0.0j, 0.0j)
    return (complex(z), 1.0 + 0.0j)


def _pdiff(p, q):
    # "p - q" in projective pairing: x_p w_q - x_q w_p
    return p[0] * q[1] - q[0] * p[1]


class MoebiusMap:
    """2x2 complex matrix acting on P^1(C), normalized to det = 1.

    Caches fixed points (attracting z_plus, repelling z_minus) and the
    multiplier kappa with |kappa| > 1 for loxodromic elements.
    """

    __slots__ = ("mat", "_fixed")

    def __init__(self, mat):
        m = np.asarray(mat, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("need a 2x2 matrix")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det == 0:
            raise ValueError("singular matrix")
        self.mat = m / cmath.sqrt(det)
        self._fixed = None

    @classmethod
    def scaling(cls, q: complex) -> "MoebiusMap":
        """z -> q z (the genus-1 building block)."""
        return cls([[q, 0.0], [0.0, 1.0]])

    @classmethod
    def circle_pairing(cls, c1: complex, r1: float, c2: complex,
                       r2: float) -> "MoebiusMap":
        """The map z -> c2 + r1 r2/(z - c1), which carries the circle
        (c1, r1) onto (c2, r2) and the interior of the first to the
        exterior of the second."""
        return cls([[c2, r1 * r2 - c1 * c2], [1.0, -c1]])

    def trace(self) -> complex:
        return self.mat[0, 0] + self.mat[1, 1]

    def inverse(self) -> "MoebiusMap":
        (a, b), (c, d) = self.mat
        return MoebiusMap([[d, -b], [-c, a]])

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(self.mat @ other.mat)

    def __call__(self, z):
        (a, b), (c, d) = self.mat
        x, w = _pair(z)
        xn, wn = a * x + b * w, c * x + d * w
        if wn == 0:
            return INF
        return xn / wn

    def derivative(self, z: complex) -> complex:
        (a, b), (c, d) = self.mat
        return 1.0 / (c * z + d) ** 2

    @property
    def is_loxodromic(self) -> bool:
        t2 = self.trace() ** 2
        # elliptic/parabolic iff trace^2 in [0, 4]
        return not (abs(t2.imag) < 1e-12 and -1e-12 <= t2.real <= 4.0 + 1e-12)

    def fixed_points(self):
        """(z_plus, z_minus, kappa): attracting, repelling, multiplier.

        Roots of c z^2 + (d - a) z - b by the quadratic formula; the
        attracting root is the one with |derivative| < 1.
        """
        if self._fixed is not None:
            return self._fixed
        (a, b), (c, d) = self.mat
        if abs(c) < 1e-300:
            zf = b / (d - a) if a != d else INF
            if abs(a / d) > 1.0:
                plus, minus = INF, zf
                kappa = (a / d)
            else:
                plus, minus = zf, INF
                kappa = (d / a)
            self._fixed = (plus, minus, kappa)
            return self._fixed
        disc = cmath.sqrt((a - d) ** 2 + 4.0 * b * c)
        z1 = ((a - d) + disc) / (2.0 * c)
        z2 = ((a - d) - disc) / (2.0 * c)
        d1 = abs(self.derivative(z1))
        if d1 < 1.0:
            plus, minus = z1, z2
        else:
            plus, minus = z2, z1
        kappa = 1.0 / self.derivative(plus)
        self._fixed = (plus, minus, kappa)
        return self._fixed

    def apply_h3(self, z: complex, y: float):
        """Isometric action on upper half space H^3 (points (z, y), y > 0)."""
        (a, b), (c, d) = self.mat
        den = abs(c * z + d) ** 2 + abs(c) ** 2 * y ** 2
        zn = ((a * z + b) * (c * z + d).conjugate() + a * c.conjugate() * y ** 2) / den
        yn = y / den
        return zn, yn

    def __repr__(self):
        return f"MoebiusMap({self.mat.tolist()})"


# ---------------------------------------------------------------------------
# Cross-ratios and geodesics.

def cross_ratio(a, b, c, d) -> complex:
    """<a,b,c,d> = (a-b)(c-d)/((a-d)(c-b)), with infinity by limit rules."""
    pa, pb, pc, pd = _pair(a), _pair(b), _pair(c), _pair(d)
    num = _pdiff(pa, pb) * _pdiff(pc, pd)
    den = _pdiff(pa, pd) * _pdiff(pc, pb)
    if den == 0:
        raise ZeroDivisionError("degenerate quadruple")
    return num / den


def cross_ratio_geod(a, b, c, d) -> complex:
    """K(a,b,c,d) = (a-c)(b-d)/((a-d)(b-c)) = <a,c,b,d>: the arrangement
    whose log-modulus is minus the oriented distance of the feet of a and
    b on the geodesic {c,d}."""
    pa, pb, pc, pd = _pair(a), _pair(b), _pair(c), _pair(d)
    num = _pdiff(pa, pc) * _pdiff(pb, pd)
    den = _pdiff(pa, pd) * _pdiff(pb, pc)
    if den == 0:
        raise ZeroDivisionError("degenerate quadruple")
    return num / den


def geodesic_foot(a, c, d):
    """Foot of the perpendicular from boundary point a onto the geodesic
    {c, d} of H^3, in upper-half-space coordinates (z, y).

    In the chart m(z) = (z-c)/(z-d) the geodesic is the vertical axis and
    the foot sits at height |m(a)|.
    """
    if c == d or (_is_inf(c) and _is_inf(d)):
        raise ValueError("degenerate geodesic")
    if a == c or a == d or (_is_inf(a) and (_is_inf(c) or _is_inf(d))):
        raise ValueError("foot undefined for a on the geodesic closure")
    if _is_inf(d) or _is_inf(c):
        cf = c if _is_inf(d) else d
        cf = complex(cf)
        # vertical line over cf
        if _is_inf(a):
            raise ValueError("foot undefined: a at infinity with vertical axis")
        return cf, abs(complex(a) - cf)
    c, d = complex(c), complex(d)
    pa = _pair(a)
    num = _pdiff(pa, _pair(c))
    den = _pdiff(pa, _pair(d))
    if den == 0:
        raise ValueError("foot undefined for a = d")
    h = abs(num / den)
    denom = 1.0 + h * h
    return (c + d * h * h) / denom, abs(c - d) * h / denom


def _geodesic_parameter(point, c, d):
    # Monotone parameter along the geodesic {c, d} oriented c -> d:
    # Euclidean distance to the endpoint c increases strictly from 0.
    z, y = point
    if _is_inf(c):
        return -math.log(y)        # from infinity downward
    c = complex(c)
    return abs(z - c) ** 2 + y ** 2


def ordist(p, q, c, d) -> float:
    """Oriented hyperbolic distance from p to q along the geodesic {c, d}
    (both assumed on it), positive in the direction c -> d."""
    z1, y1 = p
    z2, y2 = q
    cosh = 1.0 + (abs(z1 - z2) ** 2 + (y1 - y2) ** 2) / (2.0 * y1 * y2)
    dist = math.acosh(max(cosh, 1.0))
    sign = 1.0 if _geodesic_parameter(q, c, d) >= _geodesic_parameter(p, c, d) \
        else -1.0
    return sign * dist


def ordist_identity_check(a, b, c, d):
    """(lhs, rhs, difference) for log|K(a,b,c,d)| = -ordist of the feet.

    lhs is algebraic; rhs walks through H^3: both feet are constructed
    geometrically and their signed distance measured along {c, d}.
    """
    lhs = math.log(abs(cross_ratio_geod(a, b, c, d)))
    fa = geodesic_foot(a, c, d)
    fb = geodesic_foot(b, c, d)
    rhs = -ordist(fa, fb, c, d)
    return lhs, rhs, lhs - rhs


# ---------------------------------------------------------------------------
# Schottky groups.

class ConvergenceError(ArithmeticError):
    pass


@dataclass
class DivisorC:
    """Degree-constrained divisor on P^1(C): list of (point, multiplicity)."""

    points: list

    def degree(self) -> int:
        return sum(m for _, m in self.points)

    def pairs(self):
        """Greedy decomposition of a degree-zero divisor into (+1, -1) pairs."""
        if self.degree() != 0:
            raise ValueError("need a degree-zero divisor")
        pos, neg = [], []
        for z, m in self.points:
            (pos if m > 0 else neg).extend([z] * abs(m))
        return list(zip(pos, neg))


class SchottkyGroup:
    """Marked free group of loxodromic Moebius maps.

    ``circles``, when given, must list 2g (center, radius) pairs with
    generator k carrying the interior of circle k onto the exterior of
    circle k+g; the pairing is verified on sampled circle points.  Words
    are enumerated by levels and cached; when circles are available every
    level carries its nested-disk radii, whose sums (shells) estimate the
    orbit-sum tails and gate the Green evaluations.
    """

    def __init__(self, generators, circles=None, word_budget: int = 2_000_000,
                 tol: float = 1e-9):
        self.gens = [g if isinstance(g, MoebiusMap) else MoebiusMap(g)
                     for g in generators]
        self.genus = len(self.gens)
        if self.genus < 1:
            raise ValueError("need at least one generator")
        for i, g in enumerate(self.gens):
            if not g.is_loxodromic:
                raise ValueError(f"generator {i} is not loxodromic")
        self.circles = None
        if circles is not None:
            if len(circles) != 2 * self.genus:
                raise ValueError("need 2g marking circles")
            self.circles = [(complex(c), float(r)) for c, r in circles]
            self._verify_marking()
        self.word_budget = word_budget
        self.tol = tol
        # letter j < g: generator j; letter j >= g: its inverse
        mats = [g.mat for g in self.gens] + [g.inverse().mat for g in self.gens]
        self._letters = np.stack(mats)
        self._levels = [{
            "mats": np.eye(2, dtype=complex)[None, :, :],
            "last": np.array([-1]),
            "radii": np.zeros(1),
        }]

    # -- marking ------------------------------------------------------------

    def _verify_marking(self, samples: int = 24):
        for k, g in enumerate(self.gens):
            c1, r1 = self.circles[k]
            c2, r2 = self.circles[k + self.genus]
            for t in np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False):
                image = g(c1 + r1 * cmath.exp(1j * t))
                if abs(abs(image - c2) - r2) > 1e-8 * max(1.0, r2):
                    raise ValueError(
                        f"generator {k} does not carry circle {k} to "
                        f"circle {k + self.genus}")
            inside = g(c1)   # center of C_k must leave the partner disk
            if abs(inside - c2) <= r2:
                raise ValueError(
                    f"generator {k} does not map the interior of circle {k} "
                    f"to the exterior of circle {k + self.genus}")

    def base_disk(self, letter: int):
        """Disk a word ending in ``letter`` nests into."""
        if self.circles is None:
            raise ValueError("no marking circles")
        g = self.genus
        idx = letter + g if letter < g else letter - g
        return self.circles[idx]

    # -- word enumeration ----------------------------------------------------

    def _extend(self):
        prev = self._levels[-1]
        g2 = 2 * self.genus
        mats_out, last_out, radii_out = [], [], []
        for letter in range(g2):
            forbidden = (letter + self.genus) % g2
            mask = prev["last"] != forbidden
            if not np.any(mask):
                continue
            mats = prev["mats"][mask] @ self._letters[letter]
            mats_out.append(mats)
            last_out.append(np.full(mats.shape[0], letter))
            if self.circles is not None:
                c, r = self.base_disk(letter)
                radii_out.append(_image_radii(prev["mats"][mask], c, r))
        level = {
            "mats": np.concatenate(mats_out),
            "last": np.concatenate(last_out),
            "radii": (np.concatenate(radii_out) if radii_out and
                      self.circles is not None else np.zeros(0)),
        }
        total = sum(lv["mats"].shape[0] for lv in self._levels) \
            + level["mats"].shape[0]
        if total > self.word_budget:
            raise ConvergenceError(
                f"word budget exceeded: {total} > {self.word_budget}")
        self._levels.append(level)

    def level(self, n: int) -> dict:
        while len(self._levels) <= n:
            self._extend()
        return self._levels[n]

    def words_up_to(self, max_len: int):
        """(matrices, last letters, levels) of all reduced words of length
        <= max_len, identity first."""
        levels = [self.level(n) for n in range(max_len + 1)]
        mats = np.concatenate([lv["mats"] for lv in levels])
        last = np.concatenate([lv["last"] for lv in levels])
        depth = np.concatenate([np.full(lv["mats"].shape[0], n)
                                for n, lv in enumerate(levels)])
        return mats, last, depth

    def enumerate_words(self, max_len: int):
        """Iterator of (word tuple, MoebiusMap) over reduced words of
        length <= max_len.  Words spell letters left-to-right; letter j
        means generator j+1 for j < g, its inverse shifted by g otherwise."""
        stack = [((), MoebiusMap(np.eye(2)))]
        yield ((), stack[0][1])
        frontier = stack
        for _ in range(max_len):
            new = []
            for word, mat in frontier:
                for letter in range(2 * self.genus):
                    if word and word[-1] == (letter + self.genus) % (2 * self.genus):
                        continue
                    item = (word + (letter,),
                            mat @ MoebiusMap(self._letters[letter]))
                    yield item
                    new.append(item)
            frontier = new

    def word_count(self, max_len: int) -> int:
        g2 = 2 * self.genus
        return 1 + sum(g2 * (g2 - 1) ** (n - 1) for n in range(1, max_len + 1))

    # -- convergence gate ------------------------------------------------------

    def shells(self, max_len: int) -> np.ndarray:
        """Sum of nested-disk radii per word length (requires circles)."""
        if self.circles is None:
            raise ValueError("no marking circles: gate by term shells instead")
        return np.array([self.level(n)["radii"].sum()
                         for n in range(1, max_len + 1)])

    def exponent_gate(self, max_len: int = 6) -> float:
        """Measured shell decay ratio; must be < 1 before Green use.

        This is a go/no-go proxy for the limit-set exponent being < 1,
        never a Hausdorff-dimension estimate.
        """
        shells = self.shells(max_len)
        ratio = float(shells[-1] / shells[-2])
        if not ratio < 1.0:
            raise ConvergenceError(
                f"shell ratio {ratio:.3f} >= 1: series not converging; "
                "group too thick")
        return ratio

    def fixed_point_cloud(self, max_len: int = 2):
        pts = []
        for g in self.gens:
            p, m, _ = g.fixed_points()
            for z in (p, m):
                if not _is_inf(z):
                    pts.append(z)
        mats, _, depth = self.words_up_to(max_len)
        for z in pts[:]:
            x = np.full(mats.shape[0], z, dtype=complex)
            num = mats[:, 0, 0] * x + mats[:, 0, 1]
            den = mats[:, 1, 0] * x + mats[:, 1, 1]
            ok = np.abs(den) > 1e-12
            pts.extend(num[ok] / den[ok])
        return np.asarray(pts)

    def check_divisor(self, points, margin: float = 1e-2):
        cloud = self.fixed_point_cloud()
        for z in points:
            if _is_inf(z):
                raise ValueError("divisor support at infinity unsupported")
            if np.min(np.abs(cloud - complex(z))) < margin:
                raise ValueError(
                    f"divisor point {z} within {margin} of the limit set")
        if self.circles is not None:
            for z in points:
                for c, r in self.circles:
                    if abs(complex(z) - c) <= r:
                        raise ValueError(
                            f"divisor point {z} inside a marking circle")


def _image_radii(mats, center: complex, radius: float) -> np.ndarray:
    # Radius of the image of |z - center| = radius under each matrix
    # (det = 1): r' = r / ||c z0 + d|^2 - |c|^2 r^2|.
    c = mats[:, 1, 0]
    d = mats[:, 1, 1]
    denom = np.abs(np.abs(c * center + d) ** 2 - np.abs(c) ** 2 * radius ** 2)
    return radius / np.maximum(denom, 1e-300)


def classical_schottky(centers, radii) -> SchottkyGroup:
    """Marked group from 2g pairwise disjoint circles: generator k pairs
    circle k with circle k+g."""
    if len(centers) != len(radii) or len(centers) % 2:
        raise ValueError("need 2g centers and radii")
    g = len(centers) // 2
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(complex(centers[i]) - complex(centers[j])) \
                    <= radii[i] + radii[j]:
                raise ValueError(f"circles {i} and {j} are not disjoint")
    gens = [MoebiusMap.circle_pairing(centers[k], radii[k],
                                      centers[k + g], radii[k + g])
            for k in range(g)]
    return SchottkyGroup(gens, circles=list(zip(centers, radii)))


def genus1_group(q: complex) -> SchottkyGroup:
    """The cyclic group of z -> qz, 0 < |q| < 1."""
    if not 0.0 < abs(q) < 1.0:
        raise ValueError("need 0 < |q| < 1")
    return SchottkyGroup([MoebiusMap.scaling(q)])


# ---------------------------------------------------------------------------
# Orbit machinery shared by differentials, periods, and Green functions.

def _apply_pairs(mats, z):
    """Projective images (x, w) of the point z under a matrix stack."""
    x, w = _pair(z)
    return (mats[:, 0, 0] * x + mats[:, 0, 1] * w,
            mats[:, 1, 0] * x + mats[:, 1, 1] * w)


def _log_k_pairs(pa, pb, xc, wc, xd, wd):
    """log|K(a, b, hc, hd)| for stacked projective orbit points."""
    num = np.abs((pa[0] * wc - xc * pa[1]) * (pb[0] * wd - xd * pb[1]))
    den = np.abs((pa[0] * wd - xd * pa[1]) * (pb[0] * wc - xc * pb[1]))
    if np.any(den == 0.0) or np.any(num == 0.0):
        raise ZeroDivisionError("divisor support meets an orbit point")
    return np.log(num) - np.log(den)


def _coset_mask(last, letter: int, genus: int):
    # reduced words whose reduced form does not end in gen_letter^{+-1}
    return (last != letter) & (last != letter + genus)


def _series_tail(per_level: np.ndarray):
    """(tail_estimate, ratio) from per-level absolute term sums.

    Levels below the round-off floor (1e-14 of the peak) are treated as
    converged rather than fed into the decay-ratio estimate.
    """
    lv = np.asarray(per_level, dtype=float)
    if len(lv) == 0:
        return 0.0, 0.0
    floor = max(lv.max() * 1e-14, 1e-290)
    above = np.nonzero(lv > floor)[0]
    if len(above) == 0:
        return float(lv[-1]), 0.0
    last = above[-1]
    if last <= len(lv) - 2:
        # decayed into round-off before the cap
        ratio = float(lv[last] / lv[last - 1]) if last >= 1 and lv[last - 1] > 0 \
            else 0.0
        return float(max(lv[last + 1:].max(), floor)), min(ratio, 0.999)
    if len(lv) < 3:
        return float(lv[-1]), 0.0
    ratio = float(lv[-1] / lv[-2])
    if ratio >= 1.0:
        return float("inf"), ratio
    return float(lv[-1] * ratio / (1.0 - ratio)), ratio


def differential_eval(group: SchottkyGroup, kind, z, z0=None,
                      max_len: int = 12, tol: float = 1e-10) -> complex:
    """Value omega(z)/dz of a lifted differential.

    kind = ("third", a, b): sum over group elements of
    1/(z - h a) - 1/(z - h b).
    kind = ("first", k): sum over coset representatives (words not ending
    in generator k's letters) of 1/(z - h z+_k) - 1/(z - h z-_k).

    Per-level shells must decrease; non-decreasing shells raise
    ConvergenceError.
    """
    mats, last, depth = group.words_up_to(max_len)
    if kind[0] == "third":
        _, a, b = kind
        sel = np.ones(mats.shape[0], dtype=bool)
        pa, pb = a, b
    elif kind[0] == "first":
        _, k = kind
        plus, minus, _ = group.gens[k].fixed_points()
        sel = _coset_mask(last, k, group.genus)
        sel[0] = True  # identity
        pa, pb = plus, minus
    else:
        raise ValueError(f"unknown differential kind {kind[0]!r}")
    m = mats[sel]
    dep = depth[sel]
    xa, wa = _apply_pairs(m, pa)
    xb, wb = _apply_pairs(m, pb)
    zz = complex(z)
    # 1/(z - ha) with ha = xa/wa  ->  wa/(z wa - xa)
    term = wa / (zz * wa - xa) - wb / (zz * wb - xb)
    per_level = np.array([np.abs(term[dep == n]).sum()
                          for n in range(max_len + 1)])
    tail, ratio = _series_tail(per_level[1:])
    if ratio >= 1.0:
        raise ConvergenceError("series not converging; group too thick")
    return complex(term.sum())


def contour_integral(fn, center: complex, radius: float, nodes: int = 512):
    """Trapezoid contour integral of fn over the counterclockwise circle;
    exponentially accurate for integrands analytic near the circle."""
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * theta)
    dz = 1j * radius * np.exp(1j * theta)
    vals = np.array([fn(zz) for zz in z])
    return complex((vals * dz).mean() * 2.0 * math.pi)


@dataclass
class PeriodData:
    re_tau: np.ndarray            # g x g real matrix
    a_periods: np.ndarray         # g x g complex matrix, target 2 pi i delta
    base_points: tuple
    base_point_spread: float      # max deviation between the two base points


def _primitive_diff(mats_sel, plus, minus, z1, z2) -> float:
    """Re[F(z1) - F(z2)] for F the log-primitive of a first-kind series.

    Differenced per orbit term, so the projective scale factors cancel and
    orbit points at infinity (vanishing w) contribute their finite limit.
    """
    xa, wa = _apply_pairs(mats_sel, plus)
    xb, wb = _apply_pairs(mats_sel, minus)
    za, zb = complex(z1), complex(z2)
    n1 = np.abs(za * wa - xa)
    n2 = np.abs(zb * wa - xa)
    d1 = np.abs(za * wb - xb)
    d2 = np.abs(zb * wb - xb)
    if np.any(n1 * n2 * d1 * d2 == 0.0):
        raise ZeroDivisionError("evaluation point meets the orbit")
    return float(np.sum(np.log(n1) - np.log(n2) - np.log(d1) + np.log(d2)))


def period_data(group: SchottkyGroup, max_len: int = 10,
                base_point=None) -> PeriodData:
    """Re tau and the a-period normalization check.

    Re tau_{k,l} = Re[F_l(gen_k w) - F_l(w)] for the log-primitive F_l of
    the l-th first-kind differential; computed at two base points, with
    the spread reported.  A-periods are trapezoid contour integrals of
    the first-kind series around the attracting fixed-point circles,
    expected to be 2 pi i times the identity.
    """
    g = group.genus
    mats, last, depth = group.words_up_to(max_len)
    if base_point is None:
        cands = _base_point_candidates(group)
    else:
        cands = [complex(base_point), complex(base_point) + 0.31 + 0.17j]
    w0, w1 = cands[0], cands[1]

    re_tau = np.zeros((g, g))
    re_tau_alt = np.zeros((g, g))
    for ell in range(g):
        plus, minus, _ = group.gens[ell].fixed_points()
        sel = _coset_mask(last, ell, g)
        sel[0] = True
        m = mats[sel]
        for k in range(g):
            gk = group.gens[k]
            re_tau[k, ell] = _primitive_diff(m, plus, minus, gk(w0), w0)
            re_tau_alt[k, ell] = _primitive_diff(m, plus, minus, gk(w1), w1)
    spread = float(np.max(np.abs(re_tau - re_tau_alt)))

    a_periods = np.zeros((g, g), dtype=complex)
    nodes = 512
    for k in range(g):
        center, radius = _a_contour(group, k)
        theta = 2.0 * math.pi * np.arange(nodes) / nodes
        zs = center + radius * np.exp(1j * theta)
        dz = 1j * radius * np.exp(1j * theta)
        for ell in range(g):
            plus, minus, _ = group.gens[ell].fixed_points()
            sel = _coset_mask(last, ell, g)
            sel[0] = True
            m = mats[sel]
            xa, wa = _apply_pairs(m, plus)
            xb, wb = _apply_pairs(m, minus)
            vals = np.empty(nodes, dtype=complex)
            for i, zz in enumerate(zs):
                vals[i] = np.sum(wa / (zz * wa - xa) - wb / (zz * wb - xb))
            a_periods[k, ell] = (vals * dz).mean() * 2.0 * math.pi
    return PeriodData(re_tau, a_periods, (w0, w1), spread)


def _base_point_candidates(group: SchottkyGroup):
    if group.circles is None:
        # scaling-type groups: any generic point away from 0 and infinity
        return [0.61 + 0.35j, 0.47 - 0.52j]
    centers = np.array([c for c, _ in group.circles])
    radii = np.array([r for _, r in group.circles])
    centroid = centers.mean()
    for cand in (centroid, centroid + 0.37 + 0.61j, 0.0, 0.5 + 0.5j,
                 centroid + 1.3j, centroid - 1.1):
        if np.all(np.abs(cand - centers) > radii * 1.5):
            for cand2 in (cand + 0.41 - 0.23j, cand - 0.29 + 0.31j,
                          cand + 0.77j):
                if np.all(np.abs(cand2 - centers) > radii * 1.5):
                    return [cand, cand2]
    raise ValueError("could not find base points outside the circles")


def _a_contour(group: SchottkyGroup, k: int):
    plus, _, _ = group.gens[k].fixed_points()
    if group.circles is not None:
        for c, r in group.circles:
            if abs(complex(plus) - c) < r:
                return c, r
    if _is_inf(plus):
        raise ValueError("attracting fixed point at infinity: provide circles")
    others = [group.gens[j].fixed_points()[i] for j in range(group.genus)
              for i in (0, 1) if (j, i) != (k, 0)]
    dmin = min((abs(complex(plus) - complex(o)) for o in others
                if not _is_inf(o)), default=2.0)
    return complex(plus), min(1.0, dmin / 2.0)


# ---------------------------------------------------------------------------
# Green functions.

@dataclass
class GreenResult:
    value: float
    tail: float                   # truncation estimate from shell decay
    coefficients: np.ndarray      # X_l(a, b) stacked per A-pair
    shell_ratio: float
    max_len: int

    def __float__(self):
        return self.value


def _as_pairs(divisor):
    if isinstance(divisor, DivisorC):
        return divisor.pairs()
    if isinstance(divisor, (tuple, list)) and len(divisor) == 2 \
            and not isinstance(divisor[0], (tuple, list)):
        return [(divisor[0], divisor[1])]
    return DivisorC(list(divisor)).pairs()


def _main_sum(mats, depth, a, b, c, d):
    """Per-word log|K(a, b, hc, hd)| and per-level absolute sums."""
    pa, pb = _pair(a), _pair(b)
    xc, wc = _apply_pairs(mats, c)
    xd, wd = _apply_pairs(mats, d)
    terms = _log_k_pairs(pa, pb, xc, wc, xd, wd)
    levels = np.array([np.abs(terms[depth == n]).sum()
                       for n in range(depth.max() + 1)])
    return terms.sum(), levels


def _conjugacy_sum(group, mats, last, ell, fn):
    """Apply fn to the orbit (w z+_ell, w z-_ell) over coset representatives
    w (reduced words not ending in generator ell's letters)."""
    plus, minus, _ = group.gens[ell].fixed_points()
    sel = _coset_mask(last, ell, group.genus)
    sel[0] = True
    m = mats[sel]
    xp, wp = _apply_pairs(m, plus)
    xm, wm = _apply_pairs(m, minus)
    return fn(xp, wp, xm, wm)


def green_function(group: SchottkyGroup, a_divisor, b_divisor,
                   max_len: int = 10, tol: float = 1e-9) -> GreenResult:
    """Arakelov Green pairing g(A, B) of degree-zero divisors by Schottky
    orbit sums: the full-orbit cross-ratio sum corrected by first-kind
    differentials with coefficients from the Re tau linear system."""
    a_pairs = _as_pairs(a_divisor)
    b_pairs = _as_pairs(b_divisor)
    support = [p for pr in a_pairs + b_pairs for p in pr]
    group.check_divisor(support)
    if group.circles is not None:
        ratio_gate = group.exponent_gate()
    mats, last, depth = group.words_up_to(max_len)

    pdata = period_data(group, max_len=max_len)
    g = group.genus
    total = 0.0
    tail = 0.0
    ratios = []
    x_all = []
    for a, b in a_pairs:
        pa, pb = _pair(a), _pair(b)
        # X-system right-hand side: conjugacy-class sums for each generator
        rhs = np.empty(g)
        for k in range(g):
            rhs[k] = _conjugacy_sum(
                group, mats, last, k,
                lambda xp, wp, xm, wm: float(
                    _log_k_pairs(pa, pb, xp, wp, xm, wm).sum()))
        x_vec = np.linalg.solve(pdata.re_tau, rhs)
        x_all.append(x_vec)
        for c, d in b_pairs:
            main, levels = _main_sum(mats, depth, a, b, c, d)
            t, ratio = _series_tail(levels[1:])
            if ratio >= 1.0:
                raise ConvergenceError(
                    "series not converging; group too thick")
            total += float(main)
            tail += t
            ratios.append(ratio)
            for ell in range(g):
                pc, pd = _pair(c), _pair(d)
                corr = _conjugacy_sum(
                    group, mats, last, ell,
                    lambda xp, wp, xm, wm: float(
                        _log_k_pairs(pc, pd, xp, wp, xm, wm).sum()))
                # K is symmetric under swapping its argument pairs
                total -= x_vec[ell] * corr
    return GreenResult(total, tail, np.array(x_all),
                       max(ratios) if ratios else 0.0, max_len)


def _feet_ordist_arrays(a, b, xc, wc, xd, wd):
    """-ordist(a*{hc,hd}, b*{hc,hd}) for stacked orbit geodesics, walking
    through explicit H^3 feet (the geometric route, independent of the
    cross-ratio algebra)."""
    finite = (np.abs(wc) > 1e-14) & (np.abs(wd) > 1e-14)
    out = np.empty(xc.shape[0])
    cf = np.where(finite, xc / np.where(finite, wc, 1.0), 0.0)
    df = np.where(finite, xd / np.where(finite, wd, 1.0), 0.0)
    if np.any(finite):
        c = cf[finite]
        d = df[finite]
        ha = np.abs((a - c) / (a - d))
        hb = np.abs((b - c) / (b - d))
        za = (c + d * ha ** 2) / (1.0 + ha ** 2)
        ya = np.abs(c - d) * ha / (1.0 + ha ** 2)
        zb = (c + d * hb ** 2) / (1.0 + hb ** 2)
        yb = np.abs(c - d) * hb / (1.0 + hb ** 2)
        cosh = 1.0 + (np.abs(za - zb) ** 2 + (ya - yb) ** 2) / (2.0 * ya * yb)
        dist = np.arccosh(np.maximum(cosh, 1.0))
        sign = np.where((np.abs(zb - c) ** 2 + yb ** 2)
                        >= (np.abs(za - c) ** 2 + ya ** 2), 1.0, -1.0)
        out[finite] = -sign * dist
    if np.any(~finite):
        idx = np.nonzero(~finite)[0]
        for i in idx:
            c = INF if abs(wc[i]) <= 1e-14 else xc[i] / wc[i]
            d = INF if abs(wd[i]) <= 1e-14 else xd[i] / wd[i]
            fa = geodesic_foot(a, c, d)
            fb = geodesic_foot(b, c, d)
            out[i] = -ordist(fa, fb, c, d)
    return out


def green_geodesic(group: SchottkyGroup, a_divisor, b_divisor,
                   max_len: int = 10, tol: float = 1e-9) -> GreenResult:
    """The same Green pairing assembled from oriented geodesic lengths in
    H^3: every cross-ratio summand of :func:`green_function` is replaced
    term-by-term by minus the oriented distance between perpendicular
    feet."""
    a_pairs = _as_pairs(a_divisor)
    b_pairs = _as_pairs(b_divisor)
    support = [p for pr in a_pairs + b_pairs for p in pr]
    group.check_divisor(support)
    if group.circles is not None:
        group.exponent_gate()
    mats, last, depth = group.words_up_to(max_len)
    pdata = period_data(group, max_len=max_len)
    g = group.genus
    total = 0.0
    tail = 0.0
    ratios = []
    for a, b in a_pairs:
        a = complex(a)
        b = complex(b)
        rhs = np.empty(g)
        for k in range(g):
            # feet of a and b on the axis of each conjugate of generator k
            rhs[k] = _conjugacy_sum(
                group, mats, last, k,
                lambda xp, wp, xm, wm: float(
                    -_feet_ordist_arrays(a, b, xp, wp, xm, wm).sum()))
        x_vec = np.linalg.solve(pdata.re_tau, rhs)
        for c, d in b_pairs:
            xc, wc = _apply_pairs(mats, c)
            xd, wd = _apply_pairs(mats, d)
            terms = _feet_ordist_arrays(a, b, xc, wc, xd, wd)
            levels = np.array([np.abs(terms[depth == n]).sum()
                               for n in range(depth.max() + 1)])
            t, ratio = _series_tail(levels[1:])
            if ratio >= 1.0:
                raise ConvergenceError(
                    "series not converging; group too thick")
            total += float(terms.sum())
            tail += t
            ratios.append(ratio)
            for ell in range(g):
                plus, minus, _ = group.gens[ell].fixed_points()
                sel = _coset_mask(last, ell, group.genus)
                sel[0] = True
                m = mats[sel]
                xp, wp = _apply_pairs(m, plus)
                xm, wm = _apply_pairs(m, minus)
                # feet of the conjugate fixed points on the geodesic {c, d}
                corr = 0.0
                pc, pd = complex(c), complex(d)
                finite = (np.abs(wp) > 1e-14) & (np.abs(wm) > 1e-14)
                if np.any(finite):
                    zp = xp[finite] / wp[finite]
                    zm = xm[finite] / wm[finite]
                    corr += float(np.sum(_pointpair_ordist(zp, zm, pc, pd)))
                for i in np.nonzero(~finite)[0]:
                    p1 = INF if abs(wp[i]) <= 1e-14 else xp[i] / wp[i]
                    p2 = INF if abs(wm[i]) <= 1e-14 else xm[i] / wm[i]
                    fa = geodesic_foot(p1, pc, pd)
                    fb = geodesic_foot(p2, pc, pd)
                    corr += -ordist(fa, fb, pc, pd)
                total -= x_vec[ell] * corr
    return GreenResult(total, tail, np.empty(0), max(ratios), max_len)


def _pointpair_ordist(zp, zm, c, d):
    """-ordist of the feet of arrays of point pairs on the fixed geodesic
    {c, d} (finite endpoints)."""
    hp = np.abs((zp - c) / (zp - d))
    hm = np.abs((zm - c) / (zm - d))
    z1 = (c + d * hp ** 2) / (1.0 + hp ** 2)
    y1 = abs(c - d) * hp / (1.0 + hp ** 2)
    z2 = (c + d * hm ** 2) / (1.0 + hm ** 2)
    y2 = abs(c - d) * hm / (1.0 + hm ** 2)
    cosh = 1.0 + (np.abs(z1 - z2) ** 2 + (y1 - y2) ** 2) / (2.0 * y1 * y2)
    dist = np.arccosh(np.maximum(cosh, 1.0))
    sign = np.where((np.abs(z2 - c) ** 2 + y2 ** 2)
                    >= (np.abs(z1 - c) ** 2 + y1 ** 2), 1.0, -1.0)
    return -sign * dist


# ---------------------------------------------------------------------------
# Genus-1 closed form (the BTZ oracle).

def bernoulli2(t: float) -> float:
    return t * t - t + 1.0 / 6.0


def btz_green(q: complex, z: complex, eps: float = 1e-15,
              reduce: bool = False) -> float:
    """Green function of the elliptic curve C*/q^Z at (z, 1):

    log(|q|^{B2(log|z|/log|q|)/2} |1-z| prod |1-q^n z||1-q^n/z|).

    Requires |q| < |z| <= 1 unless ``reduce`` is set, in which case z is
    moved into the annulus by the exact invariances z -> qz and z -> 1/z.
    Returns -inf when z lies on the divisor orbit of 1.
    """
    q = complex(q)
    z = complex(z)
    if not 0.0 < abs(q) < 1.0:
        raise ValueError("need 0 < |q| < 1")
    if z == 0:
        raise ValueError("z = 0 lies on the limit set")
    if reduce:
        if abs(z) > 1.0:
            z = 1.0 / z
        while abs(z) <= abs(q):
            z = z / q
        while abs(z) > 1.0:
            z = z * q
    if not abs(q) < abs(z) <= 1.0:
        raise ValueError("z outside the fundamental annulus |q| < |z| <= 1")
    t = math.log(abs(z)) / math.log(abs(q))
    total = 0.5 * bernoulli2(t) * math.log(abs(q))
    factor = abs(1.0 - z)
    if factor < 1e-14:
        return float("-inf")
    total += math.log(factor)
    qn = q
    err_terms = 0.0
    while abs(qn) * max(abs(z), 1.0 / abs(z)) >= eps:
        f1 = abs(1.0 - qn * z)
        f2 = abs(1.0 - qn / z)
        if f1 < 1e-14 or f2 < 1e-14:
            return float("-inf")
        total += math.log(f1) + math.log(f2)
        qn *= q
        err_terms += 1
        if err_terms > 10000:
            break
    return total


def btz_green_error(q: complex, z: complex, eps: float = 1e-15) -> float:
    """Bound on the truncation error of :func:`btz_green`: the neglected
    log factors are within 2 sum_{tail} |q|^n max(|z|, 1/|z|)."""
    return 4.0 * eps / (1.0 - abs(q))


def btz_pair_green(q: complex, x: complex, y: complex) -> float:
    """Translation-invariant two-point value g(x, y) = g(x/y, 1)."""
    return btz_green(q, x / y, reduce=True)


def limit_points(group: SchottkyGroup, depth: int):
    """Attracting fixed points of all reduced words of length == depth:
    the standard limit-set approximation cloud."""
    lv = group.level(depth)
    mats = lv["mats"]
    out = []
    for i in range(mats.shape[0]):
        m = MoebiusMap(mats[i])
        if not m.is_loxodromic:
            continue
        plus, _, _ = m.fixed_points()
        if not _is_inf(plus):
            out.append(plus)
    return np.array(out)
