"""Discretized mixmaster (Bianchi IX) dynamics on the boundary of X_0(2).

An era with parameter u > 1 runs through floor(u) Kasner cycles; the era
transition u -> 1/(u - [u]) is the Gauss shift on x = 1/u, and the axis
bookkeeping is the matrix ((-k,1),(1,0)) acting on P^1(F_2), whose points
label the space axes (0 -> z, inf -> y, 1 -> x).  Everything here is
derived from that matrix action; the two published permutation
descriptions (era rules and Markov blocks) are theorems checked in the
test suite, not inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import snf
from .contfrac import CosetSpace, QuadraticSurd, cf_expand, shift_matrix

AXIS_NAMES = {"0": "z", "inf": "y", "1": "x"}


def kasner_exponents(u: float):
    """Kasner exponents (p1, p2, p3) of the era parameter u.

    p1 = -u/(1+u+u^2), p2 = (1+u)/(1+u+u^2), p3 = u(1+u)/(1+u+u^2);
    they satisfy sum p_i = sum p_i^2 = 1 identically.
    """
    den = 1.0 + u + u * u
    return (-u / den, (1.0 + u) / den, u * (1.0 + u) / den)


@dataclass
class KasnerState:
    """One Kasner cycle: era index, cycle index, u, optional amplitude v,
    axis label as a point of P^1(F_2)."""

    era: int
    cycle: int
    u: float
    axis: str
    v: float | None = None

    @property
    def axis_name(self) -> str:
        return AXIS_NAMES.get(self.axis, self.axis)

    def exponents(self):
        return kasner_exponents(self.u)


@dataclass
class Evolution:
    eras: list                    # list of dicts per era
    states: list                  # flat list of KasnerState per cycle
    truncated: bool = False

    def axis_sequence(self):
        return [e["axis"] for e in self.eras]


def evolve(x0, s0: int | str = None, eras: int = 10, track_v: bool = False,
           v0: float = 1.0, space: CosetSpace | None = None) -> Evolution:
    """Run ``eras`` era transitions from x0 in (0,1).

    x0 may be a QuadraticSurd (exact digits), a float, or an iterable of
    digits k_n >= 1.  Per era n: k_n = floor(u_n) cycles with u walking
    down u_n, u_n - 1, ...; then the bounce x_{n+1} = T x_n and the axis
    point moves by ((-k_n, 1), (1, 0)).  With ``track_v`` the amplitude
    parameter follows y_{n+1} = 1/(y_n + k_n) (reported as v = 1/y).
    """
    if eras < 1:
        raise ValueError("need eras >= 1")
    space = space or CosetSpace(2)
    if s0 is None:
        s0 = space.identity_coset
    elif isinstance(s0, str):
        s0 = space.label_index(s0)

    digit_iter, exact_state = None, None
    if isinstance(x0, QuadraticSurd):
        exact_state = x0
    elif isinstance(x0, float):
        if not 0.0 < x0 < 1.0:
            raise ValueError("x0 must lie in (0,1)")
        digit_iter = _float_digit_stream(x0)
    else:
        digit_iter = _digit_stream_with_u(iter(x0))

    s = s0
    y = 1.0 / v0 if track_v else None
    out_eras = []
    states = []
    truncated = False
    for era in range(eras):
        if exact_state is not None:
            if exact_state.sign() <= 0:
                truncated = True
                break
            inv = exact_state.reciprocal()
            k = inv.floor()
            u = float(inv)
            exact_state = inv - k
        else:
            try:
                k, u = next(digit_iter)
            except StopIteration:
                truncated = True
                break
        s = space.act(shift_matrix(k), s)
        axis = space.point_label(s)
        v = 1.0 / y if track_v else None
        cycles = []
        for c in range(k):
            uc = u - c
            states.append(KasnerState(era, c, uc, axis, v=v))
            cycles.append(uc)
        out_eras.append({"era": era, "k": k, "u": u, "axis": axis,
                         "v": v, "cycles": cycles})
        if track_v:
            y = 1.0 / (y + k)
    return Evolution(out_eras, states, truncated)


def _float_digit_stream(x: float):
    while True:
        x = min(max(x, 1e-14), 1.0 - 1e-14)
        inv = 1.0 / x
        k = int(inv)
        yield (k, inv)
        x = inv - k


def _digit_stream_with_u(digits):
    # u_n = k_n + [k_{n+1}, k_{n+2}, ...], estimated from a short lookahead.
    buf = []
    exhausted = False
    while True:
        while not exhausted and len(buf) < 5:
            try:
                buf.append(int(next(digits)))
            except StopIteration:
                exhausted = True
        if not buf:
            return
        k = buf.pop(0)
        frac = 0.0
        for d in reversed(buf):
            frac = 1.0 / (d + frac)
        yield (k, k + frac)


def sample_gauss_measure(rng: np.random.Generator, size: int) -> np.ndarray:
    """Inverse-CDF sampler of the invariant density 1/((1+x) log 2)."""
    return np.exp2(rng.random(size)) - 1.0


@dataclass
class AxisStatistics:
    frequencies: dict
    counts: dict
    total_steps: int
    standard_error: float
    seed: int

    def within(self, sigmas: float) -> bool:
        return all(abs(f - 1.0 / 3.0) <= sigmas * self.standard_error
                   for f in self.frequencies.values())


def axis_statistics(samples: int, eras_per_sample: int = 50,
                    seed: int = 0) -> AxisStatistics:
    """Frequency with which each axis label carries the dominant exponent,
    over samples * eras_per_sample era steps with Gauss-measure x0.

    The initial coset is drawn uniformly (the shift's invariant measure is
    the product of Gauss measure and counting measure, and a uniform start
    makes every step exactly stationary); identical seeds give identical
    frequencies.  The standard error is the binomial sqrt(p(1-p)/n).
    """
    if samples < 1:
        raise ValueError("need samples >= 1")
    rng = np.random.default_rng(seed)
    space = CosetSpace(2)
    even = np.array(space.action_table(shift_matrix(2)))
    odd = np.array(space.action_table(shift_matrix(1)))
    x = sample_gauss_measure(rng, samples)
    s = rng.integers(0, 3, samples)
    counts = np.zeros(3, dtype=np.int64)
    for _ in range(eras_per_sample):
        x = np.clip(x, 1e-14, 1.0 - 1e-14)
        inv = 1.0 / x
        k = np.floor(inv)
        x = inv - k
        parity_odd = (k % 2.0) == 1.0
        s = np.where(parity_odd, odd[s], even[s])
        counts += np.bincount(s, minlength=3)
    total = samples * eras_per_sample
    freq = counts / float(total)
    se = math.sqrt((1.0 / 3.0) * (2.0 / 3.0) / total)
    labels = [space.point_label(i) for i in range(3)]
    return AxisStatistics(
        {AXIS_NAMES[lab]: float(fr) for lab, fr in zip(labels, freq)},
        {AXIS_NAMES[lab]: int(c) for lab, c in zip(labels, counts)},
        total, se, seed)


# ---------------------------------------------------------------------------
# Markov matrix of the bounded-digit subshift and its K-theory invariants.

@dataclass
class MarkovMatrix:
    digits: int
    entries: np.ndarray           # 0/1, indexed by (k, t) over k=1..N, t in P
    space: CosetSpace

    def block(self, k: int, ell: int) -> np.ndarray:
        n = len(self.space)
        return self.entries[(k - 1) * n:k * n, (ell - 1) * n:ell * n]


def markov_matrix(digits: int) -> MarkovMatrix:
    """Transition matrix of the digit-bounded skew shift: entry
    ((k,t),(ell,s)) = 1 iff ((0,1),(1,ell)) . s = t.

    Built from the containment condition itself, so the published block
    form (one permutation for even ell, another for odd) is a checkable
    consequence, not an input.  Rows and columns run over the points of
    P^1(F_2) in the order (0, 1, inf) within each digit block.
    """
    if digits < 1:
        raise ValueError("need digit bound >= 1")
    space = CosetSpace(2)
    order = [space.label_index(lab) for lab in ("0", "1", "inf")]
    pos = {pt: i for i, pt in enumerate(order)}
    n = len(space)
    size = digits * n
    a = np.zeros((size, size), dtype=np.int64)
    for ell in range(1, digits + 1):
        table = space.action_table(((0, 1), (1, ell)))
        for k in range(1, digits + 1):
            for s in range(n):
                t = table[s]
                a[(k - 1) * n + pos[t], (ell - 1) * n + pos[s]] = 1
    return MarkovMatrix(digits, a, space)


@dataclass
class KTheory:
    torsion: list                 # elementary divisors > 1 of 1 - A^T
    free_rank: int                # free rank of K0 = coker(1 - A^T)
    k1_rank: int                  # rank of ker(1 - A^T)

    def k0_description(self) -> str:
        parts = [f"Z/{d}" for d in self.torsion] + ["Z"] * self.free_rank
        return " + ".join(parts) if parts else "0"


def ck_ktheory(a) -> KTheory:
    """K-theory invariants of the subshift algebra of a 0/1 matrix:
    K0 = coker(1 - A^T) as elementary divisors, K1 = ker rank."""
    a = np.asarray(a, dtype=np.int64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    n = a.shape[0]
    one_minus_at = [[int(i == j) - int(a[j, i]) for j in range(n)]
                    for i in range(n)]
    torsion, free = snf.cokernel_invariants(one_minus_at)
    k1 = len(snf.kernel_basis(one_minus_at))
    return KTheory(torsion, free, k1)


def schottky_subshift_matrix(genus: int) -> np.ndarray:
    """Admissibility matrix of the free-group boundary shift on 2g letters:
    A[i, j] = 1 iff j is not the inverse letter of i (|i - j| != g)."""
    if genus < 1:
        raise ValueError("need genus >= 1")
    n = 2 * genus
    a = np.ones((n, n), dtype=np.int64)
    for i in range(n):
        a[i, (i + genus) % n] = 0
    return a
