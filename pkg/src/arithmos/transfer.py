"""Galerkin truncations of the continued-fraction transfer operators.

The operator acts on functions analytic near [0, 1] (tensored with a finite
coset space in the extended variant) by a weighted sum over the inverse
branches x -> 1/(x+k) of the Gauss map,

    (L_sigma f)(x) = sum_k (x+k)^(-2 sigma) f(1/(x+k)),

with k over all of 1, 2, ... (full), k <= D (digit-bounded Hensley), or k
in residue classes mod N routed through P^1(Z/N) (coset).  Two matrix
representations coexist here:

* ``TransferMatrix.entries`` -- the closed-form Taylor data: entry (j, m)
  is the j-th Taylor coefficient at x0 of L_sigma applied to x^m, i.e.
  (-1)^j C(2s+m+j-1, j) Z(2s+m+j, x0) with Z the branch zeta.  This is the
  published coordinate form and is exact, but as a float64 eigenproblem it
  is hopeless: the monomial frame mixes scales across ~15 decades by
  M ~ 24 (measured loss of all significant digits).
* the collocation form -- values of L applied to Chebyshev polynomials at
  Chebyshev nodes of [0, 1], converted to Chebyshev coefficients.  All
  entries are O(1), eigenfunctions analytic in a Bernstein ellipse give
  ~rho^-M accuracy with rho = 3 + 2 sqrt(2), and the infinite branch sums
  are completed by exact Hurwitz-zeta tails.  Leading eigendata (top
  eigenvalues, eigenfunctions, Lyapunov derivatives, dimension solves)
  are computed in this frame.

Fredholm determinants use a third, Hardy-space frame: Taylor coefficients
on the invariant disk |z - 1| < 3/2 extracted by Cauchy-FFT on a circle.
Polynomial truncations on the segment carry slowly decaying spurious
eigenvalues (an artifact visible already for a single inverse branch,
where the exact spectrum is known); they are harmless for the leading
eigendata but poison determinants.  The disk frame is an orthogonal
compression in H^2 and its determinants are truncation-stable to ~1e-9
by basis dimension 24.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contfrac import CosetSpace
from .special import binomial, hurwitz_zeta

#: Spectral gap below which the "simple leading eigenvalue" assertion is
#: flagged rather than trusted.
GAP_THRESHOLD = 1e-6

#: Largest tolerable magnitude for a binomial entry of the Taylor form.
_BINOMIAL_CAP = 1e250

#: Branch-sum truncation and order of the Hurwitz tail completion.
_KSUM = 1000
_TAIL_TERMS = 22


@dataclass(frozen=True)
class TransferSpec:
    """Parameters of one truncated operator.

    variant: "full", "hensley" (digit bound ``digits``), or "coset"
    (level ``level``).  ``basis_dim`` is the polynomial dimension M and
    ``x0`` the expansion point of the Taylor coordinate form.
    """

    sigma: complex
    variant: str = "full"
    basis_dim: int = 24
    x0: float = 0.0
    digits: int | None = None
    level: int | None = None

    def __post_init__(self):
        if self.variant not in ("full", "hensley", "coset"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.basis_dim < 2:
            raise ValueError("basis_dim must be >= 2")
        if not 0.0 <= self.x0 < 1.0:
            raise ValueError("expansion point must lie in [0, 1)")
        if self.variant == "full" and (2 * complex(self.sigma).real) <= 1.0:
            raise ValueError("full variant needs Re(2 sigma) > 1")
        if self.variant == "hensley":
            if not self.digits or self.digits < 1:
                raise ValueError("hensley variant needs a digit bound >= 1")
        if self.variant == "coset":
            if not self.level or self.level < 1:
                raise ValueError("coset variant needs a level N >= 1")
            if (2 * complex(self.sigma).real) <= 1.0:
                raise ValueError("coset variant needs Re(2 sigma) > 1")

    @property
    def is_real(self) -> bool:
        return complex(self.sigma).imag == 0.0

    def to_json(self) -> dict:
        z = complex(self.sigma)
        out = {"sigma": z.real if z.imag == 0.0 else [z.real, z.imag],
               "variant": self.variant, "basis_dim": self.basis_dim,
               "x0": self.x0}
        if self.digits is not None:
            out["digits"] = self.digits
        if self.level is not None:
            out["level"] = self.level
        return out


# ---------------------------------------------------------------------------
# Chebyshev helpers on [0, 1] (shifted polynomials T*_m(y) = T_m(2y - 1)).

def _cheb_nodes(m: int) -> np.ndarray:
    # Ordered so that 2 x_i - 1 = cos(pi i/(m-1)), matching the DCT below.
    return 0.5 * (1.0 + np.cos(np.pi * np.arange(m) / (m - 1)))


def _cheb_values(t: np.ndarray, m: int) -> np.ndarray:
    """T_0..T_{m-1} at t (any shape); returns shape (m,) + t.shape."""
    out = np.empty((m,) + t.shape, dtype=t.dtype)
    out[0] = 1.0
    if m > 1:
        out[1] = t
    for i in range(2, m):
        out[i] = 2.0 * t * out[i - 1] - out[i - 2]
    return out


def _cheb_coeff_matrix(m: int) -> np.ndarray:
    # Values at the m Chebyshev nodes -> coefficients of T*_0..T*_{m-1}
    # (Clenshaw-Curtis / DCT-I with halved first and last weights).
    i = np.arange(m)
    cosmat = np.cos(np.pi * np.outer(i, i) / (m - 1))
    w = np.full(m, 2.0 / (m - 1))
    w[0] = w[-1] = 1.0 / (m - 1)
    c = cosmat * w[None, :]
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def _cheb_taylor0(m: int, p_max: int) -> np.ndarray:
    """Power-series coefficients of T*_0..T*_{m-1} at y = 0, to order p_max."""
    coef = np.zeros((m, p_max))
    coef[0, 0] = 1.0
    if m > 1:
        coef[1, 0] = -1.0
        coef[1, 1] = 2.0
    for i in range(2, m):
        shifted = np.zeros(p_max)
        shifted[1:] = coef[i - 1, :-1]
        coef[i] = 4.0 * shifted - 2.0 * coef[i - 1] - coef[i - 2]
    return coef


def clenshaw(coeffs: np.ndarray, x) -> np.ndarray:
    """Evaluate sum_m coeffs[m] T*_m(x) on [0, 1] by Clenshaw recursion."""
    x = np.asarray(x, dtype=float)
    t = 2.0 * (2.0 * x - 1.0)
    b1 = np.zeros_like(x, dtype=complex)
    b2 = np.zeros_like(x, dtype=complex)
    for c in coeffs[:0:-1]:
        b1, b2 = t * b1 - b2 + c, b1
    out = 0.5 * t * b1 - b2 + coeffs[0]
    return out.real if np.allclose(out.imag, 0.0, atol=1e-300) else out


# ---------------------------------------------------------------------------
# Collocation construction.

def _branch_block(sigma, nodes, ks, m_dim, tail_shift=None, step=1):
    """G[i, m] = sum over the branch indices ks of (x_i+k)^(-2s) T*_m(1/(x_i+k)),
    plus, when ``tail_shift`` is given, the exact Hurwitz completion of the
    branch sum beyond max(ks) with spacing ``step``."""
    x = nodes[:, None]
    k = np.asarray(ks, dtype=float)[None, :]
    base = x + k
    w = base ** (-2.0 * sigma)
    y = 1.0 / base
    tvals = _cheb_values((2.0 * y - 1.0).astype(w.dtype), m_dim)
    g = np.einsum("ik,mik->im", w, tvals)
    if tail_shift is not None:
        # sum_{j >= 1} (a + j*step)^(-s) = step^(-s) zeta_H(s, a/step + 1)
        # applied to every power arising from T*_m(y) = sum_p c_p y^p.
        taylor = _cheb_taylor0(m_dim, _TAIL_TERMS)
        zs = np.empty((len(nodes), _TAIL_TERMS), dtype=complex)
        for i, xi in enumerate(nodes):
            a = xi + tail_shift
            for p in range(_TAIL_TERMS):
                s = 2.0 * sigma + p
                zs[i, p] = step ** (-complex(s)) * hurwitz_zeta(s, a / step + 1.0)
        tail = zs @ taylor.T
        g = g + (tail if np.iscomplexobj(g) else tail.real)
    return g


def collocation_matrix(spec: TransferSpec) -> np.ndarray:
    """Matrix of L_sigma in the shifted-Chebyshev basis (dense, well scaled)."""
    m_dim = spec.basis_dim
    sigma = complex(spec.sigma)
    if sigma.imag == 0.0:
        sigma = sigma.real
    nodes = _cheb_nodes(m_dim)
    to_coeff = _cheb_coeff_matrix(m_dim)
    if spec.variant == "hensley":
        g = _branch_block(sigma, nodes, range(1, spec.digits + 1), m_dim)
        return to_coeff @ g
    if spec.variant == "full":
        g = _branch_block(sigma, nodes, range(1, _KSUM + 1), m_dim,
                          tail_shift=float(_KSUM))
        return to_coeff @ g
    n = spec.level
    space = CosetSpace(n)
    npts = len(space)
    blocks = []
    for r in range(n):
        k0 = r if r >= 1 else n
        ks = range(k0, _KSUM * n + 1, n)
        last = max(ks)
        g = _branch_block(sigma, nodes, ks, m_dim, tail_shift=float(last), step=n)
        blocks.append(to_coeff @ g)
    out_dtype = complex if complex(spec.sigma).imag != 0.0 else float
    a = np.zeros((npts * m_dim, npts * m_dim), dtype=out_dtype)
    for r in range(n):
        k0 = r if r >= 1 else n
        perm = space.action_table(((0, 1), (1, k0)))
        for t in range(npts):
            s = perm[t]
            a[t * m_dim:(t + 1) * m_dim, s * m_dim:(s + 1) * m_dim] += blocks[r]
    return a


# ---------------------------------------------------------------------------
# Hardy-disk frame (determinants).

_DISK_CENTER = 1.0
_DISK_RADIUS = 1.45
_DISK_FFT = 256
_DISK_TAIL = 10


def _disk_block(sigma, m_dim, ks, tail_step=None):
    """Cauchy-FFT Taylor matrix of the branch sum over ``ks`` on the disk.

    With ``tail_step`` = (last k, step), the branch sum is completed past
    the truncation by the exact Hurwitz form of sum (z + k)^(-2s-p).
    """
    c, rad, nfft = _DISK_CENTER, _DISK_RADIUS, _DISK_FFT
    theta = 2.0 * np.pi * np.arange(nfft) / nfft
    z = c + rad * np.exp(1j * theta)
    ks = np.asarray(list(ks), dtype=float)
    base = z[:, None] + ks[None, :]
    w = base ** (-2.0 * complex(sigma))
    u = (1.0 / base - c) / rad
    g = np.empty((nfft, m_dim), dtype=complex)
    cur = w
    g[:, 0] = cur.sum(axis=1)
    for m in range(1, m_dim):
        cur = cur * u
        g[:, m] = cur.sum(axis=1)
    if tail_step is not None:
        last, step = tail_step
        zh = np.empty((nfft, _DISK_TAIL + 1), dtype=complex)
        for p in range(_DISK_TAIL + 1):
            s = 2.0 * complex(sigma) + p
            a = (z + last) / step + 1.0
            zh[:, p] = step ** (-s) * np.array([hurwitz_zeta(s, av) for av in a])
        for m in range(m_dim):
            coefs = np.array([math.comb(m, p) * (-c) ** (m - p) / rad ** m
                              for p in range(min(m, _DISK_TAIL) + 1)])
            g[:, m] += zh[:, :len(coefs)] @ coefs
    coeff = np.fft.fft(g, axis=0) / nfft
    return coeff[:m_dim, :]


def fredholm_matrix(spec: TransferSpec) -> np.ndarray:
    """Matrix of L_sigma in the Hardy frame of the invariant disk; the
    frame whose truncated determinants are stable (see module docstring)."""
    m_dim = spec.basis_dim
    sigma = complex(spec.sigma)
    if spec.variant == "hensley":
        a = _disk_block(sigma, m_dim, range(1, spec.digits + 1))
    elif spec.variant == "full":
        a = _disk_block(sigma, m_dim, range(1, _KSUM + 1),
                        tail_step=(float(_KSUM), 1.0))
    else:
        n = spec.level
        space = CosetSpace(n)
        npts = len(space)
        a = np.zeros((npts * m_dim, npts * m_dim), dtype=complex)
        for r in range(n):
            k0 = r if r >= 1 else n
            ks = list(range(k0, _KSUM * n + 1, n))
            block = _disk_block(sigma, m_dim, ks, tail_step=(float(max(ks)), float(n)))
            perm = space.action_table(((0, 1), (1, k0)))
            for t in range(npts):
                s = perm[t]
                a[t * m_dim:(t + 1) * m_dim, s * m_dim:(s + 1) * m_dim] += block
    if spec.is_real:
        return a.real
    return a


# ---------------------------------------------------------------------------
# Taylor coordinate form (the published closed-form entries).

def _branch_zeta(s, x0, variant, digits=None, residue=None, modulus=None):
    if variant == "full":
        return hurwitz_zeta(s, x0 + 1.0)
    if variant == "hensley":
        return sum((x0 + k) ** (-complex(s)) for k in range(1, digits + 1))
    r = residue if residue >= 1 else residue + modulus
    return modulus ** (-complex(s)) * hurwitz_zeta(s, (x0 + r) / modulus)


def _taylor_block(sigma, m_dim, x0, zvals):
    a = np.empty((m_dim, m_dim), dtype=complex)
    for m in range(m_dim):
        s = 2 * sigma + m
        for j in range(m_dim):
            b = binomial(s + j - 1, j)
            if abs(b) > _BINOMIAL_CAP:
                raise ValueError(
                    f"binomial overflow at basis_dim {m_dim}; cap the dimension")
            a[j, m] = (-1) ** j * b * zvals[m + j]
    return a


@dataclass
class TransferMatrix:
    """Truncated operator with its provenance spec.

    ``entries`` holds the Taylor coordinate form; ``collocation`` the
    numerically effective Chebyshev form.  Both are square of size
    basis_dim * blocks.
    """

    spec: TransferSpec
    blocks: int = 1
    space: CosetSpace | None = None
    _entries: np.ndarray | None = field(default=None, repr=False)
    _colloc: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.spec.basis_dim * self.blocks

    @property
    def entries(self) -> np.ndarray:
        if self._entries is None:
            self._entries = self._build_taylor()
        return self._entries

    @property
    def collocation(self) -> np.ndarray:
        if self._colloc is None:
            self._colloc = collocation_matrix(self.spec)
        return self._colloc

    def _build_taylor(self) -> np.ndarray:
        spec = self.spec
        m_dim = spec.basis_dim
        sigma = complex(spec.sigma)
        # Largest binomial in the table is C(2s + 2M - 3, M - 1); refuse
        # before building when it cannot be represented.
        top = 2 * sigma.real + 2 * m_dim - 3
        if top > 2:
            log_max = (math.lgamma(top + 1) - 2 * math.lgamma(m_dim)) / math.log(10)
            if log_max > 250:
                cap = int(250 * math.log(10) / (2 * math.log(2)))
                raise ValueError(
                    f"binomial overflow at basis_dim {m_dim}; "
                    f"cap the dimension near {cap}")
        if spec.variant in ("full", "hensley"):
            zvals = [_branch_zeta(2 * sigma + t, spec.x0, spec.variant,
                                  digits=spec.digits)
                     for t in range(2 * m_dim - 1)]
            a = _taylor_block(sigma, m_dim, spec.x0, zvals)
            return a.real if spec.is_real else a
        n = spec.level
        space = self.space or CosetSpace(n)
        npts = len(space)
        a = np.zeros((npts * m_dim, npts * m_dim), dtype=complex)
        for r in range(n):
            zvals = [_branch_zeta(2 * sigma + t, spec.x0, "coset",
                                  residue=r, modulus=n)
                     for t in range(2 * m_dim - 1)]
            block = _taylor_block(sigma, m_dim, spec.x0, zvals)
            k0 = r if r >= 1 else n
            perm = space.action_table(((0, 1), (1, k0)))
            for t in range(npts):
                s = perm[t]
                a[t * m_dim:(t + 1) * m_dim, s * m_dim:(s + 1) * m_dim] += block
        return a.real if spec.is_real else a

    def block(self, t: int, s: int, form: str = "entries") -> np.ndarray:
        m = self.spec.basis_dim
        mat = self.entries if form == "entries" else self.collocation
        return mat[t * m:(t + 1) * m, s * m:(s + 1) * m]

    def trailing_row_norms(self) -> np.ndarray:
        """Row norms in the Hardy frame: row j collects the order-j disk
        coefficients of the branch images, so geometric decay here is the
        computable surrogate of nuclearity."""
        return np.abs(fredholm_matrix(self.spec)).sum(axis=1)


def build_matrix(spec: TransferSpec) -> TransferMatrix:
    """Assemble the truncated operator for ``spec`` (lazily in both forms)."""
    if spec.variant == "coset":
        space = CosetSpace(spec.level)
        return TransferMatrix(spec, blocks=len(space), space=space)
    return TransferMatrix(spec, blocks=1)


# ---------------------------------------------------------------------------
# Spectral routines (all on the collocation form).

@dataclass
class EigenResult:
    """Leading eigendata; ``coefficients`` are shifted-Chebyshev coefficients
    per coset block, normalized so the block-0 function is 1 at x = 0."""

    eigenvalue: float
    coefficients: np.ndarray
    gap: float
    gap_ok: bool
    spectrum: np.ndarray
    basis_dim: int

    def eval(self, x, block: int = 0):
        m = self.basis_dim
        return clenshaw(self.coefficients[block * m:(block + 1) * m], x)


def top_eigen(tm: TransferMatrix) -> EigenResult:
    """Leading eigenvalue and eigenfunction of the truncated operator.

    A spectral gap below GAP_THRESHOLD only sets ``gap_ok = False``;
    results are still returned.
    """
    if not tm.spec.is_real:
        raise ValueError("top_eigen expects a matrix built at real sigma")
    vals, vecs = np.linalg.eig(tm.collocation)
    order = np.argsort(-np.abs(vals))
    vals = vals[order]
    vecs = vecs[:, order]
    lead = vals[0]
    if abs(lead.imag) > 1e-9 * max(1.0, abs(lead)):
        raise ValueError("leading eigenvalue unexpectedly complex")
    gap = float(abs(lead) - abs(vals[1])) if len(vals) > 1 else float("inf")
    vec = np.real_if_close(vecs[:, 0], tol=1e6)
    v0 = clenshaw(vec[:tm.spec.basis_dim], 0.0)
    if abs(v0) < 1e-300:
        raise ValueError("eigenvector vanishes at the normalization point")
    return EigenResult(float(lead.real), vec / v0, gap,
                       gap >= GAP_THRESHOLD, vals, tm.spec.basis_dim)


def top_eigenvalue(sigma: float, variant: str = "full", basis_dim: int = 24,
                   digits: int | None = None, level: int | None = None) -> float:
    spec = TransferSpec(sigma, variant, basis_dim, 0.0, digits, level)
    return top_eigen(build_matrix(spec)).eigenvalue


def lyapunov_exponent(variant: str = "full", sigma_star: float = 1.0,
                      basis_dim: int = 24, digits: int | None = None,
                      level: int | None = None, h: float = 1e-4):
    """|d lambda_sigma / d sigma| at sigma_star, with an error estimate.

    Central differences with one Richardson step; the Khintchine-Levy value
    pi^2/(6 log 2) is recovered for the full variant at sigma_star = 1.
    The raw derivative is negative (lambda_sigma is strictly decreasing);
    its magnitude is what is reported, the signed value travels in the
    report, since the source lemma leaves the sign convention open.
    """

    def lam(sig):
        return top_eigenvalue(sig, variant, basis_dim, digits, level)

    d_h = (lam(sigma_star + h) - lam(sigma_star - h)) / (2 * h)
    d_h2 = (lam(sigma_star + h / 2) - lam(sigma_star - h / 2)) / h
    richardson = (4 * d_h2 - d_h) / 3
    err = abs(richardson - d_h2)
    if not math.isfinite(richardson) or err > 1e-2 * max(1.0, abs(richardson)):
        raise ArithmeticError("difference quotient did not converge")
    return abs(richardson), {"derivative": richardson, "error_estimate": err}


def gauss_kuzmin_iterate(n: int, basis_dim: int = 24, grid_step: float = 0.01):
    """Iterates L_1^k (1) for k = 0..n with sup distances to the Gauss
    density h(x) = 1/((1+x) log 2) on a grid.

    Returns (coefficient vectors in the Chebyshev frame, sup distances).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    a = build_matrix(TransferSpec(1.0, "full", basis_dim)).collocation
    grid = np.arange(0.0, 1.0 + grid_step / 2, grid_step)
    target = 1.0 / ((1.0 + grid) * math.log(2.0))
    coeffs = np.zeros(basis_dim)
    coeffs[0] = 1.0
    out_coeffs = [coeffs.copy()]
    dists = [float(np.max(np.abs(clenshaw(coeffs, grid) - target)))]
    for _ in range(n):
        coeffs = a @ coeffs
        out_coeffs.append(coeffs.copy())
        dists.append(float(np.max(np.abs(clenshaw(coeffs, grid) - target))))
    return out_coeffs, dists


def selberg_zeta(s: complex, group: str = "pgl2z", basis_dim: int = 24,
                 stability_step: int = 8):
    """det(1 - L_s) (PGL(2,Z) / coset) or det(1 - L_s^2) (SL(2,Z)).

    Returns (value, report); the report carries the value at
    basis_dim + stability_step and their difference as the truncation
    error estimate.
    """
    group = group.lower()

    def one(dim):
        if group == "pgl2z":
            a = fredholm_matrix(TransferSpec(s, "full", dim))
            return complex(np.linalg.det(np.eye(a.shape[0]) - a))
        if group == "sl2z":
            a = fredholm_matrix(TransferSpec(s, "full", dim))
            return complex(np.linalg.det(np.eye(a.shape[0]) - a @ a))
        if group.startswith("coset"):
            level = int(group.split("(")[1].rstrip(")")) if "(" in group else 2
            a = fredholm_matrix(TransferSpec(s, "coset", dim, level=level))
            return complex(np.linalg.det(np.eye(a.shape[0]) - a))
        raise ValueError(f"unknown group {group!r}")

    value = one(basis_dim)
    refined = one(basis_dim + stability_step)
    report = {"value_refined": refined, "stability": abs(value - refined)}
    return value, report


def hensley_dimension(digits: int, basis_dim: int = 24, tol: float = 1e-10,
                      bracket=(0.1, 1.0)):
    """Hausdorff dimension of the bounded-digit set E_N: the sigma with
    top eigenvalue 1 of the digit-bounded operator, by bisection."""
    if digits < 2:
        raise ValueError("dimension solve needs digit bound >= 2")

    def f(sig):
        return top_eigenvalue(sig, "hensley", basis_dim, digits=digits) - 1.0

    lo, hi = bracket
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ArithmeticError(f"bracket {bracket} does not straddle the root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def hensley_dimension_asymptotic(digits: int) -> float:
    """Two-term asymptotic 1 - 6/(pi^2 N) - 72 log N / (pi^4 N^2)."""
    n = float(digits)
    return 1.0 - 6.0 / (math.pi ** 2 * n) - 72.0 * math.log(n) / (math.pi ** 4 * n * n)
