"""Exact integer linear algebra: Smith normal form, kernels, cokernels.

Plain-Python integers throughout, so there is no overflow; the matrices
seen here (homology presentations, subshift coboundaries, Cuntz-Krieger
data) stay small enough that the cubic elimination is instantaneous.
"""

from __future__ import annotations


def _clone(mat):
    return [row[:] for row in mat]


def smith_normal_form(mat):
    """Return (D, L, R) with D = L @ mat @ R in Smith normal form.

    D has nonnegative diagonal entries d_1 | d_2 | ..., zeros elsewhere;
    L and R are unimodular.  ``mat`` is a list of rows of ints and is not
    modified.
    """
    a = _clone(mat)
    m = len(a)
    n = len(a[0]) if m else 0
    left = [[int(i == j) for j in range(m)] for i in range(m)]
    right = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in right:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        # row_dst += c * row_src
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        left[dst] = [x + c * y for x, y in zip(left[dst], left[src])]

    def add_col(src, dst, c):
        for row in a:
            row[dst] += c * row[src]
        for row in right:
            row[dst] += c * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        left[i] = [-x for x in left[i]]

    t = 0
    while t < min(m, n):
        # Find a pivot in the remaining block.
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = abs(a[i][j])
                if v and (best is None or v < best):
                    best = v
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            # Clear column t.
            done = True
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    add_row(t, i, -q)
                    if a[i][t]:
                        swap_rows(t, i)
                        done = False
            # Clear row t.
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(t, j, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        done = False
            if done:
                break
        # Make the pivot divide the rest of the block.
        d = a[t][t]
        fixed = True
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if a[i][j] % d:
                    add_row(i, t, 1)
                    fixed = False
                    break
            if not fixed:
                break
        if not fixed:
            continue
        if a[t][t] < 0:
            negate_row(t)
        t += 1
    return a, left, right


def elementary_divisors(mat):
    """Nonzero diagonal of the Smith normal form."""
    d, _, _ = smith_normal_form(mat)
    out = []
    for i in range(min(len(d), len(d[0]) if d else 0)):
        if d[i][i]:
            out.append(d[i][i])
    return out


def integer_rank(mat):
    return len(elementary_divisors(mat))


def kernel_basis(mat):
    """Basis (list of int vectors) of the integer kernel {x : mat @ x = 0}.

    D = L A R  =>  A (R e_j) = 0 exactly for the columns j past the rank,
    so the trailing columns of R form a primitive kernel basis.
    """
    if not mat:
        return []
    n = len(mat[0])
    d, _, right = smith_normal_form(mat)
    r = sum(1 for i in range(min(len(d), n)) if d[i][i])
    return [[right[i][j] for i in range(n)] for j in range(r, n)]


def cokernel_invariants(mat):
    """Cokernel Z^m / im(mat) as (torsion divisors > 1, free rank)."""
    m = len(mat)
    divs = elementary_divisors(mat)
    torsion = [d for d in divs if d > 1]
    return torsion, m - len(divs)


def mat_mul_vec(mat, vec):
    return [sum(x * y for x, y in zip(row, vec)) for row in mat]
