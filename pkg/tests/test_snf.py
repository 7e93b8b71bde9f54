import random

import pytest

from arithmos.snf import (cokernel_invariants, elementary_divisors,
                          integer_rank, kernel_basis, mat_mul_vec,
                          smith_normal_form)


def _matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)]
            for row in a]


def test_snf_factorization_random():
    rng = random.Random(7)
    for _ in range(25):
        m = rng.randint(1, 5)
        n = rng.randint(1, 5)
        mat = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(m)]
        d, left, right = smith_normal_form(mat)
        assert _matmul(_matmul(left, mat), right) == d
        # diagonal, nonnegative, divisibility chain
        for i in range(m):
            for j in range(n):
                if i != j:
                    assert d[i][j] == 0
        diag = [d[i][i] for i in range(min(m, n))]
        assert all(x >= 0 for x in diag)
        for a, b in zip(diag, diag[1:]):
            if a:
                assert b % a == 0 or b == 0
            else:
                assert b == 0


def test_known_divisors():
    mat = [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]
    assert elementary_divisors(mat) == [2, 2, 156]


def test_kernel_basis_annihilates():
    mat = [[1, 0, 1], [0, 1, 0], [1, 1, 1]]
    basis = kernel_basis(mat)
    assert len(basis) == 1
    for vec in basis:
        assert mat_mul_vec(mat, vec) == [0, 0, 0]


def test_rank():
    assert integer_rank([[1, 2], [2, 4]]) == 1
    assert integer_rank([[1, 0], [0, 1]]) == 2


def test_cokernel_invariants():
    # Z^2 / im([[2,0],[0,3]]) = Z/2 + Z/3 = Z/6 in divisor-chain form
    torsion, free = cokernel_invariants([[2, 0], [0, 3]])
    assert torsion == [6]
    assert free == 0
    # zero map: full free cokernel
    torsion, free = cokernel_invariants([[0, 0], [0, 0]])
    assert torsion == [] and free == 2


def test_sympy_crosscheck():
    sympy = pytest.importorskip("sympy")
    from sympy.matrices.normalforms import smith_normal_form as sym_snf
    rng = random.Random(3)
    for _ in range(10):
        m = rng.randint(2, 4)
        n = rng.randint(2, 4)
        mat = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)]
        ours = elementary_divisors(mat)
        ref = sym_snf(sympy.Matrix(mat))
        ref_diag = [abs(ref[i, i]) for i in range(min(m, n)) if ref[i, i] != 0]
        assert ours == ref_diag
