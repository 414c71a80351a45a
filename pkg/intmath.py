"""Exact integer linear algebra: Smith form with transforms, column Hermite form, unimodular completion.

Matrices are lists of rows of Python ints so values never overflow.
"""

import logging
from math import gcd

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

try:
    from sympy import igcdex
except ImportError:  # sympy >= 1.13 no longer re-exports it at top level
    from sympy.core.intfunc import igcdex

from errors import ParameterError

logger = logging.getLogger(__name__)


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def to_int_rows(matrix):
    """Copy any nested sequence (lists, tuples, numpy arrays) into a list of int rows."""
    return [[int(x) for x in row] for row in matrix]


def mat_mul(a, b):
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def mat_vec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def gcd_all(values):
    g = 0
    for x in values:
        g = gcd(g, int(x))
    return g


def smith_decomposition(matrix):
    """
    Diagonalize an integer matrix by unimodular row and column operations.

    Args:
        matrix: k x r integer matrix.

    Returns:
        (U, S, V) with U * matrix * V = S, S diagonal with nonnegative entries,
        U (k x k) and V (r x r) unimodular. Divisibility of the diagonal is not
        enforced; invariant_factors() gives the normalized chain.
    """
    a = to_int_rows(matrix)
    k = len(a)
    r = len(a[0]) if k else 0
    u = identity(k)
    v = identity(r)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    for t in range(min(k, r)):
        # smallest nonzero entry of the trailing block goes to (t, t)
        best = None
        for i in range(t, k):
            for j in range(t, r):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])

        while True:
            done = True
            for i in range(t + 1, k):
                if a[i][t] != 0:
                    f = a[i][t] // a[t][t]
                    a[i] = [x - f * y for x, y in zip(a[i], a[t])]
                    u[i] = [x - f * y for x, y in zip(u[i], u[t])]
                    if a[i][t] != 0:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, r):
                if a[t][j] != 0:
                    f = a[t][j] // a[t][t]
                    for row in a:
                        row[j] -= f * row[t]
                    for row in v:
                        row[j] -= f * row[t]
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        done = False
            if done:
                break

        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]

    return u, a, v


def invariant_factors(matrix):
    """Nonzero invariant factors of an integer matrix via sympy's Smith normal form."""
    snf = smith_normal_form(Matrix(to_int_rows(matrix)), domain=ZZ)
    n = min(snf.shape)
    return [abs(int(snf[i, i])) for i in range(n) if snf[i, i] != 0]


def column_hnf(matrix):
    """
    Column Hermite normal form of the lattice spanned by the columns of matrix.

    Returns:
        (H, pivots): H is a k x m integer matrix (list of rows) whose column j
        vanishes above row pivots[j], has a positive entry h_j there, and every
        earlier column has its pivots[j]-entry reduced into [0, h_j).
    """
    rows = to_int_rows(matrix)
    k = len(rows)
    remaining = [list(col) for col in zip(*rows)] if rows else []
    remaining = [c for c in remaining if any(c)]
    basis = []
    pivots = []

    for i in range(k):
        while True:
            active = [idx for idx, c in enumerate(remaining) if c[i] != 0]
            if len(active) <= 1:
                break
            p = min(active, key=lambda idx: abs(remaining[idx][i]))
            piv = remaining[p]
            for idx in active:
                if idx != p:
                    f = remaining[idx][i] // piv[i]
                    remaining[idx] = [x - f * y for x, y in zip(remaining[idx], piv)]
            remaining = [c for c in remaining if any(c)]
        if not active:
            continue
        col = remaining.pop(active[0])
        if col[i] < 0:
            col = [-x for x in col]
        basis.append(col)
        pivots.append(i)
        remaining = [c for c in remaining if any(c)]

    for j, pj in enumerate(pivots):
        h = basis[j][pj]
        for jj in range(j):
            f = basis[jj][pj] // h
            if f:
                basis[jj] = [x - f * y for x, y in zip(basis[jj], basis[j])]

    hnf = transpose(basis) if basis else [[] for _ in range(k)]
    return hnf, pivots


def complete_to_unimodular(row):
    """
    Complete a primitive integer row to a matrix of determinant 1.

    Args:
        row: integer vector of length d >= 2 with gcd 1.

    Returns:
        (gamma, gamma_inv): integer d x d matrices, gamma has first row equal to
        row, det(gamma) = 1, and gamma * gamma_inv = identity.
    """
    w = [int(x) for x in row]
    d = len(w)
    if d < 2:
        raise ParameterError("unimodular completion needs d >= 2")
    if gcd_all(w) != 1:
        raise ParameterError(f"row {w} is not primitive")

    # column operations w -> w*C tracked as U (product of C) and U_inv (product of C^-1, reversed)
    u = identity(d)
    u_inv = identity(d)
    sign = 1

    while sum(1 for x in w if x != 0) > 1:
        p = min((i for i in range(d) if w[i] != 0), key=lambda i: abs(w[i]))
        for j in range(d):
            if j != p and w[j] != 0:
                f = w[j] // w[p]
                w[j] -= f * w[p]
                for r_ in u:
                    r_[j] -= f * r_[p]
                u_inv[p] = [x + f * y for x, y in zip(u_inv[p], u_inv[j])]

    p = next(i for i in range(d) if w[i] != 0)
    if p != 0:
        w[0], w[p] = w[p], w[0]
        for r_ in u:
            r_[0], r_[p] = r_[p], r_[0]
        u_inv[0], u_inv[p] = u_inv[p], u_inv[0]
        sign = -sign
    if w[0] < 0:
        w[0] = -w[0]
        for r_ in u:
            r_[0] = -r_[0]
        u_inv[0] = [-x for x in u_inv[0]]
        sign = -sign

    gamma = u_inv
    gamma_inv = u
    if sign < 0:
        # negate the last row of gamma (and last column of its inverse)
        gamma[-1] = [-x for x in gamma[-1]]
        for r_ in gamma_inv:
            r_[-1] = -r_[-1]
    return gamma, gamma_inv


def lift_primitive(v, q):
    """
    Lift a residue vector v mod q with gcd(v, q) = 1 to a primitive integer vector.

    The lift agrees with v modulo q coordinatewise.
    """
    w = [int(x) % q for x in v]
    if gcd(gcd_all(w), q) != 1:
        raise ParameterError(f"residue vector {w} is not primitive mod {q}")
    if gcd_all(w) == 1:
        return w
    if len(w) < 2:
        raise ParameterError("primitive lifting needs at least two coordinates")
    rest = gcd_all(w[1:])
    if rest == 0:
        w[1] = q
        rest = q
    t = 0
    while gcd(w[0] + t * q, rest) != 1:
        t += 1
    w[0] += t * q
    return w


def extended_gcd(a, b):
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    x, y, g = igcdex(a, b)
    return int(g), int(x), int(y)


def determinant(matrix):
    return int(Matrix(to_int_rows(matrix)).det())
