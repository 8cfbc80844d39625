"""Exact linear algebra over the rationals.

Matrices are dense lists of row lists with Fraction entries (ints are
accepted and upgraded).  Elimination is deterministic: pivot search walks
columns left to right and picks the lowest-index row with a nonzero entry,
so kernels, ranks and echelon forms are reproducible run to run.

Forward elimination runs on integer-rescaled rows (cross-multiplication
with per-row gcd reduction); reduced forms and solves finish the job in
Fractions.
"""

from fractions import Fraction
from math import gcd, lcm

Fr = Fraction

# ---------------------------------------------------------------------------
# construction helpers


def frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def zeros(m, n):
    return [[Fr(0)] * n for _ in range(m)]


def identity(n):
    M = zeros(n, n)
    for i in range(n):
        M[i][i] = Fr(1)
    return M


def copy_mat(A):
    return [row[:] for row in A]


def transpose(A):
    if not A:
        return []
    return [list(col) for col in zip(*A)]


def mat_mul(A, B):
    if not A:
        return []
    if not B:
        # len(A) x 0 result; only sensible when A has zero columns
        return [[] for _ in A]
    n = len(B)
    p = len(B[0])
    out = []
    Bcols = list(zip(*B))
    for row in A:
        orow = []
        for col in Bcols:
            s = Fr(0)
            for a, b in zip(row, col):
                if a and b:
                    s += a * b
            orow.append(s)
        out.append(orow)
    return out


def mat_vec(A, v):
    out = []
    for row in A:
        s = Fr(0)
        for a, b in zip(row, v):
            if a and b:
                s += a * b
        out.append(s)
    return out


def mat_mul_sh(A, B, rows, cols):
    """A∘B with an explicit result shape, so zero-dimensional middle
    spaces still produce a well-shaped zero matrix."""
    if not A or not B or not A[0] or not B[0]:
        return zeros(rows, cols)
    return mat_mul(A, B)


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(A, c):
    c = frac(c)
    return [[c * a for a in row] for row in A]


def is_zero(A):
    return all(all(x == 0 for x in row) for row in A)


def mat_eq(A, B):
    if len(A) != len(B):
        return False
    return all(ra == rb for ra, rb in zip(A, B))


# ---------------------------------------------------------------------------
# elimination


def _int_rows(A):
    """Rescale each row to coprime integers; zero rows stay empty-scaled."""
    rows = []
    for row in A:
        den = 1
        for x in row:
            if x:
                den = lcm(den, frac(x).denominator)
        ints = [int(x * den) for x in row]
        g = 0
        for x in ints:
            g = gcd(g, x)
        if g > 1:
            ints = [x // g for x in ints]
        rows.append(ints)
    return rows


def _reduce_row(row):
    g = 0
    for x in row:
        g = gcd(g, x)
        if g == 1:
            return row
    if g > 1:
        return [x // g for x in row]
    return row


def int_echelon(A):
    """Row echelon form over the integers.

    Returns (rows, pivot_cols); rows are integer lists, one per pivot,
    in pivot-column order.  Deterministic lowest-row pivoting.
    """
    if not A:
        return [], []
    rows = _int_rows(A)
    m, n = len(rows), len(A[0])
    pivots = []
    r = 0
    for c in range(n):
        sel = None
        for i in range(r, m):
            if rows[i][c]:
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        p = rows[r][c]
        for i in range(r + 1, m):
            f = rows[i][c]
            if f:
                ri, rp = rows[i], rows[r]
                rows[i] = _reduce_row([p * a - f * b for a, b in zip(ri, rp)])
        pivots.append(c)
        r += 1
        if r == m:
            break
    return rows[:r], pivots


def rank(A):
    return len(int_echelon(A)[1])


def rref(A):
    """Reduced row echelon form over Fractions: (rows, pivot_cols)."""
    ech, pivots = int_echelon(A)
    if not pivots:
        return [], []
    n = len(A[0])
    rows = [[Fr(x) for x in row] for row in ech]
    for i in reversed(range(len(pivots))):
        c = pivots[i]
        p = rows[i][c]
        rows[i] = [x / p for x in rows[i]]
        for j in range(i):
            f = rows[j][c]
            if f:
                rows[j] = [a - f * b for a, b in zip(rows[j], rows[i])]
    return rows, pivots


def kernel_basis(A, ncols=None):
    """Basis of the right kernel, one vector per free column, in column order.

    The free coordinate is set to 1, so for A = 0 the result is the identity
    basis.  Vectors are lists of Fractions.
    """
    if ncols is None:
        if not A:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(A[0])
    if not A:
        return [unit_vector(ncols, j) for j in range(ncols)]
    rows, pivots = rref(A)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [Fr(0)] * ncols
        v[free] = Fr(1)
        for i, c in enumerate(pivots):
            v[c] = -rows[i][free]
        basis.append(v)
    return basis


def unit_vector(n, j):
    v = [Fr(0)] * n
    v[j] = Fr(1)
    return v


def solve(A, b):
    """One solution x of A x = b, or None if inconsistent."""
    m = len(A)
    n = len(A[0]) if A else 0
    aug = [list(map(frac, row)) + [frac(bb)] for row, bb in zip(A, b)]
    rows, pivots = rref(aug)
    for i, c in enumerate(pivots):
        if c == n:
            return None
    x = [Fr(0)] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][n]
    # pivots of the augmented system may involve free columns feeding back;
    # a direct residual check keeps this honest.
    for row, bb in zip(A, b):
        s = sum((a * t for a, t in zip(row, x) if a and t), Fr(0))
        if s != bb:
            return None
    return x


def inv(A):
    n = len(A)
    aug = [list(map(frac, row)) + identity(n)[i] for i, row in enumerate(A)]
    rows, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ValueError("matrix not invertible")
    return [rows[i][n:] for i in range(n)]


def column_space_pivots(A):
    """Indices of a deterministic set of columns spanning the column space."""
    return int_echelon(A)[1]


def in_span(vectors, v):
    """Is v in the span of the given vectors (all plain lists)?"""
    if all(x == 0 for x in v):
        return True
    if not vectors:
        return False
    A = transpose(vectors)
    return solve(A, v) is not None


def integer_primitive(v):
    """Scale a rational vector to coprime integers, first nonzero entry > 0."""
    den = 1
    for x in v:
        if x:
            den = lcm(den, frac(x).denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    for x in ints:
        if x:
            if x < 0:
                ints = [-y for y in ints]
            break
    return [Fr(x) for x in ints]


# ---------------------------------------------------------------------------
# sparse vectors keyed by hashable labels


def vec_add(u, v):
    out = dict(u)
    for k, x in v.items():
        y = out.get(k)
        if y is None:
            out[k] = x
        else:
            y = y + x
            if y:
                out[k] = y
            else:
                del out[k]
    return out


def vec_axpy(out, c, v):
    """In place out += c*v for sparse dict vectors."""
    if not c:
        return out
    for k, x in v.items():
        y = out.get(k, 0) + c * x
        if y:
            out[k] = y
        else:
            out.pop(k, None)
    return out


def vec_scale(v, c):
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


def vec_sub(u, v):
    return vec_axpy(dict(u), Fr(-1), v)


class SpanSolver:
    """Repeated exact coordinate solves against a fixed list of sparse vectors.

    Picks a deterministic set of pivot labels once, inverts the square
    subsystem, and verifies each solve against the full vector.
    """

    def __init__(self, vecs):
        self.vecs = vecs
        self.labels = sorted({k for v in vecs for k in v})
        self.index = {k: i for i, k in enumerate(self.labels)}
        self.dim = len(vecs)
        if self.dim == 0:
            self.pivot_labels = []
            self.inverse = []
            return
        A = zeros(len(self.labels), self.dim)
        for j, v in enumerate(vecs):
            for k, x in v.items():
                A[self.index[k]][j] = frac(x)
        ech, pivots = int_echelon(transpose(A))
        if len(pivots) != self.dim:
            raise ValueError("basis vectors are linearly dependent")
        self.pivot_labels = [self.labels[c] for c in pivots]
        square = [[A[self.index[lab]][j] for j in range(self.dim)]
                  for lab in self.pivot_labels]
        self.inverse = inv(square)

    def coords(self, v):
        """Coordinates of sparse v in the basis; None if v is outside the span."""
        if not v:
            return [Fr(0)] * self.dim
        if self.dim == 0:
            return None
        rhs = [frac(v.get(lab, 0)) for lab in self.pivot_labels]
        x = mat_vec(self.inverse, rhs)
        check = {}
        for j, c in enumerate(x):
            if c:
                vec_axpy(check, c, self.vecs[j])
        if check != {k: frac(val) for k, val in v.items() if val}:
            return None
        return x

    def contains(self, v):
        return self.coords(v) is not None
