"""Lie algebras given by exact rational structure constants.

A LieAlgebra fixes a basis e_1..e_n, the bracket table c[a][b][k] with
[e_a,e_b] = sum_k c[a][b][k] e_k, and an invariant symmetric bilinear form
B.  All indices are 0-based internally; the file format and printed names
are 1-based.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError
from .linalg import Fr, frac, inv, rank

# ---------------------------------------------------------------------------


@dataclass(eq=False)
class LieAlgebra:
    name: str
    dim: int
    basis_names: tuple
    c: tuple          # c[a][b] = tuple of (k, Fraction) pairs, sparse
    B: tuple          # n x n tuple of tuples
    B_inv: tuple
    _cache: dict = field(default_factory=dict, repr=False)

    def bracket(self, a, b):
        """Sparse bracket [e_a, e_b] as a tuple of (index, coeff)."""
        return self.c[a][b]

    def c_full(self):
        """Dense c[a][b][k] table of Fractions."""
        n = self.dim
        out = [[[Fr(0)] * n for _ in range(n)] for _ in range(n)]
        for a in range(n):
            for b in range(n):
                for k, x in self.c[a][b]:
                    out[a][b][k] = x
        return out

    def ad(self, a):
        """Matrix of ad(e_a) acting on g, columns indexed by source."""
        n = self.dim
        M = [[Fr(0)] * n for _ in range(n)]
        for b in range(n):
            for k, x in self.c[a][b]:
                M[k][b] = x
        return M

    def cache(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def to_dict(self):
        brackets = {}
        for a in range(self.dim):
            for b in range(a + 1, self.dim):
                if self.c[a][b]:
                    brackets[f"{a + 1},{b + 1}"] = [
                        [k + 1, _fmt(x)] for k, x in self.c[a][b]]
        return {
            "name": self.name,
            "dim": self.dim,
            "basis": list(self.basis_names),
            "brackets": brackets,
            "B": [[_fmt(x) for x in row] for row in self.B],
        }


def _fmt(x):
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_rational(s):
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {s!r}: {exc}") from None


def make_algebra(name, dim, brackets, B, basis_names=None):
    """Build a LieAlgebra from a sparse bracket map {(a,b): [(k, coeff)]}, a<b."""
    n = dim
    table = [[{} for _ in range(n)] for _ in range(n)]
    for (a, b), terms in brackets.items():
        if not (0 <= a < n and 0 <= b < n):
            raise InputError(f"bracket index ({a + 1},{b + 1}) out of range")
        for k, x in terms:
            if not 0 <= k < n:
                raise InputError(f"bracket target {k + 1} out of range")
            x = frac(x)
            if x:
                table[a][b][k] = table[a][b].get(k, Fr(0)) + x
                table[b][a][k] = table[b][a].get(k, Fr(0)) - x
    c = tuple(tuple(tuple(sorted((k, x) for k, x in table[a][b].items() if x))
                    for b in range(n)) for a in range(n))
    Bm = tuple(tuple(frac(x) for x in row) for row in B)
    try:
        B_inv = tuple(tuple(row) for row in inv([list(r) for r in Bm]))
    except ValueError:
        raise InputError("B is not invertible")
    if basis_names is None:
        basis_names = tuple(f"e{i + 1}" for i in range(n))
    return LieAlgebra(name, n, tuple(basis_names), c, Bm, B_inv)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    checks: list  # (name, ok, first_violation_or_None)

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)

    def to_dict(self):
        return {
            "ok": self.ok,
            "checks": [
                {"check": name, "ok": ok,
                 **({"at": list(at)} if at is not None else {})}
                for name, ok, at in self.checks
            ],
        }


def validate(alg):
    """Check antisymmetry, Jacobi, B symmetry/invertibility, B invariance."""
    n = alg.dim
    c = alg.c_full()
    checks = []

    bad = None
    for a in range(n):
        for b in range(n):
            for k in range(n):
                if c[a][b][k] != -c[b][a][k]:
                    bad = (a + 1, b + 1, k + 1)
                    break
            if bad:
                break
        if bad:
            break
    checks.append(("antisymmetry", bad is None, bad))

    bad = None
    for a in range(n):
        for b in range(n):
            for d in range(n):
                # [[a,b],d] + [[b,d],a] + [[d,a],b] = 0 componentwise
                for k in range(n):
                    s = Fr(0)
                    for m in range(n):
                        s += c[a][b][m] * c[m][d][k]
                        s += c[b][d][m] * c[m][a][k]
                        s += c[d][a][m] * c[m][b][k]
                    if s:
                        bad = (a + 1, b + 1, d + 1)
                        break
                if bad:
                    break
            if bad:
                break
        if bad:
            break
    checks.append(("jacobi", bad is None, bad))

    bad = None
    for a in range(n):
        for b in range(n):
            if alg.B[a][b] != alg.B[b][a]:
                bad = (a + 1, b + 1)
                break
        if bad:
            break
    checks.append(("B_symmetric", bad is None, bad))

    invertible = rank([list(r) for r in alg.B]) == n
    checks.append(("B_invertible", invertible, None if invertible else (0,)))

    bad = None
    if invertible:
        for a in range(n):
            for b in range(n):
                for k in range(n):
                    # B([e_a,e_b],e_k) + B(e_b,[e_a,e_k]) = 0
                    s = Fr(0)
                    for m in range(n):
                        s += c[a][b][m] * alg.B[m][k]
                        s += c[a][k][m] * alg.B[b][m]
                    if s:
                        bad = (a + 1, b + 1, k + 1)
                        break
                if bad:
                    break
            if bad:
                break
    checks.append(("B_invariance", bad is None, bad))
    return ValidationReport(checks)


# ---------------------------------------------------------------------------
# built-ins


def killing_form(dim, brackets):
    """Killing form K(x,y) = tr(ad x ad y) from a sparse bracket map."""
    table = [[{} for _ in range(dim)] for _ in range(dim)]
    for (a, b), terms in brackets.items():
        for k, x in terms:
            table[a][b][k] = frac(x)
            table[b][a][k] = -frac(x)
    K = [[Fr(0)] * dim for _ in range(dim)]
    for a in range(dim):
        for b in range(dim):
            s = Fr(0)
            for cc in range(dim):
                for m, xbcm in table[b][cc].items():
                    s += xbcm * table[a][m].get(cc, Fr(0))
            K[a][b] = s
    return K


def su2():
    br = {(0, 1): [(2, 1)], (1, 2): [(0, 1)], (2, 0): [(1, 1)]}
    brm = {(0, 1): br[(0, 1)], (1, 2): br[(1, 2)], (0, 2): [(1, -1)]}
    B = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    return make_algebra("su2", 3, brm, B)


def abelian(n):
    if n < 1:
        raise InputError("abelian:n needs n >= 1")
    B = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    return make_algebra(f"abelian:{n}", n, {}, B)


def sl2():
    # basis h, e, f
    br = {(0, 1): [(1, 2)], (0, 2): [(2, -2)], (1, 2): [(0, 1)]}
    B = killing_form(3, br)
    return make_algebra("sl2", 3, br, B, basis_names=("h", "e", "f"))


def _sl_basis_matrices(n):
    """Chevalley-style basis of sl_n as n x n Fraction matrices."""
    mats = []
    names = []
    for i in range(n - 1):
        m = [[Fr(0)] * n for _ in range(n)]
        m[i][i] = Fr(1)
        m[i + 1][i + 1] = Fr(-1)
        mats.append(m)
        names.append(f"h{i + 1}")
    for i in range(n):
        for j in range(i + 1, n):
            m = [[Fr(0)] * n for _ in range(n)]
            m[i][j] = Fr(1)
            mats.append(m)
            names.append(f"e{i + 1}{j + 1}")
    for i in range(n):
        for j in range(i + 1, n):
            m = [[Fr(0)] * n for _ in range(n)]
            m[j][i] = Fr(1)
            mats.append(m)
            names.append(f"f{i + 1}{j + 1}")
    return mats, names


def from_matrices(name, mats, names):
    """Structure constants of a matrix Lie algebra spanned by mats."""
    dim = len(mats)
    size = len(mats[0])
    cols = []
    for m in mats:
        cols.append([m[i][j] for i in range(size) for j in range(size)])
    A = [list(col) for col in zip(*cols)]
    from .linalg import solve as lsolve

    brackets = {}
    for a in range(dim):
        for b in range(a + 1, dim):
            comm = [[sum(mats[a][i][k] * mats[b][k][j] -
                         mats[b][i][k] * mats[a][k][j] for k in range(size))
                     for j in range(size)] for i in range(size)]
            vec = [comm[i][j] for i in range(size) for j in range(size)]
            x = lsolve(A, vec)
            if x is None:
                raise InputError("matrices do not close under commutator")
            terms = [(k, x[k]) for k in range(dim) if x[k]]
            if terms:
                brackets[(a, b)] = terms
    B = killing_form(dim, brackets)
    return make_algebra(name, dim, brackets, B, basis_names=names)


def sl3():
    mats, names = _sl_basis_matrices(3)
    return from_matrices("sl3", mats, names)


def direct_sum(a, b):
    """Block sum: basis of a first, B block diagonal."""
    n = a.dim + b.dim
    brackets = {}
    for i in range(a.dim):
        for j in range(i + 1, a.dim):
            if a.c[i][j]:
                brackets[(i, j)] = list(a.c[i][j])
    off = a.dim
    for i in range(b.dim):
        for j in range(i + 1, b.dim):
            if b.c[i][j]:
                brackets[(i + off, j + off)] = [(k + off, x) for k, x in b.c[i][j]]
    B = [[Fr(0)] * n for _ in range(n)]
    for i in range(a.dim):
        for j in range(a.dim):
            B[i][j] = a.B[i][j]
    for i in range(b.dim):
        for j in range(b.dim):
            B[i + off][j + off] = b.B[i][j]
    names = tuple(f"{nm}'" for nm in a.basis_names) + \
        tuple(f"{nm}''" for nm in b.basis_names)
    return make_algebra(f"{a.name}+{b.name}", n, brackets, B, basis_names=names)


_BUILTIN = {"su2": su2, "sl2": sl2, "sl3": sl3}


def builtin(name):
    """Look up su2 | sl2 | sl3 | abelian:n, and '+'-sums of these."""
    name = name.strip()
    if "+" in name:
        parts = [builtin(p) for p in name.split("+")]
        alg = parts[0]
        for p in parts[1:]:
            alg = direct_sum(alg, p)
        return alg
    if name.startswith("abelian:"):
        try:
            n = int(name.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad abelian spec {name!r}")
        return abelian(n)
    if name in _BUILTIN:
        return _BUILTIN[name]()
    raise InputError(f"unknown built-in Lie algebra {name!r}")


def is_builtin_name(name):
    try:
        builtin(name)
        return True
    except InputError:
        return False


# ---------------------------------------------------------------------------
# file format


def from_dict(data):
    try:
        name = data.get("name", "loaded")
        dim = int(data["dim"])
        basis = data.get("basis") or [f"e{i + 1}" for i in range(dim)]
        braw = data.get("brackets", {})
        Braw = data["B"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"Lie algebra file missing field: {exc}")
    if len(basis) != dim:
        raise InputError("basis list length != dim")
    brackets = {}
    for key, terms in braw.items():
        try:
            a, b = (int(t) for t in key.split(","))
        except ValueError:
            raise InputError(f"bad bracket key {key!r} (want 'a,b')")
        if not 1 <= a < b <= dim:
            raise InputError(f"bracket key {key!r} must have 1 <= a < b <= dim")
        brackets[(a - 1, b - 1)] = [(int(k) - 1, _parse_rational(x))
                                    for k, x in terms]
    if len(Braw) != dim or any(len(r) != dim for r in Braw):
        raise InputError("B must be an n x n array")
    B = [[_parse_rational(x) for x in row] for row in Braw]
    return make_algebra(name, dim, brackets, B, basis_names=tuple(basis))


def load(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})")
    return from_dict(data)


def resolve(spec):
    """A built-in name or a path to a Lie algebra JSON file."""
    if is_builtin_name(spec):
        return builtin(spec)
    try:
        return load(spec)
    except OSError:
        raise InputError(f"{spec!r} is neither a built-in name nor a readable file")
