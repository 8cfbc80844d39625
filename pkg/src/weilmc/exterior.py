"""Blade arithmetic in wedge(g) and wedge(g*), and the operator zoo.

Sign conventions, pinned once and tested against the su(2) ground truth:

* Blades are bitmasks; bit i-1 stands for e_{i} (or e^{i}).  The stored
  representative is the wedge of generators in increasing index order.
* Interior product by a generator: iota(e_i)(mu_1^...^mu_k) =
  sum_j (-1)^(j-1) mu_j(e_i) mu_1^...(drop j)...^mu_k; on higher blades
  iota(x^y) = iota(x) o iota(y).  The analogous iota_star(e^i) acts on
  wedge(g).
* Coadjoint action on generators: (L(xi)mu)(eta) = -mu([xi,eta]).
* Koszul differentials: d = 1/2 sum_a eps*(e^a) L(e_a) on wedge(g*),
  boundary = -1/2 sum_a L(e_a) iota*(e^a) on wedge(g).
* delta = Bsharp o d o Bflat on wedge(g), realized as the odd derivation
  extending delta(e_a); the full three-map composition is kept as an
  independent oracle.
* Schouten bracket: [x,y] = -sum_a L(e_a)x ^ iota*(e^a)y.
* Determinant pairing <x, mu> agrees with iota-evaluation on equal-size
  blades up to the reversal sign (-1)^(k(k-1)/2).
"""

from fractions import Fraction

from .errors import InputError
from .linalg import Fr, frac

# ---------------------------------------------------------------------------
# blade combinatorics


def popcount(b):
    return bin(b).count("1")


def blade_indices(b):
    """0-based generator indices of a blade, ascending."""
    out = []
    i = 0
    while b:
        if b & 1:
            out.append(i)
        b >>= 1
        i += 1
    return out


def blade_of(indices):
    b = 0
    for i in indices:
        b |= 1 << i
    return b


def wedge_sign(a, b):
    """Sign of (blade a)^(blade b) -> blade a|b, or 0 if they overlap."""
    if a & b:
        return 0
    sign = 1
    # count inversions: pairs (i in a, j in b) with i > j
    rest = a
    while rest:
        low = rest & -rest
        # elements of b above this element of a contribute nothing;
        # those below it contribute one transposition each
        if popcount(b & (low - 1)) & 1:
            sign = -sign
        rest ^= low
    return sign


def remove_sign(b, i):
    """Sign (-1)^(position-1) for removing index i (0-based) from blade b."""
    return -1 if (popcount(b & ((1 << i) - 1)) & 1) else 1


def blades_of_size(n, k):
    """All blades over n generators with k bits, ascending as integers."""
    out = [b for b in range(1 << n) if popcount(b) == k]
    return out


# ---------------------------------------------------------------------------
# elements


class ExtElt:
    """Sparse element of wedge(g) (dual=False) or wedge(g*) (dual=True)."""

    __slots__ = ("alg", "dual", "terms")

    def __init__(self, alg, dual, terms=None):
        self.alg = alg
        self.dual = dual
        self.terms = {}
        if terms:
            for b, x in terms.items():
                x = frac(x)
                if x:
                    self.terms[b] = x

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, alg, dual):
        return cls(alg, dual)

    @classmethod
    def one(cls, alg, dual):
        return cls(alg, dual, {0: Fr(1)})

    @classmethod
    def gen(cls, alg, i, dual=False):
        """e_{i+1} or e^{i+1} for a 0-based index i."""
        return cls(alg, dual, {1 << i: Fr(1)})

    @classmethod
    def from_blade(cls, alg, indices, dual=False, coeff=1):
        return cls(alg, dual, {blade_of(indices): frac(coeff)})

    # -- ring structure ----------------------------------------------------
    def _compat(self, other):
        if self.alg is not other.alg or self.dual != other.dual:
            raise InputError("mixed spaces or algebras in exterior arithmetic")

    def __add__(self, other):
        self._compat(other)
        out = dict(self.terms)
        for b, x in other.terms.items():
            y = out.get(b, Fr(0)) + x
            if y:
                out[b] = y
            else:
                out.pop(b, None)
        return ExtElt(self.alg, self.dual, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ExtElt(self.alg, self.dual, {b: -x for b, x in self.terms.items()})

    def scale(self, c):
        c = frac(c)
        if not c:
            return ExtElt(self.alg, self.dual)
        return ExtElt(self.alg, self.dual, {b: c * x for b, x in self.terms.items()})

    def __eq__(self, other):
        return (isinstance(other, ExtElt) and self.alg is other.alg
                and self.dual == other.dual and self.terms == other.terms)

    def __hash__(self):
        return hash((id(self.alg), self.dual, tuple(sorted(self.terms.items()))))

    def is_zero(self):
        return not self.terms

    def degrees(self):
        return sorted({popcount(b) for b in self.terms})

    def component(self, k):
        return ExtElt(self.alg, self.dual,
                      {b: x for b, x in self.terms.items() if popcount(b) == k})

    def __repr__(self):
        if not self.terms:
            return "0"
        sym = "e^" if self.dual else "e"
        parts = []
        for b in sorted(self.terms):
            mono = "^".join(f"{sym}{i + 1}" for i in blade_indices(b)) or "1"
            parts.append(f"({self.terms[b]})*{mono}")
        return " + ".join(parts)

    def to_dict(self):
        return {
            "space": "ext-gdual" if self.dual else "ext-g",
            "terms": [
                {"wedge": [i + 1 for i in blade_indices(b)], "coeff": _fmt(x)}
                for b, x in sorted(self.terms.items())
            ],
        }


def _fmt(x):
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def ext_from_dict(alg, data):
    space = data.get("space")
    if space not in ("ext-g", "ext-gdual"):
        raise InputError(f"bad exterior element space {space!r}")
    dual = space == "ext-gdual"
    terms = {}
    for t in data.get("terms", []):
        idx = [int(i) - 1 for i in t["wedge"]]
        if any(not 0 <= i < alg.dim for i in idx):
            raise InputError("wedge index out of range")
        if len(set(idx)) != len(idx):
            raise InputError("repeated wedge index")
        b = blade_of(idx)
        terms[b] = terms.get(b, Fr(0)) + Fraction(t["coeff"])
    return ExtElt(alg, dual, terms)


# ---------------------------------------------------------------------------
# products and contractions


def wedge(x, y):
    x._compat(y)
    out = {}
    for a, xa in x.terms.items():
        for b, yb in y.terms.items():
            s = wedge_sign(a, b)
            if s:
                k = a | b
                v = out.get(k, Fr(0)) + s * xa * yb
                if v:
                    out[k] = v
                else:
                    del out[k]
    return ExtElt(x.alg, x.dual, out)


def _contract_gen_blade(i, b):
    """iota by generator i on blade b: (sign, remaining blade) or None."""
    bit = 1 << i
    if not (b & bit):
        return None
    return remove_sign(b, i), b ^ bit


def _contract_blade_blade(a, b):
    """iota(blade a) applied to blade b = iota(a_1) o ... o iota(a_k) (b).

    The rightmost factor acts first, so the generators of a are consumed
    in descending index order.
    """
    sign = 1
    cur = b
    for i in reversed(blade_indices(a)):
        hit = _contract_gen_blade(i, cur)
        if hit is None:
            return None
        s, cur = hit
        sign *= s
    return sign, cur


def contract(x, y):
    """iota(x)(y): x in wedge(g) acting on y in wedge(g*).

    Extends multiplicatively: iota(x^y) = iota(x) o iota(y).
    """
    if x.dual or not y.dual:
        raise InputError("contract wants x in wedge(g), y in wedge(g*)")
    if x.alg is not y.alg:
        raise InputError("contract across different algebras")
    out = {}
    for a, xa in x.terms.items():
        for b, yb in y.terms.items():
            hit = _contract_blade_blade(a, b)
            if hit:
                s, k = hit
                v = out.get(k, Fr(0)) + s * xa * yb
                if v:
                    out[k] = v
                else:
                    del out[k]
    return ExtElt(y.alg, True, out)


def contract_dual(mu, x):
    """iota*(mu)(x): mu in wedge(g*) acting on x in wedge(g), same rules."""
    if not mu.dual or x.dual:
        raise InputError("contract_dual wants mu in wedge(g*), x in wedge(g)")
    if mu.alg is not x.alg:
        raise InputError("contract across different algebras")
    out = {}
    for a, ma in mu.terms.items():
        for b, xb in x.terms.items():
            hit = _contract_blade_blade(a, b)
            if hit:
                s, k = hit
                v = out.get(k, Fr(0)) + s * ma * xb
                if v:
                    out[k] = v
                else:
                    del out[k]
    return ExtElt(x.alg, False, out)


def iota_star_gen(a, x):
    """iota*(e^{a+1}) on x in wedge(g)."""
    out = {}
    bit = 1 << a
    for b, xb in x.terms.items():
        if b & bit:
            s = remove_sign(b, a)
            k = b ^ bit
            v = out.get(k, Fr(0)) + s * xb
            if v:
                out[k] = v
            else:
                del out[k]
    return ExtElt(x.alg, x.dual, out)


def eps_gen(a, x):
    """Left exterior multiplication by generator a on either space."""
    out = {}
    bit = 1 << a
    for b, xb in x.terms.items():
        if not (b & bit):
            s = remove_sign(b | bit, a)   # sign to sort the new index in
            k = b | bit
            v = out.get(k, Fr(0)) + s * xb
            if v:
                out[k] = v
            else:
                del out[k]
    return ExtElt(x.alg, x.dual, out)


# ---------------------------------------------------------------------------
# Lie derivatives and differentials


def lie(alg, a, x):
    """L(e_{a+1}) on wedge(g) (adjoint) or wedge(g*) (coadjoint), derivation."""
    out = ExtElt(x.alg, x.dual)
    if not x.dual:
        # replace e_b by [e_a, e_b]
        for b, xb in x.terms.items():
            for i in blade_indices(b):
                s = remove_sign(b, i)
                rest = b ^ (1 << i)
                for k, cabk in alg.c[a][i]:
                    bit = 1 << k
                    if rest & bit:
                        continue
                    s2 = remove_sign(rest | bit, k)
                    out.terms[rest | bit] = out.terms.get(rest | bit, Fr(0)) \
                        + s * s2 * cabk * xb
        out.terms = {b: v for b, v in out.terms.items() if v}
        return out
    # replace e^b by -sum_m c[a][m][b] e^m
    for b, xb in x.terms.items():
        for i in blade_indices(b):
            s = remove_sign(b, i)
            rest = b ^ (1 << i)
            for m in range(alg.dim):
                coeff = Fr(0)
                for k, camk in alg.c[a][m]:
                    if k == i:
                        coeff = camk
                        break
                if not coeff:
                    continue
                bit = 1 << m
                if rest & bit:
                    continue
                s2 = remove_sign(rest | bit, m)
                out.terms[rest | bit] = out.terms.get(rest | bit, Fr(0)) \
                    - s * s2 * coeff * xb
    out.terms = {b: v for b, v in out.terms.items() if v}
    return out


def d_coboundary(y):
    """Koszul differential on wedge(g*): d = 1/2 sum_a eps*(e^a) L(e_a)."""
    if not y.dual:
        raise InputError("d acts on wedge(g*)")
    alg = y.alg
    out = ExtElt(alg, True)
    for a in range(alg.dim):
        out = out + eps_gen(a, lie(alg, a, y))
    return out.scale(Fr(1, 2))


def boundary(x):
    """Koszul boundary on wedge(g): -1/2 sum_a L(e_a) iota*(e^a)."""
    if x.dual:
        raise InputError("boundary acts on wedge(g)")
    alg = x.alg
    out = ExtElt(alg, False)
    for a in range(alg.dim):
        out = out + lie(alg, a, iota_star_gen(a, x))
    return out.scale(Fr(-1, 2))


def bflat(x):
    """B-flat wedge(g) -> wedge(g*), multiplicative on blades."""
    if x.dual:
        raise InputError("bflat acts on wedge(g)")
    alg = x.alg
    out = ExtElt(alg, True)
    for b, xb in x.terms.items():
        term = ExtElt.one(alg, True).scale(xb)
        for i in blade_indices(b):
            row = ExtElt(alg, True, {1 << j: alg.B[i][j] for j in range(alg.dim)})
            term = wedge(term, row)
        out = out + term
    return out


def bsharp(y):
    """B-sharp wedge(g*) -> wedge(g)."""
    if not y.dual:
        raise InputError("bsharp acts on wedge(g*)")
    alg = y.alg
    out = ExtElt(alg, False)
    for b, yb in y.terms.items():
        term = ExtElt.one(alg, False).scale(yb)
        for i in blade_indices(b):
            row = ExtElt(alg, False, {1 << j: alg.B_inv[i][j] for j in range(alg.dim)})
            term = wedge(term, row)
        out = out + term
    return out


def _delta_gens(alg):
    def build():
        return [bsharp(d_coboundary(bflat(ExtElt.gen(alg, a)))) for a in range(alg.dim)]
    return alg.cache("delta_gens", build)


def delta(x):
    """Transported differential on wedge(g), as the odd derivation with
    delta(e_a) = Bsharp(d(Bflat(e_a)))."""
    if x.dual:
        raise InputError("delta acts on wedge(g)")
    alg = x.alg
    gens = _delta_gens(alg)
    out = ExtElt(alg, False)
    for b, xb in x.terms.items():
        for i in blade_indices(b):
            s = remove_sign(b, i)
            rest = ExtElt(alg, False, {b ^ (1 << i): s * xb})
            out = out + wedge(gens[i], rest)
    return out


def delta_composed(x):
    """Independent oracle for delta: the literal Bsharp o d o Bflat."""
    return bsharp(d_coboundary(bflat(x)))


def schouten(x, y):
    """Schouten bracket [x,y] = -sum_a L(e_a)x ^ iota*(e^a)y on wedge(g)."""
    if x.dual or y.dual:
        raise InputError("schouten acts on wedge(g)")
    if x.alg is not y.alg:
        raise InputError("schouten across different algebras")
    alg = x.alg
    out = ExtElt(alg, False)
    for a in range(alg.dim):
        out = out + wedge(lie(alg, a, x), iota_star_gen(a, y))
    return -out


def pairing(x, y):
    """Determinant pairing between wedge(g) and wedge(g*)."""
    if x.dual or not y.dual:
        raise InputError("pairing wants (wedge(g), wedge(g*))")
    s = Fr(0)
    for b, xb in x.terms.items():
        yb = y.terms.get(b)
        if yb:
            s += xb * yb
    return s


# ---------------------------------------------------------------------------
# matrix realizations on the blade bases


def ext_basis(alg, k, dual=False):
    return blades_of_size(alg.dim, k)


def op_matrix(alg, fn, k, dual, out_k, out_dual=None):
    """Matrix of an operator wedge^k -> wedge^(out_k), columns = source blades."""
    if out_dual is None:
        out_dual = dual
    src = blades_of_size(alg.dim, k)
    dst = blades_of_size(alg.dim, out_k)
    idx = {b: i for i, b in enumerate(dst)}
    M = [[Fr(0)] * len(src) for _ in range(len(dst))]
    for j, b in enumerate(src):
        img = fn(ExtElt(alg, dual, {b: Fr(1)}))
        for bb, x in img.terms.items():
            if popcount(bb) != out_k:
                raise InputError("operator image leaves the expected degree")
            M[idx[bb]][j] = x
    return M


def elt_to_vec(x, k):
    basis = blades_of_size(x.alg.dim, k)
    return [x.terms.get(b, Fr(0)) for b in basis]


def vec_to_elt(alg, v, k, dual=False):
    basis = blades_of_size(alg.dim, k)
    return ExtElt(alg, dual, {b: frac(x) for b, x in zip(basis, v) if x})
