"""The symmetric algebra S(g*), the mixed algebra S(g*)⊗wedge(g), and the
Weil algebra S(g*)⊗wedge(g*).

Mixed elements are sparse maps (multidegree, blade) -> Fraction.  The poly
factor is evenly graded, so extending the exterior operators S(g*)-linearly
introduces no signs; all Koszul signs live on the wedge factor.  A MixedElt
may carry distinct poly and wedge algebras (needed for Lie homomorphisms
g -> h, where elements live in S(g*)⊗wedge(h)).

Gradings: a term (alpha, b) has total degree 2|alpha| - |b| in the mixed
algebra and 2|alpha| + |b| in the Weil algebra.
"""

from fractions import Fraction

from .errors import CutoffExceeded, InputError, ParityError
from .exterior import (ExtElt, blade_indices, blades_of_size, popcount,
                       remove_sign, wedge_sign, _contract_blade_blade, _fmt)
from .linalg import Fr, frac

# ---------------------------------------------------------------------------
# polynomials


class PolyElt:
    """Sparse polynomial in the generators v^1..v^n of S(g*)."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg, terms=None):
        self.alg = alg
        self.terms = {}
        if terms:
            for m, x in terms.items():
                x = frac(x)
                if x:
                    self.terms[m] = x

    @classmethod
    def zero(cls, alg):
        return cls(alg)

    @classmethod
    def one(cls, alg):
        return cls(alg, {(0,) * alg.dim: Fr(1)})

    @classmethod
    def gen(cls, alg, a):
        m = [0] * alg.dim
        m[a] = 1
        return cls(alg, {tuple(m): Fr(1)})

    def __add__(self, other):
        out = dict(self.terms)
        for m, x in other.terms.items():
            y = out.get(m, Fr(0)) + x
            if y:
                out[m] = y
            else:
                out.pop(m, None)
        return PolyElt(self.alg, out)

    def __neg__(self):
        return PolyElt(self.alg, {m: -x for m, x in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out = {}
        for m1, x1 in self.terms.items():
            for m2, x2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                y = out.get(m, Fr(0)) + x1 * x2
                if y:
                    out[m] = y
                else:
                    del out[m]
        return PolyElt(self.alg, out)

    def scale(self, c):
        c = frac(c)
        if not c:
            return PolyElt(self.alg)
        return PolyElt(self.alg, {m: c * x for m, x in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, PolyElt) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def is_zero(self):
        return not self.terms

    def sdegrees(self):
        return sorted({sum(m) for m in self.terms})

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            mono = "*".join(f"v{i + 1}^{e}" if e > 1 else f"v{i + 1}"
                            for i, e in enumerate(m) if e) or "1"
            parts.append(f"({self.terms[m]})*{mono}")
        return " + ".join(parts)

    def to_dict(self):
        return {"space": "poly",
                "terms": [{"poly": list(m), "coeff": _fmt(x)}
                          for m, x in sorted(self.terms.items())]}


def lie_s(alg, a, p):
    """Coadjoint derivation on S(g*): L(e_a)v^b = -sum_m c[a][m][b] v^m."""
    gen_img = _lie_s_gens(alg)[a]
    out = {}
    for m, x in p.terms.items():
        for i, e in enumerate(m):
            if not e:
                continue
            for j, coeff in gen_img[i]:
                mm = list(m)
                mm[i] -= 1
                mm[j] += 1
                mm = tuple(mm)
                y = out.get(mm, Fr(0)) + e * coeff * x
                if y:
                    out[mm] = y
                else:
                    del out[mm]
    return PolyElt(p.alg, out)


def _lie_s_gens(alg):
    def build():
        table = []
        for a in range(alg.dim):
            row = []
            for b in range(alg.dim):
                img = []
                for m in range(alg.dim):
                    for k, x in alg.c[a][m]:
                        if k == b and x:
                            img.append((m, -x))
                row.append(tuple(img))
            table.append(tuple(row))
        return table
    return alg.cache("lie_s_gens", build)


def poly_from_dict(alg, data):
    terms = {}
    for t in data.get("terms", []):
        m = tuple(int(e) for e in t["poly"])
        if len(m) != alg.dim or any(e < 0 for e in m):
            raise InputError("bad multidegree")
        terms[m] = terms.get(m, Fr(0)) + Fraction(t["coeff"])
    return PolyElt(alg, terms)


# ---------------------------------------------------------------------------
# mixed elements


class MixedElt:
    """Element of S(g*)⊗wedge(h) (dual=False) or S(g*)⊗wedge(h*) (dual=True).

    Usually h = g; they differ only in the relative Maurer-Cartan setting.
    """

    __slots__ = ("alg_s", "alg_w", "dual", "terms")

    def __init__(self, alg_s, alg_w, dual, terms=None):
        self.alg_s = alg_s
        self.alg_w = alg_w
        self.dual = dual
        self.terms = {}
        if terms:
            for key, x in terms.items():
                x = frac(x)
                if x:
                    self.terms[key] = x

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, alg, dual=False, alg_w=None):
        return cls(alg, alg_w or alg, dual)

    @classmethod
    def one(cls, alg, dual=False, alg_w=None):
        return cls(alg, alg_w or alg, dual, {((0,) * alg.dim, 0): Fr(1)})

    @classmethod
    def from_pair(cls, p, x):
        """p in S(g*), x an ExtElt; the tensor p⊗x."""
        terms = {}
        for m, cp in p.terms.items():
            for b, cx in x.terms.items():
                terms[(m, b)] = cp * cx
        return cls(p.alg, x.alg, x.dual, terms)

    @classmethod
    def v_gen(cls, alg, a, dual=False, alg_w=None):
        m = [0] * alg.dim
        m[a] = 1
        return cls(alg, alg_w or alg, dual, {(tuple(m), 0): Fr(1)})

    @classmethod
    def y_gen(cls, alg, a):
        """Weil generator y^a = 1⊗e^a."""
        return cls(alg, alg, True, {((0,) * alg.dim, 1 << a): Fr(1)})

    # -- basics --------------------------------------------------------------
    def _compat(self, other):
        if (self.alg_s is not other.alg_s or self.alg_w is not other.alg_w
                or self.dual != other.dual):
            raise InputError("mixed arithmetic across different spaces")

    def __add__(self, other):
        self._compat(other)
        out = dict(self.terms)
        for k, x in other.terms.items():
            y = out.get(k, Fr(0)) + x
            if y:
                out[k] = y
            else:
                out.pop(k, None)
        return MixedElt(self.alg_s, self.alg_w, self.dual, out)

    def __neg__(self):
        return MixedElt(self.alg_s, self.alg_w, self.dual,
                        {k: -x for k, x in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = frac(c)
        if not c:
            return MixedElt(self.alg_s, self.alg_w, self.dual)
        return MixedElt(self.alg_s, self.alg_w, self.dual,
                        {k: c * x for k, x in self.terms.items()})

    def __eq__(self, other):
        return (isinstance(other, MixedElt) and self.dual == other.dual
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.dual, tuple(sorted(self.terms.items()))))

    def is_zero(self):
        return not self.terms

    def blade_sizes(self):
        return sorted({popcount(b) for _, b in self.terms})

    def sdegrees(self):
        return sorted({sum(m) for m, _ in self.terms})

    def total_degrees(self):
        sgn = 1 if self.dual else -1
        return sorted({2 * sum(m) + sgn * popcount(b) for m, b in self.terms})

    def component(self, sdeg=None, bsize=None):
        out = {}
        for (m, b), x in self.terms.items():
            if sdeg is not None and sum(m) != sdeg:
                continue
            if bsize is not None and popcount(b) != bsize:
                continue
            out[(m, b)] = x
        return MixedElt(self.alg_s, self.alg_w, self.dual, out)

    def blade_component(self, k):
        return self.component(bsize=k)

    def by_blade(self):
        """Group terms as blade -> {multideg: coeff}."""
        out = {}
        for (m, b), x in self.terms.items():
            out.setdefault(b, {})[m] = x
        return out

    def poly_part(self):
        """The blade-size-0 component as a PolyElt."""
        return PolyElt(self.alg_s,
                       {m: x for (m, b), x in self.terms.items() if b == 0})

    def max_sdeg(self):
        return max((sum(m) for m, _ in self.terms), default=0)

    def __repr__(self):
        if not self.terms:
            return "0"
        sym = "y" if self.dual else "e"
        parts = []
        for m, b in sorted(self.terms):
            mono = "*".join(f"v{i + 1}^{e}" if e > 1 else f"v{i + 1}"
                            for i, e in enumerate(m) if e)
            bl = "^".join(f"{sym}{i + 1}" for i in blade_indices(b))
            body = "*".join(t for t in (mono, bl) if t) or "1"
            parts.append(f"({self.terms[(m, b)]})*{body}")
        return " + ".join(parts)

    def to_dict(self):
        return {
            "space": "weil" if self.dual else "mixed-g",
            "terms": [{"poly": list(m),
                       "wedge": [i + 1 for i in blade_indices(b)],
                       "coeff": _fmt(x)}
                      for (m, b), x in sorted(self.terms.items())],
        }


def mixed_from_dict(alg, data, alg_w=None):
    space = data.get("space")
    if space not in ("mixed-g", "weil"):
        raise InputError(f"bad mixed element space {space!r}")
    alg_w = alg_w or alg
    terms = {}
    for t in data.get("terms", []):
        m = tuple(int(e) for e in t["poly"])
        if len(m) != alg.dim or any(e < 0 for e in m):
            raise InputError("bad multidegree")
        idx = [int(i) - 1 for i in t["wedge"]]
        if any(not 0 <= i < alg_w.dim for i in idx) or len(set(idx)) != len(idx):
            raise InputError("bad wedge part")
        b = 0
        for i in idx:
            b |= 1 << i
        key = (m, b)
        terms[key] = terms.get(key, Fr(0)) + Fraction(t["coeff"])
    return MixedElt(alg, alg_w, space == "weil", terms)


# ---------------------------------------------------------------------------
# products


def mixed_mul(x, y):
    """Product in S(g*)⊗wedge; blade-major so disjointness prunes early."""
    x._compat(y)
    out = {}
    xb = x.by_blade()
    yb = y.by_blade()
    for b1, p1 in xb.items():
        for b2, p2 in yb.items():
            s = wedge_sign(b1, b2)
            if not s:
                continue
            b = b1 | b2
            for m1, c1 in p1.items():
                sc1 = s * c1
                for m2, c2 in p2.items():
                    m = tuple(a + c for a, c in zip(m1, m2))
                    key = (m, b)
                    v = out.get(key, Fr(0)) + sc1 * c2
                    if v:
                        out[key] = v
                    else:
                        del out[key]
    return MixedElt(x.alg_s, x.alg_w, x.dual, out)


def poly_mul_mixed(p, x):
    """Multiply a PolyElt into the poly factor."""
    out = {}
    for m1, c1 in p.terms.items():
        for (m2, b), c2 in x.terms.items():
            m = tuple(a + c for a, c in zip(m1, m2))
            key = (m, b)
            v = out.get(key, Fr(0)) + c1 * c2
            if v:
                out[key] = v
            else:
                del out[key]
    return MixedElt(x.alg_s, x.alg_w, x.dual, out)


# ---------------------------------------------------------------------------
# blade-level operator caches (on the wedge algebra)


def _lie_blade(alg, a, b, dual):
    """L(e_a) on a single blade, cached: list of (blade, coeff)."""
    cache = alg.cache("lie_blade", dict)
    key = (a, b, dual)
    if key not in cache:
        from .exterior import lie
        img = lie(alg, a, ExtElt(alg, dual, {b: Fr(1)}))
        cache[key] = tuple(img.terms.items())
    return cache[key]


def _d_blade(alg, b):
    cache = alg.cache("d_blade", dict)
    if b not in cache:
        from .exterior import d_coboundary
        img = d_coboundary(ExtElt(alg, True, {b: Fr(1)}))
        cache[b] = tuple(img.terms.items())
    return cache[b]


def _boundary_blade(alg, b):
    cache = alg.cache("boundary_blade", dict)
    if b not in cache:
        from .exterior import boundary
        img = boundary(ExtElt(alg, False, {b: Fr(1)}))
        cache[b] = tuple(img.terms.items())
    return cache[b]


def _delta_blade(alg, b):
    cache = alg.cache("delta_blade", dict)
    if b not in cache:
        from .exterior import delta
        img = delta(ExtElt(alg, False, {b: Fr(1)}))
        cache[b] = tuple(img.terms.items())
    return cache[b]


def _apply_blade_op(x, blade_fn):
    out = {}
    for (m, b), c in x.terms.items():
        for bb, coeff in blade_fn(x.alg_w, b):
            key = (m, bb)
            v = out.get(key, Fr(0)) + coeff * c
            if v:
                out[key] = v
            else:
                del out[key]
    return MixedElt(x.alg_s, x.alg_w, x.dual, out)


def boundary_m(x):
    """Lie algebra boundary, S(g*)-linear on the wedge(h) factor."""
    if x.dual:
        raise InputError("boundary_m acts on S(g*)⊗wedge(h)")
    return _apply_blade_op(x, _boundary_blade)


def delta_m(x):
    if x.dual:
        raise InputError("delta_m acts on S(g*)⊗wedge(h)")
    return _apply_blade_op(x, _delta_blade)


def d_m(x):
    """Lie algebra coboundary on the wedge(h*) factor."""
    if not x.dual:
        raise InputError("d_m acts on S(g*)⊗wedge(h*)")
    return _apply_blade_op(x, _d_blade)


def lie_w(a, x):
    """L(e_a) on the wedge factor only (the S(g*)-linear extension)."""
    return _apply_blade_op(x, lambda alg, b: _lie_blade(alg, a, b, x.dual))


def lie_s_m(a, x):
    """L(e_a) on the poly factor only.  Only meaningful when alg_s == alg_w
    or when the action index refers to the poly algebra."""
    gen_img = _lie_s_gens(x.alg_s)[a]
    out = {}
    for (m, b), c in x.terms.items():
        for i, e in enumerate(m):
            if not e:
                continue
            for j, coeff in gen_img[i]:
                mm = list(m)
                mm[i] -= 1
                mm[j] += 1
                key = (tuple(mm), b)
                v = out.get(key, Fr(0)) + e * coeff * c
                if v:
                    out[key] = v
                else:
                    del out[key]
    return MixedElt(x.alg_s, x.alg_w, x.dual, out)


def lie_diag(a, x):
    """Diagonal action L^S(e_a) + L^wedge(e_a); requires alg_s is alg_w."""
    if x.alg_s is not x.alg_w:
        raise InputError("diagonal action needs matching algebras")
    return lie_s_m(a, x) + lie_w(a, x)


def iota_star_m(a, x):
    """iota*(e^a) on the wedge(h) factor."""
    if x.dual:
        raise InputError("iota_star_m acts on S(g*)⊗wedge(h)")
    out = {}
    bit = 1 << a
    for (m, b), c in x.terms.items():
        if b & bit:
            s = remove_sign(b, a)
            key = (m, b ^ bit)
            v = out.get(key, Fr(0)) + s * c
            if v:
                out[key] = v
            else:
                del out[key]
    return MixedElt(x.alg_s, x.alg_w, x.dual, out)


def schouten_m(x, y):
    """Schouten bracket, S(g*)-bilinear on the wedge(h) factor."""
    if x.dual or y.dual:
        raise InputError("schouten_m acts on S(g*)⊗wedge(h)")
    x._compat(y)
    alg = x.alg_w
    total = {}
    for a in range(alg.dim):
        lx = lie_w(a, x)
        ry = iota_star_m(a, y)
        if lx.is_zero() or ry.is_zero():
            continue
        prod = mixed_mul(lx, ry)
        for k, v in prod.terms.items():
            w = total.get(k, Fr(0)) - v
            if w:
                total[k] = w
            else:
                del total[k]
    return MixedElt(x.alg_s, x.alg_w, x.dual, total)


def curvature(x):
    """boundary(x) + 1/2 [x,x]."""
    return boundary_m(x) + schouten_m(x, x).scale(Fr(1, 2))


# ---------------------------------------------------------------------------
# exponentials


def is_even_wedge(x):
    return all(popcount(b) % 2 == 0 for _, b in x.terms)


def exp_nilpotent(x):
    """exp of an even mixed element with no blade-size-0 part."""
    if not is_even_wedge(x):
        raise ParityError("exp needs an even wedge part")
    if any(b == 0 for _, b in x.terms):
        raise ParityError("exp needs a vanishing blade-size-0 part")
    out = MixedElt.one(x.alg_s, x.dual, alg_w=x.alg_w)
    term = out
    k = 1
    while True:
        term = mixed_mul(term, x).scale(Fr(1, k))
        if term.is_zero():
            return out
        out = out + term
        k += 1


def log_unipotent(F):
    """log of 1 + nilpotent, the inverse of exp_nilpotent."""
    one = MixedElt.one(F.alg_s, F.dual, alg_w=F.alg_w)
    if F.poly_part() != PolyElt.one(F.alg_s):
        raise ParityError("log needs blade-size-0 part equal to 1")
    N = one - F  # nilpotent, blades of size >= 1
    out = MixedElt.zero(F.alg_s, F.dual, alg_w=F.alg_w)
    power = one
    k = 1
    while True:
        power = mixed_mul(power, N)
        if power.is_zero():
            return out
        out = out - power.scale(Fr(1, k))
        k += 1


# ---------------------------------------------------------------------------
# the Weil algebra


def _check_cutoff(x, cutoff, raise_by):
    if cutoff is not None and x.max_sdeg() + raise_by > cutoff:
        raise CutoffExceeded(
            f"operation raises S-degree past the cutoff {cutoff}")


def weil_diff(w, cutoff=None):
    """Weil differential sum_a y^a L^W(e_a) - d^wedge + sum_a v^a iota(e_a)."""
    if not w.dual:
        raise InputError("the Weil differential acts on S(g*)⊗wedge(g*)")
    if w.alg_s is not w.alg_w:
        raise InputError("Weil algebra needs matching algebras")
    _check_cutoff(w, cutoff, 1)
    alg = w.alg_s
    out = d_m(w).scale(-1).terms
    for a in range(alg.dim):
        lw = lie_diag(a, w)
        bit = 1 << a
        for (m, b), c in lw.terms.items():
            if b & bit:
                continue
            s = remove_sign(b | bit, a)
            key = (m, b | bit)
            v = out.get(key, Fr(0)) + s * c
            if v:
                out[key] = v
            else:
                del out[key]
        # v^a iota(e_a)
        for (m, b), c in w.terms.items():
            if not (b & bit):
                continue
            s = remove_sign(b, a)
            mm = list(m)
            mm[a] += 1
            key = (tuple(mm), b ^ bit)
            v = out.get(key, Fr(0)) + s * c
            if v:
                out[key] = v
            else:
                del out[key]
    return MixedElt(alg, alg, True, out)


def iota_action(x, w, cutoff=None):
    """Action of S(g*)⊗wedge(g) on the Weil algebra: poly multiplies,
    wedge contracts."""
    if x.dual or not w.dual:
        raise InputError("iota_action wants (mixed, weil)")
    _check_cutoff(w, cutoff, x.max_sdeg())
    out = {}
    for b1, p1 in x.by_blade().items():
        for b2, p2 in w.by_blade().items():
            hit = _contract_blade_blade(b1, b2) if b1 else (1, b2)
            if hit is None:
                continue
            s, b = hit
            for m1, c1 in p1.items():
                sc1 = s * c1
                for m2, c2 in p2.items():
                    m = tuple(a + c for a, c in zip(m1, m2))
                    key = (m, b)
                    v = out.get(key, Fr(0)) + sc1 * c2
                    if v:
                        out[key] = v
                    else:
                        del out[key]
    return MixedElt(w.alg_s, w.alg_w, True, out)


def exp_iota(x, w, cutoff=None):
    """e^{iota(x)} w for nilpotent contraction arguments."""
    if any(b == 0 for _, b in x.terms):
        raise ParityError("exp_iota needs a vanishing blade-size-0 part")
    out = w
    term = w
    k = 1
    while True:
        term = iota_action(x, term, cutoff=cutoff).scale(Fr(1, k))
        if term.is_zero():
            return out
        out = out + term
        k += 1


def y_mult(a, w):
    """Left multiplication by y^a on the Weil algebra."""
    out = {}
    bit = 1 << a
    for (m, b), c in w.terms.items():
        if b & bit:
            continue
        s = remove_sign(b | bit, a)
        out[(m, b | bit)] = s * c
    return MixedElt(w.alg_s, w.alg_w, True, out)


def v_mult(a, w):
    out = {}
    for (m, b), c in w.terms.items():
        mm = list(m)
        mm[a] += 1
        out[(tuple(mm), b)] = c
    return MixedElt(w.alg_s, w.alg_w, w.dual, out)


def iota_gen_w(a, w):
    """Contraction iota(e_a) on the wedge(g*) factor of the Weil algebra."""
    out = {}
    bit = 1 << a
    for (m, b), c in w.terms.items():
        if b & bit:
            out[(m, b ^ bit)] = remove_sign(b, a) * c
    return MixedElt(w.alg_s, w.alg_w, w.dual, out)


def horizontal_projection(w):
    """P_hor = prod_a iota(e_a) y^a, factors applied for a = n..1 first.

    The factors commute (tested, not assumed), so the printed order a=1..n
    is a presentation choice only.
    """
    out = w
    for a in reversed(range(w.alg_w.dim)):
        out = iota_gen_w(a, y_mult(a, out))
    return out
