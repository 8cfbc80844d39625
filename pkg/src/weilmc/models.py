"""Cartan models, the Chevalley-Koszul complex, and the certified cochain
maps between them.

Complexes are truncated by total degree; a slice of degree k holds every
invariant of that degree (subject to the underlying space's own
completeness window), so matrices are exact wherever source and target
slices exist.  Each model records trust_hi: the largest degree whose
outgoing differential matrix is exact.

Operations on Weil-algebra modules (Chevalley-Koszul, Cartan projection,
the canonical isomorphism, Halperin, transgression) are computed on the
sparse symbolic Weil algebra, so their certificates carry no truncation
error; the GDS truncation only bounds the set of source basis vectors.

Ambient coordinates for Cartan models over M are pairs
(multidegree, M-label); the poly factor is even, so no Koszul signs arise
from it.
"""

from dataclasses import dataclass, field

from .errors import CertificateError, InputError
from .exterior import (ExtElt, blade_indices, blades_of_size, elt_to_vec,
                       popcount, vec_to_elt)
from .hodge import invariant_vectors
from .linalg import (Fr, SpanSolver, frac, identity, int_echelon, inv,
                     kernel_basis, mat_add, mat_eq, mat_mul, mat_mul_sh,
                     mat_sub, mat_vec, rank, transpose, vec_axpy, zeros)
from .mc import get_hodge, get_mc, phi_pullback
from .symalg import (MixedElt, PolyElt, exp_iota, horizontal_projection,
                     iota_action, lie_s, mixed_mul, weil_diff, y_mult, v_mult)
from . import symalg

BIG = 10 ** 9


# ---------------------------------------------------------------------------
# invariant polynomials


def monomials(n, s):
    """Multidegrees of total s over n variables, lexicographically sorted."""
    if n == 1:
        return [(s,)]
    out = []
    for first in range(s + 1):
        out.extend((first,) + rest for rest in monomials(n - 1, s - first))
    out.sort()
    return out


def inv_poly_basis(alg, s):
    """Basis of (S^s g*)_inv as PolyElts, deterministic kernel order."""

    def build():
        monos = monomials(alg.dim, s)
        idx = {m: i for i, m in enumerate(monos)}
        stacked = []
        for a in range(alg.dim):
            M = zeros(len(monos), len(monos))
            for j, m in enumerate(monos):
                img = lie_s(alg, a, PolyElt(alg, {m: Fr(1)}))
                for mm, x in img.terms.items():
                    M[idx[mm]][j] = x
            stacked.extend(M)
        out = []
        for v in kernel_basis(stacked, ncols=len(monos)):
            out.append(PolyElt(alg, {m: x for m, x in zip(monos, v) if x}))
        return out

    return alg.cache(("inv_poly", s), build)


# ---------------------------------------------------------------------------
# ambient operations over (multidegree, M-label) coordinates


def amb_from_pair(p, mvec):
    out = {}
    for m, c in p.terms.items():
        for lab, x in mvec.items():
            out[(m, lab)] = c * x
    return out


def amb_dM(M, vec):
    out = {}
    for (m, lab), c in vec.items():
        for lab2, x in M.dmap(lab).items():
            key = (m, lab2)
            v = out.get(key, Fr(0)) + c * x
            if v:
                out[key] = v
            else:
                del out[key]
    return out


def amb_iota(M, a, vec):
    out = {}
    for (m, lab), c in vec.items():
        for lab2, x in M.iotamap(a, lab).items():
            key = (m, lab2)
            v = out.get(key, Fr(0)) + c * x
            if v:
                out[key] = v
            else:
                del out[key]
    return out


def amb_L(M, alg, a, vec):
    out = {}
    for (m, lab), c in vec.items():
        for lab2, x in M.lmap(a, lab).items():
            key = (m, lab2)
            v = out.get(key, Fr(0)) + c * x
            if v:
                out[key] = v
            else:
                del out[key]
        # coadjoint action on the poly factor
        img = lie_s(alg, a, PolyElt(alg, {m: Fr(1)}))
        for mm, x in img.terms.items():
            key = (mm, lab)
            v = out.get(key, Fr(0)) + c * x
            if v:
                out[key] = v
            else:
                del out[key]
    return out


def amb_vmult(a, vec):
    out = {}
    for (m, lab), c in vec.items():
        mm = list(m)
        mm[a] += 1
        out[(tuple(mm), lab)] = c
    return out


def amb_polymult(p, vec):
    out = {}
    for mp, cp in p.terms.items():
        for (m, lab), c in vec.items():
            key = (tuple(a + b for a, b in zip(mp, m)), lab)
            v = out.get(key, Fr(0)) + cp * c
            if v:
                out[key] = v
            else:
                del out[key]
    return out


def amb_dg(M, vec):
    """Cartan differential 1⊗d - sum_a v^a⊗iota(e_a) on ambient vectors."""
    out = amb_dM(M, vec)
    for a in range(M.alg.dim):
        out = _vsub(out, amb_vmult(a, amb_iota(M, a, vec)))
    return out


def amb_iota_mixed(M, x, vec):
    """iota of a MixedElt in S(g*)⊗wedge(g): poly multiplies, blade
    contracts M (highest generator first).  No signs: the poly factor is
    even and blades of even size are the only callers' case is not
    assumed -- signs cancel because the poly grading is even."""
    out = {}
    for (mx, bx), cx in x.terms.items():
        cur = {}
        for (m, lab), c in vec.items():
            cur[(tuple(a + b for a, b in zip(mx, m)), lab)] = c * cx
        for i in reversed(blade_indices(bx)):
            cur = amb_iota(M, i, cur)
            if not cur:
                break
        for key, v in cur.items():
            w = out.get(key, Fr(0)) + v
            if w:
                out[key] = w
            else:
                del out[key]
    return out


def amb_exp_iota(M, x, vec):
    out = dict(vec)
    term = vec
    k = 1
    while term:
        term = amb_iota_mixed(M, x, term)
        if not term:
            break
        term = {key: v.__mul__(Fr(1, k)) for key, v in term.items()}
        term = {key: v for key, v in term.items() if v}
        for key, v in term.items():
            w = out.get(key, Fr(0)) + v
            if w:
                out[key] = w
            else:
                del out[key]
        k += 1
    return out


def _vsub(u, v):
    out = dict(u)
    for k, x in v.items():
        y = out.get(k, Fr(0)) - x
        if y:
            out[k] = y
        else:
            del out[k]
    return out


def _vadd(u, v):
    out = dict(u)
    for k, x in v.items():
        y = out.get(k, Fr(0)) + x
        if y:
            out[k] = y
        else:
            del out[k]
    return out


def _vscale(v, c):
    c = frac(c)
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


# ---------------------------------------------------------------------------
# complexes


@dataclass
class Model:
    name: str
    alg: object
    M: object            # underlying GDiffSpace (None for formal complexes)
    cutoff: int
    basis: dict          # k -> list of ambient sparse vectors
    d: dict              # k -> matrix into degree k+1
    trust_hi: int        # d[k] exact for k <= trust_hi
    tags: dict = field(default_factory=dict)   # k -> list of labels
    _solvers: dict = field(default_factory=dict, repr=False)

    def degrees(self):
        return sorted(self.basis)

    def dim(self, k):
        return len(self.basis.get(k, []))

    def solver(self, k):
        if k not in self._solvers:
            self._solvers[k] = SpanSolver(self.basis.get(k, []))
        return self._solvers[k]

    def coords(self, k, vec):
        x = self.solver(k).coords(vec)
        if x is None:
            raise CertificateError(
                f"vector of degree {k} leaves the {self.name} complex")
        return x

    def expand(self, k, coeffs):
        out = {}
        for c, b in zip(coeffs, self.basis.get(k, [])):
            if c:
                vec_axpy(out, c, b)
        return out

    def cohomology(self, k):
        """dim H^k; requires d at k and k-1 to be trusted."""
        if k > self.trust_hi or (k - 1 in self.basis and k - 1 > self.trust_hi):
            raise InputError(f"degree {k} outside the trusted range")
        dk = self.d.get(k)
        zk = self.dim(k) - (rank(dk) if dk and self.dim(k) else 0)
        prev = self.d.get(k - 1)
        bk = rank(prev) if prev and self.dim(k - 1) else 0
        return zk - bk

    def cohomology_dims(self, hi=None):
        hi = self.trust_hi if hi is None else min(hi, self.trust_hi)
        return {k: self.cohomology(k) for k in self.degrees() if k <= hi}

    def cocycle_coords(self, k):
        dk = self.d.get(k)
        if not self.dim(k):
            return []
        if not dk or not any(any(row) for row in dk):
            return [list(r) for r in identity(self.dim(k))]
        return kernel_basis(dk, ncols=self.dim(k))

    def coboundary_coords(self, k):
        """Coordinates (degree k) of the image of d from degree k-1."""
        prev = self.d.get(k - 1)
        if not prev or not self.dim(k - 1) or not self.dim(k):
            return []
        ech, _ = int_echelon(transpose(prev))
        return [[Fr(x) for x in row] for row in ech]


def _operator_matrix(model, k, fn, out_k=None):
    """Matrix of an ambient-level operator in model coordinates."""
    out_k = k + 1 if out_k is None else out_k
    cols = [model.coords(out_k, fn(b)) for b in model.basis.get(k, [])]
    m = model.dim(out_k)
    return [[cols[j][i] for j in range(len(cols))] for i in range(m)]


def big_cartan(M, cutoff):
    """C_g(M) = (S(g*)⊗M)_inv with d_g = 1⊗d - sum v^a⊗iota(e_a)."""
    alg = M.alg
    hi = min(cutoff, M.complete_hi if M.complete_hi < BIG else cutoff)
    basis = {}
    for k in range(hi + 1):
        labels = []
        for s in range(k // 2 + 1):
            mdeg = k - 2 * s
            for m in monomials(alg.dim, s):
                for lab in M.labels(mdeg):
                    labels.append((m, lab))
        if not labels:
            basis[k] = []
            continue
        idx = {lab: i for i, lab in enumerate(labels)}
        stacked = []
        for a in range(alg.dim):
            Mat = zeros(len(labels), len(labels))
            for j, (m, lab) in enumerate(labels):
                img = amb_L(M, alg, a, {(m, lab): Fr(1)})
                for key, x in img.items():
                    Mat[idx[key]][j] = x
            stacked.extend(Mat)
        vecs = []
        for v in kernel_basis(stacked, ncols=len(labels)):
            vecs.append({labels[i]: x for i, x in enumerate(v) if x})
        basis[k] = vecs
    model = Model("big-cartan", alg, M, cutoff, basis, {},
                  min(hi - 1, M.d_trust_hi))
    for k in range(model.trust_hi + 1):
        model.d[k] = _operator_matrix(model, k, lambda v: amb_dg(M, v))
    return model


def small_cartan(M, sol, cutoff):
    """(S(g*))_inv ⊗ M_inv with d = 1⊗d - sum_j p^j⊗iota(c_j), embedded in
    the same ambient coordinates as the big model."""
    alg = M.alg
    pkg = sol.pkg
    hi = min(cutoff, M.complete_hi if M.complete_hi < BIG else cutoff)
    basis, tags = {}, {}
    minv = {k: M.inv_basis(k) for k in M.degrees()}
    for k in range(hi + 1):
        vecs, labs = [], []
        for s in range(k // 2 + 1):
            mdeg = k - 2 * s
            if mdeg not in minv:
                continue
            for i, sigma in enumerate(inv_poly_basis(alg, s)):
                for j, mv in enumerate(minv[mdeg]):
                    vecs.append(amb_from_pair(sigma, mv))
                    labs.append((s, i, mdeg, j))
        basis[k] = vecs
        tags[k] = labs
    model = Model("small-cartan", alg, M, cutoff, basis, {},
                  min(hi - 1, M.d_trust_hi), tags=tags)

    def dtilde(k):
        cols = []
        for (s, i, mdeg, j) in tags[k]:
            sigma = inv_poly_basis(alg, s)[i]
            mv = minv[mdeg][j]
            img = amb_from_pair(sigma, M.apply_d(mv))
            for p, c in zip(sol.pjs, pkg.primitives):
                img = _vsub(img, amb_from_pair(
                    p * sigma, M.apply_elt_contraction(c, mv)))
            cols.append(model.coords(k + 1, img))
        m = model.dim(k + 1)
        return [[cols[j][i] for j in range(len(cols))] for i in range(m)]

    for k in range(model.trust_hi + 1):
        model.d[k] = dtilde(k)
    return model


def model_of_gds(M, cutoff=None):
    """The plain (non-equivariant) complex of a g-differential space."""
    hi = M.complete_hi
    if cutoff is not None:
        hi = min(hi, cutoff)
    basis = {k: [{lab: Fr(1)} for lab in M.labels(k)]
             for k in M.degrees() if k <= hi}
    model = Model(M.name, M.alg, M, hi, basis, {},
                  min(hi - 1, M.d_trust_hi))
    for k in range(model.trust_hi + 1):
        if k in basis:
            model.d[k] = _operator_matrix(
                model, k, lambda v: {lab: x for lab, x in M.apply_d(v).items()})
    return model


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    check: str
    ok: bool
    window: tuple
    details: dict = field(default_factory=dict)
    first_failure: dict = field(default_factory=lambda: None)

    def to_dict(self):
        out = {"check": self.check,
               "range": list(self.window) if self.window else None,
               "status": "pass" if self.ok else "fail"}
        if self.details:
            out["details"] = {k: v for k, v in sorted(self.details.items())}
        if self.first_failure:
            out["first_failure"] = self.first_failure
        return out

    def require(self):
        if not self.ok:
            raise CertificateError(
                f"{self.check}: {self.first_failure}")
        return self


def _fail(cert, degree, what):
    cert.ok = False
    if cert.first_failure is None:
        cert.first_failure = {"degree": degree, "what": what}


# ---------------------------------------------------------------------------
# the twist map small -> big (Theorem: cochain map + quasi-isomorphism)


@dataclass
class TwistData:
    big: Model
    small: Model
    phi: dict            # k -> matrix, small_k -> big_k coordinates
    conj_d: dict         # k -> conjugated differential on the big model
    exp_mats: dict
    exp_inv_mats: dict


def _exp_iota_matrices(big, f):
    mats, invs = {}, {}
    for k in big.degrees():
        cols = [big.coords(k, amb_exp_iota(big.M, f, b))
                for b in big.basis[k]]
        m = big.dim(k)
        E = [[cols[j][i] for j in range(len(cols))] for i in range(m)]
        mats[k] = E
        invs[k] = inv(E) if m else []
    return mats, invs


def twist_map(M, sol, cutoff):
    """Phi = e^{iota(f)} ∘ inclusion, with the full certificate: cochain
    property, (S g*)_inv-equivariance, induced isomorphism on cohomology."""
    big = big_cartan(M, cutoff)
    small = small_cartan(M, sol, cutoff)
    exp_mats, exp_inv = _exp_iota_matrices(big, sol.f)
    phi = {}
    for k in big.degrees():
        incl = [big.coords(k, b) for b in small.basis.get(k, [])]
        m = big.dim(k)
        Inc = [[incl[j][i] for j in range(len(incl))] for i in range(m)]
        phi[k] = mat_mul(exp_mats[k], Inc)

    cert = Certificate("twist", True, (0, min(big.trust_hi, small.trust_hi)))
    hi = cert.window[1]
    for k in range(hi + 1):
        shape = (big.dim(k + 1), small.dim(k))
        lhs = mat_mul_sh(big.d[k], phi[k], *shape)
        rhs = mat_mul_sh(phi[k + 1], small.d[k], *shape)
        if not mat_eq(lhs, rhs):
            _fail(cert, k, "d_g ∘ Phi != Phi ∘ d_small")

    # (S g*)_inv-equivariance of Phi
    for j, p in enumerate(sol.pjs):
        raise_deg = 2 * p.sdegrees()[0] if p.sdegrees() else 0
        for k in range(hi + 1 - raise_deg):
            shape = (big.dim(k + raise_deg), small.dim(k))
            pb = _operator_matrix(big, k, lambda v: amb_polymult(p, v),
                                  out_k=k + raise_deg)
            ps = _poly_action_small(small, p, k, raise_deg)
            if not mat_eq(mat_mul_sh(phi[k + raise_deg], ps, *shape),
                          mat_mul_sh(pb, phi[k], *shape)):
                _fail(cert, k, f"Phi does not commute with p^{j + 1}")

    # induced map on cohomology is an isomorphism
    dims = {}
    for k in range(hi + 1):
        hs = small.cohomology(k)
        hb = big.cohomology(k)
        dims[k] = (hs, hb)
        if hs != hb:
            _fail(cert, k, f"cohomology dims differ: {hs} vs {hb}")
            continue
        Z = small.cocycle_coords(k)
        imgs = [mat_vec(phi[k], z) for z in Z]
        B = big.coboundary_coords(k)
        stacked = [list(b) for b in B] + [list(v) for v in imgs]
        got = rank(stacked) - (rank([list(b) for b in B]) if B else 0)
        if got != hs:
            _fail(cert, k, "induced map on cohomology is not injective")
    cert.details["cohomology"] = {k: v[0] for k, v in dims.items()}

    conj = {}
    for k in range(big.trust_hi + 1):
        conj[k] = mat_mul_sh(
            exp_inv[k + 1],
            mat_mul_sh(big.d[k], exp_mats[k], big.dim(k + 1), big.dim(k)),
            big.dim(k + 1), big.dim(k))
    return TwistData(big, small, phi, conj, exp_mats, exp_inv), cert


def _poly_action_small(small, p, k, raise_deg):
    """Multiplication by an invariant polynomial in small-model coordinates."""
    alg = small.alg
    cols = []
    for b in small.basis.get(k, []):
        cols.append(small.coords(k + raise_deg, amb_polymult(p, b)))
    m = small.dim(k + raise_deg)
    return [[cols[j][i] for j in range(len(cols))] for i in range(m)]


def twisted_differential_check(M, sol, twist):
    """Audit: e^{-iota f} d_g e^{iota f} = 1⊗d - sum_j p^j iota(c_j)
    + sum_a iota(iota*(e^a) f) L^M(e_a), as matrices on the big model."""
    big = twist.big
    alg = M.alg
    pkg = sol.pkg
    hi = big.trust_hi
    ws = [symalg.iota_star_m(a, sol.f) for a in range(alg.dim)]

    def formula(vec):
        out = amb_dM(M, vec)
        for p, c in zip(sol.pjs, pkg.primitives):
            term = {}
            for (m, lab), cc in vec.items():
                contr = M.apply_elt_contraction(c, {lab: cc})
                for lab2, x in contr.items():
                    key = (m, lab2)
                    v = term.get(key, Fr(0)) + x
                    if v:
                        term[key] = v
                    else:
                        del term[key]
            out = _vsub(out, amb_polymult(p, term))
        for a in range(alg.dim):
            lvec = {}
            for (m, lab), cc in vec.items():
                for lab2, x in M.lmap(a, lab).items():
                    key = (m, lab2)
                    v = lvec.get(key, Fr(0)) + cc * x
                    if v:
                        lvec[key] = v
                    else:
                        del lvec[key]
            out = _vadd(out, amb_iota_mixed(M, ws[a], lvec))
        return out

    cert = Certificate("twisted-differential", True, (0, hi))
    for k in range(hi + 1):
        F = _operator_matrix(big, k, formula)
        if not mat_eq(F, twist.conj_d[k]):
            _fail(cert, k, "conjugated differential mismatch")
    return cert


def homotopy_inverse(M, sol, cutoff, twist=None):
    """The homotopy inverse data: h = -sum_a L^S(e_a)⊗iota(Bsharp e^a),
    Laplacian [d', h], Green's operator, H = hG with [d', H] = 1 - Pi."""
    alg = M.alg
    if twist is None:
        twist, tcert = twist_map(M, sol, cutoff)
        tcert.require()
    big, small = twist.big, twist.small
    hi = big.trust_hi
    cert = Certificate("homotopy-inverse", True, (0, hi - 1))

    tdc = twisted_differential_check(M, sol, twist)
    if not tdc.ok:
        cert.ok = False
        cert.first_failure = tdc.first_failure
        return None, cert

    def h_op(vec):
        out = {}
        for a in range(alg.dim):
            lv = {}
            for (m, lab), c in vec.items():
                img = lie_s(alg, a, PolyElt(alg, {m: Fr(1)}))
                for mm, x in img.terms.items():
                    key = (mm, lab)
                    v = lv.get(key, Fr(0)) + c * x
                    if v:
                        lv[key] = v
                    else:
                        del lv[key]
            for b in range(alg.dim):
                coeff = alg.B_inv[a][b]
                if coeff:
                    out = _vsub(out, _vscale(amb_iota(M, b, lv), coeff))
        return out

    hmat = {k: _operator_matrix(big, k, h_op, out_k=k - 1)
            for k in big.degrees()}

    lap, green, proj = {}, {}, {}
    for k in range(hi + 1):
        L = mat_mul_sh(hmat[k + 1], twist.conj_d[k], big.dim(k), big.dim(k))
        if k > 0:
            L = mat_add(L, mat_mul_sh(twist.conj_d[k - 1], hmat[k],
                                      big.dim(k), big.dim(k)))
        lap[k] = L
        dim = big.dim(k)
        K = kernel_basis(L, ncols=dim) if dim else []
        img_rows = [[Fr(x) for x in row] for row in int_echelon(transpose(L))[0]]
        if rank([list(v) for v in K] + img_rows) != len(K) + len(img_rows):
            _fail(cert, k, "ker(L) ∩ im(L) != 0")
            continue
        # kernel must be the embedded small model
        emb = [big.coords(k, b) for b in small.basis.get(k, [])]
        if len(emb) != len(K) or \
                rank([list(v) for v in K] + [list(e) for e in emb]) != len(K):
            _fail(cert, k, "ker(L) is not the embedded small model")
            continue
        kappa = len(K)
        cols = [list(v) for v in K] + [list(r) for r in img_rows]
        Minv = inv(transpose(cols)) if dim else []
        sel = Minv[:kappa]
        BK = transpose([list(v) for v in K]) if kappa else zeros(dim, 0)
        P = mat_mul(BK, sel) if kappa else zeros(dim, dim)
        proj[k] = P
        green[k] = mat_mul(inv(mat_add(L, P)), mat_sub(identity(dim), P)) \
            if dim else []

    Hmat = {}
    for k in range(hi + 1):
        if k in green:
            Hmat[k] = mat_mul_sh(hmat[k], green[k],
                                 big.dim(k - 1), big.dim(k))

    for k in range(hi):
        if not (k in Hmat and k + 1 in Hmat):
            continue
        acc = mat_mul_sh(Hmat[k + 1], twist.conj_d[k],
                         big.dim(k), big.dim(k))
        if k > 0:
            acc = mat_add(acc, mat_mul_sh(twist.conj_d[k - 1], Hmat[k],
                                          big.dim(k), big.dim(k)))
        want = mat_sub(identity(big.dim(k)), proj[k])
        if not mat_eq(acc, want):
            _fail(cert, k, "[d', H] != 1 - Pi")

    # equivariance of Pi and H under the invariant polynomials
    for j, p in enumerate(sol.pjs):
        raise_deg = 2 * p.sdegrees()[0] if p.sdegrees() else 0
        for k in range(hi - raise_deg):
            if k not in Hmat or k + raise_deg not in Hmat:
                continue
            pb = _operator_matrix(big, k, lambda v: amb_polymult(p, v),
                                  out_k=k + raise_deg)
            sh = (big.dim(k + raise_deg), big.dim(k))
            if not mat_eq(mat_mul_sh(proj[k + raise_deg], pb, *sh),
                          mat_mul_sh(pb, proj[k], *sh)):
                _fail(cert, k, f"Pi does not commute with p^{j + 1}")
            if k >= 1:
                pb_lower = _operator_matrix(
                    big, k - 1, lambda v: amb_polymult(p, v),
                    out_k=k - 1 + raise_deg)
                shH = (big.dim(k - 1 + raise_deg), big.dim(k))
                if not mat_eq(mat_mul_sh(Hmat[k + raise_deg], pb, *shH),
                              mat_mul_sh(pb_lower, Hmat[k], *shH)):
                    _fail(cert, k, f"H does not commute with p^{j + 1}")

    data = {"h": hmat, "laplacian": lap, "green": green, "proj": proj,
            "H": Hmat}
    return data, cert
