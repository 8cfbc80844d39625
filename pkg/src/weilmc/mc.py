"""The inhomogeneous Maurer-Cartan solver and its relatives.

Solves  boundary(f) + 1/2 [f,f] = sum_j p^j⊗c_j - sum_a v^a⊗e_a  for the
canonical delta-exact f, by the homotopy recursion
f_N = S(-1/2 sum_{i+j=N-1} [f_i,f_j] + X_{N-1}) with S = G∘delta.  The
residual Z is extracted in the primitive basis, which also produces the
generators p^j of the invariant polynomials.
"""

from dataclasses import dataclass

from .errors import CertificateError, InputError, ParityError
from .exterior import ExtElt, blades_of_size, elt_to_vec, popcount, wedge
from .hodge import build_hodge, delta_matrix, invariant_vectors
from .linalg import Fr, frac, rank, solve, transpose
from .symalg import (MixedElt, PolyElt, boundary_m, curvature, delta_m,
                     exp_nilpotent, lie_diag, lie_s, lie_s_m, lie_w,
                     mixed_mul, poly_mul_mixed, schouten_m)


def get_hodge(alg):
    return alg.cache("hodge_pkg", lambda: build_hodge(alg))


def canonical_x(alg, alg_w=None):
    """X = -sum_a v^a⊗e_a."""
    alg_w = alg_w or alg
    terms = {}
    for a in range(alg.dim):
        m = [0] * alg.dim
        m[a] = 1
        terms[(tuple(m), 1 << a)] = Fr(-1)
    return MixedElt(alg, alg_w, False, terms)


def _apply_ext_slicewise(pkg, x, fn):
    """Extend an ExtElt operator S(g*)-linearly over a MixedElt."""
    groups = {}
    for (m, b), c in x.terms.items():
        groups.setdefault(m, {})[b] = c
    out = MixedElt.zero(x.alg_s, x.dual, alg_w=x.alg_w)
    for m, blades in groups.items():
        img = fn(ExtElt(x.alg_w, x.dual, blades))
        for b, c in img.terms.items():
            key = (m, b)
            v = out.terms.get(key, Fr(0)) + c
            if v:
                out.terms[key] = v
            else:
                out.terms.pop(key, None)
    return out


def apply_shom_mixed(pkg, x):
    return _apply_ext_slicewise(pkg, x, pkg.apply_shom)


def apply_green_mixed(pkg, x):
    return _apply_ext_slicewise(pkg, x, pkg.apply_green)


# ---------------------------------------------------------------------------


@dataclass
class MCSolution:
    alg: object
    pkg: object
    f: MixedElt
    Z: MixedElt
    pjs: list           # aligned with pkg.primitives
    provenance: dict

    def to_dict(self):
        return {
            "algebra": self.alg.name,
            "f": self.f.to_dict(),
            "Z": self.Z.to_dict(),
            "p": [p.to_dict() for p in self.pjs],
            "primitives": [c.to_dict() for c in self.pkg.primitives],
            "dual_primitives": [c.to_dict() for c in self.pkg.duals],
            "provenance": self.provenance,
        }


def _primitive_decomposition(alg, pkg, Z):
    """Write Z = sum_j p^j ⊗ c_j; hard failure when Z leaves the span."""
    pjs = [PolyElt.zero(alg) for _ in pkg.primitives]
    groups = {}
    for (m, b), c in Z.terms.items():
        groups.setdefault((m, popcount(b)), {})[b] = c
    for (m, k), blades in groups.items():
        js = [j for j, d in enumerate(pkg.prim_degrees) if d == k]
        basis = blades_of_size(alg.dim, k)
        cols = [elt_to_vec(pkg.primitives[j], k) for j in js]
        v = [frac(blades.get(b, 0)) for b in basis]
        x = solve(transpose(cols), v) if cols else None
        if x is None:
            raise CertificateError(
                "Maurer-Cartan residual leaves (S g*)_inv ⊗ P "
                f"(S-multidegree {m}, wedge degree {k})")
        for j, coeff in zip(js, x):
            if coeff:
                pjs[j] = pjs[j] + PolyElt(alg, {m: coeff})
    return pjs


def _delta_image_rows(alg, k):
    """Row basis of im(delta: wedge^{k-1} -> wedge^k)."""
    def build():
        from .linalg import int_echelon
        if k == 0:
            return []
        cols = transpose(delta_matrix(alg, k - 1))
        ech, _ = int_echelon(cols)
        return [[Fr(x) for x in row] for row in ech]
    return alg.cache(("delta_im_rows", k), build)


def delta_exactness_report(alg, f):
    """(delta f == 0, f in im(delta) slicewise)."""
    closed = delta_m(f).is_zero()
    exact = True
    groups = {}
    for (m, b), c in f.terms.items():
        groups.setdefault((m, popcount(b)), {})[b] = c
    for (m, k), blades in groups.items():
        rows = _delta_image_rows(alg, k)
        v = [frac(blades.get(b, 0)) for b in blades_of_size(alg.dim, k)]
        if not rows:
            if any(v):
                exact = False
        elif rank(rows + [v]) != len(rows):
            exact = False
    return closed, exact


def verify_mc(sol):
    """All MCSolution invariants; raises CertificateError on failure."""
    alg, pkg, f = sol.alg, sol.pkg, sol.f
    if f.total_degrees() not in ([], [0]):
        raise CertificateError("f is not of total degree 0")
    for (m, b) in f.terms:
        k = popcount(b)
        if k == 0:
            raise CertificateError("f has a wedge-degree-0 component")
        if k % 2 or 2 * sum(m) != k:
            raise CertificateError("component of f outside S^{(N+1)/2}⊗wedge^{N+1}")
    for a in range(alg.dim):
        if not lie_diag(a, f).is_zero():
            raise CertificateError("f is not g-invariant")
    closed, exact = delta_exactness_report(alg, f)
    if not (closed and exact):
        raise CertificateError("f is not delta-exact")
    groups = {}
    for (m, b), c in f.terms.items():
        groups.setdefault(m, {})[b] = c
    for m, blades in groups.items():
        if not pkg.zeta_contains(ExtElt(alg, False, blades)):
            raise CertificateError("f leaves the zeta subalgebra")
    Z2 = curvature(f) - canonical_x(alg)
    if Z2 != sol.Z:
        raise CertificateError("stored residual does not match the curvature")
    recon = MixedElt.zero(alg)
    for p, c in zip(sol.pjs, pkg.primitives):
        recon = recon + MixedElt.from_pair(p, c)
    if recon != sol.Z:
        raise CertificateError("p^j ⊗ c_j does not reassemble Z")
    for p in sol.pjs:
        for a in range(alg.dim):
            if not lie_s(alg, a, p).is_zero():
                raise CertificateError("a generator p^j is not invariant")
    return True


def solve_mc(alg, pkg=None, verify=True):
    """Canonical delta-exact solution of the Maurer-Cartan equation."""
    pkg = pkg or get_hodge(alg)
    X = canonical_x(alg)
    n = alg.dim
    fs = {}
    N = 1
    iterations = 0
    while N + 1 <= n:
        rhs = X.blade_component(N)
        half = MixedElt.zero(alg)
        for i in sorted(fs):
            j = N - 1 - i
            if j in fs and i <= j:
                term = schouten_m(fs[i], fs[j])
                half = half + (term if i < j else term.scale(Fr(1, 2)))
        rhs = rhs - half
        fN = apply_shom_mixed(pkg, rhs)
        if not fN.is_zero():
            fs[N] = fN
        iterations += 1
        N += 2
    f = MixedElt.zero(alg)
    for N in sorted(fs):
        f = f + fs[N]
    Z = curvature(f) - X
    pjs = _primitive_decomposition(alg, pkg, Z)
    sol = MCSolution(alg, pkg, f, Z, pjs,
                     {"homotopy": "S = G∘delta", "iterations": iterations})
    if verify:
        verify_mc(sol)
    return sol


def get_mc(alg):
    return alg.cache("mc_solution", lambda: solve_mc(alg))


# ---------------------------------------------------------------------------
# the exponential, two ways


def exp_f_neumann(alg, pkg=None):
    """e^f via the geometric-series recursion F_[k+2] = G(deltaY · F_[k])."""
    pkg = pkg or get_hodge(alg)
    deltaY = delta_m(canonical_x(alg))
    F = MixedElt.one(alg)
    term = F
    while True:
        term = apply_green_mixed(pkg, mixed_mul(deltaY, term))
        if term.is_zero():
            return F
        F = F + term


# ---------------------------------------------------------------------------
# gauge action


def _ad_series(s, x, maxit):
    """Yields x, [s,x], [s,[s,x]], ... ; raises if it fails to terminate."""
    cur = x
    for _ in range(maxit):
        yield cur
        cur = schouten_m(s, cur)
        if cur.is_zero():
            return
    raise InputError("ad_s is not nilpotent within the iteration bound")


def gauge_transform(f, s, maxit=64):
    """exp(s).f = e^{ad_s} f - j^R(ad_s) boundary(s), j^R(z) = (e^z-1)/z."""
    if any(popcount(b) % 2 == 0 for (_, b) in s.terms):
        raise ParityError("gauge parameter must have odd wedge degrees")
    if any(popcount(b) % 2 for (_, b) in f.terms):
        raise ParityError("gauge acts on even wedge degrees")
    out = MixedElt.zero(f.alg_s, alg_w=f.alg_w)
    fact = 1
    for m, term in enumerate(_ad_series(s, f, maxit)):
        fact = fact * m if m else 1
        out = out + term.scale(Fr(1, fact))
    bs = boundary_m(s)
    fact = 1
    for m, term in enumerate(_ad_series(s, bs, maxit)):
        fact *= m + 1
        out = out - term.scale(Fr(1, fact))
    return out


# ---------------------------------------------------------------------------
# Lie algebra homomorphisms


def phi_matrix_check(alg_g, alg_h, phi):
    """phi is n_h x n_g; column a is the image of e_a; must be a Lie hom."""
    if len(phi) != alg_h.dim or any(len(r) != alg_g.dim for r in phi):
        raise InputError("phi must be an (dim h) x (dim g) matrix")
    for a in range(alg_g.dim):
        for b in range(alg_g.dim):
            # phi([e_a,e_b]) - [phi e_a, phi e_b] = 0
            img = [Fr(0)] * alg_h.dim
            for k, c in alg_g.c[a][b]:
                for i in range(alg_h.dim):
                    img[i] += c * phi[i][k]
            for i in range(alg_h.dim):
                for j in range(alg_h.dim):
                    if phi[i][a] and phi[j][b]:
                        for k, c in alg_h.c[i][j]:
                            img[k] -= phi[i][a] * phi[j][b] * c
            if any(img):
                raise InputError(
                    f"phi is not a Lie algebra homomorphism at ({a + 1},{b + 1})")


def phi_ext(alg_g, alg_h, phi, x):
    """Extend phi multiplicatively to wedge(g) -> wedge(h)."""
    out = ExtElt(alg_h, False)
    for b, c in x.terms.items():
        term = ExtElt.one(alg_h, False).scale(c)
        for i in reversed(sorted(_indices(b))):
            col = ExtElt(alg_h, False,
                         {1 << j: phi[j][i] for j in range(alg_h.dim)})
            term = wedge(col, term)
        out = out + term
    return out


def _indices(b):
    out = []
    i = 0
    while b:
        if b & 1:
            out.append(i)
        b >>= 1
        i += 1
    return out


def phi_pullback(alg_g, alg_h, phi, q):
    """phi*: S(h*) -> S(g*), by substitution w^b -> sum_a phi[b][a] v^a."""
    out = PolyElt.zero(alg_g)
    for m, c in q.terms.items():
        term = PolyElt.one(alg_g).scale(c)
        for b, e in enumerate(m):
            if e:
                lin = PolyElt(alg_g, {_unit_multideg(alg_g.dim, a): phi[b][a]
                                      for a in range(alg_g.dim) if phi[b][a]})
                for _ in range(e):
                    term = term * lin
        out = out + term
    return out


def _unit_multideg(n, a):
    m = [0] * n
    m[a] = 1
    return tuple(m)


@dataclass
class RelativeMCSolution:
    alg_g: object
    alg_h: object
    phi: list
    u: MixedElt         # in S(g*)⊗wedge(h)
    X: MixedElt
    g_sol: MCSolution
    h_sol: MCSolution

    def to_dict(self):
        return {"g": self.alg_g.name, "h": self.alg_h.name,
                "u": self.u.to_dict(), "X": self.X.to_dict()}


def relative_x(alg_g, alg_h, phi, g_sol, h_sol):
    """X = sum_l phi*(q^l)⊗d_l - sum_j p^j⊗phi(c_j)."""
    X = MixedElt.zero(alg_g, alg_w=alg_h)
    for q, d in zip(h_sol.pjs, h_sol.pkg.primitives):
        X = X + MixedElt.from_pair(phi_pullback(alg_g, alg_h, phi, q), d)
    for p, c in zip(g_sol.pjs, g_sol.pkg.primitives):
        X = X - MixedElt.from_pair(p, phi_ext(alg_g, alg_h, phi, c))
    return X


def g_action_on_h(alg_g, alg_h, phi, a, x):
    """L(phi(e_a)) on the wedge(h) factor plus L^S(e_a) on the poly factor."""
    out = lie_s_m(a, x)
    for i in range(alg_h.dim):
        if phi[i][a]:
            out = out + lie_w(i, x).scale(phi[i][a])
    return out


def solve_relative_mc(alg_g, alg_h, phi, verify=True):
    """Degree-0 g-invariant u with curvature(u) = X, residual certified zero."""
    phi = [[frac(x) for x in row] for row in phi]
    phi_matrix_check(alg_g, alg_h, phi)
    g_sol = get_mc(alg_g)
    h_sol = get_mc(alg_h)
    pkg_h = h_sol.pkg
    X = relative_x(alg_g, alg_h, phi, g_sol, h_sol)
    us = {}
    N = 1
    while N + 1 <= alg_h.dim:
        rhs = X.blade_component(N)
        half = MixedElt.zero(alg_g, alg_w=alg_h)
        for i in sorted(us):
            j = N - 1 - i
            if j in us and i <= j:
                term = schouten_m(us[i], us[j])
                half = half + (term if i < j else term.scale(Fr(1, 2)))
        rhs = rhs - half
        uN = apply_shom_mixed(pkg_h, rhs)
        if not uN.is_zero():
            us[N] = uN
        N += 2
    u = MixedElt.zero(alg_g, alg_w=alg_h)
    for N in sorted(us):
        u = u + us[N]
    sol = RelativeMCSolution(alg_g, alg_h, phi, u, X, g_sol, h_sol)
    if verify:
        Y = curvature(u) - X
        if not Y.is_zero():
            raise CertificateError("relative Maurer-Cartan residual is nonzero")
        if u.total_degrees() not in ([], [0]):
            raise CertificateError("u is not of total degree 0")
        for a in range(alg_g.dim):
            if not g_action_on_h(alg_g, alg_h, phi, a, u).is_zero():
                raise CertificateError("u is not g-invariant")
    return sol
