"""Hodge theory on wedge(g): invariants, Laplacian, Green's operator, the
homotopy S = G∘delta, primitive elements and their dual basis.

Invariants are defined as the joint kernel of the Lie derivatives; the
identification with ker(Laplacian) is checked at runtime and a failure
aborts with HodgeHypothesisViolation, since over Q with a user-supplied B
it is a hypothesis, not a theorem.
"""

from dataclasses import dataclass, field

from .errors import CertificateError, HodgeHypothesisViolation
from .exterior import (ExtElt, bflat, blades_of_size, boundary, contract,
                       d_coboundary, delta, elt_to_vec, lie, op_matrix,
                       pairing, vec_to_elt, wedge)
from .linalg import (Fr, identity, int_echelon, integer_primitive, inv,
                     kernel_basis, mat_add, mat_eq, mat_mul, mat_scale,
                     mat_sub, rank, solve, transpose, zeros)

# ---------------------------------------------------------------------------
# cached operator matrices on the blade bases


def lie_matrix(alg, a, k, dual=False):
    return alg.cache(("lie_mat", a, k, dual), lambda: op_matrix(
        alg, lambda x: lie(alg, a, x), k, dual, k))


def boundary_matrix(alg, k):
    return alg.cache(("bdry_mat", k),
                     lambda: op_matrix(alg, boundary, k, False, k - 1))


def delta_matrix(alg, k):
    return alg.cache(("delta_mat", k),
                     lambda: op_matrix(alg, delta, k, False, k + 1))


def d_matrix(alg, k):
    return alg.cache(("d_mat", k),
                     lambda: op_matrix(alg, d_coboundary, k, True, k + 1))


def invariant_vectors(alg, k, dual=False):
    """Basis of (wedge^k)_inv as integer-primitive coefficient vectors."""

    def build():
        dim = len(blades_of_size(alg.dim, k))
        stacked = []
        for a in range(alg.dim):
            stacked.extend(lie_matrix(alg, a, k, dual))
        return [integer_primitive(v) for v in kernel_basis(stacked, ncols=dim)]

    return alg.cache(("inv_vecs", k, dual), build)


def invariants(alg, k, dual=False):
    """(wedge^k g)_inv (or its dual-space analogue) as a list of ExtElts."""
    return [vec_to_elt(alg, v, k, dual) for v in invariant_vectors(alg, k, dual)]


def bsharp_of_dual_gen(alg, a):
    return ExtElt(alg, False,
                  {1 << j: alg.B_inv[a][j] for j in range(alg.dim)})


def casimir_apply(alg, x):
    """Cas^wedge(x) = sum_a L(Bsharp(e^a)) L(e_a) x, elementwise."""
    out = ExtElt(x.alg, x.dual)
    for a in range(alg.dim):
        la = lie(alg, a, x)
        if la.is_zero():
            continue
        for b in range(alg.dim):
            coeff = alg.B_inv[a][b]
            if coeff:
                out = out + lie(alg, b, la).scale(coeff)
    return out


def casimir_matrix(alg, k, dual=False):
    return alg.cache(("cas_mat", k, dual), lambda: op_matrix(
        alg, lambda x: casimir_apply(alg, x), k, dual, k))


def casimir_trace_on_g(alg):
    """tr_g(Cas_g) in the adjoint representation."""
    M = casimir_matrix(alg, 1)
    return sum(M[i][i] for i in range(len(M)))


# ---------------------------------------------------------------------------


@dataclass
class HodgePackage:
    alg: object
    inv: dict            # k -> list of ExtElt, basis of (wedge^k g)_inv
    inv_dual: dict       # k -> basis of (wedge^k g*)_inv
    lap: dict            # k -> Laplacian matrix on wedge^k
    green: dict          # k -> Green's operator matrix
    proj: dict           # k -> projection onto invariants along im(Laplacian)
    shom: dict           # k -> homotopy S = G∘delta : wedge^k -> wedge^{k+1}
    primitives: list     # c_j, ordered by (degree, kernel order)
    duals: list          # c^j with iota(c_i) c^j = delta_i^j
    prim_degrees: list
    decomposables: dict  # k -> list of ExtElt spanning D^k
    _zeta: dict = field(default_factory=dict, repr=False)

    @property
    def rank(self):
        return len(self.primitives)

    def inv_dims(self):
        return [len(self.inv.get(k, [])) for k in range(self.alg.dim + 1)]

    def _apply_slicewise(self, mats, x, shift):
        out = ExtElt(self.alg, False)
        for k in x.degrees():
            v = elt_to_vec(x.component(k), k)
            M = mats[k]
            img = [sum((row[j] * v[j] for j in range(len(v)) if v[j]), Fr(0))
                   for row in M]
            out = out + vec_to_elt(self.alg, img, k + shift)
        return out

    def apply_shom(self, x):
        return self._apply_slicewise(self.shom, x, 1)

    def apply_green(self, x):
        return self._apply_slicewise(self.green, x, 0)

    def apply_proj(self, x):
        return self._apply_slicewise(self.proj, x, 0)

    # -- the zeta subalgebra (diagnostics only) ------------------------------
    def zeta_basis(self, k):
        """Basis of im(zeta) in degree k, the subalgebra generated by the
        elements delta(e_a)."""
        if k in self._zeta:
            return self._zeta[k]
        alg = self.alg
        if k % 2 or k < 0 or k > alg.dim:
            basis = []
        elif k == 0:
            basis = [ExtElt.one(alg, False)]
        else:
            gens = [delta(ExtElt.gen(alg, a)) for a in range(alg.dim)]
            span = []
            for gen in gens:
                for x in self.zeta_basis(k - 2):
                    w = wedge(gen, x)
                    if not w.is_zero():
                        span.append([int(c) for c in
                                     integer_primitive(elt_to_vec(w, k))])
            ech, _ = int_echelon(span) if span else ([], [])
            basis = [vec_to_elt(alg, integer_primitive(row), k) for row in ech]
        self._zeta[k] = basis
        return basis

    def zeta_contains(self, x):
        """Membership of a wedge(g) element in im(zeta), degreewise."""
        degs = x.degrees()
        if len(degs) > 1:
            return all(self.zeta_contains(x.component(k)) for k in degs)
        if not degs:
            return True
        k = degs[0]
        rows = [elt_to_vec(b, k) for b in self.zeta_basis(k)]
        v = elt_to_vec(x, k)
        if not rows:
            return all(c == 0 for c in v)
        return rank(rows + [v]) == len(rows)


def _column_space_rows(M):
    """Deterministic basis of the column space, as row vectors."""
    ech, _ = int_echelon(transpose(M))
    return [[Fr(x) for x in row] for row in ech]


def _projection_onto(kernel_vecs, image_rows, dim):
    """Projection matrix onto span(kernel_vecs) along span(image_rows)."""
    kappa = len(kernel_vecs)
    cols = [list(v) for v in kernel_vecs] + [list(r) for r in image_rows]
    M = transpose(cols)          # dim x dim, columns = kernel then image
    Minv = inv(M)
    sel = Minv[:kappa]           # kappa x dim
    BK = transpose([list(v) for v in kernel_vecs]) if kappa else zeros(dim, 0)
    return mat_mul(BK, sel) if kappa else zeros(dim, dim)


def _gram_rows(alg, elts, k):
    """Rows <x_i, .>_B over the degree-k blade basis, via pairing(x, Bflat(.))."""
    rows = []
    basis = blades_of_size(alg.dim, k)
    for x in elts:
        xb = bflat(x)
        rows.append([xb.terms.get(b, Fr(0)) for b in basis])
    return rows


def build_hodge(alg):
    """Assemble the HodgePackage, verifying every Hodge hypothesis."""
    n = alg.dim
    inv_vecs = {k: invariant_vectors(alg, k) for k in range(n + 1)}
    inv_elts = {k: [vec_to_elt(alg, v, k) for v in inv_vecs[k]]
                for k in range(n + 1)}
    inv_dual = {k: invariants(alg, k, dual=True) for k in range(n + 1)}
    lap, green, proj, shom = {}, {}, {}, {}

    for k in range(n + 1):
        dim = len(blades_of_size(n, k))
        L = zeros(dim, dim)
        if k > 0:
            L = mat_add(L, mat_mul(delta_matrix(alg, k - 1),
                                   boundary_matrix(alg, k)))
        if k < n:
            L = mat_add(L, mat_mul(boundary_matrix(alg, k + 1),
                                   delta_matrix(alg, k)))
        lap[k] = L

        if not mat_eq(L, mat_scale(casimir_matrix(alg, k), Fr(-1, 2))):
            raise HodgeHypothesisViolation(
                "laplacian_equals_minus_half_casimir", k)

        K = inv_vecs[k]
        if len(kernel_basis(L, ncols=dim)) != len(K):
            raise HodgeHypothesisViolation("kernel_is_invariants", k,
                                           "dim ker(Laplacian) != dim invariants")
        for v in K:
            if any(sum((row[j] * v[j] for j in range(dim) if v[j]), Fr(0))
                   for row in L):
                raise HodgeHypothesisViolation("kernel_is_invariants", k,
                                               "invariant not harmonic")
        img_rows = _column_space_rows(L)
        if rank([list(v) for v in K] + img_rows) != len(K) + len(img_rows):
            raise HodgeHypothesisViolation("kernel_meets_image", k)

        P = _projection_onto(K, img_rows, dim)
        G = mat_mul(inv(mat_add(L, P)), mat_sub(identity(dim), P))
        proj[k] = P
        green[k] = G
        # GL = LG = 1 - P and GP = 0, by construction; assert anyway
        if not (mat_eq(mat_mul(G, L), mat_sub(identity(dim), P))
                and mat_eq(mat_mul(L, G), mat_sub(identity(dim), P))
                and all(all(x == 0 for x in row) for row in mat_mul(G, P))):
            raise CertificateError(f"Green operator identities fail at degree {k}")

    for k in range(n + 1):
        shom[k] = (mat_mul(green[k + 1], delta_matrix(alg, k))
                   if k < n else zeros(0, len(blades_of_size(n, k))))

    for k in range(n + 1):
        # [S, boundary] = 1 - Pi, the homotopy identity
        dim = len(blades_of_size(n, k))
        acc = zeros(dim, dim)
        if k > 0:
            acc = mat_add(acc, mat_mul(shom[k - 1], boundary_matrix(alg, k)))
        if k < n:
            acc = mat_add(acc, mat_mul(boundary_matrix(alg, k + 1), shom[k]))
        if not mat_eq(acc, mat_sub(identity(dim), proj[k])):
            raise CertificateError(f"homotopy identity fails at degree {k}")

    # -- primitives -----------------------------------------------------------
    primitives, prim_degrees, decomposables = [], [], {}
    for k in range(1, n + 1):
        if not inv_elts[k]:
            decomposables[k] = []
            continue
        span = []
        for i in range(1, k):
            for x in inv_elts[i]:
                for y in inv_elts[k - i]:
                    w = wedge(x, y)
                    if not w.is_zero():
                        span.append([int(c) for c in
                                     integer_primitive(elt_to_vec(w, k))])
        ech, _ = int_echelon(span) if span else ([], [])
        dec = [vec_to_elt(alg, integer_primitive(row), k) for row in ech]
        decomposables[k] = dec

        # primitive representatives: invariants B-orthogonal to decomposables
        gram = _gram_rows(alg, dec, k)
        constraints = []
        for row in gram:
            constraints.append([
                sum((row[j] * v[j] for j in range(len(v)) if v[j]), Fr(0))
                for v in inv_vecs[k]])
        prim_coords = (kernel_basis(constraints, ncols=len(inv_vecs[k]))
                       if constraints else
                       [list(r) for r in identity(len(inv_vecs[k]))])
        if len(prim_coords) + len(dec) != len(inv_vecs[k]):
            raise HodgeHypothesisViolation(
                "primitive_complement", k,
                "B-orthogonal complement of decomposables is not a complement")
        if prim_coords and k % 2 == 0:
            raise HodgeHypothesisViolation(
                "even_degree_primitive", k,
                "nonzero primitive space in even degree")
        for coords in prim_coords:
            vec = [Fr(0)] * len(blades_of_size(n, k))
            for c, v in zip(coords, inv_vecs[k]):
                if c:
                    for j in range(len(vec)):
                        vec[j] += c * v[j]
            primitives.append(vec_to_elt(alg, integer_primitive(vec), k))
            prim_degrees.append(k)

    total_inv = sum(len(v) for v in inv_vecs.values())
    if total_inv != 2 ** len(primitives):
        raise HodgeHypothesisViolation(
            "hopf_dimension", -1,
            f"total invariant dim {total_inv} != 2^rank")

    # pairing between invariants and dual invariants must be perfect
    for k in range(n + 1):
        if len(inv_elts[k]) != len(inv_dual[k]):
            raise HodgeHypothesisViolation("invariant_pairing", k, "dim mismatch")
        m = len(inv_elts[k])
        P = [[pairing(x, y) for y in inv_dual[k]] for x in inv_elts[k]]
        if m and rank(P) != m:
            raise HodgeHypothesisViolation("invariant_pairing", k, "degenerate")

    duals = _solve_duals(alg, primitives, prim_degrees, inv_dual)
    return HodgePackage(alg, inv_elts, inv_dual, lap, green, proj, shom,
                        primitives, duals, prim_degrees, decomposables)


def _solve_duals(alg, primitives, prim_degrees, inv_dual):
    """Find c^j in (wedge g*)_inv with iota(c_i) c^j = delta_i^j exactly,
    including the vanishing of all positive-degree contractions."""
    duals = []
    for j, (cj, kj) in enumerate(zip(primitives, prim_degrees)):
        cand = inv_dual[kj]
        rows, rhs = [], []
        for i, (ci, ki) in enumerate(zip(primitives, prim_degrees)):
            if ki > kj:
                continue
            images = [contract(ci, mu) for mu in cand]
            if ki == kj:
                rows.append([img.terms.get(0, Fr(0)) for img in images])
                rhs.append(Fr(1) if i == j else Fr(0))
            else:
                for b in blades_of_size(alg.dim, kj - ki):
                    row = [img.terms.get(b, Fr(0)) for img in images]
                    if any(row):
                        rows.append(row)
                        rhs.append(Fr(0))
        x = solve(rows, rhs)
        if x is None:
            raise CertificateError(
                f"dual primitive solve inconsistent at degree {kj} "
                "(convention bug)")
        out = ExtElt(alg, True)
        for c, mu in zip(x, cand):
            if c:
                out = out + mu.scale(c)
        duals.append(out)
    # exactness audit
    for i, ci in enumerate(primitives):
        for j, dj in enumerate(duals):
            got = contract(ci, dj)
            want = (ExtElt.one(alg, True) if i == j else ExtElt(alg, True))
            if got != want:
                raise CertificateError("dual primitive normalization failed")
    return duals
