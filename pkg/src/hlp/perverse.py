"""Perverse-side analysis of a package (H*, eta, L, S, Weil data, fibers).

The perverse filtration is computed from the weight filtration of L:
H^{n+j}_{<=b} = W^L_{b-j} ∩ H^{n+j}.  Bigraded pieces of the (eta, L)
double decomposition are labelled (i, j) and sit in H^{n-i-j}_{-i}.
Fiber data uses degree-local coordinates: cl_b maps into H^{n+b} and
res_b maps out of H^{n+b}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .errors import (
    HLPError,
    HodgeSubstructureError,
    InputError,
    InvalidFiberError,
    InvalidPackageError,
    NilpotencyError,
    NotSemismallError,
)
from .exact import (
    Matrix,
    Quotient,
    Subspace,
    apply,
    image,
    join,
    join_all,
    kernel,
    meet,
    meet_all,
    perp,
    quotient_map,
    signature,
)
from .graded import (
    Filtration,
    GradedOperator,
    GradedSpace,
    PoincarePairing,
    TwistedForm,
    check_infinitesimal_automorphism,
    commutator_check,
    degree_filtration,
    twisted_form,
)
from .lefschetz import (
    DoubleDecomposition,
    WeightFiltration,
    WeilOperator,
    double_decomposition,
    double_form,
    double_forms_check,
    polarization_check,
    polarization_sign,
    relative_weight_check,
    restrict_operator,
    weight_filtration,
    weil_check,
)
from .reports import Check, Report


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


@dataclass
class FiberRecord:
    """Class and restriction maps for one fiber, keyed by the perversity index b."""

    label: str
    class_maps: dict
    restriction_maps: dict
    homology_filtration: dict
    codim_h: int | None = None

    @property
    def indices(self) -> list[int]:
        return sorted(self.class_maps)

    def homology_dim(self, b: int) -> int:
        return self.class_maps[b].cols

    def cohomology_dim(self, b: int) -> int:
        return self.restriction_maps[b].rows


@dataclass
class PerversePackage:
    name: str
    space: GradedSpace
    eta: GradedOperator
    L: GradedOperator
    pairing: PoincarePairing
    weil: WeilOperator | None = None
    defect_table: list | None = None
    fibers: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.space.n

    @cached_property
    def S(self) -> TwistedForm:
        return twisted_form(self.pairing)

    @cached_property
    def W_L(self) -> WeightFiltration:
        return weight_filtration(self.L)

    @cached_property
    def W_eta(self) -> WeightFiltration:
        return weight_filtration(self.eta)

    @cached_property
    def perverse(self) -> "PerverseFiltration":
        return perverse_filtration(self)

    @cached_property
    def decomposition(self) -> DoubleDecomposition:
        return double_decomposition(self.eta, self.L, self.S)

    @cached_property
    def validation(self) -> Report:
        return validate_package(self)

    def middle_form(self) -> Matrix:
        """S restricted to H^n x H^n."""
        return self.S.block(self.n)

    def betti(self) -> list[int]:
        return list(self.space.dims)


def validate_package(pkg: PerversePackage) -> Report:
    """Structural hypotheses: nondegenerate pairing, nilpotent commuting eta and L,
    both infinitesimal automorphisms of S, W^eta = W^deg and the relative weight condition."""
    rep = Report("package")
    sp = pkg.space
    try:
        S = pkg.S
        rep.add(Check("pairing", True, "Poincaré pairing blocks are nondegenerate"))
    except HLPError as exc:
        rep.add(Check("pairing", False, str(exc)))
        return rep
    for name, op in (("eta", pkg.eta), ("L", pkg.L)):
        ok = op.shift == 2 and (op.total() ** (sp.n + 1)).is_zero()
        rep.add(Check(f"nilpotent_{name}", ok, f"{name} has degree 2 and {name}^(n+1) = 0"))
    rep.add(commutator_check(pkg.eta, pkg.L, "commutation"))
    rep.add(check_infinitesimal_automorphism(S, pkg.eta, "automorphism_eta"))
    rep.add(check_infinitesimal_automorphism(S, pkg.L, "automorphism_L"))
    if pkg.weil is not None:
        rep.extend(weil_check(pkg.weil, {"eta": pkg.eta, "L": pkg.L}), prefix="weil")
    if not rep.passed:
        return rep
    deg = degree_filtration(sp)
    rep.add(Check("eta_weight", pkg.W_eta.filtration == deg, "W^eta equals the degree filtration"))
    rel = relative_weight_check(pkg.eta, pkg.L, S)
    rep.extend(rel, prefix="relative_weight")
    return rep


def require_valid(pkg: PerversePackage) -> Report:
    rep = pkg.validation
    if not rep.passed:
        bad = rep.first_failure()
        raise InvalidPackageError(f"invalid package: {bad.name}: {bad.detail}", report=rep)
    return rep


class PerverseFiltration:
    """H^l_{<=b} in the local coordinates of each H^l."""

    def __init__(self, space: GradedSpace, WL: WeightFiltration):
        self.space = space
        self.W = WL
        n, w = space.n, WL.width
        self.steps: dict[int, Filtration] = {}
        for l in space.degrees:
            j = l - n
            chain = [space.restrict(WL.at(b - j), l) for b in range(j - w, j + w + 1)]
            self.steps[l] = Filtration(space.dim(l), j - w, chain)
        self._gr: dict[tuple[int, int], Quotient] = {}

    def at(self, l: int, b: int) -> Subspace:
        if l not in self.steps:
            return Subspace.zero(0)
        return self.steps[l].at(b)

    def gr(self, l: int, b: int) -> Quotient:
        key = (l, b)
        if key not in self._gr:
            self._gr[key] = quotient_map(self.at(l, b), self.at(l, b - 1))
        return self._gr[key]

    def gr_dim(self, l: int, b: int) -> int:
        if l not in self.steps:
            return 0
        return self.at(l, b).dim - self.at(l, b - 1).dim

    def b_range(self, l: int) -> range:
        if l not in self.steps:
            return range(0)
        f = self.steps[l]
        return range(f.lo, f.hi + 1)

    def graded_dims(self) -> dict[tuple[int, int], int]:
        out = {}
        for l in self.space.degrees:
            for b in self.b_range(l):
                d = self.gr_dim(l, b)
                if d:
                    out[(l, b)] = d
        return out

    def table(self) -> list[list[int]]:
        return [[l, b, d] for (l, b), d in sorted(self.graded_dims().items())]

    def induced(self, T: Matrix, src: tuple[int, int], dst: tuple[int, int]) -> Matrix:
        """T : H^{l}_{b} -> H^{l'}_{b'} on graded pieces (T given degree-locally)."""
        return self.gr(*dst).projection @ T @ self.gr(*src).section


def perverse_filtration(pkg: PerversePackage) -> PerverseFiltration:
    require_valid(pkg)
    return PerverseFiltration(pkg.space, pkg.W_L)


def check_filtered_cup(pkg: PerversePackage, pf: PerverseFiltration | None = None) -> Report:
    """eta H^l_{<=a} ⊆ H^{l+2}_{<=a+2}; L H^l_{<=a} ⊆ H^{l+2}_{<=a}, strictly."""
    pf = pf or pkg.perverse
    rep = Report("filtered_cup")
    sp = pkg.space
    bad_eta = bad_L = bad_strict = None
    for l in sp.degrees:
        if not sp.dim(l) or not sp.dim(l + 2):
            continue
        E, Lb = pkg.eta.block(l), pkg.L.block(l)
        imL = image(Lb)
        for a in range(pf.steps[l].lo - 1, pf.steps[l].hi + 2):
            F = pf.at(l, a)
            if bad_eta is None and not apply(E, F) <= pf.at(l + 2, a + 2):
                bad_eta = [l, a]
            LF = apply(Lb, F)
            if bad_L is None and not LF <= pf.at(l + 2, a):
                bad_L = [l, a]
            if bad_strict is None and LF != meet(imL, pf.at(l + 2, a)):
                bad_strict = [l, a]
    rep.add(Check("eta_shift", bad_eta is None, "eta H^l_{<=a} ⊆ H^{l+2}_{<=a+2}", witness=bad_eta))
    rep.add(Check("L_filtered", bad_L is None, "L H^l_{<=a} ⊆ H^{l+2}_{<=a}", witness=bad_L))
    rep.add(Check("L_strict", bad_strict is None, "L(H^l_{<=a}) = Im L ∩ H^{l+2}_{<=a}", witness=bad_strict))
    return rep


def hard_lefschetz_perverse(pkg: PerversePackage, pf: PerverseFiltration | None = None) -> Report:
    """eta^k : H^j_{-k} ≅ H^{j+2k}_k and L^k : H^{n+b-k}_b ≅ H^{n+b+k}_b."""
    pf = pf or pkg.perverse
    sp, n = pkg.space, pkg.n
    rep = Report("hard_lefschetz")
    top = 2 * n
    count = 0
    bad_eta = bad_L = None
    for k in range(0, top + 1):
        for j in range(0, top + 1):
            src, dst = (j, -k), (j + 2 * k, k)
            ok = _graded_iso(pkg.eta, k, pf, src, dst)
            count += 1
            if not ok and bad_eta is None:
                bad_eta = [k, j]
        for b in range(-top, top + 1):
            src, dst = (n + b - k, b), (n + b + k, b)
            ok = _graded_iso(pkg.L, k, pf, src, dst)
            count += 1
            if not ok and bad_L is None:
                bad_L = [k, b]
    rep.add(Check("eta", bad_eta is None, "eta^k : H^j_{-k} ≅ H^{j+2k}_k for all k, j", witness=bad_eta))
    rep.add(Check("L", bad_L is None, "L^k : H^{n+b-k}_b ≅ H^{n+b+k}_b for all k, b", witness=bad_L))
    rep.data["maps_checked"] = count
    return rep


def _graded_iso(op: GradedOperator, k: int, pf: PerverseFiltration, src, dst) -> bool:
    sp = pf.space
    ds, dd = pf.gr_dim(*src), pf.gr_dim(*dst)
    if ds != dd:
        return False
    if ds == 0:
        return True
    A = pf.induced(op.power(k, src[0]), src, dst)
    return A.is_invertible()


def eta_L_decomposition(pkg: PerversePackage) -> tuple[DoubleDecomposition, list[list[int]]]:
    """The (eta, L)-decomposition with its biprimitive dimension table [[i, j, dim]]."""
    require_valid(pkg)
    dec = pkg.decomposition
    table = [[i, j, d] for (i, j), d in dec.biprimitive_dims().items()]
    return dec, table


def piece_location(pkg: PerversePackage, i: int, j: int) -> tuple[int, int]:
    """The bigraded piece (i, j) is H^l_b with l = n - i - j and b = -i."""
    return (pkg.n - i - j, -i)


def s_eta_l_form(pkg: PerversePackage, i: int, j: int) -> Matrix:
    return double_form(pkg.S, pkg.decomposition, i, j)


def decomposition_check(pkg: PerversePackage) -> Report:
    dec, table = eta_L_decomposition(pkg)
    rep = double_forms_check(pkg.S, dec)
    rep.name = "decomposition"
    betti = [0] * len(pkg.space.dims)
    placed_ok = True
    for (i, j), q in dec.pieces.items():
        l, b = piece_location(pkg, i, j)
        if not 0 <= l <= 2 * pkg.n or pkg.perverse.gr_dim(l, b) != q.dim:
            placed_ok = False
            continue
        betti[l] += q.dim
    rep.add(Check("placement", placed_ok, "piece (i, j) has the dimension of H^{n-i-j}_{-i}"))
    rep.add(Check("betti", betti == pkg.betti(), "piece dimensions add up to the Betti numbers"))
    rep.data["biprimitives"] = table
    return rep


def hrr_check(pkg: PerversePackage) -> Report:
    """Orthogonality of the (eta, L)-decomposition and polarization of each summand (up to sign)."""
    rep = decomposition_check(pkg)
    rep.name = "hrr"
    dec = pkg.decomposition
    n = pkg.n
    if pkg.weil is None:
        rep.notices.append("no Weil data: hrr reduced to nondegeneracy and orthogonality")
        return rep
    C = pkg.weil.total()
    for (i, j) in sorted(dec.pieces):
        q = dec.pieces[(i, j)]
        Gij = double_form(pkg.S, dec, i, j)
        Cq = q.projection @ C @ q.section
        for (ip, jp), U in dec.summands[(i, j)]:
            name = f"polarization[{i},{j}][{ip},{jp}]"
            try:
                Csub = restrict_operator(Cq, U.basis)
            except HodgeSubstructureError as exc:
                rep.add(Check(name, False, str(exc)))
                continue
            G = U.basis.T @ Gij @ U.basis
            chk = polarization_check(G, Csub, n - i - j, polarization_sign(n, i, j, ip, jp), name)
            if chk.witness is not None:
                chk.witness = (q.section @ U.basis @ Matrix.column(chk.witness)).col(0)
            rep.add(chk)
    rep.add(_lambda_zero_polarization(pkg))
    return rep


def _lambda_zero_polarization(pkg: PerversePackage) -> Check:
    """Lambda_0 = Lambda / (Lambda ∩ H^n_{<=-1}) is polarized by (-1)^n S."""
    n = pkg.n
    Lam = lambda_subspace(pkg)
    low = meet(Lam, pkg.perverse.at(n, -1))
    q = quotient_map(Lam, low)
    Cn = pkg.weil.blocks[n]
    try:
        restrict_operator(Cn, Lam.basis)
    except HodgeSubstructureError as exc:
        return Check("lambda0_polarization", False, str(exc))
    Cq = q.projection @ Cn @ q.section
    G = q.section.T @ pkg.middle_form() @ q.section
    chk = polarization_check(G, Cq, n, _sign(n), "lambda0_polarization")
    chk.data["gram"] = G
    return chk


def lambda_subspace(pkg: PerversePackage) -> Subspace:
    """Ker L_0 ∩ ⋂_{i>=1} (eta^i Ker L^i_{2i})^⊥ inside H^n."""
    n, sp = pkg.n, pkg.space
    G = pkg.middle_form()
    out = kernel(pkg.L.block(n))
    for i in range(1, n + 1):
        src = n - 2 * i
        if src < 0 or not sp.dim(src):
            continue
        K = kernel(pkg.L.power(i, src))
        V = apply(pkg.eta.power(i, src), K)
        out = meet(out, perp(V, G))
    return out


def lambda_space(pkg: PerversePackage) -> tuple[Subspace, Report]:
    require_valid(pkg)
    n, sp = pkg.n, pkg.space
    rep = Report("lambda")
    Lam = lambda_subspace(pkg)
    G = pkg.middle_form()
    expected = sp.dim(n) - sp.dim(n - 2)
    rep.add(Check("dimension", Lam.dim == expected, f"dim Λ = {Lam.dim}, b_n - b_(n-2) = {expected}"))
    K0 = kernel(pkg.L.block(n))
    rep.add(Check("in_kernel", Lam <= K0, "Λ ⊆ Ker L ∩ H^n"))
    if n >= 1 and sp.dim(n - 2):
        EK = apply(pkg.eta.block(n - 2), kernel(pkg.L.block(n - 2)))
    else:
        EK = Subspace.zero(sp.dim(n))
    direct = Lam.dim + EK.dim == K0.dim and join(Lam, EK) == K0
    rep.add(Check("decomposition", direct, "Ker L_0 = Λ ⊕ η Ker L_2"))
    cross = Lam.basis.T @ G @ EK.basis
    loc = cross.first_nonzero()
    rep.add(
        Check(
            "orthogonal",
            loc is None,
            "Λ ⊥ η Ker L_2 under S",
            witness=None if loc is None else [Lam.basis.col(loc[0]), EK.basis.col(loc[1])],
        )
    )
    rep.add(Check("perversity", Lam <= pkg.perverse.at(n, 0), "Λ ⊆ H^n_{<=0}"))
    if pkg.weil is not None:
        stable = apply(pkg.weil.blocks[n], Lam) <= Lam
        rep.add(Check("weil_stable", stable, "Λ is stable under the Weil operator"))
    rep.data["dim"] = Lam.dim
    rep.data["basis"] = Lam
    return Lam, rep


def defect(table: Sequence, n: int) -> int:
    """r = max over strata of 2i + dim Y^i - n."""
    table = list(table or [])
    if not table:
        raise InputError("defect table is empty")
    for i, d in table:
        if i < 0 or d < 0:
            raise InputError("defect table entries must be non-negative")
    r = max(2 * i + d - n for i, d in table)
    if r < 0:
        raise InputError(f"defect table gives a negative defect {r}")
    return r


# fibers


def _fiber_data(pkg: PerversePackage, fiber: FiberRecord, b: int):
    n = pkg.n
    l = n + b
    if b not in fiber.class_maps or b not in fiber.restriction_maps or b not in fiber.homology_filtration:
        raise InvalidFiberError(f"fiber {fiber.label} has no data at b = {b}")
    cl, res = fiber.class_maps[b], fiber.restriction_maps[b]
    F = fiber.homology_filtration[b]
    dl = pkg.space.dim(l)
    if cl.rows != dl or res.cols != dl or F.ambient_dim != cl.cols:
        raise InvalidFiberError(f"fiber {fiber.label} maps at b = {b} do not match dim H^{l} = {dl}")
    pf = pkg.perverse
    lo = min(F.lo, pf.steps[l].lo if l in pf.steps else 0) - 1
    hi = max(F.hi, pf.steps[l].hi if l in pf.steps else 0) + 1
    if not F.is_increasing():
        raise InvalidFiberError(f"fiber {fiber.label}: homology filtration at b = {b} is not increasing")
    if not F.at(b).is_full():
        raise InvalidFiberError(
            f"fiber {fiber.label}: homology filtration at level {b} is not everything",
            witness={"fiber": fiber.label, "b": b, "level": b},
        )
    imcl = image(cl)
    for a in range(lo, hi + 1):
        if apply(cl, F.at(a)) != meet(imcl, pf.at(l, a)):
            raise InvalidFiberError(
                f"fiber {fiber.label}: class map at b = {b} is not strict at level {a}",
                witness={"fiber": fiber.label, "b": b, "level": a},
            )
    return l, cl, res, F, range(lo, hi + 1)


def _graded_refined(pkg, fiber, b):
    l, cl, res, F, levels = _fiber_data(pkg, fiber, b)
    pf = pkg.perverse
    I = res @ cl
    c = res.rows
    Gfil = {a: apply(res, pf.at(l, a)) for a in range(levels.start - 1, levels.stop)}
    blocks, sections = {}, {}
    for a in levels:
        qF = quotient_map(F.at(a), F.at(a - 1))
        qG = quotient_map(Gfil[a], Gfil[a - 1])
        blocks[a] = qG.projection @ I @ qF.section
        sections[a] = qF.section
    return I, Gfil, blocks, sections


def _degeneracy_witness(D: Matrix, section: Matrix) -> dict:
    """A fiber class killed by the graded form, or a covector missed by it."""
    K = kernel(D)
    if K.dim:
        return {"fiber_class": list((section @ K.basis).col(0))}
    return {"cokernel": list(kernel(D.T).basis.col(0))}


def _is_iso(D: Matrix) -> bool:
    return D.is_square() and (D.rows == 0 or D.is_invertible())


def refined_intersection_analysis(pkg: PerversePackage, fiber: FiberRecord, b: int) -> Report:
    """I_b = res_b ∘ cl_b, zero off the diagonal level and invertible on it."""
    rep = Report(f"rif[{fiber.label},{b}]")
    I, Gfil, blocks, sections = _graded_refined(pkg, fiber, b)
    off = [a for a, B in blocks.items() if a != b and not B.is_zero()]
    rep.add(Check("off_diagonal", not off, "graded refined form vanishes for a ≠ b", witness=off or None))
    D = blocks.get(b, Matrix.zeros(0, 0))
    iso = _is_iso(D)
    rep.add(
        Check(
            "diagonal",
            iso,
            f"graded refined form at a = b is an isomorphism ({D.rows}x{D.cols})",
            witness=None if iso else _degeneracy_witness(D, sections[b]),
        )
    )
    rep.add(Check("low_vanishing", Gfil[b - 1].is_zero(), "H^{n+b}_{<=b-1}(fiber) = 0"))
    rep.data["I"] = I
    rep.data["graded"] = {a: B for a, B in sorted(blocks.items()) if B.rows or B.cols}
    return rep


def grauert_check(pkg: PerversePackage, fiber: FiberRecord, b: int) -> Report:
    rep = Report(f"grauert[{fiber.label},{b}]")
    l, cl, res, F, _ = _fiber_data(pkg, fiber, b)
    pf = pkg.perverse
    qF = quotient_map(F.at(b), F.at(b - 1))
    graded_cl = pf.gr(l, b).projection @ cl @ qF.section
    inj = graded_cl.rank() == graded_cl.cols
    rep.add(Check("injective", inj, "graded class map at a = b is injective"))
    img = apply(cl, F.at(b))
    if l + 2 <= 2 * pkg.n:
        inker = apply(pkg.L.block(l), img) <= pf.at(l + 2, b - 1)
    else:
        inker = True
    rep.add(Check("kernel_L", inker, "L kills the image in H^{n+b+2}_b"))
    dec = pkg.decomposition
    key = (-b, 0)
    q = dec.pieces.get(key)
    if qF.dim == 0 or q is None:
        rep.add(Check("nondegenerate", qF.dim == 0, "restricted S^{ηL}_{-b,0} is nondegenerate"))
        return rep
    X = q.projection @ pkg.space.inclusion(l) @ cl @ qF.section
    Gq = double_form(pkg.S, dec, *key)
    R = X.T @ Gq @ X
    rep.add(Check("nondegenerate", R.is_invertible(), "restricted S^{ηL}_{-b,0} is nondegenerate", data={"gram": R}))
    if pkg.weil is not None:
        C = pkg.weil.total()
        Cq = q.projection @ C @ q.section
        imgq = Subspace(q.dim, X)
        for (ip, jp), U in dec.summands[key]:
            K = meet(imgq, U)
            if K.is_zero():
                continue
            name = f"polarization[{ip},{jp}]"
            try:
                Csub = restrict_operator(Cq, K.basis)
            except HodgeSubstructureError as exc:
                rep.add(Check(name, False, str(exc)))
                continue
            G = K.basis.T @ Gq @ K.basis
            rep.add(polarization_check(G, Csub, pkg.n + b, polarization_sign(pkg.n, -b, 0, ip, jp), name))
    return rep


def semismall_signature(pkg: PerversePackage, fiber: FiberRecord) -> Report:
    """(-1)^h I > 0 for the intersection form of a fiber of a semismall map."""
    r = defect(pkg.defect_table, pkg.n)
    if r != 0:
        raise NotSemismallError(f"defect of semismallness is {r}, not 0")
    if fiber.codim_h is None:
        raise InvalidFiberError(f"fiber {fiber.label} has no codim_h")
    rep = Report(f"signature[{fiber.label}]")
    _fiber_data(pkg, fiber, 0)
    I = fiber.restriction_maps[0] @ fiber.class_maps[0]
    h = fiber.codim_h
    P = I.scale(_sign(h))
    if not P.is_square():
        rep.add(Check("positive", False, "intersection form is not square"))
        return rep
    sym = P.is_symmetric()
    inertia = signature(P) if sym else None
    ok = sym and inertia.positive == P.rows
    rep.add(
        Check(
            "positive",
            ok,
            f"(-1)^{h} I has inertia {tuple(inertia) if inertia else 'n/a (not symmetric)'}",
            witness=None if ok else I,
            data={"I": I, "h": h},
        )
    )
    return rep


def splitting_report(pkg: PerversePackage, fiber: FiberRecord, b: int) -> Report:
    rep = Report(f"splitting[{fiber.label},{b}]")
    _, _, blocks, sections = _graded_refined(pkg, fiber, b)
    F = fiber.homology_filtration[b]
    D = blocks.get(b, Matrix.zeros(0, 0))
    splits = _is_iso(D)
    rank = F.at(b).dim - F.at(b - 1).dim
    rep.add(
        Check(
            "splits",
            splits,
            f"graded refined form at a = b {'is' if splits else 'is not'} an isomorphism",
            witness=None if splits else _degeneracy_witness(D, sections[b]),
        )
    )
    rep.data["skyscraper_rank"] = rank
    return rep
