"""Weight filtrations of nilpotent operators and Lefschetz decompositions.

All graded pieces Gr_i = W_i / W_{i-1} are handled through explicit
quotient coordinates (``Quotient.projection``) and lifted representatives
(``Quotient.section``), so every induced operator or form is a plain
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import HodgeSubstructureError, NilpotencyError, RelativeWeightError
from .exact import (
    Matrix,
    Quotient,
    Subspace,
    apply,
    block_diag,
    congruence_diagonalize,
    extend_basis,
    hstack,
    image,
    join,
    join_all,
    kernel,
    meet,
    perp,
    quotient_map,
    signature,
)
from .graded import Filtration, GradedOperator, GradedSpace, TwistedForm, total_matrix
from .reports import Check, Report


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def nilpotency_order(T: Matrix) -> int:
    """Smallest d >= 1 with T^d = 0; raises NilpotencyError otherwise."""
    if not T.is_square():
        raise NilpotencyError("operator is not square")
    n = T.rows
    P = T
    for d in range(1, n + 2):
        if P.is_zero():
            return d
        P = P @ T
    raise NilpotencyError("operator is not nilpotent")


class WeightFiltration:
    """The weight filtration W of a nilpotent N, with its graded pieces."""

    def __init__(self, N: Matrix, filtration: Filtration, order: int):
        self.N = N
        self.filtration = filtration
        self.order = order
        self._gr: dict[int, Quotient] = {}
        self._powers: dict[int, Matrix] = {0: Matrix.identity(N.rows), 1: N}

    def power(self, k: int) -> Matrix:
        """N^k, cached; it vanishes from k = order on."""
        if k >= self.order:
            return Matrix.zeros(self.dim, self.dim)
        if k not in self._powers:
            self._powers[k] = self.power(k - 1) @ self.N
        return self._powers[k]

    @property
    def dim(self) -> int:
        return self.N.rows

    @property
    def width(self) -> int:
        """Largest |i| with Gr_i possibly nonzero."""
        return self.order - 1

    def indices(self) -> range:
        return range(-self.width, self.width + 1)

    def at(self, i: int) -> Subspace:
        return self.filtration.at(i)

    __getitem__ = at

    def gr(self, i: int) -> Quotient:
        if i not in self._gr:
            self._gr[i] = quotient_map(self.at(i), self.at(i - 1))
        return self._gr[i]

    def gr_dim(self, i: int) -> int:
        return self.at(i).dim - self.at(i - 1).dim

    def gr_dims(self) -> dict[int, int]:
        return {i: self.gr_dim(i) for i in self.indices()}

    def induced(self, T: Matrix, src: int, dst: int) -> Matrix:
        """Matrix of T : Gr_src -> Gr_dst in quotient coordinates."""
        return self.gr(dst).projection @ T @ self.gr(src).section

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightFiltration):
            return NotImplemented
        return self.filtration == other.filtration

    def __repr__(self) -> str:
        return f"WeightFiltration(gr_dims={self.gr_dims()})"


def weight_filtration(N: GradedOperator | Matrix) -> WeightFiltration:
    """W_k = sum over i + j = k of Ker N^{i+1} ∩ Im N^{-j}."""
    T = total_matrix(N)
    d = nilpotency_order(T)
    n = T.rows
    powers = [Matrix.identity(n)]
    for _ in range(d):
        powers.append(powers[-1] @ T)
    kers = [kernel(P) for P in powers]
    ims = [image(P) for P in powers]

    def im_power(m: int) -> Subspace:
        if m <= 0:
            return Subspace.full(n)
        return ims[m] if m <= d else Subspace.zero(n)

    steps = []
    for k in range(-(d - 1), d):
        parts = [meet(kers[i + 1], im_power(i - k)) for i in range(d)]
        steps.append(join_all(parts, n))
    return WeightFiltration(T, Filtration(n, -(d - 1), steps), d)


def jordan_chains(N: GradedOperator | Matrix) -> list[list[tuple]]:
    """Jordan chains [v, Nv, ..., N^{s-1}v] forming a basis, longest first."""
    T = total_matrix(N)
    d = nilpotency_order(T)
    n = T.rows
    K = [kernel(T**s) for s in range(d + 1)] + [Subspace.full(n)]
    chains = []
    for s in range(d, 0, -1):
        below = join(K[s - 1], apply(T, K[s + 1]))
        tops = extend_basis(below, K[s])
        for v in tops.columns():
            chain = [v]
            for _ in range(s - 1):
                chain.append(T.apply(chain[-1]))
            chains.append(chain)
    return chains


def jordan_weight_oracle(N: GradedOperator | Matrix) -> WeightFiltration:
    """Weight filtration read off a Jordan basis: N^t v in a size-s chain has weight s-1-2t."""
    T = total_matrix(N)
    d = nilpotency_order(T)
    n = T.rows
    weighted = [(len(c) - 1 - 2 * t, v) for c in jordan_chains(T) for t, v in enumerate(c)]
    steps = []
    for k in range(-(d - 1), d):
        vecs = [v for w, v in weighted if w <= k]
        steps.append(Subspace.span(vecs, n) if vecs else Subspace.zero(n))
    return WeightFiltration(T, Filtration(n, -(d - 1), steps), d)


def check_weight_filtration(W: WeightFiltration) -> Report:
    """N W_i ⊆ W_{i-2} and N^i : Gr_i -> Gr_{-i} bijective for i >= 0."""
    rep = Report("weight_filtration")
    T = W.N
    bad = None
    for i in W.indices():
        img = apply(T, W.at(i))
        if not img <= W.at(i - 2):
            bad = i
            break
    rep.add(
        Check("shift", bad is None, "N W_i ⊆ W_{i-2}" if bad is None else f"N W_{bad} ⊄ W_{bad - 2}", witness=bad)
    )
    bad = None
    for i in range(0, W.width + 1):
        A = W.induced(W.power(i), i, -i)
        if not (A.is_square() and A.rank() == A.rows):
            bad = i
            break
    rep.add(
        Check(
            "hard_lefschetz",
            bad is None,
            "N^i : Gr_i ≅ Gr_{-i}" if bad is None else f"N^{bad} : Gr_{bad} -> Gr_{-bad} is not bijective",
            witness=bad,
        )
    )
    top = W.at(W.width)
    rep.add(Check("exhaustive", top.is_full() and W.at(-W.width - 1).is_zero(), "filtration runs from 0 to H"))
    return rep


@dataclass
class LefschetzDecomposition:
    """Primitive parts P^{-i} ⊆ Gr_i and the summands N^k P^{-m} of each Gr_i.

    Subspaces live in the quotient coordinates of the relevant Gr_i.
    """

    weight: WeightFiltration
    primitive: dict[int, Subspace]
    summands: dict[int, list[tuple[int, Subspace]]]

    def primitive_dims(self) -> dict[int, int]:
        return {i: P.dim for i, P in self.primitive.items()}

    def lifted(self, i: int, U: Subspace) -> Matrix:
        return self.weight.gr(i).section @ U.basis

    def is_direct(self) -> bool:
        for i, parts in self.summands.items():
            dim = self.weight.gr_dim(i)
            if sum(U.dim for _, U in parts) != dim:
                return False
            if join_all([U for _, U in parts], dim).dim != dim:
                return False
        return True


def lefschetz_decomposition(W: WeightFiltration) -> LefschetzDecomposition:
    T = W.N
    prim: dict[int, Subspace] = {}
    for i in range(0, W.width + 1):
        prim[i] = kernel(W.induced(W.power(i + 1), i, -i - 2))
    summands: dict[int, list[tuple[int, Subspace]]] = {}
    for i in W.indices():
        parts = []
        for m in range(abs(i), W.width + 1, 2):
            k = (m - i) // 2
            A = W.induced(W.power(k), m, i)
            parts.append((m, Subspace(W.gr_dim(i), A @ prim[m].basis)))
        summands[i] = parts
    return LefschetzDecomposition(W, prim, summands)


def _gram(S: TwistedForm | Matrix) -> Matrix:
    return S.gram if isinstance(S, TwistedForm) else S


def induced_form(S: TwistedForm | Matrix, W: WeightFiltration, i: int) -> Matrix:
    """Gram matrix of S^N_i on Gr_i in the section basis.

    For i >= 0 it is S(a, N^i b); for i < 0 the form is the one making
    N^{|i|} : Gr_{|i|} -> Gr_i an isometry.
    """
    G = _gram(S)
    T = W.N
    if i >= 0:
        sec = W.gr(i).section
        return sec.T @ G @ W.power(i) @ sec
    k = -i
    A = W.induced(W.power(k), k, i)
    Ainv = A.inverse()
    return Ainv.T @ induced_form(G, W, k) @ Ainv


def selfduality_check(S: TwistedForm | Matrix, W: WeightFiltration) -> Check:
    """perp(W_i) = W_{-i-1} for every i."""
    G = _gram(S)
    for i in range(-W.width - 1, W.width + 1):
        if perp(W.at(i), G) != W.at(-i - 1):
            return Check("selfduality", False, f"W_{i}^⊥ ≠ W_{-i - 1}", witness=i)
    return Check("selfduality", True, "W_i^⊥ = W_{-i-1} for all i")


def induced_forms_check(S: TwistedForm | Matrix, W: WeightFiltration) -> Report:
    """Nondegeneracy of every S^N_i and orthogonality of the Lefschetz summands."""
    rep = Report("induced_forms")
    dec = lefschetz_decomposition(W)
    bad_nd, bad_orth = None, None
    for i in W.indices():
        Gi = induced_form(S, W, i)
        if Gi.rows and not Gi.is_invertible():
            bad_nd = bad_nd if bad_nd is not None else i
        parts = dec.summands[i]
        for a in range(len(parts)):
            for b in range(len(parts)):
                if a != b:
                    X = parts[a][1].basis.T @ Gi @ parts[b][1].basis
                    if not X.is_zero() and bad_orth is None:
                        bad_orth = (i, parts[a][0], parts[b][0])
    rep.add(Check("nondegenerate", bad_nd is None, "every S^N_i is nondegenerate", witness=bad_nd))
    rep.add(Check("orthogonal", bad_orth is None, "Lefschetz summands are S^N_i-orthogonal", witness=bad_orth))
    rep.add(Check("direct", dec.is_direct(), "Gr_i is the direct sum of its Lefschetz summands"))
    return rep


# relative weight filtrations and double decompositions


def relative_weight_check(
    M: GradedOperator | Matrix, N: GradedOperator | Matrix, S: TwistedForm | Matrix | None = None
) -> Report:
    """On every Gr^N_j the filtration induced by W^M, shifted by j, is the weight filtration of M."""
    A, B = total_matrix(M), total_matrix(N)
    return _relative_weight(A, B, weight_filtration(A), weight_filtration(B))


def _relative_weight(A: Matrix, B: Matrix, WM: WeightFiltration, WN: WeightFiltration) -> Report:
    rep = Report("relative_weight")
    stable = all(apply(A, WN.at(j)) <= WN.at(j) for j in WN.indices())
    rep.add(Check("preserves", stable, "M preserves W^N"))
    if not stable:
        return rep
    bad = None
    for j in WN.indices():
        Q = WN.gr(j)
        if Q.dim == 0:
            continue
        Mj = Q.projection @ A @ Q.section
        Wj = weight_filtration(Mj)
        lo = min(WM.filtration.lo, -Wj.width) - abs(j) - 1
        hi = max(WM.filtration.hi, Wj.width) + abs(j) + 1
        for k in range(lo, hi + 1):
            induced = Subspace(Q.dim, Q.projection @ meet(WM.at(k + j), WN.at(j)).basis)
            if induced != Wj.at(k):
                bad = (j, k)
                break
        if bad:
            break
    rep.add(
        Check(
            "relative",
            bad is None,
            "M^i : Gr^M_{j+i} Gr^N_j ≅ Gr^M_{j-i} Gr^N_j for all i, j"
            if bad is None
            else f"on Gr^N_{bad[0]} the induced M-filtration differs at step {bad[1]}",
            witness=list(bad) if bad else None,
        )
    )
    return rep


@dataclass
class DoubleDecomposition:
    """Bigraded pieces Gr^M_{j+i} Gr^N_j, biprimitives and summands, keyed by (i, j)."""

    M: Matrix
    N: Matrix
    WM: WeightFiltration
    WN: WeightFiltration
    pieces: dict[tuple[int, int], Quotient]
    biprimitives: dict[tuple[int, int], Subspace]
    summands: dict[tuple[int, int], list[tuple[tuple[int, int], Subspace]]]

    def piece_dim(self, i: int, j: int) -> int:
        q = self.pieces.get((i, j))
        return q.dim if q else 0

    def induced(self, T: Matrix, src: tuple[int, int], dst: tuple[int, int]) -> Matrix:
        qs, qd = self.pieces.get(src), self.pieces.get(dst)
        if qs is None or qd is None:
            return Matrix.zeros(qd.dim if qd else 0, qs.dim if qs else 0)
        return qd.projection @ T @ qs.section

    def transport(self, src: tuple[int, int], dst: tuple[int, int]) -> Matrix:
        """Induced M^p N^q from src to dst with p, q >= 0 read from the index change."""
        p = (src[0] - dst[0]) // 2
        q = (src[1] - dst[1]) // 2
        return self.induced(self.WM.power(p) @ self.WN.power(q), src, dst)

    def biprimitive_dims(self) -> dict[tuple[int, int], int]:
        return {k: U.dim for k, U in sorted(self.biprimitives.items()) if U.dim}

    def is_direct(self) -> bool:
        for key, parts in self.summands.items():
            dim = self.piece_dim(*key)
            if sum(U.dim for _, U in parts) != dim:
                return False
            if join_all([U for _, U in parts], dim).dim != dim:
                return False
        return True


def double_decomposition(
    M: GradedOperator | Matrix, N: GradedOperator | Matrix, S: TwistedForm | Matrix | None = None
) -> DoubleDecomposition:
    A, B = total_matrix(M), total_matrix(N)
    WM, WN = weight_filtration(A), weight_filtration(B)
    rep = _relative_weight(A, B, WM, WN)
    if not rep.passed:
        raise RelativeWeightError("the relative weight condition fails", report=rep)
    pieces: dict[tuple[int, int], Quotient] = {}
    for j in WN.indices():
        for i in range(-WM.width - WN.width, WM.width + WN.width + 1):
            k = j + i
            V = meet(WM.at(k), WN.at(j))
            U = join(meet(WM.at(k - 1), WN.at(j)), meet(WM.at(k), WN.at(j - 1)))
            if V.dim > U.dim:
                pieces[(i, j)] = quotient_map(V, U)
    dec = DoubleDecomposition(A, B, WM, WN, pieces, {}, {})
    for (i, j), q in pieces.items():
        if i >= 0 and j >= 0:
            Km = dec.induced(WM.power(i + 1), (i, j), (-i - 2, j))
            Kn = dec.induced(WN.power(j + 1), (i, j), (i, -j - 2))
            stacked = Matrix(Km.tolist() + Kn.tolist(), cols=q.dim)
            dec.biprimitives[(i, j)] = kernel(stacked)
    for (i, j), q in pieces.items():
        parts = []
        for (ip, jp), P in sorted(dec.biprimitives.items()):
            if P.dim == 0 or ip < abs(i) or jp < abs(j) or (ip - i) % 2 or (jp - j) % 2:
                continue
            X = dec.transport((ip, jp), (i, j)) @ P.basis
            parts.append(((ip, jp), Subspace(q.dim, X)))
        dec.summands[(i, j)] = parts
    return dec


def double_form(S: TwistedForm | Matrix, dec: DoubleDecomposition, i: int, j: int) -> Matrix:
    """Gram matrix of S^{MN}_{ij} on the piece (i, j).

    For i, j >= 0 it is S(a, M^i N^j b); negative indices are defined by
    requiring the transport from (|i|, |j|) to be an isometry.
    """
    G = _gram(S)
    q = dec.pieces.get((i, j))
    if q is None:
        return Matrix.zeros(0, 0)
    if i >= 0 and j >= 0:
        return q.section.T @ G @ dec.WM.power(i) @ dec.WN.power(j) @ q.section
    src = (abs(i), abs(j))
    A = dec.transport(src, (i, j))
    Ainv = A.inverse()
    return Ainv.T @ double_form(G, dec, *src) @ Ainv


def double_forms_check(S: TwistedForm | Matrix, dec: DoubleDecomposition) -> Report:
    rep = Report("double_forms")
    bad_nd = bad_orth = None
    for key in sorted(dec.pieces):
        Gij = double_form(S, dec, *key)
        if not Gij.is_invertible() and bad_nd is None:
            bad_nd = key
        parts = dec.summands[key]
        for a in range(len(parts)):
            for b in range(len(parts)):
                if a != b and bad_orth is None:
                    X = parts[a][1].basis.T @ Gij @ parts[b][1].basis
                    if not X.is_zero():
                        bad_orth = [list(key), list(parts[a][0]), list(parts[b][0])]
    rep.add(Check("nondegenerate", bad_nd is None, "every S^{MN}_{ij} is nondegenerate", witness=bad_nd and list(bad_nd)))
    rep.add(Check("orthogonal", bad_orth is None, "double Lefschetz summands are S^{MN}_{ij}-orthogonal", witness=bad_orth))
    rep.add(Check("direct", dec.is_direct(), "each piece is the direct sum of its summands"))
    return rep


# Weil operators and polarizations


@dataclass
class WeilOperator:
    """Blocks C_l : H^l -> H^l with C_l^2 = (-1)^l."""

    space: GradedSpace
    blocks: dict = field(default_factory=dict)

    def total(self) -> Matrix:
        return block_diag(*[self.blocks[l] for l in self.space.degrees])


def weil_check(C: WeilOperator, operators: Mapping[str, GradedOperator | Matrix]) -> Report:
    rep = Report("weil")
    sp = C.space
    missing = [l for l in sp.degrees if l not in C.blocks]
    rep.add(Check("blocks", not missing, "a block for every degree", witness=missing or None))
    if missing:
        return rep
    bad = None
    for l in sp.degrees:
        B = C.blocks[l]
        if B.shape != (sp.dim(l), sp.dim(l)) or B @ B != Matrix.identity(sp.dim(l)).scale(_sign(l)):
            bad = l
            break
    rep.add(Check("square", bad is None, "C_l^2 = (-1)^l", witness=bad))
    if bad is not None:
        return rep
    T = C.total()
    for name, op in operators.items():
        X = total_matrix(op)
        D = T @ X - X @ T
        loc = D.first_nonzero()
        rep.add(Check(f"commutes_{name}", loc is None, f"C commutes with {name}", witness=list(loc) if loc else None))
    return rep


def restrict_operator(T: Matrix, B: Matrix) -> Matrix:
    """Matrix of T on the column span of B; raises if that span is not T-stable."""
    if B.cols == 0:
        return Matrix.zeros(0, 0)
    try:
        return B.solve(T @ B)
    except ValueError:
        raise HodgeSubstructureError("subspace is not stable under the Weil operator") from None


def polarization_check(G: Matrix, C: Matrix, weight: int, sign: int, name: str = "polarization") -> Check:
    """sign * G(x, Cy) must be symmetric and positive definite."""
    if G.rows == 0:
        return Check(name, True, "empty subspace")
    if C @ C != Matrix.identity(C.rows).scale(_sign(weight)):
        return Check(name, False, f"C^2 ≠ (-1)^{weight} on the subspace")
    P = (G @ C).scale(sign)
    if not P.is_symmetric():
        loc = (P - P.T).first_nonzero()
        return Check(name, False, "G(x, Cy) is not symmetric", witness=list(loc))
    inertia = signature(P)
    ok = inertia.positive == P.rows
    witness = None
    if not ok:
        Pm, d = congruence_diagonalize(P)
        k = next(t for t, x in enumerate(d) if x <= 0)
        witness = list(Pm.col(k))
    return Check(
        name,
        ok,
        f"{'+' if sign > 0 else '-'}G(x,Cy) has inertia {tuple(inertia)}",
        witness=witness,
        data={"inertia": list(inertia)},
    )


def polarization_sign(n: int, i: int, j: int, ip: int, jp: int) -> int:
    """Sign for the summand generated by the biprimitive at (ip, jp) inside the piece (i, j)."""
    return _sign(n - ip - jp + (ip - abs(i)) // 2 + (jp - abs(j)) // 2)
