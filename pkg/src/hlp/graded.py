"""Graded spaces H* = H^0 + ... + H^{2n}, degree-shifting operators and forms.

Everything is flattened into one total space, degree-ascending; the
offsets of :class:`GradedSpace` fix that bijection for all other modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import AmbientMismatchError, InputError, SingularFormError, SymmetryError
from .exact import Matrix, Subspace, block_diag, join
from .reports import Check


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


class GradedSpace:
    """Dimensions of H^l for l = 0..2n."""

    def __init__(self, n: int, dims: Sequence[int]):
        if n < 0:
            raise InputError("n must be non-negative")
        dims = tuple(int(d) for d in dims)
        if len(dims) != 2 * n + 1:
            raise InputError(f"expected {2 * n + 1} degree dimensions, got {len(dims)}")
        if any(d < 0 for d in dims):
            raise InputError("dimensions must be non-negative")
        self.n = n
        self.dims = dims
        offs, acc = [], 0
        for d in dims:
            offs.append(acc)
            acc += d
        self.offsets = tuple(offs)
        self.total_dim = acc

    @property
    def degrees(self) -> range:
        return range(2 * self.n + 1)

    def dim(self, l: int) -> int:
        return self.dims[l] if 0 <= l <= 2 * self.n else 0

    def indices(self, l: int) -> range:
        if not 0 <= l <= 2 * self.n:
            return range(0)
        return range(self.offsets[l], self.offsets[l] + self.dims[l])

    def degree_of(self, index: int) -> int:
        for l in self.degrees:
            if index in self.indices(l):
                return l
        raise IndexError(index)

    def inclusion(self, l: int) -> Matrix:
        """Total x dims[l] matrix embedding H^l."""
        d = self.dim(l)
        rows = [[0] * d for _ in range(self.total_dim)]
        for k, idx in enumerate(self.indices(l)):
            rows[idx][k] = 1
        return Matrix(rows, cols=d)

    def degree_subspace(self, l: int) -> Subspace:
        return Subspace(self.total_dim, self.inclusion(l))

    def degrees_at_least(self, l: int) -> Subspace:
        """The span of all H^m with m >= l."""
        vecs = [self.inclusion(m) for m in self.degrees if m >= l]
        out = Subspace.zero(self.total_dim)
        for v in vecs:
            out = join(out, Subspace(self.total_dim, v))
        return out

    def restrict(self, U: Subspace, l: int) -> Subspace:
        """Coordinates (inside H^l) of U ∩ H^l, assuming U is degree-homogeneous."""
        from .exact import meet

        V = meet(U, self.degree_subspace(l))
        return Subspace(self.dim(l), V.basis.take(list(self.indices(l))))

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedSpace) and (self.n, self.dims) == (other.n, other.dims)

    def __hash__(self) -> int:
        return hash((self.n, self.dims))

    def __repr__(self) -> str:
        return f"GradedSpace(n={self.n}, dims={list(self.dims)})"


class GradedOperator:
    """An operator of fixed degree ``shift``; ``blocks[l]`` maps H^l to H^{l+shift}."""

    def __init__(self, space: GradedSpace, shift: int, blocks: Mapping[int, Matrix] | None = None):
        self.space = space
        self.shift = shift
        clean: dict[int, Matrix] = {}
        for l, B in (blocks or {}).items():
            l = int(l)
            src, dst = space.dim(l), space.dim(l + shift)
            if not 0 <= l <= 2 * space.n:
                raise AmbientMismatchError(f"block at degree {l} is outside 0..{2 * space.n}")
            if B.shape != (dst, src):
                raise AmbientMismatchError(
                    f"block at degree {l} has shape {B.shape}, expected {(dst, src)}"
                )
            if not 0 <= l + shift <= 2 * space.n and not B.is_zero():
                raise AmbientMismatchError(f"block at degree {l} maps outside the graded range")
            clean[l] = B
        self.blocks = clean
        self._total = None

    def block(self, l: int) -> Matrix:
        B = self.blocks.get(l)
        if B is None:
            return Matrix.zeros(self.space.dim(l + self.shift), self.space.dim(l))
        return B

    def total(self) -> Matrix:
        if self._total is None:
            N = self.space.total_dim
            rows = [[0] * N for _ in range(N)]
            for l, B in self.blocks.items():
                dst = self.space.indices(l + self.shift)
                src = self.space.indices(l)
                for a, r in enumerate(dst):
                    for b, c in enumerate(src):
                        rows[r][c] = B[a, b]
            self._total = Matrix(rows, cols=N)
        return self._total

    @classmethod
    def from_total(cls, space: GradedSpace, T: Matrix, shift: int) -> "GradedOperator":
        blocks = {}
        for l in space.degrees:
            if space.dim(l) and space.dim(l + shift):
                blocks[l] = T.take(list(space.indices(l + shift)), list(space.indices(l)))
        return cls(space, shift, blocks)

    def power(self, k: int, l: int) -> Matrix:
        """The block of T^k on H^l."""
        M = Matrix.identity(self.space.dim(l))
        for s in range(k):
            M = self.block(l + s * self.shift) @ M
        return M

    def __repr__(self) -> str:
        return f"GradedOperator(shift={self.shift}, degrees={sorted(self.blocks)})"


def total_matrix(N: GradedOperator | Matrix) -> Matrix:
    return N.total() if isinstance(N, GradedOperator) else N


def commutator_check(M: GradedOperator | Matrix, N: GradedOperator | Matrix, name: str = "commutation") -> Check:
    A, B = total_matrix(M), total_matrix(N)
    C = A @ B - B @ A
    loc = C.first_nonzero()
    if loc is None:
        return Check(name, True, "operators commute")
    return Check(name, False, f"MN - NM has nonzero entry at {loc}", witness=list(loc))


@dataclass
class PoincarePairing:
    """Blocks phi_l : H^l x H^{2n-l} -> Q for l <= n; the rest follow by graded symmetry."""

    space: GradedSpace
    blocks: dict = field(default_factory=dict)

    def phi(self, l: int) -> Matrix:
        n = self.space.n
        if l <= n:
            B = self.blocks.get(l)
            if B is None:
                return Matrix.zeros(self.space.dim(l), self.space.dim(2 * n - l))
            return B
        return self.phi(2 * n - l).T.scale(_sign(l))

    def validate(self) -> None:
        sp, n = self.space, self.space.n
        for l in range(n + 1):
            a, b = sp.dim(l), sp.dim(2 * n - l)
            B = self.phi(l)
            if B.shape != (a, b):
                raise AmbientMismatchError(f"pairing block {l} has shape {B.shape}, expected {(a, b)}")
            if a != b or not B.is_invertible():
                raise SingularFormError(f"pairing block at degree {l} is degenerate")
        if n in self.blocks or sp.dim(n):
            B = self.phi(n)
            if B.T.scale(_sign(n)) != B:
                raise SymmetryError(f"middle pairing block must satisfy phi = (-1)^{n} phi^T")


@dataclass
class TwistedForm:
    space: GradedSpace
    gram: Matrix

    def block(self, l: int) -> Matrix:
        """The part pairing H^l with H^{2n-l}."""
        sp = self.space
        return self.gram.take(list(sp.indices(l)), list(sp.indices(2 * sp.n - l)))


def twisted_form(pairing: PoincarePairing) -> TwistedForm:
    """Rescale each phi_l by (-1)^{l(l-1)/2} and assemble on the total space."""
    pairing.validate()
    sp = pairing.space
    N = sp.total_dim
    rows = [[0] * N for _ in range(N)]
    for l in sp.degrees:
        B = pairing.phi(l)
        s = _sign(l * (l - 1) // 2)
        for a, r in enumerate(sp.indices(l)):
            for b, c in enumerate(sp.indices(2 * sp.n - l)):
                rows[r][c] = s * B[a, b]
    return TwistedForm(sp, Matrix(rows, cols=N))


def check_infinitesimal_automorphism(
    S: TwistedForm | Matrix, N: GradedOperator | Matrix, name: str = "infinitesimal_automorphism"
) -> Check:
    """S(Na, b) + S(a, Nb) = 0 for all basis vectors a, b."""
    G = S.gram if isinstance(S, TwistedForm) else S
    T = total_matrix(N)
    D = T.T @ G + G @ T
    loc = D.first_nonzero()
    if loc is None:
        return Check(name, True, "S(Na,b) + S(a,Nb) = 0")
    return Check(
        name,
        False,
        f"S(Na,b) + S(a,Nb) = {D[loc]} for basis pair {loc}",
        witness=list(loc),
    )


class Filtration:
    """Increasing chain of subspaces F_lo <= ... <= F_hi of Q^ambient_dim.

    Below ``lo`` the filtration is zero; above ``hi`` it equals F_hi.
    """

    def __init__(self, ambient_dim: int, lo: int, steps: Sequence[Subspace]):
        self.ambient_dim = ambient_dim
        self.lo = lo
        self.steps = tuple(steps)
        for s in self.steps:
            if s.ambient_dim != ambient_dim:
                raise AmbientMismatchError("filtration step in the wrong ambient space")

    @property
    def hi(self) -> int:
        return self.lo + len(self.steps) - 1

    def at(self, i: int) -> Subspace:
        if not self.steps or i < self.lo:
            return Subspace.zero(self.ambient_dim)
        if i > self.hi:
            return self.steps[-1]
        return self.steps[i - self.lo]

    __getitem__ = at

    def indices(self) -> range:
        return range(self.lo, self.hi + 1)

    def is_increasing(self) -> bool:
        return all(self.at(i - 1) <= self.at(i) for i in self.indices())

    def is_exhaustive(self) -> bool:
        return not self.steps and self.ambient_dim == 0 or bool(self.steps) and self.steps[-1].is_full()

    def graded_dims(self) -> dict[int, int]:
        return {i: self.at(i).dim - self.at(i - 1).dim for i in self.indices()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Filtration) or other.ambient_dim != self.ambient_dim:
            return NotImplemented
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        return all(self.at(i) == other.at(i) for i in range(lo - 1, hi + 2))

    def __repr__(self) -> str:
        return f"Filtration(lo={self.lo}, dims={[s.dim for s in self.steps]})"


def degree_filtration(space: GradedSpace) -> Filtration:
    """W^deg_i = sum of H^l with l >= n - i."""
    n = space.n
    steps = [space.degrees_at_least(n - i) for i in range(-n, n + 1)]
    return Filtration(space.total_dim, -n, steps)


def direct_sum_space(*spaces: GradedSpace) -> GradedSpace:
    n = spaces[0].n
    return GradedSpace(n, [sum(s.dims[l] for s in spaces) for l in range(2 * n + 1)])


def weil_total(space: GradedSpace, blocks: Mapping[int, Matrix]) -> Matrix:
    return block_diag(*[blocks.get(l, Matrix.identity(space.dim(l))) for l in space.degrees])
