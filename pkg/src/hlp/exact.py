"""Exact rational matrices and the lattice of subspaces of Q^n.

Scalars are :class:`fractions.Fraction`.  Subspaces are stored by their
reduced column-echelon basis, which is unique, so ``==`` on
:class:`Subspace` decides equality of subspaces.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .errors import (
    AmbientMismatchError,
    InclusionError,
    SingularFormError,
    SymmetryError,
)

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` (or a JSON integer) into a Fraction."""
    if isinstance(text, bool):
        raise ValueError(f"not a rational literal: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str) or not _RATIONAL.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    if "/" in text and int(text.split("/")[1]) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(text)


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        raise TypeError("floating point entries are not allowed")
    return Fraction(x)


def _all_fractions(values) -> bool:
    return all(type(x) is Fraction for x in values)


def _rref_rows(rows: list[list[Fraction]], ncols: int) -> list[int]:
    """In-place reduced row echelon form; returns the pivot columns."""
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        piv = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        prow = rows[r]
        inv = 1 / prow[c]
        if inv != 1:
            for k in range(c, ncols):
                if prow[k]:
                    prow[k] *= inv
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f:
                    row = rows[i]
                    for k in range(c, ncols):
                        if prow[k]:
                            row[k] -= f * prow[k]
        pivots.append(c)
        r += 1
    return pivots


class Matrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("rows", "cols", "_data", "_hash")

    def __init__(self, data: Iterable[Iterable] = (), cols: int | None = None):
        rows = tuple(tuple(_frac(x) for x in row) for row in data)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != cols:
                raise ValueError("ragged matrix data")
        self._data = rows
        self.rows = len(rows)
        self.cols = cols
        self._hash = None

    @classmethod
    def _wrap(cls, rows: tuple, nrows: int, ncols: int) -> "Matrix":
        m = object.__new__(cls)
        m._data = rows
        m.rows = nrows
        m.cols = ncols
        m._hash = None
        return m

    # constructors

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls._wrap(tuple((ZERO,) * cols for _ in range(rows)), rows, cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._wrap(
            tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n, n
        )

    @classmethod
    def diag(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        vals = [_frac(x) for x in entries]
        return cls._wrap(
            tuple(tuple(vals[i] if i == j else ZERO for j in range(n)) for i in range(n)), n, n
        )

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "Matrix":
        columns = [c if _all_fractions(c) else tuple(_frac(x) for x in c) for c in columns]
        for c in columns:
            if len(c) != nrows:
                raise ValueError("column length mismatch")
        if not columns:
            return cls.zeros(nrows, 0)
        return cls._wrap(tuple(zip(*columns)), nrows, len(columns))

    @classmethod
    def column(cls, vector: Sequence) -> "Matrix":
        return cls.from_columns([vector], len(vector))

    # access

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, key):
        i, j = key
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._data)

    def columns(self) -> list[tuple]:
        if not self.rows:
            return [() for _ in range(self.cols)]
        return list(zip(*self._data))

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def to_strings(self) -> list[list[str]]:
        return [[format_rational(x) for x in r] for r in self._data]

    def take(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "Matrix":
        rows = range(self.rows) if rows is None else rows
        cols = range(self.cols) if cols is None else list(cols)
        return Matrix._wrap(tuple(tuple(self._data[i][j] for j in cols) for i in rows), len(rows), len(cols))

    # arithmetic

    def _check_same(self, other: "Matrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix._wrap(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)),
            self.rows,
            self.cols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix._wrap(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)),
            self.rows,
            self.cols,
        )

    def __neg__(self) -> "Matrix":
        return Matrix._wrap(tuple(tuple(-a for a in r) for r in self._data), self.rows, self.cols)

    def scale(self, c) -> "Matrix":
        c = _frac(c)
        return Matrix._wrap(tuple(tuple(c * a for a in r) for r in self._data), self.rows, self.cols)

    def __mul__(self, c) -> "Matrix":
        if isinstance(c, Matrix):
            return self @ c
        return self.scale(c)

    __rmul__ = scale

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        # row-by-row accumulation skips the zeros that dominate our operators
        orows = [[(j, b) for j, b in enumerate(r) if b] for r in other._data]
        ncols = other.cols
        out = []
        for r in self._data:
            acc = [ZERO] * ncols
            for k, a in enumerate(r):
                if a:
                    for j, b in orows[k]:
                        acc[j] += a * b
            out.append(tuple(acc))
        return Matrix._wrap(tuple(out), self.rows, ncols)

    def apply(self, vector: Sequence) -> tuple:
        return tuple(sum((a * _frac(v) for a, v in zip(r, vector) if a), ZERO) for r in self._data)

    def __pow__(self, k: int) -> "Matrix":
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        if k < 0:
            return self.inverse() ** (-k)
        result = Matrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    @property
    def T(self) -> "Matrix":
        if self.rows == 0:
            return Matrix._wrap(tuple(() for _ in range(self.cols)), self.cols, 0)
        if self.cols == 0:
            return Matrix._wrap((), 0, self.rows)
        return Matrix._wrap(tuple(zip(*self._data)), self.cols, self.rows)

    def kron(self, other: "Matrix") -> "Matrix":
        rows = []
        for r in self._data:
            for s in other._data:
                rows.append(tuple(a * b for a in r for b in s))
        return Matrix._wrap(tuple(rows), self.rows * other.rows, self.cols * other.cols)

    # comparisons

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._data))
        return self._hash

    def __repr__(self) -> str:
        return f"Matrix({self.to_strings()!r}, cols={self.cols})"

    def is_zero(self) -> bool:
        return all(a == 0 for r in self._data for a in r)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and self == self.T

    def first_nonzero(self) -> tuple[int, int] | None:
        for i, r in enumerate(self._data):
            for j, a in enumerate(r):
                if a:
                    return (i, j)
        return None

    # elimination

    def rref(self) -> tuple["Matrix", list[int]]:
        rows = [list(r) for r in self._data]
        pivots = _rref_rows(rows, self.cols)
        return Matrix._wrap(tuple(tuple(r) for r in rows), self.rows, self.cols), pivots

    def rank(self) -> int:
        if self.rows > self.cols:
            return self.T.rank()
        rows = [list(r) for r in self._data]
        return len(_rref_rows(rows, self.cols))

    def is_invertible(self) -> bool:
        return self.is_square() and self.rank() == self.rows

    def inverse(self) -> "Matrix":
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        rows = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(self._data)]
        pivots = _rref_rows(rows, 2 * n)
        if pivots[:n] != list(range(n)):
            raise SingularFormError("matrix is singular")
        return Matrix._wrap(tuple(tuple(r[n:]) for r in rows), n, n)

    def solve(self, rhs: "Matrix") -> "Matrix":
        """Return X with self @ X == rhs; raises ValueError if inconsistent."""
        if rhs.rows != self.rows:
            raise ValueError("right-hand side has wrong number of rows")
        n, k = self.cols, rhs.cols
        rows = [list(r) + list(s) for r, s in zip(self._data, rhs._data)]
        pivots = _rref_rows(rows, n + k)
        if any(p >= n for p in pivots):
            raise ValueError("inconsistent linear system")
        sol = [[ZERO] * k for _ in range(n)]
        for r, p in enumerate(pivots):
            sol[p] = rows[r][n:]
        return Matrix._wrap(tuple(tuple(r) for r in sol), n, k)


def hstack(*mats: Matrix, rows: int | None = None) -> Matrix:
    if not mats:
        return Matrix.zeros(rows or 0, 0)
    nrows = mats[0].rows
    for m in mats:
        if m.rows != nrows:
            raise ValueError("hstack row mismatch")
    return Matrix._wrap(
        tuple(tuple(x for m in mats for x in m.row(i)) for i in range(nrows)),
        nrows,
        sum(m.cols for m in mats),
    )


def vstack(*mats: Matrix, cols: int | None = None) -> Matrix:
    if not mats:
        return Matrix.zeros(0, cols or 0)
    ncols = mats[0].cols
    for m in mats:
        if m.cols != ncols:
            raise ValueError("vstack column mismatch")
    return Matrix._wrap(tuple(r for m in mats for r in m._data), sum(m.rows for m in mats), ncols)


def block_diag(*mats: Matrix) -> Matrix:
    n = sum(m.rows for m in mats)
    c = sum(m.cols for m in mats)
    out = [[ZERO] * c for _ in range(n)]
    r0 = c0 = 0
    for m in mats:
        for i in range(m.rows):
            for j in range(m.cols):
                out[r0 + i][c0 + j] = m[i, j]
        r0 += m.rows
        c0 += m.cols
    return Matrix._wrap(tuple(tuple(r) for r in out), n, c)


class Subspace:
    """A subspace of Q^ambient_dim in canonical (reduced column-echelon) form."""

    __slots__ = ("ambient_dim", "basis", "pivots", "_hash")

    def __init__(self, ambient_dim: int, generators: Matrix | None = None):
        self.ambient_dim = ambient_dim
        self._hash = None
        if generators is None or generators.cols == 0:
            self.basis = Matrix.zeros(ambient_dim, 0)
            self.pivots = ()
            return
        if generators.rows != ambient_dim:
            raise AmbientMismatchError(
                f"generators live in Q^{generators.rows}, expected Q^{ambient_dim}"
            )
        rows = [list(c) for c in generators.columns()]
        pivots = _rref_rows(rows, ambient_dim)
        self.pivots = tuple(pivots)
        self.basis = Matrix.from_columns(rows[: len(pivots)], ambient_dim)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, Matrix.identity(n))

    @classmethod
    def span(cls, vectors: Sequence[Sequence], n: int) -> "Subspace":
        return cls(n, Matrix.from_columns(vectors, n))

    @property
    def dim(self) -> int:
        return self.basis.cols

    def is_zero(self) -> bool:
        return self.dim == 0

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def coordinates(self, v: Sequence) -> tuple | None:
        """Coordinates of v in ``basis``, or None when v is not in the subspace."""
        v = tuple(v) if _all_fractions(v) else tuple(_frac(x) for x in v)
        coeffs = tuple(v[p] for p in self.pivots)
        nz = [(k, c) for k, c in enumerate(coeffs) if c]
        pivots = set(self.pivots)
        for i, (row, x) in enumerate(zip(self.basis._data, v)):
            if i in pivots:  # pivot rows of the echelon basis are unit rows
                continue
            acc = ZERO
            for k, c in nz:
                b = row[k]
                if b:
                    acc += c * b
            if acc != x:
                return None
        return coeffs

    def contains(self, v: Sequence) -> bool:
        return self.coordinates(v) is not None

    def _check(self, other: "Subspace"):
        if self.ambient_dim != other.ambient_dim:
            raise AmbientMismatchError(
                f"ambient dimensions differ: {self.ambient_dim} vs {other.ambient_dim}"
            )

    def __le__(self, other: "Subspace") -> bool:
        self._check(other)
        return all(other.contains(c) for c in self.basis.columns())

    def __ge__(self, other: "Subspace") -> bool:
        return other <= self

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ambient_dim, self.basis))
        return self._hash

    def __and__(self, other: "Subspace") -> "Subspace":
        return meet(self, other)

    def __add__(self, other: "Subspace") -> "Subspace":
        return join(self, other)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}/{self.ambient_dim}, basis={self.basis.T.to_strings()})"


def kernel(M: Matrix) -> Subspace:
    """{v : Mv = 0}."""
    rows = [list(r) for r in M.tolist()]
    pivots = _rref_rows(rows, M.cols)
    free = [c for c in range(M.cols) if c not in set(pivots)]
    vecs = []
    for f in free:
        v = [ZERO] * M.cols
        v[f] = ONE
        for r, p in enumerate(pivots):
            v[p] = -rows[r][f]
        vecs.append(v)
    return Subspace(M.cols, Matrix.from_columns(vecs, M.cols) if vecs else None)


def image(M: Matrix) -> Subspace:
    """Column space of M."""
    return Subspace(M.rows, M)


def apply(M: Matrix, U: Subspace) -> Subspace:
    """The image M(U)."""
    if M.cols != U.ambient_dim:
        raise AmbientMismatchError("operator and subspace dimensions differ")
    return Subspace(M.rows, M @ U.basis)


def preimage(M: Matrix, U: Subspace) -> Subspace:
    """{v : Mv in U}."""
    if M.rows != U.ambient_dim:
        raise AmbientMismatchError("operator and subspace dimensions differ")
    K = kernel(hstack(M, -U.basis))
    return Subspace(M.cols, K.basis.take(range(M.cols)))


def join(U: Subspace, V: Subspace) -> Subspace:
    U._check(V)
    return Subspace(U.ambient_dim, hstack(U.basis, V.basis))


def meet(U: Subspace, V: Subspace) -> Subspace:
    U._check(V)
    if U.is_zero() or V.is_zero():
        return Subspace.zero(U.ambient_dim)
    if V.is_full() or U <= V:
        return U
    if U.is_full() or V <= U:
        return V
    # Ux + Vy = 0 puts Ux in V as well
    K = kernel(hstack(U.basis, V.basis))
    return Subspace(U.ambient_dim, U.basis @ K.basis.take(range(U.dim)))


def join_all(spaces: Iterable[Subspace], n: int) -> Subspace:
    mats = [s.basis for s in spaces]
    return Subspace(n, hstack(*mats, rows=n)) if mats else Subspace.zero(n)


def meet_all(spaces: Iterable[Subspace], n: int) -> Subspace:
    out = Subspace.full(n)
    for s in spaces:
        out = meet(out, s)
    return out


def perp(U: Subspace, G: Matrix) -> Subspace:
    """{v : G(u, v) = 0 for all u in U} for a nondegenerate form G."""
    if G.shape != (U.ambient_dim, U.ambient_dim):
        raise AmbientMismatchError("form size does not match the ambient dimension")
    if not G.is_invertible():
        raise SingularFormError("perp requires a nondegenerate form")
    return kernel(U.basis.T @ G)


class Inertia(NamedTuple):
    positive: int
    negative: int
    null: int


def congruence_diagonalize(G: Matrix) -> tuple[Matrix, list[Fraction]]:
    """Return (P, d) with P^T G P = diag(d) and P invertible.

    Symmetric Gaussian elimination with simultaneous row/column pivoting.
    A block whose diagonal vanishes but has a nonzero entry G[i][j] is
    handled by the substitution e_i -> e_i + e_j, which turns the
    hyperbolic 2x2 block into one with nonzero diagonal 2 G[i][j].
    """
    if not G.is_symmetric():
        raise SymmetryError("form is not symmetric")
    n = G.rows
    A = [list(r) for r in G.tolist()]
    P = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]

    def swap(i, j):
        if i == j:
            return
        A[i], A[j] = A[j], A[i]
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in P:
            r[i], r[j] = r[j], r[i]

    def add(dst, src, f):
        # e_dst <- e_dst + f e_src
        for r in A:
            r[dst] += f * r[src]
        for k in range(n):
            A[dst][k] += f * A[src][k]
        for r in P:
            r[dst] += f * r[src]

    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if A[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            add(i, j, ONE)
            piv = i
        swap(k, piv)
        p = A[k][k]
        for r in range(k + 1, n):
            if A[r][k]:
                add(r, k, -A[r][k] / p)
    return Matrix(P), [A[i][i] for i in range(n)]


def signature(G: Matrix) -> Inertia:
    """Inertia (positive, negative, null) of a symmetric rational form."""
    _, d = congruence_diagonalize(G)
    return Inertia(sum(1 for x in d if x > 0), sum(1 for x in d if x < 0), sum(1 for x in d if x == 0))


def is_positive_definite(G: Matrix) -> bool:
    s = signature(G)
    return s.positive == G.rows


class Quotient(NamedTuple):
    """V/U in explicit coordinates.

    ``section`` (ambient x q) lifts a basis of V/U into V; ``projection``
    (q x ambient) sends v in V to its coordinates in V/U.  Outside V the
    projection is meaningless.
    """

    projection: Matrix
    section: Matrix

    @property
    def dim(self) -> int:
        return self.section.cols

    def coords(self, M: Matrix) -> Matrix:
        return self.projection @ M


def extend_basis(U: Subspace, V: Subspace) -> Matrix:
    """Columns of V's canonical basis that extend a basis of U to one of V."""
    chosen = []
    cur = U
    for c in V.basis.columns():
        if not cur.contains(c):
            chosen.append(c)
            cur = join(cur, Subspace.span([c], V.ambient_dim))
    return Matrix.from_columns(chosen, V.ambient_dim)


def left_inverse(B: Matrix) -> Matrix:
    """A matrix L with L @ B == I for B of full column rank."""
    _, rows = B.T.rref()
    if len(rows) != B.cols:
        raise ValueError("matrix does not have full column rank")
    inv = B.take(rows).inverse()
    out = [[ZERO] * B.rows for _ in range(B.cols)]
    for k, r in enumerate(rows):
        for i in range(B.cols):
            out[i][r] = inv[i, k]
    return Matrix(out, cols=B.rows)


def quotient_map(V: Subspace, U: Subspace) -> Quotient:
    if not U <= V:
        raise InclusionError("quotient_map requires U to be contained in V")
    n = V.ambient_dim
    section = extend_basis(U, V)
    full = hstack(U.basis, section)
    if full.cols == 0:
        return Quotient(Matrix.zeros(0, n), Matrix.zeros(n, 0))
    L = left_inverse(full)
    return Quotient(L.take(range(U.dim, full.cols)), section)
