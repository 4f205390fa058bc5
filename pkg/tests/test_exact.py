from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hlp.errors import AmbientMismatchError, InclusionError, SingularFormError, SymmetryError
from hlp.exact import (
    Matrix,
    Subspace,
    congruence_diagonalize,
    format_rational,
    image,
    join,
    kernel,
    meet,
    parse_rational,
    perp,
    quotient_map,
    signature,
)


def span(*vecs, n=None):
    n = n if n is not None else len(vecs[0])
    return Subspace.span(vecs, n) if vecs else Subspace.zero(n)


# -- worked examples ------------------------------------------------------------


def test_kernel_examples():
    assert kernel(Matrix([[0, 1], [0, 0]])) == span((1, 0))
    assert kernel(Matrix.identity(3)).is_zero()
    assert kernel(Matrix([[1, 1], [2, 2]])) == span((1, -1))


def test_image_examples():
    assert image(Matrix([[0, 1], [0, 0]])) == span((1, 0))
    assert image(Matrix.zeros(2, 2)).is_zero()
    assert image(Matrix([[1, 1], [2, 2]])) == span((1, 2))


def test_meet_join_examples():
    e1, e2 = (1, 0), (0, 1)
    assert meet(span(e1, e2), span((1, 1))) == span((1, 1))
    assert join(span(e1), span(e2)) == Subspace.full(2)
    assert meet(span((1, 0, 1), (0, 1, 0)), span((1, 1, 1))) == span((1, 1, 1))


def test_meet_rejects_mismatched_ambients():
    with pytest.raises(AmbientMismatchError):
        meet(Subspace.full(2), Subspace.full(3))
    with pytest.raises(AmbientMismatchError):
        join(Subspace.full(2), Subspace.zero(3))


def test_perp_examples():
    G = Matrix([[0, 1], [1, 0]])
    assert perp(span((1, 0)), G) == span((1, 0))
    assert perp(Subspace.zero(2), G).is_full()
    assert perp(Subspace.full(2), G).is_zero()


def test_perp_degenerate_form():
    with pytest.raises(SingularFormError):
        perp(span((1, 0)), Matrix([[1, 0], [0, 0]]))


def test_signature_examples():
    assert signature(Matrix.diag([2, -3])) == (1, 1, 0)
    assert signature(Matrix([[0, 1], [1, 0]])) == (1, 1, 0)
    assert signature(Matrix.zeros(2, 2)) == (0, 0, 2)


def test_signature_needs_symmetry():
    with pytest.raises(SymmetryError):
        signature(Matrix([[0, 1], [0, 0]]))


def test_quotient_examples():
    q = quotient_map(Subspace.full(2), span((1, 0)))
    assert q.dim == 1 and q.section == Matrix([[0], [1]])
    assert quotient_map(span((1, 0)), span((1, 0))).dim == 0
    V = span((1, 0, 0), (1, 1, 0))
    U = span((1, 0, 0))
    q = quotient_map(V, U)
    assert q.dim == 1
    # the section is e1 + e2 up to U
    assert join(U, Subspace(3, q.section)) == join(U, span((1, 1, 0)))
    assert q.projection @ q.section == Matrix.identity(1)
    assert (q.projection @ U.basis).is_zero()


def test_quotient_needs_inclusion():
    with pytest.raises(InclusionError):
        quotient_map(span((1, 0)), span((0, 1)))


def test_rational_literals():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational("-7") == -7
    assert parse_rational(4) == 4
    assert format_rational(Fraction(-2, 4)) == "-1/2"
    for bad in ("1.5", "1/0", "", "a", True, 2.0):
        with pytest.raises(ValueError):
            parse_rational(bad)


def test_no_floats():
    with pytest.raises(TypeError):
        Matrix([[0.5]])


def test_inverse_and_solve():
    A = Matrix([[1, 2], [3, 4]])
    assert A @ A.inverse() == Matrix.identity(2)
    X = A.solve(Matrix([[5], [6]]))
    assert A @ X == Matrix([[5], [6]])
    with pytest.raises(SingularFormError):
        Matrix([[1, 1], [1, 1]]).inverse()


def test_empty_shapes():
    Z = Matrix.zeros(0, 3)
    assert Z.T.shape == (3, 0)
    assert kernel(Z).is_full()
    assert image(Z).ambient_dim == 0


# -- properties ---------------------------------------------------------------

entries = st.integers(min_value=-4, max_value=4)


@st.composite
def matrices(draw, max_rows=6, max_cols=6):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return Matrix([[draw(entries) for _ in range(c)] for _ in range(r)], cols=c)


@st.composite
def subspace_pairs(draw):
    n = draw(st.integers(1, 6))
    a = draw(st.integers(0, n + 1))
    b = draw(st.integers(0, n + 1))
    U = Matrix([[draw(entries) for _ in range(a)] for _ in range(n)], cols=a)
    V = Matrix([[draw(entries) for _ in range(b)] for _ in range(n)], cols=b)
    return Subspace(n, U), Subspace(n, V)


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_rank_nullity(M):
    assert kernel(M).dim + M.rank() == M.cols
    assert (M @ kernel(M).basis).is_zero()


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_kernel_matches_sympy(M):
    ref = sympy.Matrix(M.tolist()).nullspace()
    assert kernel(M).dim == len(ref)
    for v in ref:
        assert kernel(M).contains([Fraction(int(x.p), int(x.q)) for x in v])


@settings(max_examples=80, deadline=None)
@given(subspace_pairs())
def test_modular_law(pair):
    U, V = pair
    assert U.dim + V.dim == meet(U, V).dim + join(U, V).dim
    assert meet(U, V) <= U and U <= join(U, V)


@settings(max_examples=60, deadline=None)
@given(subspace_pairs(), st.integers(1, 3))
def test_canonical_form(pair, k):
    U, V = pair
    # different generators of the same spaces give identical results
    U2 = Subspace(U.ambient_dim, U.basis.scale(k) if U.dim else None)
    extra = join(V, V)
    assert meet(U2, extra) == meet(U, V)
    assert join(U2, extra) == join(U, V)
    G = Matrix.identity(U.ambient_dim)
    assert perp(U2, G) == perp(U, G)
    assert perp(U, G).dim == U.ambient_dim - U.dim


@st.composite
def symmetric_and_invertible(draw):
    n = draw(st.integers(1, 5))
    A = [[draw(entries) for _ in range(n)] for _ in range(n)]
    G = Matrix([[A[i][j] if i <= j else A[j][i] for j in range(n)] for i in range(n)], cols=n)
    P = Matrix([[draw(entries) for _ in range(n)] for _ in range(n)], cols=n)
    return G, P


@settings(max_examples=80, deadline=None)
@given(symmetric_and_invertible())
def test_sylvester_law(data):
    G, P = data
    if not P.is_invertible():
        return
    assert signature(P.T @ G @ P) == signature(G)


@settings(max_examples=60, deadline=None)
@given(symmetric_and_invertible())
def test_congruence_witness(data):
    G, _ = data
    P, d = congruence_diagonalize(G)
    assert P.is_invertible()
    assert P.T @ G @ P == Matrix.diag(d)
    charpoly = sympy.Matrix(G.tolist()).charpoly()
    pos = sum(1 for r in sympy.real_roots(charpoly.as_expr(), multiple=True) if r > 0)
    assert signature(G).positive == pos


@settings(max_examples=60, deadline=None)
@given(subspace_pairs())
def test_quotient_sections(pair):
    U, V = pair
    W = join(U, V)
    q = quotient_map(W, U)
    assert q.dim == W.dim - U.dim
    assert q.projection @ q.section == Matrix.identity(q.dim)
    assert (q.projection @ U.basis).is_zero()
