import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlp.corpus import (
    build_projective_space,
    build_sl2sl2,
    jordan_block,
    random_invertible,
    string_form,
)
from hlp.errors import HodgeSubstructureError, NilpotencyError, RelativeWeightError
from hlp.exact import Matrix, Subspace, block_diag
from hlp.graded import Filtration
from hlp.lefschetz import (
    WeightFiltration,
    check_weight_filtration,
    double_decomposition,
    double_form,
    double_forms_check,
    induced_form,
    induced_forms_check,
    jordan_chains,
    jordan_weight_oracle,
    lefschetz_decomposition,
    nilpotency_order,
    polarization_check,
    polarization_sign,
    relative_weight_check,
    restrict_operator,
    selfduality_check,
    weight_filtration,
    weil_check,
)


def span(*vecs):
    return Subspace.span(vecs, len(vecs[0]))


# N e_{k+1} = e_k, the convention of the worked examples
def shift_down(size: int) -> Matrix:
    return jordan_block(size).T


J2 = shift_down(2)
SKEW = Matrix([[0, 1], [-1, 0]])


# weight filtrations


def test_zero_operator():
    W = weight_filtration(Matrix.zeros(3, 3))
    assert W.at(-1).is_zero()
    assert W.at(0).is_full()
    assert W == jordan_weight_oracle(Matrix.zeros(3, 3))


def test_single_block_of_size_three():
    W = weight_filtration(shift_down(3))
    e1, e12 = span((1, 0, 0)), span((1, 0, 0), (0, 1, 0))
    assert W.at(-3).is_zero()
    assert W.at(-2) == W.at(-1) == e1
    assert W.at(0) == W.at(1) == e12
    assert W.at(2).is_full()
    assert W == jordan_weight_oracle(shift_down(3))


def test_block_of_size_two_plus_zero():
    N = block_diag(J2, Matrix.zeros(1, 1))
    W = weight_filtration(N)
    assert W.at(-1) == span((1, 0, 0))
    assert W.at(0) == span((1, 0, 0), (0, 0, 1))
    assert W.at(1).is_full()
    assert W == jordan_weight_oracle(N)


def test_non_nilpotent_rejected():
    with pytest.raises(NilpotencyError):
        weight_filtration(Matrix.identity(2))
    assert nilpotency_order(shift_down(4)) == 4


def test_jordan_chains_form_a_basis():
    rng = random.Random(5)
    P = random_invertible(rng, 5)
    N = P @ block_diag(jordan_block(3), jordan_block(2)) @ P.inverse()
    chains = jordan_chains(N)
    assert sorted(len(c) for c in chains) == [2, 3]
    vecs = [v for c in chains for v in c]
    assert Subspace.span(vecs, 5).is_full()
    for c in chains:
        assert not any(N.apply(c[-1]))


@st.composite
def nilpotents(draw):
    shape = draw(st.lists(st.integers(1, 4), min_size=1, max_size=3))
    n = sum(shape)
    seed = draw(st.integers(0, 10**6))
    P = random_invertible(random.Random(seed), n, spread=2)
    J = block_diag(*[jordan_block(s) for s in shape])
    return P @ J @ P.inverse(), shape


@settings(max_examples=40, deadline=None)
@given(nilpotents())
def test_weight_filtration_properties(data):
    N, shape = data
    W = weight_filtration(N)
    assert check_weight_filtration(W).passed
    assert W == jordan_weight_oracle(N)
    assert W.width == max(shape) - 1
    assert W.gr_dims() == {i: W.gr_dim(-i) for i in W.gr_dims()}  # symmetric


# Lefschetz decomposition


def test_decomposition_single_string():
    W = weight_filtration(shift_down(3))
    dec = lefschetz_decomposition(W)
    assert dec.primitive_dims() == {0: 0, 1: 0, 2: 1}
    assert dec.is_direct()
    # Gr_0 = N P^{-2} and Gr_{-2} = N^2 P^{-2}
    assert [m for m, U in dec.summands[0] if U.dim] == [2]
    assert [m for m, U in dec.summands[-2] if U.dim] == [2]


def test_decomposition_zero_operator():
    dec = lefschetz_decomposition(weight_filtration(Matrix.zeros(3, 3)))
    assert dec.primitive_dims() == {0: 3}


def test_decomposition_two_strings():
    dec = lefschetz_decomposition(weight_filtration(block_diag(J2, J2)))
    assert dec.primitive_dims() == {0: 0, 1: 2}
    assert dec.is_direct()


# induced forms


def test_induced_form_skew_example():
    W = weight_filtration(J2)
    assert induced_form(SKEW, W, 1) == Matrix([[-1]])
    assert induced_form(SKEW, W, -1).shape == (1, 1)


def test_induced_form_zero_operator():
    G = Matrix([[2, 1], [1, 3]])
    W = weight_filtration(Matrix.zeros(2, 2))
    assert induced_form(G, W, 0) == G


def test_induced_form_projective_plane():
    pkg, _ = build_projective_space(2)
    W = weight_filtration(pkg.eta)
    assert induced_form(pkg.S, W, 2) == Matrix([[1]])
    assert induced_forms_check(pkg.S, W).passed


def test_selfduality_examples():
    W0 = weight_filtration(Matrix.zeros(2, 2))
    assert selfduality_check(Matrix.identity(2), W0).passed
    W = weight_filtration(J2)
    assert selfduality_check(SKEW, W).passed
    f = W.filtration
    shifted = WeightFiltration(J2, Filtration(f.ambient_dim, f.lo + 1, f.steps), W.order)
    chk = selfduality_check(SKEW, shifted)
    assert not chk.passed and chk.witness is not None


def test_random_modules_have_nondegenerate_forms():
    rng = random.Random(11)
    for _ in range(10):
        sizes = [rng.choice([1, 3]) for _ in range(rng.randint(1, 3))]
        N = block_diag(*[jordan_block(s + 1) for s in sizes])
        G = block_diag(*[string_form(s) for s in sizes])
        W = weight_filtration(N)
        assert selfduality_check(G, W).passed
        assert induced_forms_check(G, W).passed


# relative weight filtrations


def test_relative_weight_examples():
    I2 = Matrix.identity(2)
    M = jordan_block(2).kron(I2) + I2.kron(jordan_block(2))
    N = I2.kron(jordan_block(2))
    assert relative_weight_check(M, N).passed
    assert relative_weight_check(Matrix.zeros(2, 2), Matrix.zeros(2, 2)).passed
    assert relative_weight_check(J2, J2).passed


def test_relative_weight_failures():
    # M = J (x) 1 alone does not have the convolved weight filtration
    I2 = Matrix.identity(2)
    assert not relative_weight_check(jordan_block(2).kron(I2), I2.kron(jordan_block(2))).passed
    rep = relative_weight_check(Matrix.zeros(2, 2), J2)
    assert not rep.passed
    with pytest.raises(RelativeWeightError) as exc:
        double_decomposition(Matrix.zeros(2, 2), J2)
    assert exc.value.report is not None


# double decompositions


def test_double_decomposition_tensor_square():
    M, N, G, expected = build_sl2sl2({(1, 1): 1})
    dec = double_decomposition(M, N, G)
    assert dec.biprimitive_dims() == {(1, 1): 1} == expected
    assert dec.is_direct()
    F = double_form(G, dec, 1, 1)
    assert F.shape == (1, 1) and not F.is_zero()
    assert double_forms_check(G, dec).passed


def test_double_decomposition_zero_operators():
    Z = Matrix.zeros(3, 3)
    G = Matrix.diag([1, 2, 3])
    dec = double_decomposition(Z, Z, G)
    assert dec.biprimitive_dims() == {(0, 0): 3}
    assert double_form(G, dec, 0, 0) == G


@pytest.mark.parametrize(
    "mults",
    [{(0, 0): 3}, {(2, 0): 1, (0, 1): 1}, {(1, 2): 2, (3, 0): 1}, {(2, 2): 1, (1, 1): 1, (0, 0): 2}],
)
def test_double_decomposition_recovers_multiplicities(mults):
    M, N, G, expected = build_sl2sl2(mults)
    dec = double_decomposition(M, N, G)
    assert dec.biprimitive_dims() == expected
    assert double_forms_check(G, dec).passed


# Weil operators and polarizations


def test_polarization_examples():
    assert polarization_check(Matrix([[1]]), Matrix([[1]]), 0, 1).passed
    chk = polarization_check(Matrix([[-1]]), Matrix([[1]]), 0, 1)
    assert not chk.passed and chk.witness == [1]
    assert polarization_check(Matrix([[-1]]), Matrix([[1]]), 0, -1).passed
    assert not polarization_check(Matrix([[1]]), Matrix([[1]]), 1, 1).passed  # C^2 must be -1
    assert polarization_check(Matrix.zeros(0, 0), Matrix.zeros(0, 0), 3, 1).passed


def test_polarization_on_projective_plane():
    pkg, _ = build_projective_space(2)
    W = weight_filtration(pkg.eta)
    G = induced_form(pkg.S, W, 2)
    assert polarization_check(G, Matrix([[1]]), 0, 1).passed


@pytest.mark.parametrize(
    "args, sign",
    [
        # exponent n - i' - j' + (i' - |i|)/2 + (j' - |j|)/2
        ((2, 0, 0, 0, 0), 1),
        ((2, 0, 0, 0, 2), -1),
        ((3, 0, 0, 0, 0), -1),
        ((2, 0, 0, 2, 0), -1),
        ((2, 0, 1, 0, 1), -1),
        ((2, -2, 0, 2, 0), 1),
        ((4, 1, 1, 3, 1), -1),
    ],
)
def test_polarization_sign(args, sign):
    assert polarization_sign(*args) == sign


def test_polarization_sign_matches_classical_primitives():
    # for P^2 with eta = L the classical rule is: l = 0 primitive positive, eta-image in H^2 negative twisted
    from hlp.perverse import hrr_check

    pkg, _ = build_projective_space(2)
    rep = hrr_check(pkg)
    assert rep.passed
    assert any(c.name.startswith("polarization") for c in rep.checks)


def test_weil_check():
    pkg, _ = build_projective_space(2)
    assert weil_check(pkg.weil, {"eta": pkg.eta, "L": pkg.L}).passed
    from hlp.lefschetz import WeilOperator

    bad = WeilOperator(pkg.space, {**pkg.weil.blocks, 2: Matrix([[2]])})
    rep = weil_check(bad, {"eta": pkg.eta})
    assert not rep.passed and rep.first_failure().witness == 2


def test_restrict_operator():
    C = Matrix([[0, -1], [1, 0]])
    assert restrict_operator(C, Matrix.identity(2)) == C
    with pytest.raises(HodgeSubstructureError):
        restrict_operator(C, Matrix([[1], [0]]))
