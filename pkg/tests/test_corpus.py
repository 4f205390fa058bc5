import random

import pytest

from hlp.analysis import analyze_package
from hlp.corpus import (
    BUILDERS,
    build,
    build_blowup_p2,
    build_product_family,
    build_projective_space,
    build_sl2sl2,
    build_sl2sl2_package,
    build_threefold_model,
    corrupted_variants,
    jordan_block,
    random_nilpotent,
    random_sl2_module,
    string_form,
)
from hlp.errors import InputError
from hlp.exact import Matrix
from hlp.graded import check_infinitesimal_automorphism
from hlp.lefschetz import nilpotency_order


@pytest.mark.parametrize(
    "builder, params",
    [
        ("blowup-p2", {}),
        ("projective-space", {"a": "0"}),
        ("projective-space", {"a": "1"}),
        ("projective-space", {"a": "3"}),
        ("product-family", {"a": "0", "b": "2"}),
        ("product-family", {"a": "2", "b": "2"}),
        ("threefold-model", {"r": "2", "curve_rank": "0", "odd_pairs": "2"}),
        ("sl2sl2", {"m11": "1", "m00": "2"}),
        ("sl2sl2", {"m21": "2", "m03": "2", "n": "4"}),
    ],
)
def test_manifest_matches_analyzer(builder, params):
    pkg, manifest = build(builder, params)
    report = analyze_package(pkg)
    assert report["passed"]
    assert report["manifest"] == manifest.expected


def test_projective_space_shapes():
    assert build_projective_space(2)[0].space.dims == (1, 0, 1, 0, 1)
    assert build_projective_space(1)[0].space.dims == (1, 0, 1)
    point, manifest = build_projective_space(0)
    assert point.space.dims == (1,)
    assert manifest.expected["perverse_betti"] == [[0, 0, 1]]


def test_projective_space_eta_filtration_is_degree_filtration():
    pkg, _ = build_projective_space(2)
    W = pkg.W_eta
    # the class in degree l has eta-weight n - l
    for l, w in ((0, 2), (2, 0), (4, -2)):
        assert pkg.space.degree_subspace(l) <= W.at(w)
        assert not pkg.space.degree_subspace(l) <= W.at(w - 1)


def test_product_family_with_point_fiber_is_single_perversity():
    pkg, _ = build_product_family(0, 2)
    assert {b for (_, b) in pkg.perverse.graded_dims()} == {0}


def test_threefold_rank_one_row():
    pkg, manifest = build_threefold_model(1)
    row = [pkg.perverse.gr_dim(l, -1) for l in range(7)]
    assert row == [0, 0, 1, 0, 0, 0, 0]
    assert manifest.expected["defect"] == 1


def test_threefold_eta_isomorphism():
    for r in (1, 2, 3):
        pkg, _ = build_threefold_model(r)
        A = pkg.perverse.induced(pkg.eta.block(2), (2, -1), (4, 1))
        assert A.shape == (r, r) and A.is_invertible()


def test_builder_errors():
    with pytest.raises(InputError):
        build_projective_space(-1)
    with pytest.raises(InputError):
        build_product_family(-1, 0)
    with pytest.raises(InputError):
        build_threefold_model(0)
    with pytest.raises(InputError):
        build_threefold_model(2, gram=Matrix.identity(2))
    with pytest.raises(InputError):
        build_sl2sl2_package({(1, 0): 1}, n=2)
    with pytest.raises(InputError):
        build("no-such-builder")
    with pytest.raises(InputError):
        build("projective-space", {"b": "1"})
    with pytest.raises(InputError):
        build("projective-space", {"a": "x"})
    with pytest.raises(InputError):
        build("blowup-p2", variant="no-such-variant")


def test_gram_parameter():
    pkg, manifest = build("threefold-model", {"r": "2", "gram": "-2,1;1,-2"})
    assert manifest.parameters["gram"] == [["-2", "1"], ["1", "-2"]]
    assert analyze_package(pkg)["passed"]


def test_registry_names():
    assert set(BUILDERS) == {"projective-space", "product-family", "blowup-p2", "threefold-model", "sl2sl2"}


def test_sl2sl2_examples():
    M, N, G, expected = build_sl2sl2({(1, 1): 1})
    assert M.rows == 4 and expected == {(1, 1): 1}
    M, N, G, expected = build_sl2sl2({(0, 0): 3})
    assert M.is_zero() and N.is_zero() and expected == {(0, 0): 3}
    _, _, _, expected = build_sl2sl2({(2, 0): 1, (0, 1): 1})
    assert expected == {(2, 0): 1, (0, 1): 1}


def test_graded_sl2sl2_parity():
    pkg, manifest = build_sl2sl2_package({(1, 0): 2}, n=2)
    assert pkg.space.dims == (0, 2, 0, 2, 0)
    assert manifest.expected["biprimitives"] == [[1, 0, 2]]


def test_string_form_is_invariant():
    for a in range(5):
        J = jordan_block(a + 1)
        S = string_form(a)
        assert (J.T @ S + S @ J).is_zero()


def test_random_generators():
    rng = random.Random(0)
    for _ in range(20):
        N, shape = random_nilpotent(rng, rng.randint(1, 8))
        assert nilpotency_order(N) == max(shape)
        N, G, sizes = random_sl2_module(rng, 8)
        assert G.is_invertible()
        assert check_infinitesimal_automorphism(G, N).passed
        assert N.rows == sum(s + 1 for s in sizes) <= 8


def test_variant_targets():
    variants = corrupted_variants()
    assert {name: targets for name, (_, targets) in variants.items()} == {
        "blowup-noncommuting": {"package"},
        "p2-pairing-sign": {"package"},
        "blowup-hrr-sign": {"hrr"},
        "blowup-signature-flip": {"signature"},
        "blowup-degenerate-fiber": {"rif", "splitting"},
        "blowup-filtration-shift": {"rif", "grauert", "signature", "splitting"},
    }


def test_blowup_manifest_by_hand():
    _, manifest = build_blowup_p2()
    exp = manifest.expected
    assert exp["betti"] == [1, 0, 2, 0, 1]
    assert exp["lambda_dim"] == 1 and exp["defect"] == 0
    assert exp["fibers"][0]["skyscraper_rank"] == 1 and exp["fibers"][0]["signature"] is True
