"""Ground-truth packages with expected results.

Most builders are direct sums of V_a ⊗ V_b (with V_a the (a+1)-dimensional
sl2-string, J e_s = e_{s+1}) carrying

* M = J ⊗ 1 + 1 ⊗ J  (plays eta),
* N = 1 ⊗ J          (plays L),
* the form kappa * Q ⊗ S_a ⊗ S_b with S_a(e_s, e_{a-s}) = (-1)^s.

The basis vector e_s ⊗ e_t of a summand (a, b) has cohomological degree
n - (a + b) + 2(s + t) and perversity 2s - a, which lets every manifest
be written down without running the analyzer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError
from .exact import Matrix, Subspace, block_diag, hstack, is_positive_definite, vstack
from .graded import Filtration, GradedOperator, GradedSpace, PoincarePairing
from .lefschetz import WeilOperator
from .perverse import FiberRecord, PerversePackage, defect


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def jordan_block(size: int) -> Matrix:
    """J e_s = e_{s+1} on a basis e_0..e_{size-1}."""
    return Matrix([[1 if r == c + 1 else 0 for c in range(size)] for r in range(size)], cols=size)


def string_form(a: int) -> Matrix:
    """S_a(e_s, e_{a-s}) = (-1)^s; J is an infinitesimal automorphism of it."""
    return Matrix([[_sign(r) if r + c == a else 0 for c in range(a + 1)] for r in range(a + 1)], cols=a + 1)


# ---------------------------------------------------------------- manifests


@dataclass
class Manifest:
    builder: str
    parameters: dict
    expected: dict
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"builder": self.builder, "parameters": self.parameters, "expected": self.expected}
        out.update(self.extras)
        return out


def _expected(
    space: GradedSpace,
    perverse_betti: dict,
    biprimitives: dict,
    defect_value,
    fibers: list,
) -> dict:
    n = space.n
    return {
        "betti": list(space.dims),
        "perverse_betti": [[l, b, d] for (l, b), d in sorted(perverse_betti.items()) if d],
        "biprimitives": [[i, j, d] for (i, j), d in sorted(biprimitives.items()) if d],
        "lambda_dim": space.dim(n) - space.dim(n - 2),
        "defect": defect_value,
        "fibers": fibers,
    }


def fiber_expectation(label, b, skyscraper_rank, signature=None, rif=True, grauert=True, splitting=True) -> dict:
    return {
        "label": label,
        "b": b,
        "rif": rif,
        "grauert": grauert,
        "splitting": splitting,
        "skyscraper_rank": skyscraper_rank,
        "signature": signature,
    }


# ------------------------------------------------------- sl2 x sl2 modules


def build_sl2sl2(mults: dict) -> tuple[Matrix, Matrix, Matrix, dict]:
    """Ungraded ⊕ m_ab V_a ⊗ V_b; returns (M, N, form, expected biprimitive dims)."""
    Ms, Ns, Gs = [], [], []
    expected = {}
    for (a, b), m in sorted(mults.items()):
        if m < 0 or a < 0 or b < 0:
            raise InputError("multiplicities and string lengths must be non-negative")
        if m == 0:
            continue
        Ja, Jb = jordan_block(a + 1), jordan_block(b + 1)
        Ia, Ib, Im = Matrix.identity(a + 1), Matrix.identity(b + 1), Matrix.identity(m)
        Ms.append(Im.kron(Ja.kron(Ib) + Ia.kron(Jb)))
        Ns.append(Im.kron(Ia.kron(Jb)))
        Gs.append(Im.kron(string_form(a).kron(string_form(b))))
        expected[(a, b)] = m
    return block_diag(*Ms), block_diag(*Ns), block_diag(*Gs), expected


@dataclass
class Summand:
    a: int
    b: int
    mult: int = 1
    Q: Matrix | None = None
    tag: str = ""


def _hyperbolic(k: int) -> tuple[Matrix, Matrix]:
    """Q = [[0, I], [-I, 0]] and C = [[0, -I], [I, 0]], so that QC = I and C^2 = -I."""
    I, Z = Matrix.identity(k), Matrix.zeros(k, k)
    Q = vstack(hstack(Z, I), hstack(-I, Z))
    C = vstack(hstack(Z, -I), hstack(I, Z))
    return Q, C


@dataclass
class GradedModule:
    """A graded sl2 x sl2 package with bookkeeping of where each basis vector went."""

    package: PerversePackage
    positions: dict  # (summand index, k, s, t) -> (degree, local index)
    perverse_betti: dict
    biprimitives: dict


def build_graded_module(name: str, n: int, summands: list[Summand], defect_table=None) -> GradedModule:
    """Assemble ⊕ V_a ⊗ V_b ⊗ Q^mult as a package of half-dimension n."""
    labels = []  # (degree, summand index, k, s, t)
    for idx, sm in enumerate(summands):
        a, b, m = sm.a, sm.b, sm.mult
        if a < 0 or b < 0 or m < 0:
            raise InputError("string lengths and multiplicities must be non-negative")
        if a + b > n:
            raise InputError(f"summand ({a},{b}) does not fit in half-dimension {n}")
        if (n - a - b) % 2 and m % 2:
            raise InputError(f"summand ({a},{b}) has odd weight parity; its multiplicity must be even")
        for k in range(m):
            for s in range(a + 1):
                for t in range(b + 1):
                    labels.append((n - a - b + 2 * (s + t), idx, k, s, t))
    labels.sort(key=lambda x: x[0])
    dims = [0] * (2 * n + 1)
    positions = {}
    index = {}
    for pos, (deg, idx, k, s, t) in enumerate(labels):
        positions[(idx, k, s, t)] = (deg, dims[deg])
        dims[deg] += 1
        index[(idx, k, s, t)] = pos
    space = GradedSpace(n, dims)
    N_tot = space.total_dim
    eta = [[0] * N_tot for _ in range(N_tot)]
    L = [[0] * N_tot for _ in range(N_tot)]
    G = [[Fraction(0)] * N_tot for _ in range(N_tot)]
    C = [[0] * N_tot for _ in range(N_tot)]
    perverse_betti: dict = {}
    biprimitives: dict = {}
    for idx, sm in enumerate(summands):
        a, b, m = sm.a, sm.b, sm.mult
        if m == 0:
            continue
        biprimitives[(a, b)] = biprimitives.get((a, b), 0) + m
        kappa = _sign(n - a - b)
        if (n - a - b) % 2 == 0:
            Q = sm.Q if sm.Q is not None else Matrix.identity(m)
            if Q.shape != (m, m) or not Q.is_symmetric() or not is_positive_definite(Q):
                raise InputError(f"summand ({a},{b}) needs a symmetric positive definite form")
            Cm = Matrix.identity(m)
        else:
            if sm.Q is not None:
                raise InputError(f"summand ({a},{b}) uses the standard alternating multiplicity form")
            Q, Cm = _hyperbolic(m // 2)
        for k in range(m):
            for s in range(a + 1):
                for t in range(b + 1):
                    p = index[(idx, k, s, t)]
                    deg = n - a - b + 2 * (s + t)
                    key = (deg, 2 * s - a)
                    perverse_betti[key] = perverse_betti.get(key, 0) + 1
                    if s < a:
                        eta[index[(idx, k, s + 1, t)]][p] += 1
                    if t < b:
                        eta[index[(idx, k, s, t + 1)]][p] += 1
                        L[index[(idx, k, s, t + 1)]][p] += 1
                    for k2 in range(m):
                        q = index[(idx, k2, a - s, b - t)]
                        if Q[k, k2]:
                            G[p][q] += kappa * Q[k, k2] * _sign(s + t)
                        if Cm[k2, k]:
                            C[index[(idx, k2, s, t)]][p] += Cm[k2, k]
    Gm = Matrix(G, cols=N_tot)
    pairing = {}
    for l in range(n + 1):
        block = Gm.take(list(space.indices(l)), list(space.indices(2 * n - l)))
        pairing[l] = block.scale(_sign(l * (l - 1) // 2))
    Cm_tot = Matrix(C, cols=N_tot)
    weil = WeilOperator(space, {l: Cm_tot.take(list(space.indices(l)), list(space.indices(l))) for l in space.degrees})
    pkg = PerversePackage(
        name=name,
        space=space,
        eta=GradedOperator.from_total(space, Matrix(eta, cols=N_tot), 2),
        L=GradedOperator.from_total(space, Matrix(L, cols=N_tot), 2),
        pairing=PoincarePairing(space, pairing),
        weil=weil,
        defect_table=defect_table,
        fibers=[],
    )
    return GradedModule(pkg, positions, perverse_betti, biprimitives)


def _local_column(dim: int, k: int) -> Matrix:
    return Matrix([[1 if r == k else 0] for r in range(dim)], cols=1)


def _all_level(dim: int, lowest: int) -> Filtration:
    return Filtration(dim, lowest, [Subspace.full(dim)])


def build_sl2sl2_package(mults: dict, n: int | None = None) -> tuple[PerversePackage, Manifest]:
    """Graded version of :func:`build_sl2sl2`; summands of the wrong weight parity need even multiplicity."""
    items = sorted((k, v) for k, v in mults.items() if v)
    if n is None:
        n = max((a + b for (a, b), _ in items), default=0)
    mod = build_graded_module(
        "sl2sl2", n, [Summand(a, b, m) for (a, b), m in items]
    )
    params = {"n": n, **{f"m{a}{b}": m for (a, b), m in items}}
    exp = _expected(mod.package.space, mod.perverse_betti, mod.biprimitives, None, [])
    return mod.package, Manifest("sl2sl2", params, exp)


# ------------------------------------------------------------- geometry


def build_projective_space(a: int) -> tuple[PerversePackage, Manifest]:
    """P^a with eta = L = hyperplane class."""
    if a < 0:
        raise InputError("a must be non-negative")
    mod = build_graded_module(f"P{a}", a, [Summand(0, a)], defect_table=[(0, a)])
    pkg = mod.package
    if a == 0:
        fib = FiberRecord("point", {0: Matrix([[1]])}, {0: Matrix([[1]])}, {0: _all_level(1, 0)}, codim_h=0)
        fexp = fiber_expectation("point", 0, 1, signature=True)
    else:
        top = 2 * a
        fib = FiberRecord(
            "point", {a: Matrix([[1]])}, {a: Matrix.zeros(0, 1)}, {a: _all_level(1, 0)}
        )
        fexp = fiber_expectation("point", a, 0)
        assert pkg.space.dim(top) == 1
    pkg.fibers = [fib]
    exp = _expected(pkg.space, mod.perverse_betti, mod.biprimitives, 0, [fexp])
    return pkg, Manifest("projective-space", {"a": a}, exp)


def build_product_family(a: int, b: int) -> tuple[PerversePackage, Manifest]:
    """P^a x P^b -> P^b with eta = h1 + h2 and L = h2; basis h1^s h2^t."""
    if a < 0 or b < 0:
        raise InputError("a and b must be non-negative")
    n = a + b
    mod = build_graded_module(f"P{a}xP{b}", n, [Summand(a, b)], defect_table=[(a, b)])
    pkg = mod.package
    # the fiber P^a over a point of the base sits in degree 2b, i.e. index b - a
    bi = b - a
    deg, col = mod.positions[(0, 0, 0, b)]
    cl = _local_column(pkg.space.dim(deg), col)
    if b <= a:
        _, row = mod.positions[(0, 0, b, 0)]
        res = _local_column(pkg.space.dim(deg), row).T
    else:
        res = Matrix.zeros(0, pkg.space.dim(deg))
    pkg.fibers = [FiberRecord("fiber", {bi: cl}, {bi: res}, {bi: _all_level(1, -a)})]
    sky = 1 if a == 0 and b == 0 else 0
    exp = _expected(
        pkg.space, mod.perverse_betti, mod.biprimitives, a, [fiber_expectation("fiber", bi, sky)]
    )
    # perversity oracle from the Deligne decomposition: H^l_k has rank b_{l-a-k}(P^b) * b_{a+k}(P^a)
    return pkg, Manifest("product-family", {"a": a, "b": b}, exp)


def _blowup_data(ee: int = -1, eta_e: int = 1, res_sign: int = 1, noncommuting: bool = False):
    space = GradedSpace(2, [1, 0, 2, 0, 1])
    pairing = PoincarePairing(space, {0: Matrix([[1]]), 2: Matrix([[1, 0], [0, ee]])})
    eta = GradedOperator(space, 2, {0: Matrix([[2], [-1]]), 2: Matrix([[2, eta_e]])})
    L0 = Matrix([[1], [1]]) if noncommuting else Matrix([[1], [0]])
    L = GradedOperator(space, 2, {0: L0, 2: Matrix([[1, 0]])})
    weil = WeilOperator(space, {l: Matrix.identity(space.dim(l)) for l in space.degrees})
    fiber = FiberRecord(
        "exceptional",
        {0: Matrix([[0], [1]])},
        {0: Matrix([[0, -res_sign]])},
        {0: _all_level(1, 0)},
        codim_h=1,
    )
    return space, pairing, eta, L, weil, fiber


def build_blowup_p2() -> tuple[PerversePackage, Manifest]:
    """Blowup of P^2 at a point, basis {H, E} of H^2, eta = 2H - E, L = H."""
    space, pairing, eta, L, weil, fiber = _blowup_data()
    pkg = PerversePackage("blowup-p2", space, eta, L, pairing, weil, [(0, 2), (1, 0)], [fiber])
    exp = {
        "betti": [1, 0, 2, 0, 1],
        "perverse_betti": [[0, 0, 1], [2, 0, 2], [4, 0, 1]],
        "biprimitives": [[0, 0, 1], [0, 2, 1]],
        "lambda_dim": 1,
        "defect": 0,
        "fibers": [fiber_expectation("exceptional", 0, 1, signature=True)],
    }
    return pkg, Manifest("blowup-p2", {}, exp)


def build_threefold_model(
    r: int = 1,
    gram: Matrix | None = None,
    curve_rank: int = 1,
    odd_pairs: int = 1,
    middle_pairs: int = 1,
) -> tuple[PerversePackage, Manifest]:
    """Synthetic threefold contracting a surface D with H_4(D) of rank r to a point.

    ``gram`` is the intersection form on H_4(D); it must be negative definite.
    """
    if r < 1:
        raise InputError("rank_r must be at least 1")
    if min(curve_rank, odd_pairs, middle_pairs) < 0:
        raise InputError("ranks must be non-negative")
    G_D = gram if gram is not None else Matrix.identity(r).scale(-1)
    if G_D.shape != (r, r) or not G_D.is_symmetric() or not is_positive_definite(-G_D):
        raise InputError("the Gram matrix of H_4(D) must be symmetric negative definite of size r")
    summands = [
        Summand(0, 3, 1, tag="base"),
        Summand(0, 2, 2 * odd_pairs, tag="odd"),
        Summand(0, 1, curve_rank, tag="curve"),
        Summand(0, 0, 2 * middle_pairs, tag="middle"),
        Summand(1, 0, r, Q=-G_D, tag="D"),
    ]
    table = [(0, 3), (1, 1), (2, 0)]
    mod = build_graded_module(f"threefold-r{r}", 3, summands, defect_table=table)
    pkg = mod.package
    sp = pkg.space
    S = pkg.S.gram
    D = 4
    tops = [sp.inclusion(2) @ _local_column(sp.dim(2), mod.positions[(D, k, 0, 0)][1]) for k in range(r)]
    eta_tot = pkg.eta.total()
    up = [eta_tot @ t for t in tops]
    h2, h4 = list(sp.indices(2)), list(sp.indices(4))
    cl_m1 = Matrix.from_columns([t.take(h2).col(0) for t in tops], sp.dim(2))
    res_m1 = Matrix([(-(u.T @ S.T)).take(None, h2).row(0) for u in up], cols=sp.dim(2))
    cl_p1 = Matrix.from_columns([u.take(h4).col(0) for u in up], sp.dim(4))
    res_p1 = Matrix([(-(t.T @ S)).take(None, h4).row(0) for t in tops], cols=sp.dim(4))
    fib = FiberRecord(
        "D",
        {-1: cl_m1, 1: cl_p1},
        {-1: res_m1, 1: res_p1},
        {-1: _all_level(r, -1), 1: _all_level(r, 1)},
    )
    pkg.fibers = [fib]
    exp = _expected(
        sp,
        mod.perverse_betti,
        mod.biprimitives,
        defect(table, 3),
        [fiber_expectation("D", -1, r), fiber_expectation("D", 1, r)],
    )
    params = {
        "r": r,
        "gram": G_D.to_strings(),
        "curve_rank": curve_rank,
        "odd_pairs": odd_pairs,
        "middle_pairs": middle_pairs,
    }
    display = [
        {"operator": "eta", "power": 1, "source": [2, -1], "target": [4, 1], "dim": r},
        {"operator": "L", "power": 3, "source": [0, 0], "target": [6, 0], "dim": 1},
        {"operator": "L", "power": 2, "source": [1, 0], "target": [5, 0], "dim": 2 * odd_pairs},
        {"operator": "L", "power": 1, "source": [2, 0], "target": [4, 0], "dim": 1 + curve_rank},
    ]
    return pkg, Manifest("threefold-model", params, exp, {"display": display})


# ------------------------------------------------------- corrupted variants


def corrupted_variants() -> dict[str, tuple[PerversePackage, set]]:
    """Deliberately broken packages, each with the set of checks it must fail."""
    out = {}

    space, pairing, eta, L, weil, fiber = _blowup_data(noncommuting=True)
    out["blowup-noncommuting"] = (
        PerversePackage("blowup-noncommuting", space, eta, L, pairing, weil, [(0, 2), (1, 0)], [fiber]),
        {"package"},
    )

    p2, _ = build_projective_space(2)
    flipped = PoincarePairing(p2.space, {**p2.pairing.blocks, 2: p2.pairing.blocks[2].scale(-1)})
    out["p2-pairing-sign"] = (
        PerversePackage("p2-pairing-sign", p2.space, p2.eta, p2.L, flipped, p2.weil, p2.defect_table, p2.fibers),
        {"package"},
    )

    space, pairing, eta, L, weil, fiber = _blowup_data(ee=1, eta_e=-1)
    out["blowup-hrr-sign"] = (
        PerversePackage("blowup-hrr-sign", space, eta, L, pairing, weil, [(0, 2), (1, 0)], []),
        {"hrr"},
    )

    space, pairing, eta, L, weil, fiber = _blowup_data(res_sign=-1)
    out["blowup-signature-flip"] = (
        PerversePackage("blowup-signature-flip", space, eta, L, pairing, weil, [(0, 2), (1, 0)], [fiber]),
        {"signature"},
    )

    space, pairing, eta, L, weil, fiber = _blowup_data()
    degenerate = FiberRecord(
        "exceptional", fiber.class_maps, {0: Matrix([[0, 0]])}, fiber.homology_filtration, codim_h=None
    )
    out["blowup-degenerate-fiber"] = (
        PerversePackage("blowup-degenerate-fiber", space, eta, L, pairing, weil, [(0, 2), (1, 0)], [degenerate]),
        {"rif", "splitting"},
    )

    space, pairing, eta, L, weil, fiber = _blowup_data()
    shifted = FiberRecord(
        "exceptional", fiber.class_maps, fiber.restriction_maps, {0: _all_level(1, -1)}, codim_h=1
    )
    out["blowup-filtration-shift"] = (
        PerversePackage("blowup-filtration-shift", space, eta, L, pairing, weil, [(0, 2), (1, 0)], [shifted]),
        {"rif", "grauert", "signature", "splitting"},
    )
    return out


# ------------------------------------------------------------- registry


def _int(params: dict, key: str, default=None) -> int:
    if key not in params:
        if default is None:
            raise InputError(f"missing parameter {key}")
        return default
    try:
        return int(params[key])
    except (TypeError, ValueError):
        raise InputError(f"parameter {key} must be an integer") from None


def _gram_param(text: str | None, r: int) -> Matrix | None:
    """Parse a Gram matrix written as rows separated by ';' and entries by ','."""
    if text is None:
        return None
    from .exact import parse_rational

    try:
        rows = [[parse_rational(x.strip()) for x in row.split(",")] for row in text.split(";")]
        return Matrix(rows)
    except ValueError as exc:
        raise InputError(f"bad gram parameter: {exc}") from None


def _sl2sl2_from_params(params: dict):
    mults = {}
    n = None
    for k, v in params.items():
        if k == "n":
            n = _int(params, "n")
        elif len(k) == 3 and k[0] == "m" and k[1:].isdigit():
            mults[(int(k[1]), int(k[2]))] = _int(params, k)
        else:
            raise InputError(f"unknown parameter {k}")
    return build_sl2sl2_package(mults, n)


def _check_keys(params: dict, allowed: set) -> None:
    extra = set(params) - allowed
    if extra:
        raise InputError(f"unknown parameters: {', '.join(sorted(extra))}")


def _projective(params):
    _check_keys(params, {"a"})
    return build_projective_space(_int(params, "a", 2))


def _product(params):
    _check_keys(params, {"a", "b"})
    return build_product_family(_int(params, "a", 1), _int(params, "b", 1))


def _blowup(params):
    _check_keys(params, set())
    return build_blowup_p2()


def _threefold(params):
    _check_keys(params, {"r", "gram", "curve_rank", "odd_pairs", "middle_pairs"})
    r = _int(params, "r", 1)
    return build_threefold_model(
        r,
        _gram_param(params.get("gram"), r),
        _int(params, "curve_rank", 1),
        _int(params, "odd_pairs", 1),
        _int(params, "middle_pairs", 1),
    )


BUILDERS = {
    "projective-space": _projective,
    "product-family": _product,
    "blowup-p2": _blowup,
    "threefold-model": _threefold,
    "sl2sl2": _sl2sl2_from_params,
}


def build(name: str, params: dict | None = None, variant: str | None = None):
    """Look up a builder by CLI name; ``variant`` selects a corrupted package instead."""
    params = params or {}
    if variant is not None:
        variants = corrupted_variants()
        if variant not in variants:
            raise InputError(f"unknown variant {variant}")
        pkg, targets = variants[variant]
        return pkg, Manifest(name, {"variant": variant, **params}, {}, {"failing_checks": sorted(targets)})
    if name not in BUILDERS:
        raise InputError(f"unknown builder {name}")
    return BUILDERS[name](params)


# --------------------------------------------------------- random inputs


def random_invertible(rng: random.Random, n: int, spread: int = 3) -> Matrix:
    while True:
        P = Matrix([[rng.randint(-spread, spread) for _ in range(n)] for _ in range(n)], cols=n)
        if P.is_invertible():
            return P


def random_partition(rng: random.Random, n: int) -> list[int]:
    parts = []
    left = n
    while left:
        k = rng.randint(1, left)
        parts.append(k)
        left -= k
    return sorted(parts, reverse=True)


def random_nilpotent(rng: random.Random, n: int) -> tuple[Matrix, list[int]]:
    """P J P^{-1} for a random Jordan shape; returns the matrix and the block sizes."""
    shape = random_partition(rng, n)
    J = block_diag(*[jordan_block(s) for s in shape]) if shape else Matrix.zeros(0, 0)
    P = random_invertible(rng, n)
    return P @ J @ P.inverse(), shape


def random_sl2_module(rng: random.Random, max_dim: int = 10) -> tuple[Matrix, Matrix, list[int]]:
    """A random (N, G) with N an infinitesimal automorphism of the (±)-symmetric form G.

    All strings have the same length parity, so G is (-1)^w-symmetric.
    """
    w = rng.randint(0, 1)
    sizes = []
    total = 0
    while True:
        choices = [a for a in range(w, max_dim, 2) if total + a + 1 <= max_dim]
        if not choices or (sizes and rng.random() < 0.3):
            break
        a = rng.choice(choices)
        sizes.append(a)
        total += a + 1
    if not sizes:
        sizes = [w]
    Ns = [jordan_block(a + 1) for a in sizes]
    Gs = [string_form(a).scale(rng.choice([1, 2, 3, -1, Fraction(1, 2)])) for a in sizes]
    N, G = block_diag(*Ns), block_diag(*Gs)
    P = random_invertible(rng, N.rows)
    Pinv = P.inverse()
    return P @ N @ Pinv, Pinv.T @ G @ Pinv, sizes
