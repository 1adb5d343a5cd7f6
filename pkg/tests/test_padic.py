import random

import pytest

from intersective.errors import HenselFailure, MissingRootData
from intersective.padic import (
    PAdicRoot,
    RootSelection,
    build_auxiliary,
    find_roots_mod,
    hensel_lift,
    intersectivity_scan,
    multiplicity_at_root,
)
from intersective.poly import affine_substitute, parse_polynomial

P = parse_polynomial


def test_find_roots_examples():
    roots = find_roots_mod(P("x^2+y^2-2"), 3)
    assert [r.residue for r in roots] == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert all(r.nonsingular and r.multiplicity == 1 for r in roots)
    assert [r.residue for r in find_roots_mod(P("x^2+x+1"), 3)] == [(1,)]
    assert find_roots_mod(P("x^2+y^2+1"), 2, 2) == []


def test_find_roots_brute_force_oracle():
    h = P("x^3 - y^2 + 2*x*y - 5")
    for p in (2, 3, 5, 7):
        for j in (1, 2):
            q = p**j
            expect = [(a, b) for a in range(q) for b in range(q) if h.evaluate((a, b), q) == 0]
            assert [r.residue for r in find_roots_mod(h, p, j)] == expect


def test_hensel_examples():
    h = P("x^2-2")
    lifted = hensel_lift(h, find_roots_mod(h, 7)[0], 2)
    assert lifted.residue == (10,)
    h2 = P("x^2+y^2-2")
    r = PAdicRoot(3, 1, (1, 1), 1, True)
    out = hensel_lift(h2, r, 2)
    assert h2.evaluate(out.residue, 9) == 0
    assert all(a % 3 == b for a, b in zip(out.residue, (1, 1)))
    assert hensel_lift(h2, out, 2) is out


def test_hensel_lifts_verify_to_high_precision():
    h = P("x^2+y^2-3")
    for p in (7, 11, 13, 23):
        for root in find_roots_mod(h, p):
            out = hensel_lift(h, root, 6)
            assert h.evaluate(out.residue, p**6) == 0
            assert all((a - b) % p == 0 for a, b in zip(out.residue, root.residue))


def test_hensel_singular_root_uses_gamma():
    # x^2 - 17 over Z_2: gradient 2x has valuation 1 at odd x, so lifting needs h = 0 mod 8
    h = P("x^2-17")
    r = PAdicRoot(2, 3, (1,), 1, False)
    out = hensel_lift(h, r, 10)
    assert h.evaluate(out.residue, 2**10) == 0
    with pytest.raises(HenselFailure):
        hensel_lift(P("x^2-5"), PAdicRoot(2, 2, (1,), 1, False), 5)


def test_multiplicity_examples():
    assert multiplicity_at_root(P("x^2+y^2"), (0, 0), exact=True) == (2, False)
    assert multiplicity_at_root(P("x^2+y^2-2"), (1, 1), exact=True) == (1, False)
    assert multiplicity_at_root(P("(x+y)^2"), (0, 0), exact=True) == (2, False)
    m, caveat = multiplicity_at_root(P("x^2+x+1"), (1,), 3, 1)
    assert m == 2 and caveat


def test_build_auxiliary_examples():
    sel = RootSelection.from_integer_root(P("x^2+y^2"), (0, 0))
    for d in (1, 2, 6, 35):
        aux = build_auxiliary(sel, d)
        assert aux.lambda_d == d * d and aux.poly == P("x^2+y^2")
    sel2 = RootSelection.from_integer_root(P("x^2+y^2-2"), (1, 1))
    aux = build_auxiliary(sel2, 2)
    assert aux.r_d == (-1, -1) and aux.lambda_d == 2
    assert aux.poly == P("2*x^2-2*x+2*y^2-2*y")


def test_lambda_table_multiplicativity():
    h = P("x^2+y^2")
    sel = RootSelection.from_table(h, {2: PAdicRoot(2, 1, (0, 0), 1, True), 3: PAdicRoot(3, 1, (0, 0), 2, False)})
    assert sel.lam(12) == 36
    rng = random.Random(7)
    sel2 = RootSelection.from_integer_root(P("x^3+y^3-2"), (1, 1))
    for _ in range(50):
        a, b = rng.randint(1, 1000), rng.randint(1, 1000)
        assert sel2.lam(a * b) == sel2.lam(a) * sel2.lam(b)


def test_missing_root_data():
    sel = RootSelection.from_table(P("x^2+y^2"), {2: (0, 0)})
    with pytest.raises(MissingRootData):
        build_auxiliary(sel, 3)


@pytest.mark.parametrize("text, root", [("x^2+y^2-2", (1, 1)), ("x^4+x*y^3+y^4", (0, 0)), ("x^3+2*y^3-3*x*y", (1, 1))])
def test_auxiliary_invariants(text, root):
    h = P(text)
    sel = RootSelection.from_integer_root(h, root)
    k = h.degree
    for d in range(1, 80):
        aux = build_auxiliary(sel, d)
        assert aux.poly * aux.lambda_d == affine_substitute(h, d, aux.r_d)
        assert aux.poly.homogeneous_part(k) * aux.lambda_d == h.homogeneous_part(k) * d**k
        for q in (2, 3, 5):
            big = build_auxiliary(sel, q * d)
            assert all((a - b) % d == 0 for a, b in zip(big.r_d, aux.r_d))


def test_table_selection_with_lifting():
    # x^2 - 2 has nonsingular roots mod 7; shifts need lifts to 7^2
    h = P("x^2+y^2-3")
    sel = RootSelection.choose(h, prime_bound=30)
    assert sel.rule == "table"
    for d in (7, 49, 11 * 49):
        aux = build_auxiliary(sel, d)
        assert aux.poly * aux.lambda_d == affine_substitute(h, d, aux.r_d)


def test_selection_json_round_trip():
    h = P("x^2+y^2-3")
    sel = RootSelection.choose(h, prime_bound=20)
    back = RootSelection.from_json(sel.to_json())
    assert back.roots.keys() == sel.roots.keys()
    assert all(back.roots[p].residue == sel.roots[p].residue for p in sel.roots)


def test_intersectivity_examples():
    assert intersectivity_scan(P("x^2+y^2")).kind == "CertifiedAllPrimes"
    v = intersectivity_scan(P("x^2+y^2+1"))
    assert v.kind == "NonIntersectiveWitness" and v.witness_q == 4
    v = intersectivity_scan(P("(x^3-19)*(x^2+x+1)"), prime_bound=100)
    assert v.kind == "CertifiedUpTo" and v.bound == 100


def test_intersectivity_rational_roots_with_coprime_denominators():
    v = intersectivity_scan(P("(2*x-1)*(3*x-1)"))
    assert v.kind == "CertifiedAllPrimes"
    # a single denominator 2 leaves p = 2 uncovered
    v = intersectivity_scan(P("2*x-1"))
    assert v.kind == "NonIntersectiveWitness" and v.witness_q == 2


def test_content_of_aux_is_bounded():
    h = P("x^2+y^2-2")
    sel = RootSelection.from_integer_root(h, (1, 1))
    small = {build_auxiliary(sel, d).poly.content() for d in range(1, 251)}
    large = small | {build_auxiliary(sel, d).poly.content() for d in range(251, 501)}
    assert small == large
