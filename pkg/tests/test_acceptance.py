"""Acceptance suite: one test per criterion, summarized by the hook in conftest.py."""

from __future__ import annotations

import math
import random
import subprocess
import sys
import time

import sympy

from intersective.classify import (
    deligne_certify,
    dimension_lower,
    is_deligne_mod_p,
    rank_estimate,
    smooth_mod_p,
    strongly_deligne_scan,
)
from intersective.diffset import brute_force, inheritance_check, solve_exact, verify_witness
from intersective.expsum import (
    complete_sum_mod_p,
    gauss_sum,
    major_arc_compare,
    sieved_local_sum,
    vdc_fit,
)
from intersective.padic import RootSelection, build_auxiliary
from intersective.poly import IntPolynomial, parse_polynomial
from intersective.sieve import SieveProfile, gradient_zero_count, local_vanishing_order, sieve_count_check

P = parse_polynomial

CORPUS = ["x^2+y^2", "x^3+y^3", "x^4+x*y^3+y^4", "x^2+y^2+z^2", "x^3+y^3+z^3+x*y*z"]
UGLY = "x^4 - 2*y^4 + 2*x^2*(x+y) + (x+y)^2"


def report(label, detail):
    print(f"{label}: {detail}")


def test_criterion_01_deligne_bound_suite():
    t0 = time.perf_counter()
    checked = 0
    worst = 0.0
    for text in CORPUS:
        h = P(text)
        k, ell = h.degree, h.num_vars
        for p in sympy.primerange(5, 102):
            if k % p == 0 or not smooth_mod_p(h, p).smooth:
                continue
            r = complete_sum_mod_p(h, p)
            bound = (k - 1) ** ell * p ** (ell / 2)
            assert abs(r.value) <= bound + 1e-6, (text, p, abs(r.value), bound)
            worst = max(worst, abs(r.value) / bound)
            checked += 1
    elapsed = time.perf_counter() - t0
    report("deligne bound", f"{checked} (h, p) pairs, max ratio {worst:.6f}, {elapsed:.1f}s")
    assert checked > 0
    assert elapsed < 60


def test_criterion_02_gauss_sum_exactness():
    worst = 0.0
    for p in sympy.primerange(3, 98):
        for a in (1, 2, p - 1) if p > 3 else (1, 2, 4):
            err = abs(abs(gauss_sum(a, p)) - math.sqrt(p))
            worst = max(worst, err)
            assert err <= 1e-9, (p, a, err)
    r = complete_sum_mod_p(P("x^2+y^2"), 5)
    assert abs(r.ratio - 1) <= 1e-9
    report("gauss sums", f"max deviation {worst:.2e}; equality case ratio {r.ratio:.12f}")


def _vanishing_instances(count):
    fixtures = ["x^2+y^2", "x^3+y^3", "x^2+3*x*y+y^3", "x^4+x*y^3+y^4", "x^2+x*y+y^2+x"]
    out = []
    for text in fixtures:
        g = P(text)
        Y = 5
        prof = SieveProfile.build(g, Y)
        for e in prof.table:
            v = 2 * e.gamma
            for extra in (1, 2, 3, 7):
                if extra % e.p == 0:
                    continue
                q = e.p**v * extra
                if q**g.num_vars > 10**7 // 4:
                    continue
                for a in (1, q - 1):
                    out.append((text, g, Y, prof, q, a, e.p, v))
    return out[:count]


def test_criterion_03_local_vanishing_and_crt():
    cases = _vanishing_instances(20)
    assert len(cases) == 20
    for text, g, Y, prof, q, a, p, v in cases:
        assert local_vanishing_order(g, p) * 2 <= v
        r = sieved_local_sum(g, q, a, Y, prof)
        assert r.value == 0 and r.exact_zero is True, (text, q, a, r.value)
    rng = random.Random(0)
    pairs = []
    while len(pairs) < 20:
        q1, q2 = rng.randint(2, 30), rng.randint(2, 30)
        if math.gcd(q1, q2) == 1 and (q1 * q2) ** 2 <= 10**6:
            pairs.append((q1, q2))
    g = P("x^3+x*y+y^2")
    Y = 7
    prof = SieveProfile.build(g, Y)
    worst = 0.0
    for q1, q2 in pairs:
        a = next(b for b in range(1, q1 * q2) if math.gcd(b, q1 * q2) == 1 and b > 1) if q1 * q2 > 2 else 1
        s = sieved_local_sum(g, q1 * q2, a, Y, prof).value
        s1 = sieved_local_sum(g, q1, a * pow(q2, -1, q1) % q1, Y, prof).value
        s2 = sieved_local_sum(g, q2, a * pow(q1, -1, q2) % q2, Y, prof).value
        worst = max(worst, abs(s - s1 * s2))
        assert abs(s - s1 * s2) <= 1e-9, (q1, q2, s, s1 * s2)
    report("local laws", f"20 exact zeros; CRT max deviation {worst:.2e} on 20 pairs")


def test_criterion_04_sieve_count():
    t0 = time.perf_counter()
    g = P("x^2+y^2")
    r = sieve_count_check(SieveProfile.build(g, 3), (12, 12))
    assert r.count == 96 and r.main_term == 96 and r.error == 0
    worst = 0.0
    for Y in (3, 5, 10):
        prof = SieveProfile.build(g, Y)
        for X in (60, 120, 240):
            r = sieve_count_check(prof, (X, X), knob=50)
            bound = 50 * X * math.log(Y) ** 2
            assert abs(r.error) <= bound, (X, Y, r.error, bound)
            worst = max(worst, float(abs(r.error)) / bound)
    elapsed = time.perf_counter() - t0
    report("sieve count", f"E = 0 at 12x12; max |E|/bound {worst:.4f}; {elapsed:.1f}s")
    assert elapsed < 10


def test_criterion_05_aux_integrality_and_content():
    t0 = time.perf_counter()
    fixtures = [("x^4+x*y^3+y^4", (0, 0)), ("x^2+y^2", (0, 0)), ("x^2+y^2-2", (1, 1))]
    summary = []
    for text, root in fixtures:
        sel = RootSelection.from_integer_root(P(text), root)
        small, large = set(), set()
        for d in range(1, 501):
            aux = build_auxiliary(sel, d)
            assert all(isinstance(c, int) for c in aux.poly.terms.values())
            (small if d <= 250 else large).add(aux.poly.content())
        assert small == small | large, (text, small, large)
        summary.append(f"{text}: {sorted(small)}")
    elapsed = time.perf_counter() - t0
    report("aux content", "; ".join(summary) + f"; {elapsed:.1f}s")
    assert elapsed < 30


def test_criterion_06_major_arc_agreement():
    t0 = time.perf_counter()
    g = P("x^2+y^2")
    prof = SieveProfile.build(g, 3)
    worst = 0.0
    for a, q in [(0, 1), (1, 3), (1, 4), (2, 5)]:
        for beta in (0.0, 1e-6):
            r = major_arc_compare(g, a, q, beta, 120, 3, prof)
            assert r["rel_error"] <= 0.1, (a, q, beta, r["rel_error"])
            worst = max(worst, r["rel_error"])
            if (a, q, beta) == (1, 3, 0.0):
                assert abs(r["main_term"] - (-4800)) <= 1e-6
    elapsed = time.perf_counter() - t0
    report("major arcs", f"8 cases, max relative error {worst:.2e}; {elapsed:.1f}s")
    assert elapsed < 30


def test_criterion_07_van_der_corput_decay():
    slopes = {}
    for k in (2, 3):
        slopes[k] = vdc_fit(P(f"x^{k}"), 1.0, 10.0, 1e4)["slope"]
        assert slopes[k] <= -1 / k + 0.05, (k, slopes[k])
    report("vdc decay", ", ".join(f"k={k} slope {s:.4f}" for k, s in slopes.items()))


def test_criterion_08_difference_set_oracle():
    rng = random.Random(2024)
    for _ in range(200):
        N = rng.randint(0, 22)
        X = rng.sample(range(1, 30), rng.randint(0, 7))
        r = solve_exact(X, N)
        assert r.exact == brute_force(X, N), (X, N)
        assert verify_witness(r.witness, X) and len(r.witness) == r.exact
        assert r.lower_bound_formula <= r.greedy <= r.exact <= max(N, 0)
    r = solve_exact([1, 4, 9], 10)
    assert r.exact == 4 and verify_witness(r.witness, [1, 4, 9])
    report("diffset oracle", f"200 instances agree; D({{1,4,9}},10) = 4 with witness {r.witness}")


def test_criterion_09_classification_regressions():
    sq = P("(x+y)^2")
    assert rank_estimate(sq).rank == 1
    assert deligne_certify(sq).status == "Refuted"
    q4 = P("x^4+x*y^3+y^4")
    v = deligne_certify(q4)
    assert v.status == "Certified" and v.witness["discriminant"] == 229
    sd = strongly_deligne_scan(q4)
    assert sd.status == "Certified" and sd.witness["criterion"] == "integer_root"
    h3 = P("(x+z)^4+(x+z)*y^3+y^4")
    v = deligne_certify(h3)
    assert v.status == "Refuted" and v.witness["singular_point"] == [1, 0, -1]
    assert rank_estimate(h3).rank == 2
    low = dimension_lower(h3)
    assert low.status == "Reduced" and low.poly.num_vars == 2
    assert strongly_deligne_scan(low.poly).status == "Certified"
    ugly = strongly_deligne_scan(P(UGLY))
    assert ugly.status != "Certified"
    family = [f for f in ugly.witness["failures"] if f["d"] == f["p"] and f["p"] % 8 in (3, 5)]
    assert all(f["disc_mod_p"] == 0 for f in family)
    primes = sorted({f["p"] for f in family})
    assert len(primes) >= 3
    report("classification", f"ugly d = p family with 2 a non-residue at p in {primes}")


def test_criterion_10_gradient_locus_bound():
    t0 = time.perf_counter()
    checked = 0
    for text in CORPUS + [UGLY]:
        g = P(text)
        bound = (g.degree - 1) ** g.num_vars
        for p in sympy.primerange(2, 200):
            if not is_deligne_mod_p(g, p):
                continue
            j = gradient_zero_count(g, p)
            assert j <= bound, (text, p, j, bound)
            checked += 1
    report("gradient locus", f"{checked} (g, p) pairs within (k-1)^l; {time.perf_counter() - t0:.1f}s")
    assert checked > 0


def test_criterion_11_inheritance():
    fixtures = [("x^2+y^2-2", (1, 1)), ("x^4+x*y^3+y^4", (0, 0)), ("x^2+y^2", (0, 0))]
    for text, root in fixtures:
        h = P(text)
        sel = RootSelection.from_integer_root(h, root)
        res = inheritance_check(h, sel, 1, 2, trials=100, seed=0)
        assert res.passed and res.trials == 100, (text, res.counterexample)
    h = P("x^2+y^2-2")
    sel = RootSelection.from_integer_root(h, (1, 1))
    mutated = inheritance_check(h, sel, 1, 2, trials=100, seed=0, lam_override=sel.lam(2) + 1)
    assert not mutated.passed
    report("inheritance", "3 fixtures x 100 trials pass; corrupted lambda detected")


CLI_COMMANDS = [
    ["classify", "--poly", "(x+y)^2"],
    ["classify", "--poly", "x^4+x*y^3+y^4"],
    ["aux", "--poly", "x^2+y^2-2", "--root", "1,1", "--d", "1,2,6"],
    ["sieve", "--poly", "x^2+y^2", "--Y", "5", "--box", "40,40"],
    ["expsum", "complete", "--poly", "x^2+y^2", "--p", "5"],
    ["expsum", "local", "--poly", "x^2+y^2", "--q", "15", "--a", "2", "--Y", "5"],
    ["expsum", "weyl", "--poly", "x^2+y^2", "--alpha", "0.1234", "--M", "40", "--Y", "3"],
    ["expsum", "major-compare", "--poly", "x^2+y^2", "--a", "1", "--q", "3", "--M", "60", "--Y", "3"],
    ["expsum", "minor-report", "--poly", "x^2+y^2", "--alpha", "1/7", "--X", "100", "--Y", "3", "--Z", "5",
     "--q", "7", "--a", "1"],
    ["expsum", "vdc-fit", "--poly", "x^2", "--num", "8"],
    ["expsum", "arc", "--poly", "x^2", "--alpha", "0.3183", "--Q", "50"],
    ["diffset", "image", "--poly", "x^2", "--box=-10:10", "--cap", "100"],
    ["diffset", "exact", "--X", "1,4,9", "--N", "10"],
    ["diffset", "greedy", "--X", "1,4,9", "--N", "10"],
    ["diffset", "bounds", "--X", "1,2,3", "--N", "12", "--Y", "1,2,3,4"],
    ["diffset", "scaling", "--poly", "x^2", "--N-grid", "10,20,30"],
    ["diffset", "inherit", "--poly", "x^2+y^2-2", "--root", "1,1", "--q", "2", "--trials", "10", "--seed", "4"],
    ["lower-dim", "--poly", "(x+z)^4+(x+z)*y^3+y^4"],
    ["check", "--seed", "1"],
]


def _run_cli(argv):
    proc = subprocess.run([sys.executable, "-m", "intersective.cli", *argv], capture_output=True, timeout=300)
    return proc.returncode, proc.stdout


def test_criterion_12_cli_determinism():
    for argv in CLI_COMMANDS:
        first = _run_cli(argv)
        second = _run_cli(argv)
        assert first[0] == 0, (argv, first)
        assert first == second, argv
    report("determinism", f"{len(CLI_COMMANDS)} commands byte-identical across two runs")


def test_integer_polynomial_terms_are_python_ints():
    # guard for criterion 5: coefficients must never silently become floats
    p = build_auxiliary(RootSelection.from_integer_root(P("x^2+y^2-2"), (1, 1)), 6).poly
    assert isinstance(p, IntPolynomial)
    assert all(type(c) is int for c in p.terms.values())
