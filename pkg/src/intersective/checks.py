"""Seeded invariant suite behind the ``check`` command."""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .classify import deligne_certify, gradient_locus_count, smooth_mod_p
from .diffset import brute_force, solve_exact, verify_witness
from .expsum import gauss_sum, sieved_local_sum, sieved_weyl_sum
from .padic import RootSelection, build_auxiliary, find_roots_mod, hensel_lift
from .poly import (
    IntPolynomial,
    affine_substitute,
    discriminant_binary_form,
    parse_polynomial,
    univariate_gcd,
)
from .sieve import SieveProfile, sieve_membership


def random_poly(rng, num_vars, degree, height=5, terms=4):
    out = {}
    for _ in range(terms):
        exps = [0] * num_vars
        for _ in range(rng.randint(0, degree)):
            exps[rng.randrange(num_vars)] += 1
        out[tuple(exps)] = rng.randint(-height, height)
    return IntPolynomial(num_vars, out)


def random_binary_form(rng, k, height=4):
    return IntPolynomial(2, {(i, k - i): rng.randint(-height, height) for i in range(k + 1)})


def _check(name, fn):
    try:
        detail = fn()
        return {"name": name, "passed": True, "detail": detail}
    except AssertionError as exc:
        return {"name": name, "passed": False, "detail": str(exc)}


def run_checks(seed: int = 0):
    rng = random.Random(seed)
    results = []

    def reconstruction():
        for _ in range(30):
            p = random_poly(rng, rng.randint(1, 3), 4)
            total = IntPolynomial(p.num_vars)
            for i in range((p.degree or 0) + 1):
                total = total + p.homogeneous_part(i)
            assert total == p, f"reconstruction failed for {p}"
        return "30 random polynomials"

    def euler():
        for _ in range(30):
            k = rng.randint(1, 4)
            g = random_binary_form(rng, k)
            if g.is_zero():
                continue
            rhs = sum((IntPolynomial.variable(2, i) * d for i, d in enumerate(g.gradient())), IntPolynomial(2))
            assert g * k == rhs, f"Euler identity failed for {g}"
        return "30 random forms"

    def substitution():
        for _ in range(20):
            p = random_poly(rng, 2, 3)
            d = rng.randint(1, 5)
            r = [rng.randint(-5, 5) for _ in range(2)]
            q = affine_substitute(p, d, r)
            v = [rng.randint(-9, 9) for _ in range(2)]
            assert q.evaluate(v) == p.evaluate([ri + d * vi for ri, vi in zip(r, v)])
        return "20 random substitutions"

    def discriminant():
        for _ in range(30):
            g = random_binary_form(rng, rng.randint(2, 4))
            if g.is_zero() or g.degree < 2:
                continue
            k = g.degree
            coeffs = [g.coefficient((i, k - i)) for i in range(k, -1, -1)]
            while coeffs and coeffs[0] == 0:
                coeffs.pop(0)
            if len(coeffs) - 1 <= k - 2:
                # a double root at infinity
                assert discriminant_binary_form(g) == 0
                continue
            f = [Fraction(c) for c in coeffs]
            fp = [c * (len(f) - 1 - i) for i, c in enumerate(f[:-1])]
            common = univariate_gcd(f, fp) if len(f) > 1 else [Fraction(1)]
            assert (discriminant_binary_form(g) == 0) == (len(common) > 1), f"disc/gcd mismatch for {g}"
        return "30 random binary forms"

    def aux_identity():
        h = parse_polynomial("x^2+y^2-2")
        sel = RootSelection.from_integer_root(h, (1, 1))
        for d in range(1, 60):
            aux = build_auxiliary(sel, d)
            assert aux.poly * aux.lambda_d == affine_substitute(h, d, aux.r_d)
            assert all(-d < r <= 0 for r in aux.r_d)
        for _ in range(30):
            a, b = rng.randint(1, 1000), rng.randint(1, 1000)
            assert sel.lam(a * b) == sel.lam(a) * sel.lam(b)
        return "d < 60 and 30 lambda pairs"

    def hensel():
        h = parse_polynomial("x^2+y^2-3")
        for p in (7, 11, 13):
            for root in find_roots_mod(h, p)[:5]:
                if root.nonsingular:
                    lifted = hensel_lift(h, root, 4)
                    assert h.evaluate(lifted.residue, p**4) == 0
        return "lifts to precision 4"

    def deligne_soundness():
        for _ in range(20):
            g = random_binary_form(rng, 3)
            if g.is_zero() or g.degree != 3:
                continue
            v = deligne_certify(g)
            smooth_somewhere = any(smooth_mod_p(g, p).smooth for p in (5, 7, 11) if g.coefficient_gcd() % p)
            if smooth_somewhere:
                assert v.status != "Refuted", f"unsound refutation for {g}"
        return "20 random cubic forms"

    def gradient_bound():
        g = parse_polynomial("x^4+x*y^3+y^4")
        for p in (5, 7, 11, 13, 97):
            assert gradient_locus_count(g, p) <= 9
        return "x^4+xy^3+y^4 at five primes"

    def sieve_period():
        g = parse_polynomial("x^2+y^2")
        prof = SieveProfile.build(g, 5)
        per = prof.period()
        for _ in range(30):
            n = (rng.randint(-500, 500), rng.randint(-500, 500))
            m = (n[0] + per * rng.randint(-3, 3), n[1] + per * rng.randint(-3, 3))
            assert sieve_membership(n, prof) == sieve_membership(m, prof)
        return f"period {per}"

    def gauss():
        for p in (3, 5, 7, 11, 13, 97):
            assert abs(abs(gauss_sum(1, p)) - math.sqrt(p)) < 1e-9
        return "six primes"

    def local_laws():
        g = parse_polynomial("x^2+y^2")
        assert sieved_local_sum(g, 9, 1, 3).value == 0
        prof = SieveProfile.build(g, 5)
        q1, q2 = 3, 5
        a = 1
        s = sieved_local_sum(g, q1 * q2, a, 5, prof).value
        s1 = sieved_local_sum(g, q1, a * pow(q2, -1, q1) % q1, 5, prof).value
        s2 = sieved_local_sum(g, q2, a * pow(q1, -1, q2) % q2, 5, prof).value
        assert abs(s - s1 * s2) < 1e-9
        return "vanishing at q=9; CRT at 15"

    def conjugate():
        g = parse_polynomial("x^2+y^2")
        s1 = sieved_weyl_sum(g, "0.1234", 30, 5).value
        s2 = sieved_weyl_sum(g, "-0.1234", 30, 5).value
        assert abs(s1 - s2.conjugate()) < 1e-12
        return "alpha = 0.1234"

    def diffset_oracle():
        for _ in range(20):
            N = rng.randint(1, 16)
            X = rng.sample(range(1, N + 2), rng.randint(0, min(4, N)))
            res = solve_exact(X, N)
            assert res.exact == brute_force(X, N)
            assert verify_witness(res.witness, X)
            assert res.lower_bound_formula <= res.greedy <= res.exact
        return "20 random instances"

    for name, fn in [
        ("homogeneous reconstruction", reconstruction),
        ("Euler identity", euler),
        ("substitution homomorphism", substitution),
        ("discriminant vs repeated factor", discriminant),
        ("auxiliary identity and lambda multiplicativity", aux_identity),
        ("Hensel lifts verify", hensel),
        ("Deligne certificate soundness", deligne_soundness),
        ("gradient locus bound", gradient_bound),
        ("sieve membership periodicity", sieve_period),
        ("Gauss sum magnitude", gauss),
        ("local vanishing and CRT", local_laws),
        ("conjugate symmetry", conjugate),
        ("exact solver vs brute force", diffset_oracle),
    ]:
        results.append(_check(name, fn))
    return results
