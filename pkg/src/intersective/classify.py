"""Nonsingularity hierarchy: smooth mod p, Deligne, rank, strongly Deligne, dimension lowering."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy

from .arith import primes_upto
from .errors import BudgetExceeded, NotHomogeneous
from .padic import RootSelection, build_auxiliary, intersectivity_scan
from .poly import (
    IntPolynomial,
    affine_substitute,
    discriminant_binary_form,
    eval_mod_grid,
    grid_coords,
    repeated_factor,
)

DEFAULT_SCAN_BUDGET = 10**7


def default_scan_primes(k: int):
    """The primes below 100 not dividing k."""
    return [p for p in primes_upto(100) if k % p]


@dataclass
class ClassificationVerdict:
    property: str
    status: str  # Certified | Refuted | Unknown
    witness: object = None
    certificate: list = field(default_factory=list)
    budget_used: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "property": self.property,
            "status": self.status,
            "witness": _jsonable(self.witness),
            "certificate": list(self.certificate),
            "budget_used": dict(self.budget_used),
        }


def _jsonable(obj):
    if isinstance(obj, IntPolynomial):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _require_form(g):
    if g.is_zero() or not g.is_homogeneous():
        raise NotHomogeneous("a nonzero homogeneous form is required")


def _to_sympy(g: IntPolynomial):
    gens = sympy.symbols(f"x1:{g.num_vars + 1}")
    expr = sympy.Integer(0)
    for e, c in g.items():
        term = sympy.Integer(c)
        for v, k in zip(gens, e):
            if k:
                term *= v**k
        expr += term
    return expr, gens


@lru_cache(maxsize=4096)
def _gradient_ideal_zero_dim(g: IntPolynomial, p: int | None):
    """Whether g and its partials have only the trivial common zero over the algebraic closure."""
    expr, gens = _to_sympy(g)
    polys = [expr] + [sympy.diff(expr, v) for v in gens]
    polys = [q for q in polys if q != 0]
    opts = {"modulus": p} if p else {}
    G = sympy.groebner(polys, *gens, order="grevlex", **opts)
    return bool(G.is_zero_dimensional)


# ---------------------------------------------------------------------------
# smoothness modulo p


@dataclass
class SmoothResult:
    prime: int
    smooth: bool
    point: tuple | None = None
    points_scanned: int = 0
    method: str = ""

    def to_json(self):
        out = {"p": self.prime, "smooth": self.smooth, "method": self.method, "points_scanned": self.points_scanned}
        if self.point is not None:
            out["singular_point"] = list(self.point)
        return out


def projective_points(num_vars: int, p: int):
    """Yield (leading position, coordinate arrays) blocks covering P^(l-1)(F_p).

    Representatives have first nonzero coordinate 1; blocks come in the
    canonical order (1:*), (0:1:*), ... with the free coordinates in lex order.
    """
    for lead in range(num_vars):
        free = num_vars - lead - 1
        grid = grid_coords(p, free) if free else []
        coords = []
        for v in range(num_vars):
            if v < lead:
                coords.append(np.zeros((1,) * max(free, 1), dtype=np.int64))
            elif v == lead:
                coords.append(np.ones((1,) * max(free, 1), dtype=np.int64))
            else:
                coords.append(grid[v - lead - 1])
        yield lead, free, coords


def _singular_scan(g, p, budget):
    ell = g.num_vars
    total = (p**ell - 1) // (p - 1)
    if total > budget:
        raise BudgetExceeded(f"projective scan mod {p}", total, budget)
    grad = g.gradient()
    scanned = 0
    for lead, free, coords in projective_points(ell, p):
        shape = (p,) * free if free else (1,)
        mask = np.broadcast_to(eval_mod_grid(g, coords, p), shape) == 0
        for d in grad:
            mask = mask & (np.broadcast_to(eval_mod_grid(d, coords, p), shape) == 0)
        hits = np.argwhere(mask)
        if len(hits):
            idx = hits[0]
            pt = [0] * lead + [1] + ([int(v) for v in idx] if free else [])
            scanned += int(np.ravel_multi_index(idx, shape)) + 1 if free else 1
            return tuple(pt), scanned
        scanned += int(np.prod(shape))
    return None, scanned


def smooth_mod_p(g: IntPolynomial, p: int, budget: int = DEFAULT_SCAN_BUDGET) -> SmoothResult:
    """Smoothness of the form g over the algebraic closure of F_p.

    A scan of P^(l-1)(F_p) finds the first F_p-rational singular point.  With
    none found, smoothness is certified algebraically: the binary discriminant
    mod p for two variables (p not dividing k), a Groebner basis of the
    gradient ideal over F_p otherwise.  A singular point defined only over an
    extension field is reported with ``point=None``.
    """
    _require_form(g)
    if g.coefficient_gcd() % p == 0:
        return SmoothResult(p, False, (1,) + (0,) * (g.num_vars - 1), 1, "form vanishes mod p")
    point, scanned = _singular_scan(g, p, budget)
    if point is not None:
        return SmoothResult(p, False, point, scanned, "F_p point scan")
    k = g.degree
    ell = g.num_vars
    if ell == 1:
        return SmoothResult(p, True, None, scanned, "monomial form")
    if ell == 2 and k >= 2 and k % p:
        reduced = IntPolynomial(2, {e: c % p for e, c in g.terms.items()})
        if reduced.degree == k:
            smooth = discriminant_binary_form(reduced) % p != 0
            return SmoothResult(p, smooth, None, scanned, "binary discriminant mod p")
    if k == 1:
        return SmoothResult(p, True, None, scanned, "linear form")
    smooth = _gradient_ideal_zero_dim(g, p)
    return SmoothResult(p, smooth, None, scanned, "Groebner basis of gradient ideal over F_p")


def _is_singular_point(g, pt):
    return g.evaluate(pt) == 0 and all(d.evaluate(pt) == 0 for d in g.gradient())


def find_rational_singular_point(g: IntPolynomial, height: int | None = None):
    """Primitive integer singular point of small height, first nonzero entry positive."""
    ell = g.num_vars
    if height is None:
        height = {2: 20, 3: 6, 4: 3}.get(ell, 2)
    for r in range(1, height + 1):
        for pt in itertools.product(range(-r, r + 1), repeat=ell):
            if max(abs(c) for c in pt) != r:
                continue
            first = next(c for c in pt if c)
            if first < 0 or np.gcd.reduce(np.abs(pt)) != 1:
                continue
            if _is_singular_point(g, pt):
                return pt
    return None


# ---------------------------------------------------------------------------
# Deligne


def deligne_certify(h: IntPolynomial, primes=None, budget: int = DEFAULT_SCAN_BUDGET) -> ClassificationVerdict:
    """Certify or refute that the top-degree part of h is smooth over Q-bar."""
    k = h.degree
    if k is None or k < 1:
        return ClassificationVerdict("Deligne", "Refuted", {"degree": k}, ["degree must be at least 1"])
    top = h.top_part()
    ell = h.num_vars
    cert = [f"top-degree part h^{k} = {top}"]
    if ell == 1:
        cert.append("a single-variable monomial form has no projective singular point")
        return ClassificationVerdict("Deligne", "Certified", {"rank": 1}, cert)
    if ell == 2:
        if k == 1:
            cert.append("linear forms are smooth")
            return ClassificationVerdict("Deligne", "Certified", {"discriminant": None}, cert)
        disc = discriminant_binary_form(top)
        cert.append(f"discriminant of h^{k} is {disc}")
        if disc != 0:
            return ClassificationVerdict("Deligne", "Certified", {"discriminant": disc}, cert)
        fac = repeated_factor(top)
        witness = {"discriminant": 0, "repeated_factor": str(fac), "rank": 1}
        cert.append(f"h^{k} has the repeated factor {fac}")
        if fac is not None and fac.degree == 1:
            a, b = fac.coefficient((1, 0)), fac.coefficient((0, 1))
            pt = (-b, a) if -b > 0 or (b == 0 and a > 0) else (b, -a)
            witness["singular_point"] = list(pt)
            cert.append(f"singular point ({pt[0]}:{pt[1]}) re-verified by evaluation")
        return ClassificationVerdict("Deligne", "Refuted", witness, cert)
    pt = find_rational_singular_point(top)
    if pt is not None:
        assert _is_singular_point(top, pt)
        cert.append(f"h^{k} and its gradient vanish at {pt}")
        return ClassificationVerdict("Deligne", "Refuted", {"singular_point": list(pt)}, cert)
    primes = default_scan_primes(k) if primes is None else [p for p in primes if k % p]
    tried = []
    for p in primes:
        try:
            res = smooth_mod_p(top, p, budget)
        except BudgetExceeded:
            break
        tried.append(p)
        if res.smooth:
            cert.append(f"h^{k} smooth mod {p} ({res.method}); p does not divide k, so smooth over Q-bar")
            return ClassificationVerdict("Deligne", "Certified", {"prime": p}, cert, {"primes_tried": len(tried)})
    if not _gradient_ideal_zero_dim(top, None):
        cert.append("Groebner basis over Q shows a singular point over Q-bar, but no rational witness was found")
    return ClassificationVerdict("Deligne", "Unknown", None, cert, {"primes_tried": len(tried)})


def is_deligne_mod_p(h: IntPolynomial, p: int, budget: int = DEFAULT_SCAN_BUDGET) -> bool:
    """Deligne property of the reduction of h modulo p."""
    red = h.reduce_mod(p)
    k = red.degree
    if k is None or k == 0 or k % p == 0:
        return False
    return smooth_mod_p(red.top_part(), p, budget).smooth


# ---------------------------------------------------------------------------
# rank


@dataclass
class RankResult:
    rank: int | None
    interval: tuple
    method: str
    evidence: dict = field(default_factory=dict)
    heuristic: bool = False

    def to_json(self):
        out = {"rank": self.rank, "interval": list(self.interval), "method": self.method}
        if self.heuristic:
            out["heuristic"] = True
        if self.evidence:
            out["evidence"] = _jsonable(self.evidence)
        return out


def is_squarefree(g: IntPolynomial) -> bool:
    expr, gens = _to_sympy(g)
    _, factors = sympy.sqf_list(expr, *gens)
    return all(m == 1 for _, m in factors)


def singular_point_counts(g: IntPolynomial, primes, budget=DEFAULT_SCAN_BUDGET):
    """Number of F_p-rational projective singular points of g for each prime."""
    grad = g.gradient()
    out = {}
    for p in primes:
        total = (p**g.num_vars - 1) // (p - 1)
        if total > budget:
            break
        count = 0
        for _, free, coords in projective_points(g.num_vars, p):
            shape = (p,) * free if free else (1,)
            mask = np.broadcast_to(eval_mod_grid(g, coords, p), shape) == 0
            for d in grad:
                mask = mask & (np.broadcast_to(eval_mod_grid(d, coords, p), shape) == 0)
            count += int(mask.sum())
        out[p] = count
    return out


def _growth_slope(counts):
    ps = np.array(list(counts), dtype=float)
    cs = np.array(list(counts.values()), dtype=float)
    if len(ps) < 2:
        return 0.0
    return float(np.polyfit(ps, cs, 1)[0])


def rank_estimate(g: IntPolynomial, primes=None) -> RankResult:
    """Codimension of the singular locus of the form g in P^(l-1).

    Exact for l <= 3.  A non-squarefree form has a divisor of singular
    points (rank 1); a squarefree form has rank >= 2, which for a plane
    curve already forces a finite singular locus.  For l >= 4 an interval
    is returned together with mod-p singular point counts as evidence.
    """
    _require_form(g)
    ell, k = g.num_vars, g.degree
    if ell == 1 or k == 1:
        return RankResult(ell, (ell, ell), "smooth (empty singular locus)")
    if ell == 2:
        sqf = discriminant_binary_form(g) != 0
        r = 2 if sqf else 1
        return RankResult(r, (r, r), "binary discriminant")
    if not is_squarefree(g):
        return RankResult(1, (1, 1), "repeated factor: singular locus contains a hypersurface")
    primes = primes or default_scan_primes(k)[:6]
    dv = deligne_certify(g)
    evidence = {}
    if ell == 3:
        counts = singular_point_counts(g, [p for p in primes if p > 3][:5])
        slope = _growth_slope(counts)
        bounded = max(counts.values(), default=0) <= (k - 1) * k * ell
        evidence = {"singular_counts": counts, "slope": slope, "bounded": bounded}
        if dv.status == "Certified":
            return RankResult(3, (3, 3), "smooth", evidence)
        smooth = _gradient_ideal_zero_dim(g, None)
        r = 3 if smooth else 2
        return RankResult(r, (r, r), "squarefree plane curve; Groebner basis over Q decides smoothness", evidence)
    if dv.status == "Certified":
        return RankResult(ell, (ell, ell), "smooth", dv.to_json())
    counts = singular_point_counts(g, [p for p in primes if p > 3][:4], budget=10**6)
    evidence = {"singular_counts": counts}
    hi = ell - 1 if dv.status == "Refuted" else ell
    return RankResult(None, (2, hi), "squarefree form; singular locus dimension unresolved", evidence, True)


# ---------------------------------------------------------------------------
# strongly Deligne


def _translate(h, n):
    return affine_substitute(h, 1, list(n))


def _has_linear_factor(h):
    expr, gens = _to_sympy(h)
    _, factors = sympy.factor_list(expr, *gens)
    for f, _ in factors:
        if sympy.Poly(f, *gens).total_degree() == 1:
            return str(f)
    return None


def _binary_top_disc_mod(hd, p):
    red = hd.reduce_mod(p)
    k = red.degree
    top = red.top_part()
    if k is None or k < 2 or top.num_vars != 2:
        return None, top
    return discriminant_binary_form(top) % p, top


def strongly_deligne_scan(h: IntPolynomial, sel: RootSelection | None = None, d_bound: int = 30,
                          prime_bound: int = 50) -> ClassificationVerdict:
    """Certify strongly Deligne via a sufficient criterion, else scan the (d, p) family."""
    ell, k = h.num_vars, h.degree
    cert = []
    dv = deligne_certify(h)
    if dv.status == "Refuted":
        return ClassificationVerdict("StronglyDeligne", "Refuted", {"d": 1, "deligne": dv.to_json()},
                                     ["h = h_1 is not Deligne over Q"] + dv.certificate)
    if sel is None:
        sel = RootSelection.choose(h)
    n = sel.integer_root
    if dv.status == "Certified" and ell >= 2:
        cert.append("h is Deligne: " + "; ".join(dv.certificate[1:]))
        if n is not None:
            t = _translate(h, n)
            top, bottom = t.top_part(), t.bottom_part()
            top_ok = deligne_certify(top).status == "Certified"
            bot_ok = not bottom.is_zero() and deligne_certify(bottom).status == "Certified"
            if top_ok and bot_ok:
                cert.append(f"integer root {list(n)}; top part {top} and bottom part {bottom} of the translate are smooth")
                return ClassificationVerdict("StronglyDeligne", "Certified", {"criterion": "integer_root"}, cert)
            m = sel.multiplicity(2)
            if m in (1, k):
                cert.append(f"integer root {list(n)} has multiplicity m_p = {m} in {{1, k}} for every p")
                return ClassificationVerdict("StronglyDeligne", "Certified", {"criterion": "multiplicity_1_or_k"}, cert)
        inter = intersectivity_scan(h)
        if inter.kind == "CertifiedAllPrimes":
            if k == 2:
                cert.append("k = 2 and h is intersective (" + inter.certificate[0] + ")")
                return ClassificationVerdict("StronglyDeligne", "Certified", {"criterion": "quadratic"}, cert)
            if ell >= 3:
                cert.append("l >= 3, Deligne and intersective forces geometric irreducibility")
                return ClassificationVerdict("StronglyDeligne", "Certified", {"criterion": "three_variables"}, cert)
            lin = _has_linear_factor(h)
            if lin is not None:
                cert.append(f"the factor {lin} is linear over Z, hence geometrically irreducible")
                return ClassificationVerdict("StronglyDeligne", "Certified", {"criterion": "geometric_factor"}, cert)
        else:
            cert.append(f"intersectivity scan: {inter.kind}")
    # empirical (d, p) scan
    failures = []
    checked = 0
    primes = primes_upto(prime_bound)
    for d in range(1, d_bound + 1):
        try:
            hd = build_auxiliary(sel, d).poly
        except Exception as exc:  # missing root data or non-integral quotient
            cert.append(f"d={d}: auxiliary polynomial unavailable ({exc})")
            continue
        for p in primes:
            checked += 1
            if is_deligne_mod_p(hd, p):
                continue
            red = hd.reduce_mod(p)
            entry = {"d": d, "p": p, "top_mod_p": str(red.top_part()), "degree_mod_p": red.degree}
            if ell == 2:
                disc, _ = _binary_top_disc_mod(hd, p)
                entry["disc_mod_p"] = disc
            failures.append(entry)
    d_eq_p = sorted({f["p"] for f in failures if f["d"] == f["p"]})
    cert.append(f"scanned {checked} (d, p) pairs with d <= {d_bound}, p <= {prime_bound}")
    if failures:
        cert.append(f"h_d mod p fails to be Deligne for {len(failures)} pairs; d = p family at primes {d_eq_p}")
    return ClassificationVerdict(
        "StronglyDeligne", "Unknown",
        {"failures": failures, "d_equals_p_primes": d_eq_p},
        cert, {"d_bound": d_bound, "prime_bound": prime_bound},
    )


# ---------------------------------------------------------------------------
# dimension lowering


@dataclass
class DimLowerResult:
    status: str  # Reduced | RankTooLow | Exhausted
    poly: IntPolynomial | None = None
    matrix: list | None = None
    steps: list = field(default_factory=list)
    trials: int = 0
    rank: object = None

    def to_json(self):
        return {
            "status": self.status,
            "poly": str(self.poly) if self.poly is not None else None,
            "poly_json": self.poly.to_json() if self.poly is not None else None,
            "matrix": self.matrix,
            "steps": self.steps,
            "trials": self.trials,
            "rank": self.rank,
        }


def _hyperplanes(n, height):
    yield (0,) * n
    for r in range(1, height + 1):
        for a in itertools.product(range(-r, r + 1), repeat=n):
            if max(abs(c) for c in a) == r:
                yield a


def _matmul(a, b):
    return [[sum(a[i][t] * b[t][j] for t in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def _smooth_certified(g):
    if g.is_zero():
        return False
    return deligne_certify(g).status == "Certified"


def dimension_lower(h: IntPolynomial, mode: str = "integer_root", trial_budget: int = 500,
                    coefficient_height: int = 3) -> DimLowerResult:
    """Restrict h to integer hyperplanes until the relevant parts become smooth.

    Each step substitutes x_l = a_1 x_1 + ... + a_(l-1) x_(l-1); the returned
    matrix M satisfies g = h(M x), so g(Z^r) lies inside h(Z^l).
    """
    if mode not in ("integer_root", "general"):
        raise ValueError("mode must be integer_root or general")
    if mode == "integer_root" and h.constant_term() != 0:
        raise ValueError("integer_root mode requires h(0) = 0")
    ell = h.num_vars

    def parts(g):
        return [g.top_part()] + ([g.bottom_part()] if mode == "integer_root" else [])

    ranks = [rank_estimate(part) for part in parts(h)]
    r = min((x.rank if x.rank is not None else x.interval[0]) for x in ranks)
    if r < 2:
        return DimLowerResult("RankTooLow", rank=r)
    matrix = [[int(i == j) for j in range(ell)] for i in range(ell)]
    if all(_smooth_certified(part) for part in parts(h)):
        return DimLowerResult("Reduced", h, matrix, [], 0, ell)
    g = h
    trials = 0
    steps = []
    while g.num_vars > r:
        n = g.num_vars - 1
        accepted = None
        for a in _hyperplanes(n, coefficient_height):
            trials += 1
            if trials > trial_budget:
                return DimLowerResult("Exhausted", g, matrix, steps, trials, r)
            step = [[int(i == j) for j in range(n)] for i in range(n)] + [list(a)]
            cand = affine_substitute(g, 1, [0] * g.num_vars, step)
            cparts = parts(cand)
            if any(p.is_zero() or p.degree != q.degree for p, q in zip(cparts, parts(g))):
                continue
            if n == r:
                ok = all(_smooth_certified(p) for p in cparts)
            else:
                ok = all(is_squarefree(p) for p in cparts)
            if ok:
                accepted = (a, step, cand)
                break
        if accepted is None:
            return DimLowerResult("Exhausted", g, matrix, steps, trials, r)
        a, step, g = accepted
        matrix = _matmul(matrix, step)
        steps.append({"eliminated": f"x{n + 1}", "hyperplane": list(a)})
    return DimLowerResult("Reduced", g, matrix, steps, trials, r)


def gradient_locus_count(g: IntPolynomial, p: int, budget: int = DEFAULT_SCAN_BUDGET) -> int:
    """Number of x in F_p^l where every partial derivative of g vanishes."""
    ell = g.num_vars
    if p**ell > budget:
        raise BudgetExceeded(f"gradient locus scan mod {p}", p**ell, budget)
    coords = grid_coords(p, ell)
    mask = np.ones((p,) * ell, dtype=bool)
    for d in g.gradient():
        mask &= np.broadcast_to(eval_mod_grid(d, coords, p), mask.shape) == 0
    return int(mask.sum())
