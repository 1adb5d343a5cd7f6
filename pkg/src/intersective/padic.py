"""p-adic root data: finding, lifting, multiplicities, auxiliary polynomials."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from .arith import crt, factorint, primes_upto, valuation
from .errors import BudgetExceeded, HenselFailure, MissingRootData
from .poly import IntPolynomial, affine_substitute, eval_mod_grid, grid_coords, multi_indices

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class PAdicRoot:
    """A root of h modulo p^precision.

    ``exact`` holds an integer vector when the residue comes from an exact
    integer root, in which case the root is valid at every precision.
    """

    prime: int
    precision: int
    residue: tuple
    multiplicity: int
    nonsingular: bool
    exact: tuple | None = None
    caveat: bool = False

    @property
    def modulus(self):
        return self.prime**self.precision

    def to_json(self):
        out = {"p": self.prime, "j": self.precision, "residue": list(self.residue), "m": self.multiplicity}
        if self.exact is not None:
            out["exact"] = list(self.exact)
        if self.caveat:
            out["caveat"] = True
        return out


def multiplicity_at_root(h: IntPolynomial, residue, prime=None, precision=None, exact=False):
    """Least |i| with a nonvanishing i-th partial at the root, plus a caveat flag.

    With ``exact=True`` the residue is treated as an integer root and partials
    are evaluated in Z.  Otherwise nonvanishing is certified modulo
    prime**precision; the caveat is set when some order below the answer
    vanished only modulo that power.
    """
    k = h.degree or 0
    ell = h.num_vars
    mod = None if exact else prime**precision
    for t in range(0, k + 1):
        for idx in multi_indices(ell, t):
            val = h.taylor_coefficient(idx).evaluate(residue, mod)
            if val != 0:
                return t, (not exact and t > 1)
    return k, not exact


def _root_from(h, p, j, residue, exact=None):
    residue = tuple(int(r) % p**j for r in residue)
    base = exact if exact is not None else residue
    m, caveat = multiplicity_at_root(h, base, p, j, exact=exact is not None)
    grad = [g.evaluate(base, p) for g in h.gradient()]
    nonsingular = any(grad)
    return PAdicRoot(p, j, residue, m, nonsingular, tuple(exact) if exact is not None else None, caveat)


def find_roots_mod(h: IntPolynomial, p: int, j: int = 1, budget: int = DEFAULT_BUDGET):
    """All roots of h in (Z/p^j)^ell by exhaustive scan, in lexicographic order."""
    ell = h.num_vars
    q = p**j
    if j > 1 and q**ell > budget:
        raise BudgetExceeded(f"root scan mod {p}^{j}", q**ell, budget)
    vals = eval_mod_grid(h, grid_coords(q, ell), q)
    hits = np.argwhere(vals == 0)
    return [_root_from(h, p, j, tuple(int(v) for v in row)) for row in hits]


def hensel_lift(h: IntPolynomial, root: PAdicRoot, target_precision: int) -> PAdicRoot:
    """Lift a root to precision ``target_precision`` by Newton steps in one coordinate.

    Needs h(n) = 0 mod p^(2g-1) with grad h(n) != 0 mod p^g.  The output
    agrees with the input modulo p^(j-e), e the gradient valuation (so modulo
    p^j for nonsingular roots).
    """
    p = root.prime
    v = int(target_precision)
    if v <= root.precision:
        return root
    if root.exact is not None:
        return _root_from(h, p, v, root.exact, exact=root.exact)
    n = list(root.residue)
    grad = h.gradient()
    gvals = [g.evaluate(n) for g in grad]
    vals = [valuation(g, p) for g in gvals]
    finite = [x for x in vals if x is not None]
    if not finite:
        raise HenselFailure(f"gradient vanishes at {tuple(n)}; root is singular at every precision")
    e = min(finite)
    hv = h.evaluate(n)
    if hv != 0 and valuation(hv, p) < 2 * e + 1:
        raise HenselFailure(
            f"need h(n) = 0 mod {p}^{2 * e + 1} but valuation is {valuation(hv, p)}"
        )
    i = vals.index(e)
    mod = p**v
    pe = p**e
    for _ in range(4 * v + 8):
        hv = h.evaluate(n)
        if hv % mod == 0:
            break
        unit = grad[i].evaluate(n) // pe
        t = (-(hv // pe) * pow(unit, -1, mod)) % mod
        n[i] += t
    else:  # pragma: no cover - Newton converges quadratically
        raise HenselFailure("Newton iteration did not converge")
    lifted = _root_from(h, p, v, n)
    if h.evaluate(lifted.residue, mod) != 0:  # pragma: no cover
        raise HenselFailure("lift failed verification")
    return lifted


def _box_points(ell, height):
    """Integer points ordered by max-norm, then lexicographically."""
    yield (0,) * ell
    for r in range(1, height + 1):
        for pt in itertools.product(range(-r, r + 1), repeat=ell):
            if max(abs(c) for c in pt) == r:
                yield pt


def find_integer_root(h: IntPolynomial, height: int | None = None):
    """First integer root in a small box, ordered by max-norm then lex; None if none."""
    ell = h.num_vars
    if height is None:
        height = {1: 50, 2: 12, 3: 5}.get(ell, 2)
    for pt in _box_points(ell, height):
        if h.evaluate(pt) == 0:
            return pt
    return None


def rational_roots(h: IntPolynomial, max_den: int = 6, height: int = 4):
    """Rational roots: exact via sympy for one variable, small-height search otherwise."""
    if h.is_zero():
        return []
    if h.num_vars == 1:
        import sympy

        x = sympy.Symbol("x")
        expr = sum(c * x ** e[0] for e, c in h.terms.items())
        out = sorted({Fraction(int(r.p), int(r.q)) for r in sympy.Poly(expr, x).ground_roots() if r.is_rational})
        return [(r,) for r in out]
    found = []
    ell = h.num_vars
    for den in range(1, max_den + 1):
        for num in _box_points(ell, height * den):
            if gcd(den, *num) != 1:
                continue
            # h(num/den) * den^k is an integer polynomial identity
            pt = tuple(Fraction(a, den) for a in num)
            if _eval_fraction(h, pt) == 0:
                found.append(pt)
                break
    return found


def _eval_fraction(h, pt):
    total = Fraction(0)
    for e, c in h.terms.items():
        t = Fraction(c)
        for x, k in zip(pt, e):
            if k:
                t *= x**k
        total += t
    return total


# ---------------------------------------------------------------------------
# root selections and auxiliary polynomials


@dataclass
class RootSelection:
    """A choice of p-adic root z_p for every prime.

    Stored roots cover the primes up to ``bound``; beyond that (and for any
    prime without a stored root) the exact ``integer_root`` is used when set.
    """

    polynomial: IntPolynomial
    roots: dict = field(default_factory=dict)
    integer_root: tuple | None = None
    bound: int = 0
    rule: str = "table"

    @classmethod
    def from_integer_root(cls, h: IntPolynomial, n):
        n = tuple(int(v) for v in n)
        if h.evaluate(n) != 0:
            raise ValueError(f"{n} is not a root")
        return cls(h, {}, n, 0, "integer_root")

    @classmethod
    def from_table(cls, h: IntPolynomial, table: dict, integer_root=None):
        """``table`` maps p -> residue tuple, or p -> (residue, precision), or p -> PAdicRoot."""
        roots = {}
        for p, spec in table.items():
            if isinstance(spec, PAdicRoot):
                r = spec
            elif isinstance(spec, dict):
                r = _root_from(h, p, spec.get("j", 1), spec["residue"], spec.get("exact"))
            elif len(spec) == 2 and isinstance(spec[0], (tuple, list)):
                r = _root_from(h, p, spec[1], spec[0])
            else:
                r = _root_from(h, p, 1, spec)
            if h.evaluate(r.residue, r.modulus) != 0:
                raise ValueError(f"residue {r.residue} is not a root mod {p}^{r.precision}")
            roots[int(p)] = r
        sel = cls(h, roots, tuple(integer_root) if integer_root is not None else None,
                  max(roots, default=0), "table")
        return sel

    @classmethod
    def choose(cls, h: IntPolynomial, prime_bound: int = 50, budget: int = DEFAULT_BUDGET,
               integer_height: int | None = None):
        """Deterministic selection: integer roots, then nonsingular, then low multiplicity."""
        n = find_integer_root(h, integer_height)
        if n is not None:
            return cls.from_integer_root(h, n)
        roots = {}
        for p in primes_upto(prime_bound):
            cands = find_roots_mod(h, p, 1, budget)
            if not cands:
                continue
            best = min(cands, key=lambda r: (not r.nonsingular, r.multiplicity, r.residue))
            roots[p] = best
        return cls(h, roots, None, prime_bound, "table")

    def base_root(self, p):
        if p in self.roots:
            return self.roots[p]
        if self.integer_root is not None:
            return _root_from(self.polynomial, p, 1, self.integer_root, self.integer_root)
        raise MissingRootData(f"no root data for prime {p}")

    def root_at(self, p, precision):
        root = self.base_root(p)
        if root.precision >= precision:
            return root
        return hensel_lift(self.polynomial, root, precision)

    def multiplicity(self, p):
        return self.base_root(p).multiplicity

    def lam(self, d):
        out = 1
        for p, e in factorint(d).items():
            out *= p ** (self.multiplicity(p) * e)
        return out

    def shift(self, d):
        """r_d in (-d, 0]^ell with r_d = z_p mod p^e for every p^e || d."""
        ell = self.polynomial.num_vars
        if d == 1:
            return (0,) * ell
        fac = factorint(d)
        moduli = [p**e for p, e in fac.items()]
        residues = [self.root_at(p, e).residue for p, e in fac.items()]
        out = []
        for i in range(ell):
            c = crt([r[i] % m for r, m in zip(residues, moduli)], moduli) % d
            out.append(c - d if c else 0)
        return tuple(out)

    def to_json(self):
        return {
            "poly": self.polynomial.to_json(),
            "rule": self.rule,
            "integer_root": list(self.integer_root) if self.integer_root is not None else None,
            "roots": [self.roots[p].to_json() for p in sorted(self.roots)],
        }

    @classmethod
    def from_json(cls, data):
        h = IntPolynomial.from_json(data["poly"])
        ir = data.get("integer_root")
        if data["rule"] == "integer_root":
            return cls.from_integer_root(h, ir)
        table = {r["p"]: {"residue": r["residue"], "j": r["j"], "exact": r.get("exact")} for r in data["roots"]}
        return cls.from_table(h, table, ir)


@dataclass(frozen=True)
class AuxiliaryPolynomial:
    d: int
    r_d: tuple
    lambda_d: int
    poly: IntPolynomial
    base: IntPolynomial

    def to_json(self):
        return {
            "d": self.d,
            "r_d": list(self.r_d),
            "lambda": str(self.lambda_d),
            "poly": self.poly.to_json(),
            "content": str(self.poly.content()),
        }


def build_auxiliary(sel: RootSelection, d: int) -> AuxiliaryPolynomial:
    """h_d(x) = h(r_d + d x) / lambda(d); raises NonIntegralQuotient on failure."""
    if d < 1:
        raise ValueError("d must be positive")
    h = sel.polynomial
    r = sel.shift(d)
    lam_d = sel.lam(d)
    hd = affine_substitute(h, d, r).exact_divide(lam_d)
    return AuxiliaryPolynomial(d, r, lam_d, hd, h)


def trivial_auxiliary(g: IntPolynomial) -> AuxiliaryPolynomial:
    """Wrap a polynomial as its own d = 1 auxiliary polynomial."""
    return AuxiliaryPolynomial(1, (0,) * g.num_vars, 1, g, g)


# ---------------------------------------------------------------------------
# intersectivity


@dataclass
class IntersectivityVerdict:
    kind: str  # CertifiedAllPrimes | CertifiedUpTo | NonIntersectiveWitness | Unknown
    bound: int | None = None
    witness_q: int | None = None
    prime: int | None = None
    reason: str = ""
    certificate: list = field(default_factory=list)

    def to_json(self):
        out = {"verdict": self.kind}
        for key in ("bound", "witness_q", "prime"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.reason:
            out["reason"] = self.reason
        out["certificate"] = list(self.certificate)
        return out


def _hensel_ok(h, n, p):
    """Whether the integer vector n satisfies the lifting hypothesis at p."""
    hv = h.evaluate(n)
    vals = [valuation(g.evaluate(n), p) for g in h.gradient()]
    finite = [v for v in vals if v is not None]
    if not finite:
        return hv == 0
    e = min(finite)
    return hv == 0 or valuation(hv, p) >= 2 * e + 1


def _prime_search(h, p, depth_budget, budget):
    """Search roots mod p, p^2, ... for one satisfying the lifting hypothesis.

    Returns ("ok", j) | ("none", j) (no roots mod p^j) | ("unknown", j).
    """
    ell = h.num_vars
    frontier = [r.residue for r in find_roots_mod(h, p, 1, budget)]
    j = 1
    nodes = 0
    while True:
        if not frontier:
            return "none", j
        for n in frontier:
            if _hensel_ok(h, n, p):
                return "ok", j
        if j >= depth_budget:
            return "unknown", j
        nxt = []
        q_next = p ** (j + 1)
        step = p**j
        for n in frontier:
            for t in itertools.product(range(p), repeat=ell):
                cand = tuple(a + step * b for a, b in zip(n, t))
                nodes += 1
                if nodes > budget:
                    return "unknown", j
                if h.evaluate(cand, q_next) == 0:
                    nxt.append(cand)
        frontier = nxt
        j += 1


def intersectivity_scan(h: IntPolynomial, prime_bound: int = 100, depth_budget: int = 8,
                        budget: int = DEFAULT_BUDGET) -> IntersectivityVerdict:
    """Finite certification of intersectivity, or a modulus with no roots."""
    if h.is_zero():
        return IntersectivityVerdict("NonIntersectiveWitness", witness_q=1, reason="zero polynomial")
    n = find_integer_root(h)
    if n is not None:
        return IntersectivityVerdict(
            "CertifiedAllPrimes", certificate=[f"integer root {list(n)}: z_p = n for every prime"]
        )
    rat = rational_roots(h)
    if rat:
        dens = [lcm(*(x.denominator for x in pt)) for pt in rat]
        if gcd(*dens) == 1 if len(dens) > 1 else dens[0] == 1:
            return IntersectivityVerdict(
                "CertifiedAllPrimes",
                certificate=[f"rational roots {[[str(x) for x in pt] for pt in rat]} with coprime denominators"],
            )
    cert = []
    for p in primes_upto(prime_bound):
        roots = find_roots_mod(h, p, 1, budget)
        if any(r.nonsingular for r in roots):
            cert.append(f"p={p}: nonsingular root mod p lifts (Hensel)")
            continue
        status, j = _prime_search(h, p, depth_budget, budget)
        if status == "ok":
            cert.append(f"p={p}: root mod {p}^{j} meets the lifting hypothesis")
        elif status == "none":
            return IntersectivityVerdict(
                "NonIntersectiveWitness", witness_q=p**j, prime=p,
                reason=f"no root of h in (Z/{p**j})^{h.num_vars}", certificate=cert,
            )
        else:
            return IntersectivityVerdict(
                "Unknown", bound=prime_bound, prime=p,
                reason=f"only singular roots found up to {p}^{j}", certificate=cert,
            )
    return IntersectivityVerdict("CertifiedUpTo", bound=prime_bound, certificate=cert)
