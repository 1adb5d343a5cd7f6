"""Gradient sieve: gamma(p), j(p), the weight w and membership in W(Y)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import primes_upto, valuation
from .errors import BudgetExceeded, ParameterError
from .poly import IntPolynomial, binomial_basis_coefficients, box_coords, eval_mod_grid, grid_coords

EXHAUSTIVE_LIMIT = 10**6
DEFAULT_ERROR_KNOB = 50


def _identically_zero_exhaustive(f: IntPolynomial, q: int) -> bool:
    vals = eval_mod_grid(f, grid_coords(q, f.num_vars), q)
    return not np.any(vals)


def _vanishing_exponent(f: IntPolynomial, p: int):
    """Largest e with f identically zero mod p^e, via the binomial basis (None if f = 0)."""
    coeffs = binomial_basis_coefficients(f)
    if not coeffs:
        return None
    return min(valuation(c, p) for c in coeffs.values())


def local_vanishing_order(g: IntPolynomial, p: int, max_gamma: int = 12,
                          exhaustive_limit: int = EXHAUSTIVE_LIMIT, method: str = "auto") -> int:
    """Least gamma such that some partial of g is not identically zero on (Z/p^gamma)^l.

    ``method`` is "exhaustive", "binomial" or "auto" (exhaustive while
    p^(gamma l) <= exhaustive_limit, then the binomial-basis criterion).
    """
    grad = [d for d in g.gradient() if not d.is_zero()]
    ell = g.num_vars
    if not grad:
        raise ParameterError("gradient is identically zero; gamma is undefined")
    if method == "binomial":
        gamma = 1 + min(_vanishing_exponent(d, p) for d in grad)
    else:
        gamma = None
        for t in range(1, max_gamma + 1):
            q = p**t
            if q**ell > exhaustive_limit:
                if method == "exhaustive":
                    raise BudgetExceeded(f"identical-vanishing scan mod {p}^{t}", q**ell, exhaustive_limit)
                gamma = 1 + min(_vanishing_exponent(d, p) for d in grad)
                break
            if not all(_identically_zero_exhaustive(d, q) for d in grad):
                gamma = t
                break
        if gamma is None:
            gamma = max_gamma + 1
    if gamma > max_gamma:
        k = g.degree
        cap = min(math.factorial(k) * d.coefficient_gcd() for d in grad)
        raise ParameterError(
            f"gamma({p}) exceeds max_gamma={max_gamma}; a priori cap: p^(gamma-1) divides k!*gcd = {cap}"
        )
    return gamma


def gradient_zero_mask(g: IntPolynomial, coords, modulus: int, grad=None):
    grad = grad if grad is not None else g.gradient()
    shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
    mask = np.ones(shape, dtype=bool)
    for d in grad:
        mask &= np.broadcast_to(eval_mod_grid(d, coords, modulus), shape) == 0
    return mask


def gradient_zero_count(g: IntPolynomial, p: int, gamma: int | None = None,
                        budget: int = 10**7) -> int:
    """j(p): number of s in (Z/p^gamma)^l with grad g(s) = 0 mod p^gamma."""
    if gamma is None:
        gamma = local_vanishing_order(g, p)
    q = p**gamma
    if q**g.num_vars > budget:
        raise BudgetExceeded(f"gradient zero count mod {p}^{gamma}", q**g.num_vars, budget)
    return int(gradient_zero_mask(g, grid_coords(q, g.num_vars), q).sum())


@dataclass(frozen=True)
class SieveEntry:
    p: int
    gamma: int
    j: int

    @property
    def modulus(self):
        return self.p**self.gamma


@dataclass
class SieveProfile:
    polynomial: IntPolynomial
    Y: float
    table: tuple
    weight: Fraction

    @classmethod
    def build(cls, g: IntPolynomial, Y, max_gamma: int = 12, budget: int = 10**7):
        ell = g.num_vars
        rows = []
        w = Fraction(1)
        for p in primes_upto(math.floor(Y)):
            gamma = local_vanishing_order(g, p, max_gamma)
            j = gradient_zero_count(g, p, gamma, budget)
            rows.append(SieveEntry(p, gamma, j))
            w *= 1 - Fraction(j, p ** (gamma * ell))
        return cls(g, Y, tuple(rows), w)

    def entry(self, p):
        for e in self.table:
            if e.p == p:
                return e
        return None

    def period(self):
        out = 1
        for e in self.table:
            out *= e.modulus
        return out

    def weight_excluding(self, q):
        """Product of the local factors over p <= Y with p^gamma not dividing q."""
        ell = self.polynomial.num_vars
        w = Fraction(1)
        for e in self.table:
            if q % e.modulus:
                w *= 1 - Fraction(e.j, e.p ** (e.gamma * ell))
        return w

    def to_json(self):
        return {
            "Y": self.Y,
            "table": [{"p": e.p, "gamma": e.gamma, "j": e.j} for e in self.table],
            "weight": {"num": str(self.weight.numerator), "den": str(self.weight.denominator)},
        }


def sieve_membership(n, profile: SieveProfile) -> bool:
    """True iff grad g(n) is nonzero mod p^gamma(p) for every p <= Y."""
    g = profile.polynomial
    if len(n) != g.num_vars:
        raise ValueError("point has wrong dimension")
    grad = g.gradient()
    for e in profile.table:
        q = e.modulus
        if all(d.evaluate(n, q) == 0 for d in grad):
            return False
    return True


def sieve_mask(profile: SieveProfile, coords, only_dividing: int | None = None) -> np.ndarray:
    """Boolean mask of W(Y) over a coordinate mesh.

    With ``only_dividing=q`` only primes with p^gamma | q sieve (the set W^q(Y)).
    """
    g = profile.polynomial
    grad = g.gradient()
    shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
    keep = np.ones(shape, dtype=bool)
    for e in profile.table:
        if only_dividing is not None and only_dividing % e.modulus:
            continue
        keep &= ~gradient_zero_mask(g, coords, e.modulus, grad)
    return keep


@dataclass
class SieveCount:
    count: int
    main_term: Fraction
    error: Fraction
    error_bound: float
    knob: float

    @property
    def within_bound(self):
        return abs(self.error) <= self.error_bound

    def to_json(self):
        return {
            "count": self.count,
            "main_term": f"{self.main_term.numerator}/{self.main_term.denominator}",
            "error": f"{self.error.numerator}/{self.error.denominator}",
            "error_float": float(self.error),
            "error_bound": self.error_bound,
            "knob_C": self.knob,
            "within_bound": self.within_bound,
        }


def sieve_count_check(profile: SieveProfile, box, knob: float = DEFAULT_ERROR_KNOB,
                      budget: int = 10**8) -> SieveCount:
    """Exact |[1,x_1] x ... x [1,x_l] intersect W(Y)| against the product main term.

    The reported bound is C * (volume / min side) * (log Y)^2, the two-variable
    error shape with an explicit knob C.
    """
    ell = profile.polynomial.num_vars
    sides = [int(b) for b in box]
    if len(sides) != ell:
        raise ValueError("box needs one side per variable")
    vol = math.prod(sides)
    if vol > budget:
        raise BudgetExceeded("sieve box scan", vol, budget)
    count = 0
    # stream over the first axis to bound memory
    row = vol // sides[0] if vol else 1
    step = max(1, min(sides[0], 2**22 // max(row, 1)))
    for lo in range(1, sides[0] + 1, step):
        hi = min(sides[0], lo + step - 1)
        coords = box_coords([(lo, hi)] + [(1, s) for s in sides[1:]])
        count += int(sieve_mask(profile, coords).sum())
    main = vol * profile.weight
    err = count - main
    logy = math.log(profile.Y) if profile.Y > 1 else 0.0
    bound = knob * (vol / min(sides)) * logy**2 if sides else 0.0
    return SieveCount(count, main, err, bound, knob)
