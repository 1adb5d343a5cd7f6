"""Complete, local and sieved exponential sums, oscillatory integrals, arcs."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import factorint
from .classify import is_deligne_mod_p
from .errors import BudgetExceeded, ParameterError, ResolutionError
from .padic import AuxiliaryPolynomial
from .poly import IntPolynomial, box_coords, eval_exact_grid, eval_mod_grid, grid_coords
from .sieve import SieveProfile, sieve_mask

TWO_PI = 2.0 * math.pi
BUCKET_LIMIT = 10**7
CYCLOTOMIC_LIMIT = 20000


# ---------------------------------------------------------------------------
# root-of-unity bucketing


def _centered(r, q):
    """Representatives of r mod q in (-q/2, q/2]."""
    r = np.asarray(r) % q
    return np.where(2 * r > q, r - q, r)


@lru_cache(maxsize=64)
def _unit_table(q: int):
    reps = _centered(np.arange(q, dtype=np.int64), q)
    ang = TWO_PI * reps / q
    return np.cos(ang), np.sin(ang)


def bucket_sum(counts, q: int) -> complex:
    """Sum_r counts[r] e(r/q) with correctly rounded real and imaginary parts."""
    counts = np.asarray(counts, dtype=np.int64)
    cos_t, sin_t = _unit_table(q)
    nz = np.nonzero(counts)[0]
    c = counts[nz].astype(float)
    re = math.fsum((c * cos_t[nz]).tolist())
    im = math.fsum((c * sin_t[nz]).tolist())
    return complex(re, im)


@lru_cache(maxsize=64)
def _cyclotomic(q: int):
    import sympy

    x = sympy.Symbol("x")
    return [int(c) for c in sympy.Poly(sympy.cyclotomic_poly(q, x), x).all_coeffs()]


def exact_zero(counts, q: int):
    """Whether Sum_r counts[r] zeta_q^r is exactly zero (None when q is too large to decide)."""
    if q == 1:
        return int(np.sum(counts)) == 0
    if q > CYCLOTOMIC_LIMIT:
        return None
    rem = [int(c) for c in counts]
    phi = _cyclotomic(q)  # monic, highest degree first
    deg = len(phi) - 1
    for top in range(len(rem) - 1, deg - 1, -1):
        c = rem[top]
        if c:
            for i, pc in enumerate(phi):
                rem[top - i] -= c * pc
    return not any(rem[:deg])


# ---------------------------------------------------------------------------
# reports


@dataclass
class ExpSumReport:
    value: complex
    bound: float | None
    terms: int
    params: dict = field(default_factory=dict)
    bound_expression: str = ""
    exact_zero: bool | None = None

    @property
    def ratio(self):
        if self.bound is None:
            return None
        mag = abs(self.value)
        if self.bound == 0:
            return 0.0 if (self.exact_zero or mag == 0) else math.inf
        return mag / self.bound

    def to_json(self):
        out = {"value": [self.value.real, self.value.imag], "bound": self.bound, "ratio": self.ratio}
        out["terms"] = self.terms
        out["bound_expression"] = self.bound_expression
        if self.exact_zero is not None:
            out["exact_zero"] = self.exact_zero
        out["params"] = dict(self.params)
        return out


def _as_poly(obj):
    return obj.poly if isinstance(obj, AuxiliaryPolynomial) else obj


def complete_sum_mod_p(h: IntPolynomial, p: int, budget: int = 10**7) -> ExpSumReport:
    """Sum over F_p^l of e(h(x)/p), with the Deligne bound when it applies."""
    h = _as_poly(h)
    ell, k = h.num_vars, h.degree
    if p**ell > budget:
        raise BudgetExceeded(f"complete sum mod {p}", p**ell, budget)
    vals = eval_mod_grid(h, grid_coords(p, ell), p)
    counts = np.bincount(np.broadcast_to(vals, (p,) * ell).ravel(), minlength=p)
    value = bucket_sum(counts, p)
    zero = exact_zero(counts, p)
    if zero:
        value = 0j
    bound = None
    expr = "none: h is not Deligne mod p"
    if k and is_deligne_mod_p(h, p):
        bound = float((k - 1) ** ell * p ** (ell / 2))
        expr = f"(k-1)^l p^(l/2) = {k - 1}^{ell} * {p}^({ell}/2)"
    return ExpSumReport(value, bound, p**ell, {"p": p, "k": k, "l": ell, "poly": str(h)}, expr, zero)


def gauss_sum(a: int, p: int) -> complex:
    """Sum_{x mod p} e(a x^2 / p)."""
    x = np.arange(p, dtype=np.int64)
    counts = np.bincount(a * x * x % p, minlength=p)
    return bucket_sum(counts, p)


def _local_bound(g, q, profile):
    """Explicit factorized bound for the sieved local sum, or (None, reason)."""
    ell, k = g.num_vars, g.degree
    total = 1.0
    parts = []
    for p, v in factorint(q).items():
        e = profile.entry(p)
        if e is not None and v >= 2 * e.gamma:
            return 0.0, f"vanishes: {p}^{v} with v >= 2*gamma({p}) = {2 * e.gamma}"
        if v != 1 or not is_deligne_mod_p(g, p):
            return None, f"no explicit bound for the factor {p}^{v}"
        base = (k - 1) ** ell * p ** (ell / 2)
        if e is not None and e.gamma == 1:
            total *= base + e.j
            parts.append(f"({k - 1}^{ell}*{p}^({ell}/2) + {e.j})")
        else:
            total *= base
            parts.append(f"{k - 1}^{ell}*{p}^({ell}/2)")
    return total, " * ".join(parts) if parts else "1"


def sieved_local_sum(g, q: int, a: int, Y, profile: SieveProfile | None = None,
                     budget: int = 10**7) -> ExpSumReport:
    """Sum over s in {0..q-1}^l intersect W^q(Y) of e(a g(s)/q)."""
    g = _as_poly(g)
    if math.gcd(a, q) != 1:
        raise ParameterError(f"gcd(a, q) = gcd({a}, {q}) != 1")
    ell = g.num_vars
    if q**ell > budget:
        raise BudgetExceeded(f"local sum mod {q}", q**ell, budget)
    if profile is None:
        profile = SieveProfile.build(g, Y)
    coords = grid_coords(q, ell)
    shape = (q,) * ell
    mask = np.broadcast_to(sieve_mask(profile, coords, only_dividing=q), shape)
    vals = np.broadcast_to(eval_mod_grid(g, coords, q), shape)
    res = vals[mask] * (a % q) % q
    counts = np.bincount(res, minlength=q)
    value = bucket_sum(counts, q)
    zero = exact_zero(counts, q)
    if zero:
        value = 0j
    bound, expr = _local_bound(g, q, profile)
    return ExpSumReport(value, bound, int(mask.sum()), {"q": q, "a": a, "Y": Y, "poly": str(g)}, expr, zero)


# ---------------------------------------------------------------------------
# frequencies and arcs


def to_fraction(alpha) -> Fraction:
    """Exact value of alpha; decimal strings and floats are read at 30 significant digits."""
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, int):
        return Fraction(alpha)
    if isinstance(alpha, str) and "/" in alpha:
        return Fraction(alpha.strip())
    with localcontext() as ctx:
        ctx.prec = 30
        dec = +Decimal(repr(alpha) if isinstance(alpha, float) else str(alpha).strip())
    return Fraction(dec)


def _split_alpha(alpha, beta=0.0, max_q=2**31):
    """(a, q, beta) with alpha + beta = a/q + beta and q small enough for exact residues."""
    r = to_fraction(alpha) % 1
    if r.denominator <= max_q:
        return r.numerator, r.denominator, float(beta)
    return 0, 1, float(r) + float(beta)


@dataclass
class ArcPoint:
    alpha: Fraction
    a: int
    q: int
    beta: Fraction
    q_bound: int
    arc: str
    gamma: float | None = None

    def to_json(self):
        return {
            "alpha": str(self.alpha),
            "a": self.a,
            "q": self.q,
            "a_over_q": f"{self.a}/{self.q}",
            "beta": float(self.beta),
            "Q": self.q_bound,
            "gamma": self.gamma,
            "arc": self.arc,
        }


def rational_approximation(alpha, Q: int, gamma: float | None = None) -> ArcPoint:
    """Last continued-fraction convergent a/q with q <= Q; Major iff |beta| < gamma."""
    if Q < 1:
        raise ParameterError("Q must be at least 1")
    x = to_fraction(alpha) % 1
    h0, h1, k0, k1 = 0, 1, 1, 0  # (h_{-2}, h_{-1}, k_{-2}, k_{-1})
    best = (0, 1)
    rest = x
    while True:
        c = math.floor(rest)
        h0, h1 = h1, c * h1 + h0
        k0, k1 = k1, c * k1 + k0
        if k1 > Q:
            break
        best = (h1, k1)
        frac = rest - c
        if frac == 0:
            break
        rest = 1 / frac
    a, q = best
    if a == q:
        # 1/1 is the nearest point; keep beta small by moving alpha down to (-1, 0]
        a, q = 0, 1
        x -= 1
    beta = x - Fraction(a, q)
    major = gamma is None or abs(beta) < gamma
    return ArcPoint(x, a, q, beta, Q, "Major" if major else "Minor", gamma)


# ---------------------------------------------------------------------------
# sieved Weyl sums


def _chunks(M, ell, limit=2**21):
    row = M ** (ell - 1)
    step = max(1, min(M, limit // max(row, 1)))
    for lo in range(1, M + 1, step):
        hi = min(M, lo + step - 1)
        yield box_coords([(lo, hi)] + [(1, M)] * (ell - 1)), (hi - lo + 1,) + (M,) * (ell - 1)


def sieved_weyl_sum(g, alpha, M: int, Y, profile: SieveProfile | None = None, beta: float = 0.0,
                    budget: int = 10**8) -> ExpSumReport:
    """S(alpha) = Sum over n in [1,M]^l intersect W(Y) of e(g(n) alpha), in lexicographic order.

    ``alpha`` may be a Fraction, an int, a decimal string or a float; an
    extra real ``beta`` is added to it.  Rational parts are handled exactly
    through residues mod q.
    """
    g = _as_poly(g)
    ell = g.num_vars
    if M**ell > budget:
        raise BudgetExceeded("Weyl sum box", M**ell, budget)
    if profile is None:
        profile = SieveProfile.build(g, Y)
    a, q, b = _split_alpha(alpha, beta)
    use_buckets = b == 0.0 and q <= BUCKET_LIMIT
    counts = np.zeros(q, dtype=np.int64) if use_buckets else None
    partial_re, partial_im = [], []
    terms = 0
    for coords, shape in _chunks(M, ell):
        mask = np.broadcast_to(sieve_mask(profile, coords), shape)
        vals = np.broadcast_to(eval_exact_grid(g, coords), shape)[mask]
        terms += int(mask.sum())
        if vals.dtype == object:
            res = np.array([int(v) * a % q for v in vals], dtype=np.int64)
        else:
            res = vals % q * a % q if q < 2**31 else np.array([int(v) * a % q for v in vals], dtype=np.int64)
        if use_buckets:
            counts += np.bincount(res, minlength=q)
            continue
        theta = _centered(res, q) / q + np.fmod(vals.astype(float) * b, 1.0)
        ang = TWO_PI * theta
        partial_re.append(math.fsum(np.cos(ang).tolist()))
        partial_im.append(math.fsum(np.sin(ang).tolist()))
    if use_buckets:
        value = bucket_sum(counts, q)
        if exact_zero(counts, q):
            value = 0j
    else:
        value = complex(math.fsum(partial_re), math.fsum(partial_im))
    params = {"alpha": str(to_fraction(alpha)), "beta": beta, "M": M, "Y": Y, "poly": str(g)}
    return ExpSumReport(value, float(terms), terms, params, "trivial bound |[1,M]^l intersect W(Y)|")


# ---------------------------------------------------------------------------
# oscillatory integrals


def min_quadrature_points(g: IntPolynomial, beta: float, X: float) -> int:
    k = g.degree or 0
    return math.ceil(20 * (1 + k * g.l1_norm() * X**k * abs(beta)))


def _simpson_weights(n, h):
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _univariate_parts(g):
    """(constant, {var: coefficient list highest first}) if g is a sum of univariate pieces."""
    const = 0
    pieces = {}
    for e, c in g.terms.items():
        used = [i for i, k in enumerate(e) if k]
        if not used:
            const += c
        elif len(used) == 1:
            v = used[0]
            pieces.setdefault(v, {})[e[v]] = c
        else:
            return None
    out = {}
    for v, d in pieces.items():
        deg = max(d)
        out[v] = [float(d.get(i, 0)) for i in range(deg, -1, -1)]
    return const, out


def _float_eval(g, xs_list):
    shape = np.broadcast_shapes(*(x.shape for x in xs_list))
    out = np.zeros(shape)
    for e, c in g.items():
        t = float(c)
        for x, k in zip(xs_list, e):
            if k:
                t = t * x**k
        out = out + t
    return out


def oscillatory_integral(g: IntPolynomial, beta: float, X: float, quadrature_points: int | None = None,
                         budget: int = 10**8) -> complex:
    """Integral over [0,X]^l of e(g(x) beta) by composite Simpson per axis."""
    g = _as_poly(g)
    ell = g.num_vars
    beta = float(beta)
    if beta == 0.0:
        return complex(float(X) ** ell)
    need = min_quadrature_points(g, beta, X)
    if quadrature_points is not None and quadrature_points < need:
        raise ResolutionError(f"{quadrature_points} points per axis < required {need}")
    n = quadrature_points if quadrature_points is not None else max(3 * need, 1001)
    if n % 2 == 0:
        n += 1
    xs = np.linspace(0.0, float(X), n)
    w = _simpson_weights(n, float(X) / (n - 1))
    sep = _univariate_parts(g)
    if sep is not None:
        const, pieces = sep
        out = cmath.exp(2j * math.pi * ((const * beta) % 1.0))
        for v in range(ell):
            if v not in pieces:
                out *= float(X)
                continue
            ph = np.fmod(np.polyval(pieces[v], xs) * beta, 1.0)
            out *= complex(np.dot(w, np.cos(TWO_PI * ph)), np.dot(w, np.sin(TWO_PI * ph)))
        return out
    if n**ell > budget:
        raise BudgetExceeded("oscillatory integral grid", n**ell, budget)
    total = 0j
    rest = [xs.reshape([1] * (i + 1) + [n] + [1] * (ell - i - 2)) for i in range(ell - 1)]
    wr = np.ones([1] + [n] * (ell - 1))
    for i in range(ell - 1):
        wr = wr * w.reshape([1] + [n if j == i else 1 for j in range(ell - 1)])
    for i0 in range(n):
        ph = np.fmod(_float_eval(g, [np.full((1,) * ell, xs[i0])] + rest) * beta, 1.0)
        ph = np.broadcast_to(ph, wr.shape)
        total += w[i0] * complex(np.sum(wr * np.cos(TWO_PI * ph)), np.sum(wr * np.sin(TWO_PI * ph)))
    return total


def vdc_fit(g: IntPolynomial, X: float = 1.0, beta_min: float = 10.0, beta_max: float = 1e4,
            num: int = 25):
    """Least-squares slope of log|I(beta)| against log beta over a log-spaced grid."""
    betas = np.geomspace(beta_min, beta_max, num)
    rows = [(float(b), abs(oscillatory_integral(g, b, X))) for b in betas]
    lb = np.log([r[0] for r in rows])
    li = np.log([r[1] for r in rows])
    slope, intercept = np.polyfit(lb, li, 1)
    return {"rows": rows, "slope": float(slope), "intercept": float(intercept),
            "predicted_slope": -1.0 / (g.degree or 1)}


# ---------------------------------------------------------------------------
# major and minor arcs


def major_arc_compare(g, a: int, q: int, beta: float, M: int, Y, profile: SieveProfile | None = None,
                      quadrature_points: int | None = None):
    """Sieved Weyl sum at a/q + beta against the local-times-singular-integral main term."""
    g = _as_poly(g)
    ell = g.num_vars
    if math.gcd(a, q) != 1:
        raise ParameterError(f"gcd(a, q) = gcd({a}, {q}) != 1")
    if profile is None:
        profile = SieveProfile.build(g, Y)
    computed = sieved_weyl_sum(g, Fraction(a, q), M, Y, profile, beta=beta).value
    local = sieved_local_sum(g, q, a, Y, profile)
    factor = profile.weight_excluding(q) / Fraction(q) ** ell
    integral = oscillatory_integral(g, beta, M, quadrature_points)
    main = float(factor) * local.value * integral
    abs_err = abs(computed - main)
    rel_err = abs_err / abs(main) if main != 0 else (0.0 if abs_err == 0 else math.inf)
    return {
        "a": a,
        "q": q,
        "beta": beta,
        "M": M,
        "Y": Y,
        "computed": computed,
        "main_term": main,
        "abs_error": abs_err,
        "rel_error": rel_err,
        "local_sum": local.value,
        "weight_factor": f"{factor.numerator}/{factor.denominator}",
        "integral": integral,
    }


def minor_arc_bound(cont, J, k, ell, X, Y, Z, q):
    """Weyl-sieve bound expression with every implicit constant set to 1."""
    lead = cont**6 * math.log(Y) ** (math.e * k) * X**ell
    inner = J * math.log(J * q * X) ** (k * k) * (1 / q + Z / X + q * Z**k / X**k)
    return lead * (math.exp(-math.log(Z) / math.log(Y)) + inner ** (2.0**-k))


MINOR_BOUND_EXPRESSION = (
    "cont^6 (log Y)^(e k) X^l (exp(-log Z / log Y) + (J log^(k^2)(J q X) (1/q + Z/X + q Z^k/X^k))^(2^-k))"
)


def minor_arc_report(g, alpha, X: int, Y, Z, q: int, a: int, profile: SieveProfile | None = None,
                     compute_sum: bool = True, budget: int = 10**8):
    """Report (never assert) the actual sum against the bound with constants 1."""
    g = _as_poly(g)
    if min(X, Y, Z) < 2 or Y * Z > X:
        raise ParameterError("need X, Y, Z >= 2 and Y Z <= X")
    if math.gcd(a, q) != 1:
        raise ParameterError("gcd(a, q) != 1")
    alpha_f = to_fraction(alpha)
    if abs(alpha_f - Fraction(a, q)) >= Fraction(1, q * q):
        raise ParameterError("need |alpha - a/q| < q^-2")
    k, ell = g.degree, g.num_vars
    cont = max(g.content(), 1)
    J = g.l1_norm()
    bound = minor_arc_bound(cont, J, k, ell, X, Y, Z, q)
    out = {
        "params": {"X": X, "Y": Y, "Z": Z, "q": q, "a": a, "alpha": str(alpha_f), "k": k, "l": ell,
                   "J": J, "cont": cont, "poly": str(g)},
        "bound_expression": MINOR_BOUND_EXPRESSION,
        "bound_value": bound,
        "computed_abs": None,
        "ratio": None,
        "assertion": "none (report only)",
    }
    if compute_sum:
        s = sieved_weyl_sum(g, alpha_f, X, Y, profile, budget=budget)
        out["computed_abs"] = abs(s.value)
        out["ratio"] = abs(s.value) / bound
    return out


def paper_schedule(eta: float, k: int, N: int, c0: float | None = None):
    """Parameter preset Q = eta^-2, Y = eta^-2k, gamma = eta^-2k / N, Z = N^c0."""
    if not 0 < eta < 1:
        raise ParameterError("eta must lie in (0, 1)")
    out = {"eta": eta, "k": k, "N": N, "Q": eta**-2, "Y": eta ** (-2 * k), "gamma": eta ** (-2 * k) / N}
    if c0 is not None:
        out["Z"] = N**c0
    return out
