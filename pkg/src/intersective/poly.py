"""Exact sparse multivariate integer polynomials.

Coefficients are Python ints throughout.  Terms are kept in a dict keyed by
exponent tuples; zero coefficients are never stored.  Canonical order is
graded lexicographic, highest degree first.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import comb, factorial, gcd
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NonIntegralQuotient,
    NotHomogeneous,
    PolynomialParseError,
)

_ALIASES = {"x": 1, "y": 2, "z": 3}


def _grlex_key(exps):
    return (sum(exps), exps)


class IntPolynomial:
    """Immutable sparse polynomial in ``num_vars`` variables over Z."""

    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, num_vars: int, terms: Mapping[Sequence[int], int] | None = None):
        if num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise DimensionMismatch(f"exponent {exps} has length != {num_vars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = int(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
                if clean[exps] == 0:
                    del clean[exps]
        object.__setattr__(self, "num_vars", int(num_vars))
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("IntPolynomial is immutable")

    # construction helpers

    @classmethod
    def constant(cls, num_vars, c):
        return cls(num_vars, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, num_vars, index):
        """The variable x_{index+1} (0-based index)."""
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, {tuple(exps): 1})

    @classmethod
    def _raw(cls, num_vars, terms):
        obj = cls.__new__(cls)
        object.__setattr__(obj, "num_vars", num_vars)
        object.__setattr__(obj, "_terms", terms)
        object.__setattr__(obj, "_hash", None)
        return obj

    # basic queries

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        """(exponents, coefficient) pairs in canonical order."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def coefficient(self, exps):
        return self._terms.get(tuple(exps), 0)

    def is_zero(self):
        return not self._terms

    def __len__(self):
        return len(self._terms)

    @property
    def degree(self):
        if not self._terms:
            return None
        return max(sum(e) for e in self._terms)

    @property
    def min_degree(self):
        """Lowest total degree among stored terms (None for zero)."""
        if not self._terms:
            return None
        return min(sum(e) for e in self._terms)

    def is_homogeneous(self):
        return len({sum(e) for e in self._terms}) <= 1

    def l1_norm(self):
        return sum(abs(c) for c in self._terms.values())

    def constant_term(self):
        return self._terms.get((0,) * self.num_vars, 0)

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, IntPolynomial):
            if other.num_vars != self.num_vars:
                raise DimensionMismatch(f"{self.num_vars} vs {other.num_vars} variables")
            return other
        if isinstance(other, (int, np.integer)):
            return IntPolynomial.constant(self.num_vars, int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return IntPolynomial._raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial._raw(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            other = int(other)
            if other == 0:
                return IntPolynomial(self.num_vars)
            return IntPolynomial._raw(self.num_vars, {e: c * other for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return IntPolynomial(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = IntPolynomial.constant(self.num_vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = IntPolynomial.constant(self.num_vars, int(other))
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.num_vars, frozenset(self._terms.items()))))
        return self._hash

    # calculus and structure

    def homogeneous_part(self, i):
        return IntPolynomial._raw(
            self.num_vars, {e: c for e, c in self._terms.items() if sum(e) == i}
        )

    def top_part(self):
        d = self.degree
        return self if d is None else self.homogeneous_part(d)

    def bottom_part(self):
        d = self.min_degree
        return self if d is None else self.homogeneous_part(d)

    def partial(self, var, order=1):
        out = {}
        for e, c in self._terms.items():
            if e[var] < order:
                continue
            f = 1
            for t in range(order):
                f *= e[var] - t
            ne = list(e)
            ne[var] -= order
            out[tuple(ne)] = c * f
        return IntPolynomial._raw(self.num_vars, out)

    def derivative(self, multi_index):
        """The mixed partial derivative indexed by ``multi_index``."""
        out = self
        for v, order in enumerate(multi_index):
            if order:
                out = out.partial(v, order)
        return out

    def taylor_coefficient(self, multi_index):
        """derivative(i) / i!, which always has integer coefficients."""
        d = self.derivative(multi_index)
        den = 1
        for o in multi_index:
            den *= factorial(o)
        return d.exact_divide(den) if den != 1 else d

    def gradient(self):
        return [self.partial(v) for v in range(self.num_vars)]

    def content(self):
        g = 0
        zero = (0,) * self.num_vars
        for e, c in self._terms.items():
            if e != zero:
                g = gcd(g, c)
        return abs(g)

    def coefficient_gcd(self):
        g = 0
        for c in self._terms.values():
            g = gcd(g, c)
        return abs(g)

    def exact_divide(self, n):
        n = int(n)
        if n == 0:
            raise ZeroDivisionError("exact_divide by zero")
        out = {}
        for e, c in self._terms.items():
            q, r = divmod(c, n)
            if r:
                raise NonIntegralQuotient(e, c, n)
            out[e] = q
        return IntPolynomial._raw(self.num_vars, out)

    def reduce_mod(self, m):
        return IntPolynomial(self.num_vars, {e: c % m for e, c in self._terms.items()})

    # evaluation

    def evaluate(self, point, modulus=None):
        point = [int(v) for v in point]
        if len(point) != self.num_vars:
            raise DimensionMismatch(f"point of length {len(point)} for {self.num_vars} variables")
        if modulus is None:
            total = 0
            for e, c in self._terms.items():
                t = c
                for x, k in zip(point, e):
                    if k:
                        t *= x**k
                total += t
            return total
        m = int(modulus)
        total = 0
        for e, c in self._terms.items():
            t = c % m
            for x, k in zip(point, e):
                if k:
                    t = t * pow(x, k, m) % m
            total += t
        return total % m

    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (list, tuple)):
            point = point[0]
        return self.evaluate(point)

    # serialization

    def to_json(self):
        return {
            "num_vars": self.num_vars,
            "terms": [{"exp": list(e), "coef": str(c)} for e, c in self.items()],
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            int(data["num_vars"]),
            {tuple(t["exp"]): int(t["coef"]) for t in data["terms"]},
        )

    def var_names(self):
        if self.num_vars <= 3:
            return ["x", "y", "z"][: self.num_vars]
        return [f"x{i + 1}" for i in range(self.num_vars)]

    def __str__(self):
        if not self._terms:
            return "0"
        names = self.var_names()
        parts = []
        for e, c in self.items():
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k
            )
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"IntPolynomial({self.num_vars}, {str(self)!r})"


class ModPolynomial:
    """An integer polynomial with coefficients reduced into [0, modulus)."""

    __slots__ = ("base", "modulus")

    def __init__(self, poly: IntPolynomial, modulus: int):
        if modulus < 2:
            raise ValueError("modulus must be >= 2")
        self.base = poly.reduce_mod(modulus)
        self.modulus = int(modulus)

    @property
    def degree(self):
        return self.base.degree

    def evaluate(self, point):
        return self.base.evaluate(point, self.modulus)

    def __eq__(self, other):
        return (
            isinstance(other, ModPolynomial)
            and self.modulus == other.modulus
            and self.base == other.base
        )

    def __hash__(self):
        return hash((self.base, self.modulus))

    def __repr__(self):
        return f"ModPolynomial({self.base} mod {self.modulus})"


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+|[xyz])|(\*\*|[-+*^()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolynomialParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            name = m.group(2)
            idx = _ALIASES[name] if name in _ALIASES else int(name[1:])
            if idx < 1:
                raise PolynomialParseError(f"bad variable {name!r}", start)
            tokens.append(("var", idx, start))
        else:
            op = m.group(3)
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, num_vars):
        self.tokens = tokens
        self.i = 0
        self.nv = num_vars

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            raise PolynomialParseError(f"expected {op!r}", tok[2])

    def expr(self):
        sign = 1
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        acc = self.term() * sign
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if tok[1] == "+" else acc - rhs
            else:
                return acc

    def term(self):
        acc = self.factor()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "*":
                self.take()
                acc = acc * self.factor()
            else:
                return acc

    def factor(self):
        base = self.base()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            exp = self.take()
            if exp[0] != "int":
                raise PolynomialParseError(
                    "exponent must be a non-negative integer literal", exp[2]
                )
            return base ** exp[1]
        return base

    def base(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "int":
            return IntPolynomial.constant(self.nv, val)
        if kind == "var":
            return IntPolynomial.variable(self.nv, val - 1)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "op" and val == "-":
            return -self.factor()
        if kind == "end":
            raise PolynomialParseError("unexpected end of input", pos)
        raise PolynomialParseError(f"unexpected token {val!r}", pos)


def parse_polynomial(text: str, num_vars_hint: int | None = None) -> IntPolynomial:
    """Parse an expression such as ``"x^4 - 2*y^4 + 2*x^2*(x+y)"``.

    Variables are ``x1, x2, ...``; ``x, y, z`` alias the first three.  The
    variable count is the largest index used, raised to ``num_vars_hint``.
    """
    tokens = _tokenize(text)
    used = max((t[1] for t in tokens if t[0] == "var"), default=1)
    nv = used
    if num_vars_hint is not None:
        if num_vars_hint < used:
            raise DimensionMismatch(f"text uses {used} variables but hint is {num_vars_hint}")
        nv = num_vars_hint
    parser = _Parser(tokens, nv)
    if tokens[0][0] == "end":
        raise PolynomialParseError("empty expression", 0)
    poly = parser.expr()
    tok = parser.peek()
    if tok[0] != "end":
        raise PolynomialParseError(f"unexpected token {tok[1]!r}", tok[2])
    return poly


def as_polynomial(obj, num_vars_hint=None):
    if isinstance(obj, IntPolynomial):
        return obj
    return parse_polynomial(obj, num_vars_hint)


# ---------------------------------------------------------------------------
# module-level operations


def evaluate(p: IntPolynomial, point, modulus=None):
    return p.evaluate(point, modulus)


def homogeneous_part(p: IntPolynomial, i: int) -> IntPolynomial:
    if i < 0:
        raise ValueError("degree must be non-negative")
    return p.homogeneous_part(i)


def gradient(p: IntPolynomial):
    return p.gradient()


def content(p: IntPolynomial) -> int:
    """gcd of the non-constant coefficients (0 when there are none)."""
    return p.content()


def exact_divide(p: IntPolynomial, n: int) -> IntPolynomial:
    return p.exact_divide(n)


def _linear_form(num_vars, const, coeffs):
    terms = {(0,) * num_vars: const}
    for j, c in enumerate(coeffs):
        if c:
            e = [0] * num_vars
            e[j] = 1
            terms[tuple(e)] = c
    return IntPolynomial(num_vars, terms)


def affine_substitute(p: IntPolynomial, scale: int = 1, shift=None, linear_map=None) -> IntPolynomial:
    """Expand ``p(shift + scale * M y)``.

    ``linear_map`` is an ``num_vars x r`` integer matrix (row i gives old
    variable i in terms of the r new variables).  Identity when omitted.
    """
    ell = p.num_vars
    shift = [0] * ell if shift is None else [int(s) for s in shift]
    if len(shift) != ell:
        raise DimensionMismatch(f"shift of length {len(shift)} for {ell} variables")
    if linear_map is None:
        linear_map = [[int(i == j) for j in range(ell)] for i in range(ell)]
    if len(linear_map) != ell:
        raise DimensionMismatch("linear map must have one row per old variable")
    r = len(linear_map[0]) if ell else 0
    if any(len(row) != r for row in linear_map):
        raise DimensionMismatch("ragged linear map")
    images = [
        _linear_form(r, shift[i], [scale * int(a) for a in linear_map[i]]) for i in range(ell)
    ]
    powers = [[IntPolynomial.constant(r, 1)] for _ in range(ell)]

    def power(i, k):
        cache = powers[i]
        while len(cache) <= k:
            cache.append(cache[-1] * images[i])
        return cache[k]

    out = IntPolynomial(r)
    for e, c in p.items():
        term = IntPolynomial.constant(r, c)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        out = out + term
    return out


# ---------------------------------------------------------------------------
# univariate helpers (coefficient lists, highest degree first)


def _strip(coeffs):
    i = 0
    while i < len(coeffs) - 1 and coeffs[i] == 0:
        i += 1
    return list(coeffs[i:])


def _bareiss_det(matrix):
    """Fraction-free determinant of a square integer matrix."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def sylvester_matrix(f, g):
    """Sylvester matrix of two coefficient lists with nonzero leading terms."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(f) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(g) + [0] * (size - n - 1 - i))
    return rows


def resultant(f, g):
    f, g = _strip(f), _strip(g)
    if len(f) == 1 and len(g) == 1:
        return 1
    return _bareiss_det(sylvester_matrix(f, g))


def _derivative_coeffs(f):
    n = len(f) - 1
    return [c * (n - i) for i, c in enumerate(f[:-1])]


def univariate_discriminant(f):
    """Classical discriminant (-1)^{n(n-1)/2} Res(f, f') / a_n for degree n >= 1."""
    f = _strip(f)
    n = len(f) - 1
    if n < 1:
        raise ValueError("discriminant needs degree >= 1")
    if n == 1:
        return 1
    r = resultant(f, _derivative_coeffs(f))
    q, rem = divmod(r, f[0])
    assert rem == 0
    return (-1) ** (n * (n - 1) // 2) * q


def _fr_divmod(a, b):
    a = [Fraction(c) for c in a]
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        coef = a[0] / b[0]
        shift = len(a) - len(b)
        q[len(q) - 1 - shift] = coef
        for i in range(len(b)):
            a[i] -= coef * b[i]
        a = a[1:]
    return q, (a if a else [Fraction(0)])


def univariate_gcd(f, g):
    """Monic gcd over Q of two coefficient lists (highest degree first)."""
    a = _strip([Fraction(c) for c in f])
    b = _strip([Fraction(c) for c in g])
    while any(b):
        _, r = _fr_divmod(a, b)
        a, b = b, _strip(r)
    lead = a[0]
    return [c / lead for c in a] if lead else a


def _binary_coeffs(g):
    """[a_k, ..., a_0] where a_i multiplies x^i y^(k-i)."""
    k = g.degree
    return [g.coefficient((i, k - i)) for i in range(k, -1, -1)]


def _check_binary_form(g):
    if g.num_vars != 2:
        raise DimensionMismatch("binary form expected (2 variables)")
    if g.is_zero() or not g.is_homogeneous():
        raise NotHomogeneous("binary discriminant needs a nonzero homogeneous form")


def _normalize_binary_form(g):
    """A form SL2(Z)-equivalent to g (up to a variable swap) with nonzero x^k coefficient."""
    k = g.degree
    if g.coefficient((k, 0)) != 0:
        return g
    if g.coefficient((0, k)) != 0:
        return IntPolynomial(2, {(b, a): c for (a, b), c in g.terms.items()})
    # both x^k and y^k vanish: shear y -> y + t x, which preserves the discriminant
    t = 1
    while True:
        sheared = affine_substitute(g, 1, [0, 0], [[1, 0], [t, 1]])
        if sheared.coefficient((k, 0)) != 0:
            return sheared
        t += 1


def discriminant_binary_form(g: IntPolynomial) -> int:
    """Homogeneous discriminant of a binary form of degree k >= 2."""
    _check_binary_form(g)
    k = g.degree
    if k < 2:
        raise ValueError("binary discriminant needs degree >= 2")
    return univariate_discriminant(_binary_coeffs(_normalize_binary_form(g)))


def repeated_factor(g: IntPolynomial):
    """gcd(f, f') of the dehomogenized form (y = 1 chart) as a binary form, or None.

    Returns a primitive integer binary form dividing g to multiplicity >= 2,
    or None when g is squarefree.
    """
    _check_binary_form(g)
    k = g.degree
    coeffs = _binary_coeffs(g)
    f = _strip(coeffs)
    # roots at infinity (y = 0) show up as a drop in x-degree
    inf_mult = k - (len(f) - 1)
    if len(f) > 1:
        common = univariate_gcd(f, _derivative_coeffs(f))
    else:
        common = [Fraction(1)]
    dg = len(common) - 1
    terms = {}
    den = 1
    for c in common:
        den = den * c.denominator // gcd(den, c.denominator)
    for i, c in enumerate(common):
        v = int(c * den)
        if v:
            terms[(dg - i, 0)] = v
    factor = IntPolynomial(2, terms)
    # re-homogenize with y
    factor = IntPolynomial(2, {(a, dg - a): c for (a, _), c in factor.terms.items()})
    if inf_mult >= 2:
        factor = factor * IntPolynomial(2, {(0, 1): 1})
    if factor.degree == 0:
        return None
    cg = factor.coefficient_gcd()
    factor = factor.exact_divide(cg)
    lead = factor.items()[0][1]
    return -factor if lead < 0 else factor


# ---------------------------------------------------------------------------
# vectorized evaluation over integer grids


def eval_mod_grid(p: IntPolynomial, coords, modulus: int) -> np.ndarray:
    """Evaluate p mod ``modulus`` at broadcastable int64 coordinate arrays."""
    m = int(modulus)
    if m >= 2**31:
        raise ValueError("grid evaluation modulus must be < 2^31")
    coords = [np.asarray(c, dtype=np.int64) % m for c in coords]
    if len(coords) != p.num_vars:
        raise DimensionMismatch("coordinate count != num_vars")
    shape = np.broadcast_shapes(*(c.shape for c in coords)) if coords else ()
    pw = [[None] for _ in coords]

    def power(v, k):
        cache = pw[v]
        if k == 0:
            return None
        while len(cache) <= k:
            prev = cache[-1]
            cache.append(coords[v].copy() if prev is None else prev * coords[v] % m)
        return cache[k]

    out = np.zeros(shape, dtype=np.int64)
    for e, c in p.items():
        t = None
        for v, k in enumerate(e):
            if k:
                pk = power(v, k)
                t = pk if t is None else t * pk % m
        cm = c % m
        if t is None:
            out = (out + cm) % m
        else:
            out = (out + t * cm) % m
    return np.broadcast_to(out, shape).copy() if out.shape != shape else out


def eval_exact_grid(p: IntPolynomial, coords) -> np.ndarray:
    """Exact values at integer grids; int64 when provably safe, else object dtype."""
    coords = [np.asarray(c) for c in coords]
    bound = max((int(np.max(np.abs(c))) for c in coords if c.size), default=0)
    k = p.degree or 0
    safe = p.l1_norm() * max(bound, 1) ** k < 2**62
    dtype = np.int64 if safe else object
    coords = [c.astype(dtype) for c in coords]
    shape = np.broadcast_shapes(*(c.shape for c in coords))
    out = np.zeros(shape, dtype=dtype)
    for e, c in p.items():
        t = np.full(shape, c, dtype=dtype) if dtype is object else c
        for v, kk in enumerate(e):
            if kk:
                t = t * coords[v] ** kk
        out = out + t
    return out


def grid_coords(side: int, num_vars: int, offset: int = 0):
    """Open-mesh coordinate arrays for the box [offset, offset+side)^num_vars."""
    axes = []
    for v in range(num_vars):
        shape = [1] * num_vars
        shape[v] = side
        axes.append((np.arange(side, dtype=np.int64) + offset).reshape(shape))
    return axes


def box_coords(ranges):
    """Open-mesh coordinates for per-axis inclusive ranges [(lo, hi), ...]."""
    n = len(ranges)
    axes = []
    for v, (lo, hi) in enumerate(ranges):
        shape = [1] * n
        shape[v] = hi - lo + 1
        axes.append(np.arange(lo, hi + 1, dtype=np.int64).reshape(shape))
    return axes


def multi_indices(num_vars: int, total: int) -> Iterable[tuple]:
    """All exponent tuples with the given total degree, lexicographically descending."""
    if num_vars == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in multi_indices(num_vars - 1, total - first):
            yield (first,) + rest


def binomial_basis_coefficients(p: IntPolynomial):
    """Coefficients of p in the integer-valued basis prod_j binom(x_j, i_j).

    Uses x^n = sum_k S(n, k) k! binom(x, k) with Stirling numbers of the second kind.
    """
    k = p.degree or 0
    stirling = [[0] * (k + 1) for _ in range(k + 1)]
    stirling[0][0] = 1
    for n in range(1, k + 1):
        for j in range(1, n + 1):
            stirling[n][j] = j * stirling[n - 1][j] + stirling[n - 1][j - 1]
    out = {}
    for e, c in p.items():
        # expand each variable's power in the falling-factorial basis
        partial = {(): c}
        for n in e:
            nxt = {}
            for idx, val in partial.items():
                for j in range(n + 1):
                    s = stirling[n][j]
                    if s:
                        key = idx + (j,)
                        nxt[key] = nxt.get(key, 0) + val * s * factorial(j)
            partial = nxt
        for idx, val in partial.items():
            out[idx] = out.get(idx, 0) + val
    return {i: v for i, v in out.items() if v}


def binomial_eval(idx, point):
    out = 1
    for i, x in zip(idx, point):
        out *= comb(x, i) if x >= 0 else (-1) ** i * comb(i - x - 1, i)
    return out
