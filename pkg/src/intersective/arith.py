"""Small integer helpers; prime generation and factoring come from sympy."""

from functools import reduce
from math import gcd

from sympy import factorint as _factorint
from sympy import isprime as _isprime
from sympy import primerange
from sympy.ntheory.modular import crt as _crt


def primes_upto(n):
    return [int(p) for p in primerange(2, int(n) + 1)]


def is_prime(n):
    return bool(_isprime(int(n)))


def factorint(n):
    return {int(p): int(e) for p, e in sorted(_factorint(int(n)).items())}


def valuation(n, p):
    """p-adic valuation of a nonzero integer; None for zero."""
    n = int(n)
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def crt(residues, moduli):
    """Least non-negative solution of x = r_i mod m_i for pairwise coprime moduli."""
    if not moduli:
        return 0
    sol = _crt([int(m) for m in moduli], [int(r) for r in residues])
    return int(sol[0])


def gcd_list(values):
    return reduce(gcd, (abs(int(v)) for v in values), 0)


def euler_phi(n):
    out = n
    for p in factorint(n):
        out = out // p * (p - 1)
    return out
