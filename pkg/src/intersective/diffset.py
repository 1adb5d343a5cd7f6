"""The difference-set threshold D(X, N): exact, greedy and bound formulas."""

from __future__ import annotations

import csv
import io
import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BudgetExceeded, ParameterError
from .padic import RootSelection, build_auxiliary
from .poly import IntPolynomial, affine_substitute, box_coords, eval_exact_grid

DEFAULT_HARD_CAP = 128


@dataclass(frozen=True)
class ForbiddenSet:
    positives: tuple
    source: str = "explicit"

    @classmethod
    def from_values(cls, values, source="explicit"):
        return cls(tuple(sorted({abs(int(v)) for v in values if int(v) != 0})), source)

    @classmethod
    def read(cls, path):
        text = Path(path).read_text()
        return cls.from_values([int(t) for t in text.split()], f"file:{path}")

    def write(self, path):
        Path(path).write_text("".join(f"{v}\n" for v in self.positives))

    def upto(self, N):
        return [v for v in self.positives if v <= N]

    def __contains__(self, v):
        return abs(v) in set(self.positives)


def _as_forbidden(X):
    return X if isinstance(X, ForbiddenSet) else ForbiddenSet.from_values(X)


def generate_image(h: IntPolynomial, input_box, value_cap: int, budget: int = 10**7) -> ForbiddenSet:
    """{|h(n)| : n in the box, 0 < |h(n)| <= value_cap}."""
    ranges = [(int(lo), int(hi)) for lo, hi in input_box]
    if len(ranges) != h.num_vars:
        raise ValueError("box needs one range per variable")
    size = math.prod(hi - lo + 1 for lo, hi in ranges)
    if size > budget:
        raise BudgetExceeded("image box", size, budget)
    vals = np.abs(np.asarray(eval_exact_grid(h, box_coords(ranges)))).ravel()
    keep = sorted({int(v) for v in vals if 0 < v <= value_cap})
    return ForbiddenSet(tuple(keep), f"image of {h} over {ranges}")


# ---------------------------------------------------------------------------
# solvers


def conflict_graph(X: ForbiddenSet, N: int):
    """Adjacency bitmasks on vertices 0..N-1 (vertex i is the integer i+1)."""
    diffs = X.upto(N - 1)
    full = (1 << N) - 1
    adj = []
    for i in range(N):
        m = 0
        for x in diffs:
            m |= (1 << (i + x)) | ((1 << i) >> x if i >= x else 0)
        adj.append(m & full)
    return adj


def _bits(m):
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def _clique_cover_bound(P, adj):
    count = 0
    while P:
        v = (P & -P).bit_length() - 1
        cand = P & adj[v]
        clique = 1 << v
        while cand:
            u = (cand & -cand).bit_length() - 1
            clique |= 1 << u
            cand &= adj[u]
        P &= ~clique
        count += 1
    return count


class _RussianDoll:
    """Maximum independent set by Russian-doll search over suffixes [i, N).

    c[i] is the optimum on the suffix starting at vertex i; searches branch on
    the smallest candidate and prune with c, popcount and a greedy clique cover.
    """

    def __init__(self, adj, N, node_budget):
        self.adj = adj
        self.N = N
        self.node_budget = node_budget
        self.nodes = 0
        self.c = [0] * (N + 1)

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise BudgetExceeded("branch and bound", self.nodes, self.node_budget)

    def find(self, P, target):
        """Bitmask of an independent set of size >= target inside P, or None."""
        if target <= 0:
            return 0
        return self._expand(P, 0, 0, target)

    def _expand(self, P, size, chosen, target):
        self._tick()
        adj, c = self.adj, self.c
        if size + _clique_cover_bound(P, adj) < target:
            return None
        while P:
            if size + P.bit_count() < target:
                return None
            v = (P & -P).bit_length() - 1
            if size + c[v] < target:
                return None
            pick = chosen | (1 << v)
            if size + 1 >= target:
                return pick
            rest = P & ~adj[v] & ~(1 << v)
            if rest:
                hit = self._expand(rest, size + 1, pick, target)
                if hit is not None:
                    return hit
            P &= ~(1 << v)
        return None

    def run(self):
        N, adj = self.N, self.adj
        best, best_set = 0, 0
        full = (1 << N) - 1
        for i in range(N - 1, -1, -1):
            rest = full & ~((1 << (i + 1)) - 1) & ~adj[i]
            hit = self.find(rest, best)  # size best + 1 including i
            if hit is not None:
                best, best_set = best + 1, hit | (1 << i)
            self.c[i] = best
        return best, best_set

    def lexmin(self, target):
        adj = self.adj
        P = (1 << self.N) - 1
        chosen = []
        need = target
        while need > 0:
            v = (P & -P).bit_length() - 1
            rest = P & ~adj[v] & ~((1 << (v + 1)) - 1)
            if self.find(rest, need - 1) is not None:
                chosen.append(v)
                need -= 1
                P = rest
            else:
                P &= ~(1 << v)
        return [v + 1 for v in chosen]


@dataclass
class DiffSetResult:
    N: int
    exact: int | None = None
    witness: list | None = None
    greedy: int = 0
    greedy_witness: list = field(default_factory=list)
    lower_bound_formula: int = 0
    upper_bound_sumset: int | None = None
    nodes: int = 0
    seconds: float = 0.0
    witness_lexmin: bool = False

    def to_json(self, include_time=False):
        out = {"exact": self.exact, "witness": self.witness, "N": self.N, "greedy": self.greedy,
               "lower_bound_formula": self.lower_bound_formula, "upper_bound_sumset": self.upper_bound_sumset,
               "solver_stats": {"nodes": self.nodes, "witness_lexmin": self.witness_lexmin}}
        if include_time:
            out["solver_stats"]["seconds"] = self.seconds
        return out


def verify_witness(A, X) -> bool:
    X = _as_forbidden(X)
    forb = set(X.positives)
    A = sorted(A)
    return all(b - a not in forb for i, a in enumerate(A) for b in A[i + 1:])


def solve_greedy(X, N: int):
    """Ascending scan keeping every element compatible with those already kept."""
    X = _as_forbidden(X)
    forb = set(X.upto(N))
    taken = []
    for n in range(1, N + 1):
        if all(n - a not in forb for a in taken):
            taken.append(n)
    return len(taken), taken


def greedy_lower_bound(X, N: int) -> int:
    X = _as_forbidden(X)
    size = 2 * len(X.upto(N)) + 1  # X symmetrized, plus 0
    return max(0, -(-(N - 1) // size))


def solve_exact(X, N: int, node_budget: int = 10**7, hard_cap: int = DEFAULT_HARD_CAP,
                lexmin: bool = True) -> DiffSetResult:
    """Exact D(X, N) by bitset branch and bound; the witness is the lexicographically smallest optimum."""
    X = _as_forbidden(X)
    if N > hard_cap:
        raise ParameterError(f"N = {N} exceeds the exact solver cap {hard_cap}")
    t0 = time.perf_counter()
    g_size, g_wit = solve_greedy(X, N)
    res = DiffSetResult(N, greedy=g_size, greedy_witness=g_wit, lower_bound_formula=greedy_lower_bound(X, N))
    if N <= 0:
        res.exact, res.witness, res.witness_lexmin = 0, [], True
        return res
    adj = conflict_graph(X, N)
    solver = _RussianDoll(adj, N, node_budget)
    try:
        size, members = solver.run()
    except BudgetExceeded:
        res.nodes = solver.nodes
        res.witness = g_wit
        res.seconds = time.perf_counter() - t0
        return res
    res.exact = size
    res.witness = [v + 1 for v in _bits(members)]
    if lexmin:
        try:
            res.witness = solver.lexmin(size)
            res.witness_lexmin = True
        except BudgetExceeded:
            pass
    res.nodes = solver.nodes
    res.seconds = time.perf_counter() - t0
    return res


def brute_force(X, N: int) -> int:
    """D(X, N) by checking all 2^N subsets (oracle for small N)."""
    X = _as_forbidden(X)
    if N > 26:
        raise ParameterError("brute force is limited to N <= 26")
    if N <= 0:
        return 0
    masks = np.arange(1 << N, dtype=np.int64)
    ok = np.ones(masks.shape, dtype=bool)
    for x in X.upto(N - 1):
        ok &= (masks & (masks >> x)) == 0
    return int(np.bitwise_count(masks[ok]).max())


def bounds_report(X, N: int, Y=None):
    """Greedy lower bound and, when Y - Y lies in X plus {0}, the sumset upper bound."""
    X = _as_forbidden(X)
    out = {"N": N, "count_X_in_range": 2 * len(X.upto(N)), "greedy_lower": greedy_lower_bound(X, N),
           "sumset_upper": None}
    if Y is not None:
        Y = sorted(set(int(y) for y in Y))
        if not Y or Y[0] < 1 or Y[-1] > N:
            raise ParameterError("the generator set Y must be a nonempty subset of [1, N]")
        forb = set(X.positives)
        bad = [(a, b) for i, a in enumerate(Y) for b in Y[i + 1:] if b - a not in forb]
        if bad:
            raise ParameterError(f"Y - Y is not inside X plus {{0}}: {bad[0][1]} - {bad[0][0]}")
        out["sumset_upper"] = 2 * N // len(Y)
    return out


# ---------------------------------------------------------------------------
# inheritance


@dataclass
class InheritanceResult:
    passed: bool
    trials: int
    identity_ok: bool
    counterexample: dict | None = None
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {"passed": self.passed, "trials": self.trials, "identity_ok": self.identity_ok,
                "counterexample": self.counterexample, "details": self.details}


def inheritance_check(h: IntPolynomial, sel: RootSelection, d: int, q: int, trials: int = 100,
                      seed: int = 0, radius: int = 3, span: int = 40, lam_override: int | None = None):
    """Randomized check that difference-avoidance passes from h_d to h_qd.

    A set A avoiding h_d-differences is built greedily from a random order,
    then A' = {a : x + lambda(q) a in A} must avoid h_qd-differences over
    the box [-radius, radius]^l.  The exact identity
    lambda(q) h_qd(n) = h_d(s + q n), with r_qd = r_d + d s, is checked too.
    """
    rng = random.Random(seed)
    aux_d = build_auxiliary(sel, d)
    aux_qd = build_auxiliary(sel, q * d)
    lam = sel.lam(q) if lam_override is None else lam_override
    s = []
    for a, b in zip(aux_qd.r_d, aux_d.r_d):
        if (a - b) % d:
            return InheritanceResult(False, 0, False, {"reason": "r_qd is not congruent to r_d mod d"})
        s.append((a - b) // d)
    identity_ok = lam * aux_qd.poly == affine_substitute(aux_d.poly, q, s)
    ell = h.num_vars
    small = [(-radius, radius)] * ell
    big = [(si - q * radius, si + q * radius) for si in s]
    forb_qd = set(generate_image(aux_qd.poly, small, 10**18).positives)
    N0 = lam * (span + 1)
    forb_d = set(generate_image(aux_d.poly, big, N0).positives)
    details = {"lambda_q": lam, "s": s, "N0": N0, "h_d": str(aux_d.poly), "h_qd": str(aux_qd.poly)}
    if not identity_ok:
        return InheritanceResult(False, 0, False, {"reason": "lambda(q) h_qd != h_d(s + q x)"}, details)
    forb_d_sorted = sorted(forb_d)
    for t in range(trials):
        order = list(range(1, N0 + 1))
        rng.shuffle(order)
        A = set()
        for n in order:
            if all((n + f) not in A and (n - f) not in A for f in forb_d_sorted):
                A.add(n)
        x = rng.randrange(0, lam)
        A2 = sorted((a - x) // lam for a in A if (a - x) % lam == 0)
        for i, a in enumerate(A2):
            for b in A2[i + 1:]:
                if b - a in forb_qd:
                    ce = {"trial": t, "x": x, "pair": [a, b], "difference": b - a}
                    return InheritanceResult(False, t + 1, True, ce, details)
    return InheritanceResult(True, trials, True, None, details)


# ---------------------------------------------------------------------------
# scaling


def _image_upto(g: IntPolynomial, N: int, budget: int):
    ell = g.num_vars
    radius = N
    while (2 * radius + 1) ** ell > budget and radius > 1:
        radius //= 2
    return generate_image(g, [(-radius, radius)] * ell, N, budget)


def fit_decay(rows):
    """Fit log D - log N = -c (log N)^mu by a grid over mu in (0, 1] and least squares in c."""
    pts = [(math.log(n), math.log(v) - math.log(n)) for n, v in rows if v > 0 and n > 1]
    if not pts:
        return {"c": None, "mu": None, "rss": None}
    best = None
    for mu in np.linspace(0.01, 1.0, 100):
        u = np.array([ln**mu for ln, _ in pts])
        y = np.array([r for _, r in pts])
        c = -float(np.dot(u, y) / np.dot(u, u))
        rss = float(np.sum((y + c * u) ** 2))
        if best is None or rss < best[2] - 1e-15:
            best = (float(mu), c, rss)
    return {"c": best[1], "mu": best[0], "rss": best[2]}


def scaling_report(h: IntPolynomial, sel: RootSelection | None, N_grid, solver: str = "exact",
                   d: int = 1, node_budget: int = 10**7, image_budget: int = 10**6):
    """Table of (N, D or greedy value) for X = h_d(Z^l) intersect [-N, N], plus a descriptive fit."""
    if solver not in ("exact", "greedy"):
        raise ValueError("solver must be exact or greedy")
    g = build_auxiliary(sel, d).poly if sel is not None and d != 1 else h
    rows = []
    for N in sorted(set(int(n) for n in N_grid)):
        X = _image_upto(g, N, image_budget)
        if solver == "exact":
            res = solve_exact(X, N, node_budget, lexmin=False)
            val = res.exact if res.exact is not None else res.greedy
        else:
            val, _ = solve_greedy(X, N)
        rows.append((N, val))
    return {"rows": rows, "method": solver, "fit": fit_decay(rows) if rows else {"c": None, "mu": None, "rss": None},
            "note": "descriptive fit only"}


def scaling_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "D", "method"])
    for n, v in report["rows"]:
        w.writerow([n, v, report["method"]])
    return buf.getvalue()
