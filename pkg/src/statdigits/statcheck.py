"""Functional-equation engines: stationarity and self-similarity residuals,
the transfer operator on grids, and the non-integrable fixed point."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate

from .baseq import base_q_fraction_order, base_q_fractions, check_budget, format_rational
from .cdf import Cdf


def stationarity_residual(F: Cdf, x, q: int):
    """F(x) - F(0) - sum_j [F((x+j)/q) - F(j/q)]."""
    return _stationarity_residual(F.eval, x, q)


def _stationarity_residual(ev: Callable, x, q: int):
    total = ev(x) - ev(0 * x)
    for j in range(q):
        total -= ev((x + j) / q) - ev(Fraction(j, q) if not isinstance(x, float) else j / q)
    return total


def self_similarity_residual(F: Cdf, weights, x):
    """F(x) - sum_j p_j F(q x - j), with F = 0 left of 0 and 1 right of 1."""
    q = len(weights)
    total = F.eval(x)
    for j, p in enumerate(weights):
        total -= p * F.eval(q * x - j)
    return total


def _sort_key(point):
    x, res = point
    return (-abs(res), x.denominator, x)


@dataclass
class ResidualReport:
    q: int
    depth: int
    worst_point: Fraction | None
    worst_residual: object
    per_depth_max: dict = field(default_factory=dict)
    tol: float = 0

    @property
    def passed(self) -> bool:
        return abs(self.worst_residual) <= self.tol

    @property
    def max_residual(self):
        return abs(self.worst_residual)

    def to_json(self) -> dict:
        def num(v):
            return format_rational(v) if isinstance(v, (int, Fraction)) else float(v)

        return {
            "pass": self.passed,
            "q": self.q,
            "depth": self.depth,
            "max_residual": num(self.max_residual),
            "witness": format_rational(self.worst_point) if self.worst_point is not None else None,
            "witness_residual": num(self.worst_residual),
            "per_depth_max": {str(k): num(v) for k, v in sorted(self.per_depth_max.items())},
            "tol": num(self.tol) if self.tol else 0,
        }


def _scan(residual: Callable, q: int, depth: int, tol) -> ResidualReport:
    points = base_q_fractions(q, depth) + [Fraction(1)]
    per_depth: dict = {}
    results = []
    for x in points:
        res = residual(x)
        order = base_q_fraction_order(x, q) or 0
        per_depth[order] = max(per_depth.get(order, 0), abs(res))
        results.append((x, res))
    worst = min(results, key=_sort_key)
    if worst[1] == 0:
        worst = (None, worst[1])
    return ResidualReport(q, depth, worst[0], worst[1], per_depth, tol)


class _Memo:
    def __init__(self, F: Cdf):
        self.F = F
        self.cache: dict = {}

    def __call__(self, x):
        v = self.cache.get(x)
        if v is None:
            v = self.cache[x] = self.F.eval(x)
        return v


def verify_stationarity(F: Cdf, q: int, depth: int, tol=0) -> ResidualReport:
    """Stationarity residuals at every base-q fraction of order <= depth and at x = 1.

    Order 0 in ``per_depth_max`` holds the endpoint x = 1.  The witness is the
    point of largest |residual|, ties broken by smallest denominator then value.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    check_budget(q, depth + 1)
    ev = _Memo(F)
    return _scan(lambda x: _stationarity_residual(ev, x, q), q, depth, tol)


def self_similarity_scan(F: Cdf, weights, depth: int, tol=0) -> ResidualReport:
    """Self-similarity residuals over the base-q grid of the given depth."""
    q = len(weights)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    check_budget(q, depth)
    return _scan(lambda x: self_similarity_residual(F, weights, x), q, depth, tol)


@dataclass
class GridFunction:
    """Samples of f at k / q**depth, k = 0..q**depth."""

    q: int
    depth: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if len(self.values) != self.q**self.depth + 1:
            raise ValueError(f"need {self.q**self.depth + 1} grid values")

    @classmethod
    def sample(cls, fn: Callable, q: int, depth: int, exact: bool = False) -> "GridFunction":
        check_budget(q, depth)
        M = q**depth
        if exact:
            raw = [fn(Fraction(k, M)) for k in range(M + 1)]
            if all(isinstance(v, float) for v in raw):
                vals = np.array(raw, dtype=float)
            else:
                vals = np.empty(M + 1, dtype=object)
                vals[:] = raw
        else:
            vals = np.asarray(fn(np.arange(M + 1) / M), dtype=float)
            if vals.shape == ():
                vals = np.full(M + 1, float(vals))
        return cls(q, depth, vals)

    def points(self):
        M = self.q**self.depth
        if self.values.dtype == object:
            return [Fraction(k, M) for k in range(M + 1)]
        return np.arange(M + 1) / M

    def integral(self):
        """Trapezoid rule on the grid."""
        v = self.values
        M = self.q**self.depth
        return (v.sum() - (v[0] + v[-1]) / 2) / M

    def l1(self):
        return GridFunction(self.q, self.depth, np.abs(self.values)).integral()


def sin_turns(r) -> float:
    """sin(2 pi r) for rational r, reduced to [0, 1/4] by exact symmetries.

    Values at r and r + 1/2 are exact negatives of each other, so a sampled
    grid keeps the cancellations that T performs in exact arithmetic.
    """
    r = Fraction(r) % 1
    sign = 1.0
    if r >= Fraction(1, 2):
        r -= Fraction(1, 2)
        sign = -1.0
    if r > Fraction(1, 4):
        r = Fraction(1, 2) - r
    if r == Fraction(1, 4):
        return sign
    return sign * math.sin(2 * math.pi * float(r))


def cos_turns(r) -> float:
    return sin_turns(Fraction(r) + Fraction(1, 4))


def transfer_apply(f: GridFunction) -> GridFunction:
    """(Tf)(x) = q^-1 sum_j f((x + j)/q), on the grid one level coarser."""
    if f.depth < 1:
        raise ValueError("insufficient depth: T consumes one grid level")
    M = f.q ** (f.depth - 1)
    v = f.values
    acc = v[0 : M + 1].copy()
    for j in range(1, f.q):
        acc = acc + v[j * M : j * M + M + 1]
    if acc.dtype == object:
        acc = np.array([a / f.q for a in acc], dtype=object)
    else:
        acc = acc / f.q
    return GridFunction(f.q, f.depth - 1, acc)


def transfer_iterate(f: GridFunction, k: int) -> GridFunction:
    if k > f.depth:
        raise ValueError(f"cannot apply T {k} times to a depth-{f.depth} grid")
    for _ in range(k):
        f = transfer_apply(f)
    return f


def transfer_convergence_report(f: GridFunction, k: int) -> list:
    """Grid-L1 distances of T^i f from the mean of f, i = 0..k.

    T fixes constants, so the iteration runs on f - mean directly.
    """
    if k > f.depth - 1:
        raise ValueError(f"need depth > {k} to report {k} iterations")
    mean = f.integral()
    g = GridFunction(f.q, f.depth, f.values - mean)
    out = [g.l1()]
    for _ in range(k):
        g = transfer_apply(g)
        out.append(g.l1())
    return out


# non-integrable solution of f = T f for q = 2, built from g = f - 1/(1-x)


def example7_piece(x) -> int:
    """n with x in [1 - 2^-n, 1 - 2^-(n+1))."""
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    n = 0
    while x >= 1 - Fraction(1, 2 ** (n + 1)):
        n += 1
    return n


def _g_on_piece(x, n: int):
    # g = 0 on [0, 1/2); g((y+1)/2) = 2 g(y) - 2/(2 - y)
    if n == 0:
        return 0 * x
    y = 2 * x - 1
    return 2 * _g_on_piece(y, n - 1) - 2 / (2 - y)


def example7_piece_value(x, n: int):
    """Formula of piece n evaluated at x, valid on the closed piece."""
    return _g_on_piece(x, n) + 1 / (1 - x)


def example7_g(x):
    return _g_on_piece(x, example7_piece(x))


def example7_eval(x, m: int):
    """f(x) = g(x) + 1/(1-x) for x in [0, 1 - 2^-m)."""
    if isinstance(x, float):
        bound = 1 - 2.0**-m
    else:
        x = Fraction(x)
        bound = 1 - Fraction(1, 2**m)
    if not 0 <= x < bound:
        raise ValueError(f"x = {x} outside [0, 1 - 2^-{m})")
    return example7_piece_value(x, example7_piece(x))


def example7_jumps(m: int) -> list[tuple[Fraction, Fraction, Fraction]]:
    """(b, f(b-), f(b)) at each piece boundary b inside (0, 1 - 2^-m)."""
    out = []
    for n in range(1, m):
        b = 1 - Fraction(1, 2**n)
        out.append((b, example7_piece_value(b, n - 1), example7_piece_value(b, n)))
    return out


def example7_partial_integral(m: int) -> float:
    """Integral of |f| over [0, 1 - 2^-m], piece by piece."""
    total = 0.0
    for n in range(m):
        a, b = 1 - 2.0**-n, 1 - 2.0 ** -(n + 1)
        val, _ = integrate.quad(lambda t: abs(example7_piece_value(t, n)), a, b, limit=200)
        total += val
    return total


def example7_data(m: int, points_per_piece: int = 64) -> list[tuple[Fraction, Fraction, int]]:
    """Rows (x, f(x), piece) covering [0, 1 - 2^-m].

    Each piece is sampled on [a, b); the closing row at 1 - 2^-m carries the
    left limit of the last piece.
    """
    rows = []
    for n in range(m):
        a, b = 1 - Fraction(1, 2**n), 1 - Fraction(1, 2 ** (n + 1))
        for i in range(points_per_piece):
            x = a + (b - a) * Fraction(i, points_per_piece)
            rows.append((x, example7_piece_value(x, n), n))
    end = 1 - Fraction(1, 2**m)
    rows.append((end, example7_piece_value(end, m - 1), m - 1))
    return rows


def example7_transfer_defect(m: int, depth: int) -> Fraction:
    """max |f(x) - (f(x/2) + f((x+1)/2))/2| over dyadic x of order <= depth in [0, 1 - 2^-m)."""
    M = 2**depth
    worst = Fraction(0)
    bound = 1 - Fraction(1, 2**m)
    for k in range(M):
        x = Fraction(k, M)
        if x >= bound:
            break
        lhs = example7_eval(x, m)
        rhs = (example7_eval(x / 2, m + 1) + example7_eval((x + 1) / 2, m + 1)) / 2
        worst = max(worst, abs(lhs - rhs))
    return worst
