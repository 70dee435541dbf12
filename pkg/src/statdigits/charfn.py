"""Characteristic functions f(t) = E exp(itX) with certified error bounds.

Arguments are either a float ``t`` or exact ``turns`` with t = 2*pi*turns.
Exact turns keep phase reduction in rational arithmetic, which is what makes
f(2 pi k q^m) comparable across m without float drift.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cdf import Cdf, CycleAtomic, FromProcess, Heaviside, IIDCdf, Minkowski, MixtureCdf, Uniform
from .process import IID, CycleProcess, DigitProcess, MarkovChain, Mixture, sample_many

TWO_PI = 2 * math.pi
DEFAULT_DEPTH = 30
MINKOWSKI_DEPTH = 20

# (cos, sin) of 2 pi a at turns with closed-form values
_SPECIAL = {
    Fraction(1, 6): (0.5, math.sqrt(3) / 2),
    Fraction(1, 3): (-0.5, math.sqrt(3) / 2),
    Fraction(1, 8): (math.sqrt(2) / 2, math.sqrt(2) / 2),
    Fraction(3, 8): (-math.sqrt(2) / 2, math.sqrt(2) / 2),
}


@dataclass(frozen=True)
class CharFnValue:
    t: float
    value: complex
    error_bound: float = 0.0
    stderr: float = 0.0
    turns: Fraction | None = field(default=None, compare=False)


def unit(c) -> complex:
    """exp(2 pi i c); exact rational reduction for Fractions."""
    if isinstance(c, (int, Fraction)):
        c = Fraction(c)
        a = c - math.floor(c)
        if a > Fraction(1, 2):
            a -= 1
        if a == 0:
            return complex(1.0, 0.0)
        if a == Fraction(1, 2):
            return complex(-1.0, 0.0)
        if a == Fraction(1, 4):
            return complex(0.0, 1.0)
        if a == Fraction(-1, 4):
            return complex(0.0, -1.0)
        s = 1.0 if a > 0 else -1.0
        known = _SPECIAL.get(abs(a))
        if known is not None:
            return complex(known[0], s * known[1])
        ang = TWO_PI * float(abs(a))
        return complex(math.cos(ang), s * math.sin(ang))
    return cmath.exp(1j * TWO_PI * c)


def _arg(t, turns):
    if (t is None) == (turns is None):
        raise ValueError("pass exactly one of t or turns")
    if turns is not None:
        if isinstance(turns, float):
            return turns * TWO_PI, turns
        turns = Fraction(turns)
        return TWO_PI * float(turns), turns
    return float(t), float(t) / TWO_PI


def charfn_eval(F, t=None, *, turns=None, depth: int = DEFAULT_DEPTH,
                method: str = "exact", samples: int = 20000, seed: int = 0) -> CharFnValue:
    """f(t) for a Cdf (or a DigitProcess, meaning its FromProcess CDF).

    Closed forms for Uniform, Heaviside and cycle CDFs.  IID and Markov digit
    laws are truncated after ``depth`` nontrivial digit positions and summed
    exactly over the truncated law, with bound |t| q^-L on the truncation.
    ``method="mc"`` replaces the exact sum by sampling and reports stderr.
    """
    tf, r = _arg(t, turns)
    value, err, se = _eval(F, r, depth, method, samples, seed)
    return CharFnValue(tf, value, err, se, r if isinstance(r, Fraction) else None)


def _eval(F, r, depth, method, samples, seed):
    if isinstance(F, DigitProcess):
        return _eval_process(F, r, depth, method, samples, seed)
    if isinstance(F, Uniform):
        return _uniform(r), 0.0, 0.0
    if isinstance(F, Heaviside):
        return unit(r * F.at if isinstance(r, Fraction) else r * float(F.at)), 0.0, 0.0
    if isinstance(F, CycleAtomic):
        return _atoms(F.cycle.members, r), 0.0, 0.0
    if isinstance(F, IIDCdf):
        return _eval_process(IID(F.base, F.probs), r, depth, method, samples, seed)
    if isinstance(F, FromProcess):
        return _eval_process(F.process, r, depth, method, samples, seed)
    if isinstance(F, Minkowski):
        return _minkowski(r)
    if isinstance(F, MixtureCdf):
        val, err, se = 0j, 0.0, 0.0
        for w, c in zip(F.weights, F.components):
            v, e, s = _eval(c, r, depth, method, samples, seed)
            val += float(w) * v
            err += float(w) * e
            se += float(w) * s
        return val, err, se
    raise TypeError(f"no characteristic function for {type(F).__name__}")


def _uniform(r) -> complex:
    if r == 0:
        return complex(1.0, 0.0)
    if isinstance(r, Fraction) and r.denominator == 1:
        return complex(0.0, 0.0)
    return (unit(r) - 1) / (1j * TWO_PI * float(r))


def _atoms(points, r) -> complex:
    if isinstance(r, Fraction):
        # reduce phases exactly and sum in sorted order, so permuted atoms agree bitwise
        phases = sorted((r * s) % 1 for s in points)
        units = [unit(a) for a in phases]
    else:
        units = sorted((unit(r * float(s)) for s in points), key=lambda z: (z.real, z.imag))
    re = math.fsum(u.real for u in units) / len(units)
    im = math.fsum(u.imag for u in units) / len(units)
    return complex(re, im)


def _eval_process(p: DigitProcess, r, depth, method, samples, seed):
    if isinstance(p, CycleProcess):
        return _atoms(p.cycle.members, r), 0.0, 0.0
    if isinstance(p, Mixture):
        val, err, se = 0j, 0.0, 0.0
        for w, c in zip(p.weights, p.components):
            v, e, s = _eval_process(c, r, depth, method, samples, seed)
            val += float(w) * v
            err += float(w) * e
            se += float(w) * s
        return val, err, se
    if method == "mc":
        return _monte_carlo(p, r, depth, samples, seed)
    if isinstance(p, (IID, MarkovChain)):
        init, P = p.lifted()
        order = getattr(p, "order", 1)
        return _chain(p.base, order, init, P, r, depth)
    raise TypeError(f"no characteristic function for {type(p).__name__}")


def _trivial_prefix(r, q: int) -> int:
    """Number of leading digit positions j with r q^-j an integer."""
    if not isinstance(r, Fraction) or r == 0:
        return 0
    a = 0
    while (r / q ** (a + 1)).denominator == 1:
        a += 1
    return a


def _chain(q, order, init, P, r, depth):
    """E exp(2 pi i r X_L) for the window chain (init, P), X_L = X truncated at L digits.

    Positions whose phase is trivially 1 are folded into the initial law
    exactly; the remaining ``depth`` positions run a backward recursion.
    """
    N = len(init)
    a = _trivial_prefix(r, q)
    mu = list(init)
    for _ in range(a):
        mu = [sum(mu[i] * P[i][j] for i in range(N)) for j in range(N)]
    L = a + depth
    first = np.arange(N) // q ** (order - 1)
    Pf = np.array([[float(v) for v in row] for row in P])
    h = None
    for j in range(L, a, -1):
        c = r / q**j
        ph = np.array([unit(c * d) for d in range(q)])[first]
        h = ph if h is None else ph * (Pf @ h)
    if h is None:
        h = np.ones(N, dtype=complex)
    val = complex(np.dot(np.array([float(m) for m in mu]), h))
    err = TWO_PI * abs(float(r)) * float(q) ** (-L)
    return val, err, 0.0


def _monte_carlo(p: DigitProcess, r, depth, samples, seed):
    digits = sample_many(p, depth, samples, seed)
    weights = float(p.base) ** -np.arange(1, depth + 1)
    x = digits @ weights
    z = np.exp(1j * TWO_PI * float(r) * x)
    val = complex(z.mean())
    se = float(np.sqrt(z.var(ddof=1) / samples)) if samples > 1 else float("inf")
    err = TWO_PI * abs(float(r)) * float(p.base) ** (-depth)
    return val, err, se


@lru_cache(maxsize=4)
def stern_brocot_midpoints(depth: int) -> np.ndarray:
    """Midpoints of the 2**depth Stern-Brocot intervals, each of ?-mass 2**-depth."""
    num = np.array([0, 1], dtype=np.int64)
    den = np.array([1, 1], dtype=np.int64)
    for _ in range(depth):
        mn = num[:-1] + num[1:]
        md = den[:-1] + den[1:]
        n2 = np.empty(2 * len(num) - 1, dtype=np.int64)
        d2 = np.empty_like(n2)
        n2[0::2], n2[1::2] = num, mn
        d2[0::2], d2[1::2] = den, md
        num, den = n2, d2
    left = num[:-1] / den[:-1]
    right = num[1:] / den[1:]
    return (left + right) / 2


def _minkowski(r, depth: int = MINKOWSKI_DEPTH):
    xi = stern_brocot_midpoints(depth)
    rf = float(r)
    phase = np.mod(rf * xi, 1.0)
    z = np.exp(1j * TWO_PI * phase)
    val = complex(z.mean())
    # |exp(itx) - exp(it xi)| <= |t| (b - a)/2 per interval, widths sum to 1
    err = TWO_PI * abs(rf) * 2.0 ** (-depth - 1)
    return val, err, 0.0


@dataclass
class PeriodicityReport:
    q: int
    K: int
    defect: float
    error_bound: float
    witness_k: int | None
    pairs: list = field(default_factory=list)

    @property
    def certified_nonzero(self) -> bool:
        return self.defect > self.error_bound

    def passed(self, tol: float = 0.0) -> bool:
        return self.defect <= tol + self.error_bound


def periodicity_defect(F, q: int, K: int, depth: int = DEFAULT_DEPTH) -> PeriodicityReport:
    """max over 0 < |k| <= K of |f(2 pi k q) - f(2 pi k)| with propagated bounds."""
    if K < 1:
        raise ValueError("K must be >= 1")
    worst, wk, werr = 0.0, None, 0.0
    pairs = []
    max_err = 0.0
    for k in [k for k in range(-K, K + 1) if k != 0]:
        a = charfn_eval(F, turns=k * q, depth=depth)
        b = charfn_eval(F, turns=k, depth=depth)
        d = abs(a.value - b.value)
        e = a.error_bound + b.error_bound + 3 * (a.stderr + b.stderr)
        pairs.append((k, a, b))
        max_err = max(max_err, e)
        if d > worst:
            worst, wk, werr = d, k, e
    return PeriodicityReport(q, K, worst, werr if wk is not None else max_err, wk, pairs)


def _require_stationary(F, q: int, check_depth: int) -> None:
    from .statcheck import verify_stationarity

    if isinstance(F, DigitProcess):
        if not F.stationary:
            raise ValueError("process is not stationary")
        return
    if not getattr(F, "exact", False):
        return
    report = verify_stationarity(F, q, check_depth)
    if not report.passed:
        raise ValueError(
            f"CDF fails the stationarity equation (witness {report.worst_point}); "
            "the probe identity does not apply"
        )


def rajchman_probe(F, q: int, k: int = 1, M: int = 6, depth: int = DEFAULT_DEPTH,
                   check_depth: int = 4) -> list[CharFnValue]:
    """f(2 pi k q^m) for m = 0..M; constant in m for a stationary F."""
    _require_stationary(F, q, check_depth)
    return [charfn_eval(F, turns=k * q**m, depth=depth) for m in range(M + 1)]


@dataclass
class LimitScan:
    limit: complex | None
    spread: float
    t_min: float
    t_max: float
    values: list
    certified_limit: Fraction | None = None
    two_part_residual: Fraction | None = None

    @property
    def found(self) -> bool:
        return self.limit is not None

    def reconstruction(self):
        """x -> (1 - c) x + c H(x), using the certified c = F(0) when available."""
        if self.limit is None:
            raise ValueError("no limit detected at the scanned range")
        c = self.certified_limit if self.certified_limit is not None else self.limit.real
        return lambda x: (1 - c) * x + (c if x >= 0 else 0 * c)


def default_scan_turns(t_max: float, points: int = 65) -> list[Fraction]:
    top = int(t_max / TWO_PI)
    grid = []
    for base in (top // 2, top - Fraction(points - 1, 16)):
        grid.extend(Fraction(base) + Fraction(i, 16) for i in range(points))
    return grid


def limit_scan(F, t_max: float = 1e4, tol: float = 1e-3, q: int = 2,
               turns_grid=None, depth: int = DEFAULT_DEPTH, check_depth: int = 4) -> LimitScan:
    """Look for lim f(t) by scanning t over windows near t_max/2 and t_max.

    Stabilization within ``tol`` is scan evidence only.  When F is an exact
    CDF passing the stationarity check, the estimate is cross-checked against
    F(0) and that exact value is recorded as the certified limit.
    """
    grid = turns_grid if turns_grid is not None else default_scan_turns(t_max)
    vals = [charfn_eval(F, turns=r, depth=depth) for r in grid]
    zs = np.array([v.value for v in vals])
    center = zs.mean()
    spread = float(np.max(np.abs(zs - center)))
    t_lo, t_hi = min(v.t for v in vals), max(v.t for v in vals)
    if spread > tol:
        return LimitScan(None, spread, t_lo, t_hi, vals)
    scan = LimitScan(complex(center), spread, t_lo, t_hi, vals)
    if isinstance(F, Cdf) and F.exact:
        from .statcheck import verify_stationarity

        if verify_stationarity(F, q, check_depth).passed:
            c0 = F.eval(Fraction(0))
            if abs(float(c0) - center.real) <= tol and abs(center.imag) <= tol:
                scan.certified_limit = c0
                recon = scan.reconstruction()
                grid_pts = [Fraction(i, 2**check_depth) for i in range(2**check_depth + 1)]
                scan.two_part_residual = max(abs(F.eval(x) - recon(x)) for x in grid_pts)
    return scan


def charfn_series(F, turns_list, depth: int = DEFAULT_DEPTH) -> list[CharFnValue]:
    return [charfn_eval(F, turns=r, depth=depth) for r in turns_list]
