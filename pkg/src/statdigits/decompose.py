"""Estimate the uniform / cycle-atomic / singular-continuous split of a
stationary digit law.

Atoms can only sit on cycles, so scanning cycles up to a maximal order is a
complete search up to mass resolution; whatever is not found lands in the
singular remainder and is reported as an upper bound on unresolved atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .baseq import Cycle, base_q_fraction_order, enumerate_cycles, format_rational
from .cdf import FromProcess
from .process import DigitProcess, make_rng

DEFAULT_DEPTHS = {2: 24, 3: 16}


def default_depth(q: int) -> int:
    if q in DEFAULT_DEPTHS:
        return DEFAULT_DEPTHS[q]
    return max(8, math.ceil(24 / math.log2(q)))


@dataclass(frozen=True)
class AtomScanConfig:
    max_order: int = 6
    eps: Fraction = Fraction(1, 10**4)
    depth: int | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("jump threshold must be positive")
        if self.max_order < 1:
            raise ValueError("max cycle order must be >= 1")

    def resolved_depth(self, q: int) -> int:
        m = self.depth if self.depth is not None else default_depth(q)
        floor = max(self.max_order, math.ceil(math.log(1 / float(self.eps), q)))
        if m <= floor:
            raise ValueError(
                f"envelope depth {m} must exceed max(N, ceil(log_q(1/eps))) = {floor}"
            )
        return m


class Atom(NamedTuple):
    cycle: Cycle
    jump: object
    error: object
    member_jumps: tuple


def _periodic_prefix(word: tuple[int, ...], m: int) -> tuple[int, ...]:
    reps = -(-m // len(word))
    return (word * reps)[:m]


def _index(word, q):
    k = 0
    for d in word:
        k = k * q + d
    return k


def _word(k, q, m):
    out = []
    for _ in range(m):
        k, d = divmod(k, q)
        out.append(d)
    return tuple(reversed(out))


def jump_estimate(p: DigitProcess, word: tuple[int, ...]):
    """(estimate, error) for the atom inside the cell of ``word``.

    The cell mass is a rigorous upper bound; subtracting the mean mass of the
    neighbouring cells removes the smooth trend.
    """
    q, m = p.base, len(word)
    cell = p.word_prob(word)
    k = _index(word, q)
    neigh = [p.word_prob(_word(j, q, m)) for j in (k - 1, k + 1) if 0 <= j < q**m]
    trend = sum(neigh) / len(neigh) if neigh else 0 * cell
    est = cell - trend if cell > trend else 0 * cell
    return est, cell - est


def detect_atoms(p: DigitProcess, cfg: AtomScanConfig | None = None,
                 diagnostics: list | None = None) -> list[Atom]:
    """Cycles of order <= N whose members all carry an estimated jump > eps."""
    if not p.stationary:
        raise ValueError("atom detection needs a stationary process")
    cfg = cfg or AtomScanConfig()
    q = p.base
    m = cfg.resolved_depth(q)
    found = []
    for n in range(1, cfg.max_order + 1):
        for c in enumerate_cycles(q, n):
            ests = [jump_estimate(p, _periodic_prefix(w, m)) for w in c.words]
            jumps = tuple(e for e, _ in ests)
            if not all(j > cfg.eps for j in jumps):
                continue
            err = max(e for _, e in ests)
            if max(jumps) - min(jumps) > 2 * err:
                if diagnostics is not None:
                    diagnostics.append(
                        f"cycle {c.generator}: unequal member jumps "
                        f"{[float(j) for j in jumps]} beyond envelope error {float(err)}"
                    )
                continue
            for s in c.members:
                assert base_q_fraction_order(s, q) is None, f"atom at base-{q} fraction {s}"
            jump = sum(jumps) / len(jumps)
            found.append(Atom(c, jump, err, jumps))
    return found


@dataclass
class UniformWeight:
    estimate: object
    lower: object
    upper: object
    samples: int
    depth: int


def uniform_weight(p: DigitProcess, samples: int = 1001, depth: int | None = None,
                   seed: int = 0) -> UniformWeight:
    """Median of q^m * (mass of the order-m cell) over uniformly random cells.

    The interval is the distribution-free 95% order-statistic band for the median.
    """
    if not p.stationary:
        raise ValueError("uniform weight needs a stationary process")
    q = p.base
    m = depth if depth is not None else default_depth(q)
    rng = make_rng(seed)
    cells = rng.integers(0, q, size=(samples, m))
    scale = q**m
    ratios = sorted(scale * p.word_prob(tuple(int(d) for d in row)) for row in cells)
    n = len(ratios)
    mid = ratios[n // 2] if n % 2 else (ratios[n // 2 - 1] + ratios[n // 2]) / 2
    half = 1.96 * math.sqrt(n) / 2
    lo = max(0, math.floor(n / 2 - half) - 1)
    hi = min(n - 1, math.ceil(n / 2 + half))
    return UniformWeight(mid, ratios[lo], ratios[hi], n, m)


@dataclass
class Decomposition:
    theta: tuple
    atoms: list
    theta1_interval: tuple
    unresolved_atom_bound: object
    max_order: int
    depth: int
    diagnostics: list = field(default_factory=list)
    residual_checks: dict | None = None

    @property
    def atom_mass(self):
        return sum(a.cycle.order * a.jump for a in self.atoms)

    def to_json(self) -> dict:
        def num(v):
            return format_rational(v) if isinstance(v, (int, Fraction)) else float(v)

        return {
            "theta": [num(t) for t in self.theta],
            "theta1_interval": [num(t) for t in self.theta1_interval],
            "atoms": [
                {"cycle": a.cycle.to_json(), "jump": num(a.jump), "error": num(a.error)}
                for a in self.atoms
            ],
            "unresolved_atom_bound": num(self.unresolved_atom_bound),
            "max_order": self.max_order,
            "depth": self.depth,
            "diagnostics": list(self.diagnostics),
            "residual_checks": self.residual_checks,
        }


def decompose(p: DigitProcess, cfg: AtomScanConfig | None = None, samples: int = 1001,
              seed: int = 0, tol: float = 1e-9) -> Decomposition:
    """theta_2 from detected atoms, theta_1 from the median derivative,
    theta_3 as what is left."""
    cfg = cfg or AtomScanConfig()
    diagnostics: list = []
    atoms = detect_atoms(p, cfg, diagnostics)
    m = cfg.resolved_depth(p.base)
    uw = uniform_weight(p, samples, m, seed)
    theta2 = sum((a.cycle.order * a.jump for a in atoms), 0 * uw.estimate)
    theta1 = uw.estimate
    theta3 = 1 - theta1 - theta2
    slack = tol + sum(float(a.error) * a.cycle.order for a in atoms)
    if theta3 < -slack:
        raise ValueError(
            f"inconsistent estimates: theta1 + theta2 = {float(theta1 + theta2)} exceeds 1"
        )
    if theta3 < 0:
        diagnostics.append(f"theta3 = {float(theta3)} clamped to 0")
        theta3 = 0 * theta3
    return Decomposition(
        (theta1, theta2, theta3), atoms, (uw.lower, uw.upper), theta3,
        cfg.max_order, m, diagnostics,
    )


@dataclass
class ReconstructionCheck:
    max_deviation: object
    residual_mass: object
    violations: list
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def reconstruct_check(p: DigitProcess, d: Decomposition, depth: int = 8,
                      tol: float | None = None) -> ReconstructionCheck:
    """Subtract theta_1 * x and the detected atoms from F on the order-``depth``
    grid; what is left must be a nonnegative, nondecreasing sub-CDF."""
    q = p.base
    F = FromProcess(p)
    M = q**depth
    if tol is None:
        tol = 1e-12 + sum(float(a.error) * a.cycle.order for a in d.atoms)
    members = [(s, a.jump) for a in d.atoms for s in a.cycle.members]
    theta1 = d.theta[0]
    worst = 0
    violations = []
    prev = None
    for k in range(M + 1):
        x = Fraction(k, M)
        assembled = theta1 * x + sum((j for s, j in members if s <= x), 0 * theta1)
        r = F.eval(x) - assembled
        if r < 0:
            worst = max(worst, -r)
            violations.append((x, "negative residual", r))
        if prev is not None and r < prev:
            worst = max(worst, prev - r)
            violations.append((x, "residual decreases", r - prev))
        prev = r
    return ReconstructionCheck(worst, prev, [v for v in violations if abs(v[2]) > tol], tol)
