"""CDF objects on [0, 1] and the bridges between digit processes and CDFs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

from .baseq import (
    Cycle,
    base_q_fraction_order,
    check_budget,
    expand,
    to_rational,
)
from .process import IID, DigitProcess, FiniteDimDistribution, _check_prob_vector, _num, process_from_config


class NotOnGridError(ValueError):
    """A process-defined CDF was asked for a point value off the base-q grid."""


def _coerce(x):
    """Rationals stay exact; floats stay floats."""
    if isinstance(x, float):
        return x
    return to_rational(x)


class Cdf:
    exact = True

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        x = _coerce(x)
        if x < 0:
            return Fraction(0) if not isinstance(x, float) else 0.0
        if x >= 1:
            return Fraction(1) if not isinstance(x, float) else 1.0
        return self._eval(x)

    def _eval(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(Cdf):
    def _eval(self, x):
        return x


@dataclass(frozen=True)
class Heaviside(Cdf):
    """Unit jump at ``at``: H(x - at)."""

    at: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "at", to_rational(self.at))

    def eval(self, x):
        x = _coerce(x)
        one = 1.0 if isinstance(x, float) else Fraction(1)
        return one if x >= self.at else 0 * one


@dataclass(frozen=True)
class CycleAtomic(Cdf):
    """Uniform law on the members of a cycle."""

    cycle: Cycle

    def eval(self, x):
        x = _coerce(x)
        hits = sum(1 for s in self.cycle.members if s <= x)
        if isinstance(x, float):
            return hits / self.cycle.order
        return Fraction(hits, self.cycle.order)


def _iid_cdf_exact(probs: Sequence, x: Fraction):
    q = len(probs)
    below = [sum(probs[:d]) for d in range(q)]

    def block(digits):
        acc, w = 0, 1
        for d in digits:
            acc += w * below[d]
            w *= probs[d]
        return acc, w

    e = expand(x, q)
    acc, w = block(e.preperiod)
    if not e.period:
        # remaining digits are zeros: nothing below them, plus the atom at x itself
        return acc + w * (1 if probs[0] == 1 else 0)
    a_per, w_per = block(e.period)
    if w_per == 1:
        return acc + w
    return acc + w * a_per / (1 - w_per)


def _iid_cdf_float(probs: Sequence, x: float, max_digits: int = 64) -> float:
    q = len(probs)
    p = [float(v) for v in probs]
    below = [sum(p[:d]) for d in range(q)]
    acc, w = 0.0, 1.0
    for _ in range(max_digits):
        x *= q
        d = min(int(x), q - 1)
        x -= d
        acc += w * below[d]
        w *= p[d]
        if w < 1e-18:
            break
    return acc


@dataclass(frozen=True)
class IIDCdf(Cdf):
    """CDF of 0.X_1X_2... with IID digits of the given law."""

    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(self.probs))
        _check_prob_vector(self.probs)

    @property
    def base(self):
        return len(self.probs)

    def _eval(self, x):
        if isinstance(x, float):
            return _iid_cdf_float(self.probs, x)
        return _iid_cdf_exact(self.probs, x)


def cantor() -> IIDCdf:
    """Cantor function: ternary digits 0 and 2 equally likely, 1 impossible."""
    return IIDCdf((Fraction(1, 2), Fraction(0), Fraction(1, 2)))


def de_rham_takacs(p) -> IIDCdf:
    """Dyadic IID CDF with P(X_1 = 1) = p."""
    p = _num(p)
    return IIDCdf((1 - p, p))


@lru_cache(maxsize=65536)
def _minkowski_exact(x: Fraction) -> Fraction:
    lo_n, lo_d, hi_n, hi_d = 0, 1, 1, 1
    v_lo, v_hi = Fraction(0), Fraction(1)
    if x == 0:
        return v_lo
    if x == 1:
        return v_hi
    while True:
        m_n, m_d = lo_n + hi_n, lo_d + hi_d
        v_m = (v_lo + v_hi) / 2
        c = x.numerator * m_d - m_n * x.denominator
        if c == 0:
            return v_m
        if c < 0:
            hi_n, hi_d, v_hi = m_n, m_d, v_m
        else:
            lo_n, lo_d, v_lo = m_n, m_d, v_m


def minkowski_eval(x) -> Fraction:
    """?(x) by Stern-Brocot mediant descent; exact dyadic value for rational x."""
    x = to_rational(x)
    if not 0 <= x <= 1:
        raise ValueError(f"{x} is outside [0, 1]")
    return _minkowski_exact(x)


@dataclass(frozen=True)
class Minkowski(Cdf):
    def _eval(self, x):
        if isinstance(x, float):
            return float(_minkowski_exact(Fraction(x)))
        return _minkowski_exact(x)


@dataclass(frozen=True)
class MixtureCdf(Cdf):
    weights: tuple
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(_num(w) for w in self.weights))
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.weights) != len(self.components) or not self.components:
            raise ValueError("need one weight per component")
        _check_prob_vector(self.weights, "mixture weights")

    @property
    def exact(self):
        return all(c.exact for c in self.components) and not any(
            isinstance(w, float) for w in self.weights
        )

    def eval(self, x):
        x = _coerce(x)
        return sum(w * c.eval(x) for w, c in zip(self.weights, self.components))


def _below_first(p: DigitProcess, word: Sequence[int]):
    """P(first len(word) digits are lexicographically below word)."""
    total = 0
    for k in range(len(word)):
        nxt = p.next_probs(word[:k])
        for d in range(word[k]):
            total += nxt[d]
    return total


def cumulative_word(p: DigitProcess, word: Sequence[int]):
    """F_1(word) = P((X_1..X_n) <= word) in digit order."""
    word = tuple(word)
    return _below_first(p, word) + p.word_prob(word)


@dataclass(frozen=True)
class FromProcess(Cdf):
    """CDF of 0.X_1X_2... for a digit process.

    Point values exist only at 0, 1 and base-q fractions; everywhere else
    use :func:`envelope`.
    """

    process: DigitProcess

    @property
    def base(self):
        return self.process.base

    @property
    def exact(self):
        return self.process.exact

    def eval(self, x):
        is_float = isinstance(x, float)
        xr = Fraction(x) if is_float else to_rational(x)
        val = self._eval_exact(xr)
        return float(val) if is_float else val

    def _eval_exact(self, x: Fraction):
        p = self.process
        if x < 0:
            return Fraction(0)
        if x >= 1:
            return Fraction(1)
        if x == 0:
            return p.atom_mass((), (0,))
        n = base_q_fraction_order(x, p.base)
        if n is None:
            raise NotOnGridError(
                f"{x} is not a base-{p.base} fraction; F is only pinned on the grid (use envelope)"
            )
        word = expand(x, p.base).digits(n)
        return _below_first(p, word) + p.atom_mass(word, (0,))


def cdf_from_process_grid(p: DigitProcess, word) -> object:
    """F(t + q^-n) = F_1(t_1..t_n) for a stationary process, t = 0.t_1..t_n."""
    if not p.stationary:
        raise ValueError("process is not stationary; F(t + q^-n) = F_1(t) needs stationarity")
    digits = tuple(getattr(word, "digits", word))
    if not digits or any(not 0 <= d < p.base for d in digits):
        raise ValueError(f"invalid base-{p.base} word {digits}")
    return cumulative_word(p, digits)


class Envelope(NamedTuple):
    lower: object
    upper: object

    @property
    def width(self):
        return self.upper - self.lower


def cell_word(x: Fraction, q: int, n: int) -> tuple[int, ...]:
    """Word t of the order-n cell (t, t + q^-n] holding x; x = 0 goes to cell 0...0."""
    k = math.ceil(x * q**n) - 1 if x > 0 else 0
    k = min(max(k, 0), q**n - 1)
    digits = []
    for _ in range(n):
        k, d = divmod(k, q)
        digits.append(d)
    return tuple(reversed(digits))


def envelope(p: DigitProcess, x, n: int) -> Envelope:
    """Bracket F(x) between the grid values around its order-n cell."""
    if not p.stationary:
        raise ValueError("envelope needs a stationary process")
    x = to_rational(x)
    if not 0 <= x <= 1:
        raise ValueError(f"{x} is outside [0, 1]")
    word = cell_word(x, p.base, n)
    lower = _below_first(p, word)
    return Envelope(lower, lower + p.word_prob(word))


def process_from_cdf(F: Cdf, n: int, q: int) -> FiniteDimDistribution:
    """Depth-n point masses P(word) = F(t + q^-n) - F(t) of a CDF satisfying the
    stationarity equation; the cell of the all-zero word also holds F(0)."""
    from .statcheck import verify_stationarity

    report = verify_stationarity(F, q, n)
    if not report.passed:
        raise ValueError(
            f"CDF fails the stationarity equation at {report.worst_point} "
            f"(residual {report.worst_residual}); no consistent digit process"
        )
    check_budget(q, n)
    M = q**n
    probs = {}
    prev = 0
    for k in range(M):
        cur = F.eval(Fraction(k + 1, M))
        mass = cur - prev
        word = cell_word(Fraction(k + 1, M), q, n)
        if mass < 0:
            raise ValueError(f"negative mass {mass} in cell {word}")
        probs[word] = mass
        prev = cur
    return FiniteDimDistribution(q, n, probs)


def uniform() -> Uniform:
    return Uniform()


def heaviside(s=0) -> Heaviside:
    return Heaviside(to_rational(s))


def cycle_atomic(c: Cycle) -> CycleAtomic:
    return CycleAtomic(c)


def minkowski() -> Minkowski:
    return Minkowski()


def mixture(weights, cdfs) -> MixtureCdf:
    return MixtureCdf(tuple(weights), tuple(cdfs))


def from_process(p: DigitProcess) -> FromProcess:
    return FromProcess(p)


def cdf_from_config(cfg: dict) -> Cdf:
    kind = cfg.get("kind")
    if kind == "uniform":
        return Uniform()
    if kind == "heaviside":
        return Heaviside(to_rational(cfg.get("at", 0)))
    if kind == "cycle":
        return CycleAtomic(Cycle(int(cfg["q"]), tuple(cfg["generator"])))
    if kind == "cantor":
        return cantor()
    if kind == "minkowski":
        return Minkowski()
    if kind in ("de_rham_takacs", "derham"):
        return de_rham_takacs(cfg["p"])
    if kind == "iid":
        return IIDCdf(tuple(_num(v) for v in cfg["p"]))
    if kind == "process":
        return FromProcess(process_from_config(cfg["process"]))
    if kind == "mixture":
        return MixtureCdf(
            tuple(_num(w) for w in cfg["weights"]),
            tuple(cdf_from_config(c) for c in cfg["components"]),
        )
    raise ValueError(f"unknown cdf kind {kind!r}")


def iid_process_of(F: IIDCdf) -> IID:
    return IID(F.base, F.probs)
