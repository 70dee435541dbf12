"""Digit-process models with exact finite-dimensional distributions.

Probabilities are Fractions unless the caller hands in floats, in which case
arithmetic silently stays in floating point ("float mode").
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate, product
from typing import NamedTuple, Sequence

import numpy as np

from .baseq import Cycle, check_budget, purely_repeating_value, to_rational, word_value

FLOAT_TOL = 1e-12


def _num(x):
    """Config number: exact for ints/strings/Fractions, float stays float."""
    if isinstance(x, float):
        return x
    return to_rational(x)


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def _check_prob_vector(p: Sequence, what: str = "probability vector") -> None:
    if any(v < 0 for v in p):
        raise ValueError(f"{what} has negative entries: {list(p)}")
    total = sum(p)
    if _is_exact(p):
        if total != 1:
            raise ValueError(f"{what} sums to {total}, not 1")
    elif abs(total - 1) > FLOAT_TOL:
        raise ValueError(f"{what} sums to {total}, not 1")


def make_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, draw index)."""
    if not 0 <= seed < 2**64 or not 0 <= index < 2**64:
        raise ValueError("seed and index must lie in [0, 2**64)")
    return np.random.Generator(np.random.Philox(key=seed + (index << 64)))


class DigitProcess:
    """Base class: a law on digit sequences over {0, ..., base-1}."""

    base: int

    def word_prob(self, word: Sequence[int]):
        """P(X_1..X_n = word)."""
        return self.next_probs(tuple(word[:-1]))[word[-1]] if word else 1

    def next_probs(self, prefix: Sequence[int]) -> list:
        """[P(prefix + (d,)) for d in range(base)]."""
        raise NotImplementedError

    def atom_mass(self, preperiod: Sequence[int], period: Sequence[int]):
        """P(digit sequence = preperiod + period repeated forever)."""
        raise NotImplementedError

    @property
    def stationary(self) -> bool:
        raise NotImplementedError

    @property
    def exact(self) -> bool:
        raise NotImplementedError

    def _sample(self, rng: np.random.Generator, n: int, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class IID(DigitProcess):
    base: int
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(self.probs))
        if len(self.probs) != self.base:
            raise ValueError(f"need {self.base} digit probabilities, got {len(self.probs)}")
        _check_prob_vector(self.probs)

    def next_probs(self, prefix):
        w = 1
        for d in prefix:
            w *= self.probs[d]
        return [w * p for p in self.probs]

    def word_prob(self, word):
        w = 1
        for d in word:
            w *= self.probs[d]
        return w

    def atom_mass(self, preperiod, period):
        if not period:
            raise ValueError("period must be nonempty")
        rho = self.word_prob(period)
        return self.word_prob(preperiod) * rho if rho == 1 else 0 * rho

    @property
    def stationary(self):
        return True

    @property
    def exact(self):
        return _is_exact(self.probs)

    def marginal(self):
        return list(self.probs)

    def lifted(self):
        """(initial law, transition matrix) of the digit chain X_j itself."""
        return list(self.probs), [list(self.probs) for _ in range(self.base)]

    def _sample(self, rng, n, size):
        p = np.array([float(v) for v in self.probs])
        return rng.choice(self.base, size=(size, n), p=p / p.sum())


def _solve_invariant(P: list[list]) -> list:
    """Unique pi with pi P = pi, sum pi = 1, by exact Gauss-Jordan elimination."""
    N = len(P)
    # unknowns pi_0..pi_{N-1}; equations sum_i pi_i (P_ij - delta_ij) = 0, plus normalization
    A = [[P[i][j] - (1 if i == j else 0) for i in range(N)] + [0] for j in range(N)]
    A.append([1] * N + [1])
    rows, cols = len(A), N
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / Fraction(A[r][c]) if _is_exact(A[r]) else 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
    if r < cols:
        raise ValueError(
            "transition kernel has no unique invariant law; pass an explicit initial law"
        )
    return [A[i][cols] for i in range(cols)]


@dataclass(frozen=True)
class MarkovChain(DigitProcess):
    """Order-r chain; states are the last r digits read as a base-q integer.

    ``rows[s][d]`` is P(next digit = d | state s).  ``initial`` is the law of
    (X_1..X_r) over the q**r states, or "stationary" for the exact invariant
    law of the lifted chain.
    """

    base: int
    rows: tuple
    initial: tuple | str = "stationary"
    order: int = 1
    _stationary: bool = field(init=False, repr=False, compare=False, default=False)

    def __post_init__(self):
        q, r = self.base, self.order
        if r < 1:
            raise ValueError("Markov order must be >= 1 (use IID for order 0)")
        rows = tuple(tuple(row) for row in self.rows)
        if len(rows) != q**r or any(len(row) != q for row in rows):
            raise ValueError(f"need {q**r} rows of {q} probabilities")
        for row in rows:
            _check_prob_vector(row, "transition row")
        object.__setattr__(self, "rows", rows)
        lifted = self._lifted_matrix()
        if isinstance(self.initial, str):
            if self.initial != "stationary":
                raise ValueError(f"unknown initial law {self.initial!r}")
            pi = _solve_invariant(lifted)
            object.__setattr__(self, "initial", tuple(pi))
            object.__setattr__(self, "_stationary", True)
        else:
            init = tuple(self.initial)
            if len(init) != q**r:
                raise ValueError(f"initial law needs {q**r} entries")
            _check_prob_vector(init, "initial law")
            object.__setattr__(self, "initial", init)
            object.__setattr__(self, "_stationary", self._is_invariant(init, lifted))

    def _lifted_matrix(self) -> list[list]:
        q, N = self.base, self.base**self.order
        P = [[0] * N for _ in range(N)]
        for s in range(N):
            for d in range(q):
                P[s][(s * q + d) % N] += self.rows[s][d]
        return P

    @staticmethod
    def _is_invariant(init, P) -> bool:
        N = len(P)
        step = [sum(init[i] * P[i][j] for i in range(N)) for j in range(N)]
        if _is_exact(init) and all(_is_exact(row) for row in P):
            return list(step) == list(init)
        return max(abs(a - b) for a, b in zip(step, init)) <= FLOAT_TOL

    def _state(self, digits) -> int:
        s = 0
        for d in digits:
            s = s * self.base + d
        return s % self.base**self.order

    def word_prob(self, word):
        q, r = self.base, self.order
        word = tuple(word)
        if len(word) < r:
            k = r - len(word)
            head = self._state(word) * q**k
            return sum(self.initial[head : head + q**k])
        w = self.initial[self._state(word[:r])]
        s = self._state(word[:r])
        for d in word[r:]:
            w *= self.rows[s][d]
            s = (s * q + d) % q**r
        return w

    def next_probs(self, prefix):
        prefix = tuple(prefix)
        if len(prefix) + 1 <= self.order:
            return [self.word_prob(prefix + (d,)) for d in range(self.base)]
        w = self.word_prob(prefix)
        row = self.rows[self._state(prefix)]
        return [w * p for p in row]

    def atom_mass(self, preperiod, period):
        if not period:
            raise ValueError("period must be nonempty")
        period = tuple(period)
        reps = -(-self.order // len(period)) + 1
        w = tuple(preperiod) + period * reps
        base_mass = self.word_prob(w)
        if base_mass == 0:
            return base_mass
        s = self._state(w)
        rho = 1
        for d in period:
            rho *= self.rows[s][d]
            s = (s * self.base + d) % self.base**self.order
        return base_mass if rho == 1 else 0 * rho

    @property
    def stationary(self):
        return self._stationary

    @property
    def exact(self):
        return _is_exact(self.initial) and all(_is_exact(r) for r in self.rows)

    def marginal(self):
        return [self.word_prob((d,)) for d in range(self.base)]

    def lifted(self):
        """(initial law, transition matrix) of the chain of r-digit windows."""
        return list(self.initial), self._lifted_matrix()

    def _sample(self, rng, n, size):
        q, r, N = self.base, self.order, self.base**self.order
        init = np.array([float(v) for v in self.initial])
        rows = np.array([[float(v) for v in row] for row in self.rows])
        cum = np.cumsum(rows, axis=1)
        states = rng.choice(N, size=size, p=init / init.sum())
        out = np.empty((size, max(n, r)), dtype=np.int64)
        for k in range(r):
            out[:, k] = (states // q ** (r - 1 - k)) % q
        for k in range(r, n):
            u = rng.random(size)
            d = (u[:, None] > cum[states]).sum(axis=1)
            d = np.minimum(d, q - 1)
            out[:, k] = d
            states = (states * q + d) % N
        return out[:, :n]


@dataclass(frozen=True)
class CycleProcess(DigitProcess):
    """X uniform on the members of a cycle; digits are the periodic words."""

    cycle: Cycle

    @property
    def base(self):
        return self.cycle.base

    def _periodic_prefixes(self, m: int):
        n = self.cycle.order
        reps = -(-m // n)
        return [(w * reps)[:m] for w in self.cycle.words]

    def word_prob(self, word):
        word = tuple(word)
        hits = sum(1 for w in self._periodic_prefixes(len(word)) if w == word)
        return Fraction(hits, self.cycle.order)

    def next_probs(self, prefix):
        prefix = tuple(prefix)
        counts = [0] * self.base
        for w in self._periodic_prefixes(len(prefix) + 1):
            if w[:-1] == prefix:
                counts[w[-1]] += 1
        return [Fraction(c, self.cycle.order) for c in counts]

    def atom_mass(self, preperiod, period):
        if not period:
            raise ValueError("period must be nonempty")
        q = self.base
        x = purely_repeating_value(period, q) / q ** len(preperiod)
        if preperiod:
            x += word_value(preperiod, q)
        hits = sum(1 for s in self.cycle.members if s == x)
        return Fraction(hits, self.cycle.order)

    @property
    def stationary(self):
        return True

    @property
    def exact(self):
        return True

    def marginal(self):
        return self.next_probs(())

    def _sample(self, rng, n, size):
        words = np.array(self._periodic_prefixes(n), dtype=np.int64).reshape(self.cycle.order, n)
        return words[rng.integers(0, self.cycle.order, size=size)]


@dataclass(frozen=True)
class Mixture(DigitProcess):
    weights: tuple
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.weights) != len(self.components) or not self.components:
            raise ValueError("need one weight per component")
        _check_prob_vector(self.weights, "mixture weights")
        if len({c.base for c in self.components}) != 1:
            raise ValueError("mixture components must share a base")

    @property
    def base(self):
        return self.components[0].base

    def word_prob(self, word):
        return sum(w * c.word_prob(word) for w, c in zip(self.weights, self.components))

    def next_probs(self, prefix):
        out = [0] * self.base
        for w, c in zip(self.weights, self.components):
            for d, v in enumerate(c.next_probs(prefix)):
                out[d] += w * v
        return out

    def atom_mass(self, preperiod, period):
        return sum(w * c.atom_mass(preperiod, period) for w, c in zip(self.weights, self.components))

    @property
    def stationary(self):
        # sufficient, not necessary
        return all(c.stationary for c in self.components)

    @property
    def exact(self):
        return _is_exact(self.weights) and all(c.exact for c in self.components)

    def marginal(self):
        return self.next_probs(())

    def _sample(self, rng, n, size):
        w = np.array([float(v) for v in self.weights])
        pick = rng.choice(len(self.components), size=size, p=w / w.sum())
        out = np.empty((size, n), dtype=np.int64)
        for i, comp in enumerate(self.components):
            idx = np.flatnonzero(pick == i)
            if idx.size:
                out[idx] = comp._sample(rng, n, idx.size)
        return out


def cycle_process(c: Cycle) -> CycleProcess:
    return CycleProcess(c)


@dataclass(frozen=True)
class FiniteDimDistribution:
    """Point masses of (X_1..X_n); words are kept in lexicographic order."""

    base: int
    depth: int
    probs: dict

    def words(self):
        return list(product(range(self.base), repeat=self.depth))

    def __getitem__(self, word):
        return self.probs[tuple(word)]

    def total(self):
        return sum(self.probs.values())

    def cumulative(self) -> list:
        """F_1 at every word, in digit order."""
        return list(accumulate(self.probs[w] for w in self.words()))

    def marginalize_last(self) -> "FiniteDimDistribution":
        if self.depth < 2:
            raise ValueError("cannot marginalize a depth-1 table")
        out: dict = {}
        for w, v in self.probs.items():
            out[w[:-1]] = out.get(w[:-1], 0) + v
        return FiniteDimDistribution(self.base, self.depth - 1, out)

    def marginalize_first(self) -> "FiniteDimDistribution":
        if self.depth < 2:
            raise ValueError("cannot marginalize a depth-1 table")
        out: dict = {}
        for w, v in self.probs.items():
            out[w[1:]] = out.get(w[1:], 0) + v
        return FiniteDimDistribution(self.base, self.depth - 1, out)

    def is_exact(self) -> bool:
        return _is_exact(self.probs.values())


def finite_dim(p: DigitProcess, n: int) -> FiniteDimDistribution:
    if n < 1:
        raise ValueError("depth must be >= 1")
    check_budget(p.base, n)
    if n == 1:
        return FiniteDimDistribution(p.base, 1, {(d,): v for d, v in enumerate(p.next_probs(()))})
    probs = {}
    for prefix in product(range(p.base), repeat=n - 1):
        for d, v in enumerate(p.next_probs(prefix)):
            probs[prefix + (d,)] = v
    return FiniteDimDistribution(p.base, n, probs)


def shifted_finite_dim(p: DigitProcess, n: int) -> FiniteDimDistribution:
    """Law of (X_2..X_{n+1})."""
    return finite_dim(p, n + 1).marginalize_first()


class StationarityCheck(NamedTuple):
    stationary: bool
    defect: object
    witness: tuple | None


def table_defect(deeper: FiniteDimDistribution) -> tuple[object, tuple | None]:
    """max |F_1 - F_2| comparing the two depth-(n-1) marginals of a depth-n table."""
    first = deeper.marginalize_last()
    second = deeper.marginalize_first()
    worst, witness = 0, None
    for w, a, b in zip(first.words(), first.cumulative(), second.cumulative()):
        d = abs(a - b)
        if d > worst:
            worst, witness = d, w
    return worst, witness


def is_stationary(p: DigitProcess, depth: int, tol=0) -> StationarityCheck:
    """Compare F_1 and F_2 on all words of length <= depth."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    worst, witness = 0, None
    for n in range(1, depth + 1):
        d, w = table_defect(finite_dim(p, n + 1))
        if d > worst:
            worst, witness = d, w
    return StationarityCheck(worst <= tol, worst, witness)


def sample(p: DigitProcess, n: int, seed: int, index: int = 0) -> tuple[int, ...]:
    """One reproducible draw of (X_1..X_n) for stream (seed, index)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return tuple(int(d) for d in p._sample(make_rng(seed, index), n, 1)[0])


def sample_many(p: DigitProcess, n: int, size: int, seed: int, index: int = 0) -> np.ndarray:
    """``size`` draws from stream (seed, index) as a (size, n) int array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return p._sample(make_rng(seed, index), n, size)


def process_from_config(cfg: dict) -> DigitProcess:
    """Build a process from its JSON/TOML dict form."""
    kind = cfg.get("kind")
    if kind == "iid":
        probs = [_num(v) for v in cfg["p"]]
        return IID(int(cfg.get("q", len(probs))), tuple(probs))
    if kind == "markov":
        rows = [[_num(v) for v in row] for row in cfg["rows"]]
        q = int(cfg.get("q", len(rows[0])))
        init = cfg.get("initial", "stationary")
        if not isinstance(init, str):
            init = tuple(_num(v) for v in init)
        return MarkovChain(q, tuple(map(tuple, rows)), init, int(cfg.get("order", 1)))
    if kind == "cycle":
        return CycleProcess(Cycle(int(cfg["q"]), tuple(cfg["generator"])))
    if kind == "mixture":
        return Mixture(
            tuple(_num(w) for w in cfg["weights"]),
            tuple(process_from_config(c) for c in cfg["components"]),
        )
    raise ValueError(f"unknown process kind {kind!r}")
