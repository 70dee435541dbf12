"""Exact base-q digit views of rationals in [0, 1].

Rationals are plain :class:`fractions.Fraction` values.  Digit words are
tuples of ints wrapped in :class:`DigitWord` when the base has to travel
with them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

DEFAULT_MAX_CELLS = 2**20
MAX_CELLS_ENV = "STATDIGITS_MAX_CELLS"


class ResourceBoundError(RuntimeError):
    """Raised when an enumeration would exceed the configured cell budget."""


def max_cells() -> int:
    value = os.environ.get(MAX_CELLS_ENV)
    return int(value) if value else DEFAULT_MAX_CELLS


def check_budget(q: int, n: int, bound: int | None = None) -> None:
    bound = max_cells() if bound is None else bound
    if q**n > bound:
        raise ResourceBoundError(
            f"q**n = {q}**{n} exceeds the resource bound {bound} "
            f"(set {MAX_CELLS_ENV} to override)"
        )


def to_rational(x) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction.

    Floats are rejected: digit arithmetic here is exact only.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def format_rational(x: Fraction) -> str:
    """Serialize as "num/den", always with an explicit denominator."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _check_base(q: int) -> None:
    if not isinstance(q, int) or q < 2:
        raise ValueError(f"base must be an integer >= 2, got {q!r}")


def _check_unit(x: Fraction) -> None:
    if not 0 <= x <= 1:
        raise ValueError(f"{x} is outside [0, 1]")


@dataclass(frozen=True)
class DigitWord:
    base: int
    digits: tuple[int, ...]

    def __post_init__(self):
        _check_base(self.base)
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if not self.digits:
            raise ValueError("a digit word has length >= 1")
        for d in self.digits:
            if not 0 <= d < self.base:
                raise ValueError(f"digit {d} out of range for base {self.base}")

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __str__(self):
        return "".join(map(str, self.digits)) if self.base <= 10 else ",".join(map(str, self.digits))

    @classmethod
    def parse(cls, text: str, base: int) -> "DigitWord":
        text = text.strip()
        if "," in text:
            return cls(base, tuple(int(t) for t in text.split(",")))
        return cls(base, tuple(int(c) for c in text))

    def value(self) -> Fraction:
        """Value of the terminating expansion 0.d1...dn."""
        return word_value(self.digits, self.base)


def word_value(digits: Sequence[int], q: int) -> Fraction:
    num = 0
    for d in digits:
        num = num * q + d
    return Fraction(num, q ** len(digits))


@dataclass(frozen=True)
class BaseQExpansion:
    """Eventually periodic expansion 0.(preperiod)(period)(period)..."""

    base: int
    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    @property
    def terminating(self) -> bool:
        return not self.period

    def value(self) -> Fraction:
        head = word_value(self.preperiod, self.base) if self.preperiod else Fraction(0)
        if not self.period:
            return head
        tail = purely_repeating_value(self.period, self.base)
        return head + tail / self.base ** len(self.preperiod)

    def digits(self, n: int) -> tuple[int, ...]:
        """First n digits (zeros after a terminating expansion)."""
        out = list(self.preperiod[:n])
        if len(out) < n:
            if self.period:
                k = n - len(out)
                reps = -(-k // len(self.period))
                out.extend((self.period * reps)[:k])
            else:
                out.extend([0] * (n - len(out)))
        return tuple(out)

    def __str__(self):
        pre = "".join(map(str, self.preperiod))
        per = "".join(map(str, self.period))
        return f"0.{pre}({per})" if per else f"0.{pre}"


def expand(x, q: int) -> BaseQExpansion:
    """Canonical base-q expansion of a rational in [0, 1].

    Terminating expansions keep an empty period and never end in trailing
    (q-1)s.  The one exception is x = 1, whose only digit expansion is the
    repeating digit q-1.
    """
    _check_base(q)
    x = to_rational(x)
    _check_unit(x)
    if x == 1:
        return BaseQExpansion(q, (), (q - 1,))
    if x == 0:
        return BaseQExpansion(q, (0,), ())
    num, den = x.numerator, x.denominator
    digits: list[int] = []
    seen: dict[int, int] = {}
    r = num
    while r and r not in seen:
        seen[r] = len(digits)
        d, r = divmod(r * q, den)
        digits.append(d)
    if r == 0:
        return BaseQExpansion(q, tuple(digits), ())
    start = seen[r]
    return BaseQExpansion(q, tuple(digits[:start]), tuple(digits[start:]))


def base_q_fraction_order(x, q: int) -> int | None:
    """Order n of x = m/q**n in (0, 1) with q not dividing m, else None."""
    _check_base(q)
    x = to_rational(x)
    _check_unit(x)
    if x == 0 or x == 1:
        return None
    den = x.denominator
    power = 1
    for n in range(1, den.bit_length() + 1):
        power *= q
        if power % den == 0:
            return n
    return None


def base_q_fractions(q: int, depth: int) -> list[Fraction]:
    """All base-q fractions of order <= depth, sorted."""
    _check_base(q)
    check_budget(q, depth)
    M = q**depth
    return [Fraction(k, M) for k in range(1, M)]


def purely_repeating_value(word, q: int | None = None) -> Fraction:
    """Value of 0.(t1...tn)(t1...tn)... = sum t_j q^-j / (1 - q^-n)."""
    if isinstance(word, DigitWord):
        q, digits = word.base, word.digits
    else:
        digits = tuple(word)
        if q is None:
            raise ValueError("base required for a bare digit sequence")
        DigitWord(q, digits)
    num = 0
    for d in digits:
        num = num * q + d
    return Fraction(num, q ** len(digits) - 1)


def is_primitive(digits: Sequence[int]) -> bool:
    """True when the word is not a power of a shorter word."""
    n = len(digits)
    w = tuple(digits)
    for d in range(1, n):
        if n % d == 0 and w == w[:d] * (n // d):
            return False
    return True


def _rotate_right(w: tuple[int, ...], k: int) -> tuple[int, ...]:
    k %= len(w)
    return w[len(w) - k :] + w[: len(w) - k] if k else w


@dataclass(frozen=True)
class Cycle:
    """Rotation class of an aperiodic digit word.

    ``generator`` is the lexicographically smallest rotation; member j
    (0-based) is the purely repeating number of the generator rotated right
    by j places, so shifting member j gives member j-1.
    """

    base: int
    generator: tuple[int, ...]

    def __post_init__(self):
        w = DigitWord(self.base, self.generator).digits
        if not is_primitive(w):
            raise ValueError(f"word {w} is periodic; its rotations are not pairwise distinct")
        object.__setattr__(self, "generator", min(_rotate_right(w, k) for k in range(len(w))))

    @property
    def order(self) -> int:
        return len(self.generator)

    @property
    def words(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_rotate_right(self.generator, j) for j in range(self.order))

    @cached_property
    def members(self) -> tuple[Fraction, ...]:
        return tuple(purely_repeating_value(w, self.base) for w in self.words)

    def member_set(self) -> frozenset[Fraction]:
        return frozenset(self.members)

    def to_json(self) -> dict:
        return {
            "q": self.base,
            "n": self.order,
            "generator": list(self.generator),
            "members": [format_rational(s) for s in self.members],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Cycle":
        c = cls(int(data["q"]), tuple(data["generator"]))
        if "members" in data and [to_rational(s) for s in data["members"]] != list(c.members):
            raise ValueError("members do not match the generator")
        return c


def cycle_from_word(word, q: int | None = None) -> Cycle:
    if isinstance(word, DigitWord):
        return Cycle(word.base, word.digits)
    if q is None:
        raise ValueError("base required for a bare digit sequence")
    return Cycle(q, tuple(word))


def lyndon_words(q: int, n: int) -> Iterator[tuple[int, ...]]:
    """Lyndon words of length exactly n over {0..q-1}, in lexicographic order (Duval)."""
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == n:
            yield tuple(w)
        while len(w) < n:
            w.append(w[-m])
        while w and w[-1] == q - 1:
            w.pop()


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


def necklace_count(q: int, n: int) -> int:
    """Number of aperiodic necklaces: (1/n) sum_{d | n} mu(d) q^(n/d)."""
    total = sum(_mobius(d) * q ** (n // d) for d in range(1, n + 1) if n % d == 0)
    return total // n


def enumerate_cycles(q: int, n: int, bound: int | None = None) -> list[Cycle]:
    """All cycles of order exactly n, one per rotation class."""
    _check_base(q)
    if n < 1:
        raise ValueError("cycle order must be >= 1")
    check_budget(q, n, bound)
    return [Cycle(q, w) for w in lyndon_words(q, n)]


def contraction(j: int, x, q: int) -> Fraction:
    """S_j(x) = (x + j) / q."""
    _check_base(q)
    if not 0 <= j < q:
        raise ValueError(f"digit {j} out of range for base {q}")
    x = to_rational(x)
    _check_unit(x)
    return (x + j) / q


def shift(x, q: int) -> tuple[int, Fraction]:
    """First digit of x and q*x mod 1; the inverse of :func:`contraction`.

    x = 1 maps to (q-1, 1), following its expansion 0.(q-1)(q-1)...
    """
    _check_base(q)
    x = to_rational(x)
    _check_unit(x)
    if x == 1:
        return q - 1, Fraction(1)
    d = (x * q).numerator // (x * q).denominator
    return d, x * q - d
