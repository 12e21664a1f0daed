"""Words over {1..ell}, scaled cocycle products, and deterministic folds.

A word I = i_0 ... i_{n-1} indexes the product A_{i_{n-1}} ... A_{i_0}: later
symbols multiply on the left. Products are carried as (unit, logscale) with
the unit's operator norm kept in [0.5, 2] by exact power-of-two rescaling, so
arbitrarily contracting or expanding systems never underflow.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product as _iproduct
from typing import Callable, Iterator

import numpy as np

from .errors import InputError, ResourceLimitError
from .linalg import operator_norm
from .systems import GeneratorSystem

Word = tuple[int, ...]

DEFAULT_BUDGET = 20_000_000
_LN2 = math.log(2.0)


def word_str(word: Word, ell: int | None = None) -> str:
    """'1'..'9' characters for small alphabets, comma-separated otherwise."""
    if not word:
        return ""
    big = (ell or max(word)) > 9
    return ",".join(map(str, word)) if big else "".join(map(str, word))


def parse_word(text: str, ell: int) -> Word:
    text = text.strip()
    if not text:
        return ()
    parts = text.split(",") if "," in text else list(text)
    try:
        word = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"cannot parse word {text!r}") from exc
    validate_word(word, ell)
    return word


def validate_word(word: Word, ell: int) -> None:
    for s in word:
        if not 1 <= s <= ell:
            raise InputError(f"symbol {s} outside 1..{ell} in word {word_str(word)!r}")


def check_budget(count: float, budget: int = DEFAULT_BUDGET) -> None:
    if count > budget:
        raise ResourceLimitError(f"{count:.3g} words exceed the budget of {budget}")


def enumerate_words(ell: int, n: int) -> Iterator[Word]:
    """All length-n words in lexicographic order (1-based symbols)."""
    if ell < 1 or n < 0:
        raise InputError("need ell >= 1 and n >= 0")
    return _iproduct(range(1, ell + 1), repeat=n)


def word_rank(word: Word, ell: int) -> int:
    """Lexicographic rank of a word among Lambda(len(word))."""
    r = 0
    for s in word:
        r = r * ell + (s - 1)
    return r


@dataclass(frozen=True)
class ScaledProduct:
    """A matrix carried as exp(logscale) * unit with |unit| in [0.5, 2]."""

    unit: np.ndarray
    logscale: float

    @property
    def matrix(self) -> np.ndarray:
        return math.exp(self.logscale) * self.unit

    @property
    def log_norm(self) -> float:
        return self.logscale + math.log(operator_norm(self.unit))

    def norm(self) -> float:
        return math.exp(self.log_norm)

    def left_multiply(self, A: np.ndarray) -> "ScaledProduct":
        return _rescaled(A @ self.unit, self.logscale)


def _rescaled(M: np.ndarray, logscale: float) -> ScaledProduct:
    nrm = operator_norm(M)
    if nrm == 0.0:
        raise InputError("zero matrix in a scaled product")
    if 0.5 <= nrm <= 2.0:
        return ScaledProduct(unit=M, logscale=logscale)
    e = math.floor(math.log2(nrm))
    return ScaledProduct(unit=M * 2.0 ** (-e), logscale=logscale + e * _LN2)


def identity_product(d: int) -> ScaledProduct:
    return ScaledProduct(unit=np.eye(d), logscale=0.0)


def product(system: GeneratorSystem, word: Word) -> ScaledProduct:
    """Scaled cocycle product along a word; empty word gives the identity."""
    validate_word(word, system.ell)
    acc = identity_product(system.dim)
    for s in word:
        acc = acc.left_multiply(system.generator(s))
    return acc


class LogSumExp:
    """Mergeable accumulator for log(sum of exponentials); merge order fixed by caller."""

    __slots__ = ("m", "s")

    def __init__(self, log_term: float | None = None):
        if log_term is None:
            self.m, self.s = -math.inf, 0.0
        else:
            self.m, self.s = float(log_term), 1.0

    def merge(self, other: "LogSumExp") -> "LogSumExp":
        out = LogSumExp()
        if self.m >= other.m:
            hi, lo = self, other
        else:
            hi, lo = other, self
        if hi.m == -math.inf:
            return out
        out.m = hi.m
        out.s = hi.s + (lo.s * math.exp(lo.m - hi.m) if lo.s else 0.0)
        return out

    def value(self) -> float:
        if self.m == -math.inf:
            return -math.inf
        return self.m + math.log(self.s)


def _fold_block(system: GeneratorSystem, first: int, n: int, map_fn, reduce_fn):
    """Left fold in lexicographic order over the block of words starting with `first`."""
    ell, d = system.ell, system.dim
    acc = None
    base = product(system, (first,))
    stack_prod = [base] + [None] * (n - 1)
    digits = [1] * (n - 1)
    pos = 0
    while True:
        while pos < n - 1:
            stack_prod[pos + 1] = stack_prod[pos].left_multiply(system.generator(digits[pos]))
            pos += 1
        word = (first, *digits)
        val = map_fn(word, stack_prod[n - 1])
        acc = val if acc is None else reduce_fn(acc, val)
        pos = n - 2
        while pos >= 0 and digits[pos] == ell:
            digits[pos] = 1
            pos -= 1
        if pos < 0:
            break
        digits[pos] += 1
    return acc


def fold_words(
    system: GeneratorSystem,
    n: int,
    map_fn: Callable[[Word, ScaledProduct], object],
    reduce_fn: Callable[[object, object], object],
    *,
    threads: int = 1,
    budget: int = DEFAULT_BUDGET,
):
    """Visit every word of Lambda(n) once, reusing prefix products.

    The word space is split into the ell fixed first-symbol blocks; each block
    is folded sequentially in lexicographic order and block results are merged
    in block order, so the value does not depend on the thread schedule.
    """
    if n < 0:
        raise InputError("n must be nonnegative")
    check_budget(system.ell ** n, budget)
    if n == 0:
        return map_fn((), identity_product(system.dim))
    firsts = range(1, system.ell + 1)
    if threads > 1 and system.ell > 1:
        with ThreadPoolExecutor(max_workers=min(threads, system.ell)) as pool:
            partials = list(pool.map(
                lambda f: _fold_block(system, f, n, map_fn, reduce_fn), firsts))
    else:
        partials = [_fold_block(system, f, n, map_fn, reduce_fn) for f in firsts]
    acc = partials[0]
    for p in partials[1:]:
        acc = reduce_fn(acc, p)
    return acc


def log_norm_sum(system: GeneratorSystem, n: int, scale: float = 1.0, *, threads: int = 1,
                 budget: int = DEFAULT_BUDGET) -> float:
    """log of sum over Lambda(n) of |A_I|^scale, via the stable fold."""
    out = fold_words(
        system, n,
        lambda _w, p: LogSumExp(scale * p.log_norm),
        lambda a, b: a.merge(b),
        threads=threads, budget=budget,
    )
    return out.value()
