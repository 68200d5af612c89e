"""Exact Lebesgue outer measure on cylinder sets.

Two measure spaces are supported:

* the space of infinite bit sequences, where a finite set of bit strings
  ``S`` denotes the open set of all sequences extending some member, and a
  prefix-free representative has measure ``sum(2**-len(x) for x in S)``;

* the space of infinite families ``(sigma_1, sigma_2, ...)`` of encoding
  functions, where ``sigma_k`` is a bijection from ``{0, ..., 2**k - 1}``
  onto k-bit strings.  A finite prefix of such a family spans a cell whose
  volume is ``prod(1 / (2**k)! for widths k covered)``.

Bit strings are plain ``str`` objects over ``'0'``/``'1'`` (the empty
string is the empty prefix).  Family prefixes are tuples of
:class:`EncodingFunction` with widths 1, 2, ..., len in order.  All
measures are :class:`fractions.Fraction`; nothing here rounds.

Every value is immutable after construction and every operation is a
pure function, so concurrent callers can share inputs freely.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Iterator, Sequence

Bits = str

ZERO = Fraction(0)
ONE = Fraction(1)


class KindMismatchError(TypeError):
    """Binary and family arguments were mixed in one operation."""


class SetFormatError(ValueError):
    """A cylinder-set text file could not be parsed."""


def validate_bits(s: Bits) -> Bits:
    if not isinstance(s, str) or any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    return s


def all_bit_strings(length: int) -> list[Bits]:
    """All bit strings of exactly `length` bits, lexicographically."""
    return [format(i, f"0{length}b") if length else "" for i in range(2**length)]


def bit_strings_up_to(q: int) -> list[Bits]:
    """All bit strings of length <= q in canonical order (by length, then value)."""
    out: list[Bits] = []
    for length in range(q + 1):
        out.extend(all_bit_strings(length))
    return out


# ---------------------------------------------------------------------------
# Encoding functions and family prefixes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EncodingFunction:
    """A bijection from ``{0, ..., 2**n - 1}`` onto n-bit strings.

    ``table[x]`` holds the integer whose n-bit rendering is the encoding of
    ``x``; strings are produced only at I/O boundaries.
    """

    n: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        size = 2**self.n
        if len(self.table) != size or sorted(self.table) != list(range(size)):
            raise ValueError(f"table is not a permutation of range({size})")

    def value(self, x: int) -> int:
        return self.table[x]

    def encode(self, x: int) -> Bits:
        return format(self.table[x], f"0{self.n}b")

    def decode(self, s: Bits) -> int:
        """Preimage of an n-bit string; raises if s is not in the image."""
        if len(s) != self.n:
            raise ValueError(f"expected {self.n} bits, got {s!r}")
        return self.inverse()[int(s, 2)]

    @lru_cache(maxsize=None)
    def inverse(self) -> tuple[int, ...]:
        inv = [0] * len(self.table)
        for x, y in enumerate(self.table):
            inv[y] = x
        return tuple(inv)


FamilyPrefix = tuple[EncodingFunction, ...]

EMPTY_PREFIX: FamilyPrefix = ()


@lru_cache(maxsize=None)
def encf_count(n: int) -> int:
    """Number of encoding functions of width n, i.e. (2**n)!."""
    return factorial(2**n)


@lru_cache(maxsize=8)
def all_encodings(n: int) -> tuple[EncodingFunction, ...]:
    """All encoding functions of width n in lexicographic table order.

    Materialized once per width; width 3 already has 40320 members, so
    callers should not ask for n > 3 unless they mean it.
    """
    return tuple(
        EncodingFunction(n, perm) for perm in itertools.permutations(range(2**n))
    )


def validate_family_prefix(s: FamilyPrefix) -> FamilyPrefix:
    for k, enc in enumerate(s, start=1):
        if not isinstance(enc, EncodingFunction) or enc.n != k:
            raise ValueError(f"entry {k} must be an encoding function of width {k}")
    return s


def is_binary_prefix_of(s: Bits, t: Bits) -> bool:
    return t.startswith(s)


def is_family_prefix_of(s: FamilyPrefix, t: FamilyPrefix) -> bool:
    return len(s) <= len(t) and t[: len(s)] == s


def _is_prefix_of(s, t) -> bool:
    if isinstance(s, str) and isinstance(t, str):
        return is_binary_prefix_of(s, t)
    if isinstance(s, tuple) and isinstance(t, tuple):
        return is_family_prefix_of(s, t)
    raise KindMismatchError(f"cannot compare {type(s).__name__} with {type(t).__name__}")


# ---------------------------------------------------------------------------
# Normalization and measure
# ---------------------------------------------------------------------------


def _normalize(members: Iterable) -> frozenset:
    """Drop every member that has a proper prefix in the set."""
    pool = frozenset(members)
    kept = []
    for s in pool:
        if not any(s[:i] in pool for i in range(len(s))):
            kept.append(s)
    return frozenset(kept)


def normalize_prefix_free(strings: Iterable[Bits]) -> frozenset[Bits]:
    """Prefix-free representative of a binary cylinder set (same open set)."""
    return _normalize(strings)


def normalize_family_prefix_free(prefixes: Iterable[FamilyPrefix]) -> frozenset[FamilyPrefix]:
    """Prefix-free representative of a family cylinder set (same open set)."""
    return _normalize(prefixes)


def binary_cell_volume(s: Bits) -> Fraction:
    return Fraction(1, 2 ** len(s))


def family_cell_volume(s: FamilyPrefix) -> Fraction:
    """Volume of the cell spanned by a finite family prefix.

    The empty prefix spans the whole space and has volume 1.
    """
    den = 1
    for k in range(1, len(s) + 1):
        den *= encf_count(k)
    return Fraction(1, den)


def cell_volume(s) -> Fraction:
    return binary_cell_volume(s) if isinstance(s, str) else family_cell_volume(s)


def binary_measure(strings: Iterable[Bits]) -> Fraction:
    """Exact measure of the open set denoted by a finite set of bit strings."""
    return sum((binary_cell_volume(s) for s in _normalize(strings)), ZERO)


def family_measure(prefixes: Iterable[FamilyPrefix]) -> Fraction:
    """Exact measure of the open set denoted by a finite set of family prefixes."""
    return sum((family_cell_volume(s) for s in _normalize(prefixes)), ZERO)


def measure(members: Iterable) -> Fraction:
    """Measure of a cylinder set of either kind (dispatch on member type)."""
    pool = frozenset(members)
    if not pool:
        return ZERO
    sample = next(iter(pool))
    if isinstance(sample, str):
        return binary_measure(pool)
    return family_measure(pool)


def intersect_with_cell(members: Iterable, t) -> frozenset:
    """Representative of ``open_set(members) & cell(t)``.

    Built as ``T | {s in members : t is a prefix of s}`` where ``T = {t}``
    exactly when some member is a prefix of ``t`` (then the whole cell is
    inside the open set).
    """
    pool = frozenset(members)
    if pool:
        sample = next(iter(pool))
        if isinstance(sample, str) != isinstance(t, str):
            raise KindMismatchError("set members and cell prefix have different kinds")
    extensions = {s for s in pool if _is_prefix_of(t, s)}
    if any(_is_prefix_of(s, t) for s in pool):
        extensions.add(t)
    return frozenset(extensions)


def open_set_covers(members: Iterable, s) -> bool:
    """True iff the cell of `s` lies inside the open set, by cell containment."""
    return any(_is_prefix_of(m, s) for m in _normalize(members))


def open_sets_disjoint(a: Iterable, b: Iterable) -> bool:
    na, nb = _normalize(a), _normalize(b)
    return not any(
        _is_prefix_of(x, y) or _is_prefix_of(y, x) for x in na for y in nb
    )


def subadditivity_check(sets: Sequence[Iterable]) -> bool:
    """Exact subadditivity over a finite list, with equality when disjoint.

    Returns True iff ``measure(union) <= sum(measures)`` and, whenever the
    open sets are pairwise disjoint, the two sides are equal.
    """
    sets = [frozenset(s) for s in sets]
    union: set = set()
    for s in sets:
        union |= s
    lhs = measure(union)
    rhs = sum((measure(s) for s in sets), ZERO)
    if lhs > rhs:
        return False
    disjoint = all(
        open_sets_disjoint(sets[i], sets[j])
        for i in range(len(sets))
        for j in range(i + 1, len(sets))
    )
    if disjoint and lhs != rhs:
        return False
    return True


def monotonicity_check(small: Iterable, big: Iterable) -> bool:
    """True unless cell containment holds but the measures are out of order."""
    small, big = frozenset(small), frozenset(big)
    contained = all(open_set_covers(big, s) for s in _normalize(small))
    if not contained:
        return True
    return measure(small) <= measure(big)


# ---------------------------------------------------------------------------
# Line-oriented serialization
# ---------------------------------------------------------------------------

# The token for the empty string / empty prefix in set files.
_EMPTY_TOKEN = "-"


def format_binary_set(strings: Iterable[Bits]) -> str:
    lines = sorted(frozenset(strings), key=lambda s: (len(s), s))
    return "\n".join(s if s else _EMPTY_TOKEN for s in lines) + ("\n" if lines else "")


def parse_binary_set(text: str) -> frozenset[Bits]:
    out = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in (_EMPTY_TOKEN, "λ"):
            out.add("")
            continue
        if any(c not in "01" for c in line):
            raise SetFormatError(f"line {lineno}: not a bit string: {line!r}")
        out.add(line)
    return frozenset(out)


def format_encoding(enc: EncodingFunction) -> str:
    return ",".join(str(v) for v in enc.table)


def parse_encoding(token: str, width: int) -> EncodingFunction:
    try:
        table = tuple(int(v) for v in token.split(","))
    except ValueError as exc:
        raise SetFormatError(f"bad permutation token {token!r}") from exc
    try:
        return EncodingFunction(width, table)
    except ValueError as exc:
        raise SetFormatError(str(exc)) from exc


def format_family_set(prefixes: Iterable[FamilyPrefix]) -> str:
    lines = []
    for prefix in sorted(
        frozenset(prefixes), key=lambda p: (len(p), [e.table for e in p])
    ):
        lines.append(
            " ".join(format_encoding(e) for e in prefix) if prefix else _EMPTY_TOKEN
        )
    return "\n".join(lines) + ("\n" if lines else "")


def parse_family_set(text: str) -> frozenset[FamilyPrefix]:
    out = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in (_EMPTY_TOKEN, "λ"):
            out.add(EMPTY_PREFIX)
            continue
        tokens = line.split()
        try:
            prefix = tuple(
                parse_encoding(tok, width) for width, tok in enumerate(tokens, start=1)
            )
        except SetFormatError as exc:
            raise SetFormatError(f"line {lineno}: {exc}") from exc
        out.add(prefix)
    return frozenset(out)


def family_prefixes_of_length(n: int) -> Iterator[FamilyPrefix]:
    """All family prefixes of length n, in lexicographic order per level."""
    pools = [all_encodings(k) for k in range(1, n + 1)]
    return (tuple(combo) for combo in itertools.product(*pools))
