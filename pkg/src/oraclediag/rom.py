"""Random-oracle test sets: block layout, oracle tables, constraint strings.

An oracle instantiation is flattened into one infinite bit sequence by
concatenating its output blocks in pairing order: block k carries the
value at pair ``b(k) = (parameter, query index)`` and occupies
``ell(parameter)`` bits.  For a fixed parameter n and query depth q, the
blocks holding the whole table of a function on strings of length <= q
sit at scattered, known offsets; a "bad" table therefore pins those bit
positions and leaves every gap bit free.

Pinning blows up when enumerated (the gaps between the blocks of one
parameter grow quadratically), so constraint sets exist in two forms: a
compact pattern (length + pinned positions), which is always available
and measures exactly ``2**-pinned``, and a literal string set, which is
only materialized under a size guard.  Measures computed from patterns
never assume the counting identity they are used to verify: they dedupe,
check pairwise disjointness positionally, and fall back to
inclusion-exclusion when sets overlap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .cylinder import Bits, normalize_prefix_free
from .numbering import cantor_pair, cantor_unpair, nat_to_string, string_to_nat


class InfeasibleSizeError(ValueError):
    """Materializing the requested object would exceed the configured cap."""


@dataclass(frozen=True)
class EllPoly:
    """Block-length polynomial; must be positive wherever it is evaluated."""

    coeffs: tuple[int, ...]

    def __call__(self, n: int) -> int:
        return sum(c * n**i for i, c in enumerate(self.coeffs))

    def check_positive(self, upto: int) -> "EllPoly":
        bad = [n for n in range(upto + 1) if self(n) < 1]
        if bad:
            raise ValueError(f"block length must be positive; fails at n={bad[0]}")
        return self


ELL_ONE = EllPoly((1,))

_CUMSUM_CACHE: dict[EllPoly, list[int]] = {}


def _prefix_length(ell: EllPoly, k: int) -> int:
    """Total bits occupied by blocks 0..k-1 of the flattened sequence."""
    sums = _CUMSUM_CACHE.setdefault(ell, [0])
    while len(sums) <= k:
        idx = len(sums) - 1
        width = ell(cantor_unpair(idx)[0])
        if width < 1:
            raise ValueError(f"block length must be positive; fails at pair {idx}")
        sums.append(sums[-1] + width)
    return sums[k]


def layout_position(n: int, j: int, ell: EllPoly) -> int:
    """Bit offset at which the block for (n, j) begins.

    Equals the length of the constraint-string prefix that ends with the
    free segment just before block j; the block itself occupies
    ``[offset, offset + ell(n))``.
    """
    return _prefix_length(ell, cantor_pair(n, j))


def block_span(n: int, j: int, ell: EllPoly) -> tuple[int, int]:
    start = layout_position(n, j, ell)
    return start, start + ell(n)


def embed_ell_function(values: Mapping[tuple[int, int], Bits], depth: int) -> Bits:
    """Concatenate blocks 0..depth-1 of an oracle given by (n, j) -> block."""
    pieces = []
    for k in range(depth):
        pair = cantor_unpair(k)
        try:
            pieces.append(values[pair])
        except KeyError:
            raise KeyError(f"missing block for pair {pair} (position {k})")
    return "".join(pieces)


def extract_block(flat: Bits, n: int, j: int, ell: EllPoly) -> Bits:
    start, end = block_span(n, j, ell)
    if len(flat) < end:
        raise ValueError(f"sequence too short: block (n={n}, j={j}) ends at {end}")
    return flat[start:end]


# ---------------------------------------------------------------------------
# Oracle tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleTable:
    """A total function from strings of length <= q to width-bit strings.

    Values are indexed by the canonical order of the domain, so
    ``values[j]`` answers the j-th query string.
    """

    q: int
    width: int
    values: tuple[Bits, ...]

    def __post_init__(self) -> None:
        expected = domain_size(self.q)
        if len(self.values) != expected:
            raise ValueError(f"need {expected} values for depth {self.q}")
        if any(len(v) != self.width for v in self.values):
            raise ValueError(f"all values must have {self.width} bits")

    def lookup(self, x: Bits) -> Bits:
        if len(x) > self.q:
            raise KeyError(f"{x!r} is longer than the query depth {self.q}")
        return self.values[string_to_nat(x)]


def domain_size(q: int) -> int:
    """Number of strings of length <= q."""
    return 2 ** (q + 1) - 1


def table_count(q: int, width: int) -> int:
    return 2 ** (width * domain_size(q))


def all_oracle_tables(q: int, width: int, cap: int = 2**20) -> Iterator[OracleTable]:
    total = table_count(q, width)
    if total > cap:
        raise InfeasibleSizeError(f"{total} tables at (q={q}, width={width}); cap {cap}")
    blocks = ["".join(bits) for bits in itertools.product("01", repeat=width)]
    for combo in itertools.product(blocks, repeat=domain_size(q)):
        yield OracleTable(q, width, combo)


def format_oracle_table(table: OracleTable) -> str:
    lines = []
    for j, value in enumerate(table.values):
        key = nat_to_string(j) or "-"
        lines.append(f"{key} -> {value}")
    return "\n".join(lines) + "\n"


def parse_oracle_table(text: str) -> OracleTable:
    entries: dict[int, Bits] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, value = (part.strip() for part in line.split("->"))
        except ValueError:
            raise ValueError(f"line {lineno}: expected 'input -> output'")
        key = "" if key in ("-", "λ") else key
        entries[string_to_nat(key)] = value
    if not entries:
        raise ValueError("empty oracle table")
    count = len(entries)
    if sorted(entries) != list(range(count)):
        raise ValueError("table is not total on an initial segment of the domain")
    q = 0
    while domain_size(q) < count:
        q += 1
    if domain_size(q) != count:
        raise ValueError(f"{count} entries do not fill any domain of depth q")
    width = len(entries[0])
    return OracleTable(q, width, tuple(entries[j] for j in range(count)))


@dataclass(frozen=True)
class ExperimentOracle:
    """Exact per-table success evaluator with its declared query budget."""

    ell: EllPoly
    evaluator: Callable[[int, OracleTable], Fraction]
    query_depth: Callable[[int], int]

    def success(self, n: int, table: OracleTable) -> Fraction:
        value = self.evaluator(n, table)
        if not 0 <= value <= 1:
            raise ValueError(f"evaluator returned {value}, not a probability")
        return value


# ---------------------------------------------------------------------------
# Constraint strings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintPattern:
    """Strings of a fixed length with some positions pinned to fixed bits."""

    length: int
    pins: tuple[tuple[int, str], ...]  # sorted (position, bit)

    def __post_init__(self) -> None:
        positions = [p for p, _ in self.pins]
        if positions != sorted(set(positions)) or (
            positions and positions[-1] >= self.length
        ):
            raise ValueError("pins must be sorted, unique, and inside the length")

    @property
    def free_bits(self) -> int:
        return self.length - len(self.pins)

    def measure(self) -> Fraction:
        return Fraction(1, 2 ** len(self.pins))

    def conflicts(self, other: "ConstraintPattern") -> bool:
        """True iff the two patterns pin some shared position differently."""
        theirs = dict(other.pins)
        return any(pos in theirs and theirs[pos] != bit for pos, bit in self.pins)

    def merge(self, other: "ConstraintPattern") -> "ConstraintPattern":
        if self.conflicts(other):
            raise ValueError("cannot merge conflicting patterns")
        merged = dict(self.pins)
        merged.update(other.pins)
        return ConstraintPattern(
            max(self.length, other.length), tuple(sorted(merged.items()))
        )

    def expand(self, cap: int = 2**20) -> frozenset[Bits]:
        if 2**self.free_bits > cap:
            raise InfeasibleSizeError(
                f"2**{self.free_bits} strings would exceed the cap {cap}"
            )
        pinned = dict(self.pins)
        free = [i for i in range(self.length) if i not in pinned]
        out = []
        for bits in itertools.product("01", repeat=len(free)):
            chars = [pinned.get(i, "") for i in range(self.length)]
            for pos, bit in zip(free, bits):
                chars[pos] = bit
            out.append("".join(chars))
        return frozenset(out)


def pattern_set_measure(patterns: Sequence[ConstraintPattern]) -> Fraction:
    """Exact measure of the union of patterns.

    Distinct patterns must either conflict pairwise (the usual case: two
    tables differ in some pinned block) or be few enough for
    inclusion-exclusion.
    """
    unique = sorted(set(patterns), key=lambda p: (p.length, p.pins))
    if not unique:
        return Fraction(0)
    if all(
        unique[i].conflicts(unique[j])
        for i in range(len(unique))
        for j in range(i + 1, len(unique))
    ):
        return sum((p.measure() for p in unique), Fraction(0))
    if len(unique) > 16:
        raise InfeasibleSizeError(
            "overlapping patterns: inclusion-exclusion capped at 16 members"
        )
    total = Fraction(0)
    for r in range(1, len(unique) + 1):
        sign = 1 if r % 2 else -1
        for combo in itertools.combinations(unique, r):
            merged = combo[0]
            ok = True
            for p in combo[1:]:
                if merged.conflicts(p):
                    ok = False
                    break
                merged = merged.merge(p)
            if ok:
                total += sign * merged.measure()
    return total


def _table_pattern(n: int, ell: EllPoly, table: OracleTable) -> ConstraintPattern:
    if table.width != ell(n):
        raise ValueError(
            f"table width {table.width} disagrees with block length {ell(n)}"
        )
    pins: list[tuple[int, str]] = []
    last = 0
    for j, value in enumerate(table.values):
        start, end = block_span(n, j, ell)
        pins.extend((start + offset, bit) for offset, bit in enumerate(value))
        last = end
    return ConstraintPattern(last, tuple(sorted(pins)))


def build_constraint_patterns(
    n: int, q: int, ell: EllPoly, bad_tables: Iterable[OracleTable]
) -> tuple[ConstraintPattern, ...]:
    """Compact constraint sets, one per bad table; always materializable."""
    patterns = []
    for table in bad_tables:
        if table.q != q:
            raise ValueError(f"table depth {table.q} disagrees with q={q}")
        patterns.append(_table_pattern(n, ell, table))
    return tuple(patterns)


def build_constraint_strings(
    n: int,
    q: int,
    ell: EllPoly,
    bad_tables: Iterable[OracleTable],
    max_strings: int = 2**20,
) -> frozenset[Bits]:
    """Literal constraint strings (uniform length, hence prefix-free).

    One string per assignment of the free gap bits per bad table; guarded
    because the gap count grows fast with q and n.
    """
    bad_tables = list(bad_tables)
    patterns = build_constraint_patterns(n, q, ell, bad_tables)
    total = sum(2**p.free_bits for p in patterns)
    if total > max_strings:
        raise InfeasibleSizeError(
            f"{total} strings would exceed the cap {max_strings};"
            " use build_constraint_patterns for the compact form"
        )
    out: set[Bits] = set()
    for p in patterns:
        out |= p.expand(cap=max_strings)
    return frozenset(out)


def rom_testset_measure(n: int, q: int, ell: EllPoly, bad_count: int) -> Fraction:
    """Closed-form measure ``bad_count * 2**-(ell(n) * #domain)`` of a test set."""
    pinned = ell(n) * domain_size(q)
    if not 0 <= bad_count <= 2**pinned:
        raise ValueError(f"bad_count {bad_count} out of range for {pinned} pinned bits")
    return Fraction(bad_count, 2**pinned)


def bad_tables_for(
    oracle: ExperimentOracle,
    d: int,
    n: int,
    max_tables: int = 2**16,
) -> tuple[OracleTable, ...]:
    """Tables whose success strictly exceeds 1/n**d, by full enumeration."""
    if d < 2:
        raise ValueError("need d >= 2")
    q = oracle.query_depth(n)
    threshold = Fraction(1, n**d)
    return tuple(
        table
        for table in all_oracle_tables(q, oracle.ell(n), cap=max_tables)
        if oracle.success(n, table) > threshold
    )


def build_rom_testfamily(
    oracle: ExperimentOracle,
    d: int,
    n: int,
    max_tables: int = 2**16,
    max_strings: int = 2**20,
) -> frozenset[Bits]:
    """Constraint strings of the tables that break the 1/n**d target at n."""
    bad = bad_tables_for(oracle, d, n, max_tables=max_tables)
    return build_constraint_strings(
        n, oracle.query_depth(n), oracle.ell, bad, max_strings=max_strings
    )


class RomTestFamily:
    """Per-parameter constraint sets for one experiment, built lazily.

    ``component(n)`` is the constraint-string set of the tables breaking
    the 1/n**d target at parameter n; computed sets are cached since the
    tail unions below revisit them.
    """

    def __init__(self, oracle: ExperimentOracle, d: int, max_tables: int = 2**16):
        if d < 2:
            raise ValueError("need d >= 2")
        self.oracle = oracle
        self.d = d
        self.max_tables = max_tables
        self._cache: dict[int, frozenset[Bits]] = {}

    def component(self, n: int) -> frozenset[Bits]:
        if n not in self._cache:
            self._cache[n] = build_rom_testfamily(
                self.oracle, self.d, n, max_tables=self.max_tables
            )
        return self._cache[n]

    def tail_union(self, n: int, k_max: int) -> frozenset[Bits]:
        return solovay_to_ml(self.component, n, k_max)


def solovay_to_ml(
    component: Callable[[int], frozenset[Bits]], n: int, k_max: int
) -> frozenset[Bits]:
    """Finite truncation of the tail union: components n..k_max, normalized."""
    if k_max < n:
        raise ValueError("k_max must be at least n")
    union: set[Bits] = set()
    for k in range(n, k_max + 1):
        union |= component(k)
    return normalize_prefix_free(union)


def format_table_set(tables: Sequence[OracleTable]) -> str:
    """Bad-set serialization: tables in the arrow format, blank-line separated."""
    return "\n".join(format_oracle_table(t) for t in tables)


def parse_table_set(text: str) -> tuple[OracleTable, ...]:
    chunks = [c for c in text.split("\n\n") if c.strip()]
    return tuple(parse_oracle_table(c) for c in chunks)
