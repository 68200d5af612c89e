"""Diagonal escape from an enumerated open set of measure below one.

The construction extends a prefix one level at a time, always into a
cell where the trapped mass is strictly smaller than the cell's volume.
Exact mode scores each candidate cell by the exact conditional measure
of a finite representative; approx mode reproduces the computable-
analysis route: a measure approximator g with |total - g(k)| < 2**-k, a
stage search h locating an enumeration stage heavy enough to cancel the
unknown remainder, and the derived cell approximator f with
|F(t) - f(t, k)| < 2**-k.  Both modes share one tie-break: the
lexicographically least candidate that certifies strictly below the cell
volume.

A transcript records, per step, the number of candidates, the chosen
index, the certified conditional measure, and the cell volume; the step
invariant "trapped mass < cell volume" is what makes the prefix
extendable forever, and `verify_escape` re-checks the finite claim
against the raw member set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

from .cylinder import (
    FamilyPrefix,
    KindMismatchError,
    _is_prefix_of,
    all_encodings,
    cell_volume,
    family_prefixes_of_length,
    format_family_set,
    measure,
    normalize_family_prefix_free,
    normalize_prefix_free,
)
from .numbering import phi_escape
from .schedules import Schedule

ZERO = Fraction(0)


class MeasureTooLargeError(ValueError):
    """The open set has measure at least 1; nothing can escape it."""


class StageCapExceeded(RuntimeError):
    """The enumeration never caught up with the measure approximator."""


class EscapeContractViolation(RuntimeError):
    """No candidate cell satisfied the strict inequality; broken inputs."""


class ScheduleBoundError(ValueError):
    """A materialized constraint set exceeds its scheduled measure bound."""


@dataclass(frozen=True)
class EnumeratedOpenSet:
    """An r.e. open set presented by stages plus a measure approximator.

    ``stages(m)`` (m >= 1) returns finite, monotonically growing cylinder
    sets whose union is the set; ``measure_approx(k)`` returns a rational
    within 2**-k of the true measure.
    """

    kind: str  # "binary" | "family"
    stages: Callable[[int], frozenset]
    measure_approx: Callable[[int], Fraction]
    stage_cap: int = 64
    description: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("binary", "family"):
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def from_finite(cls, members: Iterable, kind: str | None = None) -> "EnumeratedOpenSet":
        members = frozenset(members)
        if kind is None:
            if not members:
                raise ValueError("cannot infer the kind of an empty set")
            kind = "binary" if isinstance(next(iter(members)), str) else "family"
        exact = measure(members)
        return cls(
            kind=kind,
            stages=lambda m: members,
            measure_approx=lambda k: exact,
            stage_cap=1,
            description=f"finite[{len(members)}]",
        )


def conditional_measure_exact(members: Iterable, t) -> Fraction:
    """Exact mass of the open set inside the cell of t."""
    members = frozenset(members)
    if members:
        sample = next(iter(members))
        if isinstance(sample, str) != isinstance(t, str):
            raise KindMismatchError("set members and prefix have different kinds")
    norm = normalize_prefix_free(members) if isinstance(t, str) else (
        normalize_family_prefix_free(members)
    )
    if any(_is_prefix_of(s, t) for s in norm):
        return cell_volume(t)
    return sum(
        (cell_volume(s) for s in norm if _is_prefix_of(t, s)),
        ZERO,
    )


@lru_cache(maxsize=4096)
def _stage_for(S: EnumeratedOpenSet, k: int) -> tuple[int, frozenset, Fraction, Fraction]:
    """Stage search: the first stage heavy enough for precision k.

    Uses the exact partition identity "sum of per-cell masses at any
    depth equals the total mass", so the per-cell sum never has to be
    enumerated cell by cell.  Returns (stage index, stage, its measure,
    the approximator's value).
    """
    g = S.measure_approx(k)
    threshold = g - Fraction(1, 2**k)
    for m in range(1, S.stage_cap + 1):
        stage = S.stages(m)
        stage_measure = measure(stage)
        if stage_measure > threshold:
            return m, stage, stage_measure, g
    raise StageCapExceeded(
        f"no stage within {S.stage_cap} reached measure above {threshold};"
        " the measure approximator is broken"
    )


def conditional_measure_approx(S: EnumeratedOpenSet, t, k: int) -> Fraction:
    """Rational within 2**-k of the mass of the set inside the cell of t."""
    _, stage, stage_measure, g = _stage_for(S, k)
    return g - (stage_measure - conditional_measure_exact(stage, t))


# ---------------------------------------------------------------------------
# Escape
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EscapeStep:
    depth: int
    candidate_count: int
    chosen_index: int
    trapped: Fraction  # certified conditional measure of the chosen cell
    cell: Fraction
    precision: int | None = None  # k that certified the choice (approx mode)


@dataclass(frozen=True)
class EscapeTranscript:
    kind: str
    mode: str
    prefix: object  # Bits or FamilyPrefix
    steps: tuple[EscapeStep, ...]

    def to_text(self) -> str:
        lines = [f"kind {self.kind}", f"mode {self.mode}"]
        if self.kind == "binary":
            lines.append(f"prefix {self.prefix or '-'}")
        else:
            lines.append("prefix " + format_family_set([self.prefix]).strip())
        for s in self.steps:
            line = (
                f"step {s.depth} candidates {s.candidate_count}"
                f" chosen {s.chosen_index}"
                f" F {s.trapped.numerator}/{s.trapped.denominator}"
                f" cell {s.cell.numerator}/{s.cell.denominator}"
            )
            if s.precision is not None:
                line += f" k {s.precision}"
            lines.append(line)
        return "\n".join(lines) + "\n"


def _coerce(S, kind: str) -> EnumeratedOpenSet:
    if isinstance(S, EnumeratedOpenSet):
        if S.kind != kind:
            raise KindMismatchError(f"expected a {kind} set, got {S.kind}")
        return S
    return EnumeratedOpenSet.from_finite(S, kind=kind)


def _extend(prefix, tau):
    return prefix + tau if isinstance(prefix, str) else prefix + (tau,)


def _exact_escape(S: EnumeratedOpenSet, depth: int, candidates_at) -> EscapeTranscript:
    total = (
        normalize_prefix_free(S.stages(S.stage_cap))
        if S.kind == "binary"
        else normalize_family_prefix_free(S.stages(S.stage_cap))
    )
    total_measure = measure(total)
    if total_measure >= 1:
        raise MeasureTooLargeError(f"open set has measure {total_measure} >= 1")
    prefix = "" if S.kind == "binary" else ()
    restricted = total
    steps: list[EscapeStep] = []
    for level in range(depth):
        buckets: dict[object, Fraction] = {}
        for s in restricted:
            key = s[level]
            buckets[key] = buckets.get(key, ZERO) + cell_volume(s)
        chosen = None
        candidates = candidates_at(level)
        for idx, tau in enumerate(candidates):
            trapped = buckets.get(tau, ZERO)
            cell = cell_volume(_extend(prefix, tau))
            if trapped < cell:
                chosen = (idx, tau, trapped, cell)
                break
        if chosen is None:
            raise EscapeContractViolation(
                f"no candidate at depth {level + 1} satisfies the strict inequality"
            )
        idx, tau, trapped, cell = chosen
        prefix = _extend(prefix, tau)
        restricted = frozenset(
            s for s in restricted if len(s) > level and s[: level + 1] == prefix
        )
        steps.append(EscapeStep(level + 1, len(candidates), idx, trapped, cell))
    return EscapeTranscript(S.kind, "exact", prefix, tuple(steps))


def _approx_escape(
    S: EnumeratedOpenSet,
    depth: int,
    candidates_at,
    k_start: int,
    k_max: int,
) -> EscapeTranscript:
    # Trust the approximator for the precondition: some k must witness
    # a total measure strictly below 1.
    witnessed = False
    k = k_start
    while k <= k_max:
        if S.measure_approx(k) < 1 - Fraction(1, 2**k):
            witnessed = True
            break
        k *= 2
    if not witnessed:
        raise MeasureTooLargeError(
            f"measure approximator never certified < 1 up to precision {k_max}"
        )
    prefix = "" if S.kind == "binary" else ()
    steps: list[EscapeStep] = []
    for level in range(depth):
        chosen = None
        candidates = candidates_at(level)
        for idx, tau in enumerate(candidates):
            t = _extend(prefix, tau)
            cell = cell_volume(t)
            k = k_start
            while True:
                eps = Fraction(1, 2**k)
                f_val = conditional_measure_approx(S, t, k)
                if f_val + eps < cell:
                    chosen = (idx, tau, f_val, cell, k)
                    break
                if f_val - eps >= cell:
                    break  # certified at or above the cell volume
                if k >= k_max:
                    break  # undecided: treat like the exact-mode rejection
                k = min(2 * k, k_max)
            if chosen is not None:
                break
        if chosen is None:
            raise EscapeContractViolation(
                f"no candidate at depth {level + 1} certified below its cell volume"
            )
        idx, tau, f_val, cell, k_used = chosen
        prefix = _extend(prefix, tau)
        steps.append(EscapeStep(level + 1, len(candidates), idx, f_val, cell, k_used))
    return EscapeTranscript(S.kind, "approx", prefix, tuple(steps))


def escape_binary(
    S,
    depth: int,
    mode: str = "exact",
    k_start: int = 8,
    k_max: int = 128,
) -> EscapeTranscript:
    """Prefix of the requested depth escaping a binary open set."""
    S = _coerce(S, "binary")
    candidates_at = lambda level: ("0", "1")
    if mode == "exact":
        return _exact_escape(S, depth, candidates_at)
    if mode == "approx":
        return _approx_escape(S, depth, candidates_at, k_start, k_max)
    raise ValueError(f"unknown mode {mode!r}")


FAMILY_DEPTH_CAP = 3


def escape_family(
    S,
    depth: int,
    mode: str = "exact",
    k_start: int = 8,
    k_max: int = 128,
) -> EscapeTranscript:
    """Family prefix of the requested depth escaping a family open set.

    Depth is capped at 3: the level-3 extension already searches 40320
    candidate encodings.
    """
    if depth > FAMILY_DEPTH_CAP:
        raise ValueError(f"family escape depth capped at {FAMILY_DEPTH_CAP}")
    S = _coerce(S, "family")
    candidates_at = lambda level: all_encodings(level + 1)
    if mode == "exact":
        return _exact_escape(S, depth, candidates_at)
    if mode == "approx":
        return _approx_escape(S, depth, candidates_at, k_start, k_max)
    raise ValueError(f"unknown mode {mode!r}")


def verify_escape(prefix, members: Iterable) -> bool:
    """Independent check that no member of the set traps the prefix."""
    members = frozenset(members)
    if members:
        sample = next(iter(members))
        if isinstance(sample, str) != isinstance(prefix, str):
            raise KindMismatchError("prefix and set members have different kinds")
    return not any(_is_prefix_of(s, prefix) for s in members)


# ---------------------------------------------------------------------------
# Assembling the full test family into one enumerated open set
# ---------------------------------------------------------------------------


def assemble_open_set(
    testfamily: Callable[[int, int, int], frozenset],
    f_schedule: Schedule,
    phi: Callable[[int], tuple[int, int]] = phi_escape,
    m_max: int = 6,
    horizon: int = 3,
    g_schedule: Schedule | None = None,
    kind: str = "family",
    stage_cap: int = 64,
) -> EnumeratedOpenSet:
    """Union of scheduled constraint-set blocks as one enumerated open set.

    Block m covers the pair ``phi(m) = (i, d)`` from cutoff ``g(m)`` on;
    only levels up to the horizon are materialized (the toy registries
    guarantee emptiness beyond it).  Every materialized set at a level
    past ``f(i, 2d)`` must measure strictly below ``1/n**d``, otherwise
    the schedule and the test family disagree and assembly refuses.

    The measure approximator evaluates the finite blocks prescribed for
    precision k: members with index m <= k + 1, levels below
    ``g(m) * 2**(k+1)``.
    """
    if g_schedule is None:
        g_schedule = Schedule.escape_from(f_schedule)

    cells: dict[tuple[int, int, int], frozenset] = {}

    def block(m: int, n: int) -> frozenset:
        i, d = phi(m)
        key = (i, d, n)
        if key not in cells:
            materialized = testfamily(i, d, n)
            if materialized and n >= f_schedule.f(i, 2 * d):
                got = measure(materialized)
                bound = Fraction(1, n**d)
                if not got < bound:
                    raise ScheduleBoundError(
                        f"constraint set at (i={i}, d={d}, n={n}) has measure"
                        f" {got}, not below {bound}"
                    )
            cells[key] = materialized
        return cells[key]

    def union(pieces: Iterable[frozenset]) -> frozenset:
        out: set = set()
        for piece in pieces:
            out |= piece
        return frozenset(out)

    @lru_cache(maxsize=None)
    def stages(r: int) -> frozenset:
        pieces = []
        for m in range(1, min(r, m_max) + 1):
            start = g_schedule.g(m)
            for n in range(start, min(start + r - 1, horizon) + 1):
                pieces.append(block(m, n))
        return union(pieces)

    @lru_cache(maxsize=None)
    def measure_approx(k: int) -> Fraction:
        pieces = []
        for m in range(1, min(k + 1, m_max) + 1):
            start = g_schedule.g(m)
            stop = min(start * 2 ** (k + 1) - 1, horizon)
            for n in range(start, stop + 1):
                pieces.append(block(m, n))
        return measure(union(pieces))

    return EnumeratedOpenSet(
        kind=kind,
        stages=stages,
        measure_approx=measure_approx,
        stage_cap=stage_cap,
        description=f"assembled[m<={m_max},horizon={horizon}]",
    )


def build_ggm_testfamily(
    program_for: Callable[[int], "GenericProgram"] | "GenericProgram",
    d: int,
    n: int,
    experiment: str = "dlog",
    exhaustive_cap: int = 3,
    member_cap: int = 1_000_000,
) -> frozenset[FamilyPrefix]:
    """Length-n prefixes whose last encoding breaks the 1/n**d target.

    The first n - 1 coordinates are free; the set therefore measures
    exactly (number of bad encodings) / (2**n)!.
    """
    from .experiments import success_vector  # local import to avoid a cycle

    if d < 2:
        raise ValueError("need d >= 2")
    if n > exhaustive_cap:
        raise ValueError(f"level {n} beyond the exhaustive cap {exhaustive_cap}")
    prog = program_for(n) if callable(program_for) else program_for
    threshold = Fraction(1, n**d)
    vector = success_vector(prog, n, experiment)
    encodings = all_encodings(n)
    bad = [encodings[idx] for idx, s in enumerate(vector) if s > threshold]
    if not bad:
        return frozenset()
    free = 1
    for k in range(1, n):
        from .cylinder import encf_count

        free *= encf_count(k)
    if free * len(bad) > member_cap:
        raise ValueError(
            f"{free * len(bad)} members would exceed the cap {member_cap}"
        )
    return frozenset(
        head + (tail,) for head in family_prefixes_of_length(n - 1) for tail in bad
    )
