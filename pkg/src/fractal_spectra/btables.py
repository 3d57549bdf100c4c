"""Integer corner-weight tables for gasket-refined triangle faces.

A face refined to level ``m`` is split into ``3**m`` upward triangles
addressed by ternary words.  Every upward triangle gets three integer
corner weights ``b(w, j)`` which convert to corner angles through

    angle_j(T_w) = pi/3 + (b(w, j) - 1) * pi / 3**(m + 1).

The weights are pinned down by three conditions (row sums equal 3, the
two weights meeting at any interior vertex cancel, and the corner word
carries ``3**m``) together with symmetry under relabelling the corners.
This module constructs the tables by the binary-to-ternary boundary rule
plus an inductive three-case extension, and verifies them exhaustively.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterator

Word = tuple[int, ...]

DIGITS = (0, 1, 2)
ALL_PERMS = tuple(permutations(DIGITS))


def words(level: int) -> Iterator[Word]:
    """All ternary words of the given length, lexicographic."""
    return product(DIGITS, repeat=level)


def apply_perm(sigma: tuple[int, int, int], w: Word) -> Word:
    """Apply a corner relabelling digitwise to a word."""
    return tuple(sigma[d] for d in w)


def b_from_binary(n: int) -> int:
    """Reread the binary digits of ``n`` as ternary and append a 0 digit.

    For n = sum(2**J_k) this returns 3 * sum(3**J_k); b_0 = 0.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    out = 0
    power = 3
    while n:
        if n & 1:
            out += power
        power *= 3
        n >>= 1
    return out


def boundary_b(w: Word) -> int:
    """Corner-0 weight of a boundary word (digits 0/1, leading 0).

    The word is read as a binary number v; the weight is
    ``b_from_binary(2**(m-1) - v)`` where m = len(w).
    """
    if len(w) < 1:
        raise ValueError("word must have length >= 1")
    if w[0] != 0:
        raise ValueError(f"boundary word must start with digit 0, got {w}")
    if any(d not in (0, 1) for d in w):
        raise ValueError(f"boundary word must use digits 0/1 only, got {w}")
    value = 0
    for d in w:
        value = 2 * value + d
    return b_from_binary((1 << (len(w) - 1)) - value)


class BTableConditionError(ValueError):
    """A constructed table violates one of its defining conditions."""


@dataclass(frozen=True)
class BTable:
    """Corner weights for all words of one level."""

    level: int
    entries: dict[tuple[Word, int], int]

    def b(self, w: Word, j: int) -> int:
        return self.entries[(w, j)]

    def row(self, w: Word) -> tuple[int, int, int]:
        return tuple(self.entries[(w, j)] for j in DIGITS)


@dataclass(frozen=True)
class AngleTable:
    """Corner angles (radians) for all words of one level."""

    level: int
    entries: dict[tuple[Word, int], float]

    def angle(self, w: Word, j: int) -> float:
        return self.entries[(w, j)]


def _binary_value(w: Word) -> int:
    v = 0
    for d in w:
        v = 2 * v + d
    return v


_SWAP12 = (0, 2, 1)


def _case_boundary(tail: Word) -> tuple[int, int, int]:
    # tail uses digits 0/1 only; full word is (0,) + tail of length m
    m = len(tail) + 1
    n = (1 << (m - 1)) - _binary_value(tail)
    bn = b_from_binary(n)
    bn1 = b_from_binary(n - 1)
    # corner 1 cancels the neighbour across the right edge; corner 2 closes
    # the row sum (the sign on bn1 is forced by the row-sum condition)
    return (bn, -bn1, 3 - bn + bn1)


def _extend_zero_words(prev: dict[tuple[Word, int], int], level: int) -> dict[tuple[Word, int], int]:
    """Weights for all words starting with 0 at `level`, given level-1 data."""
    out: dict[tuple[Word, int], int] = {}
    for tail in product(DIGITS, repeat=level - 1):
        word = (0,) + tail
        if all(d in (0, 1) for d in tail):
            vals = _case_boundary(tail)
        elif all(d in (0, 2) for d in tail):
            mirrored = _case_boundary(apply_perm(_SWAP12, tail))
            vals = (mirrored[0], mirrored[2], mirrored[1])
        else:
            # dropping the first tail digit replicates the previous level
            src = (0,) + tail[1:]
            vals = tuple(prev[(src, j)] for j in DIGITS)
        for j in DIGITS:
            out[(word, j)] = vals[j]
    return out


def _complete_by_symmetry(zero_words: dict[tuple[Word, int], int], level: int) -> dict[tuple[Word, int], int]:
    table = dict(zero_words)
    swaps = {1: (1, 0, 2), 2: (2, 1, 0)}
    for w in words(level):
        if w[0] == 0:
            continue
        sigma = swaps[w[0]]
        src = apply_perm(sigma, w)
        for j in DIGITS:
            table[(w, j)] = zero_words[(src, sigma[j])]
    return table


def build_btable(m: int, check: bool = True) -> BTable:
    """Construct the level-``m`` corner-weight table.

    Builds inductively from the level-1 seed (3, 0, 0); every level keeps
    its bottom two thirds equal to the previous level and fills the
    boundary words by the binary-to-ternary rule.  With ``check`` the
    defining conditions are verified exhaustively and a violation raises
    :class:`BTableConditionError`.
    """
    if m < 1:
        raise ValueError(f"level must be >= 1, got {m}")
    zero: dict[tuple[Word, int], int] = {((0,), 0): 3, ((0,), 1): 0, ((0,), 2): 0}
    for level in range(2, m + 1):
        zero = _extend_zero_words(zero, level)
    table = BTable(m, _complete_by_symmetry(zero, m))
    if check:
        report = verify_theorem_conditions(table)
        if not report.passed:
            raise BTableConditionError(report.summary())
    return table


@dataclass
class ConditionCheck:
    ok: bool
    checked: int
    counterexample: str | None = None


@dataclass
class ConditionReport:
    """Per-condition pass/fail with the first counterexample found."""

    level: int
    checks: dict[str, ConditionCheck] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def summary(self) -> str:
        lines = [f"level {self.level} condition report:"]
        for name, c in self.checks.items():
            status = "pass" if c.ok else f"FAIL ({c.counterexample})"
            lines.append(f"  {name}: {status} [{c.checked} checks]")
        return "\n".join(lines)


def _digits_ok(b: int) -> bool:
    # divisible by 3 and |b| uses only ternary digits 0 and 1
    if b % 3 != 0:
        return False
    v = abs(b)
    while v:
        if v % 3 > 1:
            return False
        v //= 3
    return True


def verify_theorem_conditions(t: BTable) -> ConditionReport:
    """Exhaustively check the defining conditions of a weight table."""
    m = t.level
    report = ConditionReport(level=m)

    sum_check = ConditionCheck(True, 0)
    for w in words(m):
        sum_check.checked += 1
        row = t.row(w)
        if sum(row) != 3:
            sum_check.ok = False
            sum_check.counterexample = f"word {w}: row {row} sums to {sum(row)}"
            break
    report.checks["row-sum"] = sum_check

    vertex_check = ConditionCheck(True, 0)
    for stem in words(m - 1):
        for i, j in ((0, 1), (0, 2), (1, 2)):
            vertex_check.checked += 1
            lhs = t.b(stem + (i,), j) + t.b(stem + (j,), i)
            if lhs != 0:
                vertex_check.ok = False
                vertex_check.counterexample = (
                    f"stem {stem}, pair ({i},{j}): "
                    f"b={t.b(stem + (i,), j)} + b={t.b(stem + (j,), i)} != 0"
                )
                break
        if not vertex_check.ok:
            break
    report.checks["vertex-cancellation"] = vertex_check

    corner_word = (0,) * m
    got = t.b(corner_word, 0)
    report.checks["corner-value"] = ConditionCheck(
        got == 3**m, 1,
        None if got == 3**m else f"b({corner_word},0) = {got}, expected {3 ** m}",
    )

    perm_check = ConditionCheck(True, 0)
    for sigma in ALL_PERMS:
        for w in words(m):
            for j in DIGITS:
                perm_check.checked += 1
                if t.b(apply_perm(sigma, w), sigma[j]) != t.b(w, j):
                    perm_check.ok = False
                    perm_check.counterexample = f"sigma {sigma}, word {w}, corner {j}"
                    break
            if not perm_check.ok:
                break
        if not perm_check.ok:
            break
    report.checks["permutation-symmetry"] = perm_check

    digit_check = ConditionCheck(True, 0)
    for (w, j), b in t.entries.items():
        digit_check.checked += 1
        if not _digits_ok(b):
            digit_check.ok = False
            digit_check.counterexample = f"b({w},{j}) = {b}"
            break
    report.checks["ternary-digits"] = digit_check

    return report


def angles_from_btable(t: BTable) -> AngleTable:
    """Convert corner weights to angles; every triangle's angles sum to pi."""
    step = math.pi / 3 ** (t.level + 1)
    entries: dict[tuple[Word, int], float] = {}
    for (w, j), b in t.entries.items():
        alpha = math.pi / 3 + (b - 1) * step
        if not 0.0 < alpha < math.pi:
            raise ValueError(f"angle out of range at word {w}, corner {j}: {alpha}")
        entries[(w, j)] = alpha
    return AngleTable(t.level, entries)


def make_angle_table(m: int) -> AngleTable:
    """Angle table for level ``m``; level 0 is the single flat triangle."""
    if m == 0:
        return AngleTable(0, {((), j): math.pi / 3 for j in DIGITS})
    return angles_from_btable(build_btable(m))


def btable_to_json(t: BTable) -> str:
    items = [["".join(map(str, w)), j, b] for (w, j), b in sorted(t.entries.items())]
    return json.dumps({"level": t.level, "entries": items})


def btable_from_json(text: str) -> BTable:
    data = json.loads(text)
    entries = {
        (tuple(int(c) for c in ws), int(j)): int(b) for ws, j, b in data["entries"]
    }
    return BTable(int(data["level"]), entries)
