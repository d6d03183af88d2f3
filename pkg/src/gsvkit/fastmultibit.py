"""Multi-bit extraction without materializing the 2^m martingales.

The coupled update moves every non-largest coordinate multiplicatively:
at sorted position j it is scaled by (1 - psi/2) when j is odd and by
(1 + psi/2) when j is even, while the largest coordinate absorbs the
balancing amount.  Coordinates sharing a value therefore evolve in
lockstep, so the whole state compresses into a short list of
(value, count) groups — one per distinct value — plus a log of the
members that have ever been the largest ("promotions"), which is what
the identity of the final winner is traced back through.

Within the stable order (ascending value, ties keeping their previous
rank) the members of a group occupy consecutive positions, so each group
splits by position parity into two arithmetic subsequences of its rank
space.  A step is O(number of groups): count arithmetic for the splits,
one multiplication per (group, parity), and a merge of the already-sorted
derived values.  Group counts stay exact big integers; nothing ever
enumerates 2^m coordinates, so widths up to m = 62 are fine.

Per-step split records are kept (as flat int64 arrays) so that the final
winner's rank can be mapped back step by step to its rank in the uniform
initial state, i.e. its coordinate index.

``extract_fast`` is the counterpart of
:func:`gsvkit.extractors.multibit_extract_naive` and must agree with it
bit for bit wherever the naive guard allows both to run.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import OutputWidthError
from .model import Witness, rat
from .extractors import encode_index

__all__ = ["FastMultibitState", "multibit_extract_fast", "FAST_WIDTH_GUARD"]

FAST_WIDTH_GUARD = 62  # counts are stored as int64 in the step records

_MULT, _TOP = 0, 1  # record kinds


@dataclass(frozen=True)
class _Contrib:
    """One parity-slice of a source group feeding a new group.

    Members are the source group's ranks first_rank, first_rank + stride,
    ... (``count`` of them); kind ``_TOP`` marks the single member that
    sat at the global top position and took the balancing update.
    """

    kind: int
    src_class: int
    first_rank: int
    stride: int
    count: int


class FastMultibitState:
    """Value-grouped state of the 2^m coupled martingales.

    Single-owner accumulator: ``advance`` appends to the internal step
    log.  ``groups`` lists (value, count) ascending by value; the global
    order within a group is its members' previous-step order, which the
    rank arithmetic preserves, so (group index, rank) addresses a unique
    martingale at every step.
    """

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("need m >= 1")
        if m > FAST_WIDTH_GUARD:
            raise OutputWidthError(f"m={m} exceeds the fast-path guard ({FAST_WIDTH_GUARD})")
        self.m = m
        self.size = 1 << m
        self.step = 0
        self.groups: list[tuple[Fraction, int]] = [(Fraction(1, self.size), self.size)]
        self._records: list[array] = []
        # ever-largest members as (group index, rank, first step on top)
        self._tracked: list[tuple[int, int, int]] = []

    # -- the two-list view ------------------------------------------------

    def never_top(self) -> list[tuple[Fraction, int]]:
        """(value, count) over martingales that were never the largest."""
        exclude: dict[int, int] = {}
        for cls, _rank, _t in self._tracked:
            exclude[cls] = exclude.get(cls, 0) + 1
        out = []
        for k, (v, c) in enumerate(self.groups):
            c -= exclude.get(k, 0)
            if c:
                out.append((v, c))
        return out

    def ever_top(self) -> list[tuple[Fraction, int]]:
        """(current value, first step on top) per ever-largest martingale."""
        return [(self.groups[cls][0], t) for cls, _rank, t in self._tracked]

    def total_mass(self) -> Fraction:
        return sum((v * c for v, c in self.groups), Fraction(0))

    # -- forward ----------------------------------------------------------

    def advance(self, psi_value) -> None:
        """Consume one witness value; O(#groups) exact arithmetic."""
        value = rat(psi_value)
        self.step += 1
        if value == 0:
            record = [len(self.groups)]
            for k, (_v, cnt) in enumerate(self.groups):
                record.extend((cnt, 1, _MULT, k, 1, 1, cnt))
            self._records.append(array("q", record))
            self._promote()
            return
        half = value / 2
        low_f, high_f = 1 - half, 1 + half
        size = self.size
        groups = self.groups

        lows: list[tuple[Fraction, _Contrib]] = []
        highs: list[tuple[Fraction, _Contrib]] = []
        balance = Fraction(0)
        pos = 1
        for k, (v, cnt) in enumerate(groups):
            hi = min(pos + cnt - 1, size - 1)  # global top position sits out
            if pos <= hi:
                odd = (hi + 1) // 2 - pos // 2
                even = (hi - pos + 1) - odd
                balance += v * (even - odd)
                if odd:
                    first_odd = pos if pos % 2 == 1 else pos + 1
                    lows.append(
                        (v * low_f, _Contrib(_MULT, k, first_odd - pos + 1, 2, odd))
                    )
                if even:
                    first_even = pos if pos % 2 == 0 else pos + 1
                    highs.append(
                        (v * high_f, _Contrib(_MULT, k, first_even - pos + 1, 2, even))
                    )
            pos += cnt
        top_k = len(groups) - 1
        top_v, top_cnt = groups[top_k]
        top_item = (top_v - half * balance, _Contrib(_TOP, top_k, top_cnt, 0, 1))

        merged = self._merge(lows, highs, top_item)

        # regroup equal values; contribution order inside a group follows
        # the source positions, which the merge tie rule already respects
        new_groups: list[tuple[Fraction, int]] = []
        record: list[int] = [0]
        # (kind, src group, rank parity) -> (new group, member offset, first rank)
        contrib_locator: dict[tuple[int, int, int], tuple[int, int, int]] = {}
        i = 0
        while i < len(merged):
            v = merged[i][0]
            members = 0
            contribs: list[_Contrib] = []
            while i < len(merged) and merged[i][0] == v:
                contribs.append(merged[i][1])
                members += merged[i][1].count
                i += 1
            gidx = len(new_groups)
            record.extend((members, len(contribs)))
            offset = 0
            for c in contribs:
                record.extend((c.kind, c.src_class, c.first_rank, c.stride, c.count))
                key = (c.kind, c.src_class, 1 if c.kind == _TOP else c.first_rank % 2)
                contrib_locator[key] = (gidx, offset, c.first_rank)
                offset += c.count
            new_groups.append((v, members))
        record[0] = len(new_groups)

        self._remap_tracked(contrib_locator)
        self.groups = new_groups
        self._records.append(array("q", record))
        self._promote()

    @staticmethod
    def _merge(lows, highs, top_item):
        """Three-way merge of the already-sorted derived value lists.

        Value ties are ordered by source group index (equal to source
        position order), with the balancing member last — exactly the
        previous-order rule the stable sort uses.
        """
        out = []
        i = j = 0
        top_pending = True

        def top_before_mult(item) -> bool:
            return top_item[0] < item[0]

        while i < len(lows) or j < len(highs):
            if i < len(lows) and (
                j >= len(highs)
                or lows[i][0] < highs[j][0]
                or (lows[i][0] == highs[j][0] and lows[i][1].src_class < highs[j][1].src_class)
            ):
                pick = lows[i]
                i += 1
            else:
                pick = highs[j]
                j += 1
            if top_pending and top_before_mult(pick):
                out.append(top_item)
                top_pending = False
            out.append(pick)
        if top_pending:
            out.append(top_item)
        return out

    def _locate(self, locator, cls: int, rank: int, was_top: bool):
        """New (group, rank) of the member that held (cls, rank)."""
        if was_top:
            gidx, offset, _first = locator[(_TOP, cls, 1)]
            return gidx, offset + 1
        gidx, offset, first = locator[(_MULT, cls, rank % 2)]
        return gidx, offset + (rank - first) // 2 + 1

    def _remap_tracked(self, locator) -> None:
        if not self._tracked:
            return
        # the member at the global top position is the last rank of the
        # last group; it is tracked (promoted no later than last step)
        top_cls = len(self.groups) - 1
        top_rank = self.groups[top_cls][1]
        remapped = []
        for cls, rank, t in self._tracked:
            was_top = cls == top_cls and rank == top_rank
            remapped.append((*self._locate(locator, cls, rank, was_top), t))
        self._tracked = remapped

    def _promote(self) -> None:
        """Record the current top member if it was never on top before."""
        cls = len(self.groups) - 1
        rank = self.groups[cls][1]
        for c, r, _t in self._tracked:
            if c == cls and r == rank:
                return
        self._tracked.append((cls, rank, self.step))

    # -- identity resolution ----------------------------------------------

    def winner(self) -> int:
        """Coordinate index of the largest martingale (stable tie rule)."""
        cls = len(self.groups) - 1
        rank = self.groups[cls][1]
        return self._resolve(cls, rank)

    def _resolve(self, cls: int, rank: int) -> int:
        """Trace (group, rank) back through the step records to step 0."""
        for record in reversed(self._records):
            cls, rank = self._resolve_one(record, cls, rank)
        return rank - 1  # the initial order is coordinate order

    @staticmethod
    def _resolve_one(record: array, cls: int, rank: int) -> tuple[int, int]:
        i = 1
        for gidx in range(record[0]):
            members, ncontribs = record[i], record[i + 1]
            i += 2
            if gidx != cls:
                i += 5 * ncontribs
                continue
            local = rank
            for _ in range(ncontribs):
                kind, src, first, stride, count = record[i : i + 5]
                i += 5
                if local > count:
                    local -= count
                    continue
                if kind == _TOP:
                    return src, first
                return src, first + (local - 1) * stride
            raise AssertionError("rank outside group during resolution")
        raise AssertionError("group missing from step record")


def multibit_extract_fast(psi: Witness, faces: Sequence[int], m: int) -> str:
    """Grouped multi-bit extraction; bit-identical to the naive path."""
    state = FastMultibitState(m)
    values = psi.values
    for face in faces:
        state.advance(values[face])
    return encode_index(state.winner(), m)
