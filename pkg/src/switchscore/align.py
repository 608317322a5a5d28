"""Minimum-edit-distance alignment between reference and hypothesis tokens.

The alignment is the classical Levenshtein dynamic program under unit
costs (match 0; substitution, deletion, insertion 1), with a deterministic
backtrace so repeated calls return identical operation sequences.

Index conventions carried by each operation:

* ``i_src`` is the 1-based reference index. An insertion carries the index
  of the reference token it precedes, so insertions after the final
  reference token have ``i_src == ref_len + 1``. This makes "is this
  operation past the end of the reference" a plain index comparison.
* ``i_res`` is the 1-based hypothesis index, absent for deletions.

Backtrace ties are broken with priority match > substitution > deletion >
insertion. The total distance is invariant to this choice; the exact
operation sequence is not, which is why the priority is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .tokenizer import Token


class EditOpKind(Enum):
    MATCH = "match"
    SUBSTITUTION = "substitution"
    DELETION = "deletion"
    INSERTION = "insertion"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EditOp:
    kind: EditOpKind
    i_src: int
    i_res: int | None


@dataclass(frozen=True)
class Alignment:
    ops: tuple[EditOp, ...]
    ref_len: int
    hyp_len: int

    @property
    def distance(self) -> int:
        return sum(1 for op in self.ops if op.kind is not EditOpKind.MATCH)

    def count(self, kind: EditOpKind) -> int:
        return sum(1 for op in self.ops if op.kind is kind)


def _texts(seq: Sequence[Token] | Sequence[str]) -> list[str]:
    return [t.text if isinstance(t, Token) else t for t in seq]


def align(ref: Sequence[Token] | Sequence[str], hyp: Sequence[Token] | Sequence[str]) -> Alignment:
    """Align two token sequences, comparing tokens by exact text equality.

    Accepts either Token sequences or plain strings. Either side may be
    empty. Returns a minimum-cost alignment whose operation order follows
    the reference left to right.
    """
    r = _texts(ref)
    h = _texts(hyp)
    n, m = len(r), len(h)

    # dist[i][j]: edit distance between the first i reference tokens and
    # the first j hypothesis tokens.
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        ri = r[i - 1]
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, m + 1):
            if ri == h[j - 1]:
                row[j] = prev[j - 1]
            else:
                row[j] = 1 + min(prev[j - 1], prev[j], row[j - 1])

    ops: list[EditOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if (
            i > 0
            and j > 0
            and r[i - 1] == h[j - 1]
            and dist[i][j] == dist[i - 1][j - 1]
        ):
            ops.append(EditOp(EditOpKind.MATCH, i, j))
            i -= 1
            j -= 1
        elif (
            i > 0
            and j > 0
            and r[i - 1] != h[j - 1]
            and dist[i][j] == dist[i - 1][j - 1] + 1
        ):
            ops.append(EditOp(EditOpKind.SUBSTITUTION, i, j))
            i -= 1
            j -= 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(EditOp(EditOpKind.DELETION, i, None))
            i -= 1
        else:
            ops.append(EditOp(EditOpKind.INSERTION, i + 1, j))
            j -= 1
    ops.reverse()
    return Alignment(ops=tuple(ops), ref_len=n, hyp_len=m)
