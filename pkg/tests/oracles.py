"""Independent reference implementations the tests check the library against.

Nothing here imports the library's alignment or loss internals; the point
is that these are written from the definitions, not from the code under
test.
"""

import math

import numpy as np

from switchscore.align import Alignment, EditOpKind


def brute_force_distance(ref, hyp) -> int:
    """Exhaustive minimum edit distance.

    Enumerates every edit script by recursion over (substitute-or-match,
    delete, insert) choices, keeping the cheapest. Pruned by the best
    script found so far plus a length-difference lower bound; pruning
    never changes the minimum.
    """
    best = math.inf

    def explore(i, j, cost):
        nonlocal best
        remaining_gap = abs((len(ref) - i) - (len(hyp) - j))
        if cost + remaining_gap >= best:
            return
        if i == len(ref) and j == len(hyp):
            best = cost
            return
        if i < len(ref) and j < len(hyp):
            explore(i + 1, j + 1, cost + (ref[i] != hyp[j]))
        if i < len(ref):
            explore(i + 1, j, cost + 1)
        if j < len(hyp):
            explore(i, j + 1, cost + 1)

    explore(0, 0, 0)
    return int(best)


def assert_valid_alignment(ref, hyp, alignment: Alignment) -> None:
    """Check every structural invariant an alignment must satisfy.

    Replays the operation sequence with reference/hypothesis cursors, so
    op order, index conventions and token equality are all pinned, not
    just the counts.
    """
    ref = [t if isinstance(t, str) else t.text for t in ref]
    hyp = [t if isinstance(t, str) else t.text for t in hyp]
    assert alignment.ref_len == len(ref)
    assert alignment.hyp_len == len(hyp)

    i = j = 0  # consumed reference / hypothesis tokens
    for op in alignment.ops:
        if op.kind is EditOpKind.MATCH:
            assert op.i_src == i + 1 and op.i_res == j + 1
            assert ref[i] == hyp[j]
            i += 1
            j += 1
        elif op.kind is EditOpKind.SUBSTITUTION:
            assert op.i_src == i + 1 and op.i_res == j + 1
            assert ref[i] != hyp[j]
            i += 1
            j += 1
        elif op.kind is EditOpKind.DELETION:
            assert op.i_src == i + 1 and op.i_res is None
            i += 1
        else:
            # Insertions carry the index of the next reference token,
            # which is len(ref) + 1 past the end.
            assert op.i_src == i + 1 and op.i_res == j + 1
            j += 1
    assert i == len(ref) and j == len(hyp)

    matches = alignment.count(EditOpKind.MATCH)
    subs = alignment.count(EditOpKind.SUBSTITUTION)
    dels = alignment.count(EditOpKind.DELETION)
    ins = alignment.count(EditOpKind.INSERTION)
    assert matches + subs + dels == len(ref)
    assert matches + subs + ins == len(hyp)
    assert alignment.distance == subs + dels + ins


def loop_weighted_ce(logits, targets, weights) -> float:
    """Position-by-position weighted cross-entropy, accumulated in a loop."""
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets).reshape(-1)
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    flat = logits.reshape(len(targets), logits.shape[-1])
    num = 0.0
    den = 0.0
    for pos in range(len(targets)):
        row = flat[pos]
        shifted = row - row.max()
        logp = shifted[targets[pos]] - math.log(np.exp(shifted).sum())
        num += weights[pos] * (-logp)
        den += weights[pos]
    return num / den


def central_difference_grad(fn, logits, step=1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of logits."""
    logits = np.asarray(logits, dtype=np.float64)
    grad = np.zeros_like(logits)
    flat = grad.reshape(-1)
    base = logits.reshape(-1)
    for k in range(base.size):
        bumped = base.copy()
        bumped[k] = base[k] + step
        up = fn(bumped.reshape(logits.shape))
        bumped[k] = base[k] - step
        down = fn(bumped.reshape(logits.shape))
        flat[k] = (up - down) / (2.0 * step)
    return grad
