"""Reading and pairing reference/hypothesis transcript files.

Two layouts are supported. ``tab_keyed`` lines are ``utt_id<TAB>text``
with unique ids and exactly one tab per line; ref and hyp pair by id.
``line_aligned`` files are plain text paired line by line and must have
equal line counts; the 1-based line number becomes the utterance id.
``auto`` picks tab_keyed when every non-blank line of both files
contains a tab.

Files must be UTF-8; a leading byte-order mark is stripped; anything
that does not decode is a parse error, never a lossy read.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import TranscriptParseError

FORMATS = ("auto", "tab_keyed", "line_aligned")


@dataclass(frozen=True)
class TranscriptPair:
    id: str
    ref_text: str
    hyp_text: str


def _read_text(path: str | Path) -> str:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise TranscriptParseError(f"cannot read file: {exc}", path=str(p)) from None
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise TranscriptParseError(
            f"not valid UTF-8 (byte offset {exc.start})", path=str(p)
        ) from None


def _looks_tab_keyed(text: str) -> bool:
    lines = [line for line in text.splitlines() if line.strip()]
    return bool(lines) and all("\t" in line for line in lines)


def parse_tab_keyed(text: str, path: str) -> list[tuple[str, str]]:
    entries: list[tuple[str, str]] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.count("\t") != 1:
            raise TranscriptParseError(
                f"expected exactly one tab ('utt_id<TAB>text'), found {line.count(chr(9))}",
                path=path,
                line=lineno,
            )
        utt_id, utt_text = line.split("\t")
        if not utt_id.strip():
            raise TranscriptParseError("empty utterance id", path=path, line=lineno)
        utt_id = utt_id.strip()
        if utt_id in seen:
            raise TranscriptParseError(
                f"duplicate utterance id {utt_id!r} (first seen on line {seen[utt_id]})",
                path=path,
                line=lineno,
            )
        seen[utt_id] = lineno
        entries.append((utt_id, utt_text))
    return entries


def _list_ids(ids) -> str:
    ids = sorted(ids)
    shown = ", ".join(ids[:10])
    if len(ids) > 10:
        shown += f", and {len(ids) - 10} more"
    return shown


def read_transcripts(
    ref_path: str | Path, hyp_path: str | Path, fmt: str = "auto"
) -> tuple[TranscriptPair, ...]:
    """Read both files and pair them, preserving reference order."""
    if fmt not in FORMATS:
        raise TranscriptParseError(f"unknown transcript format {fmt!r}")
    ref_text = _read_text(ref_path)
    hyp_text = _read_text(hyp_path)
    if fmt == "auto":
        fmt = (
            "tab_keyed"
            if _looks_tab_keyed(ref_text) and _looks_tab_keyed(hyp_text)
            else "line_aligned"
        )

    if fmt == "tab_keyed":
        ref_entries = parse_tab_keyed(ref_text, str(ref_path))
        hyp_entries = parse_tab_keyed(hyp_text, str(hyp_path))
        hyp_by_id = dict(hyp_entries)
        ref_ids = {i for i, _ in ref_entries}
        missing = [i for i, _ in ref_entries if i not in hyp_by_id]
        extra = [i for i, _ in hyp_entries if i not in ref_ids]
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"ids missing from hypothesis: {_list_ids(missing)}")
            if extra:
                parts.append(f"ids missing from reference: {_list_ids(extra)}")
            raise TranscriptParseError("; ".join(parts), path=str(hyp_path))
        return tuple(
            TranscriptPair(id=i, ref_text=t, hyp_text=hyp_by_id[i])
            for i, t in ref_entries
        )

    ref_lines = ref_text.splitlines()
    hyp_lines = hyp_text.splitlines()
    if len(ref_lines) != len(hyp_lines):
        raise TranscriptParseError(
            f"line counts differ: reference has {len(ref_lines)}, "
            f"hypothesis has {len(hyp_lines)}",
            path=str(hyp_path),
        )
    return tuple(
        TranscriptPair(id=str(k), ref_text=r, hyp_text=h)
        for k, (r, h) in enumerate(zip(ref_lines, hyp_lines), start=1)
    )
