"""Script classification and segmentation of transcripts into evaluation units.

Tokens are labeled with one of five script classes based purely on the
Unicode code points of the letters they contain: Latin, Arabic, Han, Mixed
(letters from two or more of those scripts), or Neutral (no letters from
any of them, e.g. digits and punctuation). Classification never looks at
surrounding context, so it is deterministic and safe to apply to isolated
vocabulary entries as well as to full utterances.

Segmentation produces the units that error rates are computed over:
whitespace-delimited words, with every Han character additionally split
into its own single-character unit (the usual Mandarin-English convention
for mixed error rates). Latin and Arabic words stay whole.
"""

from __future__ import annotations

import re
import sys
import unicodedata
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidInputError


class ScriptClass(Enum):
    LATIN = "latin"
    ARABIC = "arabic"
    HAN = "han"
    MIXED = "mixed"
    NEUTRAL = "neutral"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Token:
    """One evaluation unit: a word or a single Han character.

    ``index`` is the 1-based position of the token within its utterance.
    """

    text: str
    script: ScriptClass
    index: int


@dataclass(frozen=True)
class Utterance:
    id: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class NormalizationOptions:
    lowercase: bool = True
    strip_punctuation: bool = True
    collapse_whitespace: bool = True


DEFAULT_NORMALIZATION = NormalizationOptions()

# Unicode blocks holding letters of each script. Latin and Arabic blocks
# also contain digits, marks and punctuation, so block membership is
# intersected with the letter category (L*) when the tables are built.
_LATIN_BLOCKS = (
    (0x0041, 0x005A),  # A-Z
    (0x0061, 0x007A),  # a-z
    (0x00C0, 0x00FF),  # Latin-1 letters
    (0x0100, 0x024F),  # Latin Extended-A/B
    (0x0250, 0x02AF),  # IPA extensions
    (0x1E00, 0x1EFF),  # Latin Extended Additional
    (0x2C60, 0x2C7F),  # Latin Extended-C
    (0xA720, 0xA7FF),  # Latin Extended-D
    (0xAB30, 0xAB6F),  # Latin Extended-E
    (0xFB00, 0xFB06),  # Latin ligatures
    (0xFF21, 0xFF3A),  # fullwidth A-Z
    (0xFF41, 0xFF5A),  # fullwidth a-z
)

_ARABIC_BLOCKS = (
    (0x0600, 0x06FF),  # Arabic
    (0x0750, 0x077F),  # Arabic Supplement
    (0x08A0, 0x08FF),  # Arabic Extended-A
    (0x0870, 0x089F),  # Arabic Extended-B
    (0xFB50, 0xFDFF),  # Presentation Forms-A
    (0xFE70, 0xFEFF),  # Presentation Forms-B
)

# CJK ideograph ranges are letters throughout; no category filtering needed.
_HAN_BLOCKS = (
    (0x3400, 0x4DBF),  # Extension A
    (0x4E00, 0x9FFF),  # CJK Unified Ideographs
    (0xF900, 0xFAFF),  # Compatibility Ideographs
    (0x20000, 0x2A6DF),  # Extension B
    (0x2A700, 0x2EBEF),  # Extensions C-F
    (0x2F800, 0x2FA1F),  # Compatibility Supplement
    (0x30000, 0x3134F),  # Extension G
)


def _letter_class(blocks) -> str:
    """Regex character class of all letter code points inside the blocks."""
    chars = []
    for lo, hi in blocks:
        for cp in range(lo, hi + 1):
            if unicodedata.category(chr(cp)).startswith("L"):
                chars.append(cp)
    # Compress consecutive code points into ranges to keep the pattern short.
    parts = []
    start = prev = chars[0]
    for cp in chars[1:]:
        if cp == prev + 1:
            prev = cp
            continue
        parts.append((start, prev))
        start = prev = cp
    parts.append((start, prev))
    return "[" + "".join(
        re.escape(chr(a)) if a == b else f"{re.escape(chr(a))}-{re.escape(chr(b))}"
        for a, b in parts
    ) + "]"


LATIN_LETTER_RE = re.compile(_letter_class(_LATIN_BLOCKS))
ARABIC_LETTER_RE = re.compile(_letter_class(_ARABIC_BLOCKS))
HAN_LETTER_RE = re.compile(
    "[" + "".join(f"{chr(a)}-{chr(b)}" for a, b in _HAN_BLOCKS) + "]"
)

# Anything the normalizer treats as strippable: punctuation, symbols and
# invisible format controls (directional marks, BOM and friends).
_STRIP_CATEGORIES = ("P", "S")


def classify_script(text: str) -> ScriptClass:
    """Classify a token by the scripts of the letters it contains.

    Returns Mixed when letters from two or more of Latin/Arabic/Han are
    present, Neutral when none are (digits, punctuation, symbols, or
    letters of untracked scripts only).
    """
    if not text:
        raise InvalidInputError("cannot classify an empty string")
    found = []
    if LATIN_LETTER_RE.search(text):
        found.append(ScriptClass.LATIN)
    if ARABIC_LETTER_RE.search(text):
        found.append(ScriptClass.ARABIC)
    if HAN_LETTER_RE.search(text):
        found.append(ScriptClass.HAN)
    if not found:
        return ScriptClass.NEUTRAL
    if len(found) > 1:
        return ScriptClass.MIXED
    return found[0]


def _strip_marks(text: str) -> str:
    return "".join(
        ch
        for ch in text
        if not (unicodedata.category(ch)[0] in _STRIP_CATEGORIES
                or unicodedata.category(ch) == "Cf")
    )


def normalize(text: str, opts: NormalizationOptions = DEFAULT_NORMALIZATION) -> str:
    """Apply the enabled normalization steps in a fixed order.

    Order: collapse whitespace, lowercase, strip punctuation. Stripping can
    merge the whitespace around removed characters, so the collapse step is
    re-applied afterwards when enabled; the composition is idempotent.
    """
    out = text
    if opts.collapse_whitespace:
        out = " ".join(out.split())
    if opts.lowercase:
        out = out.lower()
    if opts.strip_punctuation:
        out = _strip_marks(out)
        if opts.collapse_whitespace:
            out = " ".join(out.split())
    return out


def _split_chunk(chunk: str) -> list[str]:
    """Split one whitespace-free chunk into units: Han characters become
    single-character units, maximal non-Han runs stay together."""
    units = []
    run = []
    for ch in chunk:
        if HAN_LETTER_RE.match(ch):
            if run:
                units.append("".join(run))
                run = []
            units.append(ch)
        else:
            run.append(ch)
    if run:
        units.append("".join(run))
    return units


def segment_units(
    text: str, opts: NormalizationOptions = DEFAULT_NORMALIZATION
) -> list[Token]:
    """Normalize and segment text into mixed-granularity evaluation units.

    Whitespace delimits words; every Han character is additionally its own
    unit while Latin/Arabic runs remain whole. Indices run from 1.
    """
    tokens = []
    for chunk in normalize(text, opts).split():
        for unit in _split_chunk(chunk):
            tokens.append(
                Token(text=unit, script=classify_script(unit), index=len(tokens) + 1)
            )
    return tokens


def segment_words(
    text: str, opts: NormalizationOptions = DEFAULT_NORMALIZATION
) -> list[Token]:
    """Normalize and segment text into plain whitespace-delimited words."""
    tokens = []
    for chunk in normalize(text, opts).split():
        tokens.append(
            Token(text=chunk, script=classify_script(chunk), index=len(tokens) + 1)
        )
    return tokens


if sys.maxunicode < 0x10FFFF:  # pragma: no cover
    raise RuntimeError("narrow Python builds are not supported")
