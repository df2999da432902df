"""Marker-protocol patch parsing and function-level splicing.

Agents never regenerate a whole source file; they emit exactly one
sub-function wrapped in the marker protocol::

    ********************
    SUBFUNCTION: add_round_key
    <verbatim code>
    ********************

The fence is a line of exactly 20 asterisks (19 or 21 do not count), the
label line fixes which sub-function the body replaces, and everything around
the block is ignored. Splicing locates the existing definition in the
integrated source using a per-level grammar and replaces it byte-for-byte,
or appends the body when the function does not exist yet.

Level grammars (definitions are recognized at column 0 only):

* PSEUDO  - ``FUNCTION <name>`` ... ``END FUNCTION``
* SCRIPT  - ``def <name>(...)``, span ends at the last line indented past the
  header (blank lines between indented lines stay inside the span)
* SYNTH   - ``<return type> <name>(...) {`` with the opening brace on the
  header line, span ends at the line balancing that brace
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import PatchError

FENCE = "*" * 20
NAME_LABEL = "SUBFUNCTION:"
IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# Inserted patches go above this marker when a skeleton carries one;
# otherwise they are appended at end of file.
INSERT_MARKERS = {
    "PSEUDO": "== insert functions above ==",
    "SCRIPT": "# == insert functions above ==",
    "SYNTH": "// == insert functions above ==",
}


class CodeLevel(str, Enum):
    PSEUDO = "PSEUDO"
    SCRIPT = "SCRIPT"
    SYNTH = "SYNTH"

    @property
    def rank(self) -> int:
        return {"PSEUDO": 0, "SCRIPT": 1, "SYNTH": 2}[self.value]

    def lower_neighbor(self) -> "CodeLevel | None":
        order = [CodeLevel.PSEUDO, CodeLevel.SCRIPT, CodeLevel.SYNTH]
        i = order.index(self)
        return order[i + 1] if i + 1 < len(order) else None

    def higher_neighbor(self) -> "CodeLevel | None":
        order = [CodeLevel.PSEUDO, CodeLevel.SCRIPT, CodeLevel.SYNTH]
        i = order.index(self)
        return order[i - 1] if i > 0 else None


LEVEL_ORDER = (CodeLevel.PSEUDO, CodeLevel.SCRIPT, CodeLevel.SYNTH)

LEVEL_EXTENSIONS = {CodeLevel.PSEUDO: "txt", CodeLevel.SCRIPT: "py", CodeLevel.SYNTH: "cpp"}


@dataclass(frozen=True)
class PatchBlock:
    subfunction_name: str
    body: str  # verbatim, normalized to exactly one trailing newline


@dataclass(frozen=True)
class Span:
    """1-based inclusive line range of one definition."""

    start_line: int
    end_line: int


@dataclass
class IntegratedSource:
    level: CodeLevel
    text: str
    index: dict[str, Span] = field(default_factory=dict)


def parse_patch(raw: str) -> PatchBlock:
    """Extract the first marker-protocol block from an agent response.

    Surrounding prose is dropped; extra blocks after the first are ignored
    (the caller may warn). Raises PatchError with codes NO_FENCE_FOUND,
    MISSING_NAME_LABEL, or UNTERMINATED_FENCE.
    """
    lines = raw.split("\n")
    fence_at = None
    for i, line in enumerate(lines):
        if line.strip() == FENCE:
            fence_at = i
            break
    if fence_at is None:
        raise PatchError("no 20-asterisk fence found", code="NO_FENCE_FOUND")
    if fence_at + 1 >= len(lines):
        raise PatchError("fence not followed by a name label", code="MISSING_NAME_LABEL")
    label = lines[fence_at + 1].strip()
    if not label.startswith(NAME_LABEL):
        raise PatchError(f"expected {NAME_LABEL!r} label after fence, got {label!r}",
                         code="MISSING_NAME_LABEL")
    name = label[len(NAME_LABEL):].strip()
    if not IDENTIFIER_RE.match(name):
        raise PatchError(f"sub-function name {name!r} is not an identifier",
                         code="MISSING_NAME_LABEL")
    body_lines: list[str] = []
    for line in lines[fence_at + 2:]:
        if line.strip() == FENCE:
            body = "\n".join(body_lines).rstrip("\n") + "\n"
            if body == "\n":
                raise PatchError("patch body is empty", code="PATCH_UNPARSEABLE")
            return PatchBlock(subfunction_name=name, body=body)
        body_lines.append(line)
    raise PatchError("fence never closed", code="UNTERMINATED_FENCE")


def count_patch_blocks(raw: str) -> int:
    fences = sum(1 for line in raw.split("\n") if line.strip() == FENCE)
    return fences // 2


def parse_all_patches(raw: str) -> list[PatchBlock]:
    """Every well-formed block in order; used by the single-shot diagnostic
    mode, where one response carries the whole program."""
    blocks: list[PatchBlock] = []
    rest = raw
    while True:
        try:
            block = parse_patch(rest)
        except PatchError:
            break
        blocks.append(block)
        lines = rest.split("\n")
        fences_seen = 0
        for i, line in enumerate(lines):
            if line.strip() == FENCE:
                fences_seen += 1
                if fences_seen == 2:
                    rest = "\n".join(lines[i + 1:])
                    break
        else:
            break
    return blocks


# --- per-level definition grammars ------------------------------------------

_PSEUDO_HEADER = re.compile(r"^FUNCTION\s+([A-Za-z_][A-Za-z0-9_]*)\b")
_PSEUDO_END = re.compile(r"^END FUNCTION\s*$")
_SCRIPT_HEADER = re.compile(r"^def\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(")
_SYNTH_HEADER = re.compile(
    r"^[A-Za-z_][A-Za-z0-9_:<>,\s\*&]*?[\s\*&]([A-Za-z_][A-Za-z0-9_]*)\s*\([^;]*\)\s*\{\s*$")
_SYNTH_KEYWORDS = {"if", "else", "for", "while", "switch", "return", "do", "case"}


def _pseudo_spans(lines: list[str]) -> list[tuple[str, Span]]:
    spans = []
    i = 0
    while i < len(lines):
        m = _PSEUDO_HEADER.match(lines[i])
        if m:
            start = i
            j = i + 1
            while j < len(lines) and not _PSEUDO_END.match(lines[j]):
                j += 1
            if j == len(lines):
                i += 1
                continue  # unterminated block: not a definition
            spans.append((m.group(1), Span(start + 1, j + 1)))
            i = j + 1
        else:
            i += 1
    return spans


def _script_spans(lines: list[str]) -> list[tuple[str, Span]]:
    spans = []
    for i, line in enumerate(lines):
        m = _SCRIPT_HEADER.match(line)
        if not m:
            continue
        end = i
        for j in range(i + 1, len(lines)):
            stripped = lines[j].strip()
            if not stripped:
                continue  # blank lines may sit inside the body
            if lines[j][0] not in (" ", "\t"):
                break
            end = j
        spans.append((m.group(1), Span(i + 1, end + 1)))
    return spans


def _synth_spans(lines: list[str]) -> list[tuple[str, Span]]:
    spans = []
    for i, line in enumerate(lines):
        m = _SYNTH_HEADER.match(line)
        if not m or m.group(1) in _SYNTH_KEYWORDS:
            continue
        depth = line.count("{") - line.count("}")
        if depth <= 0:
            continue
        end = None
        for j in range(i + 1, len(lines)):
            depth += lines[j].count("{") - lines[j].count("}")
            if depth <= 0:
                end = j
                break
        if end is not None:
            spans.append((m.group(1), Span(i + 1, end + 1)))
    return spans


_SPAN_SCANNERS = {
    CodeLevel.PSEUDO: _pseudo_spans,
    CodeLevel.SCRIPT: _script_spans,
    CodeLevel.SYNTH: _synth_spans,
}


def build_index(level: CodeLevel, text: str) -> dict[str, Span]:
    """Scan a source file for sub-function definitions at column 0.

    Raises PatchError(AMBIGUOUS_DEFINITION) when a name is defined twice.
    """
    lines = text.split("\n")
    index: dict[str, Span] = {}
    for name, span in _SPAN_SCANNERS[level](lines):
        if name in index:
            raise PatchError(f"duplicate definition of {name!r} at lines "
                             f"{index[name].start_line} and {span.start_line}",
                             code="AMBIGUOUS_DEFINITION")
        index[name] = span
    return index


def make_source(level: CodeLevel, text: str) -> IntegratedSource:
    return IntegratedSource(level=level, text=text, index=build_index(level, text))


def locate_function(source: IntegratedSource, name: str) -> Span | None:
    """Return the indexed span for ``name`` or None when absent (first insertion)."""
    return source.index.get(name)


def extract_function(source: IntegratedSource, name: str) -> str | None:
    span = locate_function(source, name)
    if span is None:
        return None
    lines = source.text.split("\n")
    return "\n".join(lines[span.start_line - 1:span.end_line]) + "\n"


def apply_patch(source: IntegratedSource, block: PatchBlock) -> IntegratedSource:
    """Splice a patch body into the integrated source.

    Replaces the located definition, or appends/inserts the body when the
    sub-function is new. Bytes outside the replaced span are untouched, and
    applying the same patch twice is a no-op the second time.
    """
    body_lines = block.body.rstrip("\n").split("\n")
    span = locate_function(source, block.subfunction_name)
    if span is not None:
        lines = source.text.split("\n")
        new_lines = lines[:span.start_line - 1] + body_lines + lines[span.end_line:]
        new_text = "\n".join(new_lines)
    else:
        marker = INSERT_MARKERS[source.level.value]
        lines = source.text.split("\n")
        at = next((i for i, l in enumerate(lines) if l.strip() == marker), None)
        if at is not None:
            new_text = "\n".join(lines[:at] + body_lines + [""] + lines[at:])
        elif source.text == "":
            new_text = block.body
        elif source.text.endswith("\n"):
            new_text = source.text + block.body
        else:
            new_text = source.text + "\n" + block.body
    return make_source(source.level, new_text)
