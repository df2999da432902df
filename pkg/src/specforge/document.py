"""Specification-document ingestion.

A document arrives as a *bundle*: a directory with a ``manifest`` file at its
root plus one text file per section and the attachment images the manifest
references. The engine never parses PDFs; extraction happens upstream and this
module only loads, validates, and renders the already-extracted form.

Manifest format (``format_version: 1``), JSON::

    {
      "format_version": 1,
      "doc_id": "...",
      "title": "...",
      "sections": [
        {
          "section_id": "s1",
          "heading": "...",
          "text_file": "sections/s1.txt",
          "attachments": [
            {"kind": "TABLE", "path": "attachments/x.png", "caption": "..."}
          ]
        }
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import DocumentError, ManifestError

MANIFEST_NAME = "manifest"
FORMAT_VERSION = 1

# Appended when render_context has to cut text; sized so a budget as small as
# its own length still yields output of exactly `budget` chars.
TRUNCATION_MARKER = "[...]"

ATTACH_OPEN = "[[ATTACH:"
ATTACH_CLOSE = "]]"


class AttachmentKind(str, Enum):
    FIGURE = "FIGURE"
    TABLE = "TABLE"
    EQUATION_IMAGE = "EQUATION_IMAGE"


@dataclass(frozen=True)
class Attachment:
    kind: AttachmentKind
    path: str  # relative to the bundle root
    caption: str

    def placeholder(self) -> str:
        return f"{ATTACH_OPEN}{self.path}{ATTACH_CLOSE}"


@dataclass(frozen=True)
class Section:
    section_id: str
    heading: str
    body_text: str
    attachments: tuple[Attachment, ...] = ()


@dataclass(frozen=True)
class SpecDocument:
    doc_id: str
    title: str
    sections: tuple[Section, ...]
    bundle_root: Path | None = None

    def section(self, section_id: str) -> Section:
        for sec in self.sections:
            if sec.section_id == section_id:
                return sec
        raise DocumentError(f"unknown section id: {section_id}", code="UNKNOWN_SECTION_ID")

    def section_ids(self) -> list[str]:
        return [s.section_id for s in self.sections]


@dataclass(frozen=True)
class ValidationIssue:
    section_id: str | None
    code: str
    reason: str


@dataclass(frozen=True)
class PromptContext:
    """Rendered document text plus the attachments it references, in order."""

    text: str
    attachments: tuple[Attachment, ...] = ()


def _require(cond: bool, message: str, code: str = "MANIFEST_MALFORMED") -> None:
    if not cond:
        raise ManifestError(message, code=code)


def load_manifest(bundle_path: str | Path) -> SpecDocument:
    """Load a bundle directory into a SpecDocument.

    Raises ManifestError with code MANIFEST_MALFORMED on schema violations,
    ATTACHMENT_MISSING when a referenced file is absent, and
    DUPLICATE_SECTION_ID when two sections share an id.
    """
    root = Path(bundle_path)
    manifest_path = root / MANIFEST_NAME
    _require(manifest_path.is_file(), f"no manifest file in {root}")
    try:
        raw = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}", code="MANIFEST_MALFORMED")

    _require(isinstance(raw, dict), "manifest root must be an object")
    _require(raw.get("format_version") == FORMAT_VERSION,
             f"unsupported format_version {raw.get('format_version')!r}")
    for key in ("doc_id", "title"):
        _require(isinstance(raw.get(key), str) and raw[key] != "", f"missing field {key!r}")
    raw_sections = raw.get("sections")
    _require(isinstance(raw_sections, list) and len(raw_sections) > 0,
             "manifest must list at least one section")

    resolved_root = root.resolve()
    sections: list[Section] = []
    seen_ids: set[str] = set()
    for i, rec in enumerate(raw_sections):
        _require(isinstance(rec, dict), f"section #{i} is not an object")
        sid = rec.get("section_id")
        _require(isinstance(sid, str) and sid != "", f"section #{i} missing section_id")
        if sid in seen_ids:
            raise ManifestError(f"duplicate section id {sid!r}", code="DUPLICATE_SECTION_ID")
        seen_ids.add(sid)
        heading = rec.get("heading", "")
        _require(isinstance(heading, str), f"section {sid}: heading must be a string")

        text_file = rec.get("text_file")
        body_text = ""
        if text_file is not None:
            _require(isinstance(text_file, str), f"section {sid}: text_file must be a path")
            text_path = root / text_file
            _require(text_path.is_file(), f"section {sid}: text file {text_file} missing",
                     code="ATTACHMENT_MISSING")
            body_text = text_path.read_text(encoding="utf-8")

        attachments: list[Attachment] = []
        for j, att in enumerate(rec.get("attachments", [])):
            _require(isinstance(att, dict), f"section {sid}: attachment #{j} is not an object")
            kind = att.get("kind")
            _require(kind in AttachmentKind.__members__,
                     f"section {sid}: bad attachment kind {kind!r}")
            path = att.get("path")
            _require(isinstance(path, str) and path != "",
                     f"section {sid}: attachment #{j} missing path")
            full = (root / path).resolve()
            _require(str(full).startswith(str(resolved_root)),
                     f"section {sid}: attachment path escapes bundle: {path}")
            if not full.is_file():
                raise ManifestError(f"section {sid}: attachment file missing: {path}",
                                    code="ATTACHMENT_MISSING")
            attachments.append(Attachment(kind=AttachmentKind[kind], path=path,
                                          caption=att.get("caption", "")))

        _require(body_text != "" or attachments,
                 f"section {sid}: empty body with no attachments")
        sections.append(Section(section_id=sid, heading=heading, body_text=body_text,
                                attachments=tuple(attachments)))

    return SpecDocument(doc_id=raw["doc_id"], title=raw["title"],
                        sections=tuple(sections), bundle_root=resolved_root)


def save_bundle(doc: SpecDocument, target: str | Path) -> Path:
    """Write a document back out as a bundle directory (round-trip of load_manifest).

    Attachment files are copied from the source bundle when available,
    otherwise created empty so the manifest stays loadable.
    """
    root = Path(target)
    (root / "sections").mkdir(parents=True, exist_ok=True)
    records = []
    for idx, sec in enumerate(doc.sections, start=1):
        text_file = f"sections/{idx:02d}_{sec.section_id}.txt"
        (root / text_file).write_text(sec.body_text, encoding="utf-8")
        atts = []
        for att in sec.attachments:
            dest = root / att.path
            dest.parent.mkdir(parents=True, exist_ok=True)
            src = (doc.bundle_root / att.path) if doc.bundle_root else None
            if src is not None and src.is_file():
                dest.write_bytes(src.read_bytes())
            elif not dest.exists():
                dest.write_bytes(b"")
            atts.append({"kind": att.kind.value, "path": att.path, "caption": att.caption})
        records.append({"section_id": sec.section_id, "heading": sec.heading,
                        "text_file": text_file, "attachments": atts})
    manifest = {"format_version": FORMAT_VERSION, "doc_id": doc.doc_id,
                "title": doc.title, "sections": records}
    (root / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return root


def validate_document(doc: SpecDocument) -> list[ValidationIssue]:
    """Check the document invariants; a valid document yields an empty list."""
    issues: list[ValidationIssue] = []
    if not doc.sections:
        issues.append(ValidationIssue(None, "NO_SECTIONS", "document has no sections"))
    seen: set[str] = set()
    for sec in doc.sections:
        if sec.section_id in seen:
            issues.append(ValidationIssue(sec.section_id, "DUPLICATE_SECTION_ID",
                                          f"section id {sec.section_id!r} appears more than once"))
        seen.add(sec.section_id)
        if not sec.body_text and not sec.attachments:
            issues.append(ValidationIssue(sec.section_id, "EMPTY_SECTION",
                                          "section has no text and no attachments"))
        if doc.bundle_root is not None:
            for att in sec.attachments:
                full = (doc.bundle_root / att.path).resolve()
                if not str(full).startswith(str(doc.bundle_root)):
                    issues.append(ValidationIssue(sec.section_id, "PATH_ESCAPE",
                                                  f"attachment path escapes bundle: {att.path}"))
                elif not full.is_file():
                    issues.append(ValidationIssue(sec.section_id, "ATTACHMENT_MISSING",
                                                  f"attachment file missing: {att.path}"))
    return issues


def _render_section(sec: Section) -> str:
    parts = [f"## {sec.heading} [{sec.section_id}]"]
    if sec.body_text:
        parts.append(sec.body_text.rstrip("\n"))
    for att in sec.attachments:
        parts.append(f"{att.placeholder()} {att.kind.value}: {att.caption}".rstrip())
    return "\n".join(parts)


def _safe_cut(text: str, keep: int) -> int:
    # Never cut inside an attachment placeholder token.
    start = text.rfind(ATTACH_OPEN, 0, keep)
    if start != -1:
        close = text.find(ATTACH_CLOSE, start)
        if close != -1 and close + len(ATTACH_CLOSE) > keep:
            return start
    return keep


def render_context(doc: SpecDocument, section_ids: list[str], char_budget: int) -> PromptContext:
    """Render the named sections, in document order, within a character budget.

    Each attachment of a rendered section appears exactly once as a
    placeholder token plus an entry in the returned attachment list. When the
    text exceeds the budget it is hard-cut and suffixed with
    TRUNCATION_MARKER so the result is exactly ``char_budget`` chars long.
    """
    if char_budget <= 0:
        raise DocumentError("char_budget must be positive", code="CONTEXT_BUDGET_INVALID")
    known = set(doc.section_ids())
    for sid in section_ids:
        if sid not in known:
            raise DocumentError(f"unknown section id: {sid}", code="UNKNOWN_SECTION_ID")
    wanted = set(section_ids)
    picked = [s for s in doc.sections if s.section_id in wanted]
    text = "\n\n".join(_render_section(s) for s in picked)
    if len(text) > char_budget:
        if char_budget <= len(TRUNCATION_MARKER):
            return PromptContext(text=TRUNCATION_MARKER[:char_budget], attachments=())
        keep = _safe_cut(text, char_budget - len(TRUNCATION_MARKER))
        text = text[:keep] + TRUNCATION_MARKER
    attachments = tuple(att for s in picked for att in s.attachments
                        if att.placeholder() in text)
    return PromptContext(text=text, attachments=attachments)
