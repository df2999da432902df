import json

import pytest

from specforge.document import (TRUNCATION_MARKER, load_manifest, render_context,
                                save_bundle, validate_document)
from specforge.errors import DocumentError, ManifestError

from oracles.plan_check import walk_manifest


def write_min_bundle(root, sections=None, manifest_extra=None):
    sections = sections or [{"section_id": "s1", "heading": "One",
                             "text_file": "sections/s1.txt", "attachments": []}]
    (root / "sections").mkdir(parents=True, exist_ok=True)
    for rec in sections:
        if rec.get("text_file"):
            (root / rec["text_file"]).write_text(f"text of {rec['section_id']}\n")
        for att in rec.get("attachments", []):
            p = root / att["path"]
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_bytes(b"img")
    manifest = {"format_version": 1, "doc_id": "doc", "title": "T",
                "sections": sections}
    manifest.update(manifest_extra or {})
    (root / "manifest").write_text(json.dumps(manifest))
    return root


def test_minimal_bundle_loads(tmp_path):
    doc = load_manifest(write_min_bundle(tmp_path))
    assert len(doc.sections) == 1
    assert doc.sections[0].body_text.startswith("text of s1")


def test_missing_attachment_rejected(tmp_path):
    sections = [{"section_id": "s1", "heading": "One",
                 "text_file": "sections/s1.txt",
                 "attachments": [{"kind": "FIGURE", "path": "attachments/x.png",
                                  "caption": "c"}]}]
    write_min_bundle(tmp_path, sections)
    (tmp_path / "attachments/x.png").unlink()
    with pytest.raises(ManifestError) as err:
        load_manifest(tmp_path)
    assert err.value.code == "ATTACHMENT_MISSING"


def test_duplicate_section_id_rejected(tmp_path):
    sections = [
        {"section_id": "s1", "heading": "A", "text_file": "sections/s1.txt",
         "attachments": []},
        {"section_id": "s1", "heading": "B", "text_file": "sections/s1b.txt",
         "attachments": []},
    ]
    write_min_bundle(tmp_path, sections)
    with pytest.raises(ManifestError) as err:
        load_manifest(tmp_path)
    assert err.value.code == "DUPLICATE_SECTION_ID"


def test_malformed_manifest(tmp_path):
    (tmp_path / "manifest").write_text("{not json")
    with pytest.raises(ManifestError) as err:
        load_manifest(tmp_path)
    assert err.value.code == "MANIFEST_MALFORMED"


def test_path_escape_rejected(tmp_path):
    sections = [{"section_id": "s1", "heading": "One",
                 "text_file": "sections/s1.txt",
                 "attachments": [{"kind": "TABLE", "path": "../outside.png",
                                  "caption": "c"}]}]
    (tmp_path.parent / "outside.png").write_bytes(b"x")
    write_min_bundle(tmp_path, sections)
    with pytest.raises(ManifestError):
        load_manifest(tmp_path)


def test_toy_bundle_matches_manifest_walk(fixtures_dir, toy_doc):
    manifest = json.loads((fixtures_dir / "toy_cipher" / "manifest").read_text())
    assert toy_doc.section_ids() == walk_manifest(manifest)
    assert len(toy_doc.sections) == 6
    attachments = [a for s in toy_doc.sections for a in s.attachments]
    assert len(attachments) == 2
    assert all(a.kind.value == "TABLE" for a in attachments)


def test_validate_well_formed(toy_doc):
    assert validate_document(toy_doc) == []


def test_validate_flags_empty_section(tmp_path):
    sections = [{"section_id": "s1", "heading": "One",
                 "text_file": "sections/s1.txt", "attachments": []}]
    write_min_bundle(tmp_path, sections)
    (tmp_path / "sections/s1.txt").write_text("")
    with pytest.raises(ManifestError):
        load_manifest(tmp_path)  # loader enforces the same invariant


def test_roundtrip_save_load(toy_doc, tmp_path):
    save_bundle(toy_doc, tmp_path / "copy")
    again = load_manifest(tmp_path / "copy")
    assert again.doc_id == toy_doc.doc_id
    assert again.section_ids() == toy_doc.section_ids()
    for a, b in zip(again.sections, toy_doc.sections):
        assert a.heading == b.heading
        assert a.body_text == b.body_text
        assert [x.path for x in a.attachments] == [x.path for x in b.attachments]


def test_render_full_section(toy_doc):
    ctx = render_context(toy_doc, ["s1"], 100_000)
    assert toy_doc.sections[0].body_text.rstrip("\n") in ctx.text
    assert ctx.attachments == ()


def test_render_truncates_to_budget(toy_doc):
    ctx = render_context(toy_doc, ["s1"], 10)
    assert len(ctx.text) == 10
    assert ctx.text.endswith(TRUNCATION_MARKER)


def test_render_attachment_placeholder_once(toy_doc):
    ctx = render_context(toy_doc, ["s3"], 100_000)
    token = "[[ATTACH:attachments/sbox_table.png]]"
    assert ctx.text.count(token) == 1
    assert [a.path for a in ctx.attachments] == ["attachments/sbox_table.png"]


def test_render_unknown_section(toy_doc):
    with pytest.raises(DocumentError) as err:
        render_context(toy_doc, ["nope"], 100)
    assert err.value.code == "UNKNOWN_SECTION_ID"


def test_render_deterministic(toy_doc):
    a = render_context(toy_doc, ["s2", "s4"], 500)
    b = render_context(toy_doc, ["s2", "s4"], 500)
    assert a == b


def test_render_respects_document_order(toy_doc):
    ctx = render_context(toy_doc, ["s4", "s2"], 100_000)
    assert ctx.text.index("[s2]") < ctx.text.index("[s4]")
