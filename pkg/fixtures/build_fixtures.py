#!/usr/bin/env python3
"""Generate the fixture corpora: bundles, transcripts, and run configs.

Everything checked into fixtures/ besides the two reference scripts is
emitted by this generator. Every expected value is computed by the reference
implementations (reference_cipher.py, reference_minihash.py), never typed by
hand, so the documents, the scripted transcripts, and the golden vector files
cannot drift apart.

Run from the fixtures directory:  python3 build_fixtures.py
"""

import base64
import json
from pathlib import Path

import reference_cipher as rc
import reference_minihash as rm

HERE = Path(__file__).resolve().parent

# A valid 1x1 PNG; attachment content is opaque to the engine.
PNG_1PX = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mP8z8BQDwAEhQGAhKmMIQAAAABJRU5ErkJggg=="
)

FENCE = "*" * 20


def block(name: str, body: str) -> str:
    return f"{FENCE}\nSUBFUNCTION: {name}\n{body.rstrip()}\n{FENCE}"


def fenced(tag: str, payload) -> str:
    return f"```{tag}\n{json.dumps(payload, indent=1, sort_keys=True)}\n```"


def entry(agent: str, match: list, response: str, max_uses: int | None = 1) -> dict:
    return {"agent": agent, "match": match, "response": response, "max_uses": max_uses}


def hx(v: int) -> str:
    return hex(v)


# ===========================================================================
# Toy cipher bundle
# ===========================================================================

WE = rc.worked_example()

S1 = """PocketCipher is a 16-bit demonstration block cipher built to exercise a
complete implement-and-verify flow. A plaintext block and a key, each 16 bits
wide, pass through two rounds of substitution, rotation, mixing, and key
addition to produce a 16-bit ciphertext block. The cipher function named
encrypt_block is the top-level target of this document.
"""

S2 = """The cipher state is a single 16-bit word viewed as four 4-bit nibbles
n0, n1, n2, n3, where n0 is the most significant nibble and n3 the least
significant. All arithmetic is on unsigned values; every intermediate result
is reduced modulo 2^16. Hexadecimal literals in this document use a 0x
prefix.
"""

SBOX_TEXT = ", ".join(hx(v) for v in rc.SBOX)
S3 = f"""Substitution replaces each of the four nibbles independently through a
fixed 16-entry table. The table S, indexed by nibble value 0 through 15, is:
S = [{SBOX_TEXT}].
The sub_nibbles transformation applies S to every nibble of the state and
reassembles the word in place, so sub_nibbles preserves the 16-bit width.
Table 1 (attached) restates the substitution table.
"""

S4 = f"""Three further transformations operate on the state word.
rotate_block rotates the whole 16-bit word left by four bit positions, which
moves each nibble one position toward the most significant end and wraps the
top nibble around to the bottom: the state n0 n1 n2 n3 becomes n1 n2 n3 n0.
mix_pairs replaces each nibble with the exclusive-or of itself and its right
neighbor, wrapping at the end: the new nibble i equals n_i xor n_(i+1 mod 4).
For example, mix_pairs({hx(0x1234)}) = {hx(rc.mix_pairs(0x1234))}.
add_round_key combines the state with a 16-bit round key by bitwise
exclusive-or of the two words; the result is again a single 16-bit word.
"""

S5 = f"""The key schedule derives two round keys from the 16-bit cipher key K.
The first round key rk1 equals K itself. The second round key rk2 equals
sub_nibbles(rotate_block(K)).
encrypt_block proceeds as follows. First the plaintext is combined with rk1
using add_round_key. Round one then applies sub_nibbles, rotate_block,
mix_pairs, and add_round_key with rk2, in that order. Round two, the final
round, applies sub_nibbles, rotate_block, and add_round_key with rk1; the
final round omits the mixing step. The resulting word is the ciphertext.
Table 2 (attached) restates the round structure.
"""

S6 = f"""Worked example. Encrypting plaintext {hx(0x1234)} under key {hx(0xABCD)}:
rotate_block({hx(0xABCD)}) = {hx(WE['rot_key'])}, so rk2 = sub_nibbles({hx(WE['rot_key'])}) = {hx(WE['rk2'])}.
add_round_key({hx(0x1234)}, {hx(0xABCD)}) = {hx(WE['after_ark1'])}.
sub_nibbles({hx(WE['after_ark1'])}) = {hx(WE['after_sub1'])}.
rotate_block({hx(WE['after_sub1'])}) = {hx(WE['after_rot1'])}.
mix_pairs({hx(WE['after_rot1'])}) = {hx(WE['after_mix1'])}.
add_round_key({hx(WE['after_mix1'])}, {hx(WE['rk2'])}) = {hx(WE['after_ark2'])}.
sub_nibbles({hx(WE['after_ark2'])}) = {hx(WE['after_sub2'])}.
rotate_block({hx(WE['after_sub2'])}) = {hx(WE['after_rot2'])}.
add_round_key({hx(WE['after_rot2'])}, {hx(0xABCD)}) = {hx(WE['ciphertext'])}, the ciphertext.
Test vectors for the full cipher, as pairs (plaintext, key) -> ciphertext:
({hx(rc.GOLDEN_INPUTS[0][0])}, {hx(rc.GOLDEN_INPUTS[0][1])}) -> {hx(rc.encrypt_block(*rc.GOLDEN_INPUTS[0]))}
({hx(rc.GOLDEN_INPUTS[1][0])}, {hx(rc.GOLDEN_INPUTS[1][1])}) -> {hx(rc.encrypt_block(*rc.GOLDEN_INPUTS[1]))}
({hx(rc.GOLDEN_INPUTS[2][0])}, {hx(rc.GOLDEN_INPUTS[2][1])}) -> {hx(rc.encrypt_block(*rc.GOLDEN_INPUTS[2]))}
({hx(rc.GOLDEN_INPUTS[3][0])}, {hx(rc.GOLDEN_INPUTS[3][1])}) -> {hx(rc.encrypt_block(*rc.GOLDEN_INPUTS[3]))}
"""

TOY_SECTIONS = [
    ("s1", "Introduction", S1, []),
    ("s2", "State and Notation", S2, []),
    ("s3", "The Substitution Table", S3,
     [{"kind": "TABLE", "path": "attachments/sbox_table.png",
       "caption": "Table 1: the nibble substitution table"}]),
    ("s4", "Round Transformations", S4, []),
    ("s5", "Key Schedule and Cipher Procedure", S5,
     [{"kind": "TABLE", "path": "attachments/rounds_table.png",
       "caption": "Table 2: operations applied in each round"}]),
    ("s6", "Worked Example and Test Vectors", S6, []),
]


def write_bundle(root: Path, doc_id: str, title: str, sections) -> None:
    (root / "sections").mkdir(parents=True, exist_ok=True)
    records = []
    for idx, (sid, heading, text, attachments) in enumerate(sections, 1):
        rel = f"sections/{idx:02d}_{sid}.txt"
        (root / rel).write_text(text, encoding="utf-8")
        for att in attachments:
            path = root / att["path"]
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(PNG_1PX)
        records.append({"section_id": sid, "heading": heading, "text_file": rel,
                        "attachments": attachments})
    manifest = {"format_version": 1, "doc_id": doc_id, "title": title,
                "sections": records}
    (root / "manifest").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                   encoding="utf-8")


# --- toy code bodies --------------------------------------------------------

SBOX_PY = ", ".join(hx(v) for v in rc.SBOX)
NOISY_SBOX = list(rc.SBOX)
NOISY_SBOX[0], NOISY_SBOX[1] = NOISY_SBOX[1], NOISY_SBOX[0]
NOISY_SBOX_PY = ", ".join(hx(v) for v in NOISY_SBOX)

TOY_PSEUDO = {
    "sub_nibbles": """FUNCTION sub_nibbles
  INPUT block, a 16-bit word of four nibbles
  FOR each nibble position FROM most significant TO least significant
    REPLACE the nibble WITH table S indexed by the nibble value
  END FOR
  OUTPUT the reassembled 16-bit word
END FUNCTION""",
    "rotate_block": """FUNCTION rotate_block
  INPUT block, a 16-bit word
  SHIFT the word left by 4 bits
  BRING the 4 bits that fell off back in at the least significant end
  OUTPUT the rotated 16-bit word
END FUNCTION""",
    "mix_pairs": """FUNCTION mix_pairs
  INPUT block, a 16-bit word of nibbles n0 n1 n2 n3
  FOR each position i FROM 0 TO 3
    SET new nibble i TO n_i XOR n_(i+1 mod 4)
  END FOR
  OUTPUT the reassembled word
END FUNCTION""",
    "add_round_key": """FUNCTION add_round_key
  INPUT block and key, both 16-bit words
  OUTPUT block XOR key as one 16-bit word
END FUNCTION""",
    "encrypt_block": """FUNCTION encrypt_block
  INPUT block and key, both 16-bit words
  SET rk2 TO sub_nibbles(rotate_block(key))
  SET state TO add_round_key(block, key)
  SET state TO add_round_key(mix_pairs(rotate_block(sub_nibbles(state))), rk2)
  SET state TO add_round_key(rotate_block(sub_nibbles(state)), key)
  OUTPUT state as the ciphertext
END FUNCTION""",
}

TOY_SCRIPT = {
    "sub_nibbles": f"""def sub_nibbles(block):
    sbox = [{SBOX_PY}]
    out = 0
    for shift in (12, 8, 4, 0):
        out |= sbox[(block >> shift) & 0xF] << shift
    return out""",
    "rotate_block": """def rotate_block(block):
    return ((block << 4) | (block >> 12)) & 0xFFFF""",
    "mix_pairs": """def mix_pairs(block):
    nib = [(block >> s) & 0xF for s in (12, 8, 4, 0)]
    mixed = [nib[i] ^ nib[(i + 1) % 4] for i in range(4)]
    return (mixed[0] << 12) | (mixed[1] << 8) | (mixed[2] << 4) | mixed[3]""",
    "add_round_key": """def add_round_key(block, key):
    return (block ^ key) & 0xFFFF""",
    "encrypt_block": """def encrypt_block(block, key):
    rk2 = sub_nibbles(rotate_block(key))
    state = add_round_key(block, key)
    state = add_round_key(mix_pairs(rotate_block(sub_nibbles(state))), rk2)
    state = add_round_key(rotate_block(sub_nibbles(state)), key)
    return state""",
}

NOISY_SUB_NIBBLES_SCRIPT = f"""def sub_nibbles(block):
    sbox = [{NOISY_SBOX_PY}]
    out = 0
    for shift in (12, 8, 4, 0):
        out |= sbox[(block >> shift) & 0xF] << shift
    return out"""

ARK_BAD_DRAFTS = [
    """def add_round_key(block, key):
    state = [(block >> s) & 0xF for s in (12, 8, 4, 0)]
    keyn = [(key >> s) & 0xF for s in (12, 8, 4, 0)]
    return [state[i] ^ keyn[i] for i in range(4)]""",
    """def add_round_key(block, key):
    return (block & key) & 0xFFFF""",
    """def add_round_key(block, key):
    return (block + key) & 0xFFFF""",
]

SBOX_CPP = ", ".join(hx(v) for v in rc.SBOX)

TOY_SYNTH = {
    "sub_nibbles": f"""uint16_t sub_nibbles(uint16_t block) {{
    static const uint8_t sbox[16] = {{{SBOX_CPP}}};
    uint16_t out = 0;
    for (uint8_t shift = 0; shift < 16; shift = (uint8_t)(shift + 4)) {{
        out = (uint16_t)(out | (uint16_t)(sbox[(block >> shift) & 0xF] << shift));
    }}
    return out;
}}""",
    "rotate_block": """uint16_t rotate_block(uint16_t block) {
    return (uint16_t)(((block << 4) | (block >> 12)) & 0xFFFF);
}""",
    "mix_pairs": """uint16_t mix_pairs(uint16_t block) {
    uint8_t nib[4];
    nib[0] = (uint8_t)((block >> 12) & 0xF);
    nib[1] = (uint8_t)((block >> 8) & 0xF);
    nib[2] = (uint8_t)((block >> 4) & 0xF);
    nib[3] = (uint8_t)(block & 0xF);
    uint16_t out = 0;
    for (uint8_t i = 0; i < 4; i = (uint8_t)(i + 1)) {
        uint8_t mixed = (uint8_t)(nib[i] ^ nib[(i + 1) & 3]);
        out = (uint16_t)(out | (uint16_t)(mixed << (12 - 4 * i)));
    }
    return out;
}""",
    "add_round_key": """uint16_t add_round_key(uint16_t block, uint16_t key) {
    return (uint16_t)(block ^ key);
}""",
    "encrypt_block": """uint16_t encrypt_block(uint16_t block, uint16_t key) {
    uint16_t rk2 = sub_nibbles(rotate_block(key));
    int applied_rounds = 0;
    uint16_t state = add_round_key(block, key);
    state = add_round_key(mix_pairs(rotate_block(sub_nibbles(state))), rk2);
    applied_rounds = applied_rounds + 1;
    state = add_round_key(rotate_block(sub_nibbles(state)), key);
    applied_rounds = applied_rounds + 1;
    return state;
}""",
}

ENCRYPT_SYNTH_CLEAN = """uint16_t encrypt_block(uint16_t block, uint16_t key) {
    uint16_t rk2 = sub_nibbles(rotate_block(key));
    uint8_t applied_rounds = 0;
    uint16_t state = add_round_key(block, key);
    state = add_round_key(mix_pairs(rotate_block(sub_nibbles(state))), rk2);
    applied_rounds = (uint8_t)(applied_rounds + 1);
    state = add_round_key(rotate_block(sub_nibbles(state)), key);
    applied_rounds = (uint8_t)(applied_rounds + 1);
    return state;
}"""


def quote_from(text: str, start_marker: str, end_marker: str) -> str:
    """Take a verbatim slice of a section body between two markers (inclusive)."""
    i = text.index(start_marker)
    j = text.index(end_marker, i) + len(end_marker)
    return text[i:j]


TOY_SUMMARIES = {
    "s1": "PocketCipher encrypts a 16-bit block under a 16-bit key through two "
          "rounds; encrypt_block is the top-level target.",
    "s2": "The state is one 16-bit word seen as four nibbles n0..n3, n0 most "
          "significant; all values unsigned, reduced mod 2^16.",
    "s3": f"sub_nibbles maps each nibble through the fixed table S = "
          f"[{SBOX_TEXT}] and keeps the 16-bit width.",
    "s4": "rotate_block rotates the word left 4 bits; mix_pairs xors each "
          "nibble with its right neighbor (wrapping); add_round_key xors the "
          "state with a 16-bit round key.",
    "s5": "rk1 = K, rk2 = sub_nibbles(rotate_block(K)); whitening add, round "
          "one sub/rotate/mix/add rk2, final round sub/rotate/add rk1 with no "
          "mixing.",
    "s6": f"Worked example: encrypt_block({hx(0x1234)}, {hx(0xABCD)}) = "
          f"{hx(WE['ciphertext'])} with all intermediates listed, plus four "
          f"full test vectors.",
}

TOY_PLAN = {
    "target": "encrypt_block",
    "sub_functions": [
        {"name": "sub_nibbles", "goal": "substitute every nibble through table S",
         "depends_on": []},
        {"name": "rotate_block", "goal": "rotate the 16-bit word left one nibble",
         "depends_on": []},
        {"name": "mix_pairs", "goal": "xor each nibble with its right neighbor",
         "depends_on": []},
        {"name": "add_round_key", "goal": "xor the state with a round key",
         "depends_on": []},
        {"name": "encrypt_block", "goal": "two-round cipher over the transformations",
         "depends_on": ["sub_nibbles", "rotate_block", "mix_pairs", "add_round_key"]},
    ],
}


def word_io(*names: str) -> list:
    return [{"name": n, "type": "unsigned word", "width": "16 bits"} for n in names]


TOY_INFODICTS = {
    "sub_nibbles": {
        "name": "sub_nibbles",
        "inputs": word_io("block"), "outputs": word_io("result"),
        "functionality": "Replace each of the four nibbles of the 16-bit state "
                         "with its entry in the fixed table S and reassemble the "
                         "word in place.",
        "references": [
            {"section_id": "s3",
             "quote": quote_from(S3, "S = [", "].")},
            {"section_id": "s3",
             "quote": "applies S to every nibble of the state"},
        ],
        "depends_on": [], "side_effect_only": False,
    },
    "rotate_block": {
        "name": "rotate_block",
        "inputs": word_io("block"), "outputs": word_io("result"),
        "functionality": "Rotate the 16-bit word left by four bit positions, "
                         "wrapping the top nibble to the bottom.",
        "references": [
            {"section_id": "s4",
             "quote": "rotates the whole 16-bit word left by four bit positions"},
        ],
        "depends_on": [], "side_effect_only": False,
    },
    "mix_pairs": {
        "name": "mix_pairs",
        "inputs": word_io("block"), "outputs": word_io("result"),
        "functionality": "Replace every nibble with the xor of itself and its "
                         "right neighbor, wrapping at the least significant end.",
        "references": [
            {"section_id": "s4",
             "quote": "the new nibble i equals n_i xor n_(i+1 mod 4)"},
        ],
        "depends_on": [], "side_effect_only": False,
    },
    "add_round_key": {
        "name": "add_round_key",
        "inputs": word_io("block", "key"), "outputs": word_io("result"),
        "functionality": "Bitwise exclusive-or of the 16-bit state word with a "
                         "16-bit round key; inputs and output are single words "
                         "of identical width.",
        "references": [
            {"section_id": "s4",
             "quote": "combines the state with a 16-bit round key by bitwise\nexclusive-or"},
        ],
        "depends_on": [], "side_effect_only": False,
    },
    "encrypt_block": {
        "name": "encrypt_block",
        "inputs": word_io("block", "key"), "outputs": word_io("ciphertext"),
        "functionality": "Whiten with rk1, run round one (sub, rotate, mix, add "
                         "rk2) and the final round (sub, rotate, add rk1) which "
                         "omits mixing; rk2 = sub_nibbles(rotate_block(K)).",
        "references": [
            {"section_id": "s5",
             "quote": "The second round key rk2 equals\nsub_nibbles(rotate_block(K))."},
            {"section_id": "s5",
             "quote": "the\nfinal round omits the mixing step"},
        ],
        "depends_on": ["sub_nibbles", "rotate_block", "mix_pairs", "add_round_key"],
        "side_effect_only": False,
    },
}

ACCEPT_VERDICT = fenced("verdict", {"verdict": "ACCEPT", "comments": [],
                                    "suspicion": "CURRENT"})

# SPEC-origin cases per sub-function, straight from the worked example.
TOY_SPEC_TESTS = {
    "sub_nibbles": [
        {"id": "sn1", "inputs": [hx(WE["after_ark1"])], "expected": hx(WE["after_sub1"])},
        {"id": "sn2", "inputs": [hx(WE["after_ark2"])], "expected": hx(WE["after_sub2"])},
    ],
    "rotate_block": [
        {"id": "rb1", "inputs": [hx(WE["after_sub1"])], "expected": hx(WE["after_rot1"])},
        {"id": "rb2", "inputs": [hx(0xABCD)], "expected": hx(WE["rot_key"])},
    ],
    "mix_pairs": [
        {"id": "mp1", "inputs": [hx(WE["after_rot1"])], "expected": hx(WE["after_mix1"])},
        {"id": "mp2", "inputs": [hx(0x1234)], "expected": hx(rc.mix_pairs(0x1234))},
    ],
    "add_round_key": [
        {"id": "ak1", "inputs": [hx(0x1234), hx(0xABCD)], "expected": hx(WE["after_ark1"])},
        {"id": "ak2", "inputs": [hx(WE["after_mix1"]), hx(WE["rk2"])],
         "expected": hx(WE["after_ark2"])},
    ],
    "encrypt_block": [
        {"id": "eb1", "inputs": [hx(0x1234), hx(0xABCD)], "expected": hx(WE["ciphertext"])},
        {"id": "eb2", "inputs": [hx(0xFFFF), hx(0x5A5A)],
         "expected": hx(rc.encrypt_block(0xFFFF, 0x5A5A))},
    ],
}

# Inputs proposed for SYNTH verification; expected values come from the oracle.
TOY_SYNTH_PROBES = {
    "sub_nibbles": [["0x123"], ["0xfedc"]],
    "rotate_block": [["0x1234"], ["0x8001"]],
    "mix_pairs": [["0x9abc"], ["0x1111"]],
    "add_round_key": [["0x1234", "0xabcd"], ["0xffff", "0x0001"]],
    "encrypt_block": [["0x1234", "0xabcd"]],
}

TOY_NAMES = [s["name"] for s in TOY_PLAN["sub_functions"]]


def draft_match(name: str, level: str) -> list:
    return [f"[task: draft] [level: {level}] [subfunction: {name}]"]


def toy_understanding_entries() -> list:
    entries = []
    for sid, _h, _t, _a in TOY_SECTIONS:
        entries.append(entry("Summarizer", [f"[task: summarize] [section: {sid}]"],
                             TOY_SUMMARIES[sid]))
    entries.append(entry("Decomposer", ["[task: decompose]"],
                         "The implementation order below follows the document.\n"
                         + fenced("plan", TOY_PLAN)))
    for name in TOY_NAMES:
        entries.append(entry("Describer", [f"[task: augment] [subfunction: {name}]"],
                             fenced("infodict", TOY_INFODICTS[name])))
        entries.append(entry("Verifier",
                             [f"[task: verify_infodict] [subfunction: {name}]"],
                             ACCEPT_VERDICT, max_uses=None))
    return entries


def toy_coding_entries(ark_saga: bool, noisy_sub_nibbles: bool) -> list:
    entries = []
    for name in TOY_NAMES:
        # PSEUDO: draft + self-validation.
        entries.append(entry("Coder", draft_match(name, "PSEUDO"),
                             block(name, TOY_PSEUDO[name])))
        entries.append(entry(
            "Verifier", [f"[task: self_validate] [level: PSEUDO] [subfunction: {name}]"],
            ACCEPT_VERDICT, max_uses=None))

        # SCRIPT: document-derived cases, then the draft(s).
        entries.append(entry(
            "Verifier",
            [f"[task: derive_tests] [origin: SPEC] [level: SCRIPT] [subfunction: {name}]"],
            fenced("tests", TOY_SPEC_TESTS[name]), max_uses=None))
        if name == "add_round_key" and ark_saga:
            comments = [
                ["the implementation returns a nibble list while the cipher state "
                 "is one 16-bit word; input and output dimensions must match"],
                ["bitwise AND is not the documented combination; the state and "
                 "key words are combined with exclusive-or"],
                ["modular addition changes carry behavior; the document specifies "
                 "bitwise exclusive-or of the two words"],
            ]
            for bad, notes in zip(ARK_BAD_DRAFTS, comments):
                entries.append(entry("Coder", draft_match(name, "SCRIPT"),
                                     block(name, bad)))
                entries.append(entry(
                    "Verifier",
                    ["[task: assess_failure] [level: SCRIPT] "
                     "[subfunction: add_round_key]"],
                    fenced("verdict", {"verdict": "REVISE", "comments": notes,
                                       "suspicion": "CURRENT"})))
            entries.append(entry(
                "PromptOptimizer",
                ["[task: optimize_prompt] [subfunction: add_round_key]"],
                fenced("addendum", {
                    "trigger_summary": "three interface and operator mismatches "
                                       "in a row",
                    "addendum": "add_round_key takes two 16-bit words and returns "
                                "one 16-bit word; keep the state a single word "
                                "(no nibble lists) and combine with bitwise "
                                "exclusive-or only."})))
        entries.append(entry("Coder", draft_match(name, "SCRIPT"),
                             block(name, TOY_SCRIPT[name])))

        # SYNTH: oracle-backed cases, then the draft.
        entries.append(entry(
            "Verifier",
            [f"[task: derive_tests] [origin: HIGHER_LEVEL] [level: SYNTH] "
             f"[subfunction: {name}]"],
            fenced("tests", [{"id": f"hp{i}", "inputs": ins, "expected": ""}
                             for i, ins in enumerate(TOY_SYNTH_PROBES[name])]),
            max_uses=None))
        entries.append(entry("Coder", draft_match(name, "SYNTH"),
                             block(name, TOY_SYNTH[name]), max_uses=None))

        if name == "sub_nibbles" and noisy_sub_nibbles:
            entries.append(entry(
                "NoiseInjector",
                ["[task: noise] [stage: SCRIPT] [subfunction: sub_nibbles]"],
                block("sub_nibbles", NOISY_SUB_NIBBLES_SCRIPT)))
            entries.append(entry(
                "Verifier",
                ["[task: assess_failure] [level: SYNTH] [subfunction: sub_nibbles]"],
                fenced("verdict", {
                    "verdict": "REVISE",
                    "comments": ["the compiled output matches the substitution "
                                 "table in the document but disagrees with the "
                                 "script-level reference values"],
                    "suspicion": "PRIOR_SUBFUNCTION"}), max_uses=None))
            entries.append(entry(
                "Analyzer", ["[task: analyze_trajectory]"],
                fenced("analysis", {
                    "completed_work": "sub_nibbles accepted at PSEUDO and SCRIPT; "
                                      "its SYNTH drafts keep failing oracle cases",
                    "failure_focus": "SYNTH output disagrees with values computed "
                                     "from the accepted script implementation",
                    "hypotheses": [
                        {"locus": "PRIOR_SUBFUNCTION", "name": "sub_nibbles",
                         "rationale": "the script-level reference no longer "
                                      "matches the documented table; its table "
                                      "entries look transposed"}]})))
            entries.append(entry(
                "Reflector", ["[task: decide_route]"],
                fenced("route", {
                    "route": "REVISE_PRIOR", "target": "sub_nibbles@SCRIPT",
                    "feedback": "re-derive the script implementation from the "
                                "documented substitution table",
                    "justification": "the oracle itself is the suspect, not the "
                                     "compiled code"})))
            entries.append(entry(
                "Coder", draft_match("sub_nibbles", "SCRIPT") + ["Guidance:"],
                block("sub_nibbles", TOY_SCRIPT["sub_nibbles"])))
    return entries


def toy_hls_entries() -> list:
    return [entry(
        "CodeOptimizer",
        ["[task: hls_optimize] [subfunction: encrypt_block]"],
        block("encrypt_block", ENCRYPT_SYNTH_CLEAN))]


def build_toy_transcript(noise: bool) -> list:
    return (toy_understanding_entries()
            + toy_coding_entries(ark_saga=not noise, noisy_sub_nibbles=noise)
            + toy_hls_entries())


# ===========================================================================
# full_route_demo bundle
# ===========================================================================

D_VECS = rm.vectors()

D1 = """The bytefold checksum condenses one 32-bit word into an 8-bit digest.
The digest function takes the 32-bit input word and returns the 8-bit
checksum; it folds the four bytes of the word, most significant byte first,
through a repeated mixing step. digest is the top-level target of this
document.
"""

D2 = """The mixing step operates on a single 8-bit value. mix_step rotates its
input left by one bit position within the byte and then applies an
exclusive-or with the constant 0x5A. The rotation wraps the most significant
bit around to bit zero. mix_step is applied once per folded byte.
"""

D3 = f"""The digest procedure starts from an accumulator of zero. For each of
the four bytes of the input word, taken most significant first, the byte is
exclusive-ored into the accumulator and the accumulator is then passed
through mix_step. After the last byte the accumulator is the checksum.
Test vectors: digest({D_VECS[0]['inputs'][0]}) = {D_VECS[0]['expected']} and
digest({D_VECS[1]['inputs'][0]}) = {D_VECS[1]['expected']}.
"""

DEMO_SECTIONS = [
    ("d1", "Overview and Interface", D1, []),
    ("d2", "The Mixing Step", D2, []),
    ("d3", "Digest Procedure and Test Vectors", D3, []),
]

DEMO_SUMMARIES = {
    "d1": "digest folds a 32-bit word into an 8-bit checksum, most significant "
          "byte first; digest is the target.",
    "d2": "mix_step rotates an 8-bit value left by one bit (wrapping) and xors "
          "the constant 0x5A.",
    "d3": f"Accumulator starts at zero; per byte (MSB first) xor byte in, then "
          f"mix_step; vectors digest({D_VECS[0]['inputs'][0]}) = "
          f"{D_VECS[0]['expected']}, digest({D_VECS[1]['inputs'][0]}) = "
          f"{D_VECS[1]['expected']}.",
}

DEMO_PLAN = {
    "target": "digest",
    "sub_functions": [
        {"name": "mix_step", "goal": "rotate a byte left one bit and xor 0x5A",
         "depends_on": []},
        {"name": "digest", "goal": "fold the four bytes through mix_step",
         "depends_on": ["mix_step"]},
    ],
}

DEMO_INFODICTS = {
    "mix_step": {
        "name": "mix_step",
        "inputs": [{"name": "value", "type": "unsigned byte", "width": "8 bits"}],
        "outputs": [{"name": "mixed", "type": "unsigned byte", "width": "8 bits"}],
        "functionality": "Rotate the 8-bit input left by one bit, wrapping the "
                         "top bit to bit zero, then xor the constant 0x5A.",
        "references": [
            {"section_id": "d2",
             "quote": "rotates its\ninput left by one bit position within the byte"},
        ],
        "depends_on": [], "side_effect_only": False,
    },
    "digest": {
        "name": "digest",
        "inputs": [{"name": "word", "type": "unsigned word", "width": "32 bits"}],
        "outputs": [{"name": "checksum", "type": "unsigned byte", "width": "8 bits"}],
        "functionality": "Start the accumulator at zero; for each byte of the "
                         "word, most significant first, xor the byte into the "
                         "accumulator and apply mix_step; the final accumulator "
                         "is the checksum.",
        "references": [
            {"section_id": "d3",
             "quote": "the byte is\nexclusive-ored into the accumulator and the "
                      "accumulator is then passed\nthrough mix_step"},
        ],
        "depends_on": ["mix_step"], "side_effect_only": False,
    },
}

DIGEST_REVISED = dict(DEMO_INFODICTS["digest"])
DIGEST_REVISED["functionality"] = (
    "Fold exactly four bytes in order bits 31..24, 23..16, 15..8, 7..0. The "
    "accumulator starts at zero; each byte is xor-combined into the "
    "accumulator before mix_step runs; no mixing occurs after the last byte "
    "beyond that final mix_step call.")

DEMO_PSEUDO = {
    "mix_step": """FUNCTION mix_step
  INPUT value, an 8-bit byte
  ROTATE the byte left by one bit, wrapping the top bit to bit zero
  XOR the rotated byte with the constant 0x5A
  OUTPUT the mixed byte
END FUNCTION""",
    "digest": """FUNCTION digest
  INPUT word, a 32-bit value
  SET accumulator TO zero
  FOR each byte of the word FROM most significant TO least significant
    SET accumulator TO mix_step(accumulator XOR byte)
  END FOR
  OUTPUT accumulator as the checksum
END FUNCTION""",
}

MIX_WRONG = """def mix_step(value):
    return (((value << 2) | (value >> 6)) & 0xFF) ^ 0x5A"""

MIX_RIGHT = """def mix_step(value):
    return (((value << 1) | (value >> 7)) & 0xFF) ^ 0x5A"""

MIX_WRONG_CPP = """uint8_t mix_step(uint8_t value) {
    return (uint8_t)((((value << 2) | (value >> 6)) & 0xFF) ^ 0x5A);
}"""

MIX_RIGHT_CPP = """uint8_t mix_step(uint8_t value) {
    return (uint8_t)((((value << 1) | (value >> 7)) & 0xFF) ^ 0x5A);
}"""

DIGEST_RIGHT = """def digest(word):
    acc = 0
    for shift in (24, 16, 8, 0):
        acc = mix_step(acc ^ ((word >> shift) & 0xFF))
    return acc"""

# Plausible-but-wrong digest drafts for the reflection saga. The first six run
# against a broken mix_step (so even correct-looking code fails); the last two
# carry their own bugs.
DIGEST_DRAFTS_SCRIPT = [
    DIGEST_RIGHT,                                            # loop1 a1 (mix wrong)
    """def digest(word):
    acc = 0
    for shift in (24, 16, 8, 0):
        acc = mix_step(acc) ^ ((word >> shift) & 0xFF)
    return acc""",                                           # loop1 a2
    DIGEST_RIGHT,                                            # loop2 a1 (mix wrong)
    """def digest(word):
    acc = 0x5A
    for shift in (24, 16, 8, 0):
        acc = mix_step(acc ^ ((word >> shift) & 0xFF))
    return acc""",                                           # loop2 a2
    """def digest(word):
    acc = 0
    for shift in (0, 8, 16, 24):
        acc = mix_step(acc ^ ((word >> shift) & 0xFF))
    return acc""",                                           # loop3 a1 (LSB first)
    """def digest(word):
    acc = 0
    for shift in (0, 8, 16, 24):
        acc = acc ^ mix_step((word >> shift) & 0xFF)
    return acc""",                                           # loop3 a2
    """def digest(word):
    acc = 0
    for shift in (24, 16, 8, 0):
        acc = mix_step(acc ^ ((word >> shift) & 0xFF))
    return mix_step(acc)""",                                 # loop4 a1 (extra final mix)
    """def digest(word):
    acc = 1
    for shift in (24, 16, 8, 0):
        acc = mix_step(acc ^ ((word >> shift) & 0xFF))
    return acc""",                                           # loop4 a2 (seeded acc)
    DIGEST_RIGHT,                                            # loop5 a1 (answered)
]

DIGEST_RIGHT_CPP = """uint8_t digest(uint32_t word) {
    uint8_t acc = 0;
    for (uint8_t shift_index = 0; shift_index < 4; shift_index = (uint8_t)(shift_index + 1)) {
        uint8_t byte_value = (uint8_t)((word >> (24 - 8 * shift_index)) & 0xFF);
        acc = mix_step((uint8_t)(acc ^ byte_value));
    }
    return acc;
}"""

DEMO_ANSWER = ("ROUTE: REGENERATE_CURRENT\n"
               "Fold the bytes most significant first; the accumulator starts at "
               "zero and each byte is xored into the accumulator before mix_step "
               "runs. Do not mask or post-process the final accumulator.")

DEMO_SPEC_TESTS = {
    "digest": [dict(v) for v in D_VECS],
}

DEMO_SYNTH_PROBES = {
    "mix_step": [[hx(v)] for v in rm.MIX_PROBES],
    "digest": [[hx(w)] for w in rm.ORACLE_PROBES],
}


def demo_understanding_entries() -> list:
    entries = []
    for sid, _h, _t, _a in DEMO_SECTIONS:
        entries.append(entry("Summarizer", [f"[task: summarize] [section: {sid}]"],
                             DEMO_SUMMARIES[sid]))
    entries.append(entry("Decomposer", ["[task: decompose]"],
                         fenced("plan", DEMO_PLAN)))
    for name in ("mix_step", "digest"):
        entries.append(entry("Describer", [f"[task: augment] [subfunction: {name}]"],
                             fenced("infodict", DEMO_INFODICTS[name])))
        entries.append(entry("Verifier",
                             [f"[task: verify_infodict] [subfunction: {name}]"],
                             ACCEPT_VERDICT, max_uses=None))
    return entries


def demo_coding_entries() -> list:
    e = []
    assess_digest_script = [
        ["observed checksums diverge from the documented vectors on every case"],
        ["still failing both documented vectors after revision"],
        ["revised per the clarified instructions; vectors still fail"],
        ["the mismatch pattern does not follow the byte order change"],
        ["byte order fixed but values still off; failure looks local"],
        ["mixing applied to the wrong operand"],
        ["close on one vector, wrong on the other; top bit lost"],
        ["accumulator flow still wrong"],
    ]

    # mix_step: PSEUDO accept, SCRIPT no-vectors self-validation (wrong slips
    # through), SYNTH consistent with the wrong script.
    e.append(entry("Coder", draft_match("mix_step", "PSEUDO"),
                   block("mix_step", DEMO_PSEUDO["mix_step"])))
    e.append(entry("Verifier",
                   ["[task: self_validate] [level: PSEUDO] [subfunction: mix_step]"],
                   ACCEPT_VERDICT, max_uses=None))
    e.append(entry("Verifier",
                   ["[task: derive_tests] [origin: SPEC] [level: SCRIPT] "
                    "[subfunction: mix_step]"],
                   fenced("tests", []), max_uses=None))
    e.append(entry("Coder", draft_match("mix_step", "SCRIPT"),
                   block("mix_step", MIX_WRONG)))
    e.append(entry("Verifier",
                   ["[task: self_validate] [level: SCRIPT] [subfunction: mix_step]"],
                   ACCEPT_VERDICT, max_uses=None))
    e.append(entry("Verifier",
                   ["[task: derive_tests] [origin: HIGHER_LEVEL] [level: SYNTH] "
                    "[subfunction: mix_step]"],
                   fenced("tests", [{"id": f"mp{i}", "inputs": ins, "expected": ""}
                                    for i, ins in enumerate(DEMO_SYNTH_PROBES["mix_step"])]),
                   max_uses=None))
    e.append(entry("Coder", draft_match("mix_step", "SYNTH"),
                   block("mix_step", MIX_WRONG_CPP)))

    # digest PSEUDO.
    e.append(entry("Coder", draft_match("digest", "PSEUDO"),
                   block("digest", DEMO_PSEUDO["digest"])))
    e.append(entry("Verifier",
                   ["[task: self_validate] [level: PSEUDO] [subfunction: digest]"],
                   ACCEPT_VERDICT, max_uses=None))

    # digest SCRIPT: vectors from the document, then the long saga.
    e.append(entry("Verifier",
                   ["[task: derive_tests] [origin: SPEC] [level: SCRIPT] "
                    "[subfunction: digest]"],
                   fenced("tests", DEMO_SPEC_TESTS["digest"]), max_uses=None))
    for i, draft in enumerate(DIGEST_DRAFTS_SCRIPT[:8]):
        e.append(entry("Coder", draft_match("digest", "SCRIPT"),
                       block("digest", draft)))
        suspicion = ("INSTRUCTIONS" if i < 2 else
                     "PRIOR_SUBFUNCTION" if i < 4 else
                     "CURRENT" if i < 6 else "UNKNOWN")
        e.append(entry("Verifier",
                       ["[task: assess_failure] [level: SCRIPT] [subfunction: digest]"],
                       fenced("verdict", {"verdict": "REVISE",
                                          "comments": assess_digest_script[i],
                                          "suspicion": suspicion})))
    e.append(entry("Coder",
                   draft_match("digest", "SCRIPT") + ["Do not mask or post-process"],
                   block("digest", DIGEST_DRAFTS_SCRIPT[8])))

    # Prompt optimizer: one per failing digest loop (SCRIPT x4 + SYNTH x1).
    addenda = [
        "State the byte order explicitly in the implementation: bits 31..24 first.",
        "The accumulator must start at zero; never seed it with a constant.",
        "Apply mix_step to (accumulator xor byte), not to the byte or accumulator alone.",
        "Return the full 8-bit accumulator unmodified after the last mix_step.",
        "Keep the compiled version structurally identical to the script reference.",
    ]
    for text in addenda:
        e.append(entry("PromptOptimizer",
                       ["[task: optimize_prompt] [subfunction: digest]"],
                       fenced("addendum", {"trigger_summary":
                                           "two consecutive failures", "addendum": text})))

    # Reflection sequence for the digest SCRIPT saga.
    analyses = [
        {"completed_work": "mix_step implemented through SYNTH; digest failed its "
                           "first script loop",
         "failure_focus": "both documented vectors fail with stable offsets",
         "hypotheses": [{"locus": "INSTRUCTIONS", "name": None,
                         "rationale": "the dictionary does not pin byte order or "
                                      "accumulator flow"}]},
        {"completed_work": "digest instructions revised once; script loop failed "
                           "again with identical shape",
         "failure_focus": "vector failures unchanged by clearer instructions",
         "hypotheses": [{"locus": "PRIOR_SUBFUNCTION", "name": "mix_step",
                         "rationale": "self-validated mix_step never ran against "
                                      "a single documented value"}]},
        {"completed_work": "mix_step re-derived and re-accepted at script level",
         "failure_focus": "digest still fails; deltas now look byte-order local",
         "hypotheses": [{"locus": "CURRENT", "name": None,
                         "rationale": "remaining error tracks the digest loop "
                                      "itself"}]},
        {"completed_work": "digest regenerated with targeted feedback; still "
                           "failing both vectors",
         "failure_focus": "no hypothesis left that the trajectory can separate",
         "hypotheses": [{"locus": "UNKNOWN", "name": None,
                         "rationale": "instructions, prior unit, and local "
                                      "regeneration all tried"}]},
        {"completed_work": "digest accepted at script level after operator "
                           "guidance; compiled digest fails oracle cases",
         "failure_focus": "compiled mix_step predates the script-level fix",
         "hypotheses": [{"locus": "PRIOR_SUBFUNCTION", "name": "mix_step",
                         "rationale": "mix_step was revised at script level but "
                                      "its compiled form was never regenerated"}]},
    ]
    for a in analyses:
        e.append(entry("Analyzer", ["[task: analyze_trajectory]"],
                       fenced("analysis", a)))
    routes = [
        {"route": "REVISE_INSTRUCTIONS", "target": "digest",
         "feedback": "pin the byte order (most significant first) and the "
                     "accumulator initialization",
         "justification": "instruction ambiguity is the leading hypothesis"},
        {"route": "REVISE_PRIOR", "target": "mix_step",
         "feedback": "derive the rotation amount from the mixing-step section; "
                     "the current script rotates too far",
         "justification": "mix_step was accepted purely by self-validation"},
        {"route": "REGENERATE_CURRENT", "target": None,
         "feedback": "process bytes most significant first and return the raw "
                     "accumulator",
         "justification": "error is confined to the current sub-function"},
        {"route": "REVISE_PRIOR", "target": "mix_step@SYNTH",
         "feedback": "regenerate the compiled mixing step from the corrected "
                     "script reference",
         "justification": "the compiled prior unit is stale"},
    ]
    for r in routes:
        e.append(entry("Reflector", ["[task: decide_route]"], fenced("route", r)))
    e.append(entry("Reflector", ["[task: build_intervention]"],
                   fenced("intervention", {
                       "observations": "digest fails the two documented vectors "
                                       "under every strategy tried; instructions "
                                       "were revised, the prior mixing step was "
                                       "re-derived, and regeneration was attempted",
                       "attempts": "revise-instructions, revise-prior mix_step, "
                                   "regenerate-current, four coding loops",
                       "questions": ["Which byte enters the fold first, and is "
                                     "the final accumulator postprocessed in any "
                                     "way?"]})))

    # Instruction revision for digest (after REVISE_INSTRUCTIONS).
    e.append(entry("Describer",
                   ["[task: revise_instructions] [subfunction: digest]"],
                   fenced("infodict", DIGEST_REVISED)))

    # mix_step SCRIPT revision loop (after REVISE_PRIOR #1).
    e.append(entry("Coder", draft_match("mix_step", "SCRIPT") + ["Guidance:"],
                   block("mix_step", MIX_RIGHT)))
    # (its self_validate entry above is unlimited, so the re-run reuses it)

    # digest SYNTH: fails twice against stale compiled mix_step, then passes.
    e.append(entry("Verifier",
                   ["[task: derive_tests] [origin: HIGHER_LEVEL] [level: SYNTH] "
                    "[subfunction: digest]"],
                   fenced("tests", [{"id": f"dp{i}", "inputs": ins, "expected": ""}
                                    for i, ins in enumerate(DEMO_SYNTH_PROBES["digest"])]),
                   max_uses=None))
    e.append(entry("Coder", draft_match("digest", "SYNTH"),
                   block("digest", DIGEST_RIGHT_CPP), max_uses=None))
    e.append(entry("Verifier",
                   ["[task: assess_failure] [level: SYNTH] [subfunction: digest]"],
                   fenced("verdict", {"verdict": "REVISE",
                                      "comments": ["compiled digest disagrees with "
                                                   "the script oracle although its "
                                                   "structure matches"],
                                      "suspicion": "PRIOR_SUBFUNCTION"}),
                   max_uses=None))
    # mix_step SYNTH regeneration (after REVISE_PRIOR #2).
    e.append(entry("Coder", draft_match("mix_step", "SYNTH") + ["Guidance:"],
                   block("mix_step", MIX_RIGHT_CPP)))
    return e


def build_demo_transcript() -> list:
    return demo_understanding_entries() + demo_coding_entries()


# ===========================================================================
# single-shot transcript
# ===========================================================================

def build_single_shot_transcript() -> list:
    program = "\n\n".join(
        block(name, {**TOY_SYNTH, "encrypt_block": ENCRYPT_SYNTH_CLEAN}[name])
        for name in TOY_NAMES)
    return [entry("Coder", ["[task: single_shot]"],
                  "Full implementation, one block per sub-function.\n\n" + program)]


# ===========================================================================
# configs and output
# ===========================================================================

def toy_config(noise: bool) -> dict:
    cfg = {
        "target_name": "encrypt_block",
        "budgets": {"max_attempts_per_level": 10, "augment_max_rounds": 3,
                    "optimizer_trigger": 3, "max_reflections_per_subfunction": 3,
                    "hls_budget": 5},
        "provider": {"kind": "scripted",
                     "transcript_path": "transcripts/toy_cipher.jsonl"},
        "golden_vectors": "golden_vectors.json",
    }
    if noise:
        cfg["provider"]["transcript_path"] = "transcripts/toy_cipher_noise.jsonl"
        cfg["noise_stage"] = "SCRIPT"
        cfg["budgets"]["max_attempts_per_level"] = 2
    return cfg


DEMO_CONFIG = {
    "target_name": "digest",
    "budgets": {"max_attempts_per_level": 2, "augment_max_rounds": 3,
                "optimizer_trigger": 2, "max_reflections_per_subfunction": 3,
                "hls_budget": 5},
    "provider": {"kind": "scripted",
                 "transcript_path": "transcripts/full_route_demo.jsonl"},
}

SINGLE_SHOT_CONFIG = {
    "target_name": "encrypt_block",
    "budgets": {"max_attempts_per_level": 10, "augment_max_rounds": 3,
                "optimizer_trigger": 3, "max_reflections_per_subfunction": 3,
                "hls_budget": 5},
    "provider": {"kind": "scripted",
                 "transcript_path": "transcripts/single_shot.jsonl"},
    "golden_vectors": "golden_vectors.json",
}


def write_jsonl(path: Path, entries: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in entries:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _exec_defs(*sources: str) -> dict:
    ns: dict = {}
    for src in sources:
        exec(src, ns)  # fixture self-check only; sources are authored above
    return ns


def selfcheck() -> None:
    """Assert the saga drafts really fail and the final drafts really pass."""
    ns = _exec_defs(TOY_SCRIPT["sub_nibbles"], TOY_SCRIPT["rotate_block"],
                    TOY_SCRIPT["mix_pairs"], TOY_SCRIPT["add_round_key"],
                    TOY_SCRIPT["encrypt_block"])
    for pt, key in rc.GOLDEN_INPUTS:
        assert ns["encrypt_block"](pt, key) == rc.encrypt_block(pt, key)
    for bad in ARK_BAD_DRAFTS:
        bad_ns = _exec_defs(bad)
        got = bad_ns["add_round_key"](0x1234, 0xABCD)
        assert got != rc.add_round_key(0x1234, 0xABCD), "bad ark draft passes"
    noisy = _exec_defs(NOISY_SUB_NIBBLES_SCRIPT)
    assert noisy["sub_nibbles"](0x123) != rc.sub_nibbles(0x123), \
        "noise must corrupt the first SYNTH probe"

    vec_pairs = [(int(v["inputs"][0], 0), int(v["expected"], 0)) for v in D_VECS]
    mix_for_loop = [MIX_WRONG, MIX_WRONG, MIX_WRONG, MIX_WRONG,
                    MIX_RIGHT, MIX_RIGHT, MIX_RIGHT, MIX_RIGHT, MIX_RIGHT]
    for i, draft in enumerate(DIGEST_DRAFTS_SCRIPT):
        ns = _exec_defs(mix_for_loop[i], draft)
        ok = all(ns["digest"](w) == want for w, want in vec_pairs)
        if i < 8:
            assert not ok, f"saga draft {i} unexpectedly passes the vectors"
        else:
            assert ok, "final digest draft must pass the vectors"


def main() -> None:
    selfcheck()
    write_bundle(HERE / "toy_cipher", "toy-cipher",
                 "PocketCipher: a 16-bit demonstration block cipher", TOY_SECTIONS)
    (HERE / "toy_cipher" / "golden_vectors.json").write_text(
        json.dumps(rc.golden_vectors(), indent=2) + "\n", encoding="utf-8")
    write_bundle(HERE / "full_route_demo", "bytefold-demo",
                 "Bytefold: a byte-folding checksum", DEMO_SECTIONS)

    write_jsonl(HERE / "transcripts" / "toy_cipher.jsonl",
                build_toy_transcript(noise=False))
    write_jsonl(HERE / "transcripts" / "toy_cipher_noise.jsonl",
                build_toy_transcript(noise=True))
    write_jsonl(HERE / "transcripts" / "full_route_demo.jsonl",
                build_demo_transcript())
    write_jsonl(HERE / "transcripts" / "single_shot.jsonl",
                build_single_shot_transcript())

    configs = HERE / "configs"
    configs.mkdir(exist_ok=True)
    (configs / "toy_cipher.json").write_text(
        json.dumps(toy_config(False), indent=2) + "\n", encoding="utf-8")
    (configs / "toy_cipher_noise.json").write_text(
        json.dumps(toy_config(True), indent=2) + "\n", encoding="utf-8")
    (configs / "full_route_demo.json").write_text(
        json.dumps(DEMO_CONFIG, indent=2) + "\n", encoding="utf-8")
    (configs / "single_shot.json").write_text(
        json.dumps(SINGLE_SHOT_CONFIG, indent=2) + "\n", encoding="utf-8")
    (HERE / "full_route_demo" / "answer.txt").write_text(DEMO_ANSWER + "\n",
                                                         encoding="utf-8")
    print("fixtures written")


if __name__ == "__main__":
    main()
