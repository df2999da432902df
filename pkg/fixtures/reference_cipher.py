#!/usr/bin/env python3
"""Independent reference implementation of the toy 16-bit block cipher.

This script is the oracle for every expected value that appears in the
toy-cipher fixture bundle (the worked example in section s6, the per-step
intermediate values, and golden_vectors.json). It deliberately shares no code
with the engine or with the fixture transcripts: if a transcript or document
value drifts, tests comparing against this script catch it.

Run directly to print the worked example and the golden vectors as JSON.
"""

import json

SBOX = [0x7, 0xC, 0xB, 0x2, 0x9, 0x0, 0x4, 0xD,
        0x6, 0x3, 0xF, 0x8, 0xA, 0x1, 0xE, 0x5]

MASK = 0xFFFF


def sub_nibbles(block: int) -> int:
    out = 0
    for shift in (12, 8, 4, 0):
        out |= SBOX[(block >> shift) & 0xF] << shift
    return out


def rotate_block(block: int) -> int:
    return ((block << 4) | (block >> 12)) & MASK


def mix_pairs(block: int) -> int:
    n = [(block >> s) & 0xF for s in (12, 8, 4, 0)]
    m = [n[i] ^ n[(i + 1) % 4] for i in range(4)]
    return (m[0] << 12) | (m[1] << 8) | (m[2] << 4) | m[3]


def add_round_key(block: int, key: int) -> int:
    return (block ^ key) & MASK


def round_key_2(key: int) -> int:
    return sub_nibbles(rotate_block(key))


def encrypt_block(block: int, key: int) -> int:
    rk1 = key
    rk2 = round_key_2(key)
    s = add_round_key(block, rk1)
    s = sub_nibbles(s)
    s = rotate_block(s)
    s = mix_pairs(s)
    s = add_round_key(s, rk2)
    s = sub_nibbles(s)
    s = rotate_block(s)
    s = add_round_key(s, rk1)
    return s


def worked_example(pt: int = 0x1234, key: int = 0xABCD) -> dict:
    """Every intermediate state of one encryption, for the document's s6."""
    rk1 = key
    rk2 = round_key_2(key)
    steps = {}
    steps["rk1"] = rk1
    steps["rot_key"] = rotate_block(key)
    steps["rk2"] = rk2
    s = add_round_key(pt, rk1)
    steps["after_ark1"] = s
    s = sub_nibbles(s)
    steps["after_sub1"] = s
    s = rotate_block(s)
    steps["after_rot1"] = s
    s = mix_pairs(s)
    steps["after_mix1"] = s
    s = add_round_key(s, rk2)
    steps["after_ark2"] = s
    s = sub_nibbles(s)
    steps["after_sub2"] = s
    s = rotate_block(s)
    steps["after_rot2"] = s
    s = add_round_key(s, rk1)
    steps["ciphertext"] = s
    assert s == encrypt_block(pt, key)
    return steps


GOLDEN_INPUTS = [
    (0x1234, 0xABCD),
    (0x0000, 0x0000),
    (0xFFFF, 0x5A5A),
    (0xC0DE, 0x1357),
]


def golden_vectors() -> list:
    return [{"id": f"golden{i}", "inputs": [hex(pt), hex(key)],
             "expected": hex(encrypt_block(pt, key))}
            for i, (pt, key) in enumerate(GOLDEN_INPUTS)]


if __name__ == "__main__":
    example = {k: hex(v) for k, v in worked_example().items()}
    print(json.dumps({"worked_example": example,
                      "golden_vectors": golden_vectors()}, indent=2))
