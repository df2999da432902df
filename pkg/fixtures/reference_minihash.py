#!/usr/bin/env python3
"""Independent reference implementation of the demo byte-fold checksum.

Oracle for the full_route_demo bundle: the test vectors in section d3 and the
expected values inside the demo transcript all come from here.
"""

import json


def mix_step(v: int) -> int:
    return (((v << 1) | (v >> 7)) & 0xFF) ^ 0x5A


def digest(word: int) -> int:
    h = 0
    for shift in (24, 16, 8, 0):
        h = mix_step(h ^ ((word >> shift) & 0xFF))
    return h


VECTOR_INPUTS = [0x4F2A91C3, 0x00000001]

ORACLE_PROBES = [0xDEADBEEF, 0x01020304]
MIX_PROBES = [0x00, 0x3C]


def vectors() -> list:
    return [{"id": f"v{i}", "inputs": [hex(w)], "expected": hex(digest(w))}
            for i, w in enumerate(VECTOR_INPUTS)]


if __name__ == "__main__":
    print(json.dumps({
        "vectors": vectors(),
        "oracle_probes": {hex(w): hex(digest(w)) for w in ORACLE_PROBES},
        "mix_probes": {hex(v): hex(mix_step(v)) for v in MIX_PROBES},
    }, indent=2))
