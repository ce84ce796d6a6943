"""Smoke test for the tnlab_py extension.

Build first, then run from the repository root:

    cargo build --release -p tnlab-py --features extension-module
    cp target/release/libtnlab_py.so python/tnlab_py.so
    python3 python/smoke.py

`maturin develop -m crates/py/Cargo.toml --features extension-module` works too.
"""

import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import tnlab_py as tn


def matrix(rows):
    n = len(rows)
    return json.dumps({
        "format": "TNT", "version": 1, "dims": [n, n], "labels": ["out", "in"],
        "re": [float(x) for r in rows for x in r], "im": [0.0] * (n * n),
    })


def main():
    scan = tn.wielandt_scan(3)
    assert max(i for _, i in scan if i is not None) == 5

    aklt = tn.model("aklt")
    assert tn.injectivity_index(aklt) == 2
    assert tn.primitivity_index(aklt) == 1
    assert abs(tn.entanglement_entropy(aklt, 8, 4) - 2 * math.log(2)) < 1e-2

    rows = tn.parent_gap(aklt, [4, 5, 6])
    assert all(r["degeneracy"] == 1 and r["gap"] > 0.1 for r in rows), rows

    lhs, rhs, gap = tn.dl_check("ising", 6, 2)
    assert lhs <= rhs and gap > 0

    # AKLT under pi rotations about x and z: the nontrivial Z2xZ2 class
    rx = [[0, 0, -1], [0, -1, 0], [-1, 0, 0]]  # exp(i pi Sx)
    rz = [[-1, 0, 0], [0, 1, 0], [0, 0, -1]]  # exp(i pi Sz)
    label, trivial = tn.spt_class(aklt, [matrix(rx), matrix(rz)])
    assert not trivial, label

    try:
        tn.injectivity_index('{"format":"TNT","version":1}')
    except ValueError as e:
        assert "field" in str(e)
    else:
        raise AssertionError("malformed input accepted")

    print("smoke ok:", label)


if __name__ == "__main__":
    main()
