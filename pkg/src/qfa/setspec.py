"""The set-spec mini-language used by the CLI: `name:key=value,key=value`.

Names: gs | qgs | quadric | sparse | union-cosets | file.  Integer values are
decimal; vector-valued keys take semicolon-separated digit strings
(coordinate 1 first).  `file:<path>` loads the subset file format.
"""

from __future__ import annotations

import numpy as np

from . import constructions as cons
from .core import GroupSpec, GroupSubset, read_subset
from .factors import LinearFactor


class SetSpecError(ValueError):
    def __init__(self, text, pos, message):
        super().__init__(f"set spec {text!r}, position {pos}: {message}")
        self.pos = pos


def _parse_args(text: str, rest: str, offset: int) -> dict:
    args = {}
    if not rest:
        return args
    pos = offset
    for part in rest.split(","):
        if "=" not in part:
            raise SetSpecError(text, pos, f"expected key=value, got {part!r}")
        key, value = part.split("=", 1)
        if not key:
            raise SetSpecError(text, pos, "empty key")
        args[key.strip()] = value.strip()
        pos += len(part) + 1
    return args


def _digit_vector(s: str, n: int, p: int, text: str) -> np.ndarray:
    if len(s) != n or any(ch not in "0123456789" for ch in s):
        raise SetSpecError(text, text.find(s), f"expected {n} digits, got {s!r}")
    v = np.array([int(ch) for ch in s], dtype=np.int64)
    if (v >= p).any():
        raise SetSpecError(text, text.find(s), f"digit out of range for base {p}")
    return v


def parse_set_spec(text: str) -> GroupSubset:
    text = text.strip()
    if text.startswith("file:"):
        return read_subset(text[len("file:"):])
    if ":" in text:
        name, rest = text.split(":", 1)
    else:
        name, rest = text, ""
    args = _parse_args(text, rest, len(name) + 1)

    def geti(key, default=None):
        if key not in args:
            if default is None:
                raise SetSpecError(text, 0, f"missing required key {key!r}")
            return default
        try:
            return int(args[key])
        except ValueError:
            raise SetSpecError(text, text.find(args[key]), f"bad integer for {key!r}")

    if name == "gs":
        return cons.gs(geti("n"), geti("p"))
    if name == "qgs":
        subset, _ = cons.qgs(geti("n"), geti("p"))
        return subset
    if name == "quadric":
        p, n = geti("p"), geti("n")
        c = geti("c", 0)
        M = None
        if "m" in args:
            rows = args["m"].split(";")
            M = np.array([[int(ch) for ch in r] for r in rows], dtype=np.int64)
        return cons.quadric(n, p, M, c)
    if name == "sparse":
        return cons.sparse_example(geti("n"), geti("p"))
    if name == "union-cosets":
        p, n = geti("p"), geti("n")
        spec = GroupSpec(p, n)
        if "duals" not in args or "reps" not in args:
            raise SetSpecError(text, 0, "union-cosets needs duals=...;... and reps=...;...")
        duals = [_digit_vector(s, n, p, text) for s in args["duals"].split(";")]
        reps = [_digit_vector(s, n, p, text) for s in args["reps"].split(";")]
        return cons.union_of_cosets(LinearFactor(spec, duals), reps)
    raise SetSpecError(text, 0, f"unknown set name {name!r}")
