"""Deterministic random streams keyed by a root seed and a tuple of labels.

Every stream is a Philox4x64-10 generator.  Its key comes from
``SeedSequence(root, spawn_key=labels)``, so distinct label tuples give
independent streams and the same tuple always reproduces the same bytes,
whatever order (or thread) the streams are requested from.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

Label = Union[int, str]


def _label_int(label: Label) -> int:
    if isinstance(label, str):
        return zlib.crc32(label.encode("utf-8"))
    if isinstance(label, (bool, np.bool_)) or int(label) < 0:
        raise ValueError(f"stream labels must be non-negative ints or str, got {label!r}")
    return int(label)


@dataclass(frozen=True)
class SeedSpec:
    root: int
    labels: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.root) < 2**64:
            raise ValueError("root seed must fit in an unsigned 64-bit integer")

    def child(self, *labels: Label) -> "SeedSpec":
        return SeedSpec(self.root, self.labels + tuple(labels))

    def key(self) -> np.ndarray:
        ss = SeedSequence(int(self.root), spawn_key=tuple(_label_int(x) for x in self.labels))
        return ss.generate_state(2, np.uint64)

    def generator(self) -> Generator:
        return Generator(Philox(key=self.key()))


def as_seedspec(seed) -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    if isinstance(seed, (int, np.integer)):
        return SeedSpec(int(seed))
    raise TypeError(f"expected an int or SeedSpec, got {type(seed).__name__}")


def normal_rows(seed, n_rows: int, width: int) -> np.ndarray:
    """Standard normal matrix whose row ``b`` depends only on ``(seed, b)``.

    Row ``b`` is drawn from the Philox counter range starting at ``b << 192``,
    which is what lets bootstrap draws be computed in any order.
    """
    key = as_seedspec(seed).key()
    bitgen = Philox(key=key)
    gen = Generator(bitgen)
    out = np.empty((n_rows, width))
    state = bitgen.state
    for b in range(n_rows):
        state["state"] = {"counter": np.array([0, 0, 0, b], dtype=np.uint64), "key": key}
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        bitgen.state = state
        gen.standard_normal(out=out[b])
    return out
