"""Counter-based randomness with replayable per-walker, per-interval substreams.

Philox(4x64) keyed by (run seed, walker id + 1); substream selection writes
the interval index into the second counter word, giving every interval its
own block of 2**64 draws.  Replaying any interval therefore reproduces its
draws exactly, independent of what happened before - the property the
suffix-replay (Markov) contract relies on.  Key word 0 is the run seed; a
walker id of -1 (key word 1 = 0) is reserved for run-level draws such as a
randomized removal start.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox


class SubstreamRng:
    """One walker's generator with O(1) seeking to an interval substream."""

    def __init__(self, seed: int, walker: int):
        self.seed = int(seed)
        self.walker = int(walker)
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF, (self.walker + 1) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        self._bitgen = Philox(key=key)
        self.generator = Generator(self._bitgen)
        self._template = self._bitgen.state
        self._template["buffer_pos"] = 4
        self._template["has_uint32"] = 0
        self._template["uinteger"] = 0
        self._counter = self._template["state"]["counter"]
        self._counter[:] = 0

    def seek(self, interval: int) -> Generator:
        """Position the stream at the start of an interval's block.

        Interval -1 is the init block (counter word 1 = 0); interval k >= 0
        maps to counter word 1 = k + 1.  The state setter copies the
        template, so mutating it between seeks is safe.
        """
        self._counter[1] = np.uint64(interval + 1)
        self._bitgen.state = self._template
        return self.generator


def run_level_rng(seed: int) -> SubstreamRng:
    """Stream for draws that belong to the run, not to any walker."""
    return SubstreamRng(seed, -1)
