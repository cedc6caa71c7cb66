"""Master-seed splitting.

Every stochastic stage draws from ``derive_seed(master, *path)``, a 64-bit
value produced by :class:`numpy.random.SeedSequence` with ``path`` as spawn
key. Stage keys used by the pipeline:

====================  =========
stage                 path
====================  =========
synthetic cohort      (0,)
augmentation          (1,)
split assignment      (2,)
feature selection     (3,)
selection iteration   (i,) under the selection seed, i = 1..iterations
====================  =========
"""
import numpy as np

_MASK = (1 << 64) - 1

STAGE_COHORT = 0
STAGE_AUGMENT = 1
STAGE_SPLITS = 2
STAGE_SELECT = 3


def derive_seed(master: int, *path: int) -> int:
    ss = np.random.SeedSequence(entropy=int(master) & _MASK, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
