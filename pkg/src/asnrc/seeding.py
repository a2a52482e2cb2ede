"""Master-seed splitting.

Every random consumer asks for its own stream by component name. The name is
hashed into the spawn key of a ``numpy.random.SeedSequence`` rooted at the
master seed, so adding a new component never shifts an existing stream.
"""

import hashlib
from typing import Tuple

import numpy as np


def component_key(component: str) -> Tuple[int, ...]:
    digest = hashlib.sha256(component.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))


def derive_seed_sequence(master_seed: int, component: str) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=component_key(component))


def derive_rng(master_seed: int, component: str) -> np.random.Generator:
    """Independent, reproducible generator for ``component`` under ``master_seed``."""
    return np.random.default_rng(derive_seed_sequence(master_seed, component))
