"""Counter-based seed derivation.

Every random draw in an experiment is keyed by ``(master_seed, *keys)`` so
that adding trials or vehicles never changes the draws of existing ones.
"""
import numpy as np

# purpose tags used as the last key component
ROAD = 1
FLEET = 2
MODEL = 3
NOISE = 4
OBFUSCATOR = 5
TOKEN = 6


def derive_seed(master_seed: int, *keys: int) -> int:
    """Deterministic 32-bit seed for the given key path."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def rng_for(master_seed: int, *keys: int) -> np.random.Generator:
    """Generator seeded from :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(master_seed, *keys))
