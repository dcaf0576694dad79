r"""
Counter-based random streams for the Monte-Carlo engine.

Every draw of trial ``i`` comes from a Philox generator whose 128-bit key is derived from the master seed and whose counter starts at ``(0, 0, substream, i)``. A trial can therefore be replayed on its own, on any worker, in any order, and the field, fading, filter and priority draws never overlap.
"""

from functools import lru_cache

import numpy as np

# substream ids; outer region shells use SHELL_STRIDE * shell + id
FIELD = 0
FADING = 1
FILTER = 2
PRIORITY = 3
SHELL_STRIDE = 4


@lru_cache(maxsize=16)
def _key(master_seed):
    return tuple(int(w) for w in np.random.SeedSequence(master_seed).generate_state(2, np.uint64))


def trial_stream(master_seed, trial_index, substream=FIELD):
    r"""
    Generator for one (trial, substream) pair.

    Args:
        master_seed (int): nonnegative 64-bit seed of the experiment
        trial_index (int): trial number, :math:`0 \le i < 2^{64}`
        substream (int): substream id (:data:`FIELD`, :data:`FADING`, :data:`FILTER`, :data:`PRIORITY`, or a shell-offset id)

    Returns:
        numpy.random.Generator
    """
    if master_seed < 0:
        raise ValueError("master seed must be nonnegative, got {:}".format(master_seed))
    key = np.array(_key(master_seed), dtype=np.uint64)
    counter = np.array([0, 0, substream, trial_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def shell_substream(shell, kind):
    r"""
    Substream id of draw ``kind`` for radial shell ``shell`` (0 is the potential interference zone).
    """
    return SHELL_STRIDE * shell + kind
