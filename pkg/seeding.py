# Derives reproducible random streams from one root seed.
# A stream is identified by a fixed label plus integer indices (chunk, trial, restart ...),
# so results never depend on how work is split across threads.

import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

MAX_SEED = 2**64 - 1


def label_code(label):
    '''
    Stable 32-bit code for a stream label (CRC32 of its UTF-8 bytes).
    '''
    if not isinstance(label, str) or not label:
        raise ValueError("Stream label must be a non-empty string.")
    return zlib.crc32(label.encode('utf-8'))


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError("Seed must be an integer.")
    if not (0 <= int(seed) <= MAX_SEED):
        raise ValueError(f"Seed must be a 64-bit unsigned integer. Got: {seed}")
    return int(seed)


def derive_rng(seed, label, *indices):
    '''
    Return a numpy Generator for (seed, label, indices).
    The same arguments always give the same stream.
    '''
    seed = check_seed(seed)
    key = (label_code(label),) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def chunk_sizes(total, chunk):
    '''
    Split `total` items into consecutive chunks of size `chunk` (last one shorter).
    The split depends only on (total, chunk).
    '''
    if total < 0 or chunk < 1:
        raise ValueError("total must be >= 0 and chunk >= 1.")
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_ordered(func, items, threads=1):
    '''
    Apply func to every item, optionally on a thread pool, and return results in input order.
    '''
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
