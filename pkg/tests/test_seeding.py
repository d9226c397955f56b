import os
import sys
import numpy as np
import pytest
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from seeding import MAX_SEED, check_seed, chunk_sizes, derive_rng, label_code, map_ordered


def test_same_arguments_give_same_stream():
    a = derive_rng(7, 'stable', 3).random(5)
    b = derive_rng(7, 'stable', 3).random(5)
    assert np.array_equal(a, b)


def test_streams_differ_by_label_index_and_seed():
    base = derive_rng(7, 'stable', 0).random(4)
    assert not np.array_equal(base, derive_rng(7, 'stable', 1).random(4))
    assert not np.array_equal(base, derive_rng(7, 'convexity', 0).random(4))
    assert not np.array_equal(base, derive_rng(8, 'stable', 0).random(4))


def test_label_code_is_stable():
    assert label_code('stable') == label_code('stable')
    with pytest.raises(ValueError):
        label_code('')


def test_check_seed():
    assert check_seed(0) == 0
    assert check_seed(MAX_SEED) == MAX_SEED
    with pytest.raises(ValueError, match="64-bit"):
        check_seed(-1)
    with pytest.raises(TypeError):
        check_seed(1.5)
    with pytest.raises(TypeError):
        check_seed(True)


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]
    assert chunk_sizes(0, 4) == []
    with pytest.raises(ValueError):
        chunk_sizes(5, 0)


def test_map_ordered_keeps_order_with_threads():
    items = list(range(50))
    assert map_ordered(lambda x: x * x, items, threads=1) == [x * x for x in items]
    assert map_ordered(lambda x: x * x, items, threads=4) == [x * x for x in items]
