# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Tests for `paradirac.utils.cache`.
"""

import numpy as np

from paradirac.utils.cache import memoize, memoize_property


class Counter(object):
    """
    Object counting the evaluations of its cached methods.
    """
    def __init__(self):
        self.calls = 0

    @memoize("_square_cache")
    def square(self, x):
        self.calls += 1
        return x * x

    @memoize_property("_answer_cache")
    def answer(self):
        self.calls += 1
        return 42


def test_memoize():
    """
    Test `paradirac.utils.cache.memoize`.
    """
    obj = Counter()

    assert obj.square(3) == 9
    assert obj.square(3) == 9
    assert obj.calls == 1

    assert obj.square(x=3) == 9
    assert obj.calls == 2

    infos = obj._square_cache.infos()
    assert (infos.hits, infos.misses, infos.size) == (1, 2, 2)

    obj._square_cache.clear()
    assert obj.square(3) == 9
    assert obj.calls == 3


def test_memoize_uncachable():
    """
    Test `paradirac.utils.cache.memoize` with unhashable arguments.
    """
    obj = Counter()
    value = np.arange(3)

    assert list(obj.square(value)) == [0, 1, 4]
    assert list(obj.square(value)) == [0, 1, 4]
    assert obj.calls == 2


def test_memoize_per_instance():
    """
    Test that caches are stored on each instance.
    """
    first, second = Counter(), Counter()
    first.square(2)
    second.square(2)

    assert first.calls == second.calls == 1
    assert Counter.square is not None


def test_memoize_property():
    """
    Test `paradirac.utils.cache.memoize_property`.
    """
    obj = Counter()

    assert obj.answer == 42
    assert obj.answer == 42
    assert obj.calls == 1
    assert obj._answer_cache.infos().hits == 1
