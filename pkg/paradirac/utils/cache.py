# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

import collections
import functools
import threading

from paradirac import log


logger = log.get_logger(__name__)

_CacheInfo = collections.namedtuple("CacheInfo", ["hits", "misses", "size"])


class _Cache(object):
    _missing = object()

    def __init__(self, func):
        self._cache = {}
        self._cached_func = func
        self._hits = self._misses = 0
        self._lock = threading.Lock()

    def _set(self, key, value):
        with self._lock:
            # first writer wins, entries are write-once
            return self._cache.setdefault(key, value)

    def _get(self, *args, **kwargs):
        key = (args, tuple(sorted(kwargs.items())))
        try:
            with self._lock:
                value = self._cache.get(key, self._missing)
                if value is not self._missing:
                    self._hits += 1
                    return value

                self._misses += 1

        except TypeError as e:
            # uncachable -- for instance, passing an array as an argument.
            logger.debug("call not cachable: %s(%r): %s", self._cached_func.__name__, key, e)
            return self._cached_func(*args, **kwargs)

        return self._set(key, self._cached_func(*args, **kwargs))

    def clear(self):
        with self._lock:
            self._cache.clear()

    def infos(self):
        return _CacheInfo(self._hits, self._misses, len(self._cache))


class _memoize(object):
    _setup_lock = threading.Lock()

    def __init__(self, func, name):
        self.func = func
        self.cache_objname = name
        functools.update_wrapper(self, func)

    def __call__(self, obj, *args, **kwargs):
        return self._setup_cache(obj)._get(obj, *args, **kwargs)

    def _setup_cache(self, obj):
        cache = obj.__dict__.get(self.cache_objname)
        if cache is None:
            with self._setup_lock:
                cache = obj.__dict__.setdefault(self.cache_objname, _Cache(self.func))

        return cache

    def __get__(self, obj, objtype):
        if obj is None:
            return self

        return functools.partial(self.__call__, obj)


class _memoize_property(_memoize):
    def __get__(self, obj, objtype):
        if obj is None:
            return self

        return _memoize.__get__(self, obj, objtype)()


class memoize(object):
    """
        Decorator that will cache the decorated method result value. The cache is stored into
        the instance of the object providing the method and is safe to share between threads.

        Note that calling the cached function with different arguments result in different cache
        entry. Arguments must be hashable (use tuples or floats, not arrays).

        Usage :

        @memoize("eig_cache")
        def eig(self, operand):
            ... time consuming stuff ...

        The created cache object provide the following API:
        - Cache hits/misses/size statistics:
          self.eig_cache.infos()

        - Clearing the cache:
          self.eig_cache.clear()
    """

    def __init__(self, name):
        self.name = name

    def __call__(self, func):
        return _memoize(func, self.name)


class memoize_property(object):
    """
        Property decorator that cache the method result value. The method is accessible as a Python
        @property, and the cache is stored into the instance of the object providing the method.
    """
    def __init__(self, name):
        self.name = name

    def __call__(self, func):
        return _memoize_property(func, self.name)
