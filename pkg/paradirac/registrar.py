# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

import functools

_ATTRIBUTE = "__delayreg__"


def _declaration_order(method):
    func = getattr(method, "__func__", method)
    code = getattr(func, "__code__", None)
    return code.co_firstlineno if code else 0


class DelayedRegistrar(object):
    """
    Methods decorated through `make_decorator` are registered, bound to their
    object, when the owning object is instantiated, in declaration order.
    """

    @staticmethod
    def make_decorator(type, regfunc, *args, **kwargs):
        def indecorator(func):
            d = getattr(func, _ATTRIBUTE, {})
            if not d:
                setattr(func, _ATTRIBUTE, d)

            d.setdefault(type, []).append(functools.partial(regfunc, *args, **kwargs))
            return func

        return indecorator

    def __init__(self, *args, **kwargs):
        refs = []
        for name in dir(self):
            if isinstance(getattr(type(self), name, None), property):
                continue

            ref = getattr(self, name)
            if getattr(ref, _ATTRIBUTE, None):
                refs.append(ref)

        for ref in sorted(refs, key=_declaration_order):
            for flist in getattr(ref, _ATTRIBUTE).values():
                for i in flist:
                    i(ref)
