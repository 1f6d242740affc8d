# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

import collections
import datetime
import json

import numpy as np


class ParaDiracJSONEncoder(json.JSONEncoder):
    """
    Encoder for report documents.

    numpy scalars and arrays become plain numbers and lists, complex values
    become [re, im] pairs, non-finite floats become strings.
    """

    def default(self, obj):
        if hasattr(obj, "__json__"):
            return obj.__json__()

        elif isinstance(obj, (np.bool_,)):
            return bool(obj)

        elif isinstance(obj, np.integer):
            return int(obj)

        elif isinstance(obj, (np.floating, float)):
            return _float(float(obj))

        elif isinstance(obj, (np.complexfloating, complex)):
            return [_float(float(obj.real)), _float(float(obj.imag))]

        elif isinstance(obj, np.ndarray):
            return _plain(obj.tolist())

        elif isinstance(obj, datetime.datetime):
            return obj.isoformat()

        elif isinstance(obj, collections.abc.Iterable):
            return list(obj)

        return json.JSONEncoder.default(self, obj)

    def iterencode(self, o, _one_shot=False):
        return json.JSONEncoder.iterencode(self, _sanitize(o), _one_shot)


def _float(value):
    if value != value:
        return "nan"

    if value in (float("inf"), float("-inf")):
        return "inf" if value > 0 else "-inf"

    return value


def _plain(obj):
    if isinstance(obj, list):
        return [_plain(i) for i in obj]

    if isinstance(obj, complex):
        return [_float(obj.real), _float(obj.imag)]

    if isinstance(obj, float):
        return _float(obj)

    return obj


def _sanitize(obj):
    if hasattr(obj, "__json__"):
        return _sanitize(obj.__json__())

    elif isinstance(obj, float):
        return _float(obj)

    elif isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}

    elif isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]

    return obj


def load(*args, **kwargs):
    return json.load(*args, **kwargs)


def loads(*args, **kwargs):
    return json.loads(*args, **kwargs)


def dump(*args, **kwargs):
    if "cls" not in kwargs:
        kwargs["cls"] = ParaDiracJSONEncoder

    return json.dump(*args, **kwargs)


def dumps(*args, **kwargs):
    if "cls" not in kwargs:
        kwargs["cls"] = ParaDiracJSONEncoder

    return json.dumps(*args, **kwargs)
