# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

import collections
import csv
import datetime
import io

import numpy as np

from paradirac import error
from paradirac.utils import json


REPORT_VERSION = 1

CSV_FIELDS = ("suite", "name", "value", "lower", "upper", "verdict", "provenance")

PROVENANCES = ("trivial", "derived", "theorem", "calibrated", "supplement")


class Check(collections.namedtuple("Check", ["name", "value", "band", "verdict", "provenance"])):
    __slots__ = ()

    def __json__(self):
        return {
            "name": self.name,
            "value": self.value,
            "band": list(self.band) if self.band is not None else None,
            "verdict": self.verdict,
            "provenance": self.provenance
        }


def _in_band(value, band):
    lower, upper = band
    values = np.atleast_1d(np.asarray(value, dtype=float))
    if not np.all(np.isfinite(values)):
        return False

    return bool(np.all((lower is None or values >= lower) & (upper is None or values <= upper)))


class VerificationReport(object):
    """
    Checks recorded by one suite run, with the environment they ran in.

    A check without an explicit verdict passes when its value lies inside
    its band; open ends of a band are None.
    """

    def __init__(self, suite, environment=None):
        self.suite = suite
        self.environment = environment or {}
        self.checks = []
        self.timestamp = datetime.datetime.now(datetime.timezone.utc)

    def __repr__(self):
        return "VerificationReport(%s, %d checks)" % (self.suite, len(self.checks))

    def add(self, name, value, band=None, verdict=None, provenance="derived"):
        if provenance not in PROVENANCES:
            raise error.UsageError("Unknown provenance tag", details=provenance)

        if verdict is None:
            if band is None:
                raise error.UsageError("A check needs a band or a verdict", details=name)

            verdict = _in_band(value, band)

        check = Check(name, value, tuple(band) if band is not None else None, bool(verdict), provenance)
        self.checks.append(check)
        return check

    def __getitem__(self, name):
        for check in self.checks:
            if check.name == name:
                return check

        raise KeyError(name)

    @property
    def passed(self):
        return all(check.verdict for check in self.checks)

    @property
    def failures(self):
        return [check for check in self.checks if not check.verdict]

    def to_dict(self):
        return {
            "version": REPORT_VERSION,
            "suite": self.suite,
            "timestamp": self.timestamp,
            "environment": self.environment,
            "checks": self.checks
        }

    def __json__(self):
        return self.to_dict()

    def rows(self):
        for check in self.checks:
            lower, upper = check.band if check.band is not None else (None, None)
            value = check.value
            if isinstance(value, (list, tuple, np.ndarray)):
                value = ";".join(json.dumps(v) for v in np.ravel(value))

            yield (self.suite, check.name, value, lower, upper, "pass" if check.verdict else "fail", check.provenance)

    def write_json(self, path):
        write_json(path, self.to_dict())

    def write_csv(self, path):
        write_csv(path, [self])


def merge(reports):
    """Document of several suite reports, as written by the `all` command."""
    return {"version": REPORT_VERSION, "suites": [r.to_dict() for r in reports]}


def write_json(path, document):
    with io.open(path, "w", encoding="utf8") as f:
        f.write(json.dumps(document, sort_keys=True, indent=2))
        f.write("\n")


def write_csv(path, reports):
    with io.open(path, "w", encoding="utf8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_FIELDS)
        for report in reports:
            writer.writerows(report.rows())
