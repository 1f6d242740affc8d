# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Frozen calibration bands.

Checks whose constants are only known up to equivalence are measured once,
their [min, max] stored in a YAML file, and later runs assert containment in
the band widened by a slack factor.
"""

import io
import os

import numpy as np
import voluptuous
import yaml

from paradirac import error, log


logger = log.get_logger(__name__)

BASELINE_VERSION = 1

_NUMBER = voluptuous.Any(float, int)

_SCHEMA = voluptuous.Schema({
    voluptuous.Required("version"): BASELINE_VERSION,
    voluptuous.Required("bands", default={}): {
        str: {
            voluptuous.Required("lower"): _NUMBER,
            voluptuous.Required("upper"): _NUMBER,
            "source": str
        }
    }
})


class Baseline(object):
    def __init__(self, bands=None, filename=None):
        self.bands = dict(bands or {})
        self.filename = filename

        for name, band in self.bands.items():
            if band["lower"] > band["upper"]:
                raise error.BaselineError("Invalid baseline band", details="%s: %g > %g" % (name, band["lower"], band["upper"]))

    def __repr__(self):
        return "Baseline(%s, %d bands)" % (self.filename, len(self.bands))

    def __contains__(self, name):
        return name in self.bands

    @classmethod
    def load(cls, filename):
        try:
            with io.open(filename, "r", encoding="utf8") as f:
                data = _SCHEMA(yaml.safe_load(f) or {})
        except (IOError, yaml.error.YAMLError, voluptuous.Invalid) as e:
            raise error.BaselineError("The provided YAML baseline is invalid", details=e)

        return cls(data["bands"], filename)

    def band(self, name, slack=2.):
        """Frozen band of `name` widened multiplicatively by `slack`."""
        if name not in self.bands:
            return None

        lower, upper = self.bands[name]["lower"], self.bands[name]["upper"]
        return (lower / slack if lower >= 0 else lower * slack,
                upper * slack if upper >= 0 else upper / slack)

    def contains(self, name, value, slack=2.):
        band = self.band(name, slack)
        if band is None:
            raise error.BaselineError("No frozen band", details=name)

        values = np.atleast_1d(np.asarray(value, dtype=float))
        return bool(np.all(np.isfinite(values)) and np.all((values >= band[0]) & (values <= band[1])))

    def freeze(self, reports):
        """
        Record [min, max] of the calibrated checks of `reports`, replacing
        older bands. Checks sharing a name within one call share one band.
        """
        fresh = {}
        for report in reports:
            for check in report.checks:
                if check.provenance != "calibrated":
                    continue

                values = np.atleast_1d(np.asarray(check.value, dtype=float))
                values = values[np.isfinite(values)]
                if not values.size:
                    logger.warning("%s: no finite value to freeze", check.name)
                    continue

                band = fresh.setdefault(check.name, {"lower": np.inf, "upper": -np.inf, "source": report.suite})
                band["lower"] = min(band["lower"], float(values.min()))
                band["upper"] = max(band["upper"], float(values.max()))

        self.bands.update(fresh)
        logger.info("froze %d bands", len(fresh))
        return len(fresh)

    def to_dict(self):
        return {"version": BASELINE_VERSION, "bands": {k: dict(v) for k, v in sorted(self.bands.items())}}

    def save(self, filename=None):
        filename = filename or self.filename
        if not filename:
            raise error.BaselineError("No baseline file to write")

        directory = os.path.dirname(filename)
        if directory and not os.path.isdir(directory):
            os.makedirs(directory)

        with io.open(filename, "w", encoding="utf8") as f:
            yaml.safe_dump(self.to_dict(), f, default_flow_style=False, sort_keys=True)

        self.filename = filename


def load(filename):
    return Baseline.load(filename) if filename and os.path.exists(filename) else Baseline(filename=filename)
