# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

import collections
import io
import glob
import os
import re

from paradirac import error


_sentinel = object()

_DEFAULT_CONF = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "conf", "paradirac.conf")


class ConfigError(error.UsageError):
    def __init__(self, message):
        error.UsageError.__init__(self, message, name="Configuration error")


class ConfigParseError(ConfigError):
    def __init__(self, filename, lineno, line):
        ConfigError.__init__(self, "Parse error in \"%s\" at %s line %d" % (line.rstrip(), filename, lineno))


class ConfigValueError(ConfigError):
    def __init__(self, value, key):
        ConfigError.__init__(self, "Invalid value '%s' for parameter '%s'" % (value, key))


class ConfigMissingError(ConfigError, AttributeError):
    def __init__(self, key):
        ConfigError.__init__(self, "Missing value for parameter '%s'" % key)


class ConfigSection(collections.abc.Mapping):
    def __init__(self, name):
        object.__setattr__(self, "_instance_name", name)
        object.__setattr__(self, "_od", collections.OrderedDict())

    def __repr__(self):
        return "ConfigSection<%s,%s>" % (self._instance_name, self._od.items())

    def __len__(self):
        return self._od.__len__()

    def __setitem__(self, key, value):
        return self._od.__setitem__(key, value)

    def __getitem__(self, key):
        return self._od.__getitem__(key)

    def __setattr__(self, key, value):
        self._od[key] = value

    def __getattr__(self, key):
        ret = self._od.get(key, None)
        if ret is None:
            raise ConfigMissingError(key)

        return ret

    def __contains__(self, key):
        return self._od.__contains__(key)

    def __iter__(self):
        return self._od.__iter__()

    def get_instance_name(self):
        return self._instance_name

    def get(self, name, default=None):
        return self._od.get(name, default)

    def get_int(self, name, default=0):
        assert isinstance(default, int)

        value = self.get(name)
        if value is None:
            return default

        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigValueError(value, name)

    def get_float(self, name, default=0.):
        assert default is None or isinstance(default, float)

        value = self.get(name)
        if value is None:
            return default

        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigValueError(value, name)

    def get_bool(self, name, default=False):
        assert isinstance(default, bool)

        value = self.get(name, _sentinel)
        if value is _sentinel:
            return default

        if value is None or value.lower() in ['true', 'yes']:
            return True
        elif value.lower() in ['false', 'no']:
            return False

        raise ConfigValueError(value, name)

    def get_list(self, name, default=()):
        value = self.get(name)
        if value is None:
            return tuple(default)

        return tuple(i.strip() for i in value.split(",") if i.strip())

    def get_float_list(self, name, default=()):
        try:
            return tuple(float(i) for i in self.get_list(name, default))
        except ValueError:
            raise ConfigValueError(self.get(name), name)


class SectionRoot(list):
    def __contains__(self, key):
        return self and self[0].__contains__(key)

    def __getitem__(self, key):
        if isinstance(key, int):
            return list.__getitem__(self, key)
        else:
            return self[0][key]

    def __getattr__(self, attr):
        if not self:
            self.append(ConfigSection(""))

        return getattr(self[0], attr)

    def get_instance_by_name(self, name):
        for section in self:
            if section.get_instance_name() == name:
                return section

        return None


class IniParser(object):
    """
    A config parser class ala ConfigParser.ConfigParser (only read operations
    are supported).
    - the '= value' part of an option is optional
    - a section may carry an instance name: [log stderr]
    - options keep their declaration order
    """

    EMPTY_LINE_REGEXP = re.compile(r"^\s*(\#.*)?$")
    SECTION_REGEXP = re.compile(r"^\s*\[\s*(?P<name>[^\s]+)\s*(?P<instance>.+)?]\s*$")
    OPTION_REGEXP = re.compile(r"^\s*(?P<name>[^:=]+)([:=]\s*(?P<value>.+))?$")

    def __init__(self):
        self._sections = collections.OrderedDict()

    def _create_section(self, name, instance):
        if instance:
            instance = instance.strip()

        if name not in self._sections:
            self._sections[name] = SectionRoot()

        for section in self._sections[name]:
            if section.get_instance_name() == instance:
                return section

        self._sections[name].append(ConfigSection(instance))
        return self._sections[name][-1]

    def read_string(self, string):
        """Read and parse a string."""
        self._read(string.splitlines())

    def read(self, filename):
        """Read and parse a filename."""
        try:
            with io.open(filename, 'r', encoding="utf8") as f:
                lines = f.readlines()
        except IOError as e:
            raise ConfigError("Cannot read configuration file '%s': %s" % (filename, e.strerror))

        self._read(lines, filename)

    def _read(self, iterable, filename=None):
        cursection = None

        for lineno, line in enumerate(iterable):
            result = self.EMPTY_LINE_REGEXP.match(line)
            if result:
                continue

            result = self.SECTION_REGEXP.match(line)
            if result:
                cursection = self._create_section(*result.group("name", "instance"))
                continue

            result = self.OPTION_REGEXP.match(line)
            if not result:
                raise ConfigParseError(filename, lineno + 1, line)

            if cursection is None:
                continue

            name, value = result.group("name").strip(), result.group("value")
            cursection[name] = value.strip() if value else None

    def get(self, name, default):
        return self._sections.get(name, default)

    def __getattr__(self, key):
        if key.startswith("__"):
            raise AttributeError(key)

        return self._sections.setdefault(key, SectionRoot())

    def __len__(self):
        return len(self._sections)


class Config(IniParser):
    def __init__(self, filename=None):
        IniParser.__init__(self)

        conf_filename = filename or os.environ.get("PARADIRAC_CONF") or _DEFAULT_CONF
        self.read(conf_filename)

        self.filename = conf_filename
        self.basedir = os.path.dirname(conf_filename)
        for fpattern in self.include.keys():
            if not os.path.isabs(fpattern):
                fpattern = os.path.join(self.basedir, fpattern)

            # Files are loaded in alphabetical order
            for fname in sorted(glob.glob(fpattern)):
                self.read(fname)


Settings = collections.namedtuple("Settings", [
    "n", "Nx", "Nt", "Lx",
    "Lambda", "Nlambda", "delta",
    "trials", "seed", "suites",
    "dense_max", "kato_max", "gmres_factor",
    "whitney",
    "lambda_min", "lambda_max", "ratio",
    "floor", "regularities",
    "baseline_file", "slack"
])


def _check(cond, value, key):
    if not cond:
        raise ConfigValueError(value, key)


def load_settings(conf):
    """
    Extract and validate the numerical settings of a `Config` object.

    Missing keys fall back to the documented defaults. `delta` stays None
    when unset, meaning kappa / (2 C) of the coefficient under test.
    """
    grid, slab, run, budget = conf.grid, conf.slab, conf.run, conf.budget
    whitney, profile, diag, baseline = conf.whitney, conf.profile, conf.diagnostics, conf.baseline

    n = grid.get_int("n", 1)
    nx = grid.get_int("Nx", 16)
    nt = grid.get_int("Nt", 16)
    lx = grid.get_float("Lx", 6.283185307179586)
    _check(n >= 1, n, "n")
    _check(nx >= 4 and nx % 2 == 0, nx, "Nx")
    _check(nt >= 4 and nt % 2 == 0, nt, "Nt")
    _check(lx > 0, lx, "Lx")

    lam = slab.get_float("Lambda", 8.)
    nlam = slab.get_int("Nlambda", 64)
    _check(lam >= 1, lam, "Lambda")
    _check(nlam >= 8, nlam, "Nlambda")

    delta = conf.energy.get_float("delta", None)
    _check(delta is None or delta > 0, delta, "delta")

    c = tuple(whitney.get_float("c%d" % i, d) for i, d in enumerate((1., 2., 1., 1.)))
    _check(0 < c[0] < c[1], c[0], "c0")
    _check(c[2] > 0 and c[3] > 0, c[2:], "c2")

    lmin = profile.get_float("lambda_min", 1e-3)
    lmax = profile.get_float("lambda_max", 1e2)
    ratio = profile.get_float("ratio", 2 ** 0.25)
    _check(0 < lmin < lmax, lmin, "lambda_min")
    _check(ratio > 1, ratio, "ratio")

    slack = baseline.get_float("slack", 2.)
    _check(slack >= 1, slack, "slack")

    return Settings(
        n=n, Nx=nx, Nt=nt, Lx=lx,
        Lambda=lam, Nlambda=nlam, delta=delta,
        trials=run.get_int("trials", 100), seed=run.get_int("seed", 0),
        suites=run.get_list("suites"),
        dense_max=budget.get_int("dense_max", 4096),
        kato_max=budget.get_int("kato_max", 4096),
        gmres_factor=budget.get_int("gmres_factor", 10),
        whitney=c,
        lambda_min=lmin, lambda_max=lmax, ratio=ratio,
        floor=diag.get_float("floor", 1e-3),
        regularities=diag.get_float_list("s", ("-1", "-0.5", "0")),
        baseline_file=baseline.get("file"),
        slack=slack
    )
