# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

from paradirac import log


logger = log.get_logger(__name__)


class ParaDiracError(Exception):
    name = "An unexpected condition happened"
    message = ""
    details = ""
    log_priority = log.ERROR

    def __init__(self, message, name=None, details=None, log_priority=None):
        Exception.__init__(self, message)

        if name is not None:
            self.name = name

        if message is not None:
            self.message = message

        if details is not None:
            self.details = details

        if log_priority:
            self.log_priority = log_priority

    def log(self):
        if self.message:
            logger.log(self.log_priority, "%s", self)

    @staticmethod
    def _format_error(message, details):
        if details:
            return "%s: %s" % (message, details)

        # message might be an exception class
        return str(message)

    def __str__(self):
        return self._format_error(self.message, self.details)

    def __json__(self):
        return {"name": self.name, "message": str(self.message), "details": str(self.details)}


class UsageError(ParaDiracError):
    name = "Usage error"
    log_priority = log.WARNING


class DomainError(ParaDiracError):
    name = "Domain error"

    def __init__(self, message, frequency=None, residual=None, **kwargs):
        details = kwargs.pop("details", None)
        if details is None and frequency is not None:
            details = "at frequency %s" % (_format_frequency(frequency),)

        ParaDiracError.__init__(self, message, details=details, **kwargs)
        self.frequency = frequency
        self.residual = residual


class ConditioningError(DomainError):
    name = "Numerical conditioning error"


class SolverError(ParaDiracError):
    name = "Solver error"

    def __init__(self, message, residual=None, iterations=None, **kwargs):
        if residual is not None and "details" not in kwargs:
            kwargs["details"] = "residual %.3e after %s iterations" % (residual, iterations)

        ParaDiracError.__init__(self, message, **kwargs)
        self.residual = residual
        self.iterations = iterations


class AccretivityError(ParaDiracError):
    name = "Accretivity violation"


class InternalError(ParaDiracError):
    name = "Internal error"
    log_priority = log.CRITICAL


class BaselineError(ParaDiracError):
    name = "Baseline error"


def _format_frequency(frequency):
    xi, tau = frequency
    return "xi=(%s), tau=%g" % (", ".join("%g" % x for x in xi), tau)


def make(exc):
    if not isinstance(exc, ParaDiracError):
        return ParaDiracError(exc)

    return exc
