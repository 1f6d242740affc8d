# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Tests for `paradirac.error`.
"""

import numpy as np
import pytest

from paradirac import error, log
from paradirac.utils import json


def test_paradirac_error():
    """
    Test `paradirac.error.ParaDiracError` error.
    """
    err = error.ParaDiracError('An error occurred !')

    with pytest.raises(error.ParaDiracError):
        raise err

    assert str(err) == 'An error occurred !'
    assert err.log_priority == log.ERROR

    # empty message
    err = error.ParaDiracError('')

    with pytest.raises(error.ParaDiracError):
        raise err

    assert not str(err)

    # name
    err = error.ParaDiracError('An error occurred !', name='Unknown error')
    assert err.name == 'Unknown error'

    # details
    err = error.ParaDiracError('An error occurred !', details='some details')
    assert str(err) == 'An error occurred !: some details'

    # log priority
    err = error.ParaDiracError('An error occurred !', log_priority=log.DEBUG)
    assert err.log_priority == log.DEBUG
    err.log()


def test_usage_error():
    """
    Test `paradirac.error.UsageError` error.
    """
    err = error.UsageError('bad argument')

    with pytest.raises(error.ParaDiracError):
        raise err

    assert err.name == 'Usage error'
    assert err.log_priority == log.WARNING


def test_domain_error():
    """
    Test `paradirac.error.DomainError` error.
    """
    err = error.DomainError('not invertible', frequency=(np.array([1., -2.]), 0.5), residual=1e-3)

    with pytest.raises(error.DomainError):
        raise err

    assert 'xi=(1, -2), tau=0.5' in str(err)
    assert err.residual == 1e-3

    # explicit details take precedence
    err = error.DomainError('not invertible', frequency=(np.array([1.]), 0.), details='custom')
    assert str(err) == 'not invertible: custom'

    # conditioning is a domain failure
    with pytest.raises(error.DomainError):
        raise error.ConditioningError('ill conditioned')


def test_solver_error():
    """
    Test `paradirac.error.SolverError` error.
    """
    err = error.SolverError('gmres stalled', residual=0.25, iterations=40)

    assert err.iterations == 40
    assert 'residual 2.500e-01 after 40 iterations' in str(err)

    err = error.SolverError('gmres stalled')
    assert str(err) == 'gmres stalled'


def test_error_priorities():
    """
    Test log priorities of the error kinds.
    """
    assert error.InternalError('oops').log_priority == log.CRITICAL
    assert error.AccretivityError('oops').log_priority == log.ERROR
    assert error.BaselineError('oops').name == 'Baseline error'


def test_error_json():
    """
    Test JSON serialization of `paradirac.error.ParaDiracError`.
    """
    err = error.UsageError('unknown suite', details='foo')
    obj = json.loads(json.dumps(err))

    assert obj == {'name': 'Usage error', 'message': 'unknown suite', 'details': 'foo'}


def test_make():
    """
    Test `paradirac.error.make`.
    """
    err = error.DomainError('foo')
    assert error.make(err) is err

    wrapped = error.make(ValueError('bar'))
    assert isinstance(wrapped, error.ParaDiracError)
    assert str(wrapped) == 'bar'
