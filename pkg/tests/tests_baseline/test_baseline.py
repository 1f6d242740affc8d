# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Tests for `paradirac.baseline`.
"""

import os

import numpy as np
import pytest

from paradirac import baseline, error, report
from tests.utils.vars import TEST_DATA_DIR


BASELINE_FILE = os.path.join(TEST_DATA_DIR, 'baseline_tests.yml')


def test_baseline_load():
    """
    Test `paradirac.baseline.Baseline.load`.
    """
    frozen = baseline.Baseline.load(BASELINE_FILE)

    assert frozen.filename == BASELINE_FILE
    assert 'energy estimate ratio' in frozen
    assert 'kato band rough' not in frozen
    assert frozen.bands['energy estimate ratio']['source'] == 'energy'


def test_baseline_load_invalid():
    """
    Test `paradirac.baseline.Baseline.load` with invalid files.
    """
    for name in ('baseline_invalid.yml', 'baseline_broken.yml', 'missing.yml'):
        with pytest.raises(error.BaselineError):
            baseline.Baseline.load(os.path.join(TEST_DATA_DIR, name))

    with pytest.raises(error.BaselineError):
        baseline.Baseline({'reversed': {'lower': 2., 'upper': 1.}})


def test_baseline_band():
    """
    Test `paradirac.baseline.Baseline.band` widening.
    """
    frozen = baseline.Baseline.load(BASELINE_FILE)

    assert frozen.band('energy estimate ratio') == (0.25, 4.)
    assert frozen.band('energy estimate ratio', slack=1.) == (0.5, 2.)
    assert frozen.band('negative band') == (-6., -0.5)
    assert frozen.band('missing') is None


def test_baseline_contains():
    """
    Test `paradirac.baseline.Baseline.contains`.
    """
    frozen = baseline.Baseline.load(BASELINE_FILE)

    assert frozen.contains('energy estimate ratio', 0.3)
    assert frozen.contains('energy estimate ratio', [0.3, 3.9])
    assert not frozen.contains('energy estimate ratio', [0.3, 4.1])
    assert not frozen.contains('energy estimate ratio', 0.3, slack=1.)
    assert not frozen.contains('energy estimate ratio', np.nan)

    with pytest.raises(error.BaselineError):
        frozen.contains('missing', 1.)


def test_baseline_load_helper():
    """
    Test `paradirac.baseline.load` with a missing file.
    """
    frozen = baseline.load(os.path.join(TEST_DATA_DIR, 'missing.yml'))
    assert not frozen.bands
    assert frozen.filename.endswith('missing.yml')

    assert not baseline.load(None).bands


def test_baseline_freeze(download_dir):
    """
    Test `paradirac.baseline.Baseline.freeze` and `save`.
    """
    rep = report.VerificationReport('kato')
    rep.add('kato band rough', [0.4, np.nan, 0.9], verdict=True, provenance='calibrated')
    rep.add('not finite', [np.nan], verdict=True, provenance='calibrated')
    rep.add('derived check', 1e-14, (0., 1e-12))

    frozen = baseline.Baseline()
    assert frozen.freeze([rep]) == 1
    assert frozen.bands['kato band rough'] == {'lower': 0.4, 'upper': 0.9, 'source': 'kato'}

    with pytest.raises(error.BaselineError):
        frozen.save()

    path = os.path.join(download_dir, 'frozen', 'baseline.yml')
    frozen.save(path)
    assert frozen.filename == path

    reloaded = baseline.Baseline.load(path)
    assert reloaded.to_dict() == frozen.to_dict()
    assert reloaded.band('kato band rough') == (0.2, 1.8)


def test_baseline_freeze_same_name():
    """
    Test `paradirac.baseline.Baseline.freeze` merges checks sharing a name into one band.
    """
    kato = report.VerificationReport('kato')
    kato.add('rellich band', [1., 2.], verdict=True, provenance='calibrated')
    kato.add('rellich band', [10., 20.], verdict=True, provenance='calibrated')
    estimates = report.VerificationReport('estimates')
    estimates.add('rellich band', 0.5, verdict=True, provenance='calibrated')

    frozen = baseline.Baseline()
    frozen.bands['rellich band'] = {'lower': -5., 'upper': 50., 'source': 'old'}
    assert frozen.freeze([kato]) == 1
    assert frozen.bands['rellich band'] == {'lower': 1., 'upper': 20., 'source': 'kato'}
    assert frozen.contains('rellich band', [1.5, 19.], 1.)
    assert frozen.contains('rellich band', [1., 2.], 1.)

    assert frozen.freeze([kato, estimates]) == 1
    assert frozen.bands['rellich band']['lower'] == 0.5
    assert frozen.bands['rellich band']['upper'] == 20.
