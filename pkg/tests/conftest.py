# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Configuration file for pytest.
"""

import os
import shutil

import numpy as np
import pytest

from paradirac import config, dirac
from paradirac.spectral import Grid
from tests.utils.vars import TEST_CONFIG_FILE, TEST_DOWNLOAD_DIR


@pytest.fixture(scope='function')
def rng():
    """
    Deterministic generator, one per test.
    """
    return np.random.default_rng(20240611)


@pytest.fixture(scope='session')
def grid():
    """
    Small n = 1 grid with the parabolic aspect Lt = Lx^2.
    """
    return Grid(1, 8, 8)


@pytest.fixture(scope='session')
def heat(grid):
    """
    Symbol family of the heat equation on `grid`.
    """
    return dirac.DiracSymbolFamily(grid)


@pytest.fixture(scope='function')
def test_settings():
    """
    Settings of the test configuration file.
    """
    return config.load_settings(config.Config(TEST_CONFIG_FILE))


@pytest.fixture(scope='function')
def download_dir(request):
    """
    Scratch directory, removed after the test.
    """
    if not os.path.isdir(TEST_DOWNLOAD_DIR):
        os.makedirs(TEST_DOWNLOAD_DIR)

    def tear_down():
        """
        Tear Down.
        """
        shutil.rmtree(TEST_DOWNLOAD_DIR, ignore_errors=True)

    request.addfinalizer(tear_down)
    return TEST_DOWNLOAD_DIR
