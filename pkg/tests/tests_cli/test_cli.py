# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

"""
Tests for `paradirac.cli` and `paradirac.registrar`.
"""

import pytest

from paradirac import cli, registrar, suites


class Commands(registrar.DelayedRegistrar):
    """
    Registered commands for tests only.
    """
    @cli.register("tests-first", "suite", help="first command")
    def first(self):
        return 1

    @cli.register("tests-second", "suite", help="second command")
    @cli.register("tests-second", "dump")
    def second(self):
        return 2

    @property
    def ignored(self):
        raise AssertionError("properties are never inspected")


@pytest.fixture(scope='function')
def commands(request):
    """
    Instantiate `Commands` and clean the registry afterwards.
    """
    obj = Commands()

    def tear_down():
        """
        Tear Down.
        """
        for name in ("tests-first", "tests-second", "tests-manual"):
            if cli.get(name):
                cli.unregister(name)

    request.addfinalizer(tear_down)
    return obj


def test_delayed_registration(commands):
    """
    Test `paradirac.registrar.DelayedRegistrar`.
    """
    method, help, options = cli.get("tests-first")["suite"]

    assert method() == 1
    assert help == "first command"
    assert options == {}

    assert set(cli.get("tests-second")) == {"suite", "dump"}
    assert cli.get("tests-second")["dump"][0]() == 2

    names = cli.commands()
    assert names.index("tests-first") < names.index("tests-second")


def test_register_method(commands):
    """
    Test `paradirac.cli.register` with an explicit method.
    """
    cli.register("tests-manual", "suite", lambda: 3, help="manual")
    assert cli.get("tests-manual")["suite"][0]() == 3

    # first registration wins
    cli.register("tests-manual", "suite", lambda: 4)
    assert cli.get("tests-manual")["suite"][0]() == 3


def test_unregister(commands):
    """
    Test `paradirac.cli.unregister`.
    """
    cli.unregister("tests-second", "dump")
    assert list(cli.get("tests-second")) == ["suite"]

    cli.unregister("tests-second")
    assert cli.get("tests-second") == {}
    assert "tests-second" not in cli.commands()


def test_suite_commands():
    """
    Test that every verification suite registers a command.
    """
    suites.load_suites()

    for name in suites.SUITES:
        assert "suite" in cli.get(name)
        assert cli.get(name)["suite"][1]

    assert "dump" in cli.get("snapshot")
