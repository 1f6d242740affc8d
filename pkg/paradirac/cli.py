# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

import collections

from paradirac import registrar


class CLIManager(object):
    """
    Registry of CLI subcommands. A command maps categories (the suite
    family, e.g. "suite" or "dump") to a callable.
    """

    def __init__(self):
        self._commands = collections.OrderedDict()

    def _register(self, command, category, method, help=None, **options):
        d = self._commands.setdefault(command, collections.OrderedDict())
        if category not in d:
            # Avoid replacing methods by the ones from children classes
            d[category] = (method, help, options)

    def register(self, command, category, method=None, help=None, **options):
        if method:
            self._register(command, category, method, help, **options)
        else:
            return registrar.DelayedRegistrar.make_decorator("cli", self._register, command, category, help=help, **options)

    def unregister(self, command=None, category=None):
        if command and category:
            self._commands[command].pop(category)
        elif command:
            self._commands.pop(command)
        else:
            self._commands.clear()

    def get(self, command):
        return self._commands.get(command, {})

    def commands(self):
        return list(self._commands.keys())


cli = CLIManager()
get = cli.get
register = cli.register
unregister = cli.unregister
commands = cli.commands
