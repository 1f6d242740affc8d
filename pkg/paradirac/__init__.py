# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

from paradirac.version import __version__  # noqa
