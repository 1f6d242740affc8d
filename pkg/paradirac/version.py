# Copyright (C) 2024 ParaDirac developers. All Rights Reserved.
#
# This file is part of the ParaDirac program.
#
# SPDX-License-Identifier: BSD-2-Clause

__version__ = "0.3.0"
__version_info__ = __version__.split(".")
__branch__ = "0.3"
__author__ = "ParaDirac developers"
__license__ = "BSD"
