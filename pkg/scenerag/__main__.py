# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
import sys

from .cli import main

sys.exit( main() )
