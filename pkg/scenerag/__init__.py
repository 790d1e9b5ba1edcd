# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers

# -------- setup a uuid for this scenerag session -------
import time
from uuid import uuid4

init_time = time.time()
"""unix time initialization time for this scenerag session"""
session_uuid = uuid4().hex
"""a universally unique id for this scenerag session"""

# ----------- Setup the Root SceneRAG Logger ---------------
from .Logger import MASTER_LOGGER, get_logger, set_global_level, SceneragLogger

# ---------- import scenerag ----------
from .version_info import *
from .core import *

# ---------- delete namespace pollutants ----------
del uuid4, time
