# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
import logging
from termcolor import colored

# --------- enable terminal colors if we are in on a windows system ---------
import os
if os.name == 'nt':
    import colorama
    colorama.init()
    del colorama

LOG_FORMAT = '%(asctime)s | %(name)s [ %(levelname)8s ]: %(message)s'
"""format string shared by the master logger and all of its children"""

LOG_STYLES = {
    logging.DEBUG : ('cyan', ['bold']),
    logging.INFO : (None, None),
    logging.WARNING : ('yellow', ['bold']),
    logging.ERROR : ('red', None),
    logging.CRITICAL : ('red', ['bold']),
}
"""(color, text attributes) of each log level. Set
scenerag.Logger.ENABLE_LOG_COLOR = False to disable the markup entirely"""

ENABLE_LOG_COLOR = True
"""whether or not to markup log output with ANSI color codes"""


MASTER_LOGGER = None
"""logging.Logger subclass that is the root of all loggers instantiated in
SceneRAG"""

MASTER_NAME = 'SceneRAG'


def _stream_handler():
    ch = logging.StreamHandler()
    ch.setFormatter( logging.Formatter(LOG_FORMAT) )
    return ch


class SceneragLogger( logging.getLoggerClass() ):
    """subclass of logging.Logger that can be pickled and colors its messages
    by level, see :data:`LOG_STYLES`
    """
    def _log(self, level, msg, args, **kwargs):
        if ENABLE_LOG_COLOR and level in LOG_STYLES:
            color, attrs = LOG_STYLES[level]
            msg = colored(str(msg), color, attrs=attrs)
        return super()._log(level, msg, args, **kwargs)

    def getChild(self, *args, **kwargs):
        child = super().getChild(*args, **kwargs)
        # children write through their own handler, only attach it once
        if not child.handlers:
            child.addHandler( _stream_handler() )
            child.propagate = False
        return child

    def __reduce__(self):
        if self.name == MASTER_NAME:
            return make_master, (self.level,)
        return logging.getLogger, (self.name,)


def make_master(level=logging.INFO):
    """creates the master logger if it doesn't exist, returns it if it does"""
    if MASTER_LOGGER:
        MASTER_LOGGER.setLevel(level)
        return MASTER_LOGGER

    master = SceneragLogger(MASTER_NAME)
    master.addHandler( _stream_handler() )
    master.setLevel(level)

    # set our subclass as the root of all child loggers
    master.manager.setLoggerClass(SceneragLogger)
    return master

MASTER_LOGGER = make_master()


def get_logger(name, log_level=None):
    """Creates a new child logger of the SceneRAG master logger

    Stages, databases and servers each log under their own id, e.g.
    "SceneRAG.KnowledgeDatabase#a1b2c3".

    Args:
        name(str): the name of the new child logger
        log_level(int,None): the log level of the new logger, defaults to the
            current level of the master logger

    Returns:
        logging.Logger: a new child logger object from the SceneRAG master
            logger
    """
    child = MASTER_LOGGER.getChild(name)
    child.setLevel(MASTER_LOGGER.level if log_level is None else log_level)
    return child


def set_global_level(level):
    """sets the log level of the master logger and every child created so far

    Args:
        level(int,str): a logging level, e.g. logging.WARNING or "DEBUG"
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
    MASTER_LOGGER.setLevel(level)
    prefix = MASTER_NAME + '.'
    for name, logger in MASTER_LOGGER.manager.loggerDict.items():
        if name.startswith(prefix) and isinstance(logger, logging.Logger):
            logger.setLevel(level)


# END
