# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
from .Stage import FuncStage

################################################################################
def stageify(kwargs=None):
    """decorator which converts a normal function into a stage which can be
    added to a pipeline. The function can still be called as normal after
    stageification

    Args:
        kwargs(dict,None): hardcoded keyword arguments for the function, these
            arguments will not be fed by the pipeline

    Example:
        >>> import scenerag as sr
        >>>
        >>> @sr.stageify( kwargs=dict(value=10) )
        ... def add_value(datum, value):
        ...    return datum + value
        >>>
        >>> type(add_value).__name__
        'FuncStage'
        >>> add_value.args
        ['datum']
    """
    def _stageify(func):
        return FuncStage(func, kwargs)
    return _stageify
