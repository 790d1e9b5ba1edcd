# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
from ..Logger import get_logger
import functools
import time
import numpy as np

TIMER_LOGGER = get_logger('TIMER')


################################################################################
#                                 SUMMARY
################################################################################
def arrsummary(arr):
    """one line summary of a parameter matrix for debug logs

    Example:
        >>> import numpy as np
        >>> import scenerag as sr
        >>> sr.arrsummary(np.zeros((4,2)))
        '[ARRAY SUMMARY | shape: (4, 2) | max: 0.0 | min: 0.0 | mean: 0.0 | finite: True]'
    """
    arr = np.asarray(arr)
    if arr.size == 0:
        return "[ARRAY SUMMARY | shape: {} | empty]".format(arr.shape)
    return "[ARRAY SUMMARY | shape: {} | max: {} | min: {} | mean: {} | finite: {}]"\
                .format(arr.shape,
                        round(float(arr.max()), 3),
                        round(float(arr.min()), 3),
                        round(float(arr.mean()), 3),
                        bool( np.all(np.isfinite(arr)) ))


################################################################################
#                                 TIMING
################################################################################
def timer_ms(func):
    """Decorator that logs how long a func takes to run in milliseconds

    Example:
        >>> import scenerag as sr
        >>>
        >>> @sr.timer_ms
        ... def add(a, b):
        ...    return a + b
        >>>
        >>> add(1, 2)
        3
    """
    @functools.wraps(func)
    def _timer_ms(*args,**kwargs):
        t = Timer()
        ret = func(*args,**kwargs)
        TIMER_LOGGER.info("ran function '{}' in {}ms".format(func.__name__, t.time_ms()))
        return ret

    return _timer_ms


class Timer(object):
    """
    Timer used for the per-stage latencies of a query. Built on the monotonic
    `time.perf_counter` clock, so readings are only meaningful as differences
    on one machine

    Example:
        >>> import scenerag as sr
        >>> t = sr.Timer()
        >>> t.raw_time_ms() >= 0
        True
    """
    def __init__(self):
        self._start = time.perf_counter()

    def time(self):
        """seconds since the timer started, rounded to the millisecond"""
        return round(self.raw_time(),3)

    def raw_time(self):
        return time.perf_counter() - self._start

    def raw_time_ms(self):
        """unrounded milliseconds since the timer started"""
        return self.raw_time() * 1000.0

    def time_ms(self):
        return round(self.raw_time_ms(),3)

    def __repr__(self):
        return "Timer @{}sec".format( self.time() )
