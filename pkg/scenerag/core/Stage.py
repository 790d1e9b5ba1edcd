# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
from ..Logger import get_logger
from .constants import UUID_ORDER
from .Exceptions import StageError

from uuid import uuid4
from abc import ABCMeta, abstractmethod
import copy
import inspect


class Stage(metaclass=ABCMeta):
    """one step of a query pipeline. This class is designed to be inherited
    from, or used in the form of :obj:`FuncStage` through :func:`stageify`

    Note:
        you must overload `Stage.process()` if you intend to inherit from this
        class

    Attributes:
        uuid(str): hex uuid for this stage
        name(str): user specified name for this stage, used to generate the
            unique id. defaults to the name of your subclass
        logger(:obj:`SceneragLogger`): Logger object for this stage
    """
    def __init__(self, name=None):
        # setup absolutely unique id for this stage
        self.uuid = uuid4().hex

        if name is None:
            name = self.__class__.__name__
        self.name = name
        self.logger = get_logger( self.id )

    ############################################################################
    #                           overloadable
    ############################################################################
    @abstractmethod
    def process(self, *args):
        pass

    ############################################################################
    def check_setup(self, task_args):
        """checks that a task feeds this stage the right number of arguments

        Args:
            task_args(:obj:`tuple` of :obj:`str`): Arguments for this task
        """
        if len(task_args) != self.n_args:
            msg = "{} takes {} arguments {}, but the task provides {}"\
                    .format(self.id, self.n_args, self.args, len(task_args))
            self.logger.error(msg)
            raise StageError(msg)

    ############################################################################
    #                           primary frontend
    ############################################################################
    def copy(self):
        """fetches a shallow copy of this stage with the UUID updated"""
        copied = copy.copy(self)
        copied.uuid = uuid4().hex
        copied.logger = get_logger( copied.id )
        return copied

    ############################################################################
    def __call__(self, *args):
        return self.process(*args)

    ############################################################################
    def __str__(self):
        return self.id

    def __repr__(self):
        return self.id

    ############################################################################
    #                               properties
    ############################################################################
    @property
    def id(self):
        """str: A unique id for this stage

        This id is a combination of the stage's non-unique name and
        part of its uuid (last 6 characters by default).
        The entropy of this id can be increased by increasing
        UUID_ORDER
        """
        return "{}#{}".format(self.name, self.uuid[-UUID_ORDER:])

    ############################################################################
    @property
    def args(self):
        """:obj:`list` of :obj:`str`: positional arguments of `process`"""
        params = inspect.signature(self.process).parameters.values()
        return [p.name for p in params
                    if p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD)]

    ############################################################################
    @property
    def n_args(self):
        """int: number of positional arguments of `process`"""
        return len(self.args)


################################################################################
class Input(Stage):
    """placeholder task for data fed into a pipeline

    Attributes:
        index(int,None): position of this input in `Pipeline.process`'s
            arguments. None makes it a keyword-only input
    """
    def __init__(self, index=None):
        self.index = index
        super().__init__(name="Input{}".format('' if index is None else index))

    ############################################################################
    def process(self):
        """inputs hold no data, Pipeline.process feeds their values"""
        return None


################################################################################
class FuncStage(Stage):
    """Stage that runs the function you give it, with optional hardcoded
    keyword arguments. Typically only used through the `stageify` decorator

    Attributes:
        func(function): the function to call internally
        preset_kwargs(dict): preset keyword arguments, typically used for
            arguments that are not data to process
    """
    def __init__(self, func, preset_kwargs=None):
        spec = inspect.getfullargspec(func)
        # a stage must have a known number of inputs
        if spec.varargs or spec.varkw:
            raise StageError("function cannot accept a variable number of args")

        self.func = func
        self.preset_kwargs = {} if preset_kwargs is None else dict(preset_kwargs)
        self._arg_names = [a for a in spec.args if a not in self.preset_kwargs]
        super().__init__(func.__name__)

    ############################################################################
    def process(self, *args):
        return self.func(*args, **self.preset_kwargs)

    ############################################################################
    def __call__(self, *args, **kwargs):
        return self.func(*args, **kwargs)

    ############################################################################
    @property
    def args(self):
        return list(self._arg_names)
