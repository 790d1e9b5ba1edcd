# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
from ..Logger import get_logger
from .Stage import Stage, Input
from .constants import UUID_ORDER
from .Exceptions import PipelineError, SceneRAGError, StageError
from .util import Timer

from collections import OrderedDict
from uuid import uuid4
import networkx as nx


class Pipeline(object):
    """a task graph of stages executed in dependency order

    Tasks are declared as a dictionary mapping output variable names to a
    tuple of (stage, 'input_var1', 'input_var2', ...). Inputs are declared
    with an :obj:`Input` stage.

    Attributes:
        uuid(str): hex uuid for this pipeline
        name(str): user specified name for this pipeline, used to generate
            the unique id. defaults to "Pipeline" or the name of your subclass
        logger(:obj:`SceneragLogger`): Logger object for this pipeline
        graph(:obj:`networkx.MultiDiGraph`): directed task graph, nodes are
            tasks and edges carry the variable passed between them
        vars(dict): variable name -> id of the task node that creates it
        indexed_inputs(:obj:`list` of :obj:`str`): input names sorted by index
        keyword_inputs(:obj:`list` of :obj:`str`): alphabetically sorted
            unindexed input names

    Pipeline Graph Information:
        Nodes are dictionaries representing tasks. They contain:
            'stage'   : stage object for this task,
            'args'    : names of the task inputs for this stage,
            'outputs' : names of the task outputs produced by this stage,

        Edges contain:
            'var_name'  : name of the variable in task definition
            'in_index'  : input index for the target node

    Example:
        >>> import scenerag as sr
        >>>
        >>> @sr.stageify()
        ... def double(x):
        ...     return 2 * x
        >>>
        >>> @sr.stageify()
        ... def add(a, b):
        ...     return a + b
        >>>
        >>> tasks = {
        ...         'x' : sr.Input(0),
        ...         'y' : (double, 'x'),
        ...         'z' : (add, 'x', 'y'),
        ...         }
        >>> pipeline = sr.Pipeline(tasks)
        >>> outputs, timings = pipeline.process(3)
        >>> outputs['z']
        9
        >>> sorted(timings)
        ['y', 'z']
    """
    def __init__(self, tasks, name=None):
        self.uuid = uuid4().hex
        if name is None:
            name = self.__class__.__name__
        self.name = name
        self.logger = get_logger( self.id )

        self.graph = nx.MultiDiGraph()
        self.vars = OrderedDict()
        self.indexed_inputs = []
        self.keyword_inputs = []

        self._build(tasks)

    ############################################################################
    def _build(self, tasks):
        indexed = {}
        for outputs, task in tasks.items():
            outputs = tuple(outputs) if isinstance(outputs, (tuple, list)) else (outputs,)
            task = tuple(task) if isinstance(task, (tuple, list)) else (task,)
            stage, args = task[0], task[1:]

            if not isinstance(stage, Stage):
                msg = "first value in any task definition must be a Stage, not {}".format(type(stage))
                self.logger.error(msg)
                raise PipelineError(msg)

            node = ','.join(outputs)
            for out in outputs:
                if out in self.vars:
                    msg = "variable '{}' is produced by more than one task".format(out)
                    self.logger.error(msg)
                    raise PipelineError(msg)
                self.vars[out] = node

            if isinstance(stage, Input):
                if args or len(outputs) != 1:
                    raise PipelineError("Input stages take no arguments and produce one variable")
                if stage.index is None:
                    self.keyword_inputs.append(outputs[0])
                else:
                    indexed[stage.index] = outputs[0]
            else:
                stage.check_setup(args)

            self.graph.add_node(node, stage=stage, args=args, outputs=outputs)

        self.indexed_inputs = [indexed[i] for i in sorted(indexed)]
        self.keyword_inputs.sort()

        # draw an edge for every variable a task consumes
        for node_b, attrs in self.graph.nodes(data=True):
            for in_index, var in enumerate(attrs['args']):
                if var not in self.vars:
                    msg = "task '{}' needs undefined variable '{}'".format(node_b, var)
                    self.logger.error(msg)
                    raise PipelineError(msg)
                self.graph.add_edge(self.vars[var], node_b, var_name=var, in_index=in_index)

        if not nx.is_directed_acyclic_graph(self.graph):
            msg = "the task graph has a cycle"
            self.logger.error(msg)
            raise PipelineError(msg)

    ############################################################################
    def process(self, *pos_data, fetch=None, **kwdata):
        """runs every task, returning fetched variables and task timings

        Data lives only in this call's frame, so one pipeline may process
        from several threads at once as long as its stages allow it.

        Args:
            *pos_data: values of the indexed inputs
            fetch(iterable,None): variable names to return, defaults to all
            **kwdata: values of the keyword inputs

        Returns:
            (tuple): tuple containing:

                dict: fetched variable -> value
                OrderedDict: task -> milliseconds spent in its stage
        """
        if len(pos_data) > len(self.indexed_inputs):
            msg = "{} positional inputs given, pipeline takes {}".format(len(pos_data), len(self.indexed_inputs))
            self.logger.error(msg)
            raise PipelineError(msg)

        values = dict( zip(self.indexed_inputs, pos_data) )
        for key, val in kwdata.items():
            if key not in self.args or key in values:
                msg = "unexpected or duplicate input '{}'".format(key)
                self.logger.error(msg)
                raise PipelineError(msg)
            values[key] = val

        missing = [a for a in self.args if a not in values]
        if missing:
            msg = "data for {} must be provided".format(missing)
            self.logger.error(msg)
            raise PipelineError(msg)

        timings = OrderedDict()
        for node in self.execution_order:
            attrs = self.graph.nodes[node]
            stage = attrs['stage']
            if isinstance(stage, Input):
                continue

            t = Timer()
            try:
                result = stage.process( *(values[a] for a in attrs['args']) )
            except SceneRAGError:
                raise
            except Exception as e:
                msg = "{} failed: {}: {}".format(stage.id, type(e).__name__, e)
                self.logger.error(msg)
                raise StageError(msg) from e
            timings[node] = t.raw_time_ms()

            outputs = attrs['outputs']
            if len(outputs) == 1:
                values[outputs[0]] = result
            else:
                if len(result) != len(outputs):
                    msg = "{} returned {} values, task expects {}".format(stage.id, len(result), len(outputs))
                    self.logger.error(msg)
                    raise StageError(msg)
                values.update( zip(outputs, result) )

        fetch = self.vars.keys() if fetch is None else fetch
        return {var : values[var] for var in fetch}, timings

    ############################################################################
    def get_tasks(self):
        """the task dictionary this pipeline can be rebuilt from"""
        static = OrderedDict()
        for _, attrs in self.graph.nodes(data=True):
            outputs = attrs['outputs']
            key = outputs[0] if len(outputs) == 1 else outputs
            if isinstance(attrs['stage'], Input):
                static[key] = attrs['stage']
            else:
                static[key] = (attrs['stage'],) + tuple(attrs['args'])
        return static

    ############################################################################
    def get_predecessors(self, var):
        """the set of variables that must be computed before `var`"""
        node = self.vars[var]
        preds = set()
        for ancestor in nx.ancestors(self.graph, node):
            preds.update( self.graph.nodes[ancestor]['outputs'] )
        return preds

    ############################################################################
    #                               properties
    ############################################################################
    @property
    def id(self):
        """str: A unique id for this pipeline

        This id is a combination of the pipeline's non-unique name and
        part of its uuid (last 6 characters by default).
        """
        return "{}#{}".format(self.name, self.uuid[-UUID_ORDER:])

    ############################################################################
    @property
    def execution_order(self):
        """:obj:`list` of :obj:`str`: task nodes in a valid order, ties
        broken by declaration order"""
        position = {n : i for i,n in enumerate(self.graph.nodes)}
        return list( nx.lexicographical_topological_sort(self.graph, key=position.get) )

    ############################################################################
    @property
    def args(self):
        """:obj:`list` of :obj:`str`: all input names, indexed ones first"""
        return self.indexed_inputs + self.keyword_inputs

    ############################################################################
    @property
    def stages(self):
        """:obj:`list` of :obj:`Stage`: stages of this pipeline, without inputs"""
        return [attrs['stage'] for _,attrs in self.graph.nodes(data=True)
                    if not isinstance(attrs['stage'], Input)]

    ############################################################################
    def __repr__(self):
        return "{}({} tasks)".format(self.id, self.graph.number_of_nodes())
