# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from uuid import uuid4

import numpy as np

from ..Logger import get_logger
from .answer import TemplateAnswerer
from .constants import DEFAULT_K, UUID_ORDER
from .corpus import canonical, KINDS
from .Exceptions import EvalError, ConfigurationMismatchError, InvalidParameterError
from .io_tools import dumps_json, write_json
from .service import query_pipeline

EVAL_LOGGER = get_logger('evaluation')

IN_CONTEXT = 'all'
"""k value reported for in-context runs that hand every object to the answerer"""


def recall_of(question, retrieved):
    """fraction of a question's relevant instances present in `retrieved`

    Example:
        >>> import scenerag as sr
        >>> q = sr.QuestionRecord("How many chairs can be found?", "multi_knowledge",
        ...                       "count", ("chair_1", "chair_2"), "2")
        >>> sr.recall_of(q, ["chair_1", "table_1"])
        0.5
    """
    relevant = set(question.relevant)
    if not relevant:
        raise EvalError("question '{}' has no relevant instances".format(question.text))
    return len( relevant.intersection(retrieved) ) / len(relevant)


def _mean(values):
    return float( np.mean(values) ) if len(values) else None


def summarize(rows):
    """accuracy and mean recall overall and per kind, topic and scene

    Returns:
        OrderedDict: the aggregates, recomputable from `rows` alone
    """
    def _group(selected):
        return OrderedDict([('n', len(selected)),
                            ('accuracy', _mean([float(r['correct']) for r in selected])),
                            ('recall', _mean([r['recall'] for r in selected]))])

    summary = OrderedDict()
    summary['overall'] = _group(rows)
    summary['kind'] = OrderedDict( (k, _group([r for r in rows if r['kind'] == k]))
                                    for k in KINDS if any(r['kind'] == k for r in rows) )
    topics = sorted({r['topic'] for r in rows})
    summary['topic'] = OrderedDict( (t, _group([r for r in rows if r['topic'] == t])) for t in topics )
    scenes = sorted({r['scene'] for r in rows})
    summary['scene'] = OrderedDict()
    for s in scenes:
        in_scene = [r for r in rows if r['scene'] == s]
        summary['scene'][s] = OrderedDict( (k, _group([r for r in in_scene if r['kind'] == k]))
                                            for k in KINDS if any(r['kind'] == k for r in in_scene) )
    return summary


################################################################################
@dataclass(frozen=True)
class EvalReport(object):
    """per-question rows, their aggregates and the configuration they came from

    Attributes:
        rows(tuple): one dict per question with question, kind, topic, scene,
            retrieved, recall, answer, ground_truth and correct
        config(OrderedDict): k, model checkpoint id, seed, scene
    """
    rows: tuple
    config: OrderedDict

    @property
    def aggregates(self):
        return summarize(self.rows)

    ############################################################################
    def accuracy(self, kind=None):
        group = self.aggregates['overall'] if kind is None else self.aggregates['kind'].get(kind)
        return None if group is None else group['accuracy']

    ############################################################################
    def recall(self, kind=None):
        group = self.aggregates['overall'] if kind is None else self.aggregates['kind'].get(kind)
        return None if group is None else group['recall']

    ############################################################################
    def to_dict(self):
        return OrderedDict([('config', self.config),
                            ('aggregates', self.aggregates),
                            ('rows', list(self.rows))])

    ############################################################################
    def to_json(self):
        """canonical JSON, identical runs give identical text"""
        return dumps_json( self.to_dict() )

    ############################################################################
    def save(self, path):
        write_json(path, self.to_dict(), indent=2)
        return path

    ############################################################################
    def table(self):
        """plain text summary table"""
        agg = self.aggregates
        lines = ["k={k}  model={model}  seed={seed}  scene={scene}".format(**self.config),
                    "{:<28}{:>8}{:>12}{:>10}".format('group', 'n', 'accuracy', 'recall'),
                    '-' * 58]

        def _line(name, group):
            lines.append( "{:<28}{:>8}{:>12.4f}{:>10.4f}".format(name, group['n'],
                                                                group['accuracy'], group['recall']) )

        _line('overall', agg['overall'])
        for kind, group in agg['kind'].items():
            _line(kind, group)
        for topic, group in agg['topic'].items():
            _line('  ' + topic, group)
        return '\n'.join(lines)


################################################################################
class Evaluator(object):
    """scores a knowledge database and answerer against a question corpus

    Attributes:
        db(:obj:`KnowledgeDatabase`): the database under test
        answerer(:obj:`Answerer`): produces the answers
        pipeline(:obj:`Pipeline`): the query pipeline shared with the server
        logger(:obj:`SceneragLogger`): logger for this evaluator
    """
    def __init__(self, db, answerer=None, name=None):
        self.db = db
        self.answerer = TemplateAnswerer() if answerer is None else answerer
        self.pipeline = query_pipeline(db, self.answerer)
        self.uuid = uuid4().hex
        self.name = self.__class__.__name__ if name is None else name
        self.logger = get_logger(self.id)

    ############################################################################
    @property
    def id(self):
        return "{}#{}".format(self.name, self.uuid[-UUID_ORDER:])

    ############################################################################
    def _check_corpus(self, corpus):
        if len(corpus) == 0:
            msg = "cannot evaluate an empty corpus"
            self.logger.error(msg)
            raise EvalError(msg)
        for q in corpus:
            missing = [i for i in q.relevant if i not in self.db]
            if missing:
                msg = "question '{}' refers to {} which scene '{}' doesn't contain"\
                        .format(q.text, missing, self.db.scene_name)
                self.logger.error(msg)
                raise EvalError(msg)

    ############################################################################
    def _row(self, question, k):
        outputs, _ = self.pipeline.process(question.text, question.user, k,
                                            topic=question.topic, fetch=('result', 'answer'))
        retrieved = outputs['result'].instances
        answer = outputs['answer']
        return OrderedDict([('question', question.text),
                            ('kind', question.kind),
                            ('topic', question.topic),
                            ('scene', question.scene_name or self.db.scene_name),
                            ('retrieved', retrieved),
                            ('recall', recall_of(question, retrieved)),
                            ('answer', answer),
                            ('ground_truth', question.ground_truth),
                            ('correct', canonical(answer) == canonical(question.ground_truth))])

    ############################################################################
    def evaluate(self, corpus, k=DEFAULT_K, seed=None, workers=1):
        """answers every question and scores it

        Args:
            corpus(:obj:`list` of :obj:`QuestionRecord`): questions generated
                from the database's scene
            k(int,None): entries retrieved per question. None hands every
                visible object to the answerer without retrieval
            seed(int,None): seed the corpus was generated with, echoed in
                the report
            workers(int): threads answering questions concurrently

        Returns:
            :obj:`EvalReport`: rows in corpus order plus aggregates
        """
        if k is not None and (isinstance(k, bool) or int(k) < 1):
            msg = "k must be a positive integer or None, got {}".format(k)
            self.logger.error(msg)
            raise InvalidParameterError(msg)
        self._check_corpus(corpus)

        k = None if k is None else int(k)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list( pool.map(lambda q: self._row(q, k), corpus) )
        else:
            rows = [self._row(q, k) for q in corpus]

        config = OrderedDict([('k', IN_CONTEXT if k is None else k),
                                ('model', self.db.model.checkpoint_id),
                                ('seed', seed),
                                ('scene', self.db.scene_name)])
        report = EvalReport(tuple(rows), config)
        self.logger.info("k={}: accuracy {:.4f}, recall {:.4f} over {} questions"\
                            .format(config['k'], report.accuracy(), report.recall(), len(rows)))
        return report

    ############################################################################
    def k_sweep(self, corpus, ks, seed=None):
        """evaluates a corpus for several k

        Returns:
            :obj:`KSweep`: one report per k
        """
        ks = [int(k) for k in ks]
        if not ks or any(k < 1 for k in ks) or ks != sorted(ks):
            msg = "k values must be positive and sorted, got {}".format(ks)
            self.logger.error(msg)
            raise InvalidParameterError(msg)

        sweep = KSweep( OrderedDict( (k, self.evaluate(corpus, k, seed)) for k in ks ) )
        if not sweep.recall_monotone():
            self.logger.warning("mean recall isn't monotone in k: {}".format(sweep.curve('recall')))
        return sweep


################################################################################
@dataclass(frozen=True)
class KSweep(object):
    """reports of one corpus evaluated at several k"""
    reports: OrderedDict

    def curve(self, metric='recall', kind=None):
        """:obj:`list` of (k, value) pairs for 'recall' or 'accuracy'"""
        if metric not in ('recall', 'accuracy'):
            raise InvalidParameterError("metric must be 'recall' or 'accuracy'")
        return [(k, getattr(r, metric)(kind)) for k,r in self.reports.items()]

    ############################################################################
    def recall_monotone(self, kind=None):
        values = [v for _,v in self.curve('recall', kind)]
        return all(b >= a for a,b in zip(values, values[1:]))

    ############################################################################
    def to_dict(self):
        return OrderedDict([('k', list(self.reports)),
                            ('recall', [v for _,v in self.curve('recall')]),
                            ('accuracy', [v for _,v in self.curve('accuracy')]),
                            ('recall_monotone', self.recall_monotone()),
                            ('kind', OrderedDict(
                                (kind, OrderedDict([('recall', [v for _,v in self.curve('recall', kind)]),
                                                    ('accuracy', [v for _,v in self.curve('accuracy', kind)])]))
                                for kind in KINDS)),
                            ])

    ############################################################################
    def table(self):
        lines = ["{:>4}{:>12}{:>10}".format('k', 'accuracy', 'recall'), '-' * 26]
        for k, report in self.reports.items():
            lines.append( "{:>4}{:>12.4f}{:>10.4f}".format(k, report.accuracy(), report.recall()) )
        return '\n'.join(lines)


def _scene_overall(report, scene):
    return summarize([r for r in report.rows if r['scene'] == scene])['overall']


################################################################################
@dataclass(frozen=True)
class ComparisonReport(object):
    """untrained and trained towers evaluated on the same corpus"""
    untrained: EvalReport
    trained: EvalReport

    @property
    def delta(self):
        """trained minus untrained accuracy and recall, overall and per kind,
        for every scene"""
        a, b = self.untrained.aggregates, self.trained.aggregates
        def _diff(ga, gb):
            return OrderedDict([('accuracy', gb['accuracy'] - ga['accuracy']),
                                ('recall', gb['recall'] - ga['recall'])])

        delta = OrderedDict()
        for scene in b['scene']:
            delta[scene] = OrderedDict( (kind, _diff(a['scene'][scene][kind], b['scene'][scene][kind]))
                                        for kind in b['scene'][scene] )
            delta[scene]['overall'] = _diff(_scene_overall(self.untrained, scene),
                                                _scene_overall(self.trained, scene))
        return delta

    ############################################################################
    def to_dict(self):
        return OrderedDict([('untrained', self.untrained.to_dict()),
                            ('trained', self.trained.to_dict()),
                            ('delta', self.delta)])

    ############################################################################
    def to_json(self):
        return dumps_json( self.to_dict() )

    ############################################################################
    def table(self):
        a, b = self.untrained.aggregates, self.trained.aggregates
        lines = ["{:<20}{:>12}{:>12}{:>12}{:>12}{:>10}".format('group', 'acc-base', 'acc-trained',
                                                                'rec-base', 'rec-trained', 'd-rec'),
                    '-' * 78]
        groups = [('overall', a['overall'], b['overall'])] \
                    + [(k, a['kind'][k], b['kind'][k]) for k in b['kind']]
        for name, ga, gb in groups:
            lines.append( "{:<20}{:>12.4f}{:>12.4f}{:>12.4f}{:>12.4f}{:>+10.4f}"\
                            .format(name, ga['accuracy'], gb['accuracy'],
                                    ga['recall'], gb['recall'], gb['recall'] - ga['recall']) )
        return '\n'.join(lines)


################################################################################
#                               functional forms
################################################################################
def evaluate(db, answerer, corpus, k=DEFAULT_K, seed=None):
    """evaluates a database and answerer on a corpus, see :meth:`Evaluator.evaluate`"""
    return Evaluator(db, answerer).evaluate(corpus, k, seed)


def k_sweep(db, answerer, corpus, ks, seed=None):
    """evaluates a corpus at several k, see :meth:`Evaluator.k_sweep`"""
    return Evaluator(db, answerer).k_sweep(corpus, ks, seed)


def compare_models(db_untrained, db_trained, corpus, k=DEFAULT_K, answerer=None, seed=None):
    """evaluates two databases that differ only in tower training

    Args:
        db_untrained(:obj:`KnowledgeDatabase`): database using the baseline towers
        db_trained(:obj:`KnowledgeDatabase`): database using the trained towers
        corpus(:obj:`list` of :obj:`QuestionRecord`): shared questions
        k(int): entries retrieved per question

    Returns:
        :obj:`ComparisonReport`: both reports and the trained-minus-untrained delta
    """
    base, trained = db_untrained.model, db_trained.model
    problems = []
    if db_untrained.scene_name != db_trained.scene_name \
            or sorted(db_untrained.scene().instances) != sorted(db_trained.scene().instances):
        problems.append("the databases hold different scenes")
    if base.embedder.config() != trained.embedder.config():
        problems.append("the base embedders differ")
    if base.dims != trained.dims:
        problems.append("tower shapes differ {} vs {}".format(base.dims, trained.dims))
    if problems:
        msg = "can't compare models: " + ', '.join(problems)
        EVAL_LOGGER.error(msg)
        raise ConfigurationMismatchError(msg)

    report = ComparisonReport(evaluate(db_untrained, answerer, corpus, k, seed),
                                evaluate(db_trained, answerer, corpus, k, seed))
    for scene, d in report.delta.items():
        EVAL_LOGGER.info("'{}': recall {:+.4f}, accuracy {:+.4f} (trained - untrained)"\
                            .format(scene, d['overall']['recall'], d['overall']['accuracy']))
    return report
