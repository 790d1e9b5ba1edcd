# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
"""template questions with programmatic ground truths and the
positive / negative / hard negative samples used to train the retriever"""
import re
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..Logger import get_logger
from .Exceptions import CorpusError, DanglingInstanceError, InsufficientSceneError, \
                        InvalidParameterError, UnknownInstanceError
from .io_tools import read_jsonl, write_jsonl
from .Scene import UserPose
from .spatial import relative_position
from .util import timer_ms
from .TwoTower import TrainingSample, POS, NEG, HNEG

CORPUS_LOGGER = get_logger('corpus')

SINGLE = 'single_knowledge'
MULTI = 'multi_knowledge'
KINDS = (SINGLE, MULTI)

ATTRIBUTE_TOPICS = ('material', 'color', 'interactivity', 'position')
SPATIAL_TOPICS = ('distance', 'direction')
MULTI_TOPICS = ('count', 'closest')
TOPICS = ATTRIBUTE_TOPICS + SPATIAL_TOPICS + MULTI_TOPICS


################################################################################
#                                text helpers
################################################################################
def canonical(text):
    """normalizes an answer for exact comparison: trimmed, lowercased and
    with runs of whitespace collapsed

    Example:
        >>> import scenerag as sr
        >>> sr.canonical("  Alloy ")
        'alloy'
    """
    return ' '.join( str(text).strip().lower().split() )


def format_number(value):
    """two decimals, never '-0.00'"""
    text = "{:.2f}".format(value)
    return '0.00' if text == '-0.00' else text


def format_vector(values):
    return '(' + ', '.join(format_number(v) for v in values) + ')'


def pluralize(category):
    """naive english plural of the last word of a category

    Example:
        >>> import scenerag as sr
        >>> sr.pluralize("printer"), sr.pluralize("bench"), sr.pluralize("cherry")
        ('printers', 'benches', 'cherries')
    """
    if re.search(r'(s|x|z|ch|sh)$', category):
        return category + 'es'
    if re.search(r'[^aeiou]y$', category):
        return category[:-1] + 'ies'
    return category + 's'


################################################################################
#                                 templates
################################################################################
PLACEHOLDER = re.compile(r'\{(object|category)\}')


@dataclass(frozen=True)
class QuestionTemplate(object):
    """a question pattern with one '{object}' or '{category}' slot

    '{object}' is filled with "the <category>" when the category has a single
    visible instance and with the instance id otherwise. '{category}' is filled
    with the plural of the category.
    """
    pattern: str
    topic: str
    kind: str
    regex: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        parts = PLACEHOLDER.split(self.pattern)
        # literal, slot name, literal
        if len(parts) != 3:
            raise InvalidParameterError("template '{}' must have exactly one slot".format(self.pattern))
        literal_a, slot, literal_b = parts
        regex = re.compile(re.escape(literal_a) + '(?P<{}>.+?)'.format(slot) + re.escape(literal_b),
                            re.IGNORECASE)
        object.__setattr__(self, 'regex', regex)

    ############################################################################
    @property
    def slot(self):
        return PLACEHOLDER.search(self.pattern).group(1)

    ############################################################################
    @property
    def specificity(self):
        """number of literal characters, longer templates are matched first"""
        return len( PLACEHOLDER.sub('', self.pattern) )

    ############################################################################
    def render(self, value):
        return PLACEHOLDER.sub(value, self.pattern)

    ############################################################################
    def match(self, text):
        """returns the slot text if `text` was produced by this template"""
        m = self.regex.fullmatch( ' '.join(text.strip().split()) )
        if m is None:
            return None
        return m.group(self.slot)


TEMPLATES = (
    # single knowledge, attributes
    QuestionTemplate("What is the material of {object}?", 'material', SINGLE),
    QuestionTemplate("What is {object} made of?", 'material', SINGLE),
    QuestionTemplate("What color is {object}?", 'color', SINGLE),
    QuestionTemplate("What is the color of {object}?", 'color', SINGLE),
    QuestionTemplate("Is {object} interactive?", 'interactivity', SINGLE),
    QuestionTemplate("Can I interact with {object}?", 'interactivity', SINGLE),
    QuestionTemplate("Where is {object}?", 'position', SINGLE),
    QuestionTemplate("What is the position of {object}?", 'position', SINGLE),
    # single knowledge, spatial
    QuestionTemplate("How far is {object} from me?", 'distance', SINGLE),
    QuestionTemplate("What is the distance between me and {object}?", 'distance', SINGLE),
    QuestionTemplate("Where is {object} in relation to the player's position?", 'direction', SINGLE),
    QuestionTemplate("Which direction is {object} from me?", 'direction', SINGLE),
    # multi knowledge
    QuestionTemplate("How many {category} are in the VR scene?", 'count', MULTI),
    QuestionTemplate("How many {category} can be found?", 'count', MULTI),
    QuestionTemplate("Where is the closest {category} to me?", 'closest', MULTI),
)
"""every template questions are generated from"""

_MATCH_ORDER = sorted(TEMPLATES, key=lambda t: -t.specificity)


@dataclass(frozen=True)
class ParsedQuestion(object):
    """what a question asks about

    Attributes:
        topic(str): one of TOPICS
        kind(str): single_knowledge or multi_knowledge
        target(str): slot text: "the clock", "chair_1" or a category name
        template(:obj:`QuestionTemplate`): the template that matched
    """
    topic: str
    kind: str
    target: str
    template: QuestionTemplate


def parse_question(text):
    """matches a question against the templates, most specific first

    Returns:
        :obj:`ParsedQuestion`,None: None if no template matches
    """
    for template in _MATCH_ORDER:
        target = template.match(text)
        if target is not None:
            return ParsedQuestion(template.topic, template.kind, target.strip(), template)
    return None


def object_phrase(scene, instance):
    """the text a question uses to name an instance"""
    record = scene.get(instance)
    visible = scene.by_category(visible_only=True).get(record.category, [])
    if len(visible) == 1:
        return "the {}".format(record.category)
    return instance


################################################################################
#                                 questions
################################################################################
@dataclass(frozen=True)
class QuestionRecord(object):
    """a generated question and its programmatic answer

    Attributes:
        text(str): the question
        kind(str): single_knowledge or multi_knowledge
        topic(str): one of TOPICS
        relevant(tuple): instance ids a retriever must return, sorted
        ground_truth(str): canonical answer
        user(:obj:`UserPose`): pose the question is asked from
        scene_name(str): scene the question was generated for
    """
    text: str
    kind: str
    topic: str
    relevant: tuple
    ground_truth: str
    user: UserPose = field(default_factory=UserPose)
    scene_name: str = ''

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError("unknown question kind '{}'".format(self.kind))
        if self.topic not in TOPICS:
            raise InvalidParameterError("unknown question topic '{}'".format(self.topic))
        relevant = tuple( sorted(self.relevant) )
        if not relevant:
            raise CorpusError("question '{}' has no relevant instances".format(self.text))
        if self.kind == SINGLE and len(relevant) != 1:
            raise CorpusError("single knowledge question '{}' must have exactly one relevant instance"\
                                .format(self.text))
        object.__setattr__(self, 'relevant', relevant)

    ############################################################################
    def to_dict(self):
        return OrderedDict([('question', self.text),
                            ('kind', self.kind),
                            ('topic', self.topic),
                            ('relevant', list(self.relevant)),
                            ('ground_truth', self.ground_truth),
                            ('user_pose', self.user.to_dict()),
                            ('scene', self.scene_name)])

    ############################################################################
    @classmethod
    def from_dict(cls, d):
        try:
            user = UserPose.from_dict(d['user_pose']) if 'user_pose' in d else UserPose()
            return cls(text=d['question'],
                        kind=d['kind'],
                        topic=d['topic'],
                        relevant=tuple(d['relevant']),
                        ground_truth=d['ground_truth'],
                        user=user,
                        scene_name=d.get('scene', ''))
        except KeyError as e:
            raise CorpusError("question entry is missing field {}".format(e))


def save_questions(questions, path):
    """writes a question corpus as JSON lines"""
    return write_jsonl(path, (q.to_dict() for q in questions))


def load_questions(path):
    """reads a question corpus written by :func:`save_questions`"""
    return [QuestionRecord.from_dict(d) for d in read_jsonl(path)]


################################################################################
def _relevant_records(scene, question):
    try:
        return [scene.get(inst) for inst in question.relevant]
    except UnknownInstanceError as e:
        msg = "question '{}' refers to an instance missing from scene '{}': {}"\
                .format(question.text, scene.name, e)
        CORPUS_LOGGER.error(msg)
        raise DanglingInstanceError(msg)


def answer_from_record(topic, record, rel):
    """canonical answer of a single knowledge topic from one record and its
    position relative to the user"""
    if topic == 'material':
        return canonical(record.material)
    if topic == 'color':
        return canonical(record.color)
    if topic == 'interactivity':
        return 'interactive' if record.interactive else 'not interactive'
    if topic == 'position':
        return format_vector(record.position)
    if topic == 'distance':
        return format_number(rel.distance)
    if topic == 'direction':
        return canonical( rel.describe(record.instance) )
    raise InvalidParameterError("'{}' isn't a single knowledge topic".format(topic))


def closest_instance(candidates):
    """instance id nearest to the user among (record, RelativePosition)
    pairs, ties in instance id order"""
    best = min(candidates, key=lambda pair: (pair[1].distance, pair[0].instance))
    return best[0].instance


def ground_truth(scene, user, question):
    """recomputes the canonical answer of a question against a scene state

    Attribute answers read the record of the relevant instance, spatial
    answers are computed against `user`, counts tally the visible instances of
    the asked category.

    Args:
        scene(:obj:`Scene`): the scene, visibility flags included
        user(:obj:`UserPose`): the pose the question is asked from
        question(:obj:`QuestionRecord`): the question

    Returns:
        str: the canonical answer
    """
    records = _relevant_records(scene, question)

    if question.kind == SINGLE:
        record = records[0]
        return answer_from_record(question.topic, record, relative_position(record.position, user))

    category = records[0].category
    visible = [scene.get(i) for i in scene.by_category(visible_only=True).get(category, [])]
    if question.topic == 'count':
        return str( len(visible) )
    if question.topic == 'closest':
        if not visible:
            return canonical('none')
        return closest_instance([(r, relative_position(r.position, user)) for r in visible])
    raise InvalidParameterError("'{}' isn't a multi knowledge topic".format(question.topic))


################################################################################
def random_user_poses(seed, n, extent=10.0):
    """n reproducible user poses, standing in the scene box and turned about
    the vertical (third) axis"""
    rng = np.random.default_rng(seed)
    poses = []
    for _ in range(int(n)):
        yaw = rng.uniform(-np.pi, np.pi)
        poses.append( UserPose(position=(rng.uniform(-extent, extent), rng.uniform(-extent, extent), 0.0),
                                orientation=(0.0, 0.0, np.sin(yaw / 2.0), np.cos(yaw / 2.0))) )
    return poses


@timer_ms
def generate_questions(scene, user=None, seed=0, counts=None):
    """builds the template corpus of a scene

    Every single knowledge template is asked about every visible object and
    every multi knowledge template about every visible category, once per
    user pose.

    Args:
        scene(:obj:`Scene`): the scene to ask about
        user(:obj:`UserPose`, list): one pose or a sequence of poses,
            defaults to the identity pose at the origin
        seed(int): seed used when `counts` subsamples a template
        counts(dict,None): optional maximum number of question texts per
            template pattern

    Returns:
        :obj:`list` of :obj:`QuestionRecord`: questions, text-major order
    """
    if len(scene) == 0:
        msg = "can't generate questions for the empty scene '{}'".format(scene.name)
        CORPUS_LOGGER.error(msg)
        raise CorpusError(msg)

    if user is None:
        poses = [UserPose()]
    elif isinstance(user, UserPose):
        poses = [user]
    else:
        poses = list(user)

    rng = np.random.default_rng(seed)
    groups = scene.by_category(visible_only=True)
    visible = [inst for insts in groups.values() for inst in insts]

    questions = []
    for template in TEMPLATES:
        if template.kind == SINGLE:
            items = [(template.render( object_phrase(scene, inst) ), (inst,)) for inst in visible]
        else:
            # "how many chairs" but "the closest chair"
            items = [(template.render( cat if template.topic == 'closest' else pluralize(cat) ), tuple(insts))
                        for cat,insts in groups.items()]

        limit = None if counts is None else counts.get(template.pattern)
        if limit is not None and limit < len(items):
            keep = sorted( rng.choice(len(items), size=int(limit), replace=False).tolist() )
            items = [items[i] for i in keep]

        for text, relevant in items:
            for pose in poses:
                draft = QuestionRecord(text, template.kind, template.topic, relevant, '-',
                                        pose, scene.name)
                questions.append( QuestionRecord(text, template.kind, template.topic, relevant,
                                                    ground_truth(scene, pose, draft), pose,
                                                    scene.name) )

    n_single = sum(1 for q in questions if q.kind == SINGLE)
    CORPUS_LOGGER.info("generated {} questions for '{}' ({} single / {} multi knowledge, {} poses)"\
                        .format(len(questions), scene.name, n_single, len(questions) - n_single, len(poses)))
    return questions


def split_corpus(questions, n_train, seed=0, train_poses=1):
    """splits a corpus into train and test sets with disjoint question texts

    Distinct texts are shuffled; texts go to the training set until it holds
    `n_train` questions, each contributing at most `train_poses` of its poses.
    Every question of the remaining texts goes to the test set.

    Returns:
        (tuple): (train questions, test questions)
    """
    by_text = OrderedDict()
    for q in questions:
        by_text.setdefault(q.text, []).append(q)

    texts = sorted(by_text)
    order = np.random.default_rng(seed).permutation(len(texts))

    train, test = [], []
    for i in order.tolist():
        group = by_text[texts[i]]
        if len(train) < n_train:
            train.extend(group[:train_poses] if train_poses else group)
        else:
            test.extend(group)

    CORPUS_LOGGER.info("split {} questions into {} train / {} test"\
                        .format(len(questions), len(train), len(test)))
    return train, test


################################################################################
#                              training samples
################################################################################
@timer_ms
def build_training_samples(questions, scene, negatives=1, hard_negatives=1, seed=0):
    """turns questions into labelled question-information pairs

    Every relevant instance of a question is a positive. Negatives are drawn
    uniformly from objects of other categories. Hard negatives share the
    category of the relevant instance but are another instance; they are only
    drawn for single knowledge questions.

    Args:
        questions(:obj:`list` of :obj:`QuestionRecord`): the questions
        scene(:obj:`Scene`): the scene the questions were generated from
        negatives(int): negatives per question
        hard_negatives(int): hard negatives per single knowledge question,
            fewer when the category has fewer other instances
        seed(int): sampling seed

    Returns:
        :obj:`list` of :obj:`TrainingSample`: the samples
    """
    groups = scene.by_category()
    if len(groups) < 2:
        msg = "scene '{}' needs at least 2 categories to draw negatives".format(scene.name)
        CORPUS_LOGGER.error(msg)
        raise InsufficientSceneError(msg)
    if hard_negatives and max(len(v) for v in groups.values()) < 2:
        msg = "scene '{}' has no category with 2 instances, hard negatives are impossible"\
                .format(scene.name)
        CORPUS_LOGGER.error(msg)
        raise InsufficientSceneError(msg)

    rng = np.random.default_rng(seed)
    samples = []
    for q in questions:
        records = _relevant_records(scene, q)
        categories = {r.category for r in records}

        for r in records:
            samples.append( TrainingSample(q.text, r.key, POS) )

        others = [scene.get(i).key for c,insts in groups.items() if c not in categories for i in insts]
        for j in rng.choice(len(others), size=min(negatives, len(others)), replace=False).tolist():
            samples.append( TrainingSample(q.text, others[j], NEG) )

        if q.kind == SINGLE and hard_negatives:
            record = records[0]
            siblings = [scene.get(i).key for i in groups[record.category] if i != record.instance]
            if siblings:
                size = min(hard_negatives, len(siblings))
                for j in rng.choice(len(siblings), size=size, replace=False).tolist():
                    samples.append( TrainingSample(q.text, siblings[j], HNEG) )

    CORPUS_LOGGER.info("built {} training samples from {} questions ({})"\
                        .format(len(samples), len(questions),
                                ', '.join("{}={}".format(l, sum(1 for s in samples if s.label == l))
                                            for l in (POS, NEG, HNEG))))
    return samples
