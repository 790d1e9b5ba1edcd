# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
import os
import re
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field

import backoff
import requests

from ..Logger import get_logger
from .constants import NO_KNOWLEDGE_ANSWER
from .corpus import parse_question, pluralize, answer_from_record, closest_instance, \
                    format_number, format_vector, SINGLE, TOPICS
from .Exceptions import ServiceError, InvalidParameterError

ANSWER_LOGGER = get_logger('answer')

ENTRY_FIELDS = ('instance', 'category', 'position', 'orientation', 'interactive',
                'color', 'material', 'distance', 'relative position', 'direction')
"""field order of a rendered knowledge entry"""

SYSTEM_PROMPT = ("You answer questions about a virtual reality scene. Use only the "
                    "knowledge entries and the player conditions below. Directions are "
                    "given relative to the player. Answer in one short sentence.")


################################################################################
@dataclass(frozen=True)
class PromptBundle(object):
    """the knowledge handed to an answerer

    Attributes:
        question(str): the user's question
        knowledge_entries(tuple): one rendered line per retrieved entry, rank order
        user_conditions(str): the rendered user pose
        facts(tuple): (ObjectRecord, RelativePosition) per entry, same order
    """
    question: str
    knowledge_entries: tuple
    user_conditions: str
    facts: tuple = field(default=(), repr=False)

    def text(self):
        """the full prompt as one string"""
        lines = ["Knowledge entries:"]
        lines.extend("{}. {}".format(i, e) for i,e in enumerate(self.knowledge_entries, 1))
        lines.append("Player conditions: " + self.user_conditions)
        lines.append("Question: " + self.question)
        return '\n'.join(lines)


def render_entry(record, rel):
    """renders one record and its spatial facts as a fixed-field line"""
    values = (record.instance,
                record.category,
                format_vector(record.position),
                format_vector(record.orientation),
                'yes' if record.interactive else 'no',
                record.color,
                record.material,
                format_number(rel.distance),
                format_vector(rel.quantitative),
                rel.qualitative)
    return ' | '.join("{}: {}".format(k, v) for k,v in zip(ENTRY_FIELDS, values))


def render_pose(pose):
    return "position: {} | orientation: {}".format(format_vector(pose.position),
                                                    format_vector(pose.orientation))


def render_prompt(question, result, pose=None):
    """turns a retrieval result into a PromptBundle

    Args:
        question(str): the user's question
        result(:obj:`RetrievalResult`): the retrieved entries
        pose(:obj:`UserPose`,None): user pose, defaults to the pose the
            result's spatial facts were computed for

    Returns:
        :obj:`PromptBundle`: entries in rank order plus user conditions
    """
    pose = result.user if pose is None else pose
    facts = tuple( zip(result.expanded, result.spatial_facts) )
    return PromptBundle(question=question,
                        knowledge_entries=tuple(render_entry(r, rel) for r,rel in facts),
                        user_conditions=render_pose(pose),
                        facts=facts)


################################################################################
#                                 answerers
################################################################################
class Answerer(metaclass=ABCMeta):
    """produces an answer from a PromptBundle"""
    deterministic = True

    @abstractmethod
    def answer(self, bundle, topic=None):
        """returns the answer text for a bundle

        Args:
            bundle(:obj:`PromptBundle`): question and knowledge
            topic(str,None): question topic if known
        """
        pass

    def __call__(self, bundle, topic=None):
        return self.answer(bundle, topic)


################################################################################
_INSTANCE_PATTERN = r'(?<![\w]){}(?![\w])'


def _named_facts(facts, target):
    """facts the slot text names, either "the <category>" or an instance id"""
    target = target.strip()
    by_instance = [f for f in facts if f[0].instance.lower() == target.lower()]
    if by_instance:
        return by_instance
    phrase = re.sub(r'^the\s+', '', target, flags=re.IGNORECASE).lower()
    return [f for f in facts if f[0].category.lower() == phrase]


def _category_facts(facts, plural):
    plural = plural.strip().lower()
    return [f for f in facts if pluralize(f[0].category).lower() == plural
                                or f[0].category.lower() == plural]


def _mentioned_facts(facts, question):
    """longest instance id, then longest category mentioned in free text"""
    text = question.lower()
    instances = sorted({f[0].instance for f in facts}, key=len, reverse=True)
    for inst in instances:
        if re.search(_INSTANCE_PATTERN.format(re.escape(inst.lower())), text):
            return [f for f in facts if f[0].instance == inst]

    categories = sorted({f[0].category for f in facts}, key=len, reverse=True)
    for cat in categories:
        for name in (pluralize(cat), cat):
            if re.search(_INSTANCE_PATTERN.format(re.escape(name.lower())), text):
                return [f for f in facts if f[0].category == cat]
    return []


_TOPIC_KEYWORDS = (
    ('count', r'\bhow many\b'),
    ('closest', r'\b(closest|nearest)\b'),
    ('material', r'\b(material|made of)\b'),
    ('color', r'\b(colou?r)\b'),
    ('interactivity', r'\binteract'),
    ('distance', r'\b(how far|distance)\b'),
    ('direction', r'\b(direction|relation|left|right|front|behind)\b'),
    ('position', r'\b(where|position|location)\b'),
)


def infer_topic(question):
    """the topic of a question: template match first, keywords otherwise

    Example:
        >>> import scenerag as sr
        >>> sr.infer_topic("How many printers can be found?")
        'count'
    """
    parsed = parse_question(question)
    if parsed is not None:
        return parsed.topic
    for topic, pattern in _TOPIC_KEYWORDS:
        if re.search(pattern, question, re.IGNORECASE):
            return topic
    return None


class TemplateAnswerer(Answerer):
    """deterministic answerer that reads the asked field from the retrieved
    entries and formats it like the corpus ground truths

    Example:
        >>> import scenerag as sr
        >>> sr.TemplateAnswerer().answer(sr.PromptBundle("Is the lamp on?", (), ""))
        'no relevant knowledge retrieved'
    """
    def answer(self, bundle, topic=None):
        parsed = parse_question(bundle.question)
        topic = topic if topic is not None else (parsed.topic if parsed else infer_topic(bundle.question))
        if topic not in TOPICS:
            return NO_KNOWLEDGE_ANSWER

        facts = list(bundle.facts)
        if parsed is None:
            matches = _mentioned_facts(facts, bundle.question)
        elif parsed.kind == SINGLE:
            matches = _named_facts(facts, parsed.target)
        else:
            matches = _category_facts(facts, parsed.target)

        if not matches:
            return NO_KNOWLEDGE_ANSWER

        if topic == 'count':
            return str( len({f[0].instance for f in matches}) )
        if topic == 'closest':
            return closest_instance(matches)
        # best ranked entry
        record, rel = matches[0]
        return answer_from_record(topic, record, rel)


def template_answer(bundle, question_topic=None):
    """functional form of :meth:`TemplateAnswerer.answer`"""
    return TemplateAnswerer().answer(bundle, question_topic)


################################################################################
@dataclass(frozen=True)
class ChatBackendConfig(object):
    """connection settings of an OpenAI-style chat completion endpoint

    Attributes:
        endpoint(str): full URL of the chat completions route
        model(str): model name sent with every request
        api_key_env(str): environment variable holding the API key
        timeout(float): per request timeout in seconds
        max_retries(int): attempts before giving up
    """
    endpoint: str = "http://127.0.0.1:8000/v1/chat/completions"
    model: str = "meta-llama/Llama-3.1-8B-Instruct"
    api_key_env: str = "SCENERAG_API_KEY"
    timeout: float = 30.0
    max_retries: int = 3

    def __post_init__(self):
        if self.timeout <= 0:
            raise InvalidParameterError("timeout must be positive")
        if int(self.max_retries) < 1:
            raise InvalidParameterError("max_retries must be >= 1")


class ChatCompletionAnswerer(Answerer):
    """sends the rendered prompt to an external chat completion API

    Answers from this backend are not deterministic.
    """
    deterministic = False

    def __init__(self, config=None, session=None):
        self.config = ChatBackendConfig() if config is None else config
        self.session = requests.Session() if session is None else session
        self.logger = ANSWER_LOGGER.getChild('chat')

        self._post = backoff.on_exception(backoff.expo,
                                            (requests.exceptions.Timeout,
                                                requests.exceptions.ConnectionError),
                                            max_tries=int(self.config.max_retries),
                                            logger=self.logger)(self._post_once)

    ############################################################################
    def _headers(self):
        headers = {"Content-Type" : "application/json"}
        key = os.environ.get(self.config.api_key_env)
        if key:
            headers["Authorization"] = "Bearer " + key
        return headers

    ############################################################################
    def _post_once(self, payload):
        return self.session.post(self.config.endpoint,
                                    json=payload,
                                    headers=self._headers(),
                                    timeout=self.config.timeout)

    ############################################################################
    def answer(self, bundle, topic=None):
        payload = {"model" : self.config.model,
                    "messages" : [{"role" : "system", "content" : SYSTEM_PROMPT},
                                    {"role" : "user", "content" : bundle.text()}],
                    "temperature" : 0}
        try:
            response = self._post(payload)
            response.raise_for_status()
            return response.json()['choices'][0]['message']['content'].strip()
        except requests.exceptions.RequestException as e:
            msg = "chat backend '{}' failed: {}".format(self.config.endpoint, e)
            self.logger.error(msg)
            raise ServiceError(msg)
        except (KeyError, IndexError, ValueError) as e:
            msg = "unexpected response from chat backend '{}': {}".format(self.config.endpoint, e)
            self.logger.error(msg)
            raise ServiceError(msg)
