# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
import threading
from collections import OrderedDict
from contextlib import contextmanager
from dataclasses import dataclass
from uuid import uuid4

from ..Logger import get_logger
from .constants import DEFAULT_K, UUID_ORDER
from .Exceptions import EmptyIndexError, UnknownInstanceError, \
                        InvalidParameterError, SceneValidationError, SceneParseError
from .io_tools import read_json, write_json
from .Scene import ObjectRecord, Scene, UserPose
from .spatial import relative_position
from .TwoTower import cosine_sim


class ReadWriteLock(object):
    """many readers or one writer, waiting writers block new readers"""
    def __init__(self):
        self._cond = threading.Condition(threading.Lock())
        self._readers = 0
        self._writer = False
        self._waiting_writers = 0

    ############################################################################
    @contextmanager
    def read(self):
        with self._cond:
            while self._writer or self._waiting_writers:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    ############################################################################
    @contextmanager
    def write(self):
        with self._cond:
            self._waiting_writers += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._waiting_writers -= 1
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


################################################################################
@dataclass(frozen=True)
class RetrievalResult(object):
    """ranked knowledge entries for one question

    Attributes:
        question(str): the question that was asked
        ranked(tuple): (instance id, similarity) pairs, best first. The score
            is None for results that weren't ranked by similarity
        expanded(tuple): the full ObjectRecord of every ranked id
        spatial_facts(tuple): RelativePosition of every ranked id against `user`
        user(:obj:`UserPose`): the pose the spatial facts were computed for
        revision(int): database revision the result was read at
    """
    question: str
    ranked: tuple
    expanded: tuple
    spatial_facts: tuple
    user: UserPose
    revision: int

    @property
    def instances(self):
        """:obj:`list` of :obj:`str`: ranked instance ids"""
        return [inst for inst,_ in self.ranked]

    def __len__(self):
        return len(self.ranked)

    def __iter__(self):
        """iterates over (record, RelativePosition, score) in rank order"""
        return iter( zip(self.expanded, self.spatial_facts, (s for _,s in self.ranked)) )


################################################################################
class KnowledgeDatabase(object):
    """full object knowledge keyed by instance id plus an embedding index
    over the visible objects

    Only (category, instance) is ever embedded, so attribute changes never
    touch the index; objects enter and leave the index as they are shown or
    hidden. Retrieval is an exact linear scan.

    Attributes:
        model(:obj:`TwoTowerModel`): encodes questions and index keys
        scene_name(str): name of the scene the records came from
        uuid(str): hex uuid of this database
        logger(:obj:`SceneragLogger`): logger for this database

    Example:
        >>> import scenerag as sr
        >>> scene = sr.generate_preset_scene('office', seed=2)
        >>> db = sr.KnowledgeDatabase.from_scene(scene, sr.TwoTowerModel.initialize(0))
        >>> len(db.retrieve("where is the printer?", k=3))
        3
    """
    def __init__(self, model, scene_name='scene', user=None, name=None):
        self.model = model
        self.scene_name = scene_name
        self.uuid = uuid4().hex
        self.name = self.__class__.__name__ if name is None else name
        self.logger = get_logger(self.id)

        self._lock = ReadWriteLock()
        self._records = OrderedDict()
        self._index = OrderedDict()
        self._user = UserPose() if user is None else user
        self._revision = 0

    ############################################################################
    @classmethod
    def from_scene(cls, scene, model, user=None, name=None):
        """builds a database holding every object of a scene"""
        db = cls(model, scene.name, user, name)
        with db._lock.write():
            for record in scene:
                db._put(record)
            db._revision += 1
        db.logger.info("indexed {} of {} objects from scene '{}'"\
                        .format(len(db._index), len(db._records), scene.name))
        return db

    ############################################################################
    @property
    def id(self):
        """str: the unique name of this database"""
        return "{}#{}".format(self.name, self.uuid[-UUID_ORDER:])

    ############################################################################
    #                                 writes
    ############################################################################
    def _put(self, record):
        previous = self._records.get(record.instance)
        if previous is not None and previous.category != record.category:
            msg = "'{}' is a {} and can't become a {}"\
                    .format(record.instance, previous.category, record.category)
            self.logger.error(msg)
            raise SceneValidationError(msg)

        self._records[record.instance] = record
        if record.visible:
            if record.instance not in self._index:
                self._index[record.instance] = self.model.forward_information(record.key)
        else:
            self._index.pop(record.instance, None)

    ############################################################################
    def upsert_object(self, record):
        """inserts or replaces the knowledge of one object

        Args:
            record(:obj:`ObjectRecord`): the new state of the object

        Returns:
            int: the new revision
        """
        if not isinstance(record, ObjectRecord):
            raise InvalidParameterError("record must be an ObjectRecord")
        with self._lock.write():
            self._put(record)
            self._revision += 1
            return self._revision

    ############################################################################
    def set_visibility(self, instance, visible):
        """shows or hides an object, adding or removing its index entry"""
        with self._lock.write():
            if instance not in self._records:
                msg = "unknown instance '{}'".format(instance)
                self.logger.error(msg)
                raise UnknownInstanceError(msg)
            self._put( self._records[instance].replace(visible=bool(visible)) )
            self._revision += 1
            self.logger.debug("'{}' visible={} (revision {})".format(instance, bool(visible), self._revision))
            return self._revision

    ############################################################################
    def set_user_pose(self, pose):
        """replaces the current user pose"""
        if not isinstance(pose, UserPose):
            raise InvalidParameterError("pose must be a UserPose")
        with self._lock.write():
            self._user = pose
            self._revision += 1
            return self._revision

    ############################################################################
    #                                 reads
    ############################################################################
    def retrieve(self, question, k=DEFAULT_K, pose=None):
        """ranks the visible objects against a question

        Scores are cosine similarities between the question tower output and
        each index vector; the top min(k, index size) are returned, ties in
        ascending instance id order.

        Args:
            question(str): the user's question
            k(int): number of entries to return
            pose(:obj:`UserPose`,None): if given, becomes the current user
                pose in the same atomic step as the retrieval

        Returns:
            :obj:`RetrievalResult`: ranked, expanded entries and spatial facts
        """
        if int(k) < 1:
            msg = "k must be a positive integer, got {}".format(k)
            self.logger.error(msg)
            raise InvalidParameterError(msg)

        if pose is None:
            with self._lock.read():
                return self._retrieve(question, int(k))

        with self._lock.write():
            self._user = pose
            self._revision += 1
            return self._retrieve(question, int(k))

    ############################################################################
    def _retrieve(self, question, k):
        if not self._index:
            msg = "the index of '{}' is empty, no object is visible".format(self.scene_name)
            self.logger.error(msg)
            raise EmptyIndexError(msg)

        q = self.model.forward_question(question)
        scored = [(inst, cosine_sim(q, vec)) for inst,vec in self._index.items()]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return self._result(question, scored[:k])

    ############################################################################
    def _result(self, question, ranked):
        records = tuple(self._records[inst] for inst,_ in ranked)
        facts = tuple(relative_position(r.position, self._user) for r in records)
        return RetrievalResult(question=question,
                                ranked=tuple(ranked),
                                expanded=records,
                                spatial_facts=facts,
                                user=self._user,
                                revision=self._revision)

    ############################################################################
    def everything(self, question='', pose=None):
        """every visible object in insertion order without ranking, used to
        hand the whole scene to an answerer"""
        lock = self._lock.read() if pose is None else self._lock.write()
        with lock:
            if pose is not None:
                self._user = pose
                self._revision += 1
            return self._result(question, [(inst, None) for inst in self._records if inst in self._index])

    ############################################################################
    def get(self, instance):
        """the current record of an instance"""
        with self._lock.read():
            try:
                return self._records[instance]
            except KeyError:
                msg = "unknown instance '{}'".format(instance)
                self.logger.error(msg)
                raise UnknownInstanceError(msg)

    ############################################################################
    def index_vector(self, instance):
        """the index embedding of a visible instance"""
        with self._lock.read():
            if instance not in self._index:
                raise UnknownInstanceError("'{}' is not indexed".format(instance))
            return self._index[instance]

    ############################################################################
    def index_items(self):
        """:obj:`list` of (instance, vector) pairs of the index"""
        with self._lock.read():
            return list( self._index.items() )

    ############################################################################
    @property
    def user(self):
        """:obj:`UserPose`: the current user pose"""
        with self._lock.read():
            return self._user

    ############################################################################
    @property
    def revision(self):
        """int: counter bumped by every write"""
        with self._lock.read():
            return self._revision

    ############################################################################
    def __len__(self):
        with self._lock.read():
            return len(self._index)

    ############################################################################
    def __contains__(self, instance):
        with self._lock.read():
            return instance in self._records

    ############################################################################
    def scene(self):
        """the current records as a Scene"""
        with self._lock.read():
            return Scene(self.scene_name, tuple(self._records.values()))

    ############################################################################
    #                               snapshots
    ############################################################################
    def to_snapshot(self):
        """the scene document of the current records plus a "user_pose" block"""
        snapshot = self.scene().to_dict()
        snapshot['user_pose'] = self.user.to_dict()
        return snapshot

    ############################################################################
    def save_snapshot(self, path):
        write_json(path, self.to_snapshot(), indent=2)
        self.logger.info("saved snapshot of '{}' to '{}'".format(self.scene_name, path))
        return path

    ############################################################################
    @classmethod
    def from_snapshot(cls, snapshot, model, name=None):
        """rebuilds a database from :meth:`to_snapshot` output, the index is
        re-embedded with `model`"""
        scene = Scene.from_dict(snapshot, source='<snapshot>')
        user = None
        if 'user_pose' in snapshot:
            user = UserPose.from_dict(snapshot['user_pose'])
        return cls.from_scene(scene, model, user, name)

    ############################################################################
    @classmethod
    def load_snapshot(cls, path, model, name=None):
        try:
            snapshot = read_json(path)
        except ValueError as e:
            raise SceneParseError("unable to parse snapshot '{}': {}".format(path, e))
        return cls.from_snapshot(snapshot, model, name)

    ############################################################################
    def __repr__(self):
        return "{}(scene='{}', records={}, indexed={})"\
                .format(self.id, self.scene_name, len(self._records), len(self._index))

