# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
import json
import re
from collections import OrderedDict
from dataclasses import dataclass, field, replace

import numpy as np

from ..Logger import get_logger
from .constants import SCENE_PRESETS, UNKNOWN_MATERIAL
from .Exceptions import SceneParseError, SceneValidationError, \
                        DegenerateQuaternionError, NonFiniteInputError, \
                        InvalidParameterError, UnknownInstanceError
from .io_tools import write_json
from .spatial import as_vector, normalize_quaternion

SCENE_LOGGER = get_logger('scene')

COLORS = ['red', 'blue', 'green', 'white', 'black', 'brown', 'gray', 'yellow',
            'orange', 'beige']
"""palette sampled by the synthetic scene generator"""

MATERIALS = ['wooden', 'metal', 'plastic', 'glass', 'fabric', 'leather',
                'alloy', 'stone', 'ceramic', UNKNOWN_MATERIAL]
"""materials sampled by the synthetic scene generator"""


def _vector_tuple(values, length, name):
    return tuple( float(c) for c in as_vector(values, length, name) )


def instance_serial(category, instance):
    """returns the serial number of `instance` or None if it isn't of the form
    '<category>_<positive integer>'"""
    match = re.fullmatch(re.escape(category) + r'_([1-9][0-9]*)', instance)
    if match is None:
        return None
    return int( match.group(1) )


################################################################################
@dataclass(frozen=True)
class UserPose(object):
    """position and orientation of the VR user in the global frame

    The orientation is an (x, y, z, w) quaternion, normalized on construction.
    """
    position: tuple = (0.0, 0.0, 0.0)
    orientation: tuple = (0.0, 0.0, 0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, 'position', _vector_tuple(self.position, 3, 'user position'))
        object.__setattr__(self, 'orientation', normalize_quaternion(self.orientation))

    ############################################################################
    def to_dict(self):
        return {'position' : list(self.position),
                'orientation' : list(self.orientation)}

    ############################################################################
    @classmethod
    def from_dict(cls, d):
        """builds a pose from {"position": [x,y,z], "orientation": [qx,qy,qz,qw]}"""
        if not isinstance(d, dict) or 'position' not in d or 'orientation' not in d:
            raise SceneParseError("user pose must define 'position' and 'orientation'")
        return cls(position=d['position'], orientation=d['orientation'])


################################################################################
@dataclass(frozen=True)
class ObjectRecord(object):
    """every piece of knowledge stored about one scene object

    Attributes:
        scene_name(str): name of the scene the object belongs to
        category(str): object category, e.g. "chair"
        instance(str): unique id "<category>_<serial>", e.g. "chair_1"
        position(tuple): (x, y, z) in scene units
        orientation(tuple): unit quaternion (x, y, z, w)
        interactive(bool): whether the user can interact with it
        color(str): color name
        material(str): material name or "unknown"
        visible(bool): whether the object is currently visible
    """
    scene_name: str
    category: str
    instance: str
    position: tuple
    orientation: tuple = (0.0, 0.0, 0.0, 1.0)
    interactive: bool = False
    color: str = 'unknown'
    material: str = UNKNOWN_MATERIAL
    visible: bool = True

    def __post_init__(self):
        if not self.category or not isinstance(self.category, str):
            raise SceneValidationError("object category must be a non-empty string")
        if not isinstance(self.instance, str):
            raise SceneValidationError("instance id must be a string, not {!r}".format(self.instance))
        if instance_serial(self.category, self.instance) is None:
            msg = "instance '{}' must be '{}_<serial>'".format(self.instance, self.category)
            raise SceneValidationError(msg)

        object.__setattr__(self, 'position', _vector_tuple(self.position, 3, 'object position'))
        object.__setattr__(self, 'orientation', normalize_quaternion(self.orientation))
        if not self.material:
            object.__setattr__(self, 'material', UNKNOWN_MATERIAL)
        for attr in ('color', 'material'):
            if not isinstance(getattr(self, attr), str):
                raise SceneValidationError("{} of '{}' must be a string".format(attr, self.instance))
        object.__setattr__(self, 'interactive', bool(self.interactive))
        object.__setattr__(self, 'visible', bool(self.visible))

    ############################################################################
    @property
    def key(self):
        """tuple: the (category, instance) pair that identifies this object"""
        return (self.category, self.instance)

    ############################################################################
    @property
    def serial(self):
        """int: the serial number of this instance"""
        return instance_serial(self.category, self.instance)

    ############################################################################
    def replace(self, **changes):
        """returns a copy of this record with the given fields changed"""
        return replace(self, **changes)

    ############################################################################
    def to_dict(self):
        return OrderedDict([('category', self.category),
                            ('instance', self.instance),
                            ('position', list(self.position)),
                            ('orientation', list(self.orientation)),
                            ('interactive', self.interactive),
                            ('color', self.color),
                            ('material', self.material),
                            ('visible', self.visible)])

    ############################################################################
    @classmethod
    def from_dict(cls, d, scene_name):
        """builds a record from one entry of a scene file's "objects" list"""
        required = ('category', 'instance', 'position', 'orientation')
        missing = [r for r in required if r not in d]
        if missing:
            raise SceneParseError("object is missing fields {}".format(missing))
        material = d.get('material', UNKNOWN_MATERIAL)
        return cls(scene_name=scene_name,
                    category=d['category'],
                    instance=d['instance'],
                    position=d['position'],
                    orientation=d['orientation'],
                    interactive=d.get('interactive', False),
                    color='unknown' if d.get('color') is None else d['color'],
                    material=UNKNOWN_MATERIAL if material is None else material,
                    visible=d.get('visible', True))


################################################################################
@dataclass(frozen=True)
class Scene(object):
    """a named collection of objects, immutable once built

    Attributes:
        name(str): the scene name, e.g. "villa interior"
        objects(tuple): the ObjectRecords of this scene
    """
    name: str
    objects: tuple = field(default_factory=tuple)

    def __post_init__(self):
        objects = tuple(self.objects)
        seen = set()
        for obj in objects:
            if obj.instance in seen:
                msg = "duplicate instance '{}' in scene '{}'".format(obj.instance, self.name)
                SCENE_LOGGER.error(msg)
                raise SceneValidationError(msg)
            seen.add(obj.instance)
        object.__setattr__(self, 'objects', objects)
        object.__setattr__(self, '_lookup', {o.instance : o for o in objects})

    ############################################################################
    def get(self, instance):
        """fetches the record of an instance id"""
        try:
            return self._lookup[instance]
        except KeyError:
            raise UnknownInstanceError("unknown instance '%s'" % instance)

    ############################################################################
    def __contains__(self, instance):
        return instance in self._lookup

    def __len__(self):
        return len(self.objects)

    def __iter__(self):
        return iter(self.objects)

    ############################################################################
    @property
    def instances(self):
        """:obj:`list` of :obj:`str`: instance ids in file order"""
        return [o.instance for o in self.objects]

    ############################################################################
    @property
    def categories(self):
        """:obj:`list` of :obj:`str`: distinct categories in order of first appearance"""
        return list( OrderedDict.fromkeys(o.category for o in self.objects) )

    ############################################################################
    def by_category(self, visible_only=False):
        """groups instance ids by category, serials ascending

        Returns:
            OrderedDict: category -> list of instance ids
        """
        groups = OrderedDict()
        for obj in self.objects:
            if visible_only and not obj.visible:
                continue
            groups.setdefault(obj.category, []).append(obj)
        return OrderedDict( (c, [o.instance for o in sorted(objs, key=lambda o: o.serial)])
                                for c,objs in groups.items() )

    ############################################################################
    def statistics(self):
        """returns (number of categories, number of instances)"""
        return len(self.categories), len(self.objects)

    ############################################################################
    def to_dict(self):
        return OrderedDict([('name', self.name),
                            ('objects', [o.to_dict() for o in self.objects])])

    ############################################################################
    @classmethod
    def from_dict(cls, d, source='<scene>'):
        """builds and validates a scene from a parsed scene document"""
        if not isinstance(d, dict) or not isinstance(d.get('name'), str) \
                or not isinstance(d.get('objects'), list):
            msg = "'{}' must be an object with a 'name' string and an 'objects' list".format(source)
            SCENE_LOGGER.error(msg)
            raise SceneParseError(msg)

        records = []
        for i, raw in enumerate(d['objects']):
            if not isinstance(raw, dict):
                msg = "object #{} of '{}' is not a JSON object".format(i, source)
                SCENE_LOGGER.error(msg)
                raise SceneParseError(msg)
            try:
                records.append( ObjectRecord.from_dict(raw, d['name']) )
            except (DegenerateQuaternionError, NonFiniteInputError) as e:
                msg = "object #{} of '{}' is invalid: {}".format(i, source, e)
                SCENE_LOGGER.error(msg)
                raise SceneValidationError(msg)
            except (TypeError, ValueError) as e:
                msg = "object #{} of '{}' is malformed: {}".format(i, source, e)
                SCENE_LOGGER.error(msg)
                raise SceneParseError(msg)

        return cls(d['name'], tuple(records))


################################################################################
#                                 file io
################################################################################
def load_scene(path):
    """loads and validates a scene file

    Args:
        path(str): path to a JSON scene description

    Returns:
        :obj:`Scene`: the validated scene, quaternions normalized
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        msg = "unable to parse scene file '{}': {}".format(path, e)
        SCENE_LOGGER.error(msg)
        raise SceneParseError(msg)

    scene = Scene.from_dict(raw, source=path)
    SCENE_LOGGER.info("loaded scene '{}' with {} categories and {} instances"\
                        .format(scene.name, *scene.statistics()))
    return scene


def save_scene(scene, path):
    """writes a scene to a JSON scene file"""
    return write_json(path, scene.to_dict(), indent=2)


################################################################################
#                               synthetic scenes
################################################################################
def generate_synthetic_scene(seed,
                                n_categories,
                                n_instances,
                                vocab,
                                name=None,
                                extent=10.0,
                                height=3.0):
    """builds a random but reproducible scene

    Every chosen category receives one instance, the remaining instances are
    spread over the categories at random. Positions lie in the box
    [-extent, extent] x [-extent, extent] x [0, height].

    Args:
        seed(int): random seed
        n_categories(int): number of categories to draw from `vocab`
        n_instances(int): total number of objects
        vocab(:obj:`list` of :obj:`str`): candidate category names
        name(str,None): scene name, defaults to "synthetic-<seed>"
        extent(float): half width of the horizontal box
        height(float): height of the box

    Returns:
        :obj:`Scene`: the generated scene
    """
    vocab = list( OrderedDict.fromkeys(vocab) )
    if not (1 <= n_categories <= len(vocab)):
        msg = "n_categories must be within [1, {}], got {}".format(len(vocab), n_categories)
        SCENE_LOGGER.error(msg)
        raise InvalidParameterError(msg)
    if n_instances < n_categories:
        msg = "n_instances ({}) must be >= n_categories ({})".format(n_instances, n_categories)
        SCENE_LOGGER.error(msg)
        raise InvalidParameterError(msg)

    rng = np.random.default_rng(seed)
    name = "synthetic-{}".format(seed) if name is None else name

    chosen = sorted( rng.choice(len(vocab), size=n_categories, replace=False).tolist() )
    categories = [vocab[i] for i in chosen]

    counts = np.ones(n_categories, dtype=int)
    extra = rng.integers(0, n_categories, size=n_instances - n_categories)
    np.add.at(counts, extra, 1)

    records = []
    for category, count in zip(categories, counts.tolist()):
        for serial in range(1, count + 1):
            quat = rng.normal(size=4)
            records.append(
                ObjectRecord(scene_name=name,
                            category=category,
                            instance="{}_{}".format(category, serial),
                            position=(rng.uniform(-extent, extent),
                                        rng.uniform(-extent, extent),
                                        rng.uniform(0.0, height)),
                            orientation=tuple(quat.tolist()),
                            interactive=bool( rng.random() < 0.5 ),
                            color=COLORS[ int(rng.integers(len(COLORS))) ],
                            material=MATERIALS[ int(rng.integers(len(MATERIALS))) ],
                            visible=True)
                            )

    scene = Scene(name, tuple(records))
    SCENE_LOGGER.debug("generated scene '{}' ({} categories, {} instances)"\
                        .format(name, *scene.statistics()))
    return scene


def generate_preset_scene(preset, seed, n_instances=None):
    """generates a synthetic scene with the vocabulary and statistics of one of
    the reference scenes in :data:`SCENE_PRESETS`

    Args:
        preset(str): one of 'villa_interior', 'restaurant', 'grocery_store',
            'office', 'viking_village'
        seed(int): random seed
        n_instances(int,None): overrides the preset instance count
    """
    if preset not in SCENE_PRESETS:
        msg = "unknown scene preset '{}', must be one of {}".format(preset, sorted(SCENE_PRESETS))
        SCENE_LOGGER.error(msg)
        raise InvalidParameterError(msg)

    preset_info = SCENE_PRESETS[preset]
    n_instances = preset_info['n_instances'] if n_instances is None else n_instances
    return generate_synthetic_scene(seed,
                                    preset_info['n_categories'],
                                    n_instances,
                                    preset_info['vocab'],
                                    name=preset_info['name'])
