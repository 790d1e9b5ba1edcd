# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers

# MODIFY THIS VARIABLE EVERY TIME A NEW IMPORTABLE CONSTANT IS ADDED
__all__ = [
            'UUID_ORDER',
            'DEFAULT_K',
            'DEFAULT_DIMENSION',
            'DEFAULT_HASH_SEED',
            'DEFAULT_HIDDEN',
            'DEFAULT_EMBED',
            'DIRECTION_EPSILON',
            'QUATERNION_EPSILON',
            'DEFAULT_BIND',
            'NO_KNOWLEDGE_ANSWER',
            'UNKNOWN_MATERIAL',
            'CHECKPOINT_FORMAT',
            'CHECKPOINT_VERSION',
            'SCENE_PRESETS',
            ]


UUID_ORDER = 6
"""number of uuid digits appended to object ids for logging. default is 6"""

DEFAULT_K = 6
"""number of knowledge entries retrieved per question"""

# ------------------ Embedding / towers ------------------
DEFAULT_DIMENSION = 256
"""length D of the hashed base embedding"""

DEFAULT_HASH_SEED = 0
"""seed mixed into every feature hash"""

DEFAULT_HIDDEN = 128
"""hidden width H of each tower"""

DEFAULT_EMBED = 64
"""output width E shared by the question and information towers"""

# ------------------ Spatial ------------------
DIRECTION_EPSILON = 1e-9
"""dead-zone around zero for the front/back and left/right terms"""

QUATERNION_EPSILON = 1e-12
"""quaternions with a norm at or below this are degenerate"""

# ------------------ Service / answers ------------------
DEFAULT_BIND = "127.0.0.1:7077"
"""default host:port of the query server"""

NO_KNOWLEDGE_ANSWER = "no relevant knowledge retrieved"
"""answer emitted when no retrieved entry matches the question"""

UNKNOWN_MATERIAL = "unknown"
"""explicit value stored for objects without a material"""

CHECKPOINT_FORMAT = "scenerag-two-tower"
CHECKPOINT_VERSION = 1


# ------------------ Scene presets ------------------
SCENE_PRESETS = {
    'villa_interior' : {
        'name' : 'villa interior',
        'n_categories' : 28,
        'n_instances' : 37,
        'vocab' : ['sofa', 'armchair', 'low round table', 'dining table',
                    'dining chair', 'bedroom door', 'courtyard door', 'towel',
                    'bed', 'pillow', 'lamp', 'floor lamp', 'bookshelf', 'vase',
                    'painting', 'mirror', 'rug', 'television', 'fireplace',
                    'wardrobe', 'nightstand', 'plant', 'curtain', 'bathtub',
                    'sink', 'kitchen counter', 'refrigerator', 'stool'],
        },
    'restaurant' : {
        'name' : 'restaurant',
        'n_categories' : 19,
        'n_instances' : 32,
        'vocab' : ['table', 'chair', 'tray', 'cash register', 'menu board',
                    'soda machine', 'trash bin', 'napkin holder', 'booth',
                    'counter', 'fryer', 'grill', 'ketchup bottle', 'cup',
                    'burger', 'door', 'window', 'high chair', 'ceiling fan'],
        },
    'grocery_store' : {
        'name' : 'grocery store',
        'n_categories' : 18,
        'n_instances' : 34,
        'vocab' : ['shelf', 'shopping cart', 'basket', 'freezer', 'checkout counter',
                    'apple crate', 'bread rack', 'milk carton', 'cereal box',
                    'scale', 'price tag', 'cash register', 'banana bunch',
                    'water bottle', 'door', 'sign', 'fridge', 'watermelon'],
        },
    'office' : {
        'name' : 'office',
        'n_categories' : 18,
        'n_instances' : 31,
        'vocab' : ['desk', 'office chair', 'monitor', 'keyboard', 'printer',
                    'clock', 'lamp', 'bookshelf', 'filing cabinet', 'whiteboard',
                    'plant', 'trash can', 'sofa', 'coffee table', 'door',
                    'window', 'telephone', 'water cooler'],
        },
    'viking_village' : {
        'name' : 'viking village',
        'n_categories' : 10,
        'n_instances' : 30,
        'vocab' : ['house', 'barrel', 'cart', 'boat', 'torch', 'shield', 'axe',
                    'fence', 'well', 'bench'],
        },
}
"""category vocabularies and object statistics of the five reference scenes"""
