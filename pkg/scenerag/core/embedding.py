# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
from abc import ABCMeta, abstractmethod
import functools
import hashlib
import re

import numpy as np

from ..Logger import get_logger
from .constants import DEFAULT_DIMENSION, DEFAULT_HASH_SEED
from .Exceptions import InvalidParameterError

EMBED_LOGGER = get_logger('embedding')

TOKEN_PATTERN = re.compile(r'[^\W\d_]+|\d+')
"""letter runs and digit runs; everything else (underscore included) separates"""


def tokenize(text):
    """lowercases and splits text into letter runs and digit runs

    Example:
        >>> import scenerag as sr
        >>> sr.tokenize("Where is chair_1?")
        ['where', 'is', 'chair', '1']
    """
    return TOKEN_PATTERN.findall( text.lower() )


def info_text(info):
    """the text embedded for an information key I = (category, instance)

    Example:
        >>> import scenerag as sr
        >>> sr.info_text(("chair", "chair_1"))
        'chair chair_1'
    """
    category, instance = info
    return "{} {}".format(category, instance)


def token_features(token):
    """the hashed features of one token: the token itself and the character
    trigrams of the token wrapped in '<' and '>'"""
    padded = '<' + token + '>'
    trigrams = [padded[i:i+3] for i in range(len(padded) - 2)]
    return ['t:' + token] + ['g:' + tri for tri in trigrams]


################################################################################
class Embedder(metaclass=ABCMeta):
    """interface of a deterministic text embedder

    Subclasses must overload `embed` and `config`. `embed` must return the
    same vector for the same text and configuration in every process.
    """
    def __init__(self, dimension):
        if int(dimension) < 1:
            raise InvalidParameterError("embedder dimension must be positive")
        self.dimension = int(dimension)

    ############################################################################
    @abstractmethod
    def embed(self, text):
        """returns a 1D float64 vector of length `dimension`"""
        pass

    ############################################################################
    @abstractmethod
    def config(self):
        """returns a JSON serializable dict that rebuilds this embedder"""
        pass

    ############################################################################
    def embed_batch(self, texts):
        """stacks the embeddings of several texts into an (n, dimension) array"""
        if len(texts) == 0:
            return np.zeros((0, self.dimension), dtype=np.float64)
        return np.stack([self.embed(t) for t in texts])

    ############################################################################
    def __call__(self, text):
        return self.embed(text)


################################################################################
class HashEmbedder(Embedder):
    """feature-hashing embedder over tokens and character trigrams

    Each feature hashes (keyed blake2b) to a bucket in [0, D) and a sign in
    {-1, +1}; signed counts accumulate and the result is L2 normalized when
    non-zero. Lexically close strings share trigrams and so get close vectors.

    Attributes:
        dimension(int): vector length D
        seed(int): hash key, changing it reshuffles every bucket

    Example:
        >>> import scenerag as sr
        >>> emb = sr.HashEmbedder()
        >>> bool( (emb.embed("chair 1") == emb.embed("chair_1")).all() )
        True
    """
    def __init__(self, dimension=DEFAULT_DIMENSION, seed=DEFAULT_HASH_SEED):
        super().__init__(dimension)
        self.seed = int(seed)

    ############################################################################
    def embed(self, text):
        """hash-embeds text, the returned array is read-only"""
        return _hash_embed(text, self.dimension, self.seed)

    ############################################################################
    def config(self):
        return {'type' : 'hash', 'dimension' : self.dimension, 'seed' : self.seed}

    ############################################################################
    def __eq__(self, other):
        return isinstance(other, HashEmbedder) and self.config() == other.config()

    def __hash__(self):
        return hash( (self.dimension, self.seed) )

    def __repr__(self):
        return "HashEmbedder(dimension={}, seed={})".format(self.dimension, self.seed)


def _feature_hash(feature, seed):
    key = int(seed).to_bytes(8, 'little', signed=True)
    digest = hashlib.blake2b(feature.encode('utf-8'), digest_size=8, key=key).digest()
    return int.from_bytes(digest, 'little')


@functools.lru_cache(maxsize=65536)
def _hash_embed(text, dimension, seed):
    vec = np.zeros(dimension, dtype=np.float64)
    for token in tokenize(text):
        for feature in token_features(token):
            h = _feature_hash(feature, seed)
            # bucket from the low bits, sign from the top bit
            sign = -1.0 if (h >> 63) & 1 else 1.0
            vec[h % dimension] += sign

    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    vec.setflags(write=False)
    return vec


def hash_embed(text, dimension=DEFAULT_DIMENSION, seed=DEFAULT_HASH_SEED):
    """functional form of :meth:`HashEmbedder.embed`"""
    return _hash_embed(text, int(dimension), int(seed))


def embedder_from_config(config):
    """rebuilds an embedder from :meth:`Embedder.config` output"""
    kind = config.get('type', 'hash')
    if kind != 'hash':
        msg = "unknown embedder type '{}'".format(kind)
        EMBED_LOGGER.error(msg)
        raise InvalidParameterError(msg)
    return HashEmbedder(config['dimension'], config['seed'])
