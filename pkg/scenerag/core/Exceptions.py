# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers



class SceneRAGError(RuntimeError):
    """Base class of every error raised by SceneRAG"""
    pass


class InvalidParameterError(SceneRAGError, ValueError):
    """Error raised when a caller passes an out of range parameter"""
    pass


# ---------------------------------- scenes ----------------------------------
class SceneError(SceneRAGError):
    """Error raised while loading or building a Scene"""
    pass


class SceneParseError(SceneError):
    """Error raised when a scene file is malformed"""
    pass


class SceneValidationError(SceneError):
    """Error raised when scene contents violate the object invariants"""
    pass


# --------------------------------- spatial ----------------------------------
class DegenerateQuaternionError(SceneRAGError, ValueError):
    """Error raised for quaternions too close to zero to normalize"""
    pass


class NonFiniteInputError(SceneRAGError, ValueError):
    """Error raised when a vector contains nan or inf"""
    pass


# ------------------------------ model / towers ------------------------------
class ModelError(SceneRAGError):
    """Error raised within a TwoTowerModel"""
    pass


class CheckpointError(ModelError):
    """Error raised when a checkpoint can't be read or doesn't match"""
    pass


class DivergenceError(ModelError):
    """Error raised when training produces a non-finite loss"""
    pass


class ZeroEmbeddingError(SceneRAGError, ValueError):
    """Error raised when a cosine similarity involves a zero vector"""
    pass


# ------------------------------ knowledge base ------------------------------
class DatabaseError(SceneRAGError):
    """Error raised within a KnowledgeDatabase"""
    pass


class UnknownInstanceError(DatabaseError, KeyError):
    """Error raised when an instance id isn't in the database"""
    def __str__(self):
        # KeyError quotes its message, keep it readable
        return RuntimeError.__str__(self)


class EmptyIndexError(DatabaseError):
    """Error raised when retrieving from a database without visible objects"""
    pass


# ---------------------------------- corpus ----------------------------------
class CorpusError(SceneRAGError):
    """Error raised while generating questions or training samples"""
    pass


class InsufficientSceneError(CorpusError):
    """Error raised when a scene can't supply the requested samples"""
    pass


class DanglingInstanceError(CorpusError):
    """Error raised when a question refers to an instance not in the scene"""
    pass


# ------------------------------ service / eval ------------------------------
class PipelineError(SceneRAGError):
    """Error raised within a query Pipeline"""
    pass


class StageError(SceneRAGError):
    """Error raised within a Stage"""
    pass


class ServiceError(SceneRAGError):
    """Error raised by the query server or client"""
    pass


class EvalError(SceneRAGError):
    """Error raised by the evaluation harness"""
    pass


class ConfigurationMismatchError(EvalError):
    """Error raised when two databases can't be compared"""
    pass
