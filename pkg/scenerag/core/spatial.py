# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
"""user-centred spatial facts: distances, local-frame positions and the
front/back/left/right phrase derived from them"""
from dataclasses import dataclass

import numpy as np

from ..Logger import get_logger
from .constants import DIRECTION_EPSILON, QUATERNION_EPSILON
from .Exceptions import DegenerateQuaternionError, NonFiniteInputError

SPATIAL_LOGGER = get_logger('spatial')

COINCIDENT_PHRASE = "at the player's position"
"""qualitative text used when the object sits on the user's planar position"""


################################################################################
#                                 helpers
################################################################################
def as_vector(values, length, name='vector'):
    """converts values into a finite float64 numpy vector of the given length

    Args:
        values(array-like): the components
        length(int): required number of components
        name(str): name used in error messages

    Returns:
        np.ndarray: 1D float64 array
    """
    try:
        vec = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as e:
        msg = "{} must hold {} numbers: {}".format(name, length, e)
        SPATIAL_LOGGER.error(msg)
        raise NonFiniteInputError(msg)
    if vec.shape != (length,):
        msg = "{} must have {} components, not shape {}".format(name, length, vec.shape)
        SPATIAL_LOGGER.error(msg)
        raise NonFiniteInputError(msg)
    if not np.all( np.isfinite(vec) ):
        msg = "{} has non-finite components: {}".format(name, vec.tolist())
        SPATIAL_LOGGER.error(msg)
        raise NonFiniteInputError(msg)
    return vec


def normalize_quaternion(q, tolerance=1e-12):
    """scales an (x, y, z, w) quaternion to unit length

    Quaternions whose norm is already within `tolerance` of 1 are returned
    unchanged, so normalizing twice never perturbs the stored components.

    Args:
        q(array-like): quaternion ordered (x, y, z, w)
        tolerance(float): how far from 1 the norm may be before rescaling

    Returns:
        tuple: the unit quaternion as 4 python floats
    """
    vec = as_vector(q, 4, 'quaternion')
    norm = float( np.linalg.norm(vec) )
    if norm <= QUATERNION_EPSILON:
        msg = "degenerate quaternion {} (norm {})".format(vec.tolist(), norm)
        SPATIAL_LOGGER.error(msg)
        raise DegenerateQuaternionError(msg)

    if abs(norm - 1.0) > tolerance:
        vec = vec / norm
    return tuple( float(c) for c in vec )


################################################################################
#                                 operations
################################################################################
def quat_to_rotation_matrix(q):
    """converts an (x, y, z, w) quaternion to a 3x3 rotation matrix

    The quaternion is normalized first, so any non-degenerate scaling of a
    rotation yields the same matrix, as does its negation.

    Args:
        q(array-like): quaternion ordered (x, y, z, w)

    Returns:
        np.ndarray: 3x3 orthogonal matrix with determinant +1

    Example:
        >>> import scenerag as sr
        >>> sr.quat_to_rotation_matrix((0, 0, 1, 0)).round(12).tolist()
        [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]
    """
    vec = as_vector(q, 4, 'quaternion')
    norm = float( np.linalg.norm(vec) )
    if norm <= QUATERNION_EPSILON:
        msg = "degenerate quaternion {} (norm {})".format(vec.tolist(), norm)
        SPATIAL_LOGGER.error(msg)
        raise DegenerateQuaternionError(msg)

    x, y, z, w = vec / norm
    return np.array([
        [1 - 2*(y*y + z*z),     2*(x*y - z*w),     2*(x*z + y*w)],
        [    2*(x*y + z*w), 1 - 2*(x*x + z*z),     2*(y*z - x*w)],
        [    2*(x*z - y*w),     2*(y*z + x*w), 1 - 2*(x*x + y*y)],
        ], dtype=np.float64)


def euclidean_distance(p_o, p_u):
    """distance between an object position and a user position

    Example:
        >>> import scenerag as sr
        >>> sr.euclidean_distance((3, 4, 0), (0, 0, 0))
        5.0
    """
    diff = as_vector(p_o, 3, 'object position') - as_vector(p_u, 3, 'user position')
    return float( np.sqrt( np.dot(diff, diff) ) )


def qualitative_direction(p_quant_rel, epsilon=DIRECTION_EPSILON):
    """describes a local-frame position with front/back and left/right terms

    The second component (y) decides front/back and the first (x) decides
    left/right; the third is ignored. Front/back comes first in the phrase.

    Args:
        p_quant_rel(array-like): position in the user's local frame
        epsilon(float): dead-zone half width around zero

    Returns:
        str: e.g. "front right", "back", or "at the player's position"
    """
    x, y, _ = as_vector(p_quant_rel, 3, 'relative position')

    terms = []
    if y > epsilon:
        terms.append('front')
    elif y < -epsilon:
        terms.append('back')

    if x > epsilon:
        terms.append('right')
    elif x < -epsilon:
        terms.append('left')

    if not terms:
        return COINCIDENT_PHRASE
    return ' '.join(terms)


@dataclass(frozen=True)
class RelativePosition(object):
    """an object's position as seen from the user

    Attributes:
        quantitative(tuple): R^-1 (p_o - p_u) in the user's local frame
        distance(float): Euclidean distance between object and user
        qualitative(str): direction phrase from :func:`qualitative_direction`
    """
    quantitative: tuple
    distance: float
    qualitative: str

    ############################################################################
    @property
    def coincident(self):
        """bool: whether the object sits at the user's planar position"""
        return self.qualitative == COINCIDENT_PHRASE

    ############################################################################
    def describe(self, instance):
        """renders the canonical direction sentence for an instance"""
        if self.coincident:
            return "{} is at the player's position".format(instance)
        return "{} is at the {} of the player".format(instance, self.qualitative)


def relative_position(p_o, user):
    """computes the spatial facts of an object position against a user pose

    Args:
        p_o(array-like): object position in the global frame
        user(:obj:`UserPose`): anything with `position` and `orientation`

    Returns:
        :obj:`RelativePosition`: local-frame position, distance and direction
    """
    rot = quat_to_rotation_matrix(user.orientation)
    diff = as_vector(p_o, 3, 'object position') - as_vector(user.position, 3, 'user position')
    # R is orthogonal, R^-1 == R^T
    local = rot.T @ diff
    return RelativePosition(quantitative=tuple( float(c) for c in local ),
                            distance=float( np.sqrt( np.dot(diff, diff) ) ),
                            qualitative=qualitative_direction(local))
