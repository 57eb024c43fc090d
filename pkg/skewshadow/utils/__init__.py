"""Utility modules for skewshadow.

``skewshadow.utils.config`` depends on the model layer and is imported
directly rather than re-exported here.
"""

from skewshadow.utils.exceptions import *

__all__ = [
    "SkewShadowError",
    "ParameterError",
    "ConfigurationError",
    "InstanceFormatError",
    "SolverError",
    "ConsistencyError",
]
