"""Model parameters for the linear skew product over the full 2-shift.

The fiber map is x -> lambda_{t(omega)} * x, where t(omega) is the zeroth
symbol of the base point. For noise amplitudes below the symbolic metric's
resolution a d-perturbation cannot change t(omega), so the bit sequence of a
random pseudotrajectory is a fair-coin sequence and the whole problem reduces
to the scalar recursion in the fiber. Nothing in this package represents the
shift space itself.
"""

import math
from dataclasses import dataclass
from typing import Union

from skewshadow.utils.exceptions import ParameterError

# |a0 + a1| below this is treated as lambda0 * lambda1 == 1
DRIFT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Fiber multipliers with their log-rates and the drift of the walk."""

    lambda0: float
    lambda1: float
    a0: float
    a1: float
    v: float

    @property
    def is_expanding(self) -> bool:
        """True when lambda0 * lambda1 > 1 (positive drift)."""
        return self.v > 0

    def inverse(self) -> "ModelParams":
        """Parameters of the inverse map, (1/lambda1, 1/lambda0)."""
        return validate(1.0 / self.lambda1, 1.0 / self.lambda0)


@dataclass(frozen=True)
class NormalizedParams:
    """Parameters with positive drift, remembering whether f was inverted."""

    params: ModelParams
    inverted: bool = False

    def __post_init__(self):
        if not self.params.v > 0:
            raise ParameterError(
                "normalized parameters require positive drift",
                constraint="lambda0 * lambda1 > 1",
            )

    @property
    def a0(self) -> float:
        return self.params.a0

    @property
    def a1(self) -> float:
        return self.params.a1

    @property
    def v(self) -> float:
        return self.params.v


def validate(lambda0: float, lambda1: float) -> ModelParams:
    """Check the multipliers on raw input and derive the log-rates.

    Raises:
        ParameterError: naming the violated constraint.
    """
    try:
        lambda0 = float(lambda0)
        lambda1 = float(lambda1)
    except (TypeError, ValueError):
        raise ParameterError(
            f"multipliers must be real numbers, got ({lambda0!r}, {lambda1!r})",
            constraint="finite",
        )

    if not (math.isfinite(lambda0) and math.isfinite(lambda1)):
        raise ParameterError(
            f"multipliers must be finite, got ({lambda0}, {lambda1})",
            constraint="finite",
        )
    if not 0.0 < lambda0 < 1.0:
        raise ParameterError(
            f"lambda0 = {lambda0} violates 0 < lambda0 < 1",
            constraint="0 < lambda0 < 1",
        )
    if not lambda1 > 1.0:
        raise ParameterError(
            f"lambda1 = {lambda1} violates lambda1 > 1",
            constraint="lambda1 > 1",
        )

    a0 = math.log(lambda0)
    a1 = math.log(lambda1)
    if abs(a0 + a1) < DRIFT_TOLERANCE:
        raise ParameterError(
            f"lambda0 * lambda1 = {lambda0 * lambda1} violates lambda0 * lambda1 != 1 "
            "(zero drift)",
            constraint="lambda0 * lambda1 != 1",
        )

    return ModelParams(lambda0=lambda0, lambda1=lambda1, a0=a0, a1=a1, v=(a0 + a1) / 2)


def normalize(params: Union[ModelParams, NormalizedParams]) -> NormalizedParams:
    """Return parameters with v > 0, swapping to the inverse map if needed."""
    if isinstance(params, NormalizedParams):
        return params
    if params.v > 0:
        return NormalizedParams(params=params, inverted=False)
    return NormalizedParams(params=params.inverse(), inverted=True)
