from typing import Optional, Union
from pathlib import Path

from loguru import logger

from kvark._common._exceptions._constants import (
    INFEASIBLE_POPULATION_MSG,
    JOINT_LIMIT_VIOLATION_MSG,
    SCHEMA_VERSION_MSG,
    SINGULAR_CONFIGURATION_MSG,
    STAGE_FAILED_MSG,
)


class BaseKvarkException(Exception):
    """
    Base exception class for Kvark errors.

    The exception logs its message at debug level when it is constructed, so that
    failures deep inside a pipeline stage leave a trace even if they are caught.

    Args:
        message (str): The error message to log.
    """

    def __init__(self, message: str) -> None:
        self._message = message
        logger.debug(f"{self.__class__.__name__}: {message}")
        super().__init__(message)

    @property
    def message(self) -> str:
        """
        Get the error message.

        Returns:
            str: The error message.
        """
        return self._message

    def __str__(self) -> str:
        """
        Return a string representation of the exception.

        Returns:
            str: A string representation of the exception class and its message.
        """
        return f"{self.__class__.__name__}: {self.message}"


class InvalidInputError(BaseKvarkException):
    """
    Raised when an input is non-finite or violates an operation precondition.
    """

    pass


class SeriesMismatchError(InvalidInputError):
    """
    Raised when two time series that must line up differ in length or sampling period.
    """

    pass


class JointLimitViolationError(BaseKvarkException):
    """
    Raised by the simulator when the realised trajectory leaves the joint limits.

    Args:
        joint (int): Zero-based index of the offending joint.
        time (float): Simulation time of the violation in seconds.
        quantity (str): Which limit was violated (`q`, `dq` or `ddq`).
        value (float): The offending value.
        lower (float): Lower bound of the violated limit.
        upper (float): Upper bound of the violated limit.
    """

    def __init__(
        self,
        joint: int,
        time: float,
        quantity: str = "q",
        value: float = float("nan"),
        lower: float = float("-inf"),
        upper: float = float("inf"),
    ) -> None:
        self.joint = joint
        self.time = time
        message = JOINT_LIMIT_VIOLATION_MSG.format(
            joint=joint,
            time=time,
            quantity=quantity,
            value=value,
            lower=lower,
            upper=upper,
        )
        super().__init__(message)


class SingularConfigurationError(BaseKvarkException):
    """
    Raised when a wrench is requested at a configuration where the Jacobian loses row rank.
    """

    def __init__(self, q: str, rank: int, rows: int) -> None:
        super().__init__(SINGULAR_CONFIGURATION_MSG.format(q=q, rank=rank, rows=rows))


class InfeasiblePopulationError(BaseKvarkException):
    """
    Raised when the genetic algorithm cannot seed a feasible initial population.
    """

    def __init__(self, index: int, attempts: int) -> None:
        super().__init__(
            INFEASIBLE_POPULATION_MSG.format(index=index, attempts=attempts)
        )


class InsufficientDataError(InvalidInputError):
    """
    Raised when a fit receives fewer rows than it needs.
    """

    pass


class IllConditionedReferenceError(BaseKvarkException):
    """
    Raised when a regularised Gram matrix stays indefinite after jitter escalation.
    """

    pass


class InnovationCovarianceError(BaseKvarkException):
    """
    Raised when the innovation covariance of a Kalman update cannot be factorised.
    """

    pass


class MalformedFileError(BaseKvarkException):
    """
    Raised when a model, config or dataset file cannot be parsed or validated.
    """

    pass


class SchemaVersionError(MalformedFileError):
    """
    Raised when a persisted document carries an unsupported schema version.
    """

    def __init__(
        self, found: object, expected: int, path: Optional[Union[str, Path]] = None
    ) -> None:
        self.found = found
        self.expected = expected
        super().__init__(
            SCHEMA_VERSION_MSG.format(
                found=found, expected=expected, path=path or "<memory>"
            )
        )


class ConfigurationError(BaseKvarkException):
    """
    Raised when an experiment configuration is incomplete or inconsistent.
    """

    pass


class StageError(BaseKvarkException):
    """
    Wraps a failure with the name of the pipeline stage it happened in.

    Args:
        stage (str): The pipeline stage (`excite`, `simulate`, `train`, `estimate`, `report`).
        cause (Exception): The underlying error.
    """

    def __init__(self, stage: str, cause: Exception) -> None:
        self.stage = stage
        self.cause = cause
        detail = cause.message if isinstance(cause, BaseKvarkException) else str(cause)
        super().__init__(STAGE_FAILED_MSG.format(stage=stage, message=detail))
