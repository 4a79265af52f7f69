from .._common._exceptions.kvark_exception import (
    BaseKvarkException,
    ConfigurationError,
    IllConditionedReferenceError,
    InfeasiblePopulationError,
    InnovationCovarianceError,
    InsufficientDataError,
    InvalidInputError,
    JointLimitViolationError,
    MalformedFileError,
    SchemaVersionError,
    SeriesMismatchError,
    SingularConfigurationError,
    StageError,
)

__all__ = [
    "BaseKvarkException",
    "ConfigurationError",
    "IllConditionedReferenceError",
    "InfeasiblePopulationError",
    "InnovationCovarianceError",
    "InsufficientDataError",
    "InvalidInputError",
    "JointLimitViolationError",
    "MalformedFileError",
    "SchemaVersionError",
    "SeriesMismatchError",
    "SingularConfigurationError",
    "StageError",
]
