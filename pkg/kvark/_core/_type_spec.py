from typing import Any, Callable, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer
from typing_extensions import Annotated

FloatArray = npt.NDArray[np.float64]
StateTriple = Tuple[FloatArray, FloatArray, FloatArray]
ReferenceCallable = Callable[[float], StateTriple]
TorqueProfile = Callable[[float], FloatArray]


def _as_readonly_array(value: Any) -> FloatArray:
    array = np.array(value, dtype=np.float64)
    array.flags.writeable = False
    return array


def _array_to_list(value: FloatArray) -> Any:
    return np.asarray(value).tolist()


Array = Annotated[
    np.ndarray,
    BeforeValidator(_as_readonly_array),
    PlainSerializer(_array_to_list, return_type=list, when_used="json"),
]


class KvarkModel(BaseModel):
    """
    Base class for every Kvark data model: immutable, numpy-aware and JSON-serialisable.
    """

    model_config = ConfigDict(
        arbitrary_types_allowed=True, frozen=True, extra="forbid"
    )
