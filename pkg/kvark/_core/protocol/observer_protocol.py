from typing import TYPE_CHECKING, Optional, Protocol, Tuple

from kvark._core._type_spec import FloatArray

if TYPE_CHECKING:
    from kvark._core._managers.residual_model_manager import ResidualModelManager
    from kvark._core.dynamics.manipulator import ManipulatorModel
    from kvark._core.models.observer import FilterConfig, FilterState, StepDiagnostics


class ObserverProtocol(Protocol):
    """
    Protocol that specifies the required methods and attributes
    for the observer mixins to work.
    """

    name: str

    def _get_arm(self) -> "ManipulatorModel": ...

    def _get_config(self) -> "FilterConfig": ...

    def _get_residual_models(self) -> "ResidualModelManager": ...

    def _get_state(self) -> "FilterState": ...

    def _residual_terms(self, dq: FloatArray) -> Tuple[FloatArray, FloatArray]: ...

    def reset(self) -> None: ...

    def step(
        self, q: FloatArray, dq: FloatArray, tau_m: FloatArray
    ) -> Tuple[FloatArray, Optional["StepDiagnostics"]]: ...
