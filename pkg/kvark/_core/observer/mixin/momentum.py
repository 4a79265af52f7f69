from typing import Optional, Tuple

from kvark._core._type_spec import FloatArray
from kvark._core.observer.recursion import virtual_measurement
from kvark._core.protocol.observer_protocol import ObserverProtocol


class MomentumMixin(ObserverProtocol):
    """
    Mixin that turns one measured sample into the momentum terms of the discrete
    momentum balance and the residual-compensated virtual measurement.
    """

    def _momentum_terms(
        self, q: FloatArray, dq: FloatArray, tau_m: FloatArray
    ) -> Tuple[FloatArray, FloatArray]:
        """Generalised momentum x_k = M(q)q̇ and momentum input u_k = Cᵀq̇ − g + τ_m."""
        arm = self._get_arm()
        return arm.generalized_momentum(q, dq), arm.momentum_input(q, dq, tau_m)

    def _compensated_measurement(
        self, x_k: FloatArray, dq: FloatArray
    ) -> Optional[Tuple[FloatArray, FloatArray]]:
        """
        ζ* for the current sample together with the residual-model covariance Σ_*.

        Returns None while no previous sample is stored.
        """
        state = self._get_state()
        if state.x_prev is None:
            return None
        mu_star, sigma_star = self._residual_terms(dq)
        zeta = virtual_measurement(
            x_k, state.x_prev, state.u_prev, mu_star, self._get_config().t_s
        )
        return zeta, sigma_star
