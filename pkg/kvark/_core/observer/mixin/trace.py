import numpy as np
from loguru import logger

from kvark._core.models.observer import EstimateTrace
from kvark._core.models.trajectory import SampledTrajectory
from kvark._common._exceptions.kvark_exception import SeriesMismatchError
from kvark._core.protocol.observer_protocol import ObserverProtocol


class TraceMixin(ObserverProtocol):
    """
    Mixin that replays a recorded trajectory through `step` and records the per-sample
    estimate, the covariance diagonals and the NIS.
    """

    def run(self, trajectory: SampledTrajectory) -> EstimateTrace:
        """
        Estimate the external torque along a whole trajectory, starting from the prior.

        Args:
            trajectory (SampledTrajectory): Measured q, q̇ and τ_m; q̈ is not used.

        Returns:
            EstimateTrace: One row per sample. NIS is NaN on the initialising sample.
        """
        config = self._get_config()
        if trajectory.n != config.n:
            raise SeriesMismatchError(
                f"trajectory has {trajectory.n} joints, observer expects {config.n}"
            )
        if not np.isclose(trajectory.t_s, config.t_s, rtol=1e-9, atol=0.0):
            raise SeriesMismatchError(
                f"trajectory sampled at {trajectory.t_s} s, observer configured for {config.t_s} s"
            )

        samples = len(trajectory)
        tau_hat = np.empty((samples, config.n))
        p_diag = np.empty((samples, config.n))
        sigma_d_diag = np.empty((samples, config.n))
        sigma_nu_diag = np.empty((samples, config.n))
        nis = np.full(samples, np.nan)

        self.reset()
        for k in range(samples):
            estimate, diagnostics = self.step(
                trajectory.q[k], trajectory.dq[k], trajectory.tau_m[k]
            )
            state = self._get_state()
            tau_hat[k] = estimate
            p_diag[k] = np.diag(state.P)
            sigma_d_diag[k] = np.diag(state.sigma_d)
            sigma_nu_diag[k] = np.diag(state.sigma_nu)
            if diagnostics is not None:
                nis[k] = diagnostics.nis

        logger.debug(f"{self.name}: estimated {samples} samples")
        return EstimateTrace(
            observer=self.name,
            t=trajectory.t,
            tau_hat=tau_hat,
            p_diag=p_diag,
            sigma_d_diag=sigma_d_diag,
            sigma_nu_diag=sigma_nu_diag,
            nis=nis,
        )
