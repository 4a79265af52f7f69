from pathlib import Path

import pytest

from kvark._core.models.experiment import ExperimentConfig

SMALL_EXPERIMENT = """
seed = 3
bench_seeds = [0, 1]
observers = ["kvark", "gmr_gp", "akf", "static_kf"]

[arm]
kind = "planar2"

[[arm.links]]
mass = 2.0
length = 0.5
com = 0.25
inertia = 0.05

[[arm.links]]
mass = 1.5
length = 0.4
com = 0.2
inertia = 0.03

[[arm.limits]]
q_min = -1.2
q_max = 1.2
dq_max = 2.5
ddq_max = 10.0

[[arm.limits]]
q_min = 0.3
q_max = 2.5
dq_max = 2.5
ddq_max = 10.0

[friction]
coulomb = [1.0, 0.6]
viscous = [0.5, 0.3]
stribeck = [0.4, 0.2]
stribeck_velocity = [0.1, 0.1]
noise_std_base = [0.02, 0.02]
noise_std_slope = [0.1, 0.08]

[excitation]
harmonics = 3
period = 4.0
grid_points = 50
trajectories = 1
duration = 4.0

[ga]
population_size = 6
generations = 3

[residual_model]
components = 3
support_points = 15

[scenario]
t_s = 0.004
duration = 4.0

[[scenario.disturbances]]
t_start = 1.0
joint = 1
torque = 3.0

[[scenario.disturbances]]
t_start = 2.0
joint = 2
torque = -2.0
"""


@pytest.fixture
def small_config_file(tmp_path) -> Path:
    path = tmp_path / "small.toml"
    path.write_text(SMALL_EXPERIMENT)
    return path


@pytest.fixture
def small_config(small_config_file, tmp_path) -> ExperimentConfig:
    return ExperimentConfig.from_toml(small_config_file).with_output_dir(tmp_path / "run")
