JOINT_LIMIT_VIOLATION_MSG = "Joint {joint} left its limits at t={time:.6f} s ({quantity}={value:.6g}, allowed [{lower:.6g}, {upper:.6g}])."
SINGULAR_CONFIGURATION_MSG = "The Jacobian is rank deficient at q={q} (rank {rank} < {rows}); no unique wrench exists in this configuration."
INFEASIBLE_POPULATION_MSG = "Could not draw a feasible initial candidate for individual {index} within {attempts} rejection samples. Loosen the joint limits or reduce the coefficient scale."
SCHEMA_VERSION_MSG = "Unsupported schema version {found} in {path}; this build reads version {expected}."
STAGE_FAILED_MSG = "[{stage}] {message}"
