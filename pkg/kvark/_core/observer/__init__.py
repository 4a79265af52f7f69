from kvark._core.observer.observers import (
    OBSERVERS,
    GmrGpObserver,
    InnovationAkfObserver,
    KvarkObserver,
    Observer,
    StaticKfObserver,
    build_observer,
)
from kvark._core.observer.recursion import (
    innovation_akf_step,
    iw_time_update,
    kf_step,
    kvark_step,
    kvark_update,
    measurement_covariance,
    nis_band,
    nis_consistency,
    static_kf_step,
    update_empirical_noise,
    vb_update,
    virtual_measurement,
)

__all__ = [
    "OBSERVERS",
    "GmrGpObserver",
    "InnovationAkfObserver",
    "KvarkObserver",
    "Observer",
    "StaticKfObserver",
    "build_observer",
    "innovation_akf_step",
    "iw_time_update",
    "kf_step",
    "kvark_step",
    "kvark_update",
    "measurement_covariance",
    "nis_band",
    "nis_consistency",
    "static_kf_step",
    "update_empirical_noise",
    "vb_update",
    "virtual_measurement",
]
