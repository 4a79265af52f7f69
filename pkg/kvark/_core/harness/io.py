import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Type, TypeVar, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from kvark._common._exceptions.kvark_exception import (
    MalformedFileError,
    SchemaVersionError,
)
from kvark._common.constants import CSV_FLOAT_FORMAT, SCHEMA_VERSION
from kvark._core._type_spec import KvarkModel
from kvark._core.models.excitation import FourierTrajectoryParams
from kvark._core.models.experiment import ExperimentConfig
from kvark._core.models.mixture import GmmModel
from kvark._core.models.observer import EstimateTrace, FilterConfig
from kvark._core.models.regression import GpDocument, KmpDocument
from kvark._core.models.report import BenchReport, MetricsReport, ResidualFitReport
from kvark._core.models.trajectory import SampledTrajectory

PathLike = Union[str, Path]
Document = TypeVar("Document", bound=KvarkModel)

DOCUMENT_KINDS: Dict[str, Type[KvarkModel]] = {
    "gmm": GmmModel,
    "kmp": KmpDocument,
    "gp": GpDocument,
    "fourier": FourierTrajectoryParams,
    "filter_config": FilterConfig,
    "experiment_config": ExperimentConfig,
    "metrics_report": MetricsReport,
    "residual_fit": ResidualFitReport,
    "bench_report": BenchReport,
}
KIND_OF: Dict[Type[KvarkModel], str] = {cls: kind for kind, cls in DOCUMENT_KINDS.items()}

TS_PREFIX = "# ts="
OBSERVER_PREFIX = "# observer="


def dumps_document(document: KvarkModel) -> str:
    """Serialise a model as `{"schema_version", "kind", "data"}` JSON text."""
    kind = KIND_OF.get(type(document))
    if kind is None:
        raise MalformedFileError(f"{type(document).__name__} has no document kind")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "data": document.model_dump(mode="json"),
    }
    return json.dumps(payload, indent=2) + "\n"


def loads_document(
    text: str, expected: Type[Document], path: Optional[PathLike] = None
) -> Document:
    """
    Parse and validate a document produced by `dumps_document`.

    Raises:
        SchemaVersionError: If the version tag is not the one this build writes.
        MalformedFileError: If the text is not JSON, the kind does not match `expected`
            or the payload fails validation.
    """
    where = path or "<memory>"
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedFileError(f"{where} is not a JSON document: {e}") from e
    if not isinstance(payload, dict) or not {"schema_version", "kind", "data"} <= set(payload):
        raise MalformedFileError(
            f"{where} lacks the schema_version / kind / data header"
        )
    version = payload["schema_version"]
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(found=version, expected=SCHEMA_VERSION, path=path)
    kind = KIND_OF.get(expected)
    if payload["kind"] != kind:
        raise MalformedFileError(
            f"{where} holds a '{payload['kind']}' document, expected '{kind}'"
        )
    try:
        return expected.model_validate(payload["data"])
    except ValidationError as e:
        raise MalformedFileError(f"{where} failed validation: {e}") from e


def save_document(document: KvarkModel, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_document(document))
    logger.debug(f"Wrote {KIND_OF[type(document)]} document to {path}")
    return path


def load_document(path: PathLike, expected: Type[Document]) -> Document:
    path = Path(path)
    if not path.exists():
        raise MalformedFileError(f"File not found at {path}")
    return loads_document(path.read_text(), expected, path)


def _joint_columns(prefix: str, n: int) -> List[str]:
    return [f"{prefix}_{j}" for j in range(1, n + 1)]


def _diag_columns(prefix: str, n: int) -> List[str]:
    return [f"{prefix}_{j}{j}" for j in range(1, n + 1)]


def trajectory_header(n: int, with_tau_ext: bool) -> List[str]:
    columns = ["t"]
    for prefix in ("q", "dq", "ddq", "tau_m"):
        columns += _joint_columns(prefix, n)
    if with_tau_ext:
        columns += _joint_columns("tau_ext", n)
    return columns


def estimate_header(n: int) -> List[str]:
    return (
        ["t"]
        + _joint_columns("tauhat", n)
        + _diag_columns("P", n)
        + _diag_columns("Sigma_d", n)
        + _diag_columns("Sigma_nu", n)
        + ["nis"]
    )


def _write_csv(
    path: PathLike, comments: List[str], header: List[str], table: np.ndarray
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        for line in comments:
            f.write(line + "\n")
        f.write(",".join(header) + "\n")
        np.savetxt(f, table, fmt=CSV_FLOAT_FORMAT, delimiter=",")
    return path


def _read_csv(path: PathLike) -> Tuple[Dict[str, str], List[str], np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise MalformedFileError(f"File not found at {path}")
    lines = path.read_text().splitlines()
    comments: Dict[str, str] = {}
    index = 0
    while index < len(lines) and lines[index].startswith("#"):
        key, _, value = lines[index][1:].strip().partition("=")
        comments[key.strip()] = value.strip()
        index += 1
    if index >= len(lines):
        raise MalformedFileError(f"{path} has no header row")
    header = [name.strip() for name in lines[index].split(",")]
    body = [line for line in lines[index + 1 :] if line.strip()]
    try:
        table = np.array(
            [[float(cell) for cell in line.split(",")] for line in body], dtype=float
        )
    except ValueError as e:
        raise MalformedFileError(f"{path} contains a non-numeric cell: {e}") from e
    if table.size == 0:
        table = table.reshape(0, len(header))
    if table.ndim != 2 or table.shape[1] != len(header):
        raise MalformedFileError(
            f"{path} rows do not match its {len(header)}-column header"
        )
    return comments, header, table


def _sampling_period(comments: Dict[str, str], path: PathLike) -> float:
    if "ts" not in comments:
        raise MalformedFileError(f"{path} lacks the leading '{TS_PREFIX}<value>' line")
    try:
        return float(comments["ts"])
    except ValueError as e:
        raise MalformedFileError(f"{path} has an unreadable sampling period") from e


def save_trajectory(trajectory: SampledTrajectory, path: PathLike) -> Path:
    """Write `t,q_*,dq_*,ddq_*,tau_m_*[,tau_ext_*]` with a `# ts=` line and 17 digits."""
    blocks = [trajectory.t[:, None], trajectory.q, trajectory.dq, trajectory.ddq, trajectory.tau_m]
    if trajectory.tau_ext is not None:
        blocks.append(trajectory.tau_ext)
    return _write_csv(
        path,
        [f"{TS_PREFIX}{trajectory.t_s!r}"],
        trajectory_header(trajectory.n, trajectory.tau_ext is not None),
        np.hstack(blocks),
    )


def load_trajectory(path: PathLike) -> SampledTrajectory:
    comments, header, table = _read_csv(path)
    t_s = _sampling_period(comments, path)
    width = len(header) - 1
    if width % 4 == 0 and header == trajectory_header(width // 4, False):
        n, with_tau_ext = width // 4, False
    elif width % 5 == 0 and header == trajectory_header(width // 5, True):
        n, with_tau_ext = width // 5, True
    else:
        raise MalformedFileError(f"{path} does not have a trajectory header")
    blocks = [table[:, 1 + i * n : 1 + (i + 1) * n] for i in range(5 if with_tau_ext else 4)]
    try:
        return SampledTrajectory(
            t_s=t_s,
            t=table[:, 0],
            q=blocks[0],
            dq=blocks[1],
            ddq=blocks[2],
            tau_m=blocks[3],
            tau_ext=blocks[4] if with_tau_ext else None,
        )
    except ValidationError as e:
        raise MalformedFileError(f"{path} is not a valid trajectory: {e}") from e


def save_estimates(trace: EstimateTrace, t_s: float, path: PathLike) -> Path:
    """Write `t,tauhat_*,P_jj,Sigma_d_jj,Sigma_nu_jj,nis` for one observer."""
    table = np.hstack(
        [
            trace.t[:, None],
            trace.tau_hat,
            trace.p_diag,
            trace.sigma_d_diag,
            trace.sigma_nu_diag,
            trace.nis[:, None],
        ]
    )
    return _write_csv(
        path,
        [f"{TS_PREFIX}{t_s!r}", f"{OBSERVER_PREFIX}{trace.observer}"],
        estimate_header(trace.n),
        table,
    )


def load_estimates(path: PathLike) -> Tuple[EstimateTrace, float]:
    comments, header, table = _read_csv(path)
    t_s = _sampling_period(comments, path)
    width = len(header) - 2
    if width <= 0 or width % 4 != 0 or header != estimate_header(width // 4):
        raise MalformedFileError(f"{path} does not have an estimate header")
    n = width // 4
    def block(i: int) -> np.ndarray:
        return table[:, 1 + i * n : 1 + (i + 1) * n]

    try:
        trace = EstimateTrace(
            observer=comments.get("observer", Path(path).stem),
            t=table[:, 0],
            tau_hat=block(0),
            p_diag=block(1),
            sigma_d_diag=block(2),
            sigma_nu_diag=block(3),
            nis=table[:, -1],
        )
    except ValidationError as e:
        raise MalformedFileError(f"{path} is not a valid estimate trace: {e}") from e
    return trace, t_s
