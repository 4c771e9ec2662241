# store/csv_writer.py
"""
Deterministic CSV emission through pandas.

Floats are written with 17 significant digits so that reading a file back
with round-trip precision reproduces the in-memory doubles; lines end in LF
and no timestamps are written into data files.
"""

from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from configs.numerics import CSV_FLOAT_FORMAT
from fsi.core_model import STATE_SIZE
from fsi.errors import StorageError
from fsi.experiments import SweepResult, sweep_summary
from fsi.integrator import Trajectory
from fsi.log import get_logger
from schema import ModelConfig, SweepSummaryRow

logger = get_logger(__name__)

TRAJECTORY_COLUMNS = ["t", "h", "h_dot", "xi", "xi_dot", "energy", "ledger", "residual"]
SUMMARY_COLUMNS = ["mu", "h_min", "t_min", "rebound_height", "dev_h", "dev_xi", "energy_residual"]
DRAG_TABLE_COLUMNS = ["h", "alpha", "gamma", "dim", "D_lub", "D_analytic", "exponent"]

TRAJECTORY_FILE = "trajectory.csv"
SUMMARY_FILE = "summary.csv"


def sweep_file_name(mu: float) -> str:
    return f"traj_mu={mu!r}.csv"


def _write(frame: pd.DataFrame, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(
            path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n", na_rep="nan"
        )
    except OSError as exc:
        raise StorageError(exc.strerror or str(exc), str(path)) from exc
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    energy = traj.energy()
    return pd.DataFrame(
        {
            "t": traj.t,
            "h": traj.y[:, 0],
            "h_dot": traj.y[:, 1],
            "xi": traj.y[:, 2],
            "xi_dot": traj.y[:, 3],
            "energy": energy,
            "ledger": traj.y[:, 4],
            "residual": energy + traj.y[:, 4] - energy[0],
        },
        columns=TRAJECTORY_COLUMNS,
    )


def emit_trajectory(traj: Trajectory, out_dir: Union[str, Path], name: str = TRAJECTORY_FILE) -> Path:
    return _write(trajectory_frame(traj), Path(out_dir) / name)


def summary_frame(rows: Iterable[SweepSummaryRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=SUMMARY_COLUMNS)


def emit_sweep(
    sweep: SweepResult,
    out_dir: Union[str, Path],
    rows: Optional[Sequence[SweepSummaryRow]] = None,
) -> list[Path]:
    """One trajectory file per completed viscosity plus summary.csv"""
    out = Path(out_dir)
    paths = [
        emit_trajectory(entry.trajectory, out, sweep_file_name(entry.mu))
        for entry in sweep.entries
        if entry.trajectory is not None and not entry.failed
    ]
    paths.append(_write(summary_frame(rows if rows is not None else sweep_summary(sweep)), out / SUMMARY_FILE))
    return paths


def emit_csv(result: Union[Trajectory, SweepResult], out_dir: Union[str, Path]) -> list[Path]:
    if isinstance(result, SweepResult):
        return emit_sweep(result, out_dir)
    if isinstance(result, Trajectory):
        return [emit_trajectory(result, out_dir)]
    raise TypeError(f"cannot emit {type(result).__name__} as CSV")


def emit_drag_table(rows: Sequence[dict], path: Union[str, Path]) -> Path:
    return _write(pd.DataFrame(list(rows), columns=DRAG_TABLE_COLUMNS), Path(path))


def read_frame(path: Union[str, Path]) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except OSError as exc:
        raise StorageError(exc.strerror or str(exc), str(path)) from exc


def read_trajectory(path: Union[str, Path], config: ModelConfig) -> Trajectory:
    """Samples of an emitted trajectory file, linearly interpolated between rows"""
    frame = read_frame(path)
    columns = ["h", "h_dot", "xi", "xi_dot", "ledger"]
    y = frame[columns].to_numpy(dtype=float).reshape(-1, STATE_SIZE)
    return Trajectory.from_samples(config, frame["t"].to_numpy(dtype=float), np.asarray(y))
