"""
CSV export of regret traces.
"""

from pathlib import Path

from tables import write_csv
from .online_pg import RegretTrace

TRACE_COLUMNS = ["t", "cost", "epoch", "subepoch", "regret_partial"]
EPOCH_COLUMNS = [
    "j", "r_j", "m_j", "J_Kj",
    "grad_est_norm", "grad_true_norm", "grad_angle_deg", "grad_err_bound",
]


def write_trace_csv(path: Path, trace: RegretTrace) -> Path:
    """One row per played round, t counted from 1."""
    partial = trace.regret_curve
    rows = (
        [t + 1, float(trace.costs[t]), int(trace.epoch_of_step[t]), int(trace.subepoch_of_step[t]), float(partial[t])]
        for t in range(trace.costs.shape[0])
    )
    return write_csv(Path(path), TRACE_COLUMNS, rows)


def write_epoch_csv(path: Path, trace: RegretTrace) -> Path:
    """One row per epoch record; undefined diagnostics are written as nan."""
    rows = (
        [rec.j, float(rec.r), int(rec.m), float(rec.J_K), float(rec.grad_est_norm),
         float(rec.grad_true_norm), float(rec.grad_angle_deg), float(rec.grad_err_bound)]
        for rec in trace.epoch_records
    )
    return write_csv(Path(path), EPOCH_COLUMNS, rows)
