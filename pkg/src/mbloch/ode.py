"""Thin Python layer over the Dormand-Prince kernel: trajectories and errors."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _dopri

DEFAULT_TOL = 1e-9
DEFAULT_MAX_STEPS = 50_000_000


class IntegrationError(RuntimeError):
    """Raised when the integrator cannot reach the requested end time.

    ``t_last``/``y_last`` hold the last accepted point.
    """

    def __init__(self, message, t_last, y_last):
        super().__init__(message)
        self.t_last = t_last
        self.y_last = y_last


_STATUS_TEXT = {
    _dopri.MAX_STEPS: "maximum number of steps exceeded",
    _dopri.STEP_UNDERFLOW: "step size underflow",
    _dopri.NONFINITE: "state became non-finite",
}


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: ``t`` (n,), ``y`` (n, k) and the column names of ``y``."""

    t: np.ndarray
    y: np.ndarray
    columns: tuple
    n_steps: int = 0
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.y[:, self.columns.index(name)]

    def complex(self, name):
        """Recombine ``name_re``/``name_im`` columns."""
        return self[name + "_re"] + 1j * self[name + "_im"]

    @property
    def final(self):
        return self.y[-1]

    def to_csv(self, path, time_label="t"):
        write_csv(path, [time_label, *self.columns], np.column_stack([self.t, self.y]))


def format_float(x):
    return format(float(x), ".17g")


def write_csv(path_or_file, header, rows):
    """CSV with '.' decimals, comma separator and 17 significant digits."""
    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating, int, np.integer))
                        and not isinstance(v, bool) else v for v in row])

    if hasattr(path_or_file, "write"):
        _emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _emit(fh)


def integrate(rhs, y0, t_end, t_eval=None, args=None, *, t0=0.0, rtol=DEFAULT_TOL,
              atol=DEFAULT_TOL, h0=0.0, max_steps=DEFAULT_MAX_STEPS):
    """Run the DOPRI5 kernel and return ``(t_eval, samples, n_steps)``.

    Raises :class:`IntegrationError` on failure.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    if t_eval is None:
        t_eval = np.linspace(t0, t_end, 201)
    t_eval = np.ascontiguousarray(t_eval, dtype=np.float64)
    if np.any(np.diff(t_eval) < 0) or t_eval[0] < t0 or t_eval[-1] > t_end:
        raise ValueError("t_eval must be sorted and inside [t0, t_end]")
    if args is None:
        args = np.zeros(1)
    out, status, t_last, y_last, _, n_steps = _dopri.dopri5(
        rhs, y0, float(t0), float(t_end), t_eval, args, float(rtol), float(atol),
        float(h0), int(max_steps))
    if status != _dopri.OK:
        raise IntegrationError(
            f"integration failed at t={t_last:.6g}: {_STATUS_TEXT[status]}", t_last, y_last)
    return t_eval, out, n_steps
