"""Error sweeps of the three arc-length estimators against quadrature.

Estimators: the inner chord, the elementary formula, and the compensated
formula.  Errors are signed, ``(estimate - exact) / exact`` in percent.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ellipse import (
    HALF_PI,
    CompensationParams,
    EllipseArc,
    arc_length_approx,
    arc_length_exact,
    chord_length,
    make_arc,
    rollover_from_roll,
    _correction,
)

COLUMNS = (
    "arc_id", "theta", "lambda", "exact", "chord", "approx", "comp",
    "err_chord_pct", "err_approx_pct", "err_comp_pct",
)
ESTIMATORS = ("chord", "approx", "comp")

# Reference figures (percent) for the three standard arcs, under the column
# labels they are usually printed with.  Note the labels EA1 and EA3 carry the
# boundary angle of each other's axes; see ``swap_note``.
REFERENCE_TABLE = {
    "EA1": {"lambda_star": 1.6062, "chord": (-6.04, -2.25), "approx": (1.77, 1.14), "comp": (0.49, 0.16)},
    "EA2": {"lambda_star": 1.4229, "chord": (-8.68, -2.99), "approx": (-1.57, -0.28), "comp": (-0.68, -0.05)},
    "EA3": {"lambda_star": 1.2077, "chord": (-9.73, -3.29), "approx": (-2.61, -0.81), "comp": (0.97, -0.07)},
}
REFERENCE_AXES = {
    "EA1": (0.04575, 0.03750),
    "EA2": (0.05205, 0.03150),
    "EA3": (0.06901, 0.02595),
}


@dataclass
class ErrorSweep:
    arc_id: str
    lambda_star: float
    theta: np.ndarray
    lam: np.ndarray
    exact: np.ndarray
    chord: np.ndarray
    approx: np.ndarray
    comp: np.ndarray

    def err(self, which: str) -> np.ndarray:
        """Signed percent error of one estimator, recomputed from the rows."""
        return (getattr(self, which) - self.exact) / self.exact * 100.0

    def rows(self):
        e = [self.err(k) for k in ESTIMATORS]
        for i in range(len(self.theta)):
            yield (self.arc_id, self.theta[i], self.lam[i], self.exact[i], self.chord[i],
                   self.approx[i], self.comp[i], e[0][i], e[1][i], e[2][i])

    def __eq__(self, other):
        if not isinstance(other, ErrorSweep):
            return NotImplemented
        arrays = ("theta", "lam", "exact", "chord", "approx", "comp")
        return (self.arc_id == other.arc_id and self.lambda_star == other.lambda_star
                and all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays))


def sweep(arc: EllipseArc, comp: CompensationParams, n: int = 1024, arc_id: str = "arc") -> ErrorSweep:
    """Uniform roll-angle grid ``theta_j = j * (pi/2) / n`` for ``j = 1 .. n-1``."""
    if n < 128:
        raise ValueError(f"n={n} below 128")
    theta = np.arange(1, n) * (HALF_PI / n)
    angles = [rollover_from_roll(arc, float(t)) for t in theta]
    phi = np.array([a.phi for a in angles])
    lam = np.array([a.lam for a in angles])
    exact = np.array([arc_length_exact(arc, float(l)) for l in lam])
    approx = np.asarray(arc_length_approx(arc, lam), dtype=float)
    comp_len = approx - _correction(arc, comp, theta, lam)
    return ErrorSweep(arc_id, arc.lambda_star, theta, lam, exact, chord_length(arc, phi), approx, comp_len)


def signed_extremum(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("empty error column")
    return float(x[int(np.argmax(np.abs(x)))])


def summarize(sw: ErrorSweep) -> dict[str, tuple[float, float]]:
    """Per estimator: (signed extremum, signed mean) of the percent error."""
    if len(sw.theta) == 0:
        raise ValueError("empty sweep")
    return {k: (signed_extremum(sw.err(k)), float(np.mean(sw.err(k)))) for k in ESTIMATORS}


def reference_label(lambda_star: float, tol: float = 1e-3) -> str | None:
    """Reference column whose boundary angle matches ``lambda_star``."""
    for label, ref in REFERENCE_TABLE.items():
        if abs(ref["lambda_star"] - lambda_star) < tol:
            return label
    return None


def swap_note(sweeps) -> list[str]:
    notes = []
    for sw in sweeps:
        label = reference_label(sw.lambda_star)
        if label is not None and label != sw.arc_id and sw.arc_id in REFERENCE_TABLE:
            notes.append(
                f"{sw.arc_id}: boundary angle {sw.lambda_star:.4f} from its axes matches the "
                f"reference column labelled {label}; compared against that column"
            )
    return notes


def _fmt(x) -> str:
    return repr(float(x))


def report(sweeps, out, header: list[str] | None = None) -> tuple[Path, Path]:
    """Write the per-point CSV and a summary table next to it.

    ``out`` is the CSV path; the summary goes to ``<stem>_summary.csv``.
    ``header`` lines are written first as ``#`` comments.
    """
    sweeps = list(sweeps)
    if not sweeps:
        raise ValueError("no sweeps to report")
    out = Path(out)
    summary_path = out.with_name(out.stem + "_summary.csv")
    header = list(header or [])
    with open(out, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for sw in sweeps:
            fh.write(f"# arc {sw.arc_id} lambda_star={_fmt(sw.lambda_star)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for sw in sweeps:
            for row in sw.rows():
                w.writerow([row[0], *map(_fmt, row[1:])])

    with open(summary_path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for line in swap_note(sweeps):
            fh.write(f"# note: {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        cols = [f"{sw.arc_id}_{k}" for sw in sweeps for k in ESTIMATORS]
        w.writerow(["row", *cols])
        sums = [summarize(sw) for sw in sweeps]
        w.writerow(["lambda_star", *[_fmt(sw.lambda_star) for sw in sweeps for _ in ESTIMATORS]])
        w.writerow(["max_pct", *[_fmt(s[k][0]) for s in sums for k in ESTIMATORS]])
        w.writerow(["mean_pct", *[_fmt(s[k][1]) for s in sums for k in ESTIMATORS]])
    return out, summary_path


def read_sweeps(path) -> list[ErrorSweep]:
    """Parse a CSV written by :func:`report` back into sweeps."""
    lam_star = {}
    data: dict[str, list] = {}
    with open(path, newline="") as fh:
        lines = []
        for line in fh:
            if line.startswith("# arc "):
                parts = line[6:].split()
                lam_star[parts[0]] = float(parts[1].split("=", 1)[1])
            elif not line.startswith("#"):
                lines.append(line)
    reader = csv.reader(lines)
    if tuple(next(reader)) != COLUMNS:
        raise ValueError(f"{path}: unexpected column layout")
    for row in reader:
        data.setdefault(row[0], []).append([float(x) for x in row[1:7]])
    out = []
    for arc_id, rows in data.items():
        a = np.array(rows)
        out.append(ErrorSweep(arc_id, lam_star.get(arc_id, math.nan), *(a[:, i].copy() for i in range(6))))
    return out


def reference_sweeps(n: int = 1024, K_e: float = 1.0, grid_n: int = 1024) -> list[ErrorSweep]:
    from .ellipse import calibrate_compensation

    out = []
    for label, (r_a, r_b) in REFERENCE_AXES.items():
        arc = make_arc(r_a, r_b)
        out.append(sweep(arc, calibrate_compensation(arc, grid_n, K_e), n, label))
    return out
