"""Design grids, functional samples and the cross-sectional mean interpolant."""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidGridError, ValidationError

#: Quasi-uniformity ratio above which :func:`validate_grid` flags the grid.
RATIO_WARNING_THRESHOLD = 10.0


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DesignGrid:
    """Ordered observation times ``t_1 < ... < t_p`` inside ``[0, horizon]``.

    ``horizon`` defaults to the last grid point.
    """

    points: np.ndarray
    horizon: float | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1:
            raise InvalidGridError("grid points must be one-dimensional")
        if pts.size < 2:
            raise InvalidGridError(f"grid needs at least 2 points, got {pts.size}")
        if not np.all(np.isfinite(pts)):
            raise InvalidGridError("grid points must be finite")
        steps = np.diff(pts)
        if np.any(steps <= 0):
            j = int(np.argmax(steps <= 0))
            kind = "duplicate" if steps[j] == 0 else "unordered"
            raise InvalidGridError(
                f"grid points must be strictly increasing ({kind} at index {j + 1})"
            )
        T = float(pts[-1]) if self.horizon is None else float(self.horizon)
        if not T > 0:
            raise InvalidGridError(f"horizon must be positive, got {T}")
        if pts[0] < 0 or pts[-1] > T:
            raise InvalidGridError(f"grid points must lie in [0, {T}]")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "horizon", T)

    @property
    def p(self) -> int:
        return self.points.size

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, DesignGrid):
            return NotImplemented
        return self.horizon == other.horizon and np.array_equal(self.points, other.points)

    __hash__ = None

    @classmethod
    def regular(cls, p: int, horizon: float = 1.0) -> "DesignGrid":
        """Grid ``t_j = j * horizon / p`` for ``j = 1..p``.

        Every gap, including the one from 0 to ``t_1``, equals ``horizon / p``,
        and halving the step keeps every old point on the new grid.
        """
        return cls(np.arange(1, p + 1) * float(horizon) / p, horizon)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """n noisy curves observed on a common grid; row ``i`` is curve ``i``."""

    data: np.ndarray
    grid: DesignGrid

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[None, :]
        if data.ndim != 2:
            raise ValidationError("sample data must be an n x p matrix")
        if data.shape[0] < 1:
            raise ValidationError("sample needs at least one curve")
        if data.shape[1] != self.grid.p:
            raise ValidationError(
                f"data has {data.shape[1]} columns but the grid has {self.grid.p} points"
            )
        if not np.all(np.isfinite(data)):
            raise ValidationError("sample data must be finite")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    @property
    def horizon(self) -> float:
        return self.grid.horizon

    def fingerprint(self) -> str:
        """Short content hash of data and grid."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.data).tobytes())
        h.update(np.ascontiguousarray(self.grid.points).tobytes())
        h.update(np.float64(self.grid.horizon).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class MeshReport:
    max_gap: float
    min_interior_gap: float
    quasi_uniform_ratio: float
    warning: bool = field(default=False)

    def as_dict(self):
        return {
            "max_gap": self.max_gap,
            "min_interior_gap": self.min_interior_gap,
            "quasi_uniform_ratio": self.quasi_uniform_ratio,
            "warning": self.warning,
        }


def validate_grid(grid: DesignGrid) -> MeshReport:
    """Gap statistics of the design with sentinels ``t_0 = 0`` and ``t_{p+1} = T``.

    The ratio of the largest gap (sentinels included) to the smallest
    interior gap should stay bounded as the grid refines. Ratios above
    :data:`RATIO_WARNING_THRESHOLD` set ``warning`` and emit a
    :class:`UserWarning`; the grid is never rejected on this basis.
    """
    if not isinstance(grid, DesignGrid):
        grid = DesignGrid(grid)
    pts = grid.points
    full = np.concatenate(([0.0], pts, [grid.horizon]))
    max_gap = float(np.max(np.diff(full)))
    min_interior = float(np.min(np.diff(pts)))
    ratio = max_gap / min_interior
    flagged = ratio > RATIO_WARNING_THRESHOLD
    if flagged:
        warnings.warn(
            f"design grid is far from quasi-uniform (gap ratio {ratio:.3g})",
            UserWarning,
            stacklevel=2,
        )
    return MeshReport(max_gap, min_interior, ratio, flagged)


def cross_sectional_means(sample: FunctionalSample) -> np.ndarray:
    """Column means of the data matrix.

    Columns are sorted before summation so the result does not depend on
    the order of the curves.
    """
    data = sample.data
    if sample.n == 1:
        return data[0].copy()
    return np.sort(data, axis=0).sum(axis=0) / sample.n


def interpolant_eval(means, grid: DesignGrid, t):
    """Piecewise-linear interpolant of ``(t_j, means_j)``, constant beyond the end knots."""
    means = np.asarray(means, dtype=float)
    if means.shape != (grid.p,):
        raise ValidationError(f"expected {grid.p} means, got shape {means.shape}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > grid.horizon) or not np.all(np.isfinite(t_arr)):
        raise DomainError(f"evaluation times must lie in [0, {grid.horizon}]")
    # np.interp already extrapolates by the end values.
    out = np.interp(t_arr, grid.points, means)
    return float(out) if out.ndim == 0 else out
