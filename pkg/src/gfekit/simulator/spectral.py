"""Pseudo-spectral integration of the vorticity form on a doubly periodic box.

The prognostic field is the vorticity ``w = H_xx + H_yy``; the stream
function is recovered with the mean mode pinned to zero.  The right-hand side
``H_y w_x - H_x w_y - beta H_x`` is evaluated with products in physical space
and 2/3-rule truncation, and time stepping is classical RK4.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..catalog import SolutionRecord
from ..expr import as_expr, substitute
from ..expr.nodes import free_symbols
from ..expr.numeric import eval_numeric, lambdify
from ..model import vorticity

CSV_HEADER = ("time", "l2_error", "linf_error", "energy", "enstrophy")


class SimulationError(RuntimeError):
    pass


class PeriodicityError(ValueError):
    pass


def _pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class Grid:
    Nx: int
    Ny: int
    Lx: float = 2 * math.pi
    Ly: float = 2 * math.pi

    def __post_init__(self):
        for name, n in (("Nx", self.Nx), ("Ny", self.Ny)):
            if not isinstance(n, (int, np.integer)) or not _pow2(int(n)) or n < 16:
                raise ValueError(f"{name} must be a power of two >= 16, got {n}")
        if not (self.Lx > 0 and self.Ly > 0):
            raise ValueError("domain lengths must be positive")

    @property
    def dx(self) -> float:
        return self.Lx / self.Nx

    @property
    def dy(self) -> float:
        return self.Ly / self.Ny

    def nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(X, Y)`` with ``X[j, i] = i dx``, ``Y[j, i] = j dy``."""
        x = np.arange(self.Nx) * self.dx
        y = np.arange(self.Ny) * self.dy
        return np.meshgrid(x, y)

    def wavenumbers(self) -> Tuple[np.ndarray, np.ndarray]:
        """Angular wavenumbers on the rfft2 layout (y full, x half)."""
        kx = 2 * np.pi * np.fft.rfftfreq(self.Nx, d=self.dx)
        ky = 2 * np.pi * np.fft.fftfreq(self.Ny, d=self.dy)
        return np.meshgrid(kx, ky)

    def dealias_mask(self) -> np.ndarray:
        ix = np.fft.rfftfreq(self.Nx, d=1.0 / self.Nx)
        iy = np.fft.fftfreq(self.Ny, d=1.0 / self.Ny)
        IX, IY = np.meshgrid(np.abs(ix), np.abs(iy))
        return (IX < self.Nx / 3) & (IY < self.Ny / 3)


@dataclass
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.Ny, self.grid.Nx):
            raise ValueError(f"field shape {self.values.shape} does not match grid ({self.grid.Ny}, {self.grid.Nx})")
        if not np.all(np.isfinite(self.values)):
            raise SimulationError("field contains non-finite values")

    def spectrum(self) -> np.ndarray:
        return np.fft.rfft2(self.values)

    @classmethod
    def from_spectrum(cls, grid: Grid, spec: np.ndarray) -> "Field":
        return cls(grid, np.fft.irfft2(spec, s=(grid.Ny, grid.Nx)))


class _Operators:
    def __init__(self, grid: Grid, dealias: bool = True):
        self.grid = grid
        self.KX, self.KY = grid.wavenumbers()
        k2 = self.KX**2 + self.KY**2
        self.inv_lap = np.zeros_like(k2)
        self.inv_lap[k2 > 0] = -1.0 / k2[k2 > 0]
        self.mask = grid.dealias_mask() if dealias else np.ones_like(k2, dtype=bool)
        self.shape = (grid.Ny, grid.Nx)

    def stream(self, w_hat: np.ndarray) -> np.ndarray:
        return self.inv_lap * w_hat

    def real(self, spec: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(spec, s=self.shape)

    def rhs(self, w_hat: np.ndarray, beta: float) -> np.ndarray:
        w_hat = w_hat * self.mask
        h_hat = self.stream(w_hat)
        hx = self.real(1j * self.KX * h_hat)
        hy = self.real(1j * self.KY * h_hat)
        wx = self.real(1j * self.KX * w_hat)
        wy = self.real(1j * self.KY * w_hat)
        jac = np.fft.rfft2(hy * wx - hx * wy)
        out = (jac - beta * np.fft.rfft2(hx)) * self.mask
        out[0, 0] = 0.0
        return out


def _rk4(ops: _Operators, w_hat: np.ndarray, beta: float, dt: float) -> np.ndarray:
    k1 = ops.rhs(w_hat, beta)
    k2 = ops.rhs(w_hat + 0.5 * dt * k1, beta)
    k3 = ops.rhs(w_hat + 0.5 * dt * k2, beta)
    k4 = ops.rhs(w_hat + dt * k3, beta)
    return w_hat + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def step(omega: Field, beta: float, dt: float, dealias: bool = True) -> Field:
    """Advance the vorticity by one RK4 step."""
    w = omega.values
    if abs(float(np.mean(w))) > 1e-12 * (1 + float(np.max(np.abs(w)))):
        raise ValueError("vorticity must have zero mean")
    ops = _Operators(omega.grid, dealias)
    out = _rk4(ops, omega.spectrum(), float(beta), float(dt))
    res = np.fft.irfft2(out, s=ops.shape)
    if not np.all(np.isfinite(res)):
        raise SimulationError("non-finite vorticity after step 0")
    return Field(omega.grid, res)


def stream_function(omega: Field) -> Field:
    ops = _Operators(omega.grid, dealias=False)
    return Field(omega.grid, ops.real(ops.stream(omega.spectrum())))


def energy(omega: Field) -> float:
    """``1/2 int |grad H|^2``."""
    ops = _Operators(omega.grid, dealias=False)
    h = ops.stream(omega.spectrum())
    hx = ops.real(1j * ops.KX * h)
    hy = ops.real(1j * ops.KY * h)
    g = omega.grid
    return 0.5 * float(np.mean(hx * hx + hy * hy)) * g.Lx * g.Ly


def enstrophy(omega: Field) -> float:
    """``1/2 int w^2``."""
    g = omega.grid
    return 0.5 * float(np.mean(omega.values**2)) * g.Lx * g.Ly


# -- runs ----------------------------------------------------------------


@dataclass
class RunConfig:
    """A run of ``record`` from t = 0 to ``T``.

    ``dt`` is adjusted down to ``T / ceil(T / dt)`` so the run ends exactly at
    ``T``.  ``output_every`` counts steps between logged rows (the first and
    last steps are always logged).  ``beta`` defaults to the record's own.
    """

    record: SolutionRecord
    N: int = 64
    dt: float = 1e-3
    T: float = 2 * math.pi
    beta: Optional[float] = None
    dealias: bool = True
    output_every: int = 100
    grid: Optional[Grid] = None
    cfl_limit: float = 0.5

    def resolved_grid(self) -> Grid:
        if self.grid is not None:
            return self.grid
        Lx, Ly = self.record.periodicity or (None, None)
        return Grid(self.N, self.N, Lx or 2 * math.pi, Ly or 2 * math.pi)

    def resolved_beta(self) -> float:
        b = self.record.beta
        if free_symbols(b):
            if self.beta is None:
                raise ValueError("beta is symbolic; pass a numeric beta")
            return float(self.beta)
        own = float(eval_numeric(b, {}))
        if self.beta is not None and float(self.beta) != own:
            raise ValueError(f"beta={self.beta} differs from the record's beta={own}")
        return own

    def steps(self) -> Tuple[int, float]:
        n = max(1, math.ceil(self.T / self.dt - 1e-9))
        return n, self.T / n


@dataclass
class RunResult:
    times: List[float] = field(default_factory=list)
    l2: List[float] = field(default_factory=list)
    linf: List[float] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    enstrophy: List[float] = field(default_factory=list)
    steps: int = 0
    dt: float = 0.0
    final: Optional[Field] = None

    @property
    def final_linf(self) -> float:
        return self.linf[-1]

    @property
    def final_l2(self) -> float:
        return self.l2[-1]

    def relative_drift(self, which: str = "enstrophy") -> float:
        series = getattr(self, which)
        ref = series[0]
        return max(abs(v - ref) for v in series) / (abs(ref) if ref else 1.0)

    def rows(self):
        return zip(self.times, self.l2, self.linf, self.energy, self.enstrophy)

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, "w", newline="\n", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])
        return path


def _check_periodic(rec: SolutionRecord, grid: Grid):
    if rec.periodicity is None:
        raise PeriodicityError(f"{rec.key} is not periodic; validate it with fd_residual_grid instead")
    for axis, L, G in (("x", rec.periodicity[0], grid.Lx), ("y", rec.periodicity[1], grid.Ly)):
        if L is None:
            continue
        m = G / L
        if abs(m - round(m)) > 1e-9 or round(m) < 1:
            raise PeriodicityError(f"grid length L{axis}={G} is not a multiple of the record's period {L}")


def _exact(rec: SolutionRecord, beta: float):
    H = substitute(rec.expr, {"beta": as_expr(beta)})
    extra = free_symbols(H) - {"t", "x", "y", "pi"}
    if extra:
        raise ValueError(f"record has unbound parameters {sorted(extra)}")
    f = lambdify(H, ["t", "x", "y"], "numpy")
    w = lambdify(vorticity(H), ["t", "x", "y"], "numpy")
    return f, w


def _initial(rec: SolutionRecord, grid: Grid, beta: float):
    f, w = _exact(rec, beta)
    X, Y = grid.nodes()
    shape = X.shape
    H_at = lambda t: np.broadcast_to(np.asarray(f(t, X, Y), float), shape)  # noqa: E731
    w0 = np.broadcast_to(np.asarray(w(0.0, X, Y), float), shape).copy()
    return H_at, w0


def run(cfg: RunConfig) -> RunResult:
    """Integrate ``cfg.record`` and log errors against the exact solution."""
    grid = cfg.resolved_grid()
    beta = cfg.resolved_beta()
    _check_periodic(cfg.record, grid)
    n, dt = cfg.steps()
    H_at, w0 = _initial(cfg.record, grid, beta)
    w0 -= w0.mean()
    ops = _Operators(grid, cfg.dealias)
    w_hat = np.fft.rfft2(w0)

    grad = max(float(np.max(np.abs(ops.real(1j * ops.KX * ops.stream(w_hat))))),
               float(np.max(np.abs(ops.real(1j * ops.KY * ops.stream(w_hat))))))
    cfl = dt * grad / min(grid.dx, grid.dy)
    if cfl > cfg.cfl_limit:
        raise SimulationError(f"CFL number {cfl:.3g} exceeds {cfg.cfl_limit}")

    out = RunResult(steps=n, dt=dt)

    def log(k: int, spec: np.ndarray):
        t = k * dt
        wf = Field(grid, ops.real(spec))
        h = ops.real(ops.stream(spec))
        ex = H_at(t)
        ex = ex - ex.mean()
        err = h - ex
        out.times.append(t)
        out.l2.append(float(np.sqrt(np.mean(err * err))))
        out.linf.append(float(np.max(np.abs(err))))
        out.energy.append(energy(wf))
        out.enstrophy.append(enstrophy(wf))

    log(0, w_hat)
    for k in range(1, n + 1):
        w_hat = _rk4(ops, w_hat, beta, dt)
        if not np.all(np.isfinite(w_hat)):
            raise SimulationError(f"non-finite vorticity at step {k}")
        if k % cfg.output_every == 0 or k == n:
            log(k, w_hat)
    out.final = Field(grid, ops.real(w_hat))
    return out


def stationarity_drift(rec: SolutionRecord, N: int = 64, dt: float = 1e-3, steps: int = 10, beta: float = 1.0) -> float:
    """Largest per-step change of the vorticity, relative to ``1 + max|w|``."""
    cfg = RunConfig(rec, N=N, dt=dt, beta=beta)
    grid = cfg.resolved_grid()
    beta = cfg.resolved_beta()
    _check_periodic(rec, grid)
    _, w0 = _initial(rec, grid, beta)
    w = Field(grid, w0 - w0.mean())
    worst = 0.0
    for _ in range(steps):
        nxt = step(w, beta, dt)
        worst = max(worst, float(np.max(np.abs(nxt.values - w.values))) / (1 + float(np.max(np.abs(w.values)))))
        w = nxt
    return worst


def temporal_convergence(rec: SolutionRecord, dts=(0.04, 0.02, 0.01, 0.005), N: int = 64, T: float = 2 * math.pi,
                         beta: Optional[float] = None) -> Tuple[float, List[Tuple[float, float]]]:
    """Least-squares slope of log(final L-inf error) against log(dt)."""
    pts = []
    for dt in dts:
        res = run(RunConfig(rec, N=N, dt=dt, T=T, beta=beta, output_every=10**9))
        pts.append((res.dt, res.final_linf))
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, pts
