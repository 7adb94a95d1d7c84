"""One-dimensional meter on a periodic grid (Schroedinger representation, hbar = 1).

Position samples live on ``x_k = (k - n/2) dx``; momentum samples on
``p_j = (j - n/2) 2 pi / L``.  Fourier transforms use the unitary convention
``psi_hat(p) = (2 pi)^{-1/2} int psi(x) e^{-ipx} dx`` so both densities are
with respect to ordinary Lebesgue measure.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasError, ResolutionError

POSITION = "Q"
MOMENTUM = "P"
_TAGS = {"q": POSITION, "x": POSITION, "position": POSITION, "p": MOMENTUM, "momentum": MOMENTUM}


def observable_tag(tag: str) -> str:
    try:
        return _TAGS[str(tag).lower()]
    except KeyError:
        raise ValueError(f"unknown meter observable {tag!r}; use Q/position or P/momentum") from None


@dataclass(frozen=True)
class Grid:
    n_points: int
    dx: float

    def __post_init__(self):
        n = self.n_points
        if n < 16 or n & (n - 1):
            raise ValueError("n_points must be a power of two >= 16")
        if not self.dx > 0:
            raise ValueError("dx must be positive")

    @property
    def length(self) -> float:
        return self.n_points * self.dx

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.dx

    @property
    def p(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.dp

    def fft(self, samples: np.ndarray) -> np.ndarray:
        """Samples of the unitary continuous Fourier transform on the p grid."""
        shifted = np.fft.ifftshift(samples, axes=-1)
        return self.dx / np.sqrt(2 * np.pi) * np.fft.fftshift(np.fft.fft(shifted, axis=-1), axes=-1)

    def ifft(self, spectrum: np.ndarray) -> np.ndarray:
        shifted = np.fft.ifftshift(spectrum, axes=-1)
        return np.sqrt(2 * np.pi) / self.dx * np.fft.fftshift(np.fft.ifft(shifted, axis=-1), axes=-1)


@dataclass(frozen=True)
class GridWavefunction:
    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.grid.n_points,):
            raise ValueError("sample count does not match grid")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dx)

    def normalize(self) -> "GridWavefunction":
        n2 = self.norm2()
        if not n2 > 0 or not np.isfinite(n2):
            raise ValueError("cannot normalise a zero wavefunction")
        return GridWavefunction(self.grid, self.samples / np.sqrt(n2))

    def spectrum(self) -> np.ndarray:
        return self.grid.fft(self.samples)

    def inner(self, other: "GridWavefunction") -> complex:
        return complex(np.vdot(self.samples, other.samples) * self.grid.dx)


@dataclass(frozen=True)
class Density:
    coords: np.ndarray
    values: np.ndarray

    @property
    def spacing(self) -> float:
        return float(self.coords[1] - self.coords[0])

    def total(self) -> float:
        return float(np.sum(self.values) * self.spacing)

    def l1_distance(self, other) -> float:
        vals = other.values if isinstance(other, Density) else np.asarray(other)
        return float(np.sum(np.abs(self.values - vals)) * self.spacing)

    def to_csv(self, path, label="x"):
        write_columns(path, [label, "value"], [self.coords, self.values])


@dataclass(frozen=True)
class WignerTable:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (len(x), len(p))

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def position_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def momentum_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dx

    def total(self) -> float:
        return float(self.values.sum() * self.dx * self.dp)

    def to_csv(self, path):
        xx, pp = np.meshgrid(self.x, self.p, indexing="ij")
        write_columns(path, ["x", "p", "value"], [xx.ravel(), pp.ravel(), self.values.ravel()])


def write_columns(path, header, columns):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([f"{float(v):.17g}" for v in row])


def profile(psi: GridWavefunction) -> tuple[float, float]:
    """Centre and Gaussian-equivalent width ``h = sqrt(2) * std`` of the position density."""
    rho = np.abs(psi.samples) ** 2
    rho = rho / rho.sum()
    x = psi.grid.x
    mean = float(np.dot(x, rho))
    var = float(np.dot((x - mean) ** 2, rho))
    return mean, float(np.sqrt(2.0 * var))


def momentum_profile(psi: GridWavefunction) -> tuple[float, float]:
    rho = np.abs(psi.spectrum()) ** 2
    rho = rho / rho.sum()
    p = psi.grid.p
    mean = float(np.dot(p, rho))
    var = float(np.dot((p - mean) ** 2, rho))
    return mean, float(np.sqrt(2.0 * var))


def gaussian_state(grid: Grid, center: float = 0.0, h: float = 1.0, momentum: float = 0.0) -> GridWavefunction:
    """``(pi h^2)^{-1/4} exp(-(x - center)^2 / 2h^2)``, optionally carrying a plane-wave phase."""
    if h < 4 * grid.dx:
        raise ResolutionError(f"width h={h} below resolution limit 4*dx={4 * grid.dx}")
    if h > grid.length / 8:
        raise ResolutionError(f"width h={h} exceeds L/8={grid.length / 8}")
    if abs(center) + 4 * h > grid.length / 2:
        raise ResolutionError("Gaussian support is not contained in the grid")
    x = grid.x
    samples = (np.pi * h * h) ** -0.25 * np.exp(-((x - center) ** 2) / (2 * h * h) + 1j * momentum * x)
    return GridWavefunction(grid, samples).normalize()


def translate(psi: GridWavefunction, a: float) -> GridWavefunction:
    """Apply ``exp(-i a p)``: exact spectral shift ``psi(x) -> psi(x - a)``."""
    if a == 0:
        return psi
    center, h = profile(psi)
    if abs(center + a) + 4 * h > psi.grid.length / 2:
        raise AliasError(f"translation by {a} moves the profile (centre {center:.3g}, width {h:.3g}) past the grid edge")
    grid = psi.grid
    spec = grid.fft(psi.samples) * np.exp(-1j * a * grid.p)
    return GridWavefunction(grid, grid.ifft(spec))


def kick(psi: GridWavefunction, k: float) -> GridWavefunction:
    """Apply ``exp(-i k x)``: momentum shift by ``-k``."""
    if k == 0:
        return psi
    grid = psi.grid
    centre, width = momentum_profile(psi)
    if abs(centre - k) + 4 * width > np.pi / grid.dx:
        raise AliasError(f"momentum kick {k} exceeds the grid bandwidth")
    return GridWavefunction(grid, psi.samples * np.exp(-1j * k * grid.x))


def apply_observable(psi: GridWavefunction, tag: str) -> np.ndarray:
    """Samples of ``X psi`` for X = position or momentum (momentum applied spectrally)."""
    tag = observable_tag(tag)
    grid = psi.grid
    if tag == POSITION:
        return grid.x * psi.samples
    return grid.ifft(grid.p * grid.fft(psi.samples))


def matrix_element(left: GridWavefunction, tag: str | None, right: GridWavefunction) -> complex:
    """``<left, X right>``; ``tag=None`` gives the plain overlap."""
    vec = right.samples if tag is None else apply_observable(right, tag)
    return complex(np.vdot(left.samples, vec) * left.grid.dx)


def position_density(psi: GridWavefunction) -> Density:
    vals = np.abs(psi.samples) ** 2
    return Density(psi.grid.x, np.clip(vals, 0.0, None))


def momentum_density(psi: GridWavefunction) -> Density:
    vals = np.abs(psi.spectrum()) ** 2
    return Density(psi.grid.p, np.clip(vals, 0.0, None))


def density(psi: GridWavefunction, tag: str) -> Density:
    return position_density(psi) if observable_tag(tag) == POSITION else momentum_density(psi)


def quantum_covariances(psi: GridWavefunction, X: str, Y: str) -> tuple[float, float]:
    """Symmetric and anti-symmetric covariances ``(CV_S[X,Y], CV_A[X,Y])`` of two meter observables."""
    dx = psi.grid.dx
    n2 = psi.norm2()
    xs = apply_observable(psi, X)
    ys = apply_observable(psi, Y)
    ex = np.vdot(psi.samples, xs).real * dx / n2
    ey = np.vdot(psi.samples, ys).real * dx / n2
    cross = np.vdot(xs, ys) * dx / n2
    return float(cross.real - ex * ey), float(cross.imag)


@dataclass(frozen=True)
class MeterStatistics:
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cv_s: float
    cv_a: float


def meter_statistics(psi: GridWavefunction) -> MeterStatistics:
    dx = psi.grid.dx
    n2 = psi.norm2()
    xs = apply_observable(psi, POSITION)
    ps = apply_observable(psi, MOMENTUM)
    mean_x = np.vdot(psi.samples, xs).real * dx / n2
    mean_p = np.vdot(psi.samples, ps).real * dx / n2
    var_x = np.vdot(xs, xs).real * dx / n2 - mean_x**2
    var_p = np.vdot(ps, ps).real * dx / n2 - mean_p**2
    cross = np.vdot(xs, ps) * dx / n2
    return MeterStatistics(
        float(mean_x), float(mean_p), float(var_x), float(var_p), float(cross.real - mean_x * mean_p), float(cross.imag)
    )


def expectation(psi: GridWavefunction, tag: str) -> float:
    return matrix_element(psi, tag, psi).real / psi.norm2()


def _upsample_padded(psi: GridWavefunction) -> np.ndarray:
    """Zero-pad to twice the length, then band-limited interpolation onto the half-step grid."""
    n = psi.grid.n_points
    padded = np.zeros(2 * n, dtype=complex)
    padded[n // 2 : n // 2 + n] = psi.samples
    spec = np.fft.fft(padded)
    m = 2 * n
    fine = np.zeros(2 * m, dtype=complex)
    half = m // 2
    fine[:half] = spec[:half]
    fine[-half + 1 :] = spec[-half + 1 :]
    fine[half] = 0.5 * spec[half]
    fine[-half] = 0.5 * spec[half]
    return 2.0 * np.fft.ifft(fine)


def wigner_ville(psi: GridWavefunction, chunk: int = 128) -> WignerTable:
    """``W(x,p) = (2 pi)^{-1} int psi*(x + y/2) psi(x - y/2) e^{ipy} dy`` on the grid's (x, p) lattice.

    The renormalised measure is absorbed here so that W integrates to one against
    ``dx dp`` and its marginals are the Lebesgue densities of x and p.
    """
    centre, h = profile(psi)
    grid = psi.grid
    if abs(centre) + 4 * h > grid.length / 2:
        raise AliasError("wavefunction support is not well inside the grid")
    psi = psi.normalize()
    n = grid.n_points
    fine = _upsample_padded(psi)
    size = fine.shape[0]  # 4n samples at spacing dx/2
    lags = np.arange(-2 * n, 2 * n)
    centres = 2 * (np.arange(n) + n // 2)
    out = np.empty((n, n))
    for start in range(0, n, chunk):
        rows = centres[start : start + chunk]
        plus = fine[(rows[:, None] + lags[None, :]) % size]
        minus = fine[(rows[:, None] - lags[None, :]) % size]
        prod = np.conj(plus) * minus
        folded = prod.reshape(len(rows), 4, n).sum(axis=1)  # lags start at -2n, so column k holds lag k mod n
        # e^{i p_j y_m} with y_m = m dx depends on m mod n only
        vals = np.fft.ifft(folded, axis=1) * n * grid.dx / (2 * np.pi)
        out[start : start + chunk] = np.real(np.fft.fftshift(vals, axes=1))
    return WignerTable(grid.x, grid.p, out)


def gaussian_wigner(x: np.ndarray, p: np.ndarray, center: float = 0.0, h: float = 1.0) -> np.ndarray:
    """Closed-form Wigner function of the real Gaussian of width h."""
    xx, pp = np.meshgrid(x, p, indexing="ij")
    return np.exp(-((xx - center) ** 2) / h**2 - (h * pp) ** 2) / np.pi
