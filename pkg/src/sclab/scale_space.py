"""Discretized scale of weighted Sobolev spaces on truncated half-cylinders.

An element is a pair (u+, u-) of fields on [0, s_max] x S^1 and
[-s_max, 0] x S^1 sharing one asymptotic constant c. The level-m norm is

    ||u||_m^2 = |c|^2 + sum_{|alpha| <= m} int |d^alpha (u - c)|^2 e^{2 delta_m |s|}

with derivatives taken spectrally in t and by 4th-order finite differences
in s, quadrature trapezoid in s and exact (Parseval) in t. Levels with
larger m use strictly larger weights delta_m, so finiteness at level m+1
implies finiteness at level m.

Compactness of the inclusion of level m+1 into level m is a statement a
finite grid cannot certify; :func:`level_embedding_gap` only exhibits
evidence (a greedy-net covering radius).
"""

from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .config import default_deltas
from .errors import (DomainError, GridMismatch, LevelOutOfRange,
                     MarginExceeded, OverflowGuard)

WEIGHT_GUARD = 600.0


@dataclass(frozen=True)
class WeightSequence:
    """Strictly increasing exponential weights, one per level.

    The base weight may be 0 (plain L^2 at level 0); all higher weights
    must stay inside the spectral gap (0, 2*pi).
    """

    deltas: tuple
    m_max: int = 3

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.deltas)
        object.__setattr__(self, "deltas", deltas)
        if len(deltas) < self.m_max + 1:
            raise DomainError("need at least m_max+1 weights")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise DomainError("weights must be strictly increasing")
        if deltas[0] < 0.0 or deltas[0] >= 2.0 * np.pi:
            raise DomainError("delta_0 must lie in [0, 2*pi)")
        if any(not (0.0 < d < 2.0 * np.pi) for d in deltas[1:]):
            raise DomainError("weights above level 0 must lie in (0, 2*pi)")

    @classmethod
    def default(cls, m_max=3):
        return cls(tuple(default_deltas(m_max)), m_max)

    def delta(self, m):
        if not (0 <= m <= self.m_max):
            raise LevelOutOfRange(f"level {m} outside [0, {self.m_max}]")
        return self.deltas[m]


@dataclass(frozen=True)
class CylinderGrid:
    """Uniform grid on the truncated half-cylinders.

    n_s samples cover [0, s_max] (and mirrored [-s_max, 0]); the circle
    carries n_t samples in spectral representation.
    """

    s_max: float = 60.0
    n_s: int = 1537
    n_t: int = 64

    def __post_init__(self):
        if self.n_t % 2 != 0 or self.n_t < 8:
            raise DomainError("n_t must be even and >= 8")
        if self.n_s < 16:
            raise DomainError("n_s must be >= 16")
        if self.s_max <= 0:
            raise DomainError("s_max must be positive")

    @property
    def h_s(self):
        return self.s_max / (self.n_s - 1)

    def s_plus(self):
        return np.linspace(0.0, self.s_max, self.n_s)

    def s_minus(self):
        return np.linspace(-self.s_max, 0.0, self.n_s)

    def t(self):
        return sp.t_grid(self.n_t)


@dataclass(frozen=True)
class ScaleFunction:
    """Pair of fields on the half-cylinders with one asymptotic constant.

    Stored as the *deviations* from the constant, shape (N, n_s, n_t), plus
    the constant ``c`` of shape (N,). Keeping the deviation separate matters
    numerically: materializing ``c + dev`` and subtracting later floors the
    deviation at ``eps*|c|``, and the exponential level weights amplify that
    rounding dirt into the norm. Use :meth:`from_values` when you only have
    the full fields; ``plus``/``minus`` materialize them back.
    """

    grid: CylinderGrid
    dev_plus: np.ndarray
    dev_minus: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        dev_plus = _as_field(self.dev_plus)
        dev_minus = _as_field(self.dev_minus)
        c = np.atleast_1d(np.asarray(self.c, dtype=complex))
        expected = (c.shape[0], self.grid.n_s, self.grid.n_t)
        if dev_plus.shape != expected or dev_minus.shape != expected:
            raise GridMismatch(
                f"field shapes {dev_plus.shape}/{dev_minus.shape} "
                f"do not match {expected}")
        object.__setattr__(self, "dev_plus", dev_plus)
        object.__setattr__(self, "dev_minus", dev_minus)
        object.__setattr__(self, "c", c)

    @property
    def plus(self):
        return self.dev_plus + self.c[:, None, None]

    @property
    def minus(self):
        return self.dev_minus + self.c[:, None, None]

    @property
    def n_components(self):
        return self.c.shape[0]

    @classmethod
    def from_values(cls, grid, plus, minus, c):
        """Build from full fields; the deviation is recovered by subtraction
        (accurate to eps*|c| pointwise)."""
        c = np.atleast_1d(np.asarray(c, dtype=complex))
        return cls(grid, _as_field(plus) - c[:, None, None],
                   _as_field(minus) - c[:, None, None], c)

    @classmethod
    def constant(cls, grid, c):
        c = np.atleast_1d(np.asarray(c, dtype=complex))
        shape = (c.shape[0], grid.n_s, grid.n_t)
        return cls(grid, np.zeros(shape, complex), np.zeros(shape, complex), c)

    def __add__(self, other):
        _same_grid(self, other)
        return ScaleFunction(self.grid, self.dev_plus + other.dev_plus,
                             self.dev_minus + other.dev_minus, self.c + other.c)

    def __sub__(self, other):
        _same_grid(self, other)
        return ScaleFunction(self.grid, self.dev_plus - other.dev_plus,
                             self.dev_minus - other.dev_minus, self.c - other.c)

    def __mul__(self, scalar):
        return ScaleFunction(self.grid, self.dev_plus * scalar,
                             self.dev_minus * scalar, self.c * scalar)

    __rmul__ = __mul__


def _as_field(values):
    """Coerce to complex (N, n_s, n_t); a 2-D array means N == 1."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim == 2:
        arr = arr[None, ...]
    if arr.ndim != 3:
        raise GridMismatch(f"field must be 2-D or 3-D, got shape {arr.shape}")
    return arr


def _same_grid(u, v):
    if u.grid != v.grid or u.c.shape != v.c.shape:
        raise GridMismatch("scale functions live on different grids")


@dataclass(frozen=True)
class LevelNormReport:
    """Norm value plus its per-derivative-order decomposition."""

    level: int
    value: float
    breakdown: dict = field(default_factory=dict)
    tail_fraction: float = 0.0
    tail_dominated: bool = False

    def csv_rows(self):
        rows = []
        for order, contribution in sorted(self.breakdown.items()):
            rows.append({"level": self.level, "value": self.value,
                         "order": order, "contribution": contribution})
        return rows


CSV_COLUMNS = ("level", "value", "order", "contribution")


def _weighted_square(du_plus, du_minus, grid, delta, tail_from=None):
    """Integral of |du|^2 e^{2 delta |s|} over both half-cylinders."""
    s_p = grid.s_plus()
    w_s = sp.trapezoid_weights(s_p)
    weight = np.exp(2.0 * delta * s_p)
    dens_p = (np.abs(du_plus) ** 2).sum(axis=0).mean(axis=-1)
    dens_m = (np.abs(du_minus) ** 2).sum(axis=0).mean(axis=-1)
    # minus half mirrors the plus half: |s| runs the same way
    total = float(np.dot(w_s * weight, dens_p) + np.dot((w_s * weight)[::-1], dens_m))
    if tail_from is None:
        return total, 0.0
    mask = s_p >= tail_from
    tail = float(np.dot((w_s * weight)[mask], dens_p[mask])
                 + np.dot((w_s * weight)[::-1][mask[::-1]], dens_m[mask[::-1]]))
    return total, tail


def norm_at_level(u, m, w):
    """Level-m weighted Sobolev norm of a ScaleFunction, with breakdown.

    Raises OverflowGuard when delta_m * s_max >= 600 and LevelOutOfRange
    for m beyond the weight sequence.
    """
    delta = w.delta(m)
    grid = u.grid
    if delta * grid.s_max >= WEIGHT_GUARD:
        raise OverflowGuard(
            f"delta_m*s_max = {delta * grid.s_max:.1f} >= {WEIGHT_GUARD}")
    dev_p = u.dev_plus
    dev_m = u.dev_minus
    h = grid.h_s
    breakdown = {"constant": float(np.sum(np.abs(u.c) ** 2))}
    total = breakdown["constant"]
    tail_total = 0.0
    tail_from = grid.s_max / 2.0
    for order_s in range(m + 1):
        ds_p = sp.fd4_nth(dev_p, h, order_s)
        ds_m = sp.fd4_nth(dev_m, h, order_s)
        for order_t in range(m + 1 - order_s):
            dd_p = sp.t_derivative(ds_p, order_t)
            dd_m = sp.t_derivative(ds_m, order_t)
            sq, tail = _weighted_square(dd_p, dd_m, grid, delta, tail_from)
            key = f"ds^{order_s} dt^{order_t}"
            breakdown[key] = sq
            total += sq
            tail_total += tail
    value = float(np.sqrt(total))
    tail_fraction = tail_total / total if total > 0 else 0.0
    return LevelNormReport(level=m, value=value, breakdown=breakdown,
                           tail_fraction=tail_fraction,
                           tail_dominated=bool(tail_fraction > 0.25))


def level_inner(u, v, m, w):
    """Level-m inner product matching :func:`norm_at_level` (complex)."""
    delta = w.delta(m)
    grid = u.grid
    _same_grid(u, v)
    s_p = grid.s_plus()
    w_s = sp.trapezoid_weights(s_p) * np.exp(2.0 * delta * s_p)
    h = grid.h_s
    total = complex(np.vdot(u.c, v.c))
    du_p, du_m = u.dev_plus, u.dev_minus
    dv_p, dv_m = v.dev_plus, v.dev_minus
    for order_s in range(m + 1):
        au_p = sp.fd4_nth(du_p, h, order_s)
        au_m = sp.fd4_nth(du_m, h, order_s)
        av_p = sp.fd4_nth(dv_p, h, order_s)
        av_m = sp.fd4_nth(dv_m, h, order_s)
        for order_t in range(m + 1 - order_s):
            bu_p = sp.t_derivative(au_p, order_t)
            bu_m = sp.t_derivative(au_m, order_t)
            bv_p = sp.t_derivative(av_p, order_t)
            bv_m = sp.t_derivative(av_m, order_t)
            prod_p = (np.conj(bu_p) * bv_p).sum(axis=0).mean(axis=-1)
            prod_m = (np.conj(bu_m) * bv_m).sum(axis=0).mean(axis=-1)
            total += complex(np.dot(w_s, prod_p) + np.dot(w_s[::-1], prod_m))
    return total


def shift_action(t0, u):
    """Translate both components in s: u(s) -> u(s + t0).

    Resampling is quintic in s. Points pushed past the far (truncated) ends
    take the asymptotic constant; points pushed past the seam at s = 0 take
    the spline's polynomial extension, so callers probing differentiability
    should use fields supported away from the seam. The asymptotic constant
    is unchanged.
    """
    grid = u.grid
    if abs(t0) >= grid.s_max / 4.0:
        raise MarginExceeded(f"|t0|={abs(t0):.3g} >= s_max/4")
    if t0 == 0.0:
        return ScaleFunction(grid, u.dev_plus.copy(), u.dev_minus.copy(),
                             u.c.copy())
    s_p, s_m = grid.s_plus(), grid.s_minus()
    spl_p = sp.quintic_spline(s_p, u.dev_plus)
    spl_m = sp.quintic_spline(s_m, u.dev_minus)

    x_p = s_p + t0
    new_plus = spl_p(np.clip(x_p, s_p[0] - abs(t0), s_p[-1]))
    beyond = x_p > s_p[-1]
    if np.any(beyond):
        new_plus[:, beyond, :] = 0.0  # deviation has died off past the end
    x_m = s_m + t0
    new_minus = spl_m(np.clip(x_m, s_m[0], s_m[-1] + abs(t0)))
    below = x_m < s_m[0]
    if np.any(below):
        new_minus[:, below, :] = 0.0
    return ScaleFunction(grid, new_plus, new_minus, u.c.copy())


def level_embedding_gap(u_family, m, w, net_size=6):
    """Covering-radius proxy for compactness of the level-(m+1) ball in level m.

    Greedy farthest-point selection picks a cluster of at most ``net_size``
    members; the return value is the largest level-m distance from any
    member to the linear span of the cluster. Requires every member bounded
    by 1 at level m+1 (the unit-ball normalization of the diagnostic).
    """
    if not u_family:
        raise DomainError("family must be non-empty")
    for u in u_family:
        norm_up = norm_at_level(u, m + 1, w).value
        if norm_up > 1.0 + 1e-9:
            raise DomainError(
                f"family member has level-{m + 1} norm {norm_up:.3g} > 1")
    if len(u_family) == 1:
        return 0.0

    def dist_to_span(u, cluster):
        gram = np.array([[level_inner(a, b, m, w) for b in cluster] for a in cluster])
        rhs = np.array([level_inner(a, u, m, w) for a in cluster])
        coef = np.linalg.lstsq(gram, rhs, rcond=None)[0]
        nrm2 = norm_at_level(u, m, w).value ** 2
        proj2 = float(np.real(np.vdot(rhs, coef)))
        return float(np.sqrt(max(nrm2 - proj2, 0.0)))

    cluster = [u_family[0]]
    while len(cluster) < min(net_size, len(u_family)):
        dists = [dist_to_span(u, cluster) for u in u_family]
        far = int(np.argmax(dists))
        if dists[far] <= 1e-14:
            break
        cluster.append(u_family[far])
    return max(dist_to_span(u, cluster) for u in u_family)


# -- serialization -----------------------------------------------------------

def to_json_record(u):
    """Binary-free JSON record {grid, plus, minus, c, N} for a ScaleFunction."""
    def pack(arr):
        return {"re": arr.real.tolist(), "im": arr.imag.tolist()}
    return {
        "grid": {"s_max": u.grid.s_max, "n_s": u.grid.n_s, "n_t": u.grid.n_t},
        "plus": pack(u.plus),
        "minus": pack(u.minus),
        "c": pack(u.c),
        "N": u.n_components,
    }


def from_json_record(rec):
    grid = CylinderGrid(s_max=rec["grid"]["s_max"], n_s=rec["grid"]["n_s"],
                        n_t=rec["grid"]["n_t"])

    def unpack(obj):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)

    return ScaleFunction.from_values(grid, unpack(rec["plus"]),
                                     unpack(rec["minus"]), unpack(rec["c"]))


# -- probe generation --------------------------------------------------------

def random_smooth_function(grid, rng, n_components=1, n_terms=4,
                           decay_range=(5.4, 6.1), smax_freq=0.8, max_mode=3,
                           windowed=False):
    """Random smooth pair decaying fast enough for every default level.

    Each term is  A * e^{-lambda |s|} * cos(omega s + phi) * e^{2 pi i k t}
    with lambda chosen so that even the level-3 weight is beaten. With
    ``windowed`` the deviation from c is smoothly cut off near the seam
    (used by tests that must avoid seam extrapolation).
    """
    s_p = grid.s_plus()[None, :, None]
    s_m = grid.s_minus()[None, :, None]
    t = grid.t()[None, None, :]
    c = (rng.standard_normal(n_components) + 1j * rng.standard_normal(n_components))
    plus = np.zeros((n_components, grid.n_s, grid.n_t), dtype=complex)
    minus = np.zeros_like(plus)
    for comp in range(n_components):
        for _ in range(n_terms):
            lam = rng.uniform(*decay_range)
            omega = rng.uniform(0.1, smax_freq)
            phi = rng.uniform(0, 2 * np.pi)
            k = rng.integers(-max_mode, max_mode + 1)
            amp = rng.standard_normal() + 1j * rng.standard_normal()
            circ = np.exp(2j * np.pi * k * t)
            plus[comp] += (amp * np.exp(-lam * s_p) * np.cos(omega * s_p + phi)
                           * circ)[0]
            minus[comp] += (amp * np.exp(lam * s_m) * np.cos(omega * s_m + phi)
                            * circ)[0]
    if windowed:
        win_p = _seam_window(grid.s_plus())[None, :, None]
        plus *= win_p
        minus *= win_p[:, ::-1, :]
    return ScaleFunction(grid, plus, minus, c)


def _seam_window(s):
    """Smooth window equal to 0 near s=0 and 1 beyond s_max/8."""
    lo, hi = s[-1] / 24.0, s[-1] / 8.0
    x = np.clip((s - lo) / (hi - lo), 0.0, 1.0)

    def bump(y):
        out = np.zeros_like(y)
        pos = y > 0
        out[pos] = np.exp(-1.0 / y[pos])
        return out

    num, den = bump(x), bump(1.0 - x)
    return num / (num + den)
