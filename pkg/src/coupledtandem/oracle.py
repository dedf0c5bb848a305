"""Ground-truth solvers: truncated CTMC and a discrete-event simulator.

Both work directly from the transition structure of the Markov chain
``(mode, n, k)`` and share no code with the generating-function routes.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import stats

from .model import ModelParams, require_stable

log = logging.getLogger(__name__)

BOUNDARY_MASS_TOL = 1e-8


class TruncationError(RuntimeError):
    """The truncation box is too small for the requested accuracy."""


@dataclass(frozen=True)
class TruncatedChain:
    params: ModelParams
    N: int
    Q: sp.csr_matrix

    @property
    def n_states(self) -> int:
        return 2 * (self.N + 1) ** 2

    def index(self, mode: int, n: int, k: int) -> int:
        return (mode * (self.N + 1) + n) * (self.N + 1) + k


@dataclass(frozen=True)
class StationaryTable:
    """Stationary probabilities ``probs[mode, n, k]`` on the truncation box."""

    params: ModelParams
    N: int
    probs: np.ndarray
    residual: float

    @property
    def boundary_mass(self) -> float:
        P = self.probs
        return float(P[:, -1, :].sum() + P[:, :, -1].sum() - P[:, -1, -1].sum())

    def to_csv(self, threshold: float = 1e-14) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mode", "n", "k", "prob"])
        for mode, n, k in zip(*np.nonzero(self.probs >= threshold)):
            w.writerow([int(mode), int(n), int(k), repr(float(self.probs[mode, n, k]))])
        return buf.getvalue()


def build_generator(params: ModelParams, N: int) -> TruncatedChain:
    """Sparse generator on ``{0,1} x [0,N]^2``.

    Arrivals to a full station 1 are blocked; a station-1 completion into a
    full station 2 leaves the system (blocking it instead would make
    ``{k = N, n > 0}`` a closed class when station 2 gets no capacity, p = 1).
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    p = params.p
    size = N + 1
    n, k = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    n = n.ravel()
    k = k.ravel()
    base = n * size + k
    off = size * size

    rows, cols, vals = [], [], []

    def add(mask, src, dst, rate):
        if rate == 0:
            return
        m = np.asarray(mask, dtype=bool)
        rows.append(src[m])
        cols.append(dst[m])
        vals.append(np.full(int(m.sum()), float(rate)))

    # operating mode
    add(n < N, base, base + size, params.lambda0)
    add(np.ones_like(n), base, base + off, params.gamma)
    both = (n > 0) & (k > 0)
    add(both & (k < N), base, base - size + 1, p * params.nu1)
    add(both & (k == N), base, base - size, p * params.nu1)
    add(both, base, base - 1, (1 - p) * params.nu2)
    add((n > 0) & (k == 0), base, base - size + 1, params.nu1)
    add((n == 0) & (k > 0), base, base - 1, params.nu2)
    # setup mode: arrivals only, then repair
    add(n < N, base + off, base + off + size, params.lambda1)
    add(np.ones_like(n), base + off, base, params.tau)

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    nstates = 2 * off
    Q = sp.coo_matrix((v, (r, c)), shape=(nstates, nstates)).tocsr()
    Q = Q - sp.diags(np.asarray(Q.sum(axis=1)).ravel())
    return TruncatedChain(params, N, Q.tocsr())


def stationary_distribution(chain: TruncatedChain) -> StationaryTable:
    """Solve ``pi Q = 0``, ``sum(pi) = 1`` by a sparse direct solve."""
    # pin the empty operating state and drop its balance equation; a dense
    # normalisation row would destroy the sparsity of the factorisation
    At = chain.Q.T.tocsc()
    lu = spla.splu(At[1:, 1:].tocsc(), permc_spec="MMD_AT_PLUS_A")
    pi = np.concatenate([[1.0], lu.solve(-At[1:, 0].toarray().ravel())])
    if not np.all(np.isfinite(pi)):
        raise RuntimeError("sparse solve returned non-finite values")
    pi = np.where(pi < 0, 0.0, pi)  # round-off only; real negatives would show in the residual
    pi /= pi.sum()
    residual = float(np.abs(chain.Q.T @ pi).max())
    size = chain.N + 1
    return StationaryTable(chain.params, chain.N, pi.reshape(2, size, size), residual)


def solve(params: ModelParams, N: int = 200, *, auto_escalate: bool = True,
          max_N: int = 800) -> StationaryTable:
    """Stationary table with the boundary-mass check, enlarging N by 1.5x if needed."""
    require_stable(params)
    while True:
        table = stationary_distribution(build_generator(params, N))
        if table.boundary_mass <= BOUNDARY_MASS_TOL:
            return table
        if not auto_escalate or N >= max_N:
            raise TruncationError(
                f"boundary mass {table.boundary_mass:.3g} exceeds {BOUNDARY_MASS_TOL:g} at N={N}; "
                "increase N")
        N = min(max_N, int(math.ceil(1.5 * N)))
        log.info("boundary mass too large, retrying with N=%d", N)


@dataclass(frozen=True)
class OracleMetrics:
    EQ1: float
    EQ2: float
    pi0_00: float
    mode_probs: tuple[float, float]


def oracle_metrics(table: StationaryTable) -> OracleMetrics:
    P = table.probs
    idx = np.arange(table.N + 1)
    marg = P.sum(axis=0)
    EQ1 = float(marg.sum(axis=1) @ idx)
    EQ2 = float(marg.sum(axis=0) @ idx)
    modes = P.sum(axis=(1, 2))
    return OracleMetrics(EQ1, EQ2, float(P[0, 0, 0]), (float(modes[0]), float(modes[1])))


def pgf_from_table(table: StationaryTable, x, y, mode: int = 0):
    """``sum_{n,k} pi_mode(n,k) x^n y^k`` (vectorised over x and y)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    P = table.probs[mode]
    powers = np.arange(table.N + 1)
    X = x[..., None] ** powers
    Y = y[..., None] ** powers
    out = np.einsum("...n,nk,...k->...", X, P, Y)
    return out if out.ndim else complex(out)


# --------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class Estimate:
    mean: float
    half_width: float
    batch_values: tuple[float, ...] = field(repr=False, default=())

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    def covers(self, value: float) -> bool:
        return self.low <= value <= self.high


@dataclass(frozen=True)
class SimulationResult:
    params: ModelParams
    horizon: float
    seed: int
    batches: int
    events: int
    EQ1: Estimate
    EQ2: Estimate
    mode0_fraction: Estimate
    empty_fraction: Estimate

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "mean", "ci_low", "ci_high"])
        for name in ("EQ1", "EQ2", "mode0_fraction", "empty_fraction"):
            e = getattr(self, name)
            w.writerow([name, repr(e.mean), repr(e.low), repr(e.high)])
        return buf.getvalue()


def _batch_estimate(values: np.ndarray, level: float) -> Estimate:
    b = len(values)
    mean = float(values.mean())
    sd = float(values.std(ddof=1))
    half = float(stats.t.ppf(0.5 + level / 2, b - 1) * sd / math.sqrt(b))
    return Estimate(mean, half, tuple(float(v) for v in values))


def simulate(params: ModelParams, horizon: float = 2e4, seed: int = 0, batches: int = 20,
             warmup: float = 0.05, level: float = 0.95) -> SimulationResult:
    """Event-driven simulation of the untruncated chain with batch-means CIs.

    The first ``warmup`` fraction of the horizon is discarded; the rest is cut
    into ``batches`` equal time windows whose time averages give the CI.
    """
    require_stable(params)
    if batches < 2:
        raise ValueError("need at least two batches")
    rng = np.random.default_rng(seed)
    p, nu1, nu2 = params.p, params.nu1, params.nu2
    lam0, lam1, gam, tau = params.lambda0, params.lambda1, params.gamma, params.tau

    t0 = warmup * horizon
    width = (horizon - t0) / batches
    acc = np.zeros((batches, 4))  # time-integrals of n, k, mode0, empty0

    chunk = 65536
    exps = rng.standard_exponential(chunk)
    unif = rng.random(chunk)
    j = 0

    t = 0.0
    mode, n, k = 0, 0, 0
    events = 0
    while t < horizon:
        if mode == 0:
            if n > 0 and k > 0:
                s1, s2 = p * nu1, (1 - p) * nu2
            elif n > 0:
                s1, s2 = nu1, 0.0
            elif k > 0:
                s1, s2 = 0.0, nu2
            else:
                s1 = s2 = 0.0
            total = lam0 + gam + s1 + s2
        else:
            total = lam1 + tau
        if j == chunk:
            exps = rng.standard_exponential(chunk)
            unif = rng.random(chunk)
            j = 0
        dt = exps[j] / total
        u = unif[j] * total
        j += 1

        # accumulate state occupancy over [t, t+dt) clipped to the batch windows
        a, b_end = max(t, t0), min(t + dt, horizon)
        while a < b_end:
            bi = min(int((a - t0) / width), batches - 1)
            edge = min(b_end, t0 + (bi + 1) * width)
            dur = edge - a
            acc[bi, 0] += n * dur
            acc[bi, 1] += k * dur
            if mode == 0:
                acc[bi, 2] += dur
                if n == 0 and k == 0:
                    acc[bi, 3] += dur
            a = edge
        t += dt
        if t >= horizon:
            break
        events += 1

        if mode == 0:
            if u < lam0:
                n += 1
            elif u < lam0 + gam:
                mode = 1
            elif u < lam0 + gam + s1:
                n -= 1
                k += 1
            else:
                k -= 1
        else:
            if u < lam1:
                n += 1
            else:
                mode = 0

    avg = acc / width
    ests = [_batch_estimate(avg[:, i], level) for i in range(4)]
    return SimulationResult(params, horizon, seed, batches, events, *ests)
