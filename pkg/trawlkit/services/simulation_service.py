# trawlkit/services/simulation_service.py
#
# Exact slice-based simulation of periodic trawl processes on a grid, and a
# brute-force grid oracle used to cross-check it.
#
# Notes:
# - compute_slices builds the full (n+1) x (n+1) slice matrix; the simulator
#   never materialises it and streams one column at a time instead, so memory
#   stays O(n) while the number of draws is O(n^2).
# - Column j of the slice matrix (1-based) holds the slices that enter
#   Y_{k delta} for k >= j-1. Its suffix sums, weighted by p, are added to the
#   path from position j-1 onwards.
# - Replicate r always uses the substream (master_seed, r).

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from trawlkit.core.config import get_settings
from trawlkit.core.errors import ConfigurationError, DomainError
from trawlkit.core.random import RandomStream
from trawlkit.models import ModelSpec, One, PeriodicFunction, SimPath, SliceMatrix, TrawlFunction
from trawlkit.models.levy import LevySeed

logger = logging.getLogger(__name__)

BURN_IN_TAIL_FRACTION = 0.01


def slice_vectors(
    g: TrawlFunction, n: int, delta: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(b, c, d, e) with 0-based index k-1 for the 1-based k used in the slice layout.

    b[k] = int_{(k-1)delta}^{k delta} g, d[k] = int_{(k-1)delta}^inf g,
    c[k] = b[k] - b[k+1] and e[k] = d[k] - d[k+1].
    """
    if n < 1:
        raise DomainError(f"grid count must be >= 1, got {n}")
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    total = g.total_mass
    if not math.isfinite(total):
        raise DomainError(f"trawl {g.describe()} is not integrable")

    b = np.array([g.integral(k * delta, (k + 1) * delta) for k in range(n + 1)])
    d = np.array([g.integral(k * delta) for k in range(n + 1)])
    c = b[:-1] - b[1:]
    # e[k] = d[k] - d[k+1] is the single cell b[k]; computed directly to keep precision
    e = b[:-1].copy()
    return b, c, d, e


def compute_slices(g: TrawlFunction, n: int, delta: float) -> SliceMatrix:
    """Slice measures s[i, j], i, j = 1..n+1, with unused entries zero."""
    b, c, d, e = slice_vectors(g, n, delta)
    s = np.zeros((n + 1, n + 1))
    for k in range(1, n + 1):
        if n + 1 - k >= 2:
            s[k - 1, 1 : n + 1 - k] = c[k - 1]
        s[k - 1, n + 1 - k] = b[k - 1]
    s[:n, 0] = e
    s[n, 0] = d[n]
    if np.any(s < 0):
        # only possible for a trawl function that is not monotone
        raise DomainError("negative slice measure: trawl function is not decreasing")
    logger.debug("slice matrix for %s: n=%d delta=%g", g.describe(), n, delta)
    return SliceMatrix(n=n, delta=delta, s=s, b=b, c=c, d=d, e=e)


def _column_measures(
    b: np.ndarray, c: np.ndarray, d: np.ndarray, e: np.ndarray, n: int
) -> Iterator[np.ndarray]:
    """Used entries of each slice-matrix column, top to bottom."""
    yield np.append(e, d[n])
    for jj in range(1, n + 1):
        yield np.append(c[: n - jj], b[n - jj])


def _accumulate_column(x: np.ndarray, column: np.ndarray, weights: np.ndarray, jj: int) -> None:
    """x[jj + r] += weights[r] * sum(column[r:]) for r = 0..len(column)-1."""
    suffix = np.cumsum(column[::-1])[::-1]
    x[jj:] += weights[: column.size] * suffix


def add_weighted_slices(L_matrix: np.ndarray, w: Sequence[float]) -> np.ndarray:
    """x[1+k] = sum_{j=1}^{k+1} w[k+2-j] sum_{i=k+2-j}^{n+2-j} L[i, j], k = 0..n."""
    L_matrix = np.asarray(L_matrix, dtype=float)
    w = np.asarray(w, dtype=float)
    if L_matrix.ndim != 2 or L_matrix.shape[0] != L_matrix.shape[1]:
        raise DomainError(f"slice matrix must be square, got shape {L_matrix.shape}")
    size = L_matrix.shape[0]
    if w.shape != (size,):
        raise DomainError(f"weights must have length {size}, got {w.shape}")
    x = np.zeros(size)
    for jj in range(size):
        _accumulate_column(x, L_matrix[: size - jj, jj], w, jj)
    return x


def kernel_weights(
    p: PeriodicFunction, n: int, delta: float, weight_shift: bool = False
) -> np.ndarray:
    """w[r] = p(r delta), r = 1..n+1, or p((r-1) delta) with the shift."""
    if not p.has_kernel:
        raise ConfigurationError(f"{p.describe()} has no kernel to simulate with")
    start = 0 if weight_shift else 1
    return np.asarray(p(np.arange(start, start + n + 1) * delta), dtype=float)


def default_burn_in(g: TrawlFunction, delta: float) -> int:
    """ceil(T/delta) with int_T^inf g = 1% of the total mass."""
    return int(math.ceil(g.mass_quantile(BURN_IN_TAIL_FRACTION) / delta - 1e-12))


def _resolve_burn_in(model: ModelSpec, n: int, burn_in: Optional[int]) -> int:
    if burn_in is None:
        burn_in = default_burn_in(model.g, model.delta)
    if burn_in < 0 or burn_in >= n:
        raise DomainError(f"burn-in {burn_in} must lie in [0, n) with n={n}")
    return burn_in


def _simulate_weighted(
    seed: LevySeed,
    g: TrawlFunction,
    n: int,
    delta: float,
    weight_sets: List[np.ndarray],
    stream: RandomStream,
) -> List[np.ndarray]:
    b, c, d, e = slice_vectors(g, n, delta)
    outputs = [np.zeros(n + 1) for _ in weight_sets]
    generator = stream.generator
    for jj, measures in enumerate(_column_measures(b, c, d, e, n)):
        draws = seed.draw_slices(measures, generator)
        for x, weights in zip(outputs, weight_sets):
            _accumulate_column(x, draws, weights, jj)
    return outputs


def simulate(
    model: ModelSpec,
    n: Optional[int] = None,
    master_seed: int = 0,
    burn_in: Optional[int] = None,
    weight_shift: bool = False,
    replicate: int = 0,
) -> SimPath:
    """Y_0, Y_delta, ..., Y_{n delta} with the first ``burn_in`` points dropped.

    ``burn_in`` defaults to the 99% tail-mass rule.
    """
    n = model.n if n is None else n
    burn_in = _resolve_burn_in(model, n, burn_in)
    weights = kernel_weights(model.p, n, model.delta, weight_shift)
    stream = RandomStream.for_replicate(master_seed, replicate)
    (path,) = _simulate_weighted(model.seed, model.g, n, model.delta, [weights], stream)
    return SimPath(
        delta=model.delta,
        values=path[burn_in:],
        burn_in=burn_in,
        master_seed=master_seed,
        replicate=replicate,
    )


def simulate_shared_noise(
    model: ModelSpec, master_seed: int, burn_in: int = 0, replicate: int = 0
) -> Tuple[SimPath, SimPath]:
    """(Y, X): the periodic trawl process and the plain trawl process (p = 1)
    built from the same slice draws."""
    n = model.n
    burn_in = _resolve_burn_in(model, n, burn_in)
    weight_y = kernel_weights(model.p, n, model.delta)
    weight_x = kernel_weights(One(), n, model.delta)
    stream = RandomStream.for_replicate(master_seed, replicate)
    y, x = _simulate_weighted(
        model.seed, model.g, n, model.delta, [weight_y, weight_x], stream
    )

    def make(values: np.ndarray) -> SimPath:
        return SimPath(
            delta=model.delta,
            values=values[burn_in:],
            burn_in=burn_in,
            master_seed=master_seed,
            replicate=replicate,
        )

    return make(y), make(x)


def simulate_replicates(
    model: ModelSpec,
    n: Optional[int] = None,
    master_seed: int = 0,
    replicates: int = 1,
    threads: Optional[int] = None,
    burn_in: Optional[int] = None,
    weight_shift: bool = False,
) -> List[SimPath]:
    """Independent paths ordered by replicate index, whatever the thread count."""
    if replicates < 1:
        raise DomainError(f"replicate count must be >= 1, got {replicates}")
    threads = threads or get_settings().threads
    n = model.n if n is None else n
    burn_in = _resolve_burn_in(model, n, burn_in)
    logger.info(
        "simulating %d replicate(s) of %s on %d thread(s)", replicates, model.describe(), threads
    )

    def run(r: int) -> SimPath:
        return simulate(model, n, master_seed, burn_in, weight_shift, replicate=r)

    if threads <= 1 or replicates == 1:
        return [run(r) for r in range(replicates)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, range(replicates)))


def simulate_grid_oracle(
    model: ModelSpec,
    n: Optional[int] = None,
    spatial_cells: int = 100,
    temporal_extension: Optional[float] = None,
    master_seed: int = 0,
    substeps: int = 4,
    replicate: int = 0,
) -> SimPath:
    """Brute-force approximation of the trawl integral on a 2-D grid.

    [0, g(0)] x [-temporal_extension, n delta] is cut into spatial_cells rows
    and time columns of width delta/substeps. Each cell gets one draw; a cell
    column at time s contributes p(t - s) times the sum of the cells lying
    below g(t - s) to Y_t.
    """
    n = model.n if n is None else n
    if spatial_cells < 100:
        raise DomainError(f"spatial_cells must be >= 100, got {spatial_cells}")
    if substeps < 1:
        raise DomainError(f"substeps must be >= 1, got {substeps}")
    g, p, delta = model.g, model.p, model.delta
    if not p.has_kernel:
        raise ConfigurationError(f"{p.describe()} has no kernel to simulate with")

    values = np.zeros(n + 1)
    height = float(g(0.0))
    if height == 0.0:
        return SimPath(delta=delta, values=values, burn_in=0, master_seed=master_seed)

    if temporal_extension is None:
        temporal_extension = g.mass_quantile(1e-4) if math.isinf(g.support_end) else g.support_end
    step = delta / substeps
    before = int(math.ceil(temporal_extension / step))
    columns = before + n * substeps
    cell_height = height / spatial_cells
    cell_measure = cell_height * step
    targets = np.arange(n + 1) * delta
    generator = RandomStream.for_replicate(master_seed, replicate).generator
    leb = np.full(spatial_cells, cell_measure)
    logger.debug(
        "grid oracle: %d x %d cells, extension %.3g", spatial_cells, columns, temporal_extension
    )

    for col in range(columns):
        mid = (col - before + 0.5) * step
        draws = model.seed.draw_slices(leb, generator)
        cumulative = np.concatenate(([0.0], np.cumsum(draws)))
        live = targets > mid
        if not np.any(live):
            continue
        lags = targets[live] - mid
        below = np.minimum(
            np.floor(np.asarray(g(lags), dtype=float) / cell_height).astype(int), spatial_cells
        )
        values[live] += np.asarray(p(lags), dtype=float) * cumulative[below]

    return SimPath(
        delta=delta, values=values, burn_in=0, master_seed=master_seed, replicate=replicate
    )
