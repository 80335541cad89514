"""Hot loops of the global rule.

Every kernel works on the compiled form of an automaton:

* ``nbr``    int32 ``(n_cells, n_nbrs)``: index of the cell each neighborhood word reaches
* ``rule_id`` int32 ``(n_cells,)``: row of ``tables`` holding the cell's local rule
* ``tables`` int64 ``(n_rules, n_states**n_nbrs)``: tabulated local rules

The numba versions are used when numba imports and ``MCA_BACKEND`` is not
``numpy``. Both backends compute identical results.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None


def _requested_backend() -> str:
    name = os.environ.get("MCA_BACKEND", "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"MCA_BACKEND must be 'numba' or 'numpy', not {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


BACKEND = _requested_backend()


# -- numpy -------------------------------------------------------------------


def step_numpy(states, nbr, rule_id, tables, n_states):
    idx = np.zeros(len(states), dtype=np.int64)
    for j in range(nbr.shape[1]):
        idx *= n_states
        idx += states[nbr[:, j]]
    return tables[rule_id, idx]


def step_batch_numpy(batch, nbr, rule_id, tables, n_states):
    idx = np.zeros(batch.shape, dtype=np.int64)
    for j in range(nbr.shape[1]):
        idx *= n_states
        idx += batch[:, nbr[:, j]]
    return tables[rule_id[None, :], idx]


def evolve_numpy(states, nbr, rule_id, tables, n_states, steps):
    # numpy converts non-intp fancy indexes on every use, so convert once
    nbr, rule_id = nbr.astype(np.intp), rule_id.astype(np.intp)
    cur = np.asarray(states, dtype=np.int64)
    for _ in range(steps):
        cur = step_numpy(cur, nbr, rule_id, tables, n_states)
    return cur


# -- numba -------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def step_numba(states, nbr, rule_id, tables, n_states):
        n, k = nbr.shape
        out = np.empty(n, dtype=np.int64)
        for x in range(n):
            idx = 0
            for j in range(k):
                idx = idx * n_states + states[nbr[x, j]]
            out[x] = tables[rule_id[x], idx]
        return out

    @numba.njit(cache=True)
    def step_batch_numba(batch, nbr, rule_id, tables, n_states):
        b = batch.shape[0]
        n, k = nbr.shape
        out = np.empty((b, n), dtype=np.int64)
        for r in range(b):
            for x in range(n):
                idx = 0
                for j in range(k):
                    idx = idx * n_states + batch[r, nbr[x, j]]
                out[r, x] = tables[rule_id[x], idx]
        return out

    @numba.njit(cache=True)
    def evolve_numba(states, nbr, rule_id, tables, n_states, steps):
        n, k = nbr.shape
        cur = states.copy()
        nxt = np.empty(n, dtype=np.int64)
        for _ in range(steps):
            for x in range(n):
                idx = 0
                for j in range(k):
                    idx = idx * n_states + cur[nbr[x, j]]
                nxt[x] = tables[rule_id[x], idx]
            cur, nxt = nxt, cur
        return cur

else:  # pragma: no cover
    step_numba = step_numpy
    step_batch_numba = step_batch_numpy
    evolve_numba = evolve_numpy


def kernels(backend: str | None = None):
    """(step, step_batch, evolve) for ``backend`` (default: the configured one)."""
    backend = backend or BACKEND
    if backend == "numba":
        return step_numba, step_batch_numba, evolve_numba
    if backend == "numpy":
        return step_numpy, step_batch_numpy, evolve_numpy
    raise ValueError(f"unknown backend {backend!r}")


def encode(batch: np.ndarray, n_states: int) -> np.ndarray:
    """Configuration rows to integers, first cell most significant."""
    codes = np.zeros(batch.shape[0], dtype=np.int64)
    for j in range(batch.shape[1]):
        codes = codes * n_states + batch[:, j]
    return codes


def decode(codes: np.ndarray, n_cells: int, n_states: int) -> np.ndarray:
    out = np.empty((len(codes), n_cells), dtype=np.int64)
    rest = np.array(codes, dtype=np.int64)
    for j in range(n_cells - 1, -1, -1):
        out[:, j] = rest % n_states
        rest //= n_states
    return out
