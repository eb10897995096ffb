import numpy as np
import pandas as pd


def interpolate_masked(vec):
    """
    Replace nans in a 1d vector by linear interpolation between the neighbouring finite samples; leading and
    trailing nans take the nearest finite value.
    """
    return np.array(pd.DataFrame(vec).interpolate(method="linear").bfill().ffill())[:, 0]


def chunk_indices(n_items, numthreads):
    """
    Split range(n_items) into contiguous chunks for a process pool, about 3 chunks per process.

    Returns:
        List of index arrays covering 0..n_items-1 in order.
    """
    chunk_size = np.max([1, n_items // (3 * numthreads)])
    n_chunks = np.max([1, n_items // chunk_size])
    indices_list = []
    for k in range(n_chunks - 1):
        indices_list.append(np.arange(k * chunk_size, (k + 1) * chunk_size))
    indices_list.append(np.arange((n_chunks - 1) * chunk_size, n_items))
    return indices_list


def central_difference(func, x, step):
    """
    Central finite difference of func at x.
    """
    return (func(x + step) - func(x - step)) / (2 * step)


def is_monotone_nonincreasing(values, rtol=1e-9):
    values = np.asarray(values, dtype=float)
    slack = rtol * np.maximum(np.abs(values[1:]), np.abs(values[:-1]))
    return bool(np.all(values[1:] <= values[:-1] + slack))
