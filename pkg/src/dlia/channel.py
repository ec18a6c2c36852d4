"""Rayleigh-fading channel drops for the measured cell and its dominant interferers."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensions

__all__ = ["ChannelDrop", "draw_drop", "drop_seed", "complex_normal"]


def drop_seed(master_seed, drop_index):
    """64-bit seed for one drop, a hash of ``(master_seed, drop_index)``.

    Seeds depend only on the drop index, never on evaluation order, so any
    parallel schedule reproduces the same drops.
    """
    ss = np.random.SeedSequence([int(master_seed), int(drop_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def complex_normal(rng, shape, variance=1.0):
    """i.i.d. CN(0, variance) samples."""
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(variance / 2) * (z[..., 0] + 1j * z[..., 1])


@dataclass(frozen=True)
class ChannelDrop:
    """One realization of every channel matrix in a scenario.

    Cell 0 is the measured cell; cells ``1..dominant_count`` are its dominant
    interferers, each simulated with its own ``k_users`` users.

    Attributes
    ----------
    direct : ndarray, shape (cells, K, N, M)
        ``direct[c, k]`` is the channel from BS ``c`` to its own user ``k``.
    cross : ndarray, shape (cells, D, K, N, M)
        ``cross[c, d, k]`` is the channel from the ``d``-th dominant
        interferer of cell ``c`` to user ``k`` of cell ``c``. For cell 0 the
        ``d``-th dominant interferer is cell ``d + 1``.
    """

    m: int
    n: int
    users_per_cell: int
    dominant_count: int
    direct: np.ndarray
    cross: np.ndarray
    seed: int

    @property
    def n_cells(self):
        return self.direct.shape[0]

    def h(self, k, cell=0):
        return self.direct[cell, k]

    def g(self, k, dom=0, cell=0):
        return self.cross[cell, dom, k]

    def interferer_cell(self, dom):
        """Cell index of the measured cell's ``dom``-th dominant interferer."""
        return dom + 1

    def random_stream(self, tag):
        """Auxiliary generator tied to this drop (e.g. random initialization)."""
        return np.random.default_rng([self.seed, int(tag)])


def draw_drop(layout, budget, m, n, k_users, dominant_count=1, seed=0):
    """Draw all direct and dominant cross channels for one drop.

    Direct entries are CN(0, 1). Cross entries are CN(0, inr_dom / snr)
    split evenly over ``dominant_count`` interferers. Residual interference
    is not drawn; it is carried as white power ``budget.inr_rem``.
    """
    for name, val in (("m", m), ("n", n), ("k_users", k_users)):
        if int(val) != val or val < 1:
            raise InvalidDimensions(f"{name} must be a positive integer, got {val}")
    if dominant_count not in (1, 2):
        raise InvalidDimensions(f"dominant_count must be 1 or 2, got {dominant_count}")
    if layout is not None and dominant_count >= layout.n_bs:
        raise InvalidDimensions("layout has too few base stations for dominant_count")
    m, n, k_users = int(m), int(n), int(k_users)
    cells = 1 + dominant_count
    rng = np.random.default_rng(seed)
    direct = complex_normal(rng, (cells, k_users, n, m))
    cross_unit = complex_normal(rng, (cells, dominant_count, k_users, n, m))
    cross = np.sqrt(budget.dominant_gain / dominant_count) * cross_unit
    return ChannelDrop(m, n, k_users, dominant_count, direct, cross, int(seed))
