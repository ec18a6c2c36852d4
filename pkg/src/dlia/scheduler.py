"""Exhaustive opportunistic scheduling over all size-S user subsets."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import InfeasibleConfig, InfeasibleSubset
from .schemes import equivalent_channels, initial_receive, scheme_precoder

__all__ = ["ScheduleDecision", "schedule", "metric_denominator", "subset_rates", "all_subsets"]


@dataclass(frozen=True)
class ScheduleDecision:
    chosen: tuple
    metric_value: float
    per_subset_metrics: np.ndarray | None = None
    subsets: np.ndarray | None = None


def all_subsets(k_users, s):
    """All size-``s`` subsets of ``range(k_users)`` in lexicographic order."""
    combos = list(itertools.combinations(range(k_users), s))
    return np.array(combos, dtype=int).reshape(len(combos), s)


def metric_denominator(config, budget):
    """Interference-plus-noise assumed by the scheduler.

    The BS cannot see out-of-cell interference on the fed-back channels:
    zf_ia and unified_ia assume the dominant interferer is handled by the
    receiver, iter_mf charges its average power.
    """
    if config.kind == "iter_mf":
        return 1.0 + budget.inr_dom + budget.inr_rem
    return 1.0 + budget.inr_rem


def subset_rates(eq_all, subsets, snr, s, denominator, precoder=None):
    """Estimated sum rate (bits/s/Hz) of each subset; -inf when infeasible.

    ``eq_all`` holds the ``(K, M)`` iteration-0 equivalent channels. For each
    subset the zero-forcing transmit vectors are rebuilt from that subset's
    rows only, then rescaled to unit radiated power through ``precoder``.
    """
    stacked = eq_all[subsets]
    v, cond = numerics.pseudo_inverse_columns(stacked)
    gains = np.abs(np.einsum("csm,cms->cs", stacked, v)) ** 2
    if precoder is not None:
        radiated = np.linalg.norm(precoder.matrix @ v, axis=-2) ** 2
        gains = gains / np.where(radiated > 0, radiated, 1.0)
    rates = np.sum(np.log2(1.0 + (snr / s) * gains / denominator), axis=-1)
    return np.where(cond <= numerics.COND_LIMIT, rates, -np.inf)


def schedule(drop, budget, config, init_rx=None, cell=0, keep_table=False):
    """Pick the size-S served set maximizing the estimated sum rate.

    Ties go to the lexicographically smallest subset. Subsets whose stacked
    equivalent channels are rank-deficient score ``-inf``.
    """
    k_users, s = drop.users_per_cell, config.streams
    if k_users < s:
        raise InfeasibleConfig(f"K={k_users} users cannot fill S={s} streams")
    p = scheme_precoder(config, drop.m, budget)
    if init_rx is None:
        init_rx, _ = initial_receive(drop, budget, config, cell, p=p)
    eq_all = equivalent_channels(init_rx, drop.direct[cell], p)
    subsets = all_subsets(k_users, s)
    rates = subset_rates(eq_all, subsets, budget.snr, s, metric_denominator(config, budget), p)
    if not np.any(np.isfinite(rates)):
        raise InfeasibleSubset("every candidate subset is rank-deficient")
    best = int(np.argmax(rates))
    chosen = tuple(int(k) for k in subsets[best])
    return ScheduleDecision(
        chosen,
        float(rates[best]),
        rates if keep_table else None,
        subsets if keep_table else None,
    )


def n_subsets(k_users, s):
    return math.comb(k_users, s)
