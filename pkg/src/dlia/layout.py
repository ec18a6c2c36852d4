"""Cell geometry, path loss and link budgets at a reference mobile.

Positions are in units of the cell radius ``R``; the inter-site distance of
the macro grid is ``2R``. Only received-power *ratios* enter the link budget,
so the absolute radius in km and the carrier frequency cancel out.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParam, InvalidPosition, NonPositiveDistance, OutOfRange

__all__ = [
    "LAYOUT_KINDS",
    "CellLayout",
    "LinkBudget",
    "build_layout",
    "path_loss_db",
    "link_budget",
    "link_budget_from_gamma",
    "kappa_policy",
    "parse_kappa_mode",
]

LAYOUT_KINDS = ("two_cell", "linear", "hex19_wraparound", "macro_pico")

MACRO_POWER_DBM = 46.0
PICO_POWER_DBM = 30.0
DEFAULT_FREQ_MHZ = 2000.0
PATH_LOSS_EXPONENT = 4.0
INTER_SITE = 2.0

_A1 = np.array([1.0, 0.0])
_A2 = np.array([0.5, math.sqrt(3.0) / 2.0])


@dataclass(frozen=True)
class CellLayout:
    """Base-station geometry plus the reference mobile for one layout.

    ``wrap_shifts`` holds the translation vectors used for minimum-image
    distances; it always contains the zero vector and nothing else for
    layouts without wrap-around.
    """

    kind: str
    bs_positions: np.ndarray
    bs_tx_power_dbm: np.ndarray
    reference_position: np.ndarray
    serving_bs: int
    cell_radius: float = 1.0
    radius_km: float = 0.5
    d_over_r: float | None = None
    wrap_shifts: np.ndarray = field(default_factory=lambda: np.zeros((1, 2)))

    @property
    def n_bs(self):
        return len(self.bs_positions)

    def distances(self, position):
        """Minimum-image distance (units of R) from ``position`` to every BS."""
        position = np.asarray(position, dtype=float)
        images = self.bs_positions[:, None, :] + self.wrap_shifts[None, :, :]
        return np.min(np.linalg.norm(images - position, axis=-1), axis=1)

    def extent(self):
        return float(np.max(np.linalg.norm(self.bs_positions, axis=1))) + INTER_SITE


@dataclass(frozen=True)
class LinkBudget:
    """Linear power ratios at the reference mobile (noise power = 1)."""

    snr: float
    inr_dom: float
    inr_rem: float
    gamma: float

    def __post_init__(self):
        for name in ("snr", "inr_dom", "inr_rem", "gamma"):
            val = getattr(self, name)
            if not val >= 0:
                raise InvalidParam(f"{name} must be >= 0, got {val}")
        # product form stays exact for subnormal powers, where the ratio does not
        if self.inr_dom > 0 and not math.isclose(self.inr_rem, self.gamma * self.inr_dom, rel_tol=1e-12, abs_tol=1e-300):
            raise InvalidParam("gamma must equal inr_rem / inr_dom")

    @property
    def dominant_gain(self):
        """Dominant-to-serving received power ratio (cross-channel variance)."""
        return self.inr_dom / self.snr if self.snr > 0 else 0.0


def _hex19_sites():
    sites = [q * _A1 + r * _A2 for q in range(-2, 3) for r in range(-2, 3) if abs(q + r) <= 2]
    # ring order: centre first, then by distance and angle
    sites.sort(key=lambda p: (round(float(np.hypot(*p)), 9), round(math.atan2(p[1], p[0]) % (2 * math.pi), 9)))
    return INTER_SITE * np.array(sites)


def _hex19_shifts():
    base = INTER_SITE * (2 * _A1 + 3 * _A2)
    shifts = [np.zeros(2)]
    for k in range(6):
        t = k * math.pi / 3
        rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        shifts.append(rot @ base)
    return np.array(shifts)


def path_loss_db(distance_km, freq_mhz=DEFAULT_FREQ_MHZ):
    """ITU-R M.1225 pedestrian path loss, ``40 log10(d) + 30 log10(f) + 49``."""
    d = np.asarray(distance_km, dtype=float)
    if np.any(d <= 0):
        raise NonPositiveDistance(f"distance must be positive, got {distance_km}")
    out = PATH_LOSS_EXPONENT * 10 * np.log10(d) + 30 * np.log10(freq_mhz) + 49.0
    return float(out) if out.ndim == 0 else out


def build_layout(kind, d_over_r=None, n_linear_cells=9, pico_angle_deg=0.0):
    """Construct one of the supported layouts with its reference mobile.

    Parameters
    ----------
    kind : {'two_cell', 'linear', 'hex19_wraparound', 'macro_pico'}
    d_over_r : float, optional
        Macro-to-pico distance over ``R``; required for ``macro_pico``.
    n_linear_cells : int
        Cells kept on each side of the reference pair in the linear layout.
    pico_angle_deg : float
        Direction of the pico-BS seen from macro-BS 0 (0 points at the
        neighbouring macro-BS, 30 at the three-cell corner).
    """
    if kind == "hex19":
        kind = "hex19_wraparound"
    if kind not in LAYOUT_KINDS:
        raise InvalidParam(f"unknown layout kind {kind!r}")
    if kind != "macro_pico" and d_over_r is not None:
        raise InvalidParam("d_over_r only applies to macro_pico")

    if kind == "two_cell":
        pos = np.array([[0.0, 0.0], [INTER_SITE, 0.0]])
        return CellLayout(kind, pos, np.full(2, MACRO_POWER_DBM), np.array([1.0, 0.0]), 0)

    if kind == "linear":
        if int(n_linear_cells) != n_linear_cells or n_linear_cells < 0:
            raise InvalidParam("n_linear_cells must be a non-negative integer")
        n = int(n_linear_cells)
        # serving BS at 0, its neighbour at +2R, n extra cells beyond each of them
        idx = [0, 1] + list(range(-n, 0)) + list(range(2, n + 2))
        pos = np.array([[INTER_SITE * i, 0.0] for i in idx])
        return CellLayout(kind, pos, np.full(len(idx), MACRO_POWER_DBM), np.array([1.0, 0.0]), 0)

    sites = _hex19_sites()
    shifts = _hex19_shifts()
    if kind == "hex19_wraparound":
        return CellLayout(kind, sites, np.full(19, MACRO_POWER_DBM), np.array([1.0, 0.0]), 0, wrap_shifts=shifts)

    if d_over_r is None:
        raise InvalidParam("macro_pico requires d_over_r")
    d = float(d_over_r)
    if not 0 < d <= 2:
        raise InvalidParam(f"d_over_r must lie in (0, 2], got {d_over_r}")
    gap_db = MACRO_POWER_DBM - PICO_POWER_DBM
    # equal received power: d_macro / d_pico = 10^(gap / (10 * exponent))
    ratio = 10 ** (gap_db / (10 * PATH_LOSS_EXPONENT))
    d_pico = d / (1 + ratio)
    axis = np.array([math.cos(math.radians(pico_angle_deg)), math.sin(math.radians(pico_angle_deg))])
    pico = d * axis
    pos = np.vstack([sites, pico])
    power = np.append(np.full(19, MACRO_POWER_DBM), PICO_POWER_DBM)
    mobile = (d - d_pico) * axis
    return CellLayout(kind, pos, power, mobile, 19, d_over_r=d, wrap_shifts=shifts)


def received_power_dbm(layout, position, freq_mhz=DEFAULT_FREQ_MHZ):
    """Received power from every BS at ``position``."""
    dist = layout.distances(position)
    if np.any(dist < 1e-9):
        raise InvalidPosition("mobile coincides with a base station")
    return layout.bs_tx_power_dbm - path_loss_db(dist * layout.radius_km, freq_mhz)


def link_budget(layout, mobile_position=None, serving_bs=None, snr_ref=1.0, dominant_count=1):
    """Link budget at a mobile, with SNR pinned to ``snr_ref``.

    The strongest ``dominant_count`` non-serving BSs form the dominant
    interference; every other BS contributes to the residual.
    """
    if mobile_position is None:
        mobile_position = layout.reference_position
    if serving_bs is None:
        serving_bs = layout.serving_bs
    if not 0 <= serving_bs < layout.n_bs:
        raise InvalidParam(f"serving_bs {serving_bs} out of range")
    if snr_ref < 0:
        raise InvalidParam("snr_ref must be >= 0")
    mobile_position = np.asarray(mobile_position, dtype=float)
    if np.linalg.norm(mobile_position) > layout.extent():
        raise InvalidPosition(f"mobile {mobile_position} lies outside the layout")
    if not 1 <= dominant_count < layout.n_bs:
        raise InvalidParam("dominant_count out of range")

    rx = received_power_dbm(layout, mobile_position)
    rel = 10 ** ((rx - rx[serving_bs]) / 10)
    others = np.delete(rel, serving_bs)
    others = np.sort(others)[::-1]
    dom = float(np.sum(others[:dominant_count]))
    rem = math.fsum(others[dominant_count:])
    gamma = rem / dom
    inr_dom = snr_ref * dom
    return LinkBudget(float(snr_ref), inr_dom, gamma * inr_dom, gamma)


def link_budget_from_gamma(snr, gamma, dom_to_signal_ratio=1.0):
    """Link budget with a prescribed interference ratio ``gamma``."""
    if dom_to_signal_ratio <= 0:
        raise InvalidParam("dom_to_signal_ratio must be positive")
    inr_dom = snr * dom_to_signal_ratio
    return LinkBudget(float(snr), float(inr_dom), float(gamma * inr_dom), float(gamma))


def parse_kappa_mode(text):
    """``'auto'`` or ``'fixed:<v>'`` -> ``'auto'`` or a float."""
    if isinstance(text, (int, float)):
        return float(text)
    text = text.strip()
    if text == "auto":
        return "auto"
    if text.startswith("fixed:"):
        try:
            return float(text[len("fixed:"):])
        except ValueError:
            raise OutOfRange(f"bad fixed kappa {text!r}") from None
    raise OutOfRange(f"kappa mode must be 'auto' or 'fixed:<v>', got {text!r}")


def kappa_policy(gamma, mode="auto"):
    """Front-precoder weight: ``min(sqrt(gamma), 1)`` or a fixed value."""
    if not gamma >= 0:
        raise OutOfRange(f"gamma must be >= 0, got {gamma}")
    mode = parse_kappa_mode(mode)
    if mode == "auto":
        return min(math.sqrt(gamma), 1.0)
    if not 0 <= mode <= 1:
        raise OutOfRange(f"fixed kappa must lie in [0, 1], got {mode}")
    return mode
