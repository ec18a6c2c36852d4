"""Transmit and receive vector design for the three downlink schemes.

``zf_ia``
    Receive vector in the left null space of the dominant interference
    ``G P`` seen through a rank-``S`` front precoder, followed by a
    zero-forcing transmit precoder built from fed-back equivalent channels.
``iter_mf``
    Matched-filter receive vector (dominant left singular vector of ``H``)
    and zero-forcing transmit vectors, optionally iterated.
``unified_ia``
    MMSE-like receiver against the *expected* interference covariance
    produced by a fixed front precoder whose last ``M - S`` columns are
    weighted by ``kappa``.

All per-user work is vectorized over a leading user axis: ``h`` has shape
``(K, N, M)``, receive vectors ``(K, N)``, transmit vectors ``(K, M)``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import DimensionMismatch, InfeasibleConfig, OutOfRange
from .layout import kappa_policy, parse_kappa_mode

__all__ = [
    "SCHEME_KINDS",
    "BASIS_KINDS",
    "FrontPrecoder",
    "SchemeConfig",
    "TxRxState",
    "build_front_precoder",
    "scheme_precoder",
    "expected_covariance",
    "expected_covariance_multi",
    "zfia_receive",
    "mf_receive",
    "mmse_receive",
    "zf_transmit",
    "initial_receive",
    "equivalent_channels",
    "radiated_vectors",
    "run_scheme",
]

SCHEME_KINDS = ("zf_ia", "iter_mf", "unified_ia")
BASIS_KINDS = ("identity", "dft", "seeded_random_unitary")


@dataclass(frozen=True)
class FrontPrecoder:
    """Fixed ``M x M`` front-end precoder ``[f_1..f_S, k f_{S+1}..k f_M]``."""

    matrix: np.ndarray
    s: int
    kappa: float
    basis_kind: str = "identity"

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def stream_columns(self):
        """The first ``S`` (unweighted) columns, shape ``(M, S)``."""
        return self.matrix[:, : self.s]


@dataclass(frozen=True)
class SchemeConfig:
    kind: str
    streams: int = 3
    iterations: int = 0
    kappa_mode: object = "auto"
    dominant_count: int = 1
    basis_kind: str = "identity"
    basis_seed: int = 0
    init: str = "designed"

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise OutOfRange(f"unknown scheme {self.kind!r}")
        if self.streams < 1:
            raise OutOfRange("streams must be >= 1")
        if self.iterations < 0:
            raise OutOfRange("iterations must be >= 0")
        if self.dominant_count not in (1, 2):
            raise OutOfRange("dominant_count must be 1 or 2")
        if self.basis_kind not in BASIS_KINDS:
            raise OutOfRange(f"unknown basis {self.basis_kind!r}")
        if self.init not in ("designed", "random"):
            raise OutOfRange(f"unknown init {self.init!r}")
        object.__setattr__(self, "kappa_mode", parse_kappa_mode(self.kappa_mode))

    def validate_dims(self, m, n):
        if self.streams > min(m, n):
            raise InfeasibleConfig(f"streams={self.streams} exceeds min(M, N)={min(m, n)}")
        if self.kind == "zf_ia":
            if m <= self.streams:
                raise InfeasibleConfig("zf_ia needs M > S to reserve an interference dimension")
            if n <= self.dominant_count * self.streams:
                raise InfeasibleConfig("zf_ia needs N > (dominant interferers) * S for a null receive vector")


@dataclass(frozen=True)
class TxRxState:
    """Vectors of the scheduled users of one cell after some iterations.

    ``tx[i]``, ``rx[i]`` and ``eq_channels[i]`` belong to user ``users[i]``.
    """

    users: tuple
    tx: np.ndarray
    rx: np.ndarray
    eq_channels: np.ndarray
    precoder: FrontPrecoder
    iteration_index: int
    cell: int = 0
    phi_bar: np.ndarray | None = field(default=None, repr=False)


def _unitary_basis(m, basis_kind, seed):
    if basis_kind == "identity":
        return np.eye(m, dtype=complex)
    if basis_kind == "dft":
        idx = np.arange(m)
        return np.exp(-2j * np.pi * np.outer(idx, idx) / m) / np.sqrt(m)
    if basis_kind == "seeded_random_unitary":
        rng = np.random.default_rng(seed)
        z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        d = np.diag(r)
        return q * (d / np.abs(d))
    raise OutOfRange(f"unknown basis {basis_kind!r}")


def build_front_precoder(m, s, kappa, basis_kind="identity", seed=0):
    """Front precoder with singular values ``1`` (x S) and ``kappa`` (x M-S).

    >>> build_front_precoder(4, 3, 0.0).matrix.real
    array([[1., 0., 0., 0.],
           [0., 1., 0., 0.],
           [0., 0., 1., 0.],
           [0., 0., 0., 0.]])
    """
    if not 1 <= s <= m:
        raise OutOfRange(f"need 1 <= s <= m, got s={s}, m={m}")
    if not 0 <= kappa <= 1:
        raise OutOfRange(f"kappa must lie in [0, 1], got {kappa}")
    basis = _unitary_basis(m, basis_kind, seed)
    weights = np.r_[np.ones(s), np.full(m - s, float(kappa))]
    return FrontPrecoder(basis * weights, int(s), float(kappa), basis_kind)


def scheme_precoder(config, m, budget):
    """Front precoder used by ``config.kind``.

    zf_ia transmits on the first ``S`` basis columns only (kappa = 0),
    iter_mf uses the identity (no front precoding), unified_ia resolves kappa
    from the link budget.
    """
    if config.kind == "zf_ia":
        return build_front_precoder(m, config.streams, 0.0, config.basis_kind, config.basis_seed)
    if config.kind == "iter_mf":
        return build_front_precoder(m, config.streams, 1.0, "identity")
    kappa = kappa_policy(budget.gamma, config.kappa_mode)
    return build_front_precoder(m, config.streams, kappa, config.basis_kind, config.basis_seed)


def _matrix(p):
    return p.matrix if isinstance(p, FrontPrecoder) else np.asarray(p, dtype=complex)


def expected_covariance(g_dom, p, snr, s, inr_rem):
    """``(1 + inr_rem) I + (snr / s) G P P^H G^H`` for one or a stack of G."""
    return expected_covariance_multi([g_dom], p, snr, s, inr_rem)


def expected_covariance_multi(g_list, p, snr, s, inr_rem):
    """Expected interference-plus-noise covariance over several dominant BSs.

    Each interferer's zero-forcing precoder is modelled with i.i.d.
    CN(0, 1/S) entries, so only the front precoder survives the expectation.
    """
    if not 1 <= len(g_list) <= 2:
        raise DimensionMismatch("expected one or two dominant interferers")
    if snr < 0 or inr_rem < 0 or s < 1:
        raise OutOfRange("need snr >= 0, inr_rem >= 0, s >= 1")
    pm = _matrix(p)
    ppH = pm @ pm.conj().T
    g0 = np.asarray(g_list[0], dtype=complex)
    n = g0.shape[-2]
    acc = np.zeros(g0.shape[:-2] + (n, n), dtype=complex)
    for g in g_list:
        g = np.asarray(g, dtype=complex)
        if g.shape != g0.shape or g.shape[-1] != pm.shape[0]:
            raise DimensionMismatch(f"cross channel shape {g.shape} incompatible with precoder {pm.shape}")
        acc = acc + g @ ppH @ numerics.hermitian(g)
    phi = (snr / s) * acc + (1.0 + inr_rem) * np.eye(n)
    # remove rounding-level skew so downstream Hermitian checks are exact
    return 0.5 * (phi + numerics.hermitian(phi))


def zfia_receive(g_dom, p_columns):
    """Unit receive vector nulling ``G P_S`` (depends on interference only)."""
    g_dom = np.asarray(g_dom, dtype=complex)
    eff = g_dom @ np.asarray(p_columns, dtype=complex)
    return numerics.left_null_unit_vector(eff)


def mf_receive(h):
    """Matched-filter receive vector: dominant left singular vector of ``h``."""
    return numerics.max_left_singular_vector(h)


def mmse_receive(phi_bar, h, p, v):
    """``normalize(phi_bar^{-1} H P v)``; works per user or on user stacks."""
    target = np.einsum("...nm,...m->...n", np.asarray(h) @ _matrix(p), np.asarray(v))
    return numerics.normalize(numerics.hermitian_solve(phi_bar, target))


def zf_transmit(eq_channels):
    """Zero-forcing transmit vectors for stacked equivalent channels.

    Returns an ``(S, M)`` array whose row ``k`` is the unit transmit vector
    of the ``k``-th stacked user.
    """
    eq = np.asarray(eq_channels, dtype=complex)
    if eq.ndim == 1:
        eq = eq[None, :]
    v = numerics.right_pseudo_inverse(eq)
    return np.swapaxes(v, -1, -2)


def equivalent_channels(rx, h, p):
    """Fed-back rows ``u_k^H H_k P``, shape ``(K, M)``."""
    return np.einsum("kn,knm->km", np.conj(rx), np.asarray(h) @ _matrix(p))


def radiated_vectors(tx, p):
    """Antenna-domain vectors ``P v_k / ||P v_k||``, one per row.

    Transmit vectors live in the front-precoded domain; with ``kappa < 1``
    the front precoder shrinks them, so each stream is rescaled to spend its
    full share of the transmit power.
    """
    x = np.asarray(tx) @ _matrix(p).T
    return numerics.normalize(x)


def user_covariances(drop, budget, config, p, cell=0, users=None):
    """Expected covariances of the selected users of ``cell`` (unified_ia)."""
    sel = slice(None) if users is None else list(users)
    g_list = [drop.cross[cell, d][sel] for d in range(drop.dominant_count)]
    return expected_covariance_multi(g_list, p, budget.snr, config.streams, budget.inr_rem)


def initial_receive(drop, budget, config, cell=0, users=None, p=None):
    """Iteration-0 receive vectors of every (or the listed) user of ``cell``.

    Returns ``(rx, phi_bar)`` where ``phi_bar`` is ``None`` except for
    unified_ia.
    """
    config.validate_dims(drop.m, drop.n)
    if p is None:
        p = scheme_precoder(config, drop.m, budget)
    sel = slice(None) if users is None else list(users)
    h = drop.direct[cell][sel]
    if config.kind == "iter_mf":
        return mf_receive(h), None
    if config.kind == "zf_ia":
        g = np.concatenate([drop.cross[cell, d][sel] for d in range(drop.dominant_count)], axis=-1)
        cols = np.kron(np.eye(drop.dominant_count), p.stream_columns)
        return zfia_receive(g, cols), None
    phi = user_covariances(drop, budget, config, p, cell, users)
    hp = h @ p.matrix
    w = numerics.hermitian_solve(phi[..., None, :, :], np.swapaxes(hp, -1, -2))
    gram = numerics.hermitian(hp) @ np.swapaxes(w, -1, -2)
    gram = 0.5 * (gram + numerics.hermitian(gram))
    v0 = numerics.max_eigenvector_hermitian(gram)
    return mmse_receive(phi, h, p, v0), phi


def _random_unit(rng, shape):
    z = rng.standard_normal(shape + (2,))
    return numerics.normalize(z[..., 0] + 1j * z[..., 1])


def run_scheme(drop, budget, config, scheduled, cell=0, init_rx=None):
    """Run one scheme for a fixed served set and return the final state.

    Parameters
    ----------
    scheduled : sequence of int
        Indices of the ``S`` served users of ``cell``.
    init_rx : ndarray, optional
        Iteration-0 receive vectors of *all* users; recomputed if omitted.
        Ignored when ``config.init == 'random'``.
    """
    users = tuple(int(k) for k in scheduled)
    if len(users) != config.streams:
        raise InfeasibleConfig(f"scheduled {len(users)} users for {config.streams} streams")
    config.validate_dims(drop.m, drop.n)
    p = scheme_precoder(config, drop.m, budget)
    h = drop.direct[cell][list(users)]
    phi = None
    if config.kind == "unified_ia":
        phi = user_covariances(drop, budget, config, p, cell, users)

    if config.init == "random" and config.kind != "zf_ia":
        rx = _random_unit(drop.random_stream(1000 + cell), (len(users), drop.n))
    elif init_rx is not None:
        rx = np.asarray(init_rx)[list(users)]
    else:
        rx, _ = initial_receive(drop, budget, config, cell, users, p)

    eq = equivalent_channels(rx, h, p)
    tx = zf_transmit(eq)
    iterations = 0 if config.kind == "zf_ia" else config.iterations
    for _ in range(iterations):
        if config.kind == "unified_ia":
            rx = mmse_receive(phi, h, p, tx)
        else:
            rx = numerics.normalize(np.einsum("knm,km->kn", h @ p.matrix, tx))
        eq = equivalent_channels(rx, h, p)
        tx = zf_transmit(eq)
    return TxRxState(users, tx, rx, eq, p, iterations, cell, phi)
