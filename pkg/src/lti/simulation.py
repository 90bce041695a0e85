"""Time-domain simulation and frequency-domain filtering of sampled signals."""
import logging
from typing import Optional

import numpy as np
from scipy import fft, signal as sps

from utils.errors import ConditioningError, DimensionError, DivergenceError
from .settings import AMPLIFICATION_GUARD, OVERFLOW_GUARD
from .signal import Signal
from .statespace import StateSpace

logger = logging.getLogger(__name__)

_GUARD_CHECK_EVERY = 256


def rk4_zoh_matrices(A: np.ndarray, B: np.ndarray, dt: float):
    """One classical RK4 step with the input held constant, as ``x+ = Phi x + Gamma u``."""
    n = A.shape[0]
    hA = dt * A
    eye = np.eye(n)
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    Phi = eye + hA + hA2 / 2.0 + hA3 / 6.0 + hA3 @ hA / 24.0
    Gamma = dt * (eye + hA / 2.0 + hA2 / 6.0 + hA3 / 24.0) @ B
    return Phi, Gamma


def simulate(sys: StateSpace, u: Signal, x0: Optional[np.ndarray] = None,
             overflow_guard: float = OVERFLOW_GUARD,
             return_states: bool = False):
    """Fixed-step RK4 simulation with zero-order-hold input.

    Args:
        sys: System to simulate.
        u: Input signal with ``sys.m`` channels; its ``dt`` is the step.
        x0: Initial state (zeros if omitted).
        overflow_guard: Abort when any state exceeds this magnitude.
        return_states: Also return the state trajectory as a Signal.

    Returns:
        Output Signal (and state Signal when requested).
    """
    if u.channels != sys.m:
        raise DimensionError(f"system expects {sys.m} input channels, signal has {u.channels}")
    n, N = sys.n, u.n_samples
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float).reshape(n)
    states = np.empty((n, N))
    if n:
        Phi, Gamma = rk4_zoh_matrices(sys.A, sys.B, u.dt)
        data = u.data
        for k in range(N):
            states[:, k] = x
            x = Phi @ x + Gamma @ data[:, k]
            if k % _GUARD_CHECK_EVERY == 0 or k == N - 1:
                peak = np.max(np.abs(x)) if x.size else 0.0
                if not np.isfinite(peak) or peak > overflow_guard:
                    raise DivergenceError(f"state magnitude {peak:.3e} exceeds guard at step {k}", step=k)
    y = sys.C @ states + sys.D @ u.data
    out = Signal(y, u.dt, u.t0)
    if return_states:
        return out, Signal(states, u.dt, u.t0)
    return out


def dft_grid(n_samples: int, dt: float, padding: int = 2):
    """Padded FFT length and the matching angular frequencies (rad/s)."""
    nfft = fft.next_fast_len(padding * n_samples)
    omegas = 2.0 * np.pi * fft.rfftfreq(nfft, d=dt)
    return nfft, omegas


def relay_length(n_samples: int, padding: int = 2) -> int:
    """Length of the periodic grid relayed signals live on."""
    return fft.next_fast_len(padding * n_samples)


def _guarded(G, omegas: np.ndarray, amplification_guard: float) -> np.ndarray:
    """Response on ``omegas``; ConditioningError where it exceeds the guard."""
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        response = G.evaluate(1j * omegas)
    mags = np.abs(response).max(axis=(0, 1))
    mags[~np.isfinite(mags)] = np.inf
    if mags.size:
        k = int(np.argmax(mags))
        if mags[k] > amplification_guard:
            raise ConditioningError(
                f"filter gain {mags[k]:.3e} at omega={omegas[k]:.4g} rad/s exceeds guard",
                omega=float(omegas[k]), magnitude=float(mags[k]),
            )
    return response


def apply_filter(G, u: Signal, amplification_guard: float = AMPLIFICATION_GUARD,
                 padding: int = 2, drop_singular_dc: bool = False) -> Signal:
    """Filter a finite-horizon signal by pointwise multiplication in frequency.

    ``G`` is anything with ``m``, ``p`` and ``evaluate(s)``: a TransferMatrix
    or a ResponseProduct. The channel means are removed before the transform
    and passed through the DC gain afterwards; the input is zero-padded to at
    least ``padding`` times its length. Improper filters and filters with
    unstable inverses are fine here because nothing is realized in state space.

    Raises:
        ConditioningError: The response exceeds ``amplification_guard`` at a
            grid frequency. With ``drop_singular_dc`` a breach at DC is
            tolerated instead: the means are dropped and the output is
            returned with zero mean over the horizon.
    """
    if G.m != u.channels:
        raise DimensionError(f"filter expects {G.m} channels, signal has {u.channels}")
    N = u.n_samples
    nfft, omegas = dft_grid(N, u.dt, padding)

    dc_singular = False
    if drop_singular_dc:
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            dc = np.abs(G.evaluate(np.zeros(1, dtype=complex))).max()
        dc_singular = not dc <= amplification_guard
    if dc_singular:
        logger.warning("filter gain at DC exceeds guard; output means set to zero")
        response = np.zeros((G.p, G.m, omegas.size), dtype=complex)
        response[:, :, 1:] = _guarded(G, omegas[1:], amplification_guard)
    else:
        response = _guarded(G, omegas, amplification_guard)

    mean = u.data.mean(axis=1)
    residual = sps.detrend(u.data, axis=1, type="constant")
    spectrum = fft.rfft(residual, n=nfft, axis=1)
    out_spec = np.einsum("ijk,jk->ik", response, spectrum)
    out = fft.irfft(out_spec, n=nfft, axis=1)[:, :N]
    if dc_singular:
        out = out - out.mean(axis=1, keepdims=True)
    else:
        out = out + (np.real(response[:, :, 0]) @ mean)[:, None]
    return Signal(out, u.dt, u.t0)


def filter_periodic(G, u: Signal, amplification_guard: float = AMPLIFICATION_GUARD,
                    exclude_dc: bool = False) -> Signal:
    """Filter a signal treated as one period, without padding or truncation.

    The output has the input's length and lives on the same DFT grid, so a
    filter followed by its inverse gives the input back to rounding. With
    ``exclude_dc`` the response is not evaluated at DC and the zero-frequency
    bin of the output is zero.
    """
    if G.m != u.channels:
        raise DimensionError(f"filter expects {G.m} channels, signal has {u.channels}")
    N = u.n_samples
    omegas = 2.0 * np.pi * fft.rfftfreq(N, d=u.dt)
    spectrum = fft.rfft(u.data, axis=1)
    response = np.zeros((G.p, G.m, omegas.size), dtype=complex)
    first = 1 if exclude_dc else 0
    response[:, :, first:] = _guarded(G, omegas[first:], amplification_guard)
    if exclude_dc:
        logger.debug("DC bin excluded from periodic filtering")
    out = fft.irfft(np.einsum("ijk,jk->ik", response, spectrum), n=N, axis=1)
    return Signal(out, u.dt, u.t0)
