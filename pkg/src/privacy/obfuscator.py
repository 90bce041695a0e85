"""Random stable, minimum-phase obfuscating transfer matrices."""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from lti import RationalEntry, TransferMatrix, check_invertible
from utils.errors import ObfuscatorError, SingularityError
from utils.validators import Validators

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 100
GAIN_RANGE = (0.5, 2.0)
# minimum separation between any drawn zero and any pole of the same matrix
_SEPARATION = 1e-3
# transmission zeros of the 2x2 matrix must sit at least this far left of the axis
_MIN_PHASE_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class Obfuscator:
    """Pair of private obfuscating systems held by one vehicle.

    Attributes:
        psi_s1: Left factor applied to T, S and e.
        psi_s2: Right factor applied to S; its inverse is applied to w_f.
        n1: Order of each entry of ``psi_s1``.
        n2: Order of each entry of ``psi_s2``.
        seed: Seed the pair was drawn from.
    """

    psi_s1: TransferMatrix
    psi_s2: TransferMatrix
    n1: int
    n2: int
    seed: int

    @classmethod
    def identity(cls, size: int = 2) -> "Obfuscator":
        """Degenerate obfuscator that leaves every message unchanged."""
        eye = TransferMatrix.identity(size)
        return cls(eye, eye, 0, 0, 0)

    @property
    def is_identity(self) -> bool:
        return self.psi_s1.is_identity() and self.psi_s2.is_identity()


def _draw_roots(rng: np.random.Generator, count: int, real_band: Sequence[float],
                imag_band: Sequence[float]) -> np.ndarray:
    """``count`` roots from the band, complex ones in conjugate pairs."""
    imag_max = min(abs(imag_band[0]), abs(imag_band[1]))
    roots = []
    remaining = count
    while remaining > 0:
        re = rng.uniform(real_band[0], real_band[1])
        if remaining >= 2 and imag_max > 0 and rng.random() < 0.5:
            im = rng.uniform(0.0, imag_max)
            roots += [complex(re, im), complex(re, -im)]
            remaining -= 2
        else:
            roots.append(complex(re, 0.0))
            remaining -= 1
    return np.array(roots, dtype=complex)


def _draw_matrix(rng: np.random.Generator, order: int, pole_band: Tuple[Sequence[float], Sequence[float]],
                 zero_band: Tuple[Sequence[float], Sequence[float]]):
    poles = _draw_roots(rng, order, *pole_band)
    zeros = [_draw_roots(rng, order, *zero_band) for _ in range(4)]
    low, high = np.log(GAIN_RANGE[0]), np.log(GAIN_RANGE[1])
    gains = np.exp(rng.uniform(low, high, size=4))
    return poles, zeros, gains


def _acceptable(poles: np.ndarray, zeros, gains) -> bool:
    for z in zeros:
        if z.size and np.min(np.abs(z[:, None] - poles[None, :])) < _SEPARATION:
            return False
    # numerator of the determinant: g_a g_d za zd - g_b g_c zb zc over the shared denominator
    num = np.polysub(gains[0] * gains[3] * np.poly(np.concatenate([zeros[0], zeros[3]])),
                     gains[1] * gains[2] * np.poly(np.concatenate([zeros[1], zeros[2]])))
    num = np.real_if_close(num, tol=1e6)
    num = np.trim_zeros(np.atleast_1d(num), "f")
    if num.size == 0:
        return False
    roots = np.roots(num)
    return bool(roots.size == 0 or np.max(roots.real) < -_MIN_PHASE_MARGIN)


def _assemble(poles: np.ndarray, zeros, gains) -> TransferMatrix:
    entries = [RationalEntry(z, poles, g) for z, g in zip(zeros, gains)]
    return TransferMatrix(((entries[0], entries[1]), (entries[2], entries[3])))


def _generate_matrix(rng: np.random.Generator, order: int, pole_band, zero_band,
                     omegas: Optional[np.ndarray]) -> TransferMatrix:
    for attempt in range(1, MAX_ATTEMPTS + 1):
        poles, zeros, gains = _draw_matrix(rng, order, pole_band, zero_band)
        if not _acceptable(poles, zeros, gains):
            continue
        psi = _assemble(poles, zeros, gains)
        try:
            check_invertible(psi, omegas)
        except SingularityError:
            continue
        logger.debug("obfuscator of order %d accepted after %d attempt(s)", order, attempt)
        return psi
    raise ObfuscatorError(f"no invertible minimum-phase obfuscator of order {order} "
                          f"after {MAX_ATTEMPTS} attempts")


def generate_obfuscator(n1: int, n2: int, seed: int,
                        pole_band: Tuple[Sequence[float], Sequence[float]] = ((-50.0, -0.5), (-30.0, 30.0)),
                        zero_band: Tuple[Sequence[float], Sequence[float]] = ((-50.0, -0.5), (-30.0, 30.0)),
                        omegas: Optional[np.ndarray] = None) -> Obfuscator:
    """Draw a private obfuscator pair.

    Each matrix has one pole set shared by its four entries and an
    independent zero set per entry. Complex roots come in conjugate pairs and
    gains are log-uniform in [0.5, 2].

    Args:
        n1: Order of every entry of psi_s1.
        n2: Order of every entry of psi_s2.
        seed: Seed for all draws.
        pole_band: (real-part band, imaginary-part band) for poles.
        zero_band: (real-part band, imaginary-part band) for zeros.
        omegas: Grid for the invertibility check (analysis grid by default).

    Raises:
        ValueError: Orders below one or bands outside the left half plane.
        ObfuscatorError: Rejection sampling exhausted its attempts.
    """
    problems = [msg for ok, msg in (
        Validators.validate_min_int("n1", n1, 1),
        Validators.validate_min_int("n2", n2, 1),
        Validators.validate_left_half_band("pole real band", pole_band[0]),
        Validators.validate_band("pole imaginary band", pole_band[1]),
        Validators.validate_left_half_band("zero real band", zero_band[0]),
        Validators.validate_band("zero imaginary band", zero_band[1]),
    ) if not ok]
    if problems:
        raise ValueError("; ".join(problems))

    rng = np.random.default_rng(seed)
    psi_s1 = _generate_matrix(rng, n1, pole_band, zero_band, omegas)
    psi_s2 = _generate_matrix(rng, n2, pole_band, zero_band, omegas)
    return Obfuscator(psi_s1, psi_s2, int(n1), int(n2), int(seed))


def random_orders(max_order: int, seed: int) -> Tuple[int, int]:
    """Orders n1, n2 drawn uniformly from [1, max_order]."""
    ok, msg = Validators.validate_min_int("max_order", max_order, 1)
    if not ok:
        raise ValueError(msg)
    rng = np.random.default_rng(seed)
    n1, n2 = rng.integers(1, max_order + 1, size=2)
    return int(n1), int(n2)
