"""MIMO transfer matrices in zero-pole-gain form.

Entries are stored as (zeros, poles, gain) so that pole/zero statements are
read off directly. Products and inverses of proper matrices go through
state-space realizations (each entry realized as a cascade of first- and
second-order sections), which keeps the arithmetic well conditioned; improper
cases fall back to polynomial algebra.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import control as ct
import numpy as np
from scipy import linalg

from utils.errors import DiagnosticsError, DimensionError, SingularityError
from .settings import CANCEL_TOL, DET_SINGULAR_RATIO, analysis_grid
from .reduction import minimal_realization
from .statespace import StateSpace

logger = logging.getLogger(__name__)

_IMAG_TOL = 1e-10


def conjugate_closed(values: Iterable[complex]) -> np.ndarray:
    """Snap nearly-real values to the real axis and enforce exact conjugate pairs."""
    values = np.asarray(list(values), dtype=complex)
    if values.size == 0:
        return values
    scale = np.maximum(1.0, np.abs(values))
    real = values[np.abs(values.imag) <= _IMAG_TOL * scale].real.astype(complex)
    upper = values[values.imag > _IMAG_TOL * scale]
    lower = values[values.imag < -_IMAG_TOL * scale]
    if upper.size != lower.size:
        raise DiagnosticsError("complex values do not come in conjugate pairs")
    # pair each upper value with its nearest lower partner and average them
    lower_left = list(lower)
    paired = []
    for u in upper:
        idx = int(np.argmin([abs(u - np.conj(l)) for l in lower_left]))
        l = lower_left.pop(idx)
        avg = 0.5 * (u + np.conj(l))
        paired.extend([avg, np.conj(avg)])
    out = np.concatenate([np.sort_complex(real), np.asarray(paired, dtype=complex)])
    return out


def cancel_pairs(zeros: np.ndarray, poles: np.ndarray,
                 tol: float = CANCEL_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Remove zero/pole pairs closer than ``tol`` relative to their magnitude."""
    zeros = list(np.asarray(zeros, dtype=complex))
    poles = list(np.asarray(poles, dtype=complex))
    kept_zeros = []
    for z in zeros:
        if poles:
            dist = np.abs(np.asarray(poles) - z)
            idx = int(np.argmin(dist))
            if dist[idx] <= tol * max(1.0, abs(z)):
                poles.pop(idx)
                continue
        kept_zeros.append(z)
    return np.asarray(kept_zeros, dtype=complex), np.asarray(poles, dtype=complex)


@dataclass(frozen=True, eq=False)
class RationalEntry:
    """Real-coefficient rational function ``k * prod(s - z) / prod(s - p)``."""

    zeros: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    poles: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    gain: float = 0.0

    def __post_init__(self):
        gain = float(np.real(self.gain))
        if gain == 0.0:
            zeros = np.zeros(0, dtype=complex)
            poles = np.zeros(0, dtype=complex)
        else:
            zeros = conjugate_closed(np.atleast_1d(np.asarray(self.zeros, dtype=complex)))
            poles = conjugate_closed(np.atleast_1d(np.asarray(self.poles, dtype=complex)))
        if not (np.all(np.isfinite(zeros)) and np.all(np.isfinite(poles)) and np.isfinite(gain)):
            raise ValueError("rational entry has non-finite data")
        zeros.setflags(write=False)
        poles.setflags(write=False)
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "gain", gain)

    @classmethod
    def constant(cls, value: float) -> "RationalEntry":
        return cls(gain=value)

    @property
    def is_zero(self) -> bool:
        return self.gain == 0.0

    @property
    def relative_degree(self) -> int:
        return len(self.poles) - len(self.zeros)

    @property
    def is_proper(self) -> bool:
        return self.is_zero or self.relative_degree >= 0

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.poles.real < 0))

    def evaluate(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        if self.is_zero:
            return np.zeros(s.shape, dtype=complex)
        num = np.prod(s[:, None] - self.zeros[None, :], axis=1) if self.zeros.size else np.ones(s.shape)
        den = np.prod(s[:, None] - self.poles[None, :], axis=1) if self.poles.size else np.ones(s.shape)
        return self.gain * num / den

    def at_infinity(self) -> float:
        """Limit as s -> infinity (inf for improper entries)."""
        if self.is_zero or self.relative_degree > 0:
            return 0.0
        if self.relative_degree == 0:
            return self.gain
        return np.inf

    def simplified(self, tol: float = CANCEL_TOL) -> "RationalEntry":
        z, p = cancel_pairs(self.zeros, self.poles, tol)
        return RationalEntry(z, p, self.gain)

    def __mul__(self, other: "RationalEntry") -> "RationalEntry":
        if self.is_zero or other.is_zero:
            return RationalEntry()
        return RationalEntry(np.concatenate([self.zeros, other.zeros]),
                             np.concatenate([self.poles, other.poles]),
                             self.gain * other.gain).simplified()

    def reciprocal(self) -> "RationalEntry":
        if self.is_zero:
            raise SingularityError("cannot invert an identically zero entry")
        return RationalEntry(self.poles, self.zeros, 1.0 / self.gain)

    def __neg__(self) -> "RationalEntry":
        return RationalEntry(self.zeros, self.poles, -self.gain)

    def __add__(self, other: "RationalEntry") -> "RationalEntry":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        # common denominator: poles of self plus the poles of other it lacks
        remaining = list(self.poles)
        extra_other = []
        for p in other.poles:
            if remaining:
                dist = np.abs(np.asarray(remaining) - p)
                idx = int(np.argmin(dist))
                if dist[idx] <= CANCEL_TOL * max(1.0, abs(p)):
                    remaining.pop(idx)
                    continue
            extra_other.append(p)
        extra_self = remaining  # poles of self missing from other
        common = np.concatenate([self.poles, np.asarray(extra_other, dtype=complex)])
        n1 = self.gain * _poly(np.concatenate([self.zeros, np.asarray(extra_other, dtype=complex)]))
        n2 = other.gain * _poly(np.concatenate([other.zeros, np.asarray(extra_self, dtype=complex)]))
        num = np.polyadd(np.real(n1), np.real(n2))
        nz = np.flatnonzero(np.abs(num) > 1e-14 * max(np.abs(n1).max(), np.abs(n2).max()))
        if nz.size == 0:
            return RationalEntry()
        num = num[nz[0]:]
        return RationalEntry(np.roots(num), common, num[0]).simplified()

    def __sub__(self, other: "RationalEntry") -> "RationalEntry":
        return self + (-other)


def _poly(roots) -> np.ndarray:
    return np.atleast_1d(np.real_if_close(np.poly(np.asarray(roots, dtype=complex)), tol=1e6)).astype(complex)


def _pole_groups(values: np.ndarray) -> List[np.ndarray]:
    """Split a conjugate-closed set into real-coefficient groups of degree <= 2."""
    values = conjugate_closed(values)
    reals = [v.real for v in values if v.imag == 0]
    pairs = [v for v in values if v.imag > 0]
    groups = [np.array([p, np.conj(p)]) for p in pairs]
    for i in range(0, len(reals) - 1, 2):
        groups.append(np.array([reals[i], reals[i + 1]], dtype=complex))
    if len(reals) % 2:
        groups.append(np.array([reals[-1]], dtype=complex))
    return groups


def entry_to_ss(entry: RationalEntry) -> StateSpace:
    """Realize a proper entry as a cascade of first/second-order sections."""
    if not entry.is_proper:
        raise DimensionError("improper entry has no state-space realization")
    if entry.is_zero:
        return StateSpace.gain([[0.0]])
    pole_groups = sorted(_pole_groups(entry.poles), key=len, reverse=True)
    zero_groups = sorted(_pole_groups(entry.zeros), key=len, reverse=True)
    sections = []
    for pg in pole_groups:
        zg = np.zeros(0, dtype=complex)
        for idx, cand in enumerate(zero_groups):
            if len(cand) <= len(pg):
                zg = zero_groups.pop(idx)
                break
        num = np.real(_poly(zg))
        den = np.real(_poly(pg))
        num = np.concatenate([np.zeros(len(den) - len(num)), num])
        sections.append(StateSpace.from_control(ct.tf2ss(num, den)))
    if zero_groups:
        raise DiagnosticsError("could not pair zeros with poles into proper sections")
    sys = StateSpace.gain([[entry.gain]])
    for sec in sections:
        sys = sec @ sys
    return sys


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """p x m grid of rational entries.

    Attributes:
        entries: Tuple of rows of RationalEntry.
        invertible: Set when the matrix was checked to have a determinant
            that does not vanish on the analysis grid.
    """

    entries: Tuple[Tuple[RationalEntry, ...], ...]
    invertible: bool = False

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or not rows[0]:
            raise DimensionError("transfer matrix needs at least one entry")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged transfer matrix")
        object.__setattr__(self, "entries", rows)
        if self.invertible:
            if self.p != self.m:
                raise DimensionError("only square matrices can be marked invertible")
            det = _det_values(self.evaluate(1j * analysis_grid()))
            if np.max(np.abs(det)) == 0.0:
                raise SingularityError("determinant vanishes identically on the grid")

    @property
    def p(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.p, self.m

    @property
    def is_proper(self) -> bool:
        return all(e.is_proper for row in self.entries for e in row)

    @property
    def is_stable(self) -> bool:
        return all(e.is_stable for row in self.entries for e in row)

    @property
    def is_biproper(self) -> bool:
        if not self.is_proper or self.p != self.m:
            return False
        Dinf = self.at_infinity()
        return np.linalg.cond(Dinf) < 1e12

    @classmethod
    def identity(cls, size: int) -> "TransferMatrix":
        return cls.from_gain(np.eye(size))

    @classmethod
    def zeros(cls, p: int, m: int) -> "TransferMatrix":
        return cls.from_gain(np.zeros((p, m)))

    @classmethod
    def from_gain(cls, K) -> "TransferMatrix":
        K = np.atleast_2d(np.asarray(K, dtype=float))
        return cls(tuple(tuple(RationalEntry.constant(v) for v in row) for row in K))

    @classmethod
    def diagonal(cls, entries: Sequence[RationalEntry]) -> "TransferMatrix":
        n = len(entries)
        return cls(tuple(tuple(entries[i] if i == j else RationalEntry() for j in range(n))
                         for i in range(n)))

    def entry(self, i: int, j: int) -> RationalEntry:
        return self.entries[i][j]

    def evaluate(self, s) -> np.ndarray:
        """Response at complex points ``s`` as a (p, m, K) array."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.empty((self.p, self.m, s.size), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[i, j] = e.evaluate(s)
        return out

    def at_infinity(self) -> np.ndarray:
        return np.array([[e.at_infinity() for e in row] for row in self.entries])

    def is_static(self) -> bool:
        return all(e.poles.size == 0 and e.zeros.size == 0 for row in self.entries for e in row)

    def is_identity(self) -> bool:
        return (self.p == self.m and self.is_static()
                and np.array_equal(self.at_infinity(), np.eye(self.p)))

    def __neg__(self) -> "TransferMatrix":
        return TransferMatrix(tuple(tuple(-e for e in row) for row in self.entries))

    def __add__(self, other: "TransferMatrix") -> "TransferMatrix":
        return tf_add(self, other)

    def __sub__(self, other: "TransferMatrix") -> "TransferMatrix":
        return tf_add(self, -other)

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        return tf_multiply(self, other)

    def marked_invertible(self) -> "TransferMatrix":
        return TransferMatrix(self.entries, invertible=True)


def _det_values(values: np.ndarray) -> np.ndarray:
    return np.linalg.det(np.moveaxis(values, 2, 0))


def _siso_to_entry(sys: StateSpace, cancel_tol: float) -> RationalEntry:
    sys = minimal_realization(sys)
    n = sys.n
    d = float(sys.D[0, 0])
    if n == 0:
        return RationalEntry.constant(d)
    b = sys.B[:, 0]
    c = sys.C[0, :]
    csys = sys.to_control()
    poles = np.asarray(csys.poles(), dtype=complex)

    scale_d = np.linalg.norm(c) * np.linalg.norm(b) / max(1.0, np.linalg.norm(sys.A, 2))
    if abs(d) > 1e-14 * max(1.0, scale_d):
        n_zeros, gain = n, d
    else:
        v = b.copy()
        rel_deg = None
        for k in range(1, n + 1):
            markov = float(c @ v)
            if abs(markov) > 1e-9 * np.linalg.norm(c) * np.linalg.norm(v):
                rel_deg, gain = k, markov
                break
            v = sys.A @ v
        if rel_deg is None:
            return RationalEntry()
        n_zeros = n - rel_deg

    zeros = np.zeros(0, dtype=complex)
    if n_zeros:
        cand = np.asarray(csys.zeros(), dtype=complex)
        cand = cand[np.isfinite(cand)]
        if cand.size < n_zeros:
            raise DiagnosticsError(
                f"expected {n_zeros} finite zeros, got {cand.size}")
        order = np.argsort(np.abs(cand))
        zeros = _balanced_pick(cand, order, n_zeros)

    z, p = cancel_pairs(conjugate_closed(zeros), conjugate_closed(poles), cancel_tol)
    return RationalEntry(z, p, gain)


def _balanced_pick(cand: np.ndarray, order: np.ndarray, count: int) -> np.ndarray:
    """Take the ``count`` smallest candidates without splitting a conjugate pair."""
    picked = list(cand[order[:count]])
    if count < cand.size:
        last = cand[order[count - 1]]
        nxt = cand[order[count]]
        if abs(last.imag) > _IMAG_TOL * max(1.0, abs(last)) and abs(nxt - np.conj(last)) < 1e-8 * max(1.0, abs(last)):
            # the pair straddles the cut; drop it and keep the next real one if any
            picked.pop()
            rest = [c for c in cand[order[count:]] if abs(c.imag) <= _IMAG_TOL * max(1.0, abs(c))]
            if not rest:
                raise DiagnosticsError("cannot select a conjugate-closed zero set")
            picked.append(rest[0].real)
    return np.asarray(picked, dtype=complex)


def ss_to_tf(sys: StateSpace, cancel_tol: float = CANCEL_TOL) -> TransferMatrix:
    """Zero-pole-gain transfer matrix of a state-space system.

    Each entry is computed from a minimal SISO realization (python-control
    staircase reduction): poles and finite transmission zeros come from
    python-control, the gain is the feedthrough or the first non-zero Markov
    parameter.
    """
    try:
        rows = tuple(
            tuple(_siso_to_entry(sys.channel(i, j), cancel_tol) for j in range(sys.m))
            for i in range(sys.p)
        )
    except (np.linalg.LinAlgError, linalg.LinAlgError, ct.ControlSlycot) as exc:
        raise DiagnosticsError(f"eigenproblem failed during conversion: {exc}") from exc
    return TransferMatrix(rows)


def tf_to_ss(G: TransferMatrix) -> StateSpace:
    """Non-minimal realization of a proper transfer matrix (one block per entry)."""
    if not G.is_proper:
        raise DimensionError("improper transfer matrix has no state-space realization")
    blocks = []
    for i, row in enumerate(G.entries):
        for j, e in enumerate(row):
            blocks.append((i, j, entry_to_ss(e)))
    n = sum(b.n for _, _, b in blocks)
    A = np.zeros((n, n))
    B = np.zeros((n, G.m))
    C = np.zeros((G.p, n))
    D = np.zeros((G.p, G.m))
    k = 0
    for i, j, b in blocks:
        A[k:k + b.n, k:k + b.n] = b.A
        B[k:k + b.n, j] = b.B[:, 0]
        C[i, k:k + b.n] = b.C[0, :]
        D[i, j] = b.D[0, 0]
        k += b.n
    return StateSpace(A, B, C, D)


def tf_add(L: TransferMatrix, R: TransferMatrix) -> TransferMatrix:
    """Entrywise sum."""
    if L.shape != R.shape:
        raise DimensionError(f"cannot add {L.shape} and {R.shape}")
    if L.is_proper and R.is_proper:
        return ss_to_tf(tf_to_ss(L) + tf_to_ss(R))
    return TransferMatrix(tuple(
        tuple(L.entry(i, j) + R.entry(i, j) for j in range(L.m)) for i in range(L.p)))


def tf_multiply(L: TransferMatrix, R: TransferMatrix) -> TransferMatrix:
    """Matrix product ``L R`` (R acts first on the signal).

    Proper factors are multiplied as state-space series connections and
    converted back; improper ones use entrywise polynomial algebra.
    """
    if L.m != R.p:
        raise DimensionError(f"cannot multiply {L.shape} by {R.shape}")
    if L.is_identity():
        return R
    if R.is_identity():
        return L
    if L.is_proper and R.is_proper:
        return ss_to_tf(tf_to_ss(L) @ tf_to_ss(R))
    rows = []
    for i in range(L.p):
        row = []
        for k in range(R.m):
            acc = RationalEntry()
            for j in range(L.m):
                acc = acc + L.entry(i, j) * R.entry(j, k)
            row.append(acc)
        rows.append(tuple(row))
    return TransferMatrix(tuple(rows))


def check_invertible(G: TransferMatrix, omegas: Optional[np.ndarray] = None,
                     ratio: float = DET_SINGULAR_RATIO) -> None:
    """Raise SingularityError when det G(jω) nearly vanishes on the grid."""
    if G.p != G.m:
        raise DimensionError("only square transfer matrices can be inverted")
    omegas = analysis_grid() if omegas is None else np.asarray(omegas)
    det = np.abs(_det_values(G.evaluate(1j * omegas)))
    peak = det.max()
    idx = int(np.argmin(det))
    if peak == 0.0 or det[idx] < ratio * peak:
        raise SingularityError(
            f"determinant nearly singular at omega={omegas[idx]:.4g} rad/s "
            f"(|det|={det[idx]:.3e}, max {peak:.3e})",
            omega=float(omegas[idx]),
        )


def tf_inverse(G: TransferMatrix, omegas: Optional[np.ndarray] = None) -> TransferMatrix:
    """Inverse transfer matrix.

    The result may be unstable or improper; see ``is_stable`` / ``is_proper``.
    """
    check_invertible(G, omegas)
    if G.is_biproper:
        inv = ss_to_tf(tf_to_ss(G).inverse())
    elif G.p == 1:
        inv = TransferMatrix(((G.entry(0, 0).reciprocal(),),))
    elif G.p == 2:
        a, b = G.entry(0, 0), G.entry(0, 1)
        c, d = G.entry(1, 0), G.entry(1, 1)
        det = a * d - b * c
        if det.is_zero:
            raise SingularityError("determinant is identically zero")
        rdet = det.reciprocal()
        inv = TransferMatrix(((d * rdet, -(b * rdet)), (-(c * rdet), a * rdet)))
    else:
        raise DimensionError("improper inverses are only supported up to 2x2")
    if not inv.is_proper:
        logger.debug("inverse is improper")
    if not inv.is_stable:
        logger.debug("inverse is unstable")
    return inv.marked_invertible()


def tf_poles(G: TransferMatrix, tol: float = CANCEL_TOL) -> np.ndarray:
    """Multiset union of the simplified entry poles.

    A pole shared by several entries is counted with the largest multiplicity
    it has in any single entry.
    """
    union: List[complex] = []
    for row in G.entries:
        for e in row:
            pool = list(union)
            for p in e.simplified().poles:
                if pool:
                    dist = np.abs(np.asarray(pool) - p)
                    idx = int(np.argmin(dist))
                    if dist[idx] <= tol * max(1.0, abs(p)):
                        pool.pop(idx)
                        continue
                union.append(p)
    return conjugate_closed(union)
