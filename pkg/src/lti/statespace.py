"""Continuous-time state-space systems and their block algebra."""
from dataclasses import dataclass

import control as ct
import numpy as np

from utils.errors import DimensionError, SingularityError
from .settings import EPS_STAB


def _as_matrix(value) -> np.ndarray:
    return np.atleast_2d(np.array(value, dtype=float, copy=True))


@dataclass(frozen=True, eq=False)
class StateSpace:
    """LTI quadruple ``x' = Ax + Bu, y = Cx + Du``.

    Empty state dimensions (pure gains) are allowed: A is 0x0, B is 0xm and
    C is px0.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = _as_matrix(self.D)
        p, m = D.shape
        A = np.array(self.A, dtype=float, copy=True)
        n = 0 if A.size == 0 else A.shape[0]
        A = A.reshape(n, n)
        B = np.array(self.B, dtype=float, copy=True).reshape(n, m)
        C = np.array(self.C, dtype=float, copy=True).reshape(p, n)

        for name, mat in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"{name} contains non-finite entries")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[1]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    @classmethod
    def gain(cls, D) -> "StateSpace":
        D = _as_matrix(D)
        return cls(np.zeros((0, 0)), np.zeros((0, D.shape[1])), np.zeros((D.shape[0], 0)), D)

    def poles(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=complex)
        return np.linalg.eigvals(self.A).astype(complex)

    def evaluate(self, s) -> np.ndarray:
        """Response ``C (sI - A)^-1 B + D`` at the complex points ``s``.

        Returns:
            Array of shape (p, m, K) for K points.
        """
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.empty((self.p, self.m, s.size), dtype=complex)
        eye = np.eye(self.n)
        for k, sk in enumerate(s):
            if self.n:
                out[:, :, k] = self.C @ np.linalg.solve(sk * eye - self.A, self.B) + self.D
            else:
                out[:, :, k] = self.D
        return out

    def __neg__(self) -> "StateSpace":
        return StateSpace(self.A, self.B, -self.C, -self.D)

    def __add__(self, other: "StateSpace") -> "StateSpace":
        """Parallel connection (sum of responses)."""
        if (self.p, self.m) != (other.p, other.m):
            raise DimensionError(f"cannot add {self.p}x{self.m} and {other.p}x{other.m} systems")
        n1, n2 = self.n, other.n
        A = np.zeros((n1 + n2, n1 + n2))
        A[:n1, :n1] = self.A
        A[n1:, n1:] = other.A
        B = np.vstack([self.B, other.B])
        C = np.hstack([self.C, other.C])
        return StateSpace(A, B, C, self.D + other.D)

    def __sub__(self, other: "StateSpace") -> "StateSpace":
        return self + (-other)

    def __matmul__(self, right: "StateSpace") -> "StateSpace":
        """Series connection ``self * right``: ``right`` acts first."""
        if self.m != right.p:
            raise DimensionError(f"cannot multiply {self.p}x{self.m} by {right.p}x{right.m}")
        nl, nr = self.n, right.n
        A = np.zeros((nl + nr, nl + nr))
        A[:nr, :nr] = right.A
        A[nr:, :nr] = self.B @ right.C
        A[nr:, nr:] = self.A
        B = np.vstack([right.B, self.B @ right.D])
        C = np.hstack([self.D @ right.C, self.C])
        return StateSpace(A, B, C, self.D @ right.D)

    def inverse(self) -> "StateSpace":
        """Realization of the inverse; needs an invertible feedthrough."""
        if self.p != self.m:
            raise DimensionError("only square systems can be inverted")
        cond = np.linalg.cond(self.D) if self.D.size else np.inf
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularityError("feedthrough matrix is singular; inverse is improper")
        Di = np.linalg.inv(self.D)
        return StateSpace(self.A - self.B @ Di @ self.C, self.B @ Di, -Di @ self.C, Di)

    def transform(self, T: np.ndarray, Ti: np.ndarray) -> "StateSpace":
        """Change of coordinates ``x = T z``."""
        return StateSpace(Ti @ self.A @ T, Ti @ self.B, self.C @ T, self.D)

    def channel(self, i: int, j: int) -> "StateSpace":
        """SISO sub-system from input ``j`` to output ``i``."""
        return StateSpace(self.A, self.B[:, [j]], self.C[[i], :], self.D[[i]][:, [j]])

    def to_control(self) -> ct.StateSpace:
        """The same system as a python-control object."""
        return ct.ss(self.A, self.B, self.C, self.D)

    @classmethod
    def from_control(cls, sys: ct.StateSpace) -> "StateSpace":
        return cls(np.asarray(sys.A), np.asarray(sys.B), np.asarray(sys.C), np.asarray(sys.D))


def is_hurwitz(sys: StateSpace, margin: float = EPS_STAB) -> bool:
    """True iff every eigenvalue of A has real part below ``-margin``.

    A pure gain (no states) is trivially stable.
    """
    if sys.n == 0:
        return True
    return bool(np.max(np.linalg.eigvals(sys.A).real) < -margin)

