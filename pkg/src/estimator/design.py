"""Optimal state-estimator gain for jump-diffusion road inputs.

The road velocity enters both the dynamics (through B) and the
accelerometer outputs (through D), so the gain solves a filter Riccati
equation with correlated process and measurement noise.
"""
import logging
from dataclasses import dataclass, fields
from typing import Any, Dict, Optional

import numpy as np
from scipy import linalg

from lti import StateSpace, is_hurwitz
from lti.serialization import SCHEMA, SchemaError
from road import JdpParams
from utils.errors import RiccatiError
from utils.validators import Validators

logger = logging.getLogger(__name__)

PBH_TOL = 1e-8
RESIDUAL_TOL = 1e-8
_REFINEMENT_STEPS = 8


@dataclass(frozen=True, eq=False)
class EstimatorDesign:
    """Everything needed to run the estimator and input observer for one model.

    Attributes:
        F: State-estimator gain (n x p).
        Q: Stabilizing Riccati solution (n x n), the optimal error covariance.
        Sigma_bar: Input covariance rate (m x m).
        V1: Process term of the Riccati equation (n x n).
        V2: Innovation covariance (p x p).
        gamma: Input-observer gain, strictly above 0.5.
        S_obs: Observer matrix 0.5 (1 + gamma) I.
        K_obs: Left inverse (B^T B)^-1 B^T of the input matrix.
        bias_term: Constant drift (B + F D) lambda mu_eta.
        W: Wiener covariance sigma_zeta sigma_zeta^T.
    """

    F: np.ndarray
    Q: np.ndarray
    Sigma_bar: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    gamma: float
    S_obs: np.ndarray
    K_obs: np.ndarray
    bias_term: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        ok, msg = Validators.validate_gamma(self.gamma)
        if not ok:
            raise ValueError(msg)
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                value = np.array(value, dtype=float)
                value.setflags(write=False)
                object.__setattr__(self, f.name, value)

    def closed_loop(self, model: StateSpace) -> np.ndarray:
        """A + F C for the model the design was built from."""
        return model.A + self.F @ model.C


def _pbh_full_rank(A: np.ndarray, M: np.ndarray, stack: str) -> bool:
    n = A.shape[0]
    for lam in np.linalg.eigvals(A):
        if lam.real < -PBH_TOL:
            continue
        pencil = lam * np.eye(n) - A
        test = np.vstack([pencil, M]) if stack == "rows" else np.hstack([pencil, M])
        sv = np.linalg.svd(test, compute_uv=False)
        if np.sum(sv > PBH_TOL * max(1.0, sv[0])) < n:
            return False
    return True


def riccati_residual(A_f: np.ndarray, Q: np.ndarray, V1: np.ndarray,
                     G: np.ndarray) -> np.ndarray:
    """A_f Q + Q A_f^T + V1 - Q G Q with G = C^T V2^-1 C."""
    return A_f @ Q + Q @ A_f.T + V1 - Q @ G @ Q


def _refine(A_f: np.ndarray, Q: np.ndarray, V1: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Newton-Kleinman steps from a stabilizing starting point."""
    for _ in range(_REFINEMENT_STEPS):
        A_cl = A_f - Q @ G
        Q_next = linalg.solve_continuous_lyapunov(A_cl, -(V1 + Q @ G @ Q))
        Q_next = 0.5 * (Q_next + Q_next.T)
        if np.linalg.norm(Q_next - Q) <= 1e-14 * max(1.0, np.linalg.norm(Q)):
            return Q_next
        Q = Q_next
    return Q


def design_gain(model: StateSpace, sigma_bar: np.ndarray, wiener_cov: np.ndarray,
                jump_mean_rate: Optional[np.ndarray] = None,
                gamma: float = 20.0) -> EstimatorDesign:
    """Solve the estimator Riccati equation for explicit noise statistics.

    Args:
        model: The vehicle's own model (A, B, C, D).
        sigma_bar: Total input covariance rate.
        wiener_cov: Diffusion covariance, also the measurement-noise floor in V2.
        jump_mean_rate: lambda * mu_eta for the bias term (zeros if omitted).
        gamma: Input-observer gain.

    Returns:
        EstimatorDesign whose invariants hold.

    Raises:
        RiccatiError: PBH test failure, no stabilizing solution or residual too large.
    """
    A, B, C, D = model.A, model.B, model.C, model.D
    m = model.m
    sigma_bar = np.atleast_2d(np.asarray(sigma_bar, dtype=float))
    wiener_cov = np.atleast_2d(np.asarray(wiener_cov, dtype=float))
    mu_rate = np.zeros(m) if jump_mean_rate is None else np.asarray(jump_mean_rate, dtype=float).reshape(m)

    if not _pbh_full_rank(A, C, "rows"):
        raise RiccatiError("(A, C) is not detectable")
    if not _pbh_full_rank(A, B, "cols"):
        raise RiccatiError("(A, B) is not stabilizable")

    V2 = wiener_cov + D @ sigma_bar @ D.T
    V2 = 0.5 * (V2 + V2.T)
    if np.linalg.cond(V2) > 1e12:
        raise RiccatiError("V2 is singular")
    V2_inv = np.linalg.inv(V2)
    cross = B @ sigma_bar @ D.T
    V1 = B @ sigma_bar @ B.T - cross @ V2_inv @ cross.T
    V1 = 0.5 * (V1 + V1.T)
    A_f = A - cross @ V2_inv @ C
    G = C.T @ V2_inv @ C

    try:
        Q = linalg.solve_continuous_are(A_f.T, C.T, V1, V2)
    except (linalg.LinAlgError, ValueError) as e:
        raise RiccatiError(f"no stabilizing Riccati solution: {e}") from e
    Q = 0.5 * (Q + Q.T)

    tol = RESIDUAL_TOL * max(1.0, np.linalg.norm(V1))
    residual = np.linalg.norm(riccati_residual(A_f, Q, V1, G))
    if residual > tol:
        logger.debug("Riccati residual %.3e above %.3e, refining", residual, tol)
        Q = _refine(A_f, Q, V1, G)
        residual = np.linalg.norm(riccati_residual(A_f, Q, V1, G))
        if residual > tol:
            raise RiccatiError(f"Riccati residual {residual:.3e} exceeds {tol:.3e}")

    if np.min(np.linalg.eigvalsh(Q)) < -1e-10 * max(1.0, np.linalg.norm(Q)):
        raise RiccatiError("Riccati solution is not positive semi-definite")

    F = -(cross + Q @ C.T) @ V2_inv
    if not is_hurwitz(StateSpace(A + F @ C, B, C, D)):
        raise RiccatiError("A + F C is not Hurwitz")

    ok, msg = Validators.validate_gamma(gamma)
    if not ok:
        raise ValueError(msg)
    S_obs = 0.5 * (1.0 + gamma) * np.eye(m)
    K_obs = np.linalg.solve(B.T @ B, B.T)
    bias = (B + F @ D) @ mu_rate

    logger.debug("estimator designed: residual %.2e, closed-loop abscissa %.3f",
                 residual, float(np.max(np.linalg.eigvals(A + F @ C).real)))
    return EstimatorDesign(F=F, Q=Q, Sigma_bar=sigma_bar, V1=V1, V2=V2, gamma=float(gamma),
                           S_obs=S_obs, K_obs=K_obs, bias_term=bias, W=wiener_cov)


def solve_riccati(model: StateSpace, jdp: JdpParams, gamma: float = 20.0) -> EstimatorDesign:
    """Estimator design for a model driven by the given jump-diffusion road."""
    return design_gain(model, jdp.sigma_bar, jdp.sigma_zeta @ jdp.sigma_zeta.T,
                       jdp.jump_mean_rate, gamma)


def error_covariance(design: EstimatorDesign, model: StateSpace,
                     F: Optional[np.ndarray] = None) -> np.ndarray:
    """Steady-state estimation-error covariance for gain ``F`` (the design's by default).

    The error obeys e' = (A + F C) e + (B + F D) w~ + F v with input covariance
    Sigma_bar and measurement-noise covariance W.
    """
    F = design.F if F is None else np.asarray(F, dtype=float)
    A_cl = model.A + F @ model.C
    if np.max(np.linalg.eigvals(A_cl).real) >= 0:
        raise RiccatiError("gain does not stabilize the error dynamics")
    G_in = model.B + F @ model.D
    noise = G_in @ design.Sigma_bar @ G_in.T + F @ design.W @ F.T
    P = linalg.solve_continuous_lyapunov(A_cl, -noise)
    return 0.5 * (P + P.T)


def cost_weight(design: EstimatorDesign) -> np.ndarray:
    """State-error weighting (S_obs K_obs)^T (S_obs K_obs).

    The observer matrix acts on road channels, so it is carried onto the
    state error through K_obs.
    """
    SK = design.S_obs @ design.K_obs
    return SK.T @ SK


def steady_state_cost(design: EstimatorDesign, model: StateSpace,
                      F: Optional[np.ndarray] = None) -> float:
    """Weighted trace of the steady-state error covariance; minimized by the Riccati gain."""
    return float(np.trace(cost_weight(design) @ error_covariance(design, model, F)))


def design_to_dict(design: EstimatorDesign) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"schema": SCHEMA, "kind": "EstimatorDesign"}
    for f in fields(design):
        value = getattr(design, f.name)
        doc[f.name] = value.tolist() if isinstance(value, np.ndarray) else value
    return doc


def design_from_dict(doc: Dict[str, Any]) -> EstimatorDesign:
    if doc.get("schema") != SCHEMA or doc.get("kind") != "EstimatorDesign":
        raise SchemaError("not an EstimatorDesign document")
    kwargs = {}
    for f in fields(EstimatorDesign):
        value = doc[f.name]
        kwargs[f.name] = float(value) if f.name == "gamma" else np.array(value, dtype=float)
    return EstimatorDesign(**kwargs)
