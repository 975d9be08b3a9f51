"""
Waveform design — sensing-optimal and Pareto ISAC transmit matrices.

The sensing waveform is the orthogonal-Procrustes solution under the
covariance constraint (1/L) X X^H = (P0/N_B) I. The ISAC waveform minimises

    kappa * ||H X - T||_F^2 + (1 - kappa) * ||X - X0||_F^2
    s.t. trace(X X^H) = P0 L

exactly: with A^H A = Q diag(lam) Q^H, the minimiser is
X(rho) = Q (diag(lam) + rho I)^-1 Q^H A^H B, and rho solves the scalar
secular equation ||X(rho)||_F^2 = P0 L on (-lam_min, inf). When A^H B has
no component on the minimal eigenspace and the remaining mass is too small
(the trust-region hard case), the deficit is placed on that eigenspace.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from config.settings import settings
from schemas.errors import DomainError, InfeasibleConstraintError, NumericalError
from waveform.symbols import SymbolFrame

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]


@dataclass(frozen=True, eq=False)
class Waveform:
    """N_B x L transmit matrix with its power budget and trade-off factor."""

    x: ComplexArray
    p0: float
    kappa: float
    multiplier: float | None = None
    hard_case: bool = False

    @property
    def n_b(self) -> int:
        return int(self.x.shape[0])

    @property
    def frame_len(self) -> int:
        return int(self.x.shape[1])

    @property
    def power(self) -> float:
        """trace(X X^H)."""
        return float(np.real(np.vdot(self.x, self.x)))

    @property
    def covariance(self) -> ComplexArray:
        """(1/L) X X^H."""
        return (self.x @ self.x.conj().T) / self.frame_len

    @property
    def symbol_powers(self) -> NDArray[np.float64]:
        """||x_l||^2 per column."""
        return np.sum(np.abs(self.x) ** 2, axis=0)


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------


def comm_residual(h_pt: ComplexArray, x: ComplexArray, frame: SymbolFrame) -> float:
    """||H X - T||_F^2."""
    return float(np.linalg.norm(h_pt @ x - frame.target) ** 2)


def sensing_residual(x: ComplexArray, x0: ComplexArray) -> float:
    """||X - X0||_F^2."""
    return float(np.linalg.norm(x - x0) ** 2)


def isac_objective(
    h_pt: ComplexArray, x: ComplexArray, frame: SymbolFrame, x0: ComplexArray, kappa: float
) -> float:
    return kappa * comm_residual(h_pt, x, frame) + (1.0 - kappa) * sensing_residual(x, x0)


def normal_equations(
    h_pt: ComplexArray, frame: SymbolFrame, x0: ComplexArray, kappa: float
) -> tuple[ComplexArray, ComplexArray]:
    """(A^H A, A^H B) for A = [sqrt(k) H; sqrt(1-k) I], B = [sqrt(k) T; sqrt(1-k) X0]."""
    n_b = h_pt.shape[1]
    hh = h_pt.conj().T
    aha = kappa * (hh @ h_pt) + (1.0 - kappa) * np.eye(n_b)
    ahb = kappa * (hh @ frame.target) + (1.0 - kappa) * x0
    return aha, ahb


def kkt_residual(h_pt: ComplexArray, frame: SymbolFrame, x0: ComplexArray, w: Waveform) -> float:
    """||(A^H A + rho I) X - A^H B||_F relative to ||A^H B||_F."""
    if w.multiplier is None:
        raise DomainError("waveform carries no Lagrange multiplier")
    aha, ahb = normal_equations(h_pt, frame, x0, w.kappa)
    residual = (aha + w.multiplier * np.eye(aha.shape[0])) @ w.x - ahb
    scale = max(float(np.linalg.norm(ahb)), np.finfo(float).tiny)
    return float(np.linalg.norm(residual)) / scale


# ---------------------------------------------------------------------------
# Sensing waveform
# ---------------------------------------------------------------------------


def _check_dims(h_pt: ComplexArray, frame: SymbolFrame) -> tuple[int, int]:
    if h_pt.ndim != 2 or h_pt.shape[0] != frame.k_c:
        raise DomainError(f"channel {h_pt.shape} does not match {frame.k_c} users")
    n_b, frame_len = int(h_pt.shape[1]), frame.frame_len
    if frame_len < n_b:
        raise InfeasibleConstraintError(
            f"frame length L={frame_len} is shorter than the array N_B={n_b}; "
            "(1/L) X X^H = (P0/N_B) I has no solution"
        )
    return n_b, frame_len


def solve_sensing_waveform(h_pt: ComplexArray, frame: SymbolFrame, p0: float) -> Waveform:
    """X0 = sqrt(P0 L / N_B) U [I 0] V^H from the SVD of H^H T."""
    n_b, frame_len = _check_dims(h_pt, frame)
    if not p0 > 0.0:
        raise DomainError(f"p0 must be positive, got {p0!r}")

    u, _, vh = scipy.linalg.svd(h_pt.conj().T @ frame.target, full_matrices=True)
    x0 = math.sqrt(p0 * frame_len / n_b) * (u @ vh[:n_b, :])
    return Waveform(x=x0, p0=p0, kappa=0.0)


# ---------------------------------------------------------------------------
# Secular equation
# ---------------------------------------------------------------------------


def _secular_root(
    weights: NDArray[np.float64],
    shifts: NDArray[np.float64],
    target: float,
    max_iter: int,
    rtol: float,
) -> float:
    """
    Unique t > 0 with sum_i weights[i] / (t + shifts[i])^2 = target.

    shifts >= 0 with shifts[0] = 0 and weights[0] > 0. The function is convex
    and decreasing, so Newton from the left increases monotonically; steps
    leaving the bracket fall back to bisection.
    """

    def f(t: float) -> float:
        return float(np.sum(weights / (t + shifts) ** 2)) - target

    lo = float(np.max(np.sqrt(weights / target) - shifts))
    hi = math.sqrt(float(np.sum(weights)) / target)
    lo = max(lo, np.finfo(float).tiny)
    t = lo
    for i in range(max_iter):
        ft = f(t)
        if abs(ft) <= rtol * target:
            return t
        if ft > 0.0:
            lo = t
        else:
            hi = t
        df = -2.0 * float(np.sum(weights / (t + shifts) ** 3))
        step = t - ft / df if df != 0.0 else hi
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if step == t or hi - lo <= 4.0 * np.finfo(float).eps * hi:
            logger.debug("Secular root at machine precision after %d iterations", i + 1)
            return step
        t = step
    raise NumericalError(
        f"secular equation did not converge in {max_iter} iterations",
        diagnostics={"bracket": (lo, hi), "residual": f(t), "target": target},
    )


def solve_isac_waveform(
    h_pt: ComplexArray,
    frame: SymbolFrame,
    x0: Waveform,
    kappa: float,
    p0: float,
    max_iter: int | None = None,
) -> Waveform:
    """Global minimiser of the kappa-weighted ISAC objective on the power sphere."""
    n_b, frame_len = _check_dims(h_pt, frame)
    if not 0.0 <= kappa <= 1.0:
        raise DomainError(f"kappa must lie in [0, 1], got {kappa!r}")
    if x0.x.shape != (n_b, frame_len):
        raise DomainError(f"X0 has shape {x0.x.shape}, expected {(n_b, frame_len)}")
    target = p0 * frame_len
    if abs(x0.power - target) > 1e-8 * target:
        raise DomainError(f"X0 is infeasible: power {x0.power!r} vs {target!r}")

    max_iter = max_iter or settings.solver.max_iterations
    aha, ahb = normal_equations(h_pt, frame, x0.x, kappa)
    lam, q = scipy.linalg.eigh(aha)
    w = q.conj().T @ ahb
    weights = np.sum(np.abs(w) ** 2, axis=1)

    shifts = lam - lam[0]
    scale = max(abs(float(lam[-1])), 1.0)
    mult = int(np.sum(shifts <= 1e-10 * scale))
    shifts[:mult] = 0.0
    total = float(np.sum(weights))
    min_mass = float(np.sum(weights[:mult]))

    hard_case = False
    if min_mass > (settings.solver.hard_case_rtol**2) * total and min_mass > 0.0:
        # Fold the minimal eigenspace into one weight; its row mix is kept in w.
        t = _secular_root(
            np.concatenate([[min_mass], weights[mult:]]),
            np.concatenate([[0.0], shifts[mult:]]),
            target,
            max_iter,
            settings.solver.power_rtol,
        )
        coeffs = w / (t + shifts)[:, None]
    else:
        rest = weights[mult:]
        f0 = float(np.sum(rest / shifts[mult:] ** 2)) if rest.size else 0.0
        if f0 > target:
            t = _secular_root(
                rest, shifts[mult:], target, max_iter, settings.solver.power_rtol
            )
            coeffs = np.zeros_like(w)
            coeffs[mult:] = w[mult:] / (t + shifts[mult:])[:, None]
        else:
            hard_case = True
            t = 0.0
            coeffs = np.zeros_like(w)
            coeffs[mult:] = w[mult:] / shifts[mult:, None]
            coeffs[0, 0] = math.sqrt(max(target - f0, 0.0))
            logger.warning(
                "ISAC waveform in the hard case (kappa=%.3g): %.3g of the power budget "
                "placed on the minimal eigenspace",
                kappa,
                (target - f0) / target,
            )

    x = q @ coeffs
    power = float(np.real(np.vdot(x, x)))
    if not power > 0.0 or not math.isfinite(power):
        raise NumericalError("waveform power is degenerate", diagnostics={"power": power})
    x *= math.sqrt(target / power)
    rho = t - float(lam[0])
    return Waveform(x=x, p0=p0, kappa=kappa, multiplier=rho, hard_case=hard_case)


# ---------------------------------------------------------------------------
# Scenario-level design
# ---------------------------------------------------------------------------


def normalize_problem(
    h_pt: ComplexArray, frame: SymbolFrame, gain: float
) -> tuple[ComplexArray, SymbolFrame]:
    """H and T in units of sqrt(gain), so both objective terms are of order P0 L."""
    if not gain > 0.0 or not math.isfinite(gain):
        raise DomainError(f"normalization gain must be positive and finite, got {gain!r}")
    scale = math.sqrt(gain)
    return h_pt / scale, SymbolFrame(s=frame.s, amplitude=frame.amplitude / scale)


def design_waveforms(
    h_pt: ComplexArray, frame: SymbolFrame, p0: float, kappa: float, gain: float = 1.0
) -> tuple[Waveform, Waveform]:
    """(X0, X) for one channel, solved on the gain-normalized problem."""
    h, f = normalize_problem(h_pt, frame, gain)
    x0 = solve_sensing_waveform(h, f, p0)
    return x0, solve_isac_waveform(h, f, x0, kappa, p0)
