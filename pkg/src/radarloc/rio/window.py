"""Fixed-lag sliding window: damped Gauss-Newton and marginalization.

The window holds the most recent radar-timestep states with their
measurement blocks. Optimization is Levenberg-Marquardt over all range
rate, IMU-consistency, heading, and prior residuals; range-rate rows get
a Huber loss to absorb dynamic detections that slipped past consensus
gating. Removing the oldest state takes the Schur complement of its block
over every factor touching it, leaving a Gaussian prior on the new oldest
state so cost and factor count stay bounded for arbitrarily long runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import RunConfig
from ..geometry import RigidTransform
from .factors import (
    PriorFactor,
    doppler_residuals,
    imu_residual,
    imu_sqrt_information,
    landmark_residuals,
)
from .preintegration import PreintegratedImu
from .state import STATE_DIM, State


@dataclass
class DopplerBlock:
    """Inlier detections of one sensor attached to one state."""

    sensor_id: int
    rays: np.ndarray  # (n, 3) unit rays, sensor frame
    doppler: np.ndarray  # (n,)
    omega: np.ndarray  # interpolated gyro at the scan time


@dataclass
class LandmarkBlock:
    """Heading constraints attached to one state."""

    bearings: np.ndarray  # (n,) measured detection bearings, IMU frame
    offsets: np.ndarray  # (n, 3) landmark position minus dead-reckoned position


@dataclass
class WindowEntry:
    state: State
    t_oi: np.ndarray
    doppler: list[DopplerBlock] = field(default_factory=list)
    landmarks: LandmarkBlock | None = None
    preint_to_next: PreintegratedImu | None = None
    imu_sqrt_info: np.ndarray | None = None
    degraded: bool = False


@dataclass
class SlidingWindow:
    prior: PriorFactor
    entries: list[WindowEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def states(self) -> list[State]:
        return [e.state for e in self.entries]

    def factor_count(self) -> int:
        n = 1  # prior
        for e in self.entries:
            n += sum(len(b.doppler) for b in e.doppler)
            if e.landmarks is not None:
                n += len(e.landmarks.bearings)
            if e.preint_to_next is not None:
                n += 1
        return n


@dataclass
class OptimizeReport:
    iterations: int
    cost_initial: float
    cost_final: float
    converged: bool
    diverged: bool
    step_norm: float
    costs: list[float] = field(default_factory=list)


class _Problem:
    """Residual/Jacobian assembly over the current window."""

    def __init__(self, window: SlidingWindow, extrinsics: list[RigidTransform], cfg: RunConfig):
        self.window = window
        self.cfg = cfg
        self.rotations = [e.rotation for e in extrinsics]
        self.translations = [e.t for e in extrinsics]
        for entry in window.entries[:-1]:
            if entry.preint_to_next is not None and entry.imu_sqrt_info is None:
                entry.imu_sqrt_info = imu_sqrt_information(entry.preint_to_next)

    def _doppler_rows(self, state: State, block: DopplerBlock, with_jacobian: bool):
        res, J = doppler_residuals(
            state,
            block.rays,
            block.doppler,
            self.rotations[block.sensor_id],
            self.translations[block.sensor_id],
            block.omega,
            with_jacobian=with_jacobian,
        )
        res = res / self.cfg.doppler.sigma
        if with_jacobian:
            J = J / self.cfg.doppler.sigma
        return res, J

    def _landmark_rows(self, state: State, block: LandmarkBlock, with_jacobian: bool):
        res, J, valid = landmark_residuals(
            state, block.bearings, block.offsets, with_jacobian=with_jacobian
        )
        res = res[valid] / self.cfg.landmark.bearing_sigma
        if with_jacobian:
            J = J[valid] / self.cfg.landmark.bearing_sigma
        return res, J

    def cost(self, states: list[State]) -> float:
        delta = self.cfg.doppler.huber_delta
        total = 0.0
        res, _ = self.window.prior.residual(states[0], with_jacobian=False)
        total += float(res @ res)
        for i, entry in enumerate(self.window.entries):
            for block in entry.doppler:
                r, _ = self._doppler_rows(states[i], block, False)
                a = np.abs(r)
                total += float(
                    np.sum(np.where(a <= delta, r * r, 2.0 * delta * a - delta * delta))
                )
            if entry.landmarks is not None:
                r, _ = self._landmark_rows(states[i], entry.landmarks, False)
                total += float(r @ r)
            if i + 1 < len(self.window.entries) and entry.preint_to_next is not None:
                r, _, _ = imu_residual(states[i], states[i + 1], entry.preint_to_next, False)
                rw = entry.imu_sqrt_info @ r
                total += float(rw @ rw)
        return total

    def linearize(self, states: list[State]):
        """Stack whitened residuals and Jacobians; Huber rows down-weighted."""
        delta = self.cfg.doppler.huber_delta
        n = len(states)
        cols = STATE_DIM * n
        res_blocks: list[np.ndarray] = []
        jac_blocks: list[tuple[np.ndarray, int, np.ndarray | None]] = []

        r0, J0 = self.window.prior.residual(states[0])
        res_blocks.append(r0)
        jac_blocks.append((J0, 0, None))

        for i, entry in enumerate(self.window.entries):
            for block in entry.doppler:
                r, J = self._doppler_rows(states[i], block, True)
                a = np.abs(r)
                w = np.sqrt(np.where(a <= delta, 1.0, delta / np.maximum(a, 1e-12)))
                res_blocks.append(r * w)
                jac_blocks.append((J * w[:, None], i, None))
            if entry.landmarks is not None:
                r, J = self._landmark_rows(states[i], entry.landmarks, True)
                if len(r):
                    res_blocks.append(r)
                    jac_blocks.append((J, i, None))
            if i + 1 < len(self.window.entries) and entry.preint_to_next is not None:
                r, J_k, J_k1 = imu_residual(states[i], states[i + 1], entry.preint_to_next)
                W = entry.imu_sqrt_info
                res_blocks.append(W @ r)
                jac_blocks.append((W @ J_k, i, W @ J_k1))

        rows = sum(len(r) for r in res_blocks)
        residual = np.concatenate(res_blocks) if res_blocks else np.zeros(0)
        J_full = np.zeros((rows, cols))
        row = 0
        for (Ja, idx, Jb), r in zip(jac_blocks, res_blocks):
            m = len(r)
            J_full[row : row + m, STATE_DIM * idx : STATE_DIM * (idx + 1)] = Ja
            if Jb is not None:
                J_full[row : row + m, STATE_DIM * (idx + 1) : STATE_DIM * (idx + 2)] = Jb
            row += m
        return residual, J_full


def optimize_window(
    window: SlidingWindow, extrinsics: list[RigidTransform], cfg: RunConfig
) -> OptimizeReport:
    """Damped Gauss-Newton over the window; states updated in place.

    Steps are accepted only when the total robust cost decreases, so the
    reported cost sequence is nonincreasing. On a non-finite cost the
    window is rolled back to its input states and the report is flagged
    diverged.
    """
    if not window.entries:
        raise ValueError("cannot optimize an empty window")
    problem = _Problem(window, extrinsics, cfg)
    states = window.states()
    snapshot = [s.copy() for s in states]

    cost = problem.cost(states)
    costs = [cost]
    if not np.isfinite(cost):
        for entry, s in zip(window.entries, snapshot):
            entry.state = s
        return OptimizeReport(0, cost, cost, False, True, np.inf, costs)

    lam = cfg.window.damping_init
    step_norm = np.inf
    converged = False
    iterations = 0
    n = len(states)

    while iterations < cfg.window.max_iterations:
        iterations += 1
        residual, J = problem.linearize(states)
        if not np.all(np.isfinite(J)) or not np.all(np.isfinite(residual)):
            for entry, s in zip(window.entries, snapshot):
                entry.state = s
            return OptimizeReport(iterations, costs[0], np.inf, False, True, np.inf, costs)
        H = J.T @ J
        g = J.T @ residual
        diag = np.clip(np.diag(H), 1e-12, None)
        accepted = False
        for _ in range(8):
            try:
                delta = np.linalg.solve(H + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            candidate = [
                states[i].retract(delta[STATE_DIM * i : STATE_DIM * (i + 1)]) for i in range(n)
            ]
            new_cost = problem.cost(candidate)
            if np.isfinite(new_cost) and new_cost <= cost:
                states = candidate
                step_norm = float(np.linalg.norm(delta))
                cost = new_cost
                costs.append(cost)
                lam = max(lam * 0.3, 1e-12)
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            converged = True  # no damped step improves: local minimum
            break
        if step_norm < cfg.window.step_tol:
            converged = True
            break

    for entry, s in zip(window.entries, states):
        entry.state = s
    return OptimizeReport(iterations, costs[0], cost, converged, False, step_norm, costs)


@dataclass
class MarginalizationInfo:
    regularized: bool


def marginalize_oldest(
    window: SlidingWindow, extrinsics: list[RigidTransform], cfg: RunConfig
) -> MarginalizationInfo:
    """Absorb the oldest state into a Gaussian prior on its successor.

    Linearizes every factor touching the oldest state (prior, its own
    measurement blocks, and the IMU edge to the next state) at the current
    estimates, then takes the Schur complement of the old state's block.
    Singular information is regularized with the configured epsilon and
    flagged.
    """
    if len(window.entries) < 2:
        raise ValueError("marginalization needs at least two states")
    problem = _Problem(window, extrinsics, cfg)
    entry0, entry1 = window.entries[0], window.entries[1]
    x0, x1 = entry0.state, entry1.state
    delta_huber = cfg.doppler.huber_delta

    res_blocks: list[np.ndarray] = []
    jac_blocks: list[tuple[np.ndarray, np.ndarray | None]] = []

    r0, J0 = window.prior.residual(x0)
    res_blocks.append(r0)
    jac_blocks.append((J0, None))
    for block in entry0.doppler:
        r, J = problem._doppler_rows(x0, block, True)
        a = np.abs(r)
        w = np.sqrt(np.where(a <= delta_huber, 1.0, delta_huber / np.maximum(a, 1e-12)))
        res_blocks.append(r * w)
        jac_blocks.append((J * w[:, None], None))
    if entry0.landmarks is not None:
        r, J = problem._landmark_rows(x0, entry0.landmarks, True)
        if len(r):
            res_blocks.append(r)
            jac_blocks.append((J, None))
    if entry0.preint_to_next is not None:
        if entry0.imu_sqrt_info is None:
            entry0.imu_sqrt_info = imu_sqrt_information(entry0.preint_to_next)
        r, J_k, J_k1 = imu_residual(x0, x1, entry0.preint_to_next)
        W = entry0.imu_sqrt_info
        res_blocks.append(W @ r)
        jac_blocks.append((W @ J_k, W @ J_k1))

    rows = sum(len(r) for r in res_blocks)
    J_full = np.zeros((rows, 2 * STATE_DIM))
    residual = np.concatenate(res_blocks)
    row = 0
    for (Ja, Jb), r in zip(jac_blocks, res_blocks):
        m = len(r)
        J_full[row : row + m, :STATE_DIM] = Ja
        if Jb is not None:
            J_full[row : row + m, STATE_DIM:] = Jb
        row += m

    H = J_full.T @ J_full
    b = J_full.T @ residual
    H00 = H[:STATE_DIM, :STATE_DIM]
    H01 = H[:STATE_DIM, STATE_DIM:]
    H11 = H[STATE_DIM:, STATE_DIM:]
    b0 = b[:STATE_DIM]
    b1 = b[STATE_DIM:]

    regularized = False
    try:
        L = np.linalg.cholesky(H00)
    except np.linalg.LinAlgError:
        regularized = True
        L = np.linalg.cholesky(H00 + cfg.window.marginal_epsilon * np.eye(STATE_DIM))
    X = np.linalg.solve(L.T, np.linalg.solve(L, H01))
    y = np.linalg.solve(L.T, np.linalg.solve(L, b0))
    H_new = H11 - H01.T @ X
    b_new = b1 - H01.T @ y

    new_prior = PriorFactor.from_information(
        x1, 0.5 * (H_new + H_new.T), b_new, cfg.window.marginal_epsilon
    )
    window.prior = new_prior
    window.entries.pop(0)
    return MarginalizationInfo(regularized=regularized or new_prior.regularized)
