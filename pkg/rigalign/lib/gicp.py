"""Pose-chain initialization and generalized ICP refinement.

The refinement is the plane-to-plane flavour of generalized ICP: voxel
centroids, per-point covariances flattened along the local surface normal,
Mahalanobis cost over nearest-neighbour correspondences and Gauss-Newton
updates on SE(3).
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from rigalign.lib import loggers
from rigalign.models.base import DataError, FrameMismatchError
from rigalign.models.registration import RegistrationParams, RegistrationResult
from rigalign.models.scan import LidarScan
from rigalign.models.transform import (
    RigidTransform,
    compose_all,
    invert,
    perturb,
)


COVARIANCE_EPSILON = 1e-3

MIN_CORRESPONDENCES = 10

STEP_SCALES = [1.0, 0.5, 0.25, 0.125, 0.0625]


logger = loggers.from_path(__file__)

iterations_logger = logger["iterations"]


class InsufficientPointsError(DataError):
    pass


@dataclass(frozen=True)
class Cloud:
    points: np.ndarray
    covariances: np.ndarray
    tree: cKDTree

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Correspondences:
    residuals: np.ndarray
    moved: np.ndarray
    information: np.ndarray
    cost: float

    def __len__(self) -> int:
        return len(self.residuals)

    @property
    def residual(self) -> float:
        if not len(self):
            return math.inf
        return math.sqrt(self.cost / len(self) * 2 * COVARIANCE_EPSILON)


def chain_initial_transform(
    t_i1l1: RigidTransform,
    t_wi1: RigidTransform,
    t_wi2: RigidTransform,
    t_i2l2: RigidTransform,
) -> RigidTransform:
    """(T_I1L1)⁻¹ · (T_WI1)⁻¹ · T_WI2 · T_I2L2, vehicle-2 LiDAR into vehicle-1 LiDAR."""
    return compose_all([invert(t_i1l1), invert(t_wi1), t_wi2, t_i2l2])


def noisy_chain_initial_transform(
    t_i1l1: RigidTransform,
    t_wi1: RigidTransform,
    t_wi2: RigidTransform,
    t_i2l2: RigidTransform,
    translation_noise: float,
    rotation_noise: float,
    rng: np.random.Generator,
) -> RigidTransform:
    terms = [
        perturb(term, translation_noise, rotation_noise, rng)
        for term in [t_i1l1, t_wi1, t_wi2, t_i2l2]
    ]
    return chain_initial_transform(*terms)


def voxel_downsample(points: np.ndarray, voxel_size: float) -> np.ndarray:
    """Replaces the points of every occupied voxel by their centroid."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if not len(points):
        return points
    keys = np.floor(points / voxel_size).astype(np.int64)
    _, inverse, counts = np.unique(
        keys, axis=0, return_inverse=True, return_counts=True
    )
    inverse = inverse.reshape(-1)
    sums = np.zeros((len(counts), 3))
    np.add.at(sums, inverse, points)
    return sums / counts[:, np.newaxis]


def estimate_covariances(
    points: np.ndarray, neighbor_count: int, tree: cKDTree | None = None
) -> np.ndarray:
    """Plane-shaped covariances: variance ε along the local normal, 1 along the surface."""
    tree = tree or cKDTree(points)
    _, indices = tree.query(points, k=neighbor_count)
    neighbors = points[indices]
    centered = neighbors - neighbors.mean(axis=1, keepdims=True)
    covariances = np.einsum("nki,nkj->nij", centered, centered) / neighbor_count
    _, eigenvectors = np.linalg.eigh(covariances)
    # eigh sorts eigenvalues ascending, the first vector is the normal
    variances = np.array([COVARIANCE_EPSILON, 1.0, 1.0])
    return np.einsum("nij,j,nkj->nik", eigenvectors, variances, eigenvectors)


def prepare_cloud(scan: LidarScan, params: RegistrationParams) -> Cloud:
    points = voxel_downsample(scan.positions, params.voxel_size)
    if len(points) < params.neighbor_count_for_covariance:
        raise InsufficientPointsError(
            f"Scan of {scan.sensor_frame} has {len(points)} points after "
            f"{params.voxel_size} m voxel downsampling, "
            f"needs at least {params.neighbor_count_for_covariance}"
        )
    tree = cKDTree(points)
    covariances = estimate_covariances(
        points, params.neighbor_count_for_covariance, tree
    )
    return Cloud(points=points, covariances=covariances, tree=tree)


def find_correspondences(
    source: Cloud,
    target: Cloud,
    rotation: Rotation,
    translation: np.ndarray,
    max_distance: float,
) -> Correspondences:
    moved = rotation.apply(source.points) + translation
    distances, indices = target.tree.query(moved, distance_upper_bound=max_distance)
    valid = np.isfinite(distances)
    moved = moved[valid]
    indices = indices[valid]
    residuals = target.points[indices] - moved
    matrix = rotation.as_matrix()
    combined = (
        target.covariances[indices]
        + matrix @ source.covariances[valid] @ matrix.T
    )
    information = np.linalg.inv(combined)
    cost = float(np.einsum("ni,nij,nj->", residuals, information, residuals))
    return Correspondences(
        residuals=residuals, moved=moved, information=information, cost=cost
    )


def gauss_newton_step(correspondences: Correspondences) -> np.ndarray:
    """Returns ξ = (ω, ρ) for the left update exp(ξ) · T."""
    moved = correspondences.moved
    jacobians = np.zeros((len(moved), 3, 6))
    jacobians[:, 0, 1] = -moved[:, 2]
    jacobians[:, 0, 2] = moved[:, 1]
    jacobians[:, 1, 0] = moved[:, 2]
    jacobians[:, 1, 2] = -moved[:, 0]
    jacobians[:, 2, 0] = -moved[:, 1]
    jacobians[:, 2, 1] = moved[:, 0]
    jacobians[:, :, 3:] = -np.eye(3)
    weighted = np.einsum("nij,njk->nik", correspondences.information, jacobians)
    hessian = np.einsum("nji,njk->ik", jacobians, weighted)
    gradient = np.einsum("nji,nj->i", weighted, correspondences.residuals)
    try:
        return scipy.linalg.solve(hessian, -gradient, assume_a="sym")
    except (scipy.linalg.LinAlgError, ValueError):
        return scipy.linalg.lstsq(hessian, -gradient)[0]


def apply_update(
    rotation: Rotation, translation: np.ndarray, step: np.ndarray
) -> tuple[Rotation, np.ndarray]:
    update = Rotation.from_rotvec(step[:3])
    return update * rotation, update.apply(translation) + step[3:]


def gicp_refine(
    source: LidarScan,
    target: LidarScan,
    init: RigidTransform,
    params: RegistrationParams | None = None,
) -> RegistrationResult:
    """Refines ``init`` (source sensor frame → target sensor frame).

    A step is only accepted when it doesn't increase the residual, so the
    residual history is non-increasing. Too little overlap is reported as
    ``converged=False`` with an infinite residual.
    """
    params = params or RegistrationParams()
    if init.source_frame != source.sensor_frame:
        raise FrameMismatchError(source.sensor_frame, init.source_frame, "gicp_refine")
    if init.target_frame != target.sensor_frame:
        raise FrameMismatchError(target.sensor_frame, init.target_frame, "gicp_refine")
    for scan in [source, target]:
        if not scan.is_deskewed:
            logger.warning(f"Registering a skewed scan of {scan.sensor_frame}")

    source_cloud = prepare_cloud(source, params)
    target_cloud = prepare_cloud(target, params)
    logger.debug(
        f"Registering {len(source_cloud)} voxels of {source.sensor_frame} "
        f"to {len(target_cloud)} voxels of {target.sensor_frame}"
    )

    rotation, translation = init.rotation, init.translation
    correspondences = find_correspondences(
        source_cloud, target_cloud, rotation, translation, params.max_correspondence_distance
    )
    if len(correspondences) < MIN_CORRESPONDENCES:
        logger.warning(
            f"Only {len(correspondences)} correspondences within "
            f"{params.max_correspondence_distance} m, scans don't overlap"
        )
        return RegistrationResult(
            transform=init,
            converged=False,
            iterations=0,
            final_residual=math.inf,
            initial_residual=math.inf,
        )

    history = [correspondences.residual]
    converged = False
    iterations = 0
    while iterations < params.max_iterations:
        iterations += 1
        step = gauss_newton_step(correspondences)
        for scale in STEP_SCALES:
            scaled = step * scale
            small = (
                np.linalg.norm(scaled[:3]) < params.rotation_epsilon
                and np.linalg.norm(scaled[3:]) < params.translation_epsilon
            )
            candidate_rotation, candidate_translation = apply_update(
                rotation, translation, scaled
            )
            candidate = find_correspondences(
                source_cloud,
                target_cloud,
                candidate_rotation,
                candidate_translation,
                params.max_correspondence_distance,
            )
            if (
                len(candidate) >= MIN_CORRESPONDENCES
                and candidate.residual <= history[-1]
            ):
                rotation, translation = candidate_rotation, candidate_translation
                correspondences = candidate
                history.append(candidate.residual)
                converged = small
                break
            if small:
                # even a negligible step doesn't help, this is the minimum
                converged = True
                break
        else:
            iterations_logger.debug(f"Iteration {iterations}: no step reduces the residual")
            break
        iterations_logger.debug(
            f"Iteration {iterations}: residual {history[-1]:.6f} m, "
            f"step |ω| {np.linalg.norm(step[:3]):.2e} rad, |ρ| {np.linalg.norm(step[3:]):.2e} m"
        )
        if converged:
            break

    transform = RigidTransform(rotation, translation, init.source_frame, init.target_frame)
    if not converged:
        logger.warning(
            f"Registration of {source.sensor_frame} to {target.sensor_frame} "
            f"didn't converge in {iterations} iterations"
        )
    logger.info(
        f"Registered {source.sensor_frame} to {target.sensor_frame}: "
        f"residual {history[0]:.4f} m → {history[-1]:.4f} m in {iterations} iterations"
    )
    return RegistrationResult(
        transform=transform,
        converged=converged,
        iterations=iterations,
        final_residual=history[-1],
        initial_residual=history[0],
        residual_history=tuple(history),
    )


def register_both_ways(
    a: LidarScan,
    b: LidarScan,
    init: RigidTransform,
    params: RegistrationParams | None = None,
) -> tuple[RegistrationResult, RegistrationResult]:
    """Registers ``a`` onto ``b`` and ``b`` onto ``a`` from the same initial guess."""
    return gicp_refine(a, b, init, params), gicp_refine(b, a, invert(init), params)
