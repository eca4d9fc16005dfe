"""Per-joint principal axes of motion and projection-plane selection.

Head and torso joints always project onto the frontal (XY) plane.  Limb
joints take whichever of the frontal (XY) or side (ZY) planes retains more of
their trajectory variance, measured in the parent-anchored frame.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .bvh import BvhDocument, world_positions
from .errors import EmptyInput, NoFrames, NotSymmetric, SchemaViolation


class BodyPartClass(str, enum.Enum):
    HEAD_TORSO = "HeadTorso"
    LIMB = "Limb"


class Plane(str, enum.Enum):
    FRONTAL = "Frontal"  # XY
    SIDE = "Side"  # ZY


DEFAULT_RULES: tuple[tuple[str, BodyPartClass], ...] = tuple(
    [(s, BodyPartClass.HEAD_TORSO) for s in
     ("Head", "Neck", "Spine", "Hips", "Chest", "Back", "Pelvis", "Torso")]
    + [(s, BodyPartClass.LIMB) for s in
       ("Arm", "Leg", "Hand", "Foot", "Shoulder", "Knee", "Elbow")]
)

TIE_EPS = 1e-9


@dataclass(frozen=True)
class PrincipalAxes:
    mean: np.ndarray
    covariance: np.ndarray
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # rows, paired with eigenvalues


@dataclass(frozen=True)
class PlaneAssignment:
    joint_name: str
    plane: Plane
    retained_variance_ratio: float
    body_class: BodyPartClass
    axes: PrincipalAxes | None = None


def covariance_matrix(points) -> tuple[np.ndarray, np.ndarray]:
    """Population mean and covariance (1/N) of a set of 3-vectors."""
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    if p.shape[0] == 0:
        raise EmptyInput("covariance of zero points")
    mean = p.mean(axis=0)
    d = p - mean
    cov = d.T @ d / p.shape[0]
    return mean, 0.5 * (cov + cov.T)


def _jacobi_eigh(a: np.ndarray, tol=1e-12, max_sweeps=64):
    """Cyclic Jacobi for a symmetric 3x3 matrix; returns (values, column vectors)."""
    a = a.astype(float).copy()
    v = np.eye(3)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2)
        if off < tol * scale or off == 0.0:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if apq == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            a[p, q] = a[q, p] = 0.0
            v = v @ rot
    return np.diag(a).copy(), v


def principal_axes(mean, covariance) -> PrincipalAxes:
    """Eigen-decomposition of a covariance matrix, sorted by descending variance.

    Each eigenvector is sign-normalized so its largest-magnitude component is
    non-negative.
    """
    cov = np.asarray(covariance, dtype=float)
    if cov.shape != (3, 3):
        raise NotSymmetric(f"expected 3x3 matrix, got shape {cov.shape}")
    if np.abs(cov - cov.T).max() > 1e-9:
        raise NotSymmetric("covariance matrix is not symmetric")
    sym = 0.5 * (cov + cov.T)
    values, vecs = _jacobi_eigh(sym)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vecs = vecs[:, order].T.copy()
    values[(values < 0) & (values >= -1e-9)] = 0.0
    for row in vecs:
        k = int(np.argmax(np.abs(row)))
        if row[k] < 0:
            row *= -1.0
    return PrincipalAxes(np.asarray(mean, dtype=float), sym, values, vecs)


# -- classification --------------------------------------------------------

def parse_rules(text: str) -> list[tuple[str, BodyPartClass]]:
    """Parse ``substring = HeadTorso|Limb`` lines; ``#`` starts a comment."""
    rules = []
    lookup = {c.value.lower(): c for c in BodyPartClass}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip().lower()
        if not sep or not key or value not in lookup:
            raise SchemaViolation(f"line {lineno}", f"expected 'name = HeadTorso|Limb', got {raw!r}")
        rules.append((key, lookup[value]))
    return rules


def load_rules(path) -> list[tuple[str, BodyPartClass]]:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())


def classify_name(name: str, rules=DEFAULT_RULES) -> BodyPartClass:
    low = name.lower()
    for sub, cls in rules:
        if sub.lower() in low:
            return BodyPartClass(cls)
    return BodyPartClass.LIMB


def classify_joints(doc: BvhDocument, rules=DEFAULT_RULES) -> dict[str, BodyPartClass]:
    """Class of every joint and end site; first matching rule wins."""
    return {name: classify_name(name, rules) for name in doc.node_names()}


# -- plane assignment ------------------------------------------------------

def relative_trajectories(doc: BvhDocument) -> dict[str, np.ndarray]:
    """Each node's world position minus its parent's, per frame.

    The root has no parent, so its trajectory is centred on its own mean.
    """
    pos = world_positions(doc)
    names = doc.node_names()
    index = {n: k for k, n in enumerate(names)}
    out = {}
    for name, parent in doc.parents().items():
        p = pos[:, index[name]]
        if parent is None:
            out[name] = p - p.mean(axis=0)
        else:
            out[name] = p - pos[:, index[parent]]
    return {n: out[n] for n in names}


def choose_plane(variances, body_class: BodyPartClass) -> tuple[Plane, float]:
    """Pick a plane from per-axis variances (x, y, z); returns (plane, ratio)."""
    vx, vy, vz = (float(v) for v in variances)
    total = vx + vy + vz
    frontal, side = vx + vy, vz + vy
    if body_class == BodyPartClass.HEAD_TORSO or frontal >= side - TIE_EPS:
        plane, kept = Plane.FRONTAL, frontal
    else:
        plane, kept = Plane.SIDE, side
    ratio = 1.0 if total <= 0.0 else min(max(kept / total, 0.0), 1.0)
    return plane, ratio


def assign_projection_planes(doc: BvhDocument, classes=None) -> list[PlaneAssignment]:
    if doc.motion.frame_count < 1:
        raise NoFrames("plane assignment needs at least one frame")
    if classes is None:
        classes = classify_joints(doc)
    result = []
    for name, traj in relative_trajectories(doc).items():
        cls = BodyPartClass(classes.get(name, BodyPartClass.LIMB))
        mean, cov = covariance_matrix(traj)
        plane, ratio = choose_plane(np.diag(cov), cls)
        result.append(PlaneAssignment(name, plane, ratio, cls, principal_axes(mean, cov)))
    return result


def retained_variance(points, plane: Plane) -> float:
    """Variance kept by dropping the off-plane coordinate (direct measurement)."""
    p = np.asarray(points, dtype=float)
    kept = p[:, [0, 1]] if plane == Plane.FRONTAL else p[:, [2, 1]]
    return float(kept.var(axis=0).sum())
