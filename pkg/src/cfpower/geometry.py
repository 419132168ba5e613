"""Random AP/UE deployments and the link geometry derived from them."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NetworkLayout:
    """Planar AP and UE positions in a square area, plus per-role heights.

    Parameters
    ----------
    ap_positions : ndarray, shape (M, 2)
        AP coordinates in meters.
    ue_positions : ndarray, shape (K, 2)
        UE coordinates in meters.
    ap_height, ue_height : float
        Antenna heights in meters, shared by all APs / all UEs.
    area_side : float
        Side of the square deployment area in meters.
    """

    ap_positions: np.ndarray
    ue_positions: np.ndarray
    ap_height: float = 10.0
    ue_height: float = 1.5
    area_side: float = 1000.0

    def __post_init__(self):
        ap = np.array(self.ap_positions, dtype=float, ndmin=2)
        ue = np.array(self.ue_positions, dtype=float, ndmin=2)
        if ap.shape[1] != 2 or ue.shape[1] != 2:
            raise ValueError("positions must have shape (n, 2)")
        if len(ap) < 1 or len(ue) < 1:
            raise ValueError("need at least one AP and one UE")
        if not self.area_side > 0:
            raise ValueError("area_side must be positive")
        if not self.ap_height > self.ue_height > 0:
            raise ValueError("heights must satisfy ap_height > ue_height > 0")
        for pts in (ap, ue):
            if np.any(pts < 0) or np.any(pts > self.area_side):
                raise ValueError("positions must lie inside [0, area_side]^2")
        ap.setflags(write=False)
        ue.setflags(write=False)
        object.__setattr__(self, "ap_positions", ap)
        object.__setattr__(self, "ue_positions", ue)

    @property
    def M(self):
        return len(self.ap_positions)

    @property
    def K(self):
        return len(self.ue_positions)

    @property
    def height_gap(self):
        return self.ap_height - self.ue_height

    def offsets(self):
        """UE-minus-AP planar offsets, shape (M, K, 2)."""
        return self.ue_positions[None, :, :] - self.ap_positions[:, None, :]

    def horizontal_distances(self):
        """All 2-D AP-UE distances, shape (M, K)."""
        off = self.offsets()
        return np.hypot(off[..., 0], off[..., 1])

    def link_distances_3d(self):
        """All 3-D AP-UE distances, shape (M, K)."""
        return np.hypot(self.horizontal_distances(), self.height_gap)

    def azimuths(self):
        """Bearing of each UE seen from each AP, in (-pi, pi], shape (M, K).

        Coincident planar positions map to 0.
        """
        off = self.offsets()
        theta = np.arctan2(off[..., 1], off[..., 0])
        # arctan2 returns -pi for (-x, -0.0); fold onto +pi
        return np.where(theta == -np.pi, np.pi, theta)


def generate_layout(M, K, area_side=1000.0, rng=None, ap_height=10.0, ue_height=1.5):
    """Drop M APs and K UEs i.i.d. uniformly over ``[0, area_side]^2``."""
    if M < 1 or K < 1:
        raise ValueError(f"M and K must be >= 1, got M={M}, K={K}")
    if not area_side > 0:
        raise ValueError(f"area_side must be positive, got {area_side}")
    rng = np.random.default_rng(rng)
    ap = rng.uniform(0.0, area_side, size=(M, 2))
    ue = rng.uniform(0.0, area_side, size=(K, 2))
    return NetworkLayout(ap, ue, ap_height=ap_height, ue_height=ue_height, area_side=area_side)


def _check_index(layout, m, k):
    if not (0 <= m < layout.M and 0 <= k < layout.K):
        raise IndexError(f"link ({m}, {k}) out of range for M={layout.M}, K={layout.K}")


def horizontal_distance(layout, m, k):
    _check_index(layout, m, k)
    dx, dy = layout.ue_positions[k] - layout.ap_positions[m]
    return float(np.hypot(dx, dy))


def link_distance_3d(layout, m, k):
    return float(np.hypot(horizontal_distance(layout, m, k), layout.height_gap))


def azimuth_angle(layout, m, k):
    _check_index(layout, m, k)
    dx, dy = layout.ue_positions[k] - layout.ap_positions[m]
    if dx == 0 and dy == 0:
        return 0.0
    theta = float(np.arctan2(dy, dx))
    return np.pi if theta == -np.pi else theta
