"""Domain types describing the simulated LEO infrastructure."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from utils.errors import ConstellationError


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants used by the orbit and link models."""

    earth_radius_km: float = 6371.0
    mu_km3_s2: float = 398600.4418
    earth_rotation_rad_s: float = 7.2921159e-5
    light_speed_km_s: float = 299792.458

    def __post_init__(self):
        for name in ("earth_radius_km", "mu_km3_s2", "earth_rotation_rad_s", "light_speed_km_s"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ConstellationError(f"{name} must be strictly positive, got {value}")


@dataclass(frozen=True)
class Shell:
    """
    A Walker-delta shell of ``planes`` x ``sats_per_plane`` satellites.

    Attributes:
        planes: Number of orbital planes P
        sats_per_plane: Satellites per plane S
        altitude_km: Orbit altitude above the Earth radius
        inclination_rad: Orbit inclination in [0, pi]
        phasing_factor: Inter-plane phasing F in [0, P)
        max_isl_length_km: ISLs longer than this are unusable (None = unlimited)
    """

    planes: int
    sats_per_plane: int
    altitude_km: float
    inclination_rad: float
    phasing_factor: int = 0
    max_isl_length_km: Optional[float] = None

    def __post_init__(self):
        if self.planes < 1 or self.sats_per_plane < 1:
            raise ConstellationError(
                f"shell needs planes >= 1 and sats_per_plane >= 1, "
                f"got {self.planes}x{self.sats_per_plane}"
            )
        if not math.isfinite(self.altitude_km) or self.altitude_km <= 0:
            raise ConstellationError(f"altitude_km must be > 0, got {self.altitude_km}")
        if not 0.0 <= self.inclination_rad <= math.pi:
            raise ConstellationError(f"inclination_rad must be in [0, pi], got {self.inclination_rad}")
        if not 0 <= self.phasing_factor < self.planes:
            raise ConstellationError(
                f"phasing_factor must be in [0, {self.planes}), got {self.phasing_factor}"
            )
        if self.max_isl_length_km is not None and self.max_isl_length_km <= 0:
            raise ConstellationError(
                f"max_isl_length_km must be > 0, got {self.max_isl_length_km}"
            )

    @property
    def total_satellites(self) -> int:
        return self.planes * self.sats_per_plane


@dataclass(frozen=True)
class GroundStation:
    """A ground station on the Earth surface."""

    name: str
    latitude_rad: float
    longitude_rad: float
    min_elevation_rad: float = math.radians(25.0)

    def __post_init__(self):
        if not self.name:
            raise ConstellationError("ground station name must not be empty")
        if not -math.pi / 2 <= self.latitude_rad <= math.pi / 2:
            raise ConstellationError(f"{self.name}: latitude out of range: {self.latitude_rad}")
        if not -math.pi <= self.longitude_rad < math.pi:
            raise ConstellationError(f"{self.name}: longitude out of range: {self.longitude_rad}")
        if not 0.0 <= self.min_elevation_rad < math.pi / 2:
            raise ConstellationError(
                f"{self.name}: min_elevation out of range: {self.min_elevation_rad}"
            )


class NodeKind(Enum):
    GROUNDSTATION = "groundstation"
    SATELLITE = "satellite"


@dataclass(frozen=True, order=True)
class NodeId:
    """
    Identifier of a node in the logical topology.

    Ordering puts ground stations first, then satellites by (shell, plane, slot),
    which is also the dense index order used by snapshots.
    """

    sort_key: Tuple[int, int, int, int] = field(repr=False)
    kind: NodeKind = field(compare=False)
    label: str = field(compare=False, default="")

    @classmethod
    def ground_station(cls, station_index: int, name: str = "") -> "NodeId":
        return cls((0, station_index, 0, 0), NodeKind.GROUNDSTATION, name)

    @classmethod
    def satellite(cls, shell_index: int, plane: int, slot: int) -> "NodeId":
        return cls((1, shell_index, plane, slot), NodeKind.SATELLITE)

    @property
    def is_satellite(self) -> bool:
        return self.kind is NodeKind.SATELLITE

    @property
    def station_index(self) -> int:
        return self.sort_key[1]

    @property
    def shell_index(self) -> int:
        return self.sort_key[1]

    @property
    def plane(self) -> int:
        return self.sort_key[2]

    @property
    def slot(self) -> int:
        return self.sort_key[3]

    @property
    def name(self) -> str:
        if self.kind is NodeKind.GROUNDSTATION:
            return self.label or f"gs-{self.station_index}"
        return f"sat-{self.shell_index}-{self.plane}-{self.slot}"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Position:
    """Cartesian position in km, Earth-centered inertial frame at t=0."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def distance_to(self, other: "Position") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))


@dataclass(frozen=True)
class ConstellationConfig:
    """Shells, ground stations and link classes of a simulated constellation."""

    shells: Tuple[Shell, ...] = ()
    ground_stations: Tuple[GroundStation, ...] = ()
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    isl_bandwidth_kbps: int = 10_000_000
    gsl_bandwidth_kbps: int = 1_000_000

    def __post_init__(self):
        names = [gs.name for gs in self.ground_stations]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ConstellationError(f"duplicate ground station names: {', '.join(duplicates)}")
        if self.isl_bandwidth_kbps <= 0 or self.gsl_bandwidth_kbps <= 0:
            raise ConstellationError("link bandwidths must be > 0")

    def node_ids(self) -> Tuple[NodeId, ...]:
        """All nodes in dense index order."""
        stations = tuple(
            NodeId.ground_station(i, gs.name) for i, gs in enumerate(self.ground_stations)
        )
        satellites = tuple(
            NodeId.satellite(shell_index, plane, slot)
            for shell_index, shell in enumerate(self.shells)
            for plane in range(shell.planes)
            for slot in range(shell.sats_per_plane)
        )
        return stations + satellites
