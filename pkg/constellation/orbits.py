"""Circular Walker-delta orbit propagation and ground station motion."""

import math
from typing import Tuple

import numpy as np

from constellation.models import GroundStation, PhysicalConstants, Position, Shell
from utils.errors import ConstellationError


def orbital_radius_km(shell: Shell, consts: PhysicalConstants) -> float:
    return consts.earth_radius_km + shell.altitude_km


def orbital_period_s(shell: Shell, consts: PhysicalConstants) -> float:
    """Kepler period T = 2*pi*sqrt(a^3 / mu) of the shell's circular orbit."""
    a = orbital_radius_km(shell, consts)
    return 2.0 * math.pi * math.sqrt(a ** 3 / consts.mu_km3_s2)


def orbital_speed_km_s(shell: Shell, consts: PhysicalConstants) -> float:
    """Circular orbital speed sqrt(mu / a)."""
    return math.sqrt(consts.mu_km3_s2 / orbital_radius_km(shell, consts))


def _check_time(t: float) -> None:
    if not math.isfinite(t):
        raise ConstellationError(f"time must be finite, got {t}")
    if t < 0:
        raise ConstellationError(f"time must be >= 0, got {t}")


def satellite_position(
    shell: Shell, plane: int, slot: int, t: float, consts: PhysicalConstants
) -> Position:
    """
    Position of satellite (plane, slot) of a shell at time t.

    The in-plane anomaly is 2*pi*slot/S + 2*pi*F*plane/(P*S) + 2*pi*t/T and
    the ascending node of a plane is 2*pi*plane/P.

    Args:
        shell: Shell the satellite belongs to
        plane: Plane index in [0, P)
        slot: Slot index in [0, S)
        t: Seconds since epoch
        consts: Physical constants

    Returns:
        Inertial position in km
    """
    if not 0 <= plane < shell.planes:
        raise ConstellationError(f"plane {plane} out of range [0, {shell.planes})")
    if not 0 <= slot < shell.sats_per_plane:
        raise ConstellationError(f"slot {slot} out of range [0, {shell.sats_per_plane})")
    _check_time(t)

    planes, sats = shell.planes, shell.sats_per_plane
    radius = orbital_radius_km(shell, consts)
    period = orbital_period_s(shell, consts)

    anomaly = (
        2.0 * math.pi * slot / sats
        + 2.0 * math.pi * shell.phasing_factor * plane / (planes * sats)
        + 2.0 * math.pi * t / period
    )
    raan = 2.0 * math.pi * plane / planes
    inc = shell.inclination_rad

    in_plane = np.array([radius * math.cos(anomaly), radius * math.sin(anomaly), 0.0])
    rot_inclination = np.array(
        [[1.0, 0.0, 0.0], [0.0, math.cos(inc), -math.sin(inc)], [0.0, math.sin(inc), math.cos(inc)]]
    )
    rot_raan = np.array(
        [[math.cos(raan), -math.sin(raan), 0.0], [math.sin(raan), math.cos(raan), 0.0], [0.0, 0.0, 1.0]]
    )
    x, y, z = rot_raan @ rot_inclination @ in_plane
    return Position(float(x), float(y), float(z))


def ground_station_position(gs: GroundStation, t: float, consts: PhysicalConstants) -> Position:
    """Point on the Earth sphere at (lat, lon + rotation * t)."""
    _check_time(t)
    lon = gs.longitude_rad + consts.earth_rotation_rad_s * t
    lat = gs.latitude_rad
    r = consts.earth_radius_km
    return Position(
        r * math.cos(lat) * math.cos(lon),
        r * math.cos(lat) * math.sin(lon),
        r * math.sin(lat),
    )


def subpoint(position: Position, t: float, consts: PhysicalConstants) -> Tuple[float, float]:
    """
    Earth-fixed (latitude, longitude) in radians below an inertial position.

    Longitude is wrapped to [-pi, pi).
    """
    _check_time(t)
    lat = math.atan2(position.z, math.hypot(position.x, position.y))
    lon = math.atan2(position.y, position.x) - consts.earth_rotation_rad_s * t
    lon = (lon + math.pi) % (2.0 * math.pi) - math.pi
    return lat, lon
