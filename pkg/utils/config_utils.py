"""Main configuration loading for OrbitMesh (TOML)."""

import hashlib
import ipaddress
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from constellation.models import ConstellationConfig, GroundStation, PhysicalConstants, Shell
from utils.errors import ConfigError, ConstellationError, FileIOError

DEFAULT_STEP_S = 1.0
DEFAULT_NETWORK = "10.0.0.0/16"


@dataclass(frozen=True)
class MainConfig:
    """
    Everything a command needs to build, replay and address a testbed.

    ``machines`` holds the dense node indices of the emulated machines (in
    machine order) and ``addresses`` the IPv4 address of each machine.
    """

    constellation: ConstellationConfig
    machines: Tuple[int, ...]
    machine_names: Tuple[str, ...]
    addresses: Tuple[ipaddress.IPv4Address, ...]
    step_s: float = DEFAULT_STEP_S
    duration_s: Optional[float] = None
    seed: int = 0
    device: str = "eth0"
    source: Optional[Path] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.machines:
            raise ConfigError("machines: at least one machine is required")
        if len(self.addresses) != len(self.machines):
            raise ConfigError("addressing: every machine needs an address")

    def config_hash(self) -> str:
        """SHA-256 over the canonical JSON of constellation and machine list."""
        document = {
            "constellation": asdict(self.constellation),
            "machines": list(self.machine_names),
        }
        canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def addressing(self) -> Dict[int, ipaddress.IPv4Address]:
        """Machine id (position in ``machines``) to IPv4 address."""
        return dict(enumerate(self.addresses))


def _check_keys(table: Mapping[str, Any], allowed: Sequence[str], path: str) -> None:
    if not isinstance(table, Mapping):
        raise ConfigError(f"{path}: expected a table")
    for key in table:
        if key not in allowed:
            dotted = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key '{dotted}'")


def _require(table: Mapping[str, Any], key: str, path: str, kind=(int, float)) -> Any:
    if key not in table:
        raise ConfigError(f"missing key '{path}.{key}'")
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        raise ConfigError(f"key '{path}.{key}' has the wrong type")
    return value


def _optional(table: Mapping[str, Any], key: str, path: str, default, kind=(int, float)) -> Any:
    if key not in table:
        return default
    return _require(table, key, path, kind)


def _parse_constants(table: Mapping[str, Any]) -> PhysicalConstants:
    allowed = ["earth_radius_km", "mu_km3_s2", "earth_rotation_rad_s", "light_speed_km_s"]
    _check_keys(table, allowed, "constants")
    defaults = PhysicalConstants()
    values = {
        key: float(_optional(table, key, "constants", getattr(defaults, key))) for key in allowed
    }
    return PhysicalConstants(**values)


def _parse_shell(table: Mapping[str, Any], index: int) -> Shell:
    path = f"shells[{index}]"
    _check_keys(
        table,
        ["planes", "sats_per_plane", "altitude_km", "inclination_deg", "phasing_factor",
         "max_isl_length_km"],
        path,
    )
    max_isl = _optional(table, "max_isl_length_km", path, None)
    return Shell(
        planes=_require(table, "planes", path, int),
        sats_per_plane=_require(table, "sats_per_plane", path, int),
        altitude_km=float(_require(table, "altitude_km", path)),
        inclination_rad=math.radians(_require(table, "inclination_deg", path)),
        phasing_factor=_optional(table, "phasing_factor", path, 0, int),
        max_isl_length_km=None if max_isl is None else float(max_isl),
    )


def _parse_ground_station(table: Mapping[str, Any], index: int) -> GroundStation:
    path = f"ground_stations[{index}]"
    _check_keys(table, ["name", "latitude_deg", "longitude_deg", "min_elevation_deg"], path)
    return GroundStation(
        name=_require(table, "name", path, str),
        latitude_rad=math.radians(_require(table, "latitude_deg", path)),
        longitude_rad=math.radians(_require(table, "longitude_deg", path)),
        min_elevation_rad=math.radians(_optional(table, "min_elevation_deg", path, 25.0)),
    )


def _resolve_machines(
    constellation: ConstellationConfig, table: Mapping[str, Any]
) -> Tuple[Tuple[int, ...], Tuple[str, ...]]:
    _check_keys(table, ["select", "ground_stations", "satellites"], "machines")
    nodes = constellation.node_ids()
    names = [node.name for node in nodes]
    select = _optional(table, "select", "machines", "all", str)
    if select == "all":
        if "ground_stations" in table or "satellites" in table:
            raise ConfigError("key 'machines.select' is \"all\" but a subset was listed")
        return tuple(range(len(nodes))), tuple(names)
    if select != "subset":
        raise ConfigError(f"key 'machines.select' must be \"all\" or \"subset\", got {select!r}")

    station_names = _optional(
        table, "ground_stations", "machines", [gs.name for gs in constellation.ground_stations], list
    )
    satellites = _optional(table, "satellites", "machines", [], list)
    chosen = []
    for name in station_names:
        if name not in [gs.name for gs in constellation.ground_stations]:
            raise ConfigError(f"key 'machines.ground_stations': unknown ground station {name!r}")
        chosen.append(names.index(name))
    for sat in satellites:
        label = f"sat-{sat}"
        if label not in names:
            raise ConfigError(f"key 'machines.satellites': unknown satellite {sat!r}")
        chosen.append(names.index(label))
    if len(set(chosen)) != len(chosen):
        raise ConfigError("key 'machines': a machine is listed twice")
    chosen.sort()
    return tuple(chosen), tuple(names[i] for i in chosen)


def _resolve_addresses(
    machine_names: Sequence[str], table: Mapping[str, Any]
) -> Tuple[ipaddress.IPv4Address, ...]:
    _check_keys(table, ["network", "hosts"], "addressing")
    try:
        network = ipaddress.IPv4Network(_optional(table, "network", "addressing", DEFAULT_NETWORK, str))
    except ValueError as e:
        raise ConfigError(f"key 'addressing.network': {e}") from e
    hosts = _optional(table, "hosts", "addressing", {}, dict)
    for name in hosts:
        if name not in machine_names:
            raise ConfigError(f"key 'addressing.hosts.{name}': not a machine")
    if len(machine_names) + 1 >= network.num_addresses:
        raise ConfigError("key 'addressing.network': too small for the machine set")

    addresses = []
    for i, name in enumerate(machine_names):
        if name in hosts:
            try:
                addresses.append(ipaddress.IPv4Address(hosts[name]))
            except ValueError as e:
                raise ConfigError(f"key 'addressing.hosts.{name}': {e}") from e
        else:
            addresses.append(network.network_address + i + 1)
    if len(set(addresses)) != len(addresses):
        raise ConfigError("key 'addressing': duplicate machine addresses")
    return tuple(addresses)


def parse_config(document: Mapping[str, Any], source: Optional[Path] = None) -> MainConfig:
    """
    Build a MainConfig from a parsed TOML document.

    Args:
        document: Parsed TOML tables
        source: Path the document came from, for messages

    Returns:
        Validated MainConfig
    """
    _check_keys(
        document,
        ["constants", "shells", "ground_stations", "links", "machines", "trace", "fabric",
         "addressing"],
        "",
    )
    try:
        constants = _parse_constants(document.get("constants", {}))
        shells = tuple(
            _parse_shell(table, i) for i, table in enumerate(document.get("shells", []))
        )
        stations = tuple(
            _parse_ground_station(table, i)
            for i, table in enumerate(document.get("ground_stations", []))
        )
        links = document.get("links", {})
        _check_keys(links, ["isl_bandwidth_kbps", "gsl_bandwidth_kbps"], "links")
        constellation = ConstellationConfig(
            shells=shells,
            ground_stations=stations,
            constants=constants,
            isl_bandwidth_kbps=_optional(links, "isl_bandwidth_kbps", "links", 10_000_000, int),
            gsl_bandwidth_kbps=_optional(links, "gsl_bandwidth_kbps", "links", 1_000_000, int),
        )
    except ConstellationError as e:
        raise ConfigError(str(e)) from e

    machines, machine_names = _resolve_machines(constellation, document.get("machines", {}))
    addresses = _resolve_addresses(machine_names, document.get("addressing", {}))

    trace = document.get("trace", {})
    _check_keys(trace, ["step_s", "duration_s"], "trace")
    step_s = float(_optional(trace, "step_s", "trace", DEFAULT_STEP_S))
    duration_s = _optional(trace, "duration_s", "trace", None)
    if step_s <= 0:
        raise ConfigError("key 'trace.step_s' must be > 0")
    if duration_s is not None and duration_s < step_s:
        raise ConfigError("key 'trace.duration_s' must be >= trace.step_s")

    fabric = document.get("fabric", {})
    _check_keys(fabric, ["seed", "device"], "fabric")

    return MainConfig(
        constellation=constellation,
        machines=machines,
        machine_names=machine_names,
        addresses=addresses,
        step_s=step_s,
        duration_s=None if duration_s is None else float(duration_s),
        seed=_optional(fabric, "seed", "fabric", 0, int),
        device=_optional(fabric, "device", "fabric", "eth0", str),
        source=source,
    )


def load_toml(config_path: Union[str, Path]) -> Dict[str, Any]:
    """Read a TOML document; I/O problems raise FileIOError, syntax ConfigError."""
    try:
        with open(config_path, "rb") as f:
            return tomllib.load(f)
    except OSError as e:
        raise FileIOError(f"cannot read {config_path}: {e.strerror or e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{config_path}: {e}") from e


def load_config(config_path: Union[str, Path]) -> MainConfig:
    """
    Load and validate the main configuration file.

    Args:
        config_path: Path to a TOML file

    Returns:
        MainConfig
    """
    return parse_config(load_toml(config_path), Path(config_path))
