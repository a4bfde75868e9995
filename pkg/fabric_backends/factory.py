"""Backend selection by name."""

from typing import Optional

from fabric_backends.base import FabricBackend
from fabric_backends.hash_backend import HashFabricBackend
from fabric_backends.scan_backend import ScanFabricBackend

BACKEND_KINDS = ("hash", "scan")


def create_backend(kind: str, seed: int = 0, machine_count: Optional[int] = None) -> FabricBackend:
    """
    Create a fabric backend.

    Args:
        kind: 'hash' (constant-time map) or 'scan' (NetEm-like filter chains)
        seed: Loss PRNG seed
        machine_count: Machines served, None if unconstrained

    Returns:
        A fresh, empty backend
    """
    if kind == "hash":
        return HashFabricBackend(seed=seed, machine_count=machine_count)
    elif kind == "scan":
        return ScanFabricBackend(seed=seed, machine_count=machine_count)
    else:
        raise ValueError(f"Unsupported fabric backend: {kind}")
