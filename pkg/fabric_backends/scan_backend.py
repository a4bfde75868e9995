"""Filter-chain fabric backend modelling NetEm's insertion and lookup cost."""

import threading
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from fabric_backends.base import DestKey, FabricBackend, LinkParams


@dataclass
class _Filter:
    key: DestKey
    handle: int
    params: LinkParams


class ScanFabricBackend(FabricBackend):
    """
    One filter chain per source device, searched linearly.

    Every insert walks the whole chain of its device checking for duplicate
    destinations and handle conflicts before it appends, and every packet
    lookup walks the chain too. All instances share one lock, so filter
    creation never runs in parallel.
    """

    kind = "scan"
    _global_lock = threading.Lock()

    def __init__(self, seed: int = 0, machine_count: Optional[int] = None):
        super().__init__(seed=seed, machine_count=machine_count)
        self._lock = ScanFabricBackend._global_lock
        self._chains: Dict[int, List[_Filter]] = {}

    def _store(self, dest: DestKey, params: LinkParams) -> None:
        chain = self._chains.setdefault(dest.source, [])
        candidate = len(chain) + 2
        highest = 1
        duplicate = None
        conflict = False
        for entry in chain:
            if entry.key == dest:
                duplicate = entry
            if entry.handle == candidate:
                conflict = True
            if entry.handle > highest:
                highest = entry.handle
        if duplicate is not None:
            duplicate.params = params
            return
        chain.append(_Filter(dest, highest + 1 if conflict else candidate, params))

    def _discard(self, dest: DestKey) -> bool:
        chain = self._chains.get(dest.source, [])
        for position, entry in enumerate(chain):
            if entry.key == dest:
                del chain[position]
                return True
        return False

    def _lookup(self, dest: DestKey) -> Optional[LinkParams]:
        for entry in self._chains.get(dest.source, ()):
            if entry.key == dest:
                return entry.params
        return None

    def _entries(self) -> Iterable[Tuple[DestKey, LinkParams]]:
        return [(entry.key, entry.params) for chain in self._chains.values() for entry in chain]
