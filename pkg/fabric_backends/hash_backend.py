"""Hash-table fabric backend (EDT filter with a constant-time map)."""

from typing import Dict, Iterable, Optional, Tuple

from fabric_backends.base import DestKey, FabricBackend, LinkParams


class HashFabricBackend(FabricBackend):
    """Destination table in a hash map: O(1) expected insert and lookup."""

    kind = "hash"

    def __init__(self, seed: int = 0, machine_count: Optional[int] = None):
        super().__init__(seed=seed, machine_count=machine_count)
        self._table: Dict[DestKey, LinkParams] = {}

    def _store(self, dest: DestKey, params: LinkParams) -> None:
        self._table[dest] = params

    def _discard(self, dest: DestKey) -> bool:
        return self._table.pop(dest, None) is not None

    def _lookup(self, dest: DestKey) -> Optional[LinkParams]:
        return self._table.get(dest)

    def _entries(self) -> Iterable[Tuple[DestKey, LinkParams]]:
        return list(self._table.items())
