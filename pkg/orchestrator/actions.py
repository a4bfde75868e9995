"""Application of plan actions to a fabric backend and an application hook."""

from typing import Callable, Dict, Optional, Tuple

import structlog

from fabric_backends.base import DestKey, FabricBackend, LinkParams
from orchestrator.plan import Action, ActionKind
from utils.errors import FabricError, OrchestratorError

logger = structlog.get_logger(__name__)

AppHook = Callable[[str, str], None]


def _scaled(params: LinkParams, factor: float) -> LinkParams:
    delay = int(params.delay_us * factor + 0.5)
    return LinkParams(delay_us=delay, rate_kbps=params.rate_kbps, loss_ppm=params.loss_ppm)


class ActionExecutor:
    """
    Applies actions and keeps what is needed to undo drops and node outages.

    Pair actions touch both directions of the pair. Every failure is raised
    as an OrbitMeshError subclass so the engine can record it.
    """

    def __init__(self, backend: FabricBackend, app_hook: Optional[AppHook] = None):
        self.backend = backend
        self.app_hook = app_hook
        self._dropped: Dict[Tuple[int, int], Dict[DestKey, LinkParams]] = {}
        self._offline: Dict[int, Dict[DestKey, LinkParams]] = {}

    @staticmethod
    def _keys(pair: Tuple[int, int]) -> Tuple[DestKey, DestKey]:
        a, b = pair
        return DestKey(a, b), DestKey(b, a)

    def apply(self, action: Action) -> None:
        handler = getattr(self, f"_apply_{action.kind.value}")
        handler(action)

    def _apply_set_link(self, action: Action) -> None:
        for key in self._keys(action.pair):
            self.backend.set_link(key, action.params)

    def _apply_drop_link(self, action: Action) -> None:
        pair = tuple(sorted(action.pair))
        saved = {}
        for key in self._keys(pair):
            params = self.backend.get_link(key)
            if params is not None:
                saved[key] = params
        if not saved:
            raise FabricError(f"link {pair[0]}-{pair[1]} is not present")
        for key in saved:
            self.backend.remove_link(key)
        self._dropped[pair] = saved

    def _apply_restore_link(self, action: Action) -> None:
        pair = tuple(sorted(action.pair))
        saved = self._dropped.pop(pair, None)
        if saved is None:
            raise FabricError(f"link {pair[0]}-{pair[1]} was not dropped")
        for key, params in saved.items():
            self.backend.set_link(key, params)

    def _apply_node_off(self, action: Action) -> None:
        node = action.node
        if node in self._offline:
            raise FabricError(f"machine {node} is already off")
        saved = {key: params for key, params in self.backend.snapshot_table().items() if node in key}
        for key in saved:
            self.backend.remove_link(key)
        self._offline[node] = saved

    def _apply_node_on(self, action: Action) -> None:
        saved = self._offline.pop(action.node, None)
        if saved is None:
            raise FabricError(f"machine {action.node} is not off")
        for key, params in saved.items():
            self.backend.set_link(key, params)

    def _apply_app_command(self, action: Action) -> None:
        if self.app_hook is None:
            raise OrchestratorError(f"no application hook for {action.target!r}")
        try:
            self.app_hook(action.target, action.command)
        except Exception as e:
            raise OrchestratorError(f"{action.target}: {e}") from e

    def _apply_emit(self, action: Action) -> None:
        pass

    def _apply_scale_links(self, action: Action) -> None:
        for key, params in self.backend.table().items():
            self.backend.set_link(key, _scaled(params, action.factor))


def fabric_action(action: Action) -> bool:
    """Whether the action changes the fabric table."""
    return action.kind not in (ActionKind.APP_COMMAND, ActionKind.EMIT)
