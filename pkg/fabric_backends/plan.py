"""Text plans for external NetEm and EDT-filter deployments."""

import ipaddress
from typing import Iterable, List, Mapping

from fabric_backends.base import LOSS_PPM_MAX, LinkParams
from topology.models import ChangeKind, LinkUpdate
from utils.errors import FabricError
from utils.text_utils import format_number

NETEM_HEADER = "## netem-plan"
EDT_HEADER = "## edt-plan"


def _loss_pct(loss_ppm: int) -> str:
    return format_number(round(loss_ppm * 100 / LOSS_PPM_MAX, 4))


def netem_line(device: str, minor: int, params: LinkParams) -> str:
    rate = "0" if params.rate_kbps is None else str(params.rate_kbps)
    return (
        f"tc qdisc replace dev {device} parent 1:{minor} handle {minor}0: netem "
        f"delay {params.delay_us}us rate {rate}kbit loss {_loss_pct(params.loss_ppm)}%"
    )


def netem_delete_line(device: str, minor: int) -> str:
    return f"tc qdisc del dev {device} parent 1:{minor} handle {minor}0:"


def edt_line(address: ipaddress.IPv4Address, params: LinkParams) -> str:
    rate = "0" if params.rate_kbps is None else str(params.rate_kbps)
    return f"SET {address} delay_us={params.delay_us} rate_kbps={rate} loss_ppm={params.loss_ppm}"


def emit_plan(
    updates: Iterable[LinkUpdate],
    device: str,
    addressing: Mapping[int, ipaddress.IPv4Address],
    host: int,
) -> str:
    """
    Render the configuration commands one host needs for a list of updates.

    Only updates touching ``host`` produce lines. The netem minor of a
    destination is 2 plus its rank among the host's peers in machine order,
    so minors stay stable from one plan to the next.

    Args:
        updates: Mesh updates (pairs of machine ids)
        device: Network device the netem tree hangs off
        addressing: Machine id to IPv4 address, for every machine
        host: Machine the plan is rendered for

    Returns:
        Plan text with the netem section followed by the edt section
    """
    if host not in addressing:
        raise FabricError(f"no address for machine {host}")
    peers = sorted(machine for machine in addressing if machine != host)
    minors = {peer: rank + 2 for rank, peer in enumerate(peers)}

    entries = []
    for update in updates:
        a, b = update.pair
        if host not in (a, b):
            continue
        peer = b if a == host else a
        if peer not in addressing:
            raise FabricError(f"no address for machine {peer}")
        entries.append((peer, update))
    entries.sort(key=lambda entry: entry[0])

    netem: List[str] = [NETEM_HEADER]
    edt: List[str] = [EDT_HEADER]
    for peer, update in entries:
        if update.kind is ChangeKind.REMOVED:
            netem.append(netem_delete_line(device, minors[peer]))
            edt.append(f"DEL {addressing[peer]}")
        else:
            params = LinkParams.from_mesh_link(update.link)
            netem.append(netem_line(device, minors[peer], params))
            edt.append(edt_line(addressing[peer], params))
    return "\n".join(netem + edt) + "\n"
