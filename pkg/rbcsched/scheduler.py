import logging
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from rbcsched.battery import profile_arrays
from rbcsched.power_chain import slots_for_power
from rbcsched.sim_config import BatterySpec, DriveSettings

logger = logging.getLogger(__name__)


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class AccessRequest:
    receiver_id: int
    residual_capacity_mah: float = 0.0


class DeviceProfile(NamedTuple):
    receiver_id: int
    residual_capacity_mah: float
    desired_power_w: float
    desired_slots: int
    power_limited: bool


def accept_all(request: AccessRequest) -> bool:  # pylint: disable=unused-argument
    return True


def deny_list(receiver_ids: Iterable[int]) -> Callable[[AccessRequest], bool]:
    denied = frozenset(receiver_ids)
    return lambda request: request.receiver_id not in denied


class Registry:
    """The accessed receivers, kept as parallel numpy columns in access order."""

    def __init__(self, full_capacity_mah: float):
        self.full_capacity_mah = full_capacity_mah
        self.ids = np.empty(0, dtype=np.int64)
        self.residual = np.empty(0, dtype=np.float64)
        self.power = np.empty(0, dtype=np.float64)
        self.voltage = np.empty(0, dtype=np.float64)
        self.slots = np.empty(0, dtype=np.int64)
        self.limited = np.empty(0, dtype=bool)

    def __len__(self):
        return len(self.ids)

    def __getitem__(self, row: int) -> DeviceProfile:
        return DeviceProfile(
            int(self.ids[row]),
            float(self.residual[row]),
            float(self.power[row]),
            int(self.slots[row]),
            bool(self.limited[row]),
        )

    def __iter__(self):
        for row in range(len(self)):
            yield self[row]

    @property
    def empty(self) -> bool:
        return len(self.ids) == 0

    def rows_of(self, receiver_ids) -> np.ndarray:
        return np.flatnonzero(np.isin(self.ids, receiver_ids))

    def append(self, requests: list):
        self.ids = np.append(self.ids, [r.receiver_id for r in requests]).astype(np.int64)
        self.residual = np.append(self.residual, [r.residual_capacity_mah for r in requests])
        self.power = np.append(self.power, np.zeros(len(requests)))
        self.voltage = np.append(self.voltage, np.zeros(len(requests)))
        self.slots = np.append(self.slots, np.zeros(len(requests), dtype=np.int64))
        self.limited = np.append(self.limited, np.zeros(len(requests), dtype=bool))

    def keep(self, mask: np.ndarray):
        self.ids = self.ids[mask]
        self.residual = self.residual[mask]
        self.power = self.power[mask]
        self.voltage = self.voltage[mask]
        self.slots = self.slots[mask]
        self.limited = self.limited[mask]


@dataclass(frozen=True)
class Frame:
    """One frame F: contiguous pulses of (receiver id, slot count) in allocation order."""

    num_slots: int
    pulses: tuple = ()

    @property
    def slots(self) -> np.ndarray:
        if not self.pulses:
            return np.empty(0, dtype=np.int64)
        ids, counts = zip(*self.pulses)
        return np.repeat(np.asarray(ids, dtype=np.int64), counts)

    @property
    def receiver_ids(self) -> list:
        return [receiver_id for receiver_id, _ in self.pulses]

    @property
    def used_slots(self) -> int:
        return sum(count for _, count in self.pulses)

    @property
    def idle_slots(self) -> int:
        return self.num_slots - self.used_slots

    @property
    def multiplexing_number(self) -> int:
        return len(self.pulses)


def access(
    pending: Iterable[AccessRequest],
    registry: Registry,
    authenticate: Callable[[AccessRequest], bool] = accept_all,
) -> Registry:
    """ACCESSING: append every authenticated request to the registry.

    The registry is updated in place and returned. A duplicate id rejects the
    whole batch before anything is appended.
    """
    pending = list(pending)
    seen = set(registry.ids.tolist())
    for request in pending:
        if request.receiver_id in seen:
            raise RegistryError(f"duplicate receiver id {request.receiver_id}")
        seen.add(request.receiver_id)

    accepted = []
    for request in pending:
        if not authenticate(request):
            logger.info("receiver %d rejected: authentication failed", request.receiver_id)
            continue
        if not 0 <= request.residual_capacity_mah <= registry.full_capacity_mah:
            logger.info(
                "receiver %d rejected: residual capacity %.3f mAh out of range",
                request.receiver_id,
                request.residual_capacity_mah,
            )
            continue
        accepted.append(request)
    registry.append(accepted)
    return registry


def refresh(
    registry: Registry, drive: DriveSettings, efficiency: float, spec: BatterySpec
) -> Registry:
    """REFRESHING and FILTERING: recompute P_c and N_c, then drop full receivers.

    An empty registry afterwards means scheduling is finished.
    """
    if registry.empty:
        return registry
    soc = np.minimum(registry.residual / spec.full_capacity_mah, 1.0)
    registry.voltage, registry.power = profile_arrays(soc, spec)
    registry.slots, registry.limited = slots_for_power(
        registry.power, drive.drive_power_w, efficiency, drive.slots_per_frame
    )
    full = registry.residual >= spec.full_capacity_mah
    if full.any():
        logger.debug("filtering full receivers %s", registry.ids[full].tolist())
        registry.keep(~full)
    return registry


def allocate(registry: Registry, num_slots: int):
    """ALLOCATING: lowest residual capacity first, first fit into the free slots.

    Ties on residual capacity go to the lower id. Receivers that do not fit are
    passed over and the scan continues; receivers asking for zero slots are skipped.
    Returns (frame, registry rows of the frame's pulses in allocation order).
    """
    order = np.lexsort((registry.ids, registry.residual))
    free = num_slots
    rows, counts = [], []
    for row, wanted in zip(order.tolist(), registry.slots[order].tolist()):
        if wanted == 0 or wanted > free:
            continue
        rows.append(row)
        counts.append(wanted)
        free -= wanted
        if free == 0:
            # only zero-slot receivers could follow, and those are skipped
            break
    ids = registry.ids[rows].tolist()
    return Frame(num_slots, tuple(zip(ids, counts))), np.asarray(rows, dtype=np.int64)


def allocate_frame(registry: Registry, num_slots: int) -> Frame:
    return allocate(registry, num_slots)[0]


def alternative_rotation(registry: Registry, cursor: Optional[int], count: int):
    """The next ``count`` non-full receivers after ``cursor`` in cyclic id order.

    Same as calling alternative_next ``count`` times. Returns (ids, new cursor).
    """
    active = registry.residual < registry.full_capacity_mah
    if not active.any():
        raise RegistryError("no receiver left to charge")
    if count == 0:
        return np.empty(0, dtype=np.int64), cursor
    candidates = np.sort(registry.ids[active])
    start = 0 if cursor is None else int(np.searchsorted(candidates, cursor, side="right"))
    picks = candidates[(start + np.arange(count)) % len(candidates)]
    return picks, int(picks[-1])


def alternative_next(registry: Registry, cursor: Optional[int]):
    """Next non-full receiver after ``cursor`` in cyclic id order.

    Returns (DeviceProfile, new cursor). ``cursor`` is the id served last, or None
    to start from the lowest id.
    """
    picks, cursor = alternative_rotation(registry, cursor, 1)
    row = int(np.flatnonzero(registry.ids == picks[0])[0])
    return registry[row], cursor
