"""Tests for the registry, slot allocation and the round-robin baseline."""

import numpy as np
import pytest

from rbcsched.scheduler import (
    AccessRequest,
    Frame,
    Registry,
    RegistryError,
    access,
    allocate,
    allocate_frame,
    alternative_next,
    alternative_rotation,
    deny_list,
    refresh,
)
from rbcsched.sim_config import BatterySpec, DriveSettings

FULL = 1000.0


def make_registry(residuals, slots=None, ids=None):
    ids = list(range(len(residuals))) if ids is None else ids
    registry = access(
        [AccessRequest(i, c) for i, c in zip(ids, residuals)], Registry(FULL)
    )
    if slots is not None:
        registry.slots = np.asarray(slots, dtype=np.int64)
    return registry


def literal_allocation(devices, num_slots):
    """Straight transcription of the ALLOCATING loop over (id, C_r, N_c) tuples."""
    ordered = sorted(devices, key=lambda device: (device[1], device[0]))
    frame = []
    for receiver_id, _, wanted in ordered:
        if wanted <= num_slots - len(frame):
            for _ in range(wanted):
                frame.append(receiver_id)
    return frame


class TestAccess:
    def test_all_accepted(self):
        registry = make_registry([0.0, 10.0, 20.0])
        assert len(registry) == 3
        assert registry.ids.tolist() == [0, 1, 2]

    def test_no_requests(self):
        registry = make_registry([0.0])
        access([], registry)
        assert len(registry) == 1

    def test_predicate_rejects(self):
        requests = [AccessRequest(i) for i in range(5)]
        registry = access(requests, Registry(FULL), deny_list([1, 3]))
        assert registry.ids.tolist() == [0, 2, 4]

    def test_duplicate_in_batch(self):
        registry = Registry(FULL)
        with pytest.raises(RegistryError):
            access([AccessRequest(4), AccessRequest(4)], registry)
        assert registry.empty

    def test_duplicate_of_registered(self):
        registry = make_registry([0.0, 0.0])
        with pytest.raises(RegistryError):
            access([AccessRequest(7), AccessRequest(1)], registry)
        assert len(registry) == 2

    def test_capacity_out_of_range(self):
        registry = access(
            [AccessRequest(0, -1.0), AccessRequest(1, 1500.0), AccessRequest(2, 5.0)],
            Registry(FULL),
        )
        assert registry.ids.tolist() == [2]

    def test_profile_row(self):
        profile = make_registry([0.0, 250.0])[1]
        assert profile.receiver_id == 1
        assert profile.residual_capacity_mah == 250.0
        assert profile.desired_slots == 0


class TestRefresh:
    drive = DriveSettings()
    spec = BatterySpec()

    def test_full_device_removed(self):
        registry = refresh(make_registry([FULL, 10.0]), self.drive, 0.2, self.spec)
        assert registry.ids.tolist() == [1]

    def test_cv_entry(self):
        registry = refresh(make_registry([800.0]), self.drive, 0.2, self.spec)
        profile = registry[0]
        assert profile.desired_power_w == pytest.approx(4.2)
        assert profile.desired_slots == 200
        assert not profile.power_limited

    def test_trickle(self):
        registry = refresh(make_registry([0.0]), self.drive, 0.2, self.spec)
        assert registry[0].desired_slots == 15

    def test_voltage_column(self):
        registry = refresh(make_registry([0.0, 450.0, 900.0]), self.drive, 0.2, self.spec)
        np.testing.assert_allclose(registry.voltage, [3.0, 3.6, 4.2])

    def test_all_full(self):
        registry = refresh(make_registry([FULL, FULL]), self.drive, 0.2, self.spec)
        assert registry.empty

    def test_power_limited_flag(self):
        drive = DriveSettings(drive_power_w=10.0)
        registry = refresh(make_registry([800.0]), drive, 0.2, self.spec)
        assert registry[0].desired_slots == 200
        assert registry[0].power_limited


class TestAllocateFrame:
    def test_fills_fifteen_slots(self):
        registry = make_registry([10.0, 20.0, 30.0, 40.0], slots=[6, 3, 4, 2])
        frame = allocate_frame(registry, 15)
        assert frame.pulses == ((0, 6), (1, 3), (2, 4), (3, 2))
        assert frame.used_slots == 15
        assert frame.multiplexing_number == 4

    def test_whole_frame_pulse(self):
        frame = allocate_frame(make_registry([0.0], slots=[200]), 200)
        assert frame.pulses == ((0, 200),)
        assert frame.multiplexing_number == 1
        assert frame.idle_slots == 0

    def test_skips_what_does_not_fit(self):
        registry = make_registry([10.0, 20.0, 30.0, 40.0], slots=[6, 5, 3, 2])
        frame = allocate_frame(registry, 10)
        assert frame.pulses == ((0, 6), (2, 3))
        assert frame.used_slots == 9
        assert frame.multiplexing_number == 2

    def test_lowest_capacity_first(self):
        registry = make_registry([500.0, 5.0, 50.0], slots=[4, 4, 4])
        assert allocate_frame(registry, 8).receiver_ids == [1, 2]

    def test_ties_go_to_lower_id(self):
        registry = make_registry([5.0, 5.0, 5.0], slots=[3, 3, 3], ids=[9, 2, 5])
        assert allocate_frame(registry, 6).receiver_ids == [2, 5]

    def test_zero_slots_not_counted(self):
        registry = make_registry([0.0, 1.0, 2.0], slots=[0, 4, 0])
        frame = allocate_frame(registry, 10)
        assert frame.pulses == ((1, 4),)
        assert frame.multiplexing_number == 1

    def test_pulses_are_contiguous(self):
        registry = make_registry([3.0, 1.0, 2.0], slots=[2, 3, 1])
        slots = allocate_frame(registry, 8).slots.tolist()
        assert slots == [1, 1, 1, 2, 0, 0]

    def test_rows_follow_pulses(self):
        registry = make_registry([30.0, 10.0, 20.0, 5.0], slots=[2, 3, 9, 4], ids=[7, 3, 8, 1])
        frame, rows = allocate(registry, 10)
        assert frame.receiver_ids == [1, 3, 7]
        assert registry.ids[rows].tolist() == frame.receiver_ids

    def test_empty_registry(self):
        frame = allocate_frame(Registry(FULL), 200)
        assert frame == Frame(200)
        assert frame.slots.size == 0

    def test_matches_literal_loop(self):
        rng = np.random.default_rng(1234)
        for _ in range(10_000):
            count = int(rng.integers(0, 21))
            num_slots = int(rng.integers(1, 51))
            # a coarse capacity grid makes ties common
            residuals = rng.integers(0, 8, count) * 25.0
            slots = rng.integers(0, num_slots + 1, count)
            ids = rng.permutation(100)[:count]
            registry = make_registry(residuals.tolist(), slots, ids.tolist())
            frame = allocate_frame(registry, num_slots)

            expected = literal_allocation(
                list(zip(ids.tolist(), residuals.tolist(), slots.tolist())), num_slots
            )
            assert frame.slots.tolist() == expected
            assert frame.multiplexing_number == len(set(expected))
            assert frame.used_slots <= num_slots
            # the neediest device that fits an empty frame is always served
            wanting = [i for i in range(count) if 0 < slots[i]]
            if wanting:
                neediest = min(wanting, key=lambda i: (residuals[i], ids[i]))
                assert int(ids[neediest]) in frame.receiver_ids


class TestAlternative:
    def test_cyclic_successor(self):
        profile, cursor = alternative_next(make_registry([0.0, 0.0, 0.0]), 0)
        assert profile.receiver_id == 1
        assert cursor == 1

    def test_skips_full(self):
        profile, _ = alternative_next(make_registry([0.0, FULL, 0.0]), 0)
        assert profile.receiver_id == 2

    def test_single_device(self):
        registry = make_registry([0.0], ids=[4])
        cursor = None
        for _ in range(3):
            profile, cursor = alternative_next(registry, cursor)
            assert profile.receiver_id == 4

    def test_wraps_around(self):
        registry = make_registry([0.0, 0.0, 0.0], ids=[3, 7, 11])
        assert alternative_next(registry, None)[0].receiver_id == 3
        assert alternative_next(registry, 11)[0].receiver_id == 3

    def test_nothing_left(self):
        with pytest.raises(RegistryError):
            alternative_next(make_registry([FULL]), None)

    def test_rotation_matches_repeated_next(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            count = int(rng.integers(1, 12))
            residuals = np.where(rng.random(count) < 0.3, FULL, 0.0)
            residuals[rng.integers(count)] = 0.0
            registry = make_registry(residuals.tolist(), ids=rng.permutation(40)[:count].tolist())
            start = None if rng.random() < 0.3 else int(rng.integers(40))
            steps = int(rng.integers(0, 30))

            picks, cursor = alternative_rotation(registry, start, steps)
            expected, walk = [], start
            for _ in range(steps):
                profile, walk = alternative_next(registry, walk)
                expected.append(profile.receiver_id)
            assert picks.tolist() == expected
            assert cursor == walk
