import math

import numpy as np
import pytest

from pushddp.demolib import (
    Demonstration,
    DemoLibrary,
    EmptyLibraryError,
    SchemaError,
    count_face_switches,
    load,
    load_library,
    resample,
    save,
    select,
    selection_distance,
    switch_times,
    verify_replay,
)
from pushddp.pushdyn import ContactMode, HybridState, step

ST = ContactMode.sticking
SE = ContactMode.separation
SU = ContactMode.sliding_up


def make_consistent_demo(demo_id, params, n=40, seed=0, dt_rec=0.02):
    """Random controls integrated through the real stepper, so the record
    is dynamically consistent by construction."""
    rng = np.random.default_rng(seed)
    s = HybridState(0, 0, 0, -0.0505, rng.uniform(-0.02, 0.02), 0, 0)
    states, controls, modes = [], [], []
    for _ in range(n - 1):
        u = rng.uniform(-0.6, 0.6, size=2)
        states.append(list(s))
        controls.append(list(u))
        ns, mode = step(s, u, dt_rec, params)
        modes.append(mode)
        s = ns
    states.append(list(s))
    controls.append([0.0, 0.0])
    modes.append(SE())
    return Demonstration(
        id=demo_id,
        target=(s.x, s.y, s.theta),
        dt_rec=dt_rec,
        states=np.array(states),
        controls=np.array(controls),
        modes=tuple(modes),
    )


class TestSwitchCounting:
    def test_no_contact_no_switches(self):
        assert count_face_switches([SE()] * 5) == 0

    def test_separation_between_faces_counts_once(self):
        modes = [ST(0)] * 3 + [SE()] * 4 + [ST(1)] * 3
        assert count_face_switches(modes) == 1

    def test_same_face_recontact_not_a_switch(self):
        modes = [ST(2)] * 3 + [SE()] * 2 + [SU(2)] * 3
        assert count_face_switches(modes) == 0

    def test_two_switches(self):
        modes = [ST(2)] * 2 + [SE()] * 2 + [ST(3)] * 2 + [SE()] + [ST(0)] * 2
        assert count_face_switches(modes) == 2


class TestSaveLoad:
    def test_round_trip_bit_exact(self, params, tmp_path):
        demo = make_consistent_demo("rt", params, seed=3)
        path = tmp_path / "rt.demo.jsonl"
        save(demo, str(path))
        back = load(str(path))
        assert back.id == demo.id
        assert back.target == demo.target
        assert back.dt_rec == demo.dt_rec
        assert np.array_equal(back.states, demo.states)
        assert np.array_equal(back.controls, demo.controls)
        assert back.modes == demo.modes

    def test_fifty_randomized_round_trips(self, params, tmp_path):
        for seed in range(50):
            demo = make_consistent_demo(f"d{seed}", params, n=12, seed=seed)
            path = tmp_path / f"d{seed}.demo.jsonl"
            save(demo, str(path))
            back = load(str(path))
            assert np.array_equal(back.states, demo.states)
            assert np.array_equal(back.controls, demo.controls)
            assert back.modes == demo.modes

    def test_missing_target_raises_schema_error(self, tmp_path):
        path = tmp_path / "bad.demo.jsonl"
        path.write_text('{"id": "bad", "dt_rec": 0.02, "version": 1}\n')
        with pytest.raises(SchemaError, match="target"):
            load(str(path))

    def test_bad_mode_token_diagnosed_with_line(self, params, tmp_path):
        demo = make_consistent_demo("ok", params, n=5)
        path = tmp_path / "ok.demo.jsonl"
        save(demo, str(path))
        lines = path.read_text().splitlines()
        lines[2] = lines[2].replace(f'"{demo.modes[1].token()}"', '"XX+q"')
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaError, match="line 3"):
            load(str(path))

    def test_missing_file_is_io_error(self, tmp_path):
        with pytest.raises(OSError):
            load(str(tmp_path / "nope.demo.jsonl"))

    def test_fixture_ns1_has_one_switch(self, fixture_dir):
        demo = load(str(fixture_dir / "ns1.demo.jsonl"))
        assert demo.n_switches == 1

    def test_fixture_switch_classes(self, fixture_dir):
        lib = load_library(str(fixture_dir))
        assert sorted(d.n_switches for d in lib.demos) == [0, 1, 2]

    def test_fixtures_replay_consistently(self, fixture_dir, params):
        lib = load_library(str(fixture_dir))
        for d in lib.demos:
            assert verify_replay(d, params) <= 1e-6


class TestResample:
    def test_identity_when_already_on_grid(self, params):
        T = 30
        dt = 0.02
        demo = make_consistent_demo("grid", params, n=T + 1, seed=4, dt_rec=dt)
        out = resample(demo, T, dt)
        assert np.allclose(out.states, demo.states, atol=1e-12)
        assert np.allclose(out.refs.vel_refs, demo.states[:T, 5:7], atol=1e-12)
        assert np.allclose(out.refs.acc_refs, demo.controls[:T], atol=1e-12)

    def test_time_dilation_scales_velocity_and_acceleration(self, params):
        demo = make_consistent_demo("fast", params, n=21, seed=5, dt_rec=0.02)
        slow = Demonstration(
            id="slow",
            target=demo.target,
            dt_rec=0.04,  # same samples spread over twice the time
            states=demo.states.copy(),
            controls=demo.controls.copy(),
            modes=demo.modes,
        )
        T, dt = 10, 0.05
        fast_out = resample(demo, T, dt)
        slow_out = resample(slow, T, dt)
        # same samples over twice the duration: squeezing onto the same grid
        # doubles the velocity refs and quadruples the acceleration refs
        assert np.allclose(slow_out.refs.vel_refs, 2.0 * fast_out.refs.vel_refs, atol=1e-12)
        assert np.allclose(slow_out.refs.acc_refs, 4.0 * fast_out.refs.acc_refs, atol=1e-12)

    def test_endpoints_preserved(self, params):
        demo = make_consistent_demo("ends", params, n=33, seed=6)
        out = resample(demo, 50, 0.05)
        assert np.allclose(out.states[0, :5], demo.states[0, :5], atol=0)
        assert np.allclose(out.states[-1, :5], demo.states[-1, :5], atol=0)

    def test_length_contracts(self, params):
        demo = make_consistent_demo("len", params, n=17, seed=7)
        for T in (1, 5, 64):
            out = resample(demo, T, 0.05)
            assert out.states.shape == (T + 1, 7)
            assert out.refs.vel_refs.shape == (T, 2)
            assert out.refs.acc_refs.shape == (T, 2)
            assert len(out.modes) == T

    def test_theta_interpolates_on_circle(self, params):
        states = np.zeros((2, 7))
        states[0, 2] = math.pi - 0.1
        states[1, 2] = -math.pi + 0.1  # 0.2 rad away across the seam
        demo = Demonstration(
            id="seam",
            target=(0, 0, 0),
            dt_rec=0.02,
            states=states,
            controls=np.zeros((2, 2)),
            modes=(SE(), SE()),
        )
        out = resample(demo, 2, 0.01)
        mid = out.states[1, 2]
        assert abs(abs(mid) - math.pi) < 0.11  # stays near the seam, no sweep through 0


class TestSwitchTimes:
    def test_no_change_empty(self):
        assert switch_times([ST(0)] * 6) == []

    def test_pre_anchor_points_at_last_old_face_index(self):
        modes = [ST(0)] * 3 + [SE()] * 2 + [ST(1)] * 3
        assert switch_times(modes) == [2]
        assert switch_times(modes, anchor="post") == [5]

    def test_matches_bruteforce_scan_on_fixtures(self, fixture_dir):
        lib = load_library(str(fixture_dir))
        for demo in lib.demos:
            out = resample(demo, 200, 0.05)
            times = switch_times(out.modes)
            # independent linear scan over contact faces
            expected = []
            prev_face = None
            prev_idx = None
            for t, m in enumerate(out.modes):
                if not m.in_contact:
                    continue
                if prev_face is not None and m.face != prev_face:
                    expected.append(prev_idx)
                prev_face, prev_idx = m.face, t
            assert times == expected
            assert len(times) == demo.n_switches
            assert all(0 <= t <= 199 for t in times)
            assert times == sorted(set(times))


class TestSelect:
    def _library(self, seed=0, n=10):
        rng = np.random.default_rng(seed)
        demos = []
        for i in range(n):
            demos.append(
                Demonstration(
                    id=f"demo{i:02d}",
                    target=(rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25), rng.uniform(-math.pi, math.pi)),
                    dt_rec=0.02,
                    states=np.zeros((2, 7)),
                    controls=np.zeros((2, 2)),
                    modes=(SE(), SE()),
                )
            )
        return DemoLibrary(demos)

    def test_exact_target_selected(self):
        lib = self._library()
        d = lib.demos[4]
        assert select(d.target, lib).id == d.id

    def test_wrap_symmetry(self):
        a = selection_distance((0, 0, math.pi), (0, 0, 0))
        b = selection_distance((0, 0, -math.pi), (0, 0, 0))
        assert a == pytest.approx(b)

    def test_matches_bruteforce_argmin(self):
        lib = self._library(seed=1)
        rng = np.random.default_rng(2)
        for _ in range(100):
            t = (rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25), rng.uniform(-math.pi, math.pi))
            got = select(t, lib)
            want = min(lib.demos, key=lambda d: (selection_distance(t, d.target), d.id))
            assert got.id == want.id

    def test_scaling_invariance(self):
        lib = self._library(seed=3)
        rng = np.random.default_rng(4)
        for _ in range(25):
            t = (rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25), rng.uniform(-math.pi, math.pi))
            base = select(t, lib).id
            scaled = min(
                lib.demos, key=lambda d: (7.3 * selection_distance(t, d.target), d.id)
            ).id
            assert base == scaled

    def test_tie_breaks_lexicographic(self):
        demos = [
            Demonstration(
                id=i,
                target=(0.1, 0.0, 0.0),
                dt_rec=0.02,
                states=np.zeros((2, 7)),
                controls=np.zeros((2, 2)),
                modes=(SE(), SE()),
            )
            for i in ("zeta", "alpha")
        ]
        lib = DemoLibrary(demos)
        assert select((0.1, 0.0, 0.0), lib).id == "alpha"

    def test_empty_library_raises(self):
        with pytest.raises(EmptyLibraryError):
            select((0, 0, 0), DemoLibrary([]))

    def test_k_larger_than_library(self):
        lib = self._library(seed=5, n=3)
        assert select((0, 0, 0), lib, k=10).id == select((0, 0, 0), lib).id


class TestLibrary:
    def test_duplicate_ids_rejected(self, params):
        d1 = make_consistent_demo("same", params, n=5, seed=1)
        d2 = make_consistent_demo("same", params, n=5, seed=2)
        with pytest.raises(ValueError):
            DemoLibrary([d1, d2])

    def test_rollout_replay_of_demo_controls(self, fixture_dir, params):
        from pushddp.ddpcore import rollout

        demo = load(str(fixture_dir / "ns0.demo.jsonl"))
        n = demo.n_samples
        traj = rollout(
            HybridState(*demo.states[0]),
            demo.controls[: n - 1],
            demo.dt_rec,
            params,
            mode_schedule=demo.modes[: n - 1],
        )
        assert np.max(np.abs(traj.states - demo.states)) <= 1e-9
