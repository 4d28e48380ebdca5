# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from wholegrid import emtsim, lti, machines, sysmodel
from wholegrid.case import prepare_case
from wholegrid.config import GridConfig
from wholegrid.emtsim import Event, InjectionSpec, SimScenario
from wholegrid.errors import EventPathInvalid, LeakageDetected, SchemaError, StateBlowup


def test_operating_point_is_an_equilibrium(any_fixture, rl_config):
    assert emtsim.equilibrium_residual(any_fixture) < emtsim.EQUILIBRIUM_TOL
    assert emtsim.equilibrium_residual(rl_config) < emtsim.EQUILIBRIUM_TOL


def test_linear_model_matches_the_jacobian(any_fixture):
    case = prepare_case(any_fixture)
    reference = np.linalg.eigvals(emtsim.linearize(case))
    poles = lti.poles(sysmodel.build_model(case).closed_loop)
    ref, matched = emtsim.match_eigenvalues(reference, poles)
    tol = 1e-5 * np.maximum(np.abs(ref), 100.0)
    assert np.all(np.abs(ref - matched) <= tol)


def test_passive_linear_model_matches_the_jacobian(rl_config):
    reference = np.linalg.eigvals(emtsim.linearize(rl_config))
    poles = lti.poles(sysmodel.build_model(rl_config).closed_loop)
    ref, matched = emtsim.match_eigenvalues(reference, poles)
    assert_allclose(matched, ref, atol=1e-3)


def test_match_eigenvalues():
    ref, matched = emtsim.match_eigenvalues([1.0, 2j, -2j], [-2j + 1e-9, 1.0 + 1e-9, 2j])
    assert_allclose(matched, ref, atol=1e-8)
    with pytest.raises(ValueError):
        emtsim.match_eigenvalues([1.0], [1.0, 2.0])


def test_default_channels_and_columns(sg_config):
    frame = emtsim.simulate(sg_config, SimScenario(t_end=0.002, dt=1e-4))
    assert list(frame.columns) == ["t", "v:1_re", "v:1_im", "v:2_re", "v:2_im", "omega:2"]
    assert len(frame) == 21
    assert frame["t"].iloc[-1] == pytest.approx(0.002)


def test_injection_channel_reads_the_power_flow_current(gfl_config):
    case = prepare_case(gfl_config)
    frame = emtsim.simulate(case, SimScenario(t_end=1e-3, dt=1e-4, probes=("i:2", "vdc:2", "delta:2")))
    i0 = case.operating_point.I[1]
    assert frame["i:2_re"].iloc[0] == pytest.approx(i0.real, abs=1e-9)
    assert frame["i:2_im"].iloc[0] == pytest.approx(i0.imag, abs=1e-9)
    assert frame["vdc:2"].iloc[0] == pytest.approx(2.0)
    assert frame["delta:2"].iloc[0] == pytest.approx(np.angle(case.operating_point.V[1]))


def test_record_every_thins_the_output(rl_config):
    frame = emtsim.simulate(rl_config, SimScenario(t_end=0.01, dt=1e-4, record_every=10))
    assert len(frame) == 11
    assert_allclose(frame["t"], np.linspace(0.0, 0.01, 11))


@pytest.mark.parametrize("channel", ["vdc:2", "omega:1", "v:3", "x:1", "v:one"])
def test_unknown_channels(sg_config, channel):
    with pytest.raises(SchemaError):
        emtsim.simulate(sg_config, SimScenario(t_end=1e-3, dt=1e-4, probes=(channel,)))


@pytest.mark.slow
def test_equilibrium_holds(any_fixture):
    frame = emtsim.simulate(any_fixture, SimScenario(t_end=0.05, record_every=100))
    for column in frame.columns:
        if column.startswith("v:"):
            assert np.ptp(frame[column]) < 1e-4
        elif column.startswith("omega:"):
            assert np.ptp(frame[column]) < 1e-3


def test_events_change_parameters_at_their_time(sg_config):
    scenario = SimScenario(t_end=0.02, dt=5e-5, events=[Event(0.01, "machines[1].D", 2e-4)])
    frame = emtsim.simulate(sg_config, scenario)
    before = frame[frame["t"] <= 0.01 - 1e-9]
    w0 = sg_config.w0
    assert np.max(np.abs(before["omega:2"] - w0)) < 1e-3
    # the extra damping torque brakes the rotor
    assert frame["omega:2"].iloc[-1] < w0 - 0.1


@pytest.mark.parametrize("event", [
    Event(0.001, "machines[7].J", 1.0),
    Event(0.001, "machines[1].kind", 1.0),
    Event(0.001, "network.branches[0].L", 0.0),
])
def test_invalid_events(sg_config, event):
    with pytest.raises(EventPathInvalid) as info:
        emtsim.simulate(sg_config, SimScenario(t_end=0.002, dt=1e-4, events=[event]))
    assert info.value.path == event.path


def test_state_blowup(sg_config, monkeypatch):
    monkeypatch.setattr(emtsim, "BLOWUP", 0.5)
    with pytest.raises(StateBlowup) as info:
        emtsim.simulate(sg_config, SimScenario(t_end=1e-3, dt=1e-4))
    assert info.value.details["time"] == pytest.approx(1e-4)


def test_rk4_is_fourth_order():
    def error(steps):
        x = np.array([1.0 + 0j])
        h = 1.0 / steps
        for _ in range(steps):
            x = emtsim._rk4_step(lambda y: (-1.0 + 5j) * y, x, h)
        return abs(x[0] - np.exp(-1.0 + 5j))

    ratio = error(40) / error(80)
    assert 13.0 < ratio < 19.0


@pytest.mark.parametrize("kwargs", [
    {"t_end": 0.0},
    {"t_end": 1.0, "dt": -1e-5},
    {"t_end": 1.0, "events": [Event(0.5, "machines[0].J", 1.0), Event(0.2, "machines[0].J", 2.0)]},
    {"t_end": 1.0, "record_every": 0},
])
def test_scenario_validation(kwargs):
    with pytest.raises(ValueError):
        SimScenario(**kwargs)


def test_scenario_from_dict():
    scenario = SimScenario.from_dict({
        "t_end": 0.5, "dt": 1e-4, "probes": ["v:1"],
        "events": [{"time": 0.1, "path": "machines[0].D", "value": 1}],
    })
    assert scenario.events == (Event(0.1, "machines[0].D", 1.0),)
    assert scenario.probes == ("v:1",)
    with pytest.raises(SchemaError):
        SimScenario.from_dict({"dt": 1e-4})
    with pytest.raises(SchemaError):
        SimScenario.from_dict({"t_end": 1.0, "events": [{"time": 0.1}]})


@pytest.mark.parametrize("kwargs, error", [
    ({"frame": "rotor"}, ValueError),
    ({"channel": "x"}, ValueError),
    ({"amplitude": 0.1}, ValueError),
    ({"frequencies": [10.0, 0.0]}, ValueError),
    ({"settle_cycles": 2.5}, LeakageDetected),
    ({"measure_cycles": 0}, LeakageDetected),
])
def test_injection_spec_validation(kwargs, error):
    with pytest.raises(error):
        InjectionSpec(target=2, frequencies=[10.0], **kwargs)


def test_measurement_needs_a_machine(composite_config):
    spec = InjectionSpec(target=4, frequencies=[10.0])
    with pytest.raises(SchemaError):
        emtsim.measure_admittance(composite_config, spec)


def test_growth_rate_of_a_decaying_oscillation():
    t = np.linspace(0.0, 3.0, 3001)
    y = 2.0 + np.exp(-t) * np.cos(10 * np.pi * t)
    assert emtsim.fit_growth_rate(t, y) == pytest.approx(-1.0, abs=0.05)


def test_growth_rate_of_a_growing_oscillation():
    t = np.linspace(0.0, 4.0, 4001)
    y = np.exp(0.5 * t) * np.sin(2 * np.pi * 5 * t)
    assert emtsim.fit_growth_rate(t, y) == pytest.approx(0.5, abs=0.05)


def test_growth_rate_needs_peaks():
    with pytest.raises(ValueError):
        emtsim.fit_growth_rate([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])


def assert_admittance_close(measured, expected, rtol):
    scale = np.abs(expected).max()
    assert np.abs(measured - expected).max() <= rtol * scale


@pytest.mark.slow
def test_measured_load_admittance(rl_config):
    case = prepare_case(rl_config)
    spec = InjectionSpec(target=2, frequencies=[20.0, -35.0], settle_cycles=10, dt=1e-4, compensate_delay=True)
    samples = emtsim.measure_admittance(case, spec)
    model = case.machine_at(2).local_admittance()
    assert [sample.frequency for sample in samples] == [20.0, -35.0]
    for sample in samples:
        assert_admittance_close(sample.value, lti.evaluate(model, 2j * math.pi * sample.frequency), 1e-2)


@pytest.mark.slow
def test_measured_generator_admittance_in_both_frames(sg_config):
    config = sg_config.with_value("machines[1].J", 1e3)
    config = config.with_value("machines[1].D", 1.0).with_value("machines[1].R", 0.1)
    case = prepare_case(config)
    machine = case.machine_at(2)
    s = 2j * math.pi * 25.0
    for frame, model in (
        (emtsim.STEADY, machine.local_admittance()),
        (emtsim.SWING, lti.inverse(machines.sg_swing_impedance(machine.params))),
    ):
        spec = InjectionSpec(target=2, frame=frame, frequencies=[25.0], settle_cycles=15, dt=5e-5,
                             compensate_delay=True)
        (sample,) = emtsim.measure_admittance(case, spec)
        assert_admittance_close(sample.value, lti.evaluate(model, s), 2e-2)


@pytest.mark.slow
def test_measured_converter_admittance(gfl_config):
    case = prepare_case(gfl_config)
    spec = InjectionSpec(target=2, frequencies=[25.0], settle_cycles=15, dt=5e-5, compensate_delay=True)
    (sample,) = emtsim.measure_admittance(case, spec)
    expected = lti.evaluate(case.machine_at(2).local_admittance(), 2j * math.pi * 25.0)
    assert_admittance_close(sample.value, expected, 2e-2)


def with_feed_forward(config):
    data = config.to_dict()
    for machine in data["machines"]:
        if machine["kind"] == "gfl":
            machine["decoupling"] = True
    return GridConfig.from_dict(data, name=config.name)


def test_feed_forward_converter_matches_the_jacobian(gfl_config):
    case = prepare_case(with_feed_forward(gfl_config))
    assert case.machine_at(2).params.decoupling
    reference = np.linalg.eigvals(emtsim.linearize(case))
    poles = lti.poles(sysmodel.build_model(case).closed_loop)
    ref, matched = emtsim.match_eigenvalues(reference, poles)
    assert np.all(np.abs(ref - matched) <= 1e-5 * np.maximum(np.abs(ref), 100.0))


def test_measurement_of_a_missing_bus(composite_config):
    spec = InjectionSpec(target=9, frequencies=[10.0])
    with pytest.raises(SchemaError) as info:
        emtsim.measure_admittance(composite_config, spec)
    assert info.value.path == "/bus"


SLOW_CONVERTER = ("machines[2].pll_bandwidth_hz", "machines[2].dc_bandwidth_hz")


def swing_amplitude(frame, start, stop):
    window = frame[(frame["t"] >= start) & (frame["t"] < stop)]
    return float(np.abs(window["omega:2"] - window["omega:1"]).max())


def damping_pulse(config, time):
    # a brief step in the light generator's damping kicks the swing mode
    nominal = config.machines[1]["D"]
    return [Event(time, "machines[1].D", 1.2e-7), Event(time + 0.01, "machines[1].D", nominal)]


@pytest.mark.slow
def test_growth_rate_matches_the_rightmost_pole(composite_config):
    config = composite_config
    for path in SLOW_CONVERTER:
        config = config.with_value(path, 5.0)
    rightmost = sysmodel.stability_summary(sysmodel.system_poles(sysmodel.build_model(config))).rightmost
    assert rightmost.value.real > 0

    scenario = SimScenario(t_end=2.0, dt=2e-4, events=damping_pulse(config, 0.1), record_every=5,
                           probes=("omega:1", "omega:2"))
    frame = emtsim.simulate(config, scenario)
    late = frame[frame["t"] >= 0.5]
    rate = emtsim.fit_growth_rate(late["t"], late["omega:2"] - late["omega:1"])
    assert rate == pytest.approx(rightmost.value.real, rel=0.1)


@pytest.mark.slow
def test_slowing_the_converter_destabilizes_the_swing_mode(composite_config):
    events = [Event(0.5, path, 5.0) for path in SLOW_CONVERTER]
    events += damping_pulse(composite_config, 0.5)
    events += [Event(2.0, path, 20.0) for path in SLOW_CONVERTER]
    scenario = SimScenario(t_end=4.0, dt=2e-4, events=events, record_every=5, probes=("omega:1", "omega:2"))
    frame = emtsim.simulate(composite_config, scenario)

    assert swing_amplitude(frame, 0.0, 0.5) < 1e-3
    grown = swing_amplitude(frame, 1.75, 2.0)
    assert grown > 4.0 * swing_amplitude(frame, 0.5, 0.75)
    assert swing_amplitude(frame, 3.75, 4.0) < 1e-2 * grown


def measure_at(case, frame, f):
    spec = InjectionSpec(target=2, frame=frame, frequencies=[f], settle_cycles=15, dt=5e-5, compensate_delay=True)
    (sample,) = emtsim.measure_admittance(case, spec)
    return sample.value


@pytest.mark.slow
def test_heavy_rotor_frames_coincide(sg_config):
    case = prepare_case(sg_config.with_value("machines[1].J", 1e9))
    expected = lti.evaluate(case.machine_at(2).swing_admittance(), 2j * math.pi * 25.0)
    steady = measure_at(case, emtsim.STEADY, 25.0)
    swing = measure_at(case, emtsim.SWING, 25.0)
    assert_admittance_close(steady, swing, 1e-2)
    assert_admittance_close(steady, expected, 2e-2)
    assert_admittance_close(swing, expected, 2e-2)


@pytest.mark.slow
def test_measured_generator_matches_its_models(sg_config):
    case = prepare_case(sg_config)
    machine = case.machine_at(2)
    s = 2j * math.pi * 25.0
    assert_admittance_close(measure_at(case, emtsim.STEADY, 25.0), lti.evaluate(machine.local_admittance(), s), 1e-2)
    assert_admittance_close(measure_at(case, emtsim.SWING, 25.0), lti.evaluate(machine.swing_admittance(), s), 2e-2)
