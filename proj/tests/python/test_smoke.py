import math

import pytest

import snrlab


def fig3():
    return snrlab.preset("fig3_dbatt")


def test_presets():
    assert set(snrlab.preset_names()) == {"fig3_dbatt", "fig5_ideal", "fig5_realistic"}
    with pytest.raises(snrlab.ValidationError):
        snrlab.preset("nope")


def test_calibrated_operating_point():
    setup = fig3()
    p_las = snrlab.incident_from_detected(1e6, setup.optics)
    s = snrlab.saturation_from_power(p_las, setup.emitter, setup.optics)
    point = snrlab.evaluate(s, setup.emitter, setup.optics, setup.detector)
    assert point.snr_res == pytest.approx(100, rel=0.15)
    assert point.snr_red == pytest.approx(100, rel=0.25)


def test_extinction_optimum_at_unit_saturation():
    emitter = snrlab.EmitterParams.lifetime_limited(1e3, 1.0)
    setup = snrlab.Setup(emitter, snrlab.OpticsParams(0.5, 0.0, 1.0), snrlab.DetectorParams())
    best = snrlab.snr_res_argmax(setup.emitter, setup.optics, setup.detector)
    assert best.s == pytest.approx(1.0, abs=1e-9)
    assert best.snr == pytest.approx(math.sqrt(1e3 * 0.5 / 8))
    assert emitter.gamma2 == 500.0


def test_invalid_parameters_raise():
    em = snrlab.EmitterParams(1e3, 100.0, 0.5)
    with pytest.raises(snrlab.ValidationError, match="gamma2"):
        em.validate()
    with pytest.raises(snrlab.Error):
        snrlab.snr_red(1.0, fig3().emitter, fig3().optics, snrlab.DetectorParams(0.0))


def test_simulate_fit_roundtrip():
    setup = fig3()
    scan = snrlab.ScanConfig()
    scan.n_scans = 20
    spectrum, fit, snr = snrlab.measure_point(setup, 1e5, snrlab.Channel.extinction, scan, seed=4)
    assert len(spectrum) == 200
    assert fit.converged and fit.amplitude < 0
    assert snr.value > 10

    again = snrlab.Spectrum.from_csv(spectrum.to_csv())
    assert list(again.counts) == list(spectrum.counts)
    refit = snrlab.fit_lorentzian(again)
    assert refit.amplitude == fit.amplitude
    assert snrlab.Spectrum.from_json(spectrum.to_json()).to_csv() == spectrum.to_csv()


def test_simulation_is_deterministic():
    setup = fig3()
    s = 0.1
    cfg = snrlab.ScanConfig.centered(s, setup.emitter, snrlab.Channel.fluorescence)
    cfg.seed = 9
    cfg.n_scans = 5
    drive = snrlab.DriveParams(snrlab.power_from_saturation(s, setup.emitter, setup.optics))
    a = snrlab.simulate_scan(cfg, drive, setup, threads=1)
    b = snrlab.simulate_scan(cfg, drive, setup, threads=3)
    assert a.counts == b.counts


def test_reproduce_fig5_peaks():
    out = snrlab.reproduce("fig5")
    peaks = out["tables"]["fig5_peaks"]
    assert len(peaks) == 6
    assert peaks[0]["best_snr_res"] == pytest.approx(7.9, abs=0.1)
    assert not out["failures"]


def test_detectability():
    real = snrlab.preset("fig5_realistic")
    em = snrlab.EmitterParams.lifetime_limited(1e3, real.emitter.alpha)
    d = snrlab.detectability(em, real.optics, real.detector, 5.0, t_int=5.0)
    assert d.detectable
    assert d.best_snr == pytest.approx(2.5, abs=0.1)


def test_config_rejects_unknown_key():
    with pytest.raises(snrlab.ValidationError, match="optics.eta"):
        snrlab.load_config('{"optics": {"eta": 1}}')
    cfg = snrlab.load_config('{"preset": "fig5_ideal"}')
    assert cfg["preset"] == "fig5_ideal"
