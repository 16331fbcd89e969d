"""Smoke test for the toroidsim_py extension.

Build and install with `maturin build --release -m crates/py/Cargo.toml`
followed by `pip install` of the wheel, then run `python python/smoke.py`.
"""

import toroidsim_py as ts


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    assert close(ts.airy_zero(1), 2.338107410459767, 1e-12)

    cav = ts.Cavity(55.0)
    assert 2.7 <= cav.fsr_nm <= 3.7, cav.fsr_nm
    modes = cav.modes(880.0, 920.0)
    assert len(modes) > 10 and all(a > b for a, b in zip(modes, modes[1:]))
    _, complement = ts.Cavity(50.0).polish_angle_deg()
    assert 16.0 <= complement <= 20.0, complement
    assert close(ts.diameter_from_spacing(cav.comb_spacing_nm), 55.0, 1e-3)

    implant = ts.Implant()
    assert close(implant.dose_cm2(), 2.5e14, 0.10)
    assert 0.0 < implant.overlap() <= 1.0

    assert close(ts.diffusion_time(50.0), 25e-6, 1.0)

    spectrum = ts.synthesize(seed=4)
    assert len(spectrum) == len(spectrum.wavelengths_nm) == len(spectrum.intensities)
    report = ts.analyze(spectrum)
    assert close(report.inferred_diameter_um, 55.0, 0.05), report.inferred_diameter_um
    assert close(report.splitting_nm, 1.2, 0.10)
    assert all(report.resolution_limited)
    again = ts.analyze(ts.synthesize(seed=4))
    assert again.peaks_nm == report.peaks_nm

    hot = ts.solve_thermal(power_mw=60.0, nr=60)
    assert hot.melt_front_um is not None and hot.max_temperature_k > 1986.0
    assert abs(hot.energy_balance) < 0.01
    cold = ts.solve_thermal(config={"laser.power_mw": 0, "thermal.nr": 40})
    assert cold.melt_front_um is None and abs(cold.max_temperature_k - 300.0) < 1e-9

    for bad in (lambda: ts.Cavity(-5.0), lambda: ts.solve_thermal(config={"no.key": 1})):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"toroidsim_py {ts.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
