"""Exercises the levitorque extension end to end.

Build and install first, e.g. ``maturin build --release -m crates/python/Cargo.toml``
followed by ``pip install`` of the wheel, then run ``python python/smoke_test.py``.
"""

import math

import levitorque as lt


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    solver = lt.CasimirSolver(plate="batio3")
    r = solver.evaluate(266e-9, math.pi / 4, 300.0)
    print(r)
    assert r.force < 0 and r.torque < 0
    assert 1e-25 < abs(r.torque) < 1e-24

    h = solver.harmonics(266e-9)
    for theta in (0.1, 0.7, 1.3):
        assert close(h.torque(theta), solver.torque(266e-9, theta), 1e-6)
    assert close(h.torque_amplitude(), r.torque, 1e-6)

    rows = solver.sweep([200e-9, 300e-9], [math.pi / 8, math.pi / 4])
    assert len(rows) == 4
    assert abs(rows[0].torque) > abs(rows[2].torque)

    calcite = lt.CasimirSolver(plate="calcite").torque(266e-9, math.pi / 4)
    assert abs(calcite) < abs(r.torque)

    try:
        lt.CasimirSolver(plate="unobtainium")
    except ValueError as e:
        assert "unobtainium" in str(e)
    else:
        raise AssertionError("unknown material accepted")
    try:
        solver.evaluate(-1e-9, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("negative separation accepted")

    trap = lt.Trap(power=0.1)
    d_eq = trap.equilibrium()
    assert abs(trap.force(d_eq)) < 1e-20
    freq = trap.frequencies()
    assert freq["omega_z"] > 0 and close(freq["d_eq"], d_eq, 1e-12)
    depth_k = trap.depth() / 1.380649e-23
    print(f"trap depth {depth_k:.3e} K at d_eq {d_eq * 1e9:.2f} nm")

    lo = lt.sensitivity(1e-9)
    hi = lt.sensitivity(1e-5)
    assert hi["m_th"] > lo["m_th"] and close(hi["m_rad"], lo["m_rad"], 1e-12)
    assert close(lo["m_min"], math.hypot(lo["m_th"], lo["m_rad"]), 1e-12)

    e = lt.patch_field(0.0, 0.0, 266e-9)
    assert abs(e[0]) < 1e-12 and abs(e[2]) > 0
    curve = lt.patch_suppression([1, 4, 9], "2d")
    assert [n for n, _ in curve] == [1, 4, 9]
    assert curve[1][1] < curve[0][1]

    cat = lt.materials()
    assert any("BaTiO" in p["name"] or "batio" in p["name"].lower() for p in cat["plates"])

    a = lt.simulate_pulse(seed=42, table_nodes=24)
    b = lt.simulate_pulse(seed=42, table_nodes=24)
    assert a["d"] == b["d"] and a["theta"] == b["theta"]
    assert a["capture"] is None
    assert set(a["phase"]) == {"on", "off", "on_feedback"}
    print(f"pulse: d_eq {a['d_eq'] * 1e9:.2f} nm, off fall {a['off_fall'] * 1e9:.2f} nm")

    print("smoke test passed, levitorque", lt.__version__)


if __name__ == "__main__":
    main()
