import cmath
import json
import math

import pytest

import bergkern as bk


def test_fock_closed_and_series():
    p = bk.CnParams(n=1, mu1=1.0, mu2=2.0)
    closed = bk.closed_kernel(p, [0.5], [0.5])
    series = bk.series_kernel(p, [0.5], [0.5])
    assert closed["value"] == pytest.approx(math.exp(0.25) / math.pi, rel=1e-14)
    assert series["converged"]
    assert abs(series["value"] - closed["value"]) < 1e-14


def test_disc_like_series_with_quadrature_moments():
    p = bk.DnmParams(n=1, m=1, mu1=1.0, mu2=2.0, eta=0.0)
    x = [0.1 + 0.05j, 0.2 - 0.1j]
    y = [-0.2 + 0.1j, 0.1 + 0.3j]
    closed = bk.closed_kernel(p, x, y)["value"]
    series = bk.series_kernel(p, x, y, quadrature_moments=True)["value"]
    assert abs(series - closed) <= 1e-7 * abs(closed)


def test_veta_origin():
    p = bk.VEtaParams(n=1, m=1, eta=[1.0], a=0.0)
    v = bk.closed_kernel(p, [0, 0, 0], [0, 0, 0])["value"]
    assert v.real == pytest.approx(2.0 / math.pi**3, rel=1e-14)
    assert bk.arity(p) == 3


def test_moments_agree():
    p = bk.DnmParams(n=1, m=1, mu1=0.7, mu2=1.5, eta=0.5)
    for alpha in ([0, 0], [1, 2], [3, 0]):
        value, err = bk.moment_quadrature(p, alpha)
        assert value == pytest.approx(bk.moment_closed(p, alpha), rel=1e-8)
        assert err >= 0.0


def test_cross_validate_reports():
    reports = bk.cross_validate(bk.CnParams(n=2, mu1=1.0, mu2=3.0), 4, 7, 1e-8)
    assert len(reports) == 4
    assert all(r["status"] == "pass" for r in reports)
    assert {"check_name", "measured", "tolerance", "tolerance_origin"} <= set(reports[0])


def test_sphere_integral_is_reproducible():
    a = bk.sphere_integral([1, 2], 20000, 3)
    b = bk.sphere_integral([1, 2], 20000, 3)
    assert a == b
    assert a["expected"] == pytest.approx(2.0 * 1 * 2 / math.gamma(5))


def test_interior_points_are_deterministic():
    p = bk.DnmParams(n=1, m=1)
    assert bk.interior_points(p, 5, 11) == bk.interior_points(p, 5, 11)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        bk.closed_kernel(bk.CnParams(n=2), [0.1], [0.1, 0.0])
    with pytest.raises(ValueError):
        bk.closed_kernel(bk.DnmParams(n=1, m=1), [0.0, 1.5], [0.0, 0.0])
    with pytest.raises(ValueError):
        bk.closed_kernel(bk.CnParams(n=1, mu1=-1.0), [0.1], [0.1])


def test_cli_in_process():
    code, out, err = bk.run_cli(["moments", "--family", "disc", "--degree", "2"])
    assert code == 0
    doc = json.loads(out)
    values = [e["quadrature"]["value"] for e in doc["entries"]]
    assert values == pytest.approx([math.pi, math.pi / 2, math.pi / 3], rel=1e-10)
    code, _, err = bk.run_cli(["verify", "--family", "nope"])
    assert code == 2
    assert err
