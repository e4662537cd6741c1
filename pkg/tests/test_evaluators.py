import numpy as np
import pytest

from chamberopt.errors import (BoundsViolationError, DataError, ProtocolError)
from chamberopt.evaluators import (Dataset, Observation, benchmark_quadratic,
                                   proposal_ids, proxy_prechamber,
                                   read_proposals, read_results,
                                   write_proposals)
from chamberopt.space import PRECHAMBER_SPACE

# frozen 201^3 grid scan of the proxy with v <= 25 (see grid scan in
# test_acceptance.py, which recomputes it)
PROXY_GRID_OPT_U = (0.995, 0.43, 1.0)
PROXY_GRID_OPT_K = 253.566870612905
PROXY_GRID_OPT_V = 24.985958101930


def _proxy_at_unit(u):
    return proxy_prechamber(PRECHAMBER_SPACE.from_unit(np.asarray(u)))


def test_proxy_closed_form_spot_values():
    k, _ = _proxy_at_unit([0.0, 0.33, 0.0])
    assert k == pytest.approx(148.0, abs=1e-12)
    k, _ = _proxy_at_unit([1.0, 0.33, 1.0])
    assert k == pytest.approx(280.0, abs=1e-12)


def test_proxy_frozen_grid_optimum():
    k, v = _proxy_at_unit(PROXY_GRID_OPT_U)
    assert k == pytest.approx(PROXY_GRID_OPT_K, abs=1e-9)
    assert v == pytest.approx(PROXY_GRID_OPT_V, abs=1e-9)
    assert 24.0 < v <= 25.0


def test_proxy_out_of_range():
    with pytest.raises(BoundsViolationError):
        proxy_prechamber([7.0, 0.9, 16.0])


def test_proxy_monotone_trends():
    g = np.linspace(0, 1, 21)
    h = 1e-6
    for u2 in g:
        for a in g:
            # k nondecreasing in bottle diameter and neck height
            k0, _ = _proxy_at_unit([a, u2, a])
            k1, _ = _proxy_at_unit([min(a + h, 1.0), u2, a])
            k2, _ = _proxy_at_unit([a, u2, min(a + h, 1.0)])
            assert k1 >= k0 - 1e-12
            assert k2 >= k0 - 1e-12
            # v nondecreasing in bottle diameter
            _, v0 = _proxy_at_unit([a, u2, 0.5])
            _, v1 = _proxy_at_unit([min(a + h, 1.0), u2, 0.5])
            assert v1 >= v0 - 1e-12


def test_proxy_interior_bore_maximum():
    u2 = np.linspace(0, 1, 201)
    ks = [_proxy_at_unit([1.0, t, 1.0])[0] for t in u2]
    arg = int(np.argmax(ks))
    assert 0 < arg < 200


def test_quadratic_benchmark_values():
    k, v = benchmark_quadratic([0.5, 0.5])
    assert k == pytest.approx(-0.08)
    assert v == pytest.approx(1.0)
    k, v = benchmark_quadratic([0.7, 0.7])
    assert k == pytest.approx(0.0)
    assert v == pytest.approx(1.4)
    with pytest.raises(BoundsViolationError):
        benchmark_quadratic([1.2, 0.5])


# ------------------------------------------------------------ file protocol


def test_write_proposals_format(tmp_path):
    batch = np.array([[9.0, 0.8, 16.0], [11.0, 1.0, 19.0]])
    path = tmp_path / "proposals_iter1.csv"
    ids = write_proposals(path, PRECHAMBER_SPACE, batch, 1)
    assert ids == ["iter1_0", "iter1_1"]
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "id,d_bottle,d_bore,h_neck"
    assert len(lines) == 3
    assert lines[1].startswith("iter1_0,")


def test_write_proposals_q5_ids(tmp_path):
    batch = np.tile(np.array([9.0, 0.8, 16.0]), (5, 1)) \
        + np.arange(5)[:, None] * 0.01
    ids = write_proposals(tmp_path / "p.csv", PRECHAMBER_SPACE, batch, 1)
    assert ids == proposal_ids(1, 5) == [f"iter1_{j}" for j in range(5)]


def test_proposals_round_trip_lossless(tmp_path):
    rng = np.random.default_rng(0)
    lo, hi = PRECHAMBER_SPACE.lowers, PRECHAMBER_SPACE.uppers
    batch = rng.uniform(lo, hi, size=(5, 3))
    path = tmp_path / "p.csv"
    ids = write_proposals(path, PRECHAMBER_SPACE, batch, 2)
    back = read_proposals(path, PRECHAMBER_SPACE)
    assert [pid for pid, _ in back] == ids
    np.testing.assert_allclose(np.array([x for _, x in back]), batch,
                               rtol=0, atol=1e-12)


def _write_results(path, rows):
    with open(path, "w") as f:
        f.write("id,k,v_mag\n")
        for r in rows:
            f.write(",".join(str(c) for c in r) + "\n")


def test_read_results_matches_ids(tmp_path):
    path = tmp_path / "r.csv"
    _write_results(path, [(f"iter1_{j}", 100.0 + j, 20.0) for j in range(5)])
    out = read_results(path, proposal_ids(1, 5))
    assert len(out) == 5
    assert out[0] == ("iter1_0", 100.0, 20.0)


def test_read_results_missing_id(tmp_path):
    path = tmp_path / "r.csv"
    _write_results(path, [("iter1_0", 1.0, 2.0)])
    with pytest.raises(ProtocolError, match="iter1_1"):
        read_results(path, ["iter1_0", "iter1_1"])


def test_read_results_extra_id(tmp_path):
    path = tmp_path / "r.csv"
    _write_results(path, [("iter1_0", 1.0, 2.0), ("stray", 1.0, 2.0)])
    with pytest.raises(ProtocolError, match="stray"):
        read_results(path, ["iter1_0"])


def test_read_results_duplicate_id(tmp_path):
    path = tmp_path / "r.csv"
    _write_results(path, [("a", 1.0, 2.0), ("a", 3.0, 4.0)])
    with pytest.raises(ProtocolError, match="duplicate"):
        read_results(path, ["a"])


def test_read_results_nan_reports_row(tmp_path):
    path = tmp_path / "r.csv"
    _write_results(path, [("a", 1.0, 2.0), ("b", "nan", 2.0)])
    with pytest.raises(DataError, match=":3"):
        read_results(path, ["a", "b"])


def test_read_results_bad_header(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("id,k,v\n")
    with pytest.raises(ProtocolError, match="header"):
        read_results(path, [])


def test_read_results_out_of_order_ok(tmp_path):
    path = tmp_path / "r.csv"
    _write_results(path, [("iter1_1", 2.0, 2.0), ("iter1_0", 1.0, 2.0)])
    out = read_results(path, ["iter1_0", "iter1_1"])
    assert {pid for pid, _, _ in out} == {"iter1_0", "iter1_1"}


# ------------------------------------------------------------ dataset


def test_dataset_rejects_duplicate_points():
    ds = Dataset(space=PRECHAMBER_SPACE)
    ds.append(Observation((9.0, 0.8, 16.0), 100.0, 20.0))
    with pytest.raises(DataError, match="duplicate"):
        ds.append(Observation((9.0, 0.8, 16.0), 101.0, 21.0))


def test_dataset_rejects_non_finite():
    ds = Dataset(space=PRECHAMBER_SPACE)
    with pytest.raises(DataError):
        ds.append(Observation((9.0, 0.8, 16.0), float("nan"), 20.0))
