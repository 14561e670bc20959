import json
import math
import os
from pathlib import Path

import pytest

import cyclebench as cb

FIXTURES = Path(os.environ.get("CYCLEBENCH_FIXTURES_DIR", Path(__file__).parents[1] / "fixtures"))
EXPECTED = json.loads((FIXTURES / "expected.json").read_text())


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_convert_fixture(name):
    fmt, datasets = cb.convert_file(FIXTURES / name)
    want = EXPECTED[name]
    assert fmt == want["format_id"]
    got = {str(d.channel): d for d in datasets}
    assert set(got) == set(want["channels"])
    for ch, exp in want["channels"].items():
        d = got[ch]
        assert len(d) == exp["rows"]
        stats = cb.cycle_stats(d)
        assert len(stats["cycles"]) == exp["cycles"]


def test_cycle_rows_use_column_names():
    _, (d,) = cb.convert_file(FIXTURES / "cellA.017")
    stats = cb.cycle_stats(d)
    for row in stats["cycles"]:
        assert set(cb.CYCLE_COLUMNS) <= set(row)
    assert set(stats["rollup"]) == set(cb.ROLLUP_COLUMNS)
    assert len(cb.CYCLE_COLUMNS) == 32
    assert len(cb.ROLLUP_COLUMNS) == 51


def test_columns_and_save(tmp_path):
    _, (d,) = cb.convert_file(FIXTURES / "novonix_uhpc.csv")
    cols = d.columns()
    assert len(cols["voltage"]) == len(d)
    d.save(tmp_path / "ds")
    back = cb.load_dataset(tmp_path / "ds")
    assert back.canonical_bytes() == d.canonical_bytes()


def test_dqdv_conserves_capacity():
    _, (d,) = cb.convert_file(FIXTURES / "cellA.017")
    r = cb.dqdv(d, 1, "discharge", 0.005)
    total = sum(r["dqdv"]) * r["dv"]
    assert total == pytest.approx(r["total_capacity"], rel=0.01)
    assert len(r["voltage"]) == len(r["dqdv"])


def test_gitt():
    assert cb.gitt_diffusivity(16 / math.pi, 1.0, 1.0) == pytest.approx(0.25, rel=1e-12)
    _, (d,) = cb.convert_file(FIXTURES / "gitt_pulses.mpt")
    rows = cb.gitt(d)
    assert rows and all(r["diffusivity"] > 0 for r in rows)


def test_selectors():
    assert cb.resolve_cycles("every:6:52", 320)[:3] == [6, 58, 110]
    assert cb.resolve_cycles("1-3", 10) == [1, 2, 3]


def test_errors_carry_code():
    with pytest.raises(cb.Error) as e:
        cb.convert(b"nothing useful here\n", "x.bin")
    assert e.value.code == "UnknownFormat"
    with pytest.raises(cb.Error):
        cb.cycle_stats(cb.convert_file(FIXTURES / "cellA.017")[1][0], reference="median")
