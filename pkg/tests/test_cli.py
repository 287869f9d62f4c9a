import csv
import io
from importlib import resources

import numpy as np
import pytest

from depthjel.cli import CI_COLUMNS, EXPERIMENT_COLUMNS, ingest_csv, main
from depthjel.errors import DataFileNotFound, MissingColumn, ParseError
from depthjel.estimating import gini_index_equation
from depthjel.inference import vj_interval

FIXTURE = str(resources.files("depthjel").joinpath("data/synthetic_soil.csv"))


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_ingest_three_rows(tmp_path):
    p = write(tmp_path / "a.csv", "e00,c00,pH\n1,2,7\n3,4,7\n5,6.5,8\n")
    np.testing.assert_array_equal(ingest_csv(p, ["e00", "c00"]), [[1, 2], [3, 4], [5, 6.5]])
    assert ingest_csv(p, ["c00"]).shape == (3, 1)


def test_ingest_errors(tmp_path):
    p = write(tmp_path / "a.csv", "e00,c00\n1,2\n3,NA\n")
    with pytest.raises(ParseError) as info:
        ingest_csv(p, ["e00", "c00"])
    assert info.value.row == 3 and "NA" in str(info.value)
    # the bad cell is outside the selection
    assert ingest_csv(p, ["e00"]).shape == (2, 1)
    with pytest.raises(MissingColumn):
        ingest_csv(p, ["e30"])
    with pytest.raises(DataFileNotFound):
        ingest_csv(str(tmp_path / "missing.csv"), ["e00"])


def test_ci_records_and_equal_point_estimates(tmp_path):
    out = str(tmp_path / "ci.csv")
    code, table, _ = run(["ci", "--input", FIXTURE, "--columns", "e00,c00", "--out", out])
    assert code == 0
    with open(out, encoding="utf-8") as fh:
        text = fh.read()
    assert "# columns = e00,c00" in text
    rows = records(text)
    assert [r["method"] for r in rows] == ["JEL", "WJEL", "VJ"]
    assert list(rows[0]) == list(CI_COLUMNS)
    assert len({r["point_estimate"] for r in rows}) == 1
    for r in rows:
        lo, hi = float(r["lower"]), float(r["upper"])
        assert lo < float(r["point_estimate"]) < hi or r["method"] == "WJEL"
        assert float(r["length"]) == pytest.approx(hi - lo)
    # human table: point estimate at seven significant digits
    est = float(rows[0]["point_estimate"])
    assert f"{est:.7g}" in table


def test_full_precision_round_trip(tmp_path):
    out = str(tmp_path / "ci.csv")
    run(["ci", "--input", FIXTURE, "--columns", "e00", "--equation", "gini-index", "--methods", "vj",
         "--out", out])
    x = ingest_csv(FIXTURE, ["e00"])
    ci = vj_interval(gini_index_equation(), x)
    with open(out, encoding="utf-8") as fh:
        row = records(fh.read())[0]
    assert (float(row["point_estimate"]), float(row["lower"]), float(row["upper"])) == \
        (ci.point_estimate, ci.lower, ci.upper)


def test_truncation_flag(tmp_path):
    # comonotone except for one swapped pair: gamma_1 near 1, curve stays below the cut-off at 1
    x = np.arange(15.0)
    y = x ** 1.5
    y[[6, 7]] = y[[7, 6]]
    p = write(tmp_path / "como.csv", "x,y\n" + "\n".join(f"{a!r},{b!r}" for a, b in zip(x.tolist(), y.tolist())) + "\n")
    code, out, _ = run(["ci", "--input", p, "--columns", "x,y", "--methods", "jel,wjel"])
    assert code == 0
    rows = records(out)
    assert all(r["upper_truncated"] == "true" and float(r["upper"]) == 1.0 for r in rows)
    assert all(r["lower_truncated"] == "false" for r in rows)


def test_rerun_byte_identical(tmp_path):
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    for path in (a, b):
        run(["ci", "--input", FIXTURE, "--columns", "e30,c30", "--seed", "3", "--out", path])
    assert open(a, "rb").read() == open(b, "rb").read()


def test_estimate_and_depth_weights():
    code, out, _ = run(["estimate", "--input", FIXTURE, "--columns", "e00,c00", "--equation", "gini-corr"])
    assert code == 0 and len(records(out)) == 2
    code, out, _ = run(["depth-weights", "--input", FIXTURE, "--columns", "e00,c00"])
    rows = records(out)
    assert code == 0 and len(rows) == 48
    assert sum(float(r["weight"]) for r in rows) == pytest.approx(1.0)


def test_experiment_output(tmp_path):
    cfg = write(tmp_path / "d.cfg", "family = kotz\nrho = 0.1\nn = 20\nreps = 4\nruns = 2\nseed = 5\n"
                                    "methods = jel,wjel\ntargets = gamma1\n")
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert run(["experiment", "--config", cfg, "--out", a])[0] == 0
    assert run(["experiment", "--config", cfg, "--out", b])[0] == 0
    text = open(a, encoding="utf-8").read()
    assert text == open(b, encoding="utf-8").read()
    assert "# rho = 0.1" in text
    rows = records(text)
    assert list(rows[0]) == list(EXPERIMENT_COLUMNS)
    assert [float(r["ref_coverage"]) for r in rows] == [0.910, 0.952]


@pytest.mark.parametrize("argv, code", [
    (["ci", "--input", "nowhere.csv", "--columns", "a,b"], 3),
    (["ci", "--input", FIXTURE, "--columns", "e00,zz"], 3),
    (["ci", "--input", FIXTURE, "--columns", "e00"], 2),
    (["ci", "--input", FIXTURE, "--columns", "e00,c00", "--level", "1.5"], 2),
    (["ci", "--input", FIXTURE, "--columns", "e00,c00", "--methods", "bootstrap"], 2),
    (["experiment", "--config", "nowhere.cfg"], 2),
])
def test_exit_codes(argv, code):
    got, _, err = run(argv)
    assert got == code and err.startswith("depthjel: error:")


def test_numerical_failure_exit_code(tmp_path):
    x = np.arange(10.0)
    p = write(tmp_path / "c.csv", "x,y\n" + "\n".join(f"{a},{a ** 3}" for a in x) + "\n")
    code, _, err = run(["ci", "--input", p, "--columns", "x,y", "--methods", "jel"])
    assert code == 4 and "degenerate" in err
