import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from depthjel.errors import ConfigError
from depthjel.inference import gini_index
from depthjel.simlab import (ContaminatedNormal, Kotz, Pareto, SimDesign, design_config_text,
                             reference_values, parse_design_config, replication_rng, run_coverage_experiment,
                             sample)


def test_normal_covariance():
    x = sample(ContaminatedNormal(0.5, 0.0), 200_000, replication_rng(1, 0, 0))
    np.testing.assert_allclose(np.cov(x, rowvar=False), [[1, 0.5], [0.5, 1]], atol=0.015)


def test_contaminated_covariance():
    # 5% of points scaled by 2: covariance (0.95 + 0.05 * 4) * Sigma
    x = sample(ContaminatedNormal(0.9, 0.05), 200_000, replication_rng(1, 0, 0))
    np.testing.assert_allclose(np.cov(x, rowvar=False), 1.15 * np.array([[1, 0.9], [0.9, 1]]), atol=0.02)


def test_kotz_covariance():
    # radius ~ Gamma(2, 1): E R^2 = 6, spread evenly over two coordinates
    x = sample(Kotz(0.5), 200_000, replication_rng(2, 0, 0))
    np.testing.assert_allclose(np.cov(x, rowvar=False), 3 * np.array([[1, 0.5], [0.5, 1]]), atol=0.05)


def test_pareto_support_mean_and_gini():
    fam = Pareto(2.0, 5.0)
    x = sample(fam, 400_000, replication_rng(3, 0, 0))
    assert x.min() >= 2.0
    assert x.mean() == pytest.approx(5 * 2.0 / 4, rel=0.01)
    assert gini_index(x) == pytest.approx(fam.true_value(), abs=0.005)


def test_rng_streams_independent_and_reproducible():
    a = replication_rng(7, 1, 2).standard_normal(5)
    np.testing.assert_array_equal(a, replication_rng(7, 1, 2).standard_normal(5))
    assert not np.allclose(a, replication_rng(7, 2, 1).standard_normal(5))


def test_design_validation():
    with pytest.raises(ConfigError):
        SimDesign(Kotz(0.1), n=3)
    with pytest.raises(ConfigError):
        SimDesign(Kotz(0.1), n=20, level=1.5)
    with pytest.raises(ConfigError):
        SimDesign(Pareto(1, 2), n=20, targets=("gamma1",))
    with pytest.raises(ConfigError):
        SimDesign(Kotz(0.1), n=20, methods=("bootstrap",))
    with pytest.raises(ConfigError):
        Pareto(1.0, 0.5)


def test_config_errors():
    with pytest.raises(ConfigError):
        parse_design_config("family = kotz\nrho = 0.1\n")
    with pytest.raises(ConfigError):
        parse_design_config("family = kotz\nrho = 0.1\nn = 20\ncolour = red\n")
    with pytest.raises(ConfigError):
        parse_design_config("family = cauchy\nn = 20\n")
    with pytest.raises(ConfigError):
        parse_design_config("family = kotz\nrho = high\nn = 20\n")


def test_contamination_percent():
    d = parse_design_config("family = contaminated-normal\nrho = 0.9\ncontamination = 5%\nn = 100\n")
    assert d.family == ContaminatedNormal(0.9, 0.05)


families = st.one_of(
    st.builds(ContaminatedNormal, st.floats(-0.95, 0.95), st.floats(0, 0.5)),
    st.builds(Kotz, st.floats(-0.95, 0.95)),
    st.builds(Pareto, st.floats(0.1, 100), st.floats(1.01, 30)),
)


@given(families, st.integers(4, 500), st.integers(1, 5000), st.integers(1, 20),
       st.floats(0.5, 0.999), st.integers(0, 2**63), st.sampled_from([("JEL",), ("JEL", "WJEL", "VJ")]))
def test_config_round_trip(family, n, reps, runs, level, seed, methods):
    d = SimDesign(family, n, reps=reps, runs=runs, level=level, seed=seed, methods=methods)
    assert parse_design_config(design_config_text(d)) == d


def test_experiment_deterministic_and_worker_independent():
    d = SimDesign(ContaminatedNormal(0.5, 0.0), n=12, reps=6, runs=2, seed=11, methods=("JEL", "WJEL", "VJ"))
    a = run_coverage_experiment(d)
    b = run_coverage_experiment(d)
    c = run_coverage_experiment(d, workers=2)
    assert a == b
    assert [s.run_coverages for s in a.summaries] == [s.run_coverages for s in c.summaries]
    assert [s.run_lengths for s in a.summaries] == [s.run_lengths for s in c.summaries]
    s = a.get("gamma1", "wjel")
    assert 0 <= s.coverage <= 1 and s.mean_length > 0 and len(s.run_coverages) == 2


def test_reference_values_table():
    ref = reference_values()
    assert len(ref) == 100
    assert ref[("normal(rho=0.9;cont=0)", 100, "gamma1", "JEL")]["length"] == 0.099
    assert ref[("kotz(rho=0.1)", 20, "gamma1", "JEL")]["coverage"] == 0.910
    assert ref[("kotz(rho=0.1)", 20, "gamma1", "WJEL")]["coverage"] == 0.952
    assert ref[("pareto(4;5)", 100, "gini-index", "JEL")]["coverage"] == 0.907
