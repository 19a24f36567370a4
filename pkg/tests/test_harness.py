import math
from dataclasses import replace

import numpy as np
import pytest

from fastibl.core import base_level
from fastibl.harness import (ComparisonReport, ExperimentConfig, ResultTable, compare_engines,
                             equivalence_suite_configs, oracle_check, run_experiment,
                             summarize_comparison, verify_equivalence, welch_t_test, write_csv)
from fastibl.speedy import DecayTable, SpeedyMemory, speedy_base_level


def csv_body(path, drop_seconds=True):
    lines = path.read_text().splitlines()
    return [ln.rsplit(",", 1)[0] for ln in lines] if drop_seconds else lines


def test_single_row(tmp_path):
    table = run_experiment(ExperimentConfig(task="binary"))
    assert len(table.rows) == 1
    path = write_csv(table, tmp_path / "one.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "run,episode,metric,seconds" and len(lines) == 2


def test_seed_determinism(tmp_path):
    config = ExperimentConfig(task="binary", runs=3, episodes=30, seed=5)
    a = write_csv(run_experiment(config), tmp_path / "a.csv")
    b = write_csv(run_experiment(config), tmp_path / "b.csv")
    assert csv_body(a) == csv_body(b)
    c = write_csv(run_experiment(replace(config, seed=6)), tmp_path / "c.csv")
    assert csv_body(a) != csv_body(c)


def test_hundred_by_hundred_csv(tmp_path):
    table = run_experiment(ExperimentConfig(task="binary", runs=100, episodes=100))
    path = write_csv(table, tmp_path / "big.csv")
    assert len(path.read_text().splitlines()) == 10001


def test_worker_count_does_not_change_metrics():
    config = ExperimentConfig(task="coopnav", runs=4, episodes=2, steps=50)
    serial = run_experiment(config)
    threaded = run_experiment(replace(config, workers=3))
    np.testing.assert_array_equal(serial.metric_matrix(), threaded.metric_matrix())


def test_config_errors(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(task="binary", engine="loop")
    with pytest.raises(ValueError):
        ExperimentConfig(task="tetris")
    with pytest.raises(ValueError):
        ExperimentConfig(task="binary", runs=0)
    with pytest.raises(FileNotFoundError):
        ExperimentConfig(task="minimap", map_path=str(tmp_path / "missing.txt"))


def test_run_experiment_rejects_both():
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(task="binary", engine="both"))


# -- statistics ----------------------------------------------------------------

def test_welch_identical():
    t, p = welch_t_test([1, 2, 3], [1, 2, 3])
    assert t == 0.0 and p == 1.0


def test_welch_reference_values():
    # scipy.stats.ttest_ind(..., equal_var=False), evaluated once and frozen
    t, p = welch_t_test([1, 2, 3, 4], [1, 2, 3, 4, 100])
    assert t == pytest.approx(-0.9991245347413492, abs=1e-6)
    assert p == pytest.approx(0.37416209362993585, abs=1e-6)
    t, p = welch_t_test([0.8, 0.9, 0.85, 0.7], [0.75, 0.8, 0.95])
    assert t == pytest.approx(-0.28261670947211126, abs=1e-6)
    assert p == pytest.approx(0.7919346006448864, abs=1e-6)


def test_welch_antisymmetric():
    a, b = [0.3, 0.5, 0.9, 0.2], [0.7, 0.8, 0.75]
    t1, p1 = welch_t_test(a, b)
    t2, p2 = welch_t_test(b, a)
    assert t1 == -t2 and p1 == pytest.approx(p2, abs=1e-15)


@pytest.mark.parametrize("a,b", [([1.0], [1.0, 2.0]), ([2.0, 2.0], [3.0, 3.0])])
def test_welch_degenerate(a, b):
    with pytest.raises(ValueError):
        welch_t_test(a, b)


def test_identical_tables_compare_evenly():
    table = run_experiment(ExperimentConfig(task="binary", runs=4, episodes=25))
    twin = ResultTable(table.task, "speedy", table.runs, table.episodes, list(table.rows))
    report = summarize_comparison(table, twin)
    assert report.ratio == 1.0
    assert report.t == pytest.approx(0.0, abs=1e-12)


def test_report_format():
    report = ComparisonReport("binary", 10, 100, {"baseline": 1.0, "speedy": 0.5},
                              {"baseline": 0.83, "speedy": 0.82}, {"baseline": 0.1, "speedy": 0.1},
                              2.0, 1.2345, 0.2167)
    assert "t = 1.23, p = 0.22" in report.format()
    assert "0.8300 ± 0.1000" in report.format()


def test_compare_engines_same_metrics():
    report, tables = compare_engines(ExperimentConfig(task="binary", runs=3, episodes=40))
    np.testing.assert_array_equal(tables["baseline"].metric_matrix(),
                                  tables["speedy"].metric_matrix())
    assert report.ratio > 0


# -- cross-engine checks -------------------------------------------------------

def test_verify_binary_hundred_trials():
    assert verify_equivalence(ExperimentConfig(task="binary", episodes=100)).passed


def test_verify_mini_minimap():
    config = next(c for c in equivalence_suite_configs() if c.task == "minimap")
    assert (config.episodes, config.steps) == (5, 200)
    report = verify_equivalence(config)
    assert report.passed and report.decisions > 0


class _OffByOneTable(DecayTable):
    def covering(self, t):
        return super().covering(t + 1)[1:]  # (age + 1) ** -d


class OffByOneSpeedy(SpeedyMemory):
    name = "speedy-off-by-one"

    def __init__(self, params, backend=None):
        super().__init__(params, backend)
        self.decay_table = _OffByOneTable(params.decay, self.kernels)


def test_injected_decay_bug_is_located():
    config = ExperimentConfig(task="binary", episodes=200)
    report = verify_equivalence(config, engines=("baseline", OffByOneSpeedy))
    assert not report.passed
    assert "run 0, episode" in report.divergence and "t=" in report.divergence


def test_oracle_check_small():
    report = oracle_check(cases=60, seed=3)
    assert report.max_deviation < 1e-12
    assert report.max_base_level_deviation < 1e-12
    assert report.max_probability_deviation < 1e-12


def test_oracle_fixed_case(backend):
    hand = math.log(2 ** -0.5 + 1.0)
    assert base_level([1, 2], 3, 0.5) == pytest.approx(hand, abs=1e-15)
    assert speedy_base_level([1, 2], 3, 0.5, backend) == pytest.approx(hand, abs=1e-15)
