import math

import numpy as np
import pytest

from lcmcluster import bench
from lcmcluster.cli import main
from lcmcluster.exceptions import BenchConfigError

SMALL = bench.BenchConfig(
    methods=("spec", "sola", "oracle"), grid=((40, 20, 2), (60, 30, 3)), beta=(1.0, 4.0),
    replicates=3, base_seed=5,
)


class TestConfig:
    def test_parse(self):
        cfg = bench.parse_bench_config(
            "# demo\nmethods=spec,sola\ngrid=50,25,3\ngrid=110,55,3\nbeta=1,8\nreplicates=4\n"
        )
        assert cfg.grid == ((50, 25, 3), (110, 55, 3))
        assert cfg.beta == (1.0, 8.0) and cfg.replicates == 4

    def test_preset_override(self):
        cfg = bench.parse_bench_config("preset=sim2-small\nreplicates=2\n")
        assert cfg.beta == (1.0, 8.0) and cfg.replicates == 2

    @pytest.mark.parametrize(
        "text,line",
        [("replicates=2\nbogus=1\n", 2), ("grid=1,2\n", 1), ("\n\nbeta=1\n", 3), ("nokey\n", 1)],
    )
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(BenchConfigError) as info:
            bench.parse_bench_config(text)
        assert info.value.line == line

    def test_semantic_errors(self):
        with pytest.raises(BenchConfigError):
            bench.parse_bench_config("methods=nope\n")
        with pytest.raises(BenchConfigError):
            bench.BenchConfig(grid=((2, 5, 3),))


class TestRunning:
    def test_paired_instances_shared_across_methods(self):
        rows = bench.run_bench(SMALL)
        hashes = {}
        for r in rows:
            hashes.setdefault((r.N, r.replicate), set()).add(r.instance_hash)
        assert all(len(h) == 1 for h in hashes.values())

    def test_seeds_independent_of_method_set(self):
        a = bench.run_bench(SMALL)
        from dataclasses import replace
        b = bench.run_bench(replace(SMALL, methods=("sola",)))
        losses_a = [r.loss for r in a if r.method == "sola"]
        assert losses_a == [r.loss for r in b]

    def test_rows_csv_byte_identical_and_parallel_safe(self, tmp_path):
        bench.write_rows_csv(tmp_path / "a.csv", bench.run_bench(SMALL))
        bench.write_rows_csv(tmp_path / "b.csv", bench.run_bench(SMALL, jobs=2))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_failures_excluded_from_mean(self):
        rows = [
            bench.BenchRow("sola", 10, 5, 2, 0, 0.2, False, 1.0),
            bench.BenchRow("sola", 10, 5, 2, 1, math.nan, True, 9.0),
        ]
        (agg,) = bench.aggregate(rows)
        assert agg.mean_loss == 0.2 and agg.failure_rate == 0.5 and agg.mean_seconds == 1.0

    def test_paired_difference(self):
        rows = [bench.BenchRow(m, 10, 5, 2, r, loss, False, 0.0)
                for m, r, loss in [("a", 0, 0.1), ("b", 0, 0.3), ("a", 1, 0.2), ("b", 1, 0.2)]]
        mean, se, count = bench.paired_difference(rows, "a", "b")[(10, 5, 2)]
        assert mean == pytest.approx(-0.1) and count == 2
        assert se == pytest.approx(np.std([-0.2, 0.0], ddof=1) / np.sqrt(2))

    def test_exception_policy(self, monkeypatch):
        def boom(*args, **kwargs):
            raise RuntimeError("boom")

        monkeypatch.setattr(bench, "sola", boom)
        rows = bench.run_bench(SMALL)
        assert all(r.failed and math.isnan(r.loss) for r in rows if r.method == "sola")
        from dataclasses import replace
        with pytest.raises(RuntimeError):
            bench.run_bench(replace(SMALL, failure_policy="raise"))


def test_cli_bench(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("methods=spec,sola\ngrid=40,20,2\nreplicates=2\n")
    assert main(["bench", str(cfg), "--out", str(tmp_path / "o")]) == 0
    for name in ("rows.csv", "timings.csv", "aggregate.csv"):
        assert (tmp_path / "o" / name).exists()
    assert "mean_loss" in capsys.readouterr().out
    bad = tmp_path / "bad.txt"
    bad.write_text("grid=x\n")
    assert main(["bench", str(bad), "--out", str(tmp_path / "o")]) == 1
