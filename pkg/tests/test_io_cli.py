import numpy as np
import pytest

from lcmcluster import io
from lcmcluster.cli import main
from lcmcluster.exceptions import FormatError, ParseError


def write(path, text):
    path.write_text(text)
    return path


def senate_like(tmp_path, seed=0):
    """94 x 486 two-bloc voting matrix, a few missing votes, one independent row."""
    rng = np.random.default_rng(seed)
    labels = np.repeat([0, 1], [47, 47])
    theta = rng.choice([0.1, 0.9], size=(486, 1))
    theta = np.hstack([theta, 1 - theta])
    R = (rng.random((94, 486)) < theta[:, labels].T).astype(int).astype(str)
    R[rng.random(R.shape) < 0.02] = "NA"
    path = tmp_path / "votes.csv"
    path.write_text("\n".join(",".join(row) for row in R) + "\n")
    return path, labels


class TestReading:
    def test_parses_missing_tokens(self, tmp_path):
        p = write(tmp_path / "r.csv", "1,0,NA\n0,NaN,1\n")
        R = io.read_response_csv(p)
        assert R.shape == (2, 3) and np.isnan(R[0, 2]) and np.isnan(R[1, 1])

    def test_header_skipped(self, tmp_path):
        p = write(tmp_path / "r.csv", "a,b\n1,0\n")
        assert io.read_response_csv(p, header=True).shape == (1, 2)

    def test_bad_cell_location(self, tmp_path):
        p = write(tmp_path / "r.csv", "1,0\n1,2\n")
        with pytest.raises(ParseError) as info:
            io.read_response_csv(p)
        assert (info.value.row, info.value.col) == (2, 2)

    def test_ragged_row(self, tmp_path):
        with pytest.raises(ParseError) as info:
            io.read_response_csv(write(tmp_path / "r.csv", "1,0\n1\n"))
        assert info.value.row == 2

    def test_empty_file(self, tmp_path):
        with pytest.raises(FormatError):
            io.read_response_csv(write(tmp_path / "r.csv", "\n"))


class TestImputation:
    def test_rate_and_determinism(self):
        R = np.full((2, 4000), np.nan)
        R[0, :1000] = 1.0
        R[1, :1000] = np.r_[np.ones(200), np.zeros(800)]
        a = io.impute_missing(R, seed=1)
        b = io.impute_missing(R, seed=1)
        np.testing.assert_array_equal(a, b)
        assert np.all(a[0] == 1.0)
        assert a[1, 1000:].mean() == pytest.approx(0.2, abs=0.03)
        np.testing.assert_array_equal(a[:, :1000], R[:, :1000])

    def test_fully_missing_row(self):
        with pytest.raises(FormatError):
            io.impute_missing(np.array([[np.nan, np.nan], [1.0, 0.0]]))

    def test_row_filter_and_max_missing(self, tmp_path):
        p = write(tmp_path / "r.csv", "1,0,1\n0,0,0\nNA,NA,1\n1,1,1\n")
        f = write(tmp_path / "drop.txt", "# independents\n2\n")
        R = io.ingest_csv(p, impute_seed=0, exclude_rows=f, max_missing=0.5)
        np.testing.assert_array_equal(R, [[1, 0, 1], [1, 1, 1]])

    def test_row_filter_out_of_range(self, tmp_path):
        p = write(tmp_path / "r.csv", "1,0\n")
        with pytest.raises(FormatError):
            io.ingest_csv(p, exclude_rows=[3])


def test_labels_round_trip_is_one_based(tmp_path):
    io.write_labels(tmp_path / "l.txt", np.array([0, 2, 1]))
    assert (tmp_path / "l.txt").read_text() == "1\n3\n2\n"
    np.testing.assert_array_equal(io.read_labels(tmp_path / "l.txt"), [0, 2, 1])


class TestCLI:
    def test_fit_auto_k_on_senate_like_data(self, tmp_path, capsys):
        path, labels = senate_like(tmp_path)
        out = tmp_path / "fit"
        code = main(["fit", "--input", str(path), "--auto-k", "--method", "sola", "--out", str(out)])
        assert code == 0
        summary = io.read_key_values(out / "summary.txt")
        assert summary["k_hat"] == "2" and summary["failure"] == "none"
        assert float(summary["threshold"]) == pytest.approx(63.79894, abs=1e-4)
        fitted = io.read_labels(out / "labels.txt")
        assert min(np.mean(fitted == labels), np.mean(fitted != labels)) == 0.0
        assert io.read_matrix_csv(out / "theta_hat.csv").shape == (486, 2)

    @pytest.mark.parametrize("method", ["spec", "sola_plus", "cem", "sola_split", "em"])
    def test_fit_methods(self, tmp_path, method):
        path, _ = senate_like(tmp_path, seed=1)
        out = tmp_path / method
        assert main(["fit", "--input", str(path), "--k", "2", "--method", method, "--out", str(out)]) == 0
        assert (out / "labels.txt").exists()

    def test_fit_failure_exit_code(self, tmp_path):
        p = write(tmp_path / "r.csv", "1,1\n1,1\n1,1\n1,1\n")
        assert main(["fit", "--input", str(p), "--k", "2", "--method", "sola", "--out", str(tmp_path / "o")]) == 2

    def test_usage_errors(self, tmp_path, capsys):
        assert main(["fit", "--input", str(tmp_path / "missing.csv"), "--k", "2", "--out", str(tmp_path)]) == 1
        p = write(tmp_path / "r.csv", "1,x\n")
        assert main(["fit", "--input", str(p), "--k", "2", "--out", str(tmp_path)]) == 1
        assert "row 1, column 2" in capsys.readouterr().err
        assert main(["fit", "--input", str(p), "--out", str(tmp_path)]) == 1
        assert main(["nonsense"]) == 1

    def test_select_k_from_values(self, capsys):
        assert main(["select-k", "--values", "148.1,64.4,16.6", "--n", "94", "--j", "486"]) == 0
        out = capsys.readouterr().out
        assert "k_hat=2" in out

    def test_diagnose_beta(self, tmp_path):
        out = tmp_path / "d.txt"
        assert main(["diagnose", "--beta", "5,5", "--j", "50", "--k", "3", "--out", str(out)]) == 0
        d = io.read_key_values(out)
        assert float(d["beta_B"]) == pytest.approx(21 / 44)

    def test_simulate_then_fit(self, tmp_path):
        sim = tmp_path / "sim"
        assert main(["simulate", "--n", "60", "--j", "30", "--k", "2", "--beta", "0.5,0.5",
                     "--seed", "3", "--out", str(sim)]) == 0
        assert io.read_response_csv(sim / "responses.csv").shape == (60, 30)
        assert main(["diagnose", "--theta", str(sim / "theta.csv")]) == 0
