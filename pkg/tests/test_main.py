from main import build_config, create_parser, main
from models import Method
from tests.helpers import LAKE_4X4


def _config(*argv):
    return build_config(create_parser().parse_args(["run", *argv]))


def test_benchmark_defaults_fill_the_config() -> None:
    config = _config("--env", "frozenlake")
    assert config.theta == 0.2
    assert config.alpha == 5.0
    assert config.gamma == 0.95
    assert config.dataset_sizes == [10, 50, 200, 1000]
    assert config.output.endswith("frozenlake_results.csv")


def test_flags_override_the_defaults() -> None:
    config = _config(
        "--env", "random", "--sizes", "10, 20", "--runs", "2", "--nwedge", "4",
        "--methods", "spibb,duipi_shield", "--states", "12", "--duipi-rounds", "7",
    )
    assert config.dataset_sizes == [10, 20]
    assert config.runs == 2
    assert config.n_wedge == 4
    assert config.duipi_rounds == 7
    assert config.methods == [Method.SPIBB, Method.DUIPI_SHIELD]
    assert config.env_params["num_states"] == 12
    assert config.env_params["num_actions"] == 4


def test_map_file_goes_to_the_matching_parameter(tmp_path) -> None:
    path = tmp_path / "map.txt"
    path.write_text("\n".join(LAKE_4X4) + "\n")
    assert _config("--env", "frozenlake", "--map", str(path)).env_params["map_spec"] == list(LAKE_4X4)
    maze = _config("--env", "pacman", "--map", str(path)).env_params
    assert maze["maze_spec"] == list(LAKE_4X4)
    assert "map_spec" not in maze


def test_benchmarks_command(tmp_path, monkeypatch, capsys) -> None:
    monkeypatch.chdir(tmp_path)
    assert main(["benchmarks"]) == 0
    assert "BENCHMARK DEFAULTS" in capsys.readouterr().out


def test_small_sweep_writes_results(tmp_path, monkeypatch, capsys) -> None:
    monkeypatch.chdir(tmp_path)
    (tmp_path / "lake.txt").write_text("\n".join(LAKE_4X4) + "\n")
    code = main([
        "run", "--env", "frozenlake", "--map", "lake.txt", "--sizes", "10", "--runs", "1",
        "--methods", "baseline,spibb", "--horizon", "30", "--out", "out.csv", "--timings",
    ])
    assert code == 0
    header = (tmp_path / "out.csv").read_text().splitlines()[0]
    assert header.endswith(",seconds")
    assert "SWEEP SUMMARY" in capsys.readouterr().out


def test_invalid_configuration_exit_code(tmp_path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    assert main(["run", "--env", "frozenlake", "--runs", "0", "--out", "out.csv"]) == 2
