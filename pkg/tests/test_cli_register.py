import json

import pytest
from click.testing import CliRunner

from rigalign.cli import main

from testing_utils import write_small_recording


@pytest.fixture(scope="module")
def recording_dir(tmp_path_factory):
    return write_small_recording(tmp_path_factory.mktemp("cli_register") / "rec")


def test_register(tmp_path, recording_dir):
    out_path = tmp_path / "registration.json"

    result = CliRunner().invoke(
        main, ["register", str(recording_dir), "--out", str(out_path)]
    )

    assert result.exit_code == 0, result.output
    assert "cav → ego: residual" in result.output
    data = json.loads(out_path.read_text())
    assert (data["source"], data["target"], data["scan_index"]) == ("cav", "ego", 0)
    assert data["result"]["transform"]["source_frame"] == "cav/lidar"
    assert data["initial_error"]["translation"] == pytest.approx(0.0, abs=1e-9)


def test_register_options(tmp_path, recording_dir):
    config_path = tmp_path / "rigalign.yml"
    config_path.write_text("register:\n  max_iterations: 5\n  seed: 1\n")
    out_path = tmp_path / "registration.json"

    result = CliRunner().invoke(
        main,
        [
            "register",
            str(recording_dir),
            "--config",
            str(config_path),
            "--scan-index",
            "1",
            "--source",
            "ego",
            "--target",
            "cav",
            "--voxel-size",
            "0.5",
            "--translation-noise",
            "0.2",
            "--rotation-noise",
            "1",
            "--out",
            str(out_path),
        ],
    )

    assert result.exit_code == 0, result.output
    data = json.loads(out_path.read_text())
    assert (data["source"], data["target"], data["scan_index"]) == ("ego", "cav", 1)
    assert data["result"]["iterations"] <= 5
    assert data["initial_error"]["translation"] > 0.01


@pytest.mark.parametrize(
    "args, exit_code",
    [
        (["--voxel-size", "0"], 1),
        (["--max-iterations", "0"], 1),
        (["--scan-index", "7"], 2),
        (["--source", "truck"], 2),
        (["--source", "ego", "--target", "ego"], 2),
    ],
)
def test_register_errors(tmp_path, recording_dir, args, exit_code):
    out_path = tmp_path / "registration.json"

    result = CliRunner().invoke(
        main, ["register", str(recording_dir), *args, "--out", str(out_path)]
    )

    assert result.exit_code == exit_code
    assert not out_path.exists()
