import json

import pytest
from click.testing import CliRunner

from rigalign.cli import main
from rigalign.lib.storage import write_metrics
from rigalign.models.evaluation import MetricsRow, MetricsTable

from testing_utils import FIXTURES_DIR


@pytest.fixture
def metrics_path(tmp_path):
    table = MetricsTable(
        [
            MetricsRow("stamp", 0.3736, {0.3: 0.6206, 0.5: 0.3906, 0.7: 0.1172}, 61.54),
            MetricsRow("frame", 0.4493, {0.3: 0.6795, 0.5: 0.5766, 0.7: 0.2494}, 50.26),
            MetricsRow("target", 0.4623, {0.3: 0.6932, 0.5: 0.5947, 0.7: 0.2768}, 49.76),
        ]
    )
    path = tmp_path / "metrics.json"
    write_metrics(table, path)
    return path


def test_report(metrics_path):
    result = CliRunner().invoke(main, ["report", str(metrics_path)])

    assert result.exit_code == 0, result.output
    assert result.output == (FIXTURES_DIR / "metrics_table.txt").read_text()


def test_report_markdown_to_file(tmp_path, metrics_path):
    out_path = tmp_path / "report.md"

    result = CliRunner().invoke(
        main, ["report", str(metrics_path), "--format", "markdown", "--out", str(out_path)]
    )

    assert result.exit_code == 0, result.output
    assert out_path.read_text().startswith("| Method | average IoU |")
    assert [p.name for p in tmp_path.iterdir() if p.name.startswith(".")] == []


def test_report_format_from_config(tmp_path, metrics_path):
    config_path = tmp_path / "rigalign.yml"
    config_path.write_text("report:\n  format: json\n")

    result = CliRunner().invoke(
        main, ["report", str(metrics_path), "--config", str(config_path)]
    )

    assert result.exit_code == 0, result.output
    assert [row["strategy"] for row in json.loads(result.output)["rows"]] == [
        "stamp",
        "frame",
        "target",
    ]


@pytest.mark.parametrize(
    "args, exit_code",
    [
        (["--format", "html"], 1),
        (["--config", "missing.yml"], 1),
    ],
)
def test_report_usage_errors(metrics_path, args, exit_code):
    result = CliRunner().invoke(main, ["report", str(metrics_path), *args])

    assert result.exit_code == exit_code


def test_report_raises_on_malformed_metrics(tmp_path):
    path = tmp_path / "metrics.json"
    path.write_text('{"rows": [{"strategy": "stamp"}]}')

    result = CliRunner().invoke(main, ["report", str(path)])

    assert result.exit_code == 2
