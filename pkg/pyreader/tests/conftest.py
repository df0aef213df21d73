"""Golden fixtures: a dataset written by the pipeline CLI.

The pipeline package is driven strictly through its command line and file
formats (never imported), so these tests double as cross-implementation
format-compatibility checks.
"""

import json
import subprocess
import sys

import pytest


def run_cli(*argv, cwd=None):
    proc = subprocess.run(
        [sys.executable, "-m", "handflow.cli", *map(str, argv)],
        capture_output=True,
        text=True,
        cwd=cwd,
    )
    if proc.returncode != 0:
        raise RuntimeError(
            f"pipeline CLI failed ({proc.returncode}):\n{proc.stdout}\n{proc.stderr}"
        )
    return proc.stdout


@pytest.fixture(scope="session")
def golden(tmp_path_factory):
    """Demo bundle -> retarget -> 100-batch mix -> per-episode JSON dumps."""
    root = tmp_path_factory.mktemp("golden")
    run_cli("demo", root, "--human-tracks", 3, "--robot-logs", 2, "--seed", 33)

    config_path = root / "config.json"
    config = json.loads(config_path.read_text())
    config["mix"]["n_batches"] = 100
    config_path.write_text(json.dumps(config, indent=2) + "\n")

    run_cli("retarget", "--config", config_path)
    run_cli("mix", "--config", config_path)

    dataset = root / "dataset"
    dumps = {}
    for ep_dir in sorted((dataset / "episodes").iterdir()):
        dump_path = root / "dumps" / f"{ep_dir.name}.json"
        run_cli("inspect", ep_dir, "--out", root / "inspect" / ep_dir.name,
                "--dump-json", dump_path)
        dumps[ep_dir.name] = dump_path
    assert len(dumps) == 5
    return {"root": root, "dataset": dataset, "dumps": dumps}
