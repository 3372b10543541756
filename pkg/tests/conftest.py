import numpy as np
import pytest

from unso.cli import main as cli_main


@pytest.fixture(scope="session")
def run_cli():
    """In-process CLI runner returning (exit_code, stdout, stderr)."""
    import contextlib
    import io
    import os

    def run(argv, env=None):
        saved = {}
        if env:
            for key, value in env.items():
                saved[key] = os.environ.get(key)
                os.environ[key] = value
        out, err = io.StringIO(), io.StringIO()
        try:
            with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
                code = cli_main(argv)
        finally:
            for key, value in saved.items():
                if value is None:
                    os.environ.pop(key, None)
                else:
                    os.environ[key] = value
        return code, out.getvalue(), err.getvalue()

    return run


@pytest.fixture(scope="session")
def default_train_artifacts(tmp_path_factory, run_cli):
    """One full stock training run through the CLI; reused everywhere."""
    outdir = tmp_path_factory.mktemp("default_train")
    coeffs_path = outdir / "coeffs.txt"
    loss_path = outdir / "loss.csv"
    code, _, err = run_cli(
        ["train", "--out", str(coeffs_path), "--loss-out", str(loss_path)]
    )
    assert code == 0, err
    return coeffs_path, loss_path


@pytest.fixture(scope="session")
def trained_coeffs(default_train_artifacts):
    from unso.scalarpoly import read_coefficients

    coeffs_path, _ = default_train_artifacts
    return read_coefficients(coeffs_path)


@pytest.fixture(scope="session")
def loss_history(default_train_artifacts):
    _, loss_path = default_train_artifacts
    rows = loss_path.read_text().strip().split("\n")
    assert rows[0] == "step,lr,loss"
    return np.array([float(r.split(",")[2]) for r in rows[1:]])
