import csv
import io
import json
from contextlib import redirect_stdout

from goalkeeper import cli

TAU3_STRINGS = ["2", "00", "01", "10", "11", "20", "21"]


def run_cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(list(argv))
    return code, buf.getvalue()


def make_session(tmp_path, agent="matching", seed=42, n=1000, name=None):
    out = tmp_path / f"{name or agent}-{seed}.jsonl"
    code, _ = run_cli(
        "agent-run",
        "--model",
        "model3",
        "--n",
        str(n),
        "--agent",
        agent,
        "--seed",
        str(seed),
        "--out",
        str(out),
    )
    assert code == 0
    return out


def test_simulate_byte_identical(tmp_path):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    for out in (a, b):
        code, _ = run_cli(
            "simulate", "--model", "model3", "--n", "1000", "--seed", "7",
            "--out", str(out),
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().strip()) == 1000


def test_simulate_requires_complete_model():
    code, _ = run_cli("simulate", "--model", "model1", "--n", "10", "--seed", "1")
    assert code == 2
    code, _ = run_cli("simulate", "--model", "nope", "--n", "10", "--seed", "1")
    assert code == 2


def test_agent_run_session_readable(tmp_path):
    path = make_session(tmp_path, agent="self:rho=0.5", seed=5, n=300)
    from goalkeeper.session import read_session

    record = read_session(path)
    assert record.n_trials == 300
    assert record.model_name == "model3"


def test_estimate_tune_recovers_planted_tree(tmp_path):
    path = make_session(tmp_path, agent="matching", seed=42, n=1000)
    out = tmp_path / "est.json"
    code, _ = run_cli(
        "estimate", "--in", str(path), "--L", "4", "--tune", "--out", str(out)
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert sorted(data["contexts"]) == sorted(TAU3_STRINGS)
    assert data["L"] == 4


def test_tune_reports_grid_errors(tmp_path):
    path = make_session(tmp_path, agent="matching", seed=43, n=600)
    code, text = run_cli(
        "tune", "--in", str(path), "--L", "2", "--grid", "0.5", "1.0"
    )
    assert code == 0
    data = json.loads(text)
    assert set(data["tuning"]["holdout_errors"]) == {"0.5", "1.0"}


def test_lr_test_output(tmp_path):
    path = make_session(tmp_path, agent="self:rho=0.6", seed=44, n=1000)
    code, text = run_cli("lr-test", "--in", str(path))
    assert code == 0
    data = json.loads(text)
    assert data["reject"] is True
    assert data["df_nominal"] == 12


def test_windows_csv_columns(tmp_path):
    path = make_session(tmp_path, agent="maximizing", seed=45, n=1000)
    out = tmp_path / "w.csv"
    code, _ = run_cli(
        "windows", "--in", str(path), "--seed", "9",
        "--density-replicates", "300", "--out", str(out),
    )
    assert code == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == [
        "participant", "model", "window", "pcp", "normalized", "logit",
        "strategy", "lr_p_value",
    ]
    assert len(rows) == 7  # header + 6 windows
    assert {r[6] for r in rows[1:]} <= {"matching", "maximizing", "undermatching"}


def test_windows_requires_seed_or_densities(tmp_path):
    path = make_session(tmp_path, agent="matching", seed=46, n=400)
    code, _ = run_cli("windows", "--in", str(path))
    assert code == 2


def test_densities_then_classify(tmp_path):
    dens = tmp_path / "d.json"
    code, _ = run_cli(
        "densities", "--model", "model3", "--m", "250",
        "--replicates", "400", "--seed", "11", "--out", str(dens),
    )
    assert code == 0
    code, text = run_cli("classify", "--densities", str(dens), "--pcp", "0.8333")
    assert code == 0
    assert json.loads(text)[0]["strategy"] == "maximizing"
    code, text = run_cli("classify", "--densities", str(dens), "--pcp", "0.30")
    assert json.loads(text)[0]["strategy"] == "undermatching"


def test_mode_tree_identical_inputs(tmp_path):
    paths = []
    for seed in (42, 42, 42):
        sess = make_session(tmp_path, agent="matching", seed=seed, n=1000,
                            name=f"mt{len(paths)}")
        out = tmp_path / f"est{len(paths)}.json"
        run_cli("estimate", "--in", str(sess), "--L", "3", "--tune", "--out", str(out))
        paths.append(str(out))
    code, text = run_cli("mode-tree", "--in", *paths, "--L", "3")
    assert code == 0
    data = json.loads(text)
    assert sorted(data["contexts"]) == sorted(TAU3_STRINGS)
    assert data["frequencies"]["2"] == 1.0


def test_anova_pipeline(tmp_path):
    panel = tmp_path / "panel.csv"
    rows = ["model,participant,window,value"]
    base = {"m1": 0.0, "m2": 1.0}
    for model in ("m1", "m2"):
        for pid in range(3):
            for w in range(1, 7):
                value = base[model] + 0.1 * w + 0.01 * pid
                rows.append(f"{model},p{pid},{w},{value}")
    panel.write_text("\n".join(rows) + "\n")
    code, text = run_cli("anova", "--in", str(panel))
    assert code == 0
    data = json.loads(text)
    effects = {r["effect"] for r in data["anova"]["rows"]}
    assert effects == {"model", "subjects_within_groups", "window", "interaction", "residual"}
    assert len(data["pairwise"]) == 2 * 5 + 1 * 6
    csv_code, csv_text = run_cli("anova", "--in", str(panel), "--format", "csv")
    assert csv_code == 0
    assert csv_text.splitlines()[0] == "effect,kind,t,df,p,p_adjusted,stars"


def test_report_outputs(tmp_path):
    sessions = [
        make_session(tmp_path, agent="matching", seed=s, n=1000, name=f"r{s}")
        for s in (50, 51)
    ]
    out_dir = tmp_path / "report"
    code, _ = run_cli(
        "report", "--in", *[str(s) for s in sessions], "--out", str(out_dir),
        "--seed", "12", "--density-replicates", "300",
    )
    assert code == 0
    for name in ("windows.csv", "report.json", "cpcp.svg", "windows_pcp.svg"):
        assert (out_dir / name).exists(), name
    svg = (out_dir / "cpcp.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    data = json.loads((out_dir / "report.json").read_text())
    assert len(data["sessions"]) == 2
    assert all(len(s["windows"]) == 6 for s in data["sessions"])
