import numpy as np
import pytest

from hmfem import SolverConfig, State, build_grid, dof_of_node, preset, run
from hmfem.cli import emit_convergence_log, emit_snapshot, main, parse_args


def test_parse_defaults():
    cfg = parse_args(["--test", "1", "--method", "newton", "--out", "d"])
    assert cfg.test == 1
    assert cfg.method == "newton"
    assert cfg.n == 17
    assert cfg.tau == 0.1
    assert cfg.T == 10.0
    assert cfg.tol == 1e-6
    assert cfg.k_max == 20
    assert cfg.snapshot_every == 10
    assert cfg.cap == 0.3


def test_parse_no_args_defaults_to_test_1():
    cfg = parse_args(["--out", "d"])
    assert cfg.test == 1
    assert cfg.method == "modified"


@pytest.mark.parametrize(
    "argv",
    [
        ["--tau", "-1", "--out", "d"],
        ["--test", "9", "--out", "d"],
        ["--test", "custom.toml", "--out", "d"],
        ["--frobnicate", "--out", "d"],
        ["--tau", "abc", "--out", "d"],
        ["--test", "1"],  # missing --out
    ],
)
def test_usage_errors_exit_nonzero(argv):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code != 0


def test_snapshot_zero_state(tmp_path):
    g = build_grid(1.0, 1.0, 3)
    st = State(np.zeros(g.N), np.zeros(g.N))
    path = tmp_path / "snap.csv"
    emit_snapshot(st, g, 0.0, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x,y,u,w"
    assert len(lines) == 1 + 9  # full 3x3 lattice
    for line in lines[1:]:
        _, _, u, w = line.split(",")
        assert float(u) == 0.0 and float(w) == 0.0


def test_snapshot_periodic_replication(tmp_path):
    g = build_grid(1.0, 1.0, 3)
    rng = np.random.default_rng(0)
    st = State(rng.standard_normal(g.N), rng.standard_normal(g.N))
    path = tmp_path / "snap.csv"
    emit_snapshot(st, g, 0.0, path)
    rows = [l.split(",") for l in path.read_text().strip().split("\n")[1:]]
    # row order is j-major then i: row index = j*n + i
    def row(i, j):
        return rows[j * g.n + i]

    d00 = dof_of_node(g, 0, 0)
    assert float(row(2, 0)[2]) == st.U[d00]
    assert float(row(2, 0)[3]) == st.W[d00]
    assert float(row(0, 2)[2]) == st.U[d00]


def test_snapshot_round_trip(tmp_path):
    g = build_grid(np.pi, np.pi, 5)
    rng = np.random.default_rng(1)
    st = State(rng.standard_normal(g.N) * 1e-5, rng.standard_normal(g.N))
    path = tmp_path / "snap.csv"
    emit_snapshot(st, g, 1.0, path)
    rows = [l.split(",") for l in path.read_text().strip().split("\n")[1:]]
    U_back = np.empty(g.N)
    W_back = np.empty(g.N)
    m = g.n - 1
    for j in range(m):
        for i in range(m):
            r = rows[j * g.n + i]
            U_back[dof_of_node(g, i, j)] = float(r[2])
            W_back[dof_of_node(g, i, j)] = float(r[3])
    assert np.array_equal(U_back, st.U)
    assert np.array_equal(W_back, st.W)


def test_convergence_log_contents(tmp_path):
    res = run(preset(2), SolverConfig(tau=0.1, method="newton"), T=0.3, n=9)
    path = tmp_path / "conv.csv"
    emit_convergence_log(res, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,iters,rel_err,residual,u_max,w_mnorm,wall_ms"
    assert len(lines) == 1 + 3 + 1
    assert lines[-1].startswith("# total_iterations=")
    assert "stop_reason=reached_T" in lines[-1]
    for line in lines[1:-1]:
        assert int(line.split(",")[1]) == 2


def test_convergence_log_T_zero(tmp_path):
    res = run(preset(1), SolverConfig(tau=0.1), T=0.0, n=5)
    path = tmp_path / "conv.csv"
    emit_convergence_log(res, path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 2  # header plus summary
    assert "total_iterations=0" in lines[1]


def test_main_end_to_end(tmp_path):
    out = tmp_path / "run"
    code = main(
        ["--test", "2", "--method", "modified", "--n", "9", "--T", "0.5", "--out", str(out)]
    )
    assert code == 0
    files = sorted(p.name for p in out.iterdir())
    assert "convergence.csv" in files
    assert "snapshot_t0.0000.csv" in files
    assert "snapshot_t0.5000.csv" in files


def test_outputs_deterministic_modulo_wall_time(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        main(["--test", "3", "--n", "9", "--T", "0.4", "--out", str(out)])
        conv = (out / "convergence.csv").read_text().strip().split("\n")
        # drop the wall_ms column and the wall field of the summary
        data = [",".join(l.split(",")[:-1]) for l in conv[1:-1]]
        summary = [f for f in conv[-1].split() if not f.startswith("total_wall_ms")]
        snaps = sorted(p.name for p in out.iterdir() if p.name.startswith("snapshot"))
        snap_text = [(out / s).read_text() for s in snaps]
        outs.append((data, summary, snaps, snap_text))
    assert outs[0] == outs[1]


def test_main_amplitude_cap_exits_zero(tmp_path):
    code = main(
        ["--test", "1", "--n", "9", "--T", "1.0", "--cap", "1e-9",
         "--out", str(tmp_path / "cap")]
    )
    assert code == 0
    conv = (tmp_path / "cap" / "convergence.csv").read_text()
    assert "stop_reason=amplitude_cap" in conv


def test_main_solver_failure_exit_code(tmp_path, monkeypatch):
    import hmfem.cli as cli
    from hmfem import SingularMatrixError
    from hmfem.integrate import RunResult

    def fake_run(*args, **kwargs):
        return RunResult(
            times=[0.0],
            states=[State(np.zeros(16), np.zeros(16))],
            state_times=[0.0],
            reports=[],
            diagnostics=[],
            stop_reason="solver_failure",
        )

    monkeypatch.setattr(cli, "run", fake_run)
    code = main(["--test", "1", "--n", "5", "--T", "0.2", "--out", str(tmp_path / "x")])
    assert code == 3
