import json

import pytest

from ssmforge import BinaryMatrix, matrix_from_column_strings, read_matrix, write_matrix
from ssmforge.cli import main

I4 = BinaryMatrix(4, [1, 2, 4, 8])
TRIANGLE = matrix_from_column_strings(["10", "01", "11"])

PAPER_TABLE = """\
kind,b,p,feasible,rate,published_bound,margin
ssm2-shearer,45,4.487e-05,true,0.2237225,0.2237,0.000771332
ssm3,6,0.24999,true,0.0974841,0.0974,7.99984e-05
locally-thin-5,5,0.39518,true,0.1965020,0.1965,8.36165e-05
locally-2-thin-6,4,0.50318,true,0.2522866,0.2522,4.93944e-05
cancellative-2,5,0.3001,true,0.1170887,0.1170,6.66963e-07
"""


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ------------------------------------------------------------------- generate

def test_generate_all_plain(tmp_path, capsys):
    out = tmp_path / "fam.txt"
    code, stdout, _ = run(capsys, "generate", "--family", "plain", "--n", "4",
                          "--b", "2", "--all", "--out", str(out))
    assert code == 0
    assert "wrote 4 columns x 4 rows" in stdout
    m = read_matrix(out)
    assert m.num_columns == 4 and m.n == 4


def test_generate_requires_block_size(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--family", "plain", "--n", "4",
                       "--all", "--out", str(tmp_path / "x.txt"))
    assert code == 2
    assert "error" in err


def test_generate_all_xor_q(tmp_path, capsys):
    base = ["generate", "--family", "plain", "--n", "4", "--b", "2",
            "--out", str(tmp_path / "x.txt")]
    assert run(capsys, *base)[0] == 2  # neither
    assert run(capsys, *base, "--all", "--q", "0.5")[0] == 2  # both


def test_generate_sampling_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    args = ["generate", "--family", "plain", "--n", "20", "--b", "4",
            "--q", "0.6", "--seed", "5"]
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b), "--threads", "7")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_generate_size_guard(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--family", "triplet-parity",
                       "--n", "45", "--all", "--out", str(tmp_path / "x.txt"))
    assert code == 2
    assert "limit" in err


def test_generate_invalid_q(tmp_path, capsys):
    for bad_q in ("1.5", "0", "-0.2", "abc"):
        code, _, _ = run(capsys, "generate", "--family", "plain", "--n", "4",
                         "--b", "2", "--q", bad_q, "--out", str(tmp_path / "x.txt"))
        assert code == 2, bad_q


# ------------------------------------------------------------------ construct

CONSTRUCT_ARGS = ["construct", "--target", "ssm", "--t", "2", "--family", "plain",
                  "--n", "12", "--b", "3", "--q", "0.5", "--seed", "0"]


def test_construct_end_to_end(tmp_path, capsys):
    out, rep = tmp_path / "m.txt", tmp_path / "r.json"
    code, stdout, _ = run(capsys, *CONSTRUCT_ARGS, "--out", str(out),
                          "--report", str(rep))
    assert code == 0
    assert "constructed 8 columns from 42 (34 deletions)" in stdout
    doc = json.loads(rep.read_text())
    assert doc["tool"] == "ssmforge"
    assert doc["rng"] == "numpy-pcg64"
    assert doc["config"]["seed"] == 0
    assert doc["config"]["q"] == "0.5"
    assert doc["q"] == "0.5"
    assert doc["deletions"] == 34
    assert doc["verdict"]["pass"] is True
    assert "elapsed_ms" not in doc["verdict"] and "wall_time_s" not in doc
    # the written matrix verifies through the CLI too
    assert run(capsys, "verify", "--input", str(out), "--property", "ssm",
               "--t", "2")[0] == 0


def test_construct_deterministic_across_threads(tmp_path, capsys):
    out, rep = tmp_path / "m.txt", tmp_path / "r.json"
    files = []
    for threads in ("1", "6"):
        assert run(capsys, *CONSTRUCT_ARGS, "--threads", threads, "--out",
                   str(out), "--report", str(rep))[0] == 0
        files.append((out.read_bytes(), rep.read_text()))
    assert files[0][0] == files[1][0]
    # reports differ only in the echoed thread count
    assert (files[0][1].replace('"threads": 1', '"threads": 6')
            == files[1][1])


def test_construct_rerun_byte_identical(tmp_path, capsys):
    out, rep = tmp_path / "m.txt", tmp_path / "r.json"
    snapshots = []
    for _ in range(2):
        assert run(capsys, *CONSTRUCT_ARGS, "--out", str(out),
                   "--report", str(rep))[0] == 0
        snapshots.append((out.read_bytes(), rep.read_bytes()))
    assert snapshots[0] == snapshots[1]


def test_construct_missing_t(tmp_path, capsys):
    code, _, err = run(capsys, "construct", "--target", "ssm", "--family",
                       "plain", "--n", "12", "--b", "3", "--q", "0.5",
                       "--out", str(tmp_path / "m.txt"),
                       "--report", str(tmp_path / "r.json"))
    assert code == 2
    assert "requires --t" in err


def test_construct_repair_limit_writes_partial_report(tmp_path, capsys):
    out, rep = tmp_path / "m.txt", tmp_path / "r.json"
    code, _, err = run(capsys, *CONSTRUCT_ARGS, "--max-repair-rounds", "5",
                       "--out", str(out), "--report", str(rep))
    assert code == 1
    assert "did not converge" in err
    assert not out.exists()  # no matrix on failure
    doc = json.loads(rep.read_text())
    assert doc["deletions"] == 5
    assert doc["rate"] is None
    assert doc["verdict"]["pass"] is False
    assert doc["verdict"]["witness"] is not None


def test_construct_column_cap(tmp_path, capsys):
    code, _, err = run(capsys, *CONSTRUCT_ARGS[:-2], "--q", "0.9",
                       "--max-columns", "50",
                       "--out", str(tmp_path / "m.txt"),
                       "--report", str(tmp_path / "r.json"))
    assert code == 2
    assert "cap" in err


# --------------------------------------------------------------------- verify

def test_verify_pass_line(tmp_path, capsys):
    path = tmp_path / "i4.txt"
    write_matrix(I4, path)
    code, stdout, _ = run(capsys, "verify", "--input", str(path),
                          "--property", "ssm", "--t", "2")
    assert code == 0
    assert stdout == 'pass ssm {"t": 2} columns=4 subsets_checked=6\n'


def test_verify_fail_line_and_witness(tmp_path, capsys):
    path = tmp_path / "tri.txt"
    write_matrix(TRIANGLE, path)
    code, stdout, _ = run(capsys, "verify", "--input", str(path),
                          "--property", "ssm", "--t", "2")
    assert code == 1
    assert stdout == ('fail ssm witness={"candidate_columns": [1, 2], '
                      '"excluded_column": 0, "f0": [0, 1]}\n')


def test_verify_json_report(tmp_path, capsys):
    path = tmp_path / "tri.txt"
    write_matrix(TRIANGLE, path)
    j = tmp_path / "verdict.json"
    snapshots = []
    for _ in range(2):
        assert run(capsys, "verify", "--input", str(path), "--property",
                   "bar-sep", "--t", "2", "--json", str(j))[0] == 1
        snapshots.append(j.read_bytes())
    assert snapshots[0] == snapshots[1]  # no timing in the report
    doc = json.loads(snapshots[0])
    assert doc["property"] == "bar-sep"
    assert doc["pass"] is False
    assert doc["witness"] == {"first": [2], "second": [0, 1]}
    assert doc["config"]["input"] == str(path)


def test_verify_naive_oracle(tmp_path, capsys):
    path = tmp_path / "tri.txt"
    write_matrix(TRIANGLE, path)
    code, stdout, _ = run(capsys, "verify", "--input", str(path),
                          "--property", "ssm", "--t", "2", "--naive-oracle")
    assert code == 1
    assert "fail ssm" in stdout
    # refused for non-ssm properties and for wide matrices
    assert run(capsys, "verify", "--input", str(path), "--property",
               "disjunct", "--t", "1", "--naive-oracle")[0] == 2
    wide = tmp_path / "wide.txt"
    write_matrix(BinaryMatrix(5, list(range(1, 17))), wide)
    assert run(capsys, "verify", "--input", str(wide), "--property", "ssm",
               "--t", "2", "--naive-oracle")[0] == 2


def test_verify_param_shape_enforced(tmp_path, capsys):
    path = tmp_path / "i4.txt"
    write_matrix(I4, path)
    base = ["verify", "--input", str(path)]
    assert run(capsys, *base, "--property", "ssm")[0] == 2          # no --t
    assert run(capsys, *base, "--property", "ssm", "--k", "3")[0] == 2
    assert run(capsys, *base, "--property", "locally-thin")[0] == 2  # no --k
    assert run(capsys, *base, "--property", "locally-thin", "--t", "2")[0] == 2
    assert run(capsys, *base, "--property", "locally-thin", "--k", "2",
               "--points", "2")[0] == 0
    assert run(capsys, *base, "--property", "locally-2-thin", "--k", "3")[0] == 0


def test_verify_missing_input_file(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--input", str(tmp_path / "nope.txt"),
                       "--property", "ssm", "--t", "2")
    assert code == 2
    assert "error" in err


# --------------------------------------------------------------------- bounds

def test_bounds_paper_table_exact(capsys):
    code, stdout, _ = run(capsys, "bounds", "--table", "paper")
    assert code == 0
    assert stdout == PAPER_TABLE


def test_bounds_table_xor_optimize(capsys):
    assert run(capsys, "bounds")[0] == 2
    assert run(capsys, "bounds", "--table", "paper", "--optimize", "ssm3")[0] == 2
    assert run(capsys, "bounds", "--table", "mystery")[0] == 2


def test_bounds_optimize(capsys):
    code, stdout, _ = run(capsys, "bounds", "--optimize", "locally-thin-5",
                          "--b-min", "2", "--b-max", "8")
    assert code == 0
    lines = stdout.strip().splitlines()
    assert lines[0] == "kind,b,p,feasible,rate,best"
    rows = [line.split(",") for line in lines[1:]]
    assert [r[1] for r in rows] == [str(b) for b in range(2, 9)]
    best = [r for r in rows if r[5] == "true"]
    assert len(best) == 1 and best[0][1] == "5"
    assert best[0][2] == "0.39518"


def test_bounds_optimize_requires_range(capsys):
    assert run(capsys, "bounds", "--optimize", "locally-thin-5")[0] == 2
    assert run(capsys, "bounds", "--optimize", "mystery", "--b-min", "2",
               "--b-max", "4")[0] == 2


def test_bounds_json(tmp_path, capsys):
    j = tmp_path / "rows.json"
    assert run(capsys, "bounds", "--table", "paper", "--json", str(j))[0] == 0
    doc = json.loads(j.read_text())
    assert len(doc["rows"]) == 5
    assert doc["rows"][0]["kind"] == "ssm2-shearer"
    assert doc["rows"][0]["published_bound"] == 0.2237


# --------------------------------------------------------------------- decode

def test_decode_simulated_defectives(tmp_path, capsys):
    path = tmp_path / "i4.txt"
    write_matrix(I4, path)
    code, stdout, _ = run(capsys, "decode", "--matrix", str(path), "--t", "2",
                          "--defectives", "1,3")
    assert code == 0
    assert stdout == "{1,3}\n"


def test_decode_outcome_string(tmp_path, capsys):
    path = tmp_path / "i4.txt"
    write_matrix(I4, path)
    code, stdout, _ = run(capsys, "decode", "--matrix", str(path), "--t", "2",
                          "--outcome", "0101")
    assert code == 0
    assert stdout == "{1,3}\n"


def test_decode_inconsistent_outcome(tmp_path, capsys):
    path = tmp_path / "tri.txt"
    write_matrix(TRIANGLE, path)
    code, _, err = run(capsys, "decode", "--matrix", str(path), "--t", "2",
                       "--outcome", "11")
    assert code == 1
    assert "inconsistent" in err


def test_decode_wrong_outcome_length(tmp_path, capsys):
    path = tmp_path / "i4.txt"
    write_matrix(I4, path)
    assert run(capsys, "decode", "--matrix", str(path), "--t", "2",
               "--outcome", "010")[0] == 2


def test_decode_defectives_xor_outcome(tmp_path, capsys):
    path = tmp_path / "i4.txt"
    write_matrix(I4, path)
    base = ["decode", "--matrix", str(path), "--t", "2"]
    assert run(capsys, *base)[0] == 2
    assert run(capsys, *base, "--defectives", "1,3", "--outcome", "0101")[0] == 2


def test_decode_t_mismatch(tmp_path, capsys):
    path = tmp_path / "i4.txt"
    write_matrix(I4, path)
    assert run(capsys, "decode", "--matrix", str(path), "--t", "1",
               "--defectives", "1,3")[0] == 1


# --------------------------------------------------------------- config file

def test_config_file_supplies_flags(tmp_path, capsys):
    out = tmp_path / "fam.txt"
    cfg = tmp_path / "gen.cfg"
    cfg.write_text(
        "# sample config\nfamily = plain\nn = 4\nb = 2\nall = true\n"
        f"out = {out}\n"
    )
    assert run(capsys, "generate", "--config", str(cfg))[0] == 0
    assert read_matrix(out).num_columns == 4


def test_config_explicit_flags_override(tmp_path, capsys):
    cfg_out = tmp_path / "from_cfg.txt"
    real_out = tmp_path / "from_flag.txt"
    cfg = tmp_path / "gen.cfg"
    cfg.write_text(f"family = plain\nn = 4\nb = 2\nall = true\nout = {cfg_out}\n")
    assert run(capsys, "generate", "--config", str(cfg), "--out",
               str(real_out))[0] == 0
    assert real_out.exists() and not cfg_out.exists()


def test_config_underscore_keys(tmp_path, capsys):
    out, rep = tmp_path / "m.txt", tmp_path / "r.json"
    cfg = tmp_path / "c.cfg"
    cfg.write_text("max_repair_rounds = 5\n")
    code, _, err = run(capsys, *CONSTRUCT_ARGS, "--config", str(cfg),
                       "--out", str(out), "--report", str(rep))
    assert code == 1
    assert "did not converge within 5" in err


def test_config_false_boolean_omitted(tmp_path, capsys):
    out = tmp_path / "fam.txt"
    cfg = tmp_path / "gen.cfg"
    cfg.write_text("all = false\n")
    assert run(capsys, "generate", "--config", str(cfg), "--family", "plain",
               "--n", "4", "--b", "2", "--q", "0.5", "--seed", "1",
               "--out", str(out))[0] == 0


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense line\n")
    assert run(capsys, "generate", "--config", str(bad), "--family", "plain",
               "--n", "4", "--b", "2", "--all",
               "--out", str(tmp_path / "x.txt"))[0] == 2
    assert run(capsys, "generate", "--config", str(tmp_path / "absent.cfg"),
               "--family", "plain", "--n", "4", "--b", "2", "--all",
               "--out", str(tmp_path / "x.txt"))[0] == 2


# -------------------------------------------------------------------- general

def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert "ssmforge 0.1.0" in capsys.readouterr().out


def test_unknown_command(capsys):
    assert main(["frobnicate"]) == 2
