import numpy as np
import pytest

from amforest.cli import depth_bound, main


def _run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_online_synthetic_rows(tmp_path):
    code, text = _run(tmp_path, "online", "--synthetic", "gauss2", "--n", "150", "--n-trees", "2")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "t,avg_loss_amf,avg_loss_dummy"
    assert len(lines) == 151 and lines[-1].startswith("150,")


def test_online_stride(tmp_path):
    _, text = _run(tmp_path, "online", "--synthetic", "gauss2", "--n", "45", "--stride", "20")
    assert [line.split(",")[0] for line in text.splitlines()[1:]] == ["20", "40", "45"]


def test_online_csv_with_header_and_named_label(tmp_path):
    rows = "\n".join(f"{i / 10},{(i * 7 % 10) / 10},{i % 2}" for i in range(30))
    path = _write(tmp_path, "a,b,label\n" + rows + "\n")
    code, text = _run(tmp_path, "online", "--data", path, "--label-col", "label", "--n-trees", "2")
    assert code == 0 and len(text.splitlines()) == 31
    code, _ = _run(tmp_path, "online", "--data", path, "--label-col", "0", "--n-trees", "2")
    assert code == 2  # column 0 holds non-integer labels


def test_online_regression(tmp_path):
    rows = "\n".join(f"{i / 20},{np.sin(i) / 2}" for i in range(40))
    path = _write(tmp_path, rows + "\n")
    code, text = _run(tmp_path, "online", "--data", path, "--task", "reg", "--n-trees", "2")
    assert code == 0 and len(text.splitlines()) == 41


def test_same_seed_byte_identical(tmp_path):
    args = ("online", "--synthetic", "gauss2", "--n", "120", "--n-trees", "3", "--seed", "7")
    _, first = _run(tmp_path, *args, name="a.csv")
    _, second = _run(tmp_path, *args, name="b.csv")
    assert first == second
    _, other = _run(tmp_path, *args[:-1], "8", name="c.csv")
    assert other != first


@pytest.mark.parametrize(
    "text,code",
    [
        ("1,2,0\n3,4\n", 2),  # ragged row
        ("1,x,0\n3,4,1\n2,2,x\n", 3),  # header detected, then a non-numeric cell
        ("1,2,0\n3,abc,1\n", 3),
        ("1,2,0.5\n3,4,1\n", 2),  # non-integer class label
        ("1,2,0\n3,4,0\n", 4),  # a single class
        ("", 2),
    ],
)
def test_online_bad_files(tmp_path, text, code, capsys):
    path = _write(tmp_path, text)
    assert main(["online", "--data", path]) == code
    assert capsys.readouterr().err  # the reason is reported


def test_error_message_names_row(tmp_path, capsys):
    path = _write(tmp_path, "1,2,0\n3,4\n")
    main(["online", "--data", path])
    assert "row 2" in capsys.readouterr().err


def test_missing_label_column(tmp_path):
    path = _write(tmp_path, "a,b\n1,0\n2,1\n")
    assert main(["online", "--data", path, "--label-col", "target"]) == 2
    assert main(["online", "--data", path, "--label-col", "5"]) == 2


def test_bad_flags(tmp_path, capsys):
    assert main(["online", "--synthetic", "gauss2"]) == 2
    assert main(["online"]) == 2
    assert main(["online", "--synthetic", "gauss2", "--n", "10", "--n-trees", "0"]) == 2
    assert "--n-trees" in capsys.readouterr().err
    assert main(["online", "--data", str(tmp_path / "missing.csv")]) == 2
    assert main(["mondrian-stats", "--lambda", "-1"]) == 2
    assert main(["oracle-check", "--reps", "0"]) == 2


def test_auc_command(tmp_path):
    code, text = _run(tmp_path, "auc", "--synthetic", "gauss2", "--n", "300", "--n-trees", "3")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "t,auc_amf,auc_dummy"
    assert [line.split(",")[0] for line in lines[1:]] == ["100", "200", "210"]
    assert float(lines[-1].split(",")[1]) >= 0.95
    assert float(lines[-1].split(",")[2]) == 0.5


def test_auc_random_labels_near_half(tmp_path):
    code, text = _run(tmp_path, "auc", "--synthetic", "random", "--n", "1500", "--n-trees", "5")
    assert code == 0
    assert abs(float(text.splitlines()[-1].split(",")[1]) - 0.5) <= 0.05


def test_auc_rejects_multiclass(tmp_path):
    path = _write(tmp_path, "".join(f"{i},{i % 3}\n" for i in range(30)))
    assert main(["auc", "--data", path]) == 4
    assert main(["trees-sweep", "--data", path]) == 4


def test_auc_test_split_lacking_class(tmp_path):
    path = _write(tmp_path, "".join(f"{i},{int(i == 0)}\n" for i in range(10)))
    assert main(["auc", "--data", path, "--n-classes", "2", "--seed", "1"]) == 4


def test_trees_sweep(tmp_path):
    code, text = _run(tmp_path, "trees-sweep", "--synthetic", "gauss2", "--n", "200")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "n_trees,auc" and len(lines) == 7
    assert [int(line.split(",")[0]) for line in lines[1:]] == [1, 2, 5, 10, 20, 50]


def test_mondrian_stats_leaf_counts(tmp_path):
    code, text = _run(tmp_path, "mondrian-stats", "--dim", "1", "--lambda", "1", "--reps", "2000")
    assert code == 0
    header, row = text.splitlines()
    assert header == "dim,lambda,reps,mean_leaves,stderr,expected"
    _, _, _, mean, stderr, expected = map(float, row.split(","))
    assert expected == 2.0 and abs(mean - expected) < 5 * stderr


def test_mondrian_stats_depth_profile(tmp_path):
    code, text = _run(tmp_path, "mondrian-stats", "--dim", "2", "--depth-profile", "50", "--reps", "3")
    assert code == 0
    header, row = text.splitlines()
    assert header == "n,dim,reps,mean_depth,stderr,bound"
    assert float(row.split(",")[-1]) == pytest.approx(np.log2(50) + 2)


def test_depth_bound_formula():
    assert depth_bound(1000, 1.0) == pytest.approx(np.log2(1000) + 2)
    assert depth_bound(1000, 2.0) == pytest.approx(np.log(1000) / np.log(4 / 3) + 4)


def test_oracle_check_exit_codes(tmp_path):
    code, text = _run(tmp_path, "oracle-check", "--reps", "40")
    assert code == 0 and float(text.splitlines()[1].split(",")[1]) < 1e-10
    code, _ = _run(tmp_path, "oracle-check", "--reps", "40", "--corrupt-weights", name="bad.csv")
    assert code == 1
