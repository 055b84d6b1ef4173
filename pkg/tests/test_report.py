import xml.etree.ElementTree as ET

import numpy as np
import pytest

from osr.cli import main
from osr.errors import OsrError
from osr.scores import ScoreTable, write_scores
from osr import svg

from conftest import TINY_ILSVRC, TINY_IS_A, TINY_WORDS, make_source_manifests


@pytest.fixture()
def tiny_wordnet_dir(tmp_path):
    d = tmp_path / "wordnet"
    d.mkdir()
    (d / "is_a.txt").write_text(TINY_IS_A)
    (d / "words.txt").write_text(TINY_WORDS)
    (d / "ilsvrc_synsets.txt").write_text(TINY_ILSVRC)
    return d


@pytest.fixture()
def tiny_protocol_file(tmp_path):
    spec = tmp_path / "tiny.txt"
    spec.write_text(
        "# osr-protocol-spec v1 name=tiny\n"
        "known n11000001 all-leaves\n"
        "known n11000002 all-leaves\n"
        "negative n11000004 all-leaves\n"
        "unknown n11000006 all-leaves\n"
    )
    return spec


@pytest.fixture()
def tiny_sources(tmp_path):
    train_text, val_text = make_source_manifests(
        ["n11000001", "n11000002", "n11000004", "n11000006"]
    )
    train = tmp_path / "train.txt"
    val = tmp_path / "val.txt"
    train.write_text(train_text)
    val.write_text(val_text)
    return train, val


def write_perfect_scores(path, n_known=5, n_negative=5, K=3):
    rows = []
    labels = []
    for i in range(n_known):
        row = np.full(K, 0.05 / (K - 1))
        row[i % K] = 0.95
        rows.append(row)
        labels.append(i % K + 1)
    rows.extend([np.full(K, 1.0 / K)] * n_negative)
    labels.extend([0] * n_negative)
    table = ScoreTable(
        K=K,
        kind="probabilities",
        sample_ids=tuple(f"x{i}" for i in range(len(rows))),
        labels=np.array(labels),
        values=np.array(rows),
    )
    write_scores(table, path)
    return table


# -- osr protocol ----------------------------------------------------------------

def test_protocol_classes_only_builtin_p2(capsys):
    assert main(["protocol", "--protocol", "p2", "--classes-only"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "role,synset,name"
    roles = [line.split(",")[0] for line in lines[1:]]
    assert roles.count("known") == 30
    assert roles.count("negative") == 31
    assert roles.count("unknown") == 55
    assert "known,n02087394,Rhodesian ridgeback" in out


def test_protocol_unknown_name_fails(capsys):
    assert main(["protocol", "--protocol", "p9", "--classes-only"]) == 1
    assert "unknown protocol" in capsys.readouterr().err


def test_protocol_manifest_generation_and_default_seed(
    tiny_wordnet_dir, tiny_protocol_file, tiny_sources, tmp_path
):
    train, val = tiny_sources
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    base = [
        "protocol",
        "--protocol", str(tiny_protocol_file),
        "--wordnet-dir", str(tiny_wordnet_dir),
        "--train-manifest", str(train),
        "--val-manifest", str(val),
    ]
    assert main(base + ["--out", str(out_a)]) == 0
    assert main(base + ["--out", str(out_b), "--seed", "42"]) == 0
    # the default seed is 42, so both runs are byte-identical
    assert out_a.read_bytes() == out_b.read_bytes()


def test_protocol_env_data_root(
    tiny_wordnet_dir, tiny_protocol_file, tiny_sources, tmp_path, monkeypatch, capsys
):
    monkeypatch.setenv("OSR_DATA_ROOT", str(tiny_wordnet_dir))
    assert main(
        ["protocol", "--protocol", str(tiny_protocol_file), "--classes-only"]
    ) == 0
    out = capsys.readouterr().out
    assert "known,n11000001,leaf one" in out

    # the env root also provides default train.txt/val.txt manifests
    train, val = tiny_sources
    (tiny_wordnet_dir / "train.txt").write_text(train.read_text())
    (tiny_wordnet_dir / "val.txt").write_text(val.read_text())
    out_file = tmp_path / "env_manifest.csv"
    assert main(
        ["protocol", "--protocol", str(tiny_protocol_file), "--out", str(out_file)]
    ) == 0
    assert out_file.exists()


def test_protocol_count_mismatch_warns(
    tiny_wordnet_dir, tmp_path, capsys
):
    spec = tmp_path / "bad_expect.txt"
    spec.write_text(
        "# osr-protocol-spec v1 name=bad\n"
        "# expect known=5 negative=2 unknown=1\n"
        "known n10000001 all-leaves\n"
        "negative n10000002 all-leaves\n"
        "unknown n11000006 all-leaves\n"
    )
    assert main(
        [
            "protocol",
            "--protocol", str(spec),
            "--wordnet-dir", str(tiny_wordnet_dir),
            "--classes-only",
        ]
    ) == 0
    err = capsys.readouterr().err
    assert "expected 5 known classes, resolved 3" in err


# -- osr eval ---------------------------------------------------------------------

def test_eval_perfect_scores_all_ones(tmp_path, capsys):
    scores = tmp_path / "scores.csv"
    write_perfect_scores(scores)
    oscr_out = tmp_path / "oscr.csv"
    assert main(
        ["eval", "--scores", str(scores), "--oscr-out", str(oscr_out)]
    ) == 0
    table_text = capsys.readouterr().out
    row = table_text.strip().splitlines()[-1]
    assert row.split()[1:] == ["1.000", "1.000", "1.000", "1.000"]
    assert oscr_out.read_text().startswith("# osr-oscr v1 group=negative")


def test_eval_logits_and_probabilities_agree(tmp_path):
    rng = np.random.default_rng(0)
    K, n = 3, 30
    logits = rng.normal(0, 2, size=(n, K))
    labels = rng.integers(0, K + 1, size=n)
    labels[:2] = [1, 0]
    ids = tuple(f"s{i}" for i in range(n))
    from osr.scores import softmax

    t_logits = ScoreTable(K=K, kind="logits", sample_ids=ids, labels=labels, values=logits)
    t_probs = ScoreTable(
        K=K, kind="probabilities", sample_ids=ids, labels=labels, values=softmax(logits)
    )
    out = {}
    for name, table in (("logits", t_logits), ("probs", t_probs)):
        path = tmp_path / f"{name}.csv"
        write_scores(table, path)
        oscr = tmp_path / f"{name}_oscr.csv"
        tab = tmp_path / f"{name}_tab.txt"
        assert main(
            [
                "eval",
                "--scores", str(path),
                "--oscr-out", str(oscr),
                "--table-out", str(tab),
                "--label", "model",
            ]
        ) == 0
        out[name] = (oscr.read_text(), tab.read_text())
    assert out["logits"] == out["probs"]


def test_eval_manifest_cross_check(tmp_path, capsys):
    scores = tmp_path / "scores.csv"
    table = write_perfect_scores(scores)
    manifest = tmp_path / "manifest.csv"
    lines = ["# osr-manifest v1 protocol=x seed=1 K=3", "path,synset,class_index,role,split"]
    # claim the first known sample is negative: mismatch
    lines.append(f"{table.sample_ids[0]},n11000001,0,negative,test")
    manifest.write_text("\n".join(lines) + "\n")
    assert main(
        ["eval", "--scores", str(scores), "--manifest", str(manifest)]
    ) == 1
    assert "label mismatch" in capsys.readouterr().err


# -- osr confidence -----------------------------------------------------------------

def test_confidence_across_epochs(tmp_path, capsys):
    paths = []
    for epoch, quality in ((1, 0.5), (2, 0.95), (3, 0.7)):
        path = tmp_path / f"val_epoch_{epoch}.csv"
        rows = [[quality, 1 - quality], [0.5, 0.5]]
        table = ScoreTable(
            K=2,
            kind="probabilities",
            sample_ids=("a", "b"),
            labels=np.array([1, 0]),
            values=np.array(rows),
        )
        write_scores(table, path)
        paths.append(str(path))
    out = tmp_path / "conf.csv"
    assert main(["confidence", *paths, "--out", str(out)]) == 0
    text = out.read_text()
    assert "best_epoch=2" in text.splitlines()[0]
    assert len(text.strip().splitlines()) == 2 + 3


def test_confidence_single_epoch(tmp_path):
    path = tmp_path / "epoch_7.csv"
    write_perfect_scores(path)
    out = tmp_path / "conf.csv"
    assert main(["confidence", str(path), "--out", str(out)]) == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 3 and rows[2].startswith("7,")


def test_confidence_missing_file_named(tmp_path, capsys):
    missing = tmp_path / "epoch_3.csv"
    assert main(["confidence", str(missing)]) == 1
    assert "epoch_3.csv" in capsys.readouterr().err


def test_confidence_requires_epoch_in_name(tmp_path, capsys):
    path = tmp_path / "scores.csv"
    write_perfect_scores(path)
    assert main(["confidence", str(path)]) == 1
    assert "epoch" in capsys.readouterr().err


# -- osr plot ----------------------------------------------------------------------

def svg_paths(text):
    root = ET.fromstring(text)  # also validates the XML
    ns = "{http://www.w3.org/2000/svg}"
    return root.findall(f".//{ns}path") + root.findall(".//path")


def test_plot_oscr_two_series(tmp_path):
    scores = tmp_path / "scores.csv"
    write_perfect_scores(scores)
    curve_a = tmp_path / "a.csv"
    curve_b = tmp_path / "b.csv"
    for path in (curve_a, curve_b):
        assert main(["eval", "--scores", str(scores), "--oscr-out", str(path),
                     "--table-out", str(tmp_path / "t.txt")]) == 0
    out = tmp_path / "plot.svg"
    assert main(
        [
            "plot", "oscr",
            "--curve", str(curve_a), "--curve", str(curve_b),
            "--label", "first", "--label", "second",
            "--out", str(out),
        ]
    ) == 0
    assert len(svg_paths(out.read_text())) == 2


def test_plot_log_scale_clips_zero_fpr(tmp_path):
    series = [svg.Series("m", (0.0, 0.01, 0.1, 1.0), (0.9, 0.8, 0.7, 0.6))]
    text = svg.render_line_plot(
        series, title="t", xlabel="x", ylabel="y", x_scale="log"
    )
    root = ET.fromstring(text)
    circles = root.findall(".//{http://www.w3.org/2000/svg}circle")
    assert len(circles) == 1  # the clipped zero-FPR point is marked


def test_plot_confidence_and_histogram(tmp_path):
    scores = tmp_path / "epoch_1.csv"
    write_perfect_scores(scores)
    conf = tmp_path / "conf.csv"
    assert main(["confidence", str(scores), "--out", str(conf)]) == 0
    conf_svg = tmp_path / "conf.svg"
    assert main(["plot", "confidence", "--in", str(conf), "--out", str(conf_svg)]) == 0
    assert len(svg_paths(conf_svg.read_text())) == 3  # gamma+, gamma-, gamma

    hist_svg = tmp_path / "hist.svg"
    assert main(
        [
            "plot", "histogram",
            "--scores", str(scores),
            "--group", "known", "--group", "negative",
            "--out", str(hist_svg),
        ]
    ) == 0
    assert len(svg_paths(hist_svg.read_text())) == 2


def test_plot_outputs_deterministic(tmp_path):
    scores = tmp_path / "scores.csv"
    write_perfect_scores(scores)
    curve = tmp_path / "c.csv"
    main(["eval", "--scores", str(scores), "--oscr-out", str(curve),
          "--table-out", str(tmp_path / "t.txt")])
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for out in (a, b):
        assert main(["plot", "oscr", "--curve", str(curve), "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_eval_hand_counted_fixture(tmp_path, capsys):
    # the hand-counted step function: known correct-class scores
    # .9/.6/.4/.2, unknown maxima .7/.3
    K = 10
    rows = [
        [0.9, 0.1] + [0.0] * 8,
        [0.6, 0.4] + [0.0] * 8,
        [0.4, 0.3, 0.3] + [0.0] * 7,
        [0.2] * 5 + [0.0] * 5,
        [0.7, 0.3] + [0.0] * 8,
        [0.3, 0.3, 0.3, 0.1] + [0.0] * 6,
    ]
    labels = [1, 1, 1, 1, -1, -1]
    table = ScoreTable(
        K=K,
        kind="probabilities",
        sample_ids=tuple(f"h{i}" for i in range(6)),
        labels=np.array(labels),
        values=np.array(rows),
    )
    scores = tmp_path / "hand.csv"
    write_scores(table, scores)
    assert main(
        [
            "eval",
            "--scores", str(scores),
            "--group", "unknown",
            "--fpr", "0.01,0.1,0.5,1",
            "--label", "hand",
        ]
    ) == 0
    row = capsys.readouterr().out.strip().splitlines()[-1]
    assert row.split()[1:] == ["0.250", "0.250", "0.750", "1.000"]


# -- osr gradcheck ------------------------------------------------------------------

def test_gradcheck_cli(capsys):
    assert main(["gradcheck", "--instances", "5"]) == 0
    out = capsys.readouterr().out
    assert out.count("[ok]") == 3
