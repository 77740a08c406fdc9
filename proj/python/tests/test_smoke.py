import json

import pytest

import m2oie


def test_synth_corpus_is_deterministic():
    a = m2oie.synth_corpus(7, 20)
    assert a == m2oie.synth_corpus(7, 20)
    assert len(a) == 20
    for s in a:
        assert s["tuples"]
        for t in s["tuples"]:
            assert len(t["args"]) == 4


def test_run_usage_error():
    code, _, err = m2oie.run(["train"])
    assert code == 2
    assert "--corpus" in err


@pytest.fixture(scope="module")
def tiny_model(tmp_path_factory):
    d = tmp_path_factory.mktemp("m2oie")
    config = d / "tiny.json"
    config.write_text(json.dumps({
        "model": {"encoder": {"hidden": 16, "layers": 1, "heads": 2, "ffn_dim": 32},
                  "argument": {"blocks": 1, "heads": 2, "pos_dim": 8, "ffn_dim": 48}},
        "train": {"epochs": 2, "batch_size": 8},
    }))
    corpus = d / "train.jsonl"
    assert m2oie.run(["synth", "--seed", "3", "--size", "30", "--out", str(corpus)])[0] == 0
    ckpt = d / "tiny.ckpt"
    code, out, err = m2oie.run(["train", "--corpus", str(corpus), "--config", str(config), "--out", str(ckpt)])
    assert code == 0, err
    return d, corpus, ckpt


def test_extract_and_evaluate(tiny_model):
    d, corpus, ckpt = tiny_model
    sentences = [" ".join(s["tokens"]) for s in m2oie.synth_corpus(5, 6)]
    one = m2oie.extract(ckpt, sentences, batch=1)
    many = m2oie.extract(ckpt, sentences, batch=32)
    assert len(one) == len(sentences)
    assert [[e["line"] for e in s] for s in one] == [[e["line"] for e in s] for s in many]
    for per in one:
        for e in per:
            assert 0.0 < e["confidence"] <= 5.0
            assert len(e["args"]) == 4

    pred = d / "pred.tsv"
    assert m2oie.run(["extract", "--model", str(ckpt), "--input", str(corpus), "--out", str(pred)])[0] == 0
    report = m2oie.evaluate(corpus, pred)
    assert report["matcher"] == "tuple"
    assert 0.0 <= report["auc"] <= 1.0
    assert 0.0 <= report["f1"] <= 1.0
    with pytest.raises(m2oie.M2oieError):
        m2oie.evaluate(corpus, pred, matcher="fuzzy")


def test_missing_checkpoint_raises(tmp_path):
    with pytest.raises(RuntimeError):
        m2oie.Model(str(tmp_path / "missing.ckpt"))
