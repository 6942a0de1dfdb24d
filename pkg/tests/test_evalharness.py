import json

import pytest

from defsense import evalharness as ev
from defsense.errors import DegenerateInput, MalformedLine
from defsense.textmetrics import HashTokenVectors


def _inst(id="i1", lemma="word", context="he kept his word today",
          span=(12, 16), gold="a promise", generated="a promise"):
    return ev.EvalInstance(id=id, lemma=lemma, context=context,
                           target_span=span, gold=gold, generated=generated)


def _write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


GOOD_ROW = {"id": "i1", "lemma": "word", "context": "his word held",
            "start": 4, "end": 8, "gold": "a promise",
            "generated": "a promise or vow"}


def test_load_instances_round_trip(tmp_path):
    path = tmp_path / "inst.jsonl"
    _write_jsonl(path, [GOOD_ROW, dict(GOOD_ROW, id="i2")])
    instances = ev.load_instances(path)
    assert [i.id for i in instances] == ["i1", "i2"]
    assert instances[0].target_span == (4, 8)


def test_load_instances_skips_blank_lines(tmp_path):
    path = tmp_path / "inst.jsonl"
    path.write_text(json.dumps(GOOD_ROW) + "\n\n\n")
    assert len(ev.load_instances(path)) == 1


def test_load_instances_missing_field(tmp_path):
    path = tmp_path / "inst.jsonl"
    row = dict(GOOD_ROW)
    del row["gold"]
    _write_jsonl(path, [row])
    with pytest.raises(MalformedLine, match="gold"):
        ev.load_instances(path)


def test_load_instances_empty_definition(tmp_path):
    path = tmp_path / "inst.jsonl"
    _write_jsonl(path, [dict(GOOD_ROW, generated="")])
    with pytest.raises(MalformedLine, match="empty"):
        ev.load_instances(path)


def test_load_instances_bad_json(tmp_path):
    path = tmp_path / "inst.jsonl"
    path.write_text("{not json\n")
    with pytest.raises(MalformedLine) as err:
        ev.load_instances(path)
    assert err.value.line == 1


def test_score_instances_identity():
    scores = ev.score_instances(
        [_inst(gold="a b c d e", generated="a b c d e")],
        HashTokenVectors(dim=64, seed=0))
    assert scores["bleu"] == [100.0]
    assert scores["rouge_l"] == [1.0]
    assert scores["bert_f1"] == pytest.approx([1.0], abs=1e-12)
    assert scores["meteor"][0] == pytest.approx(1 - 0.5 / 125)


def test_evaluate_means_and_scaling():
    instances = [_inst(gold="a b c d", generated="a b c d"),
                 _inst(id="i2", gold="a b c d", generated="x y z w")]
    summary = ev.evaluate(instances, dataset="toy",
                          token_provider=HashTokenVectors(dim=64, seed=0))
    assert summary.n == 2
    assert summary.means["rouge_l"] == pytest.approx(0.5)
    assert summary.means_0_100["rouge_l"] == pytest.approx(50.0)
    # BLEU already lives on 0-100: no rescaling
    assert summary.means_0_100["bleu"] == summary.means["bleu"]


def test_evaluate_empty():
    with pytest.raises(DegenerateInput):
        ev.evaluate([])


def test_token_position():
    inst = _inst(context="the word here", span=(4, 8))
    assert ev._token_position(inst) == (3, 1, 1 / 3)
    first = _inst(context="word at start", span=(0, 4))
    assert ev._token_position(first) == (3, 0, 0.0)
    last = _inst(context="at the end word", span=(11, 15))
    assert ev._token_position(last) == (4, 3, 0.75)


def test_property_correlations_shapes():
    instances = [
        _inst(id="i1", context="word a", span=(0, 4),
              gold="a b c d", generated="a b c d"),
        _inst(id="i2", context="x word b c", span=(2, 6),
              gold="a b c d", generated="a b c x"),
        _inst(id="i3", context="x y z word e f", span=(6, 10),
              gold="a b c d", generated="p q r s"),
    ]
    scores = ev.score_instances(instances, HashTokenVectors(dim=64, seed=0))
    table = ev.example_property_correlations(instances, scores)
    assert set(table) == {"length", "abs_position", "rel_position"}
    for metric_map in table.values():
        assert set(metric_map) == set(ev.METRICS)
    # longer contexts were built to score worse here
    assert table["length"]["rouge_l"] == pytest.approx(-1.0)


def test_property_correlations_degenerate_scores():
    instances = [
        _inst(id="i1", context="word a", span=(0, 4)),
        _inst(id="i2", context="b c word", span=(4, 8)),
        _inst(id="i3", context="b c d word e", span=(6, 10)),
    ]
    scores = ev.score_instances(instances, HashTokenVectors(dim=64, seed=0))
    table = ev.example_property_correlations(instances, scores)
    # identical generated/gold across instances -> constant metric lists
    assert all(str(v).startswith("degenerate")
               for v in table["length"].values())


def test_summary_tsv():
    summary = ev.evaluate([_inst(gold="a b c d", generated="a b c d")],
                          dataset="toy",
                          token_provider=HashTokenVectors(dim=64, seed=0))
    tsv = ev.summary_to_tsv(summary)
    lines = tsv.strip().split("\n")
    assert lines[0] == "dataset\tn\tbleu\trouge_l\tmeteor\tbert_f1"
    cells = lines[1].split("\t")
    assert cells[:2] == ["toy", "1"]
    assert cells[2] == "100.0000"
