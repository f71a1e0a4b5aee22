import json
import random

import pytest

from tourndecomp.cli import main
from tourndecomp.digraph import Digraph, gen_apex, save_digraph, random_tournament
from tourndecomp.verify import VerifyConfig, VerifyRecord, run_verify, verify_one


def test_config_validation():
    with pytest.raises(ValueError):
        VerifyConfig((5,), mode='some')
    with pytest.raises(ValueError):
        VerifyConfig((5,), mode='sample', sample=0)
    with pytest.raises(ValueError):
        VerifyConfig((5,), strategy='fast')


def test_record_roundtrip():
    rec = verify_one(5, '3ff', VerifyConfig((5,)))
    assert VerifyRecord.from_json(rec.to_json()) == rec
    assert json.loads(rec.to_json())['class'] == rec.cls


def test_verify_n4_all_gap_zero():
    records, summary = run_verify(VerifyConfig((4,)))
    assert len(records) == 64
    assert all(r.gap == 0 for r in records)
    assert summary['violations'] == []


def test_verify_n5_gaps():
    records, summary = run_verify(VerifyConfig((5,)))
    assert len(records) == 1024
    for r in records:
        assert r.gap == (1 if r.cls in ('Regular', 'Apex') else 0)
        assert r.oracle == r.pn_exact
    assert summary['gap_histogram']['Generic/odd'] == {'0': 960}


def test_verify_files_are_reproducible(tmp_path):
    out = tmp_path / 'v.jsonl'
    cfg = VerifyConfig((7, 8), mode='sample', sample=6, seed=3, strategy='both', out=str(out))
    run_verify(cfg)
    first = out.read_text()
    assert len(first.splitlines()) == 12
    # drop half the records and resume
    out.write_text(''.join(first.splitlines(keepends=True)[::2]))
    cfg.resume = True
    run_verify(cfg)
    assert out.read_text() == first
    summary = json.loads((tmp_path / 'v.jsonl.summary.json').read_text())
    assert summary['records'] == 12 and summary['violations'] == []


def test_cli_commands(tmp_path, capsys):
    f = tmp_path / 'apex.txt'
    save_digraph(gen_apex(7), f)
    assert main(['classify', str(f)]) == 0
    assert capsys.readouterr().out.strip() == 'Apex v+=5 v-=6'
    assert main(['pn', str(f), '--json']) == 0
    assert json.loads(capsys.readouterr().out)['pn'] == 6
    assert main(['expander', str(f), '--nu', '1/7', '--tau', '1/7']) == 0
    assert 'robust outexpander' in capsys.readouterr().out
    assert main(['decompose', str(f)]) == 0
    assert json.loads(capsys.readouterr().out)['size'] == 6


def test_cli_decompose_pipeline(tmp_path, capsys):
    f = tmp_path / 't.txt'
    T = random_tournament(11, random.Random(4))
    save_digraph(T, f)
    assert main(['decompose', str(f), '--trace']) == 0
    out = json.loads(capsys.readouterr().out)
    assert out['fallback_stage'] is None and out['trace']


def test_cli_verify(tmp_path, capsys):
    out = tmp_path / 'n4.jsonl'
    assert main(['verify', '--n', '3-4', '--all', '--out', str(out)]) == 0
    assert len(out.read_text().splitlines()) == 8 + 64


def test_cli_errors(tmp_path, capsys):
    assert main(['pn', str(tmp_path / 'missing.txt')]) == 2
    bad = tmp_path / 'bad.txt'
    bad.write_text('not a digraph\n')
    assert main(['classify', str(bad)]) == 2
    save_digraph(Digraph.cycle(4), bad)
    assert main(['classify', str(bad)]) == 2
    with pytest.raises(SystemExit):
        main(['verify', '--n', '5-3', '--all', '--out', 'x'])
