import json
import os
import sys
import pytest
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from analyze_lattices import EXIT_OK, EXIT_PROPERTY, EXIT_VALIDATION, dispatch, main
from report_builder import RunConfig


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_apq_json(capsys):
    code, out, _ = run(capsys, 'apq', '--p', '0.5', '--q', '1', '--reproducible')
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload['result']['value'] == pytest.approx(2.0, abs=1e-9)
    assert payload['metadata']['params'] == {'p': 0.5, 'q': 1.0, 'mc': 0, 'quadrature': False}
    assert 'timestamp' not in payload['metadata']


def test_apq_divergent_moment(capsys):
    code, out, err = run(capsys, 'apq', '--p', '1', '--q', '1')
    assert code == EXIT_VALIDATION
    assert "p must be < q" in err
    assert json.loads(out)['error'] == 'divergence'


def test_output_is_deterministic(capsys):
    argv = ['convexity', '--lattice', 'weightedlr:0.5:3', '--p', '0.5,1', '--trials', '50', '--reproducible']
    first = run(capsys, *argv)
    second = run(capsys, *argv, '--threads', '3')
    assert first[0] == EXIT_OK
    assert first[1] == second[1].replace('"threads": 3', '"threads": 1')


def test_hilbert_table_csv(capsys):
    code, out, _ = run(capsys, 'hilbert-table', '--n', '1', '--cells', '101', '--csv')
    assert code == EXIT_OK
    assert out.startswith('# subcommand: hilbert-table')
    lines = [line for line in out.splitlines() if not line.startswith('#')]
    assert lines[0] == 'n,grid_min,log_2n_minus_1,weak_l1_lb,cells_used'
    assert float(lines[1].split(',')[1]) == pytest.approx(0.0, abs=1e-9)


def test_hilbert_table_resolution_error(capsys):
    code, _, err = run(capsys, 'hilbert-table', '--n', '64', '--cells', '100')
    assert code == EXIT_VALIDATION
    assert "too coarse" in err


def test_fbl_norm(capsys):
    code, out, _ = run(capsys, 'fbl-norm', '--expr', '(add (abs (gen 0)) (abs (gen 1)))', '--space', 'lp:1:2',
                       '--budget', 'n=2,restarts=2,iters=40', '--reproducible')
    assert code == EXIT_OK
    result = json.loads(out)['result']
    assert result['lower'] == pytest.approx(2.0, abs=1e-6)
    assert result['upper'] == pytest.approx(2.0, abs=1e-6)
    assert result['space'] == 'lp:1:2'


def test_rejected_certificate_exits_with_witness(capsys):
    code, out, err = run(capsys, 'fbl-norm', '--expr', '(add (abs (gen 0)) (abs (gen 1)))', '--space', 'lp:1:2',
                         '--budget', 'n=2,restarts=2,iters=20', '--certificate', '1,0')
    assert code == EXIT_PROPERTY
    payload = json.loads(out)
    assert payload['error'] == 'certificate-rejected'
    assert len(payload['witness']) == 2
    assert "Property check failed" in err


def test_syntax_error_exit_code(capsys):
    code, _, err = run(capsys, 'expr-eval', '--expr', '(foo (gen 0))', '--assign', '0=1', '--table')
    assert code == EXIT_VALIDATION
    assert "position 1" in err


def test_expr_eval(capsys):
    code, out, _ = run(capsys, 'expr-eval', '--expr', '(sup (gen 0) (gen 1))', '--assign', '0=3,1=5')
    assert code == EXIT_OK
    result = json.loads(out)['result']
    assert result['value'] == 5.0
    assert result['expr'] == '(max (gen 0) (gen 1))'

    code, out, _ = run(capsys, 'expr-eval', '--expr', '(abs (gen 0))', '--elements', '1,-2,3')
    assert json.loads(out)['result']['value'] == [1.0, 2.0, 3.0]


def test_argument_validation(capsys):
    code, _, err = run(capsys, 'expr-eval', '--expr', '(gen 0)', '--threads', '0')
    assert code == EXIT_VALIDATION
    assert "--threads must be >= 1" in err
    assert "exactly one of --assign or --elements" in err


def test_output_file(tmp_path, capsys):
    path = tmp_path / 'mn.json'
    code, out, _ = run(capsys, 'mn-bound', '--p', '0.25', '--r', '0.5', '--q', '1', '--output', str(path))
    assert code == EXIT_OK
    assert out == ''
    result = json.loads(path.read_text(encoding='utf-8'))['result']
    assert result['s'] == pytest.approx(0.5)
    assert result['uniform_sup'] is None


def test_stable_sample_is_thread_independent(capsys):
    first = run(capsys, 'stable-sample', '--q', '1.5', '--n', '500', '--csv')
    second = run(capsys, 'stable-sample', '--q', '1.5', '--n', '500', '--csv', '--threads', '4')
    assert first[0] == EXIT_OK
    rows = [line for line in first[1].splitlines() if not line.startswith('#')]
    assert rows == [line for line in second[1].splitlines() if not line.startswith('#')]
    assert len(rows) == 501
    assert '# threads: 4' in second[1].splitlines()


def test_lemma_check_table(capsys):
    code, out, _ = run(capsys, 'lemma-check', '--n', '1,8', '--table')
    assert code == EXIT_OK
    assert 'minima_ordered' in out


def test_self_test_filter(capsys):
    code, out, _ = run(capsys, 'self-test', '--filter', 'apq-limit', '--reproducible')
    assert code == EXIT_OK
    rows = json.loads(out)['result']
    assert [row['criterion'] for row in rows] == ['apq-limit']


def test_dispatch_unknown_subcommand(capsys):
    assert dispatch(RunConfig('plot')) == EXIT_VALIDATION
    assert 'Unknown subcommand' in capsys.readouterr().err
