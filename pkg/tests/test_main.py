import csv
import io
import json
import math

import pytest

from loopmaps import main as cli_module
from loopmaps.deviation import J, p_opt
from loopmaps.main import SCHEMAS, RunConfig, cli, load_config


def run(capsys, *argv: str) -> tuple[int, str]:
    code = cli(argv)
    return code, capsys.readouterr().out


def csv_rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


class TestConfig:
    def test_flags_override_file(self, tmp_path):
        path = tmp_path / 'run.json'
        path.write_text(json.dumps({'n': 1.5, 'p': [1.0], 'format': 'json'}))
        config = load_config({'config': str(path), 'p': [2.0, 3.0]})
        assert config == RunConfig(n=1.5, p=(2.0, 3.0), format='json')

    def test_unknown_key(self, capsys, tmp_path):
        path = tmp_path / 'run.json'
        path.write_text(json.dumps({'bogus': 1}))
        code, out = run(capsys, 'deviation', '--config', str(path))
        assert code == 2
        assert json.loads(out)['error'] == 'config'


class TestCommands:
    def test_schema(self, capsys):
        code, out = run(capsys, 'schema')
        assert code == 0
        assert set(json.loads(out)) == set(SCHEMAS)

    def test_deviation(self, capsys):
        code, out = run(capsys, 'deviation', '--p', '0.5', '1.0', str(p_opt(1.0)))
        assert code == 0
        rows = csv_rows(out)
        assert [float(row['p']) for row in rows] == [0.5, 1.0, p_opt(1.0)]
        assert float(rows[1]['J']) == pytest.approx(J(1.0, 1.0))
        assert abs(float(rows[2]['J'])) < 1e-12
        assert float(rows[0]['J_second']) == pytest.approx(1 / (0.5 * 1.25))

    def test_deviation_domain(self, capsys):
        code, out = run(capsys, 'deviation', '--p', '-1')
        assert code == 2
        assert json.loads(out)['error'] == 'domain'

    def test_phase_scan(self, capsys):
        code, out = run(capsys, 'phase', '--scan', '5', '--format', 'json')
        assert code == 0
        data = json.loads(out)
        rows = data['rows']
        assert len(rows) == 5
        assert rows[0]['phase'] == 'dilute'
        assert rows[0]['g_over_h'] == pytest.approx(1 + math.sqrt(1 / 7), rel=1e-4)
        assert all(row['phase'] == 'dense' for row in rows[1:])
        assert abs(rows[-1]['g_over_h']) < 1e-8
        assert all(check['passed'] for check in data['checks'])

    def test_nesting(self, capsys):
        code, out = run(capsys, 'nesting', '--boundaries', '2', '--format', 'json')
        assert code == 0
        rows = json.loads(out)['rows']
        assert len(rows) == 2
        assert all(row['kappa'] is None for row in rows)

    def test_nesting_exponents(self, capsys):
        code, out = run(capsys, 'nesting', '--boundaries', '3', '--spec', 'SLL')
        assert code == 0
        rows = csv_rows(out)
        assert len(rows) == 8
        assert all(row['kappa'] for row in rows)

    def test_nesting_invalid_spec(self, capsys):
        code, out = run(capsys, 'nesting', '--boundaries', '2', '--spec', 'LX')
        assert code == 2
        assert json.loads(out)['error'] == 'domain'

    def test_series_check(self, capsys):
        code, out = run(capsys, 'series-check', '--caps', '2')
        assert code == 0
        assert csv_rows(out) == []

    def test_series_check_injected(self, capsys):
        code, out = run(capsys, 'series-check', '--caps', '2', '--inject', '--format', 'json')
        assert code == 1
        data = json.loads(out)
        (row,) = data['rows']
        assert row['quantity'] == 'disk'
        assert row['monomial'] == 'u^2*g'
        assert row['delta'] == '1'
        failed = [check['name'] for check in data['checks'] if not check['passed']]
        assert failed == ['disk-1']

    def test_deterministic(self, capsys, tmp_path):
        outputs = []
        for name in ('a.json', 'b.json'):
            path = tmp_path / name
            assert run(capsys, 'deviation', '--format', 'json', '--out', str(path))[0] == 0
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]

    def test_unexpected_error(self, capsys, monkeypatch):
        def broken(_config):
            raise RuntimeError('boom')

        monkeypatch.setitem(cli_module.COMMANDS, 'deviation', broken)
        code, _ = run(capsys, 'deviation')
        assert code == 3
