import argparse
import csv
import io
import json
import math
import sys
import time
import traceback
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import wraps
from itertools import pairwise
from typing import Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from sentry_sdk import capture_exception, trace

from loopmaps.config import THREADS, VERSION
from loopmaps.context_logger import context_logger, context_print, drain
from loopmaps.deviation import J, J_prime, J_second, arm_jmath, gaussian_variance, p_opt
from loopmaps.disk import solve_endpoints_full
from loopmaps.enumerate import brute_force_enumerate
from loopmaps.errors import DomainError, LoopmapsError
from loopmaps.model import (
    ModelContext,
    critical_line,
    delta_closed_form,
    phase_constants,
    q_star_dilute,
    rho_bounds,
)
from loopmaps.nesting import BoundarySpec, enumerate_nesting_graphs, kappa_exponent, volume_exponent
from loopmaps.series import MultiSeries, SeriesRing, renormalized_weights
from loopmaps.toprec import TopologicalRecursion
from loopmaps.utils import max_relative_deviation

_RESIDUAL_TOL = 1e-10
_ORACLE_TOL = 1e-8
_SYMMETRY_TOL = 1e-9
_FULLY_PACKED_TOL = 1e-8
_DEFAULT_P_GRID = (0.1, 0.3, 1 / math.sqrt(3), 1.0, 2.0, 5.0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    n: float = 1.0
    alpha: float = 1.0
    rho: float | None = None
    # number of rho values between rho_min and rho_max, 0 for the single --rho row
    scan: int = Field(0, ge=0)
    u: float = 1.0
    g: float | None = None
    h: float | None = None
    phase: Literal['dense', 'dilute'] = 'dense'
    genus: int = Field(0, ge=0)
    boundaries: int = Field(1, ge=0)
    marked: int = Field(0, ge=0)
    spec: str | None = None
    flavor: Literal['loop', 'usual'] = 'loop'
    caps: int = Field(4, ge=1)
    perimeter: int = Field(2, ge=1)
    p: tuple[float, ...] = _DEFAULT_P_GRID
    inject: bool = False
    out: str | None = None
    format: Literal['csv', 'json'] = 'csv'


class Column(NamedTuple):
    name: str
    type: str
    description: str


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str = ''


@dataclass
class Report:
    command: str
    rows: list[tuple] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    log: list[str] = field(default_factory=list)

    @property
    def columns(self) -> tuple[Column, ...]:
        return SCHEMAS[self.command]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


SCHEMAS: dict[str, tuple[Column, ...]] = {
    'phase': (
        Column('rho', 'float', 'position on the critical line of the model without bending energy'),
        Column('g_over_h', 'float', 'ratio of the unvisited to the visited face weight'),
        Column('h_squared', 'float', 'visited face weight squared'),
        Column('phase', 'str', 'dilute at rho_min, dense above'),
        Column('c', 'float', 'string exponent, q ~ (1 - u)^c'),
        Column('q_star', 'float', 'constant of q ~ ((1 - u) / q_star)^c'),
    ),
    'endpoints': (
        Column('gm', 'float', 'left endpoint of the cut'),
        Column('gp', 'float', 'right endpoint of the cut'),
        Column('T', 'float', 'half period of the elliptic parametrization'),
        Column('q', 'float', 'nome'),
        Column('residual', 'float', 'max |G| at both endpoints'),
        Column('iterations', 'int', 'Newton steps of the last continuation rung'),
    ),
    'toprec': (
        Column('legs', 'str', 'colored legs l:eps of the coefficient'),
        Column('recursion_re', 'float', 'real part from the recursion'),
        Column('recursion_im', 'float', 'imaginary part from the recursion'),
        Column('graph_sum_re', 'float', 'real part from the graph sum'),
        Column('graph_sum_im', 'float', 'imaginary part from the graph sum'),
    ),
    'nesting': (
        Column('graph', 'int', 'index in the enumeration'),
        Column('description', 'str', 'vertices with genus and marks, then edges'),
        Column('k_half_leaves', 'int', 'small boundaries alone on genus 0 leaves'),
        Column('kappa', 'float', 'exponent of q, empty when 2g - 2 + k <= 0'),
        Column('volume_exponent', 'float', 'exponent of V, empty when 2g - 2 + k <= 0'),
        Column('jmath', 'str', 'arm normalization per edge, edge:j'),
    ),
    'deviation': (
        Column('p', 'float', 'reduced arm length'),
        Column('J', 'float', 'rate function'),
        Column('J_prime', 'float', 'first derivative of J'),
        Column('J_second', 'float', 'second derivative of J'),
        Column('rate_j1', 'float', 'c J / pi'),
        Column('rate_j2', 'float', 'c J / (2 pi)'),
        Column('variance_j1', 'float', 'Gaussian variance of arms with j = 1'),
        Column('variance_j2', 'float', 'Gaussian variance of arms with j = 2'),
    ),
    'series-check': (
        Column('quantity', 'str', 'disk or pointed-disk'),
        Column('perimeter', 'int', 'boundary perimeter'),
        Column('monomial', 'str', 'monomial where the series and the enumeration differ'),
        Column('series', 'str', 'exact coefficient from the nested-loop series'),
        Column('oracle', 'str', 'exact coefficient from brute-force enumeration'),
        Column('delta', 'str', 'series - oracle'),
    ),
}


def _logged(func: Callable, *args) -> tuple:
    """Run func collecting its messages; on failure they are replayed to the enclosing logger first."""
    with context_logger() as queue:
        try:
            return func(*args), drain(queue)
        except Exception as e:
            error, log = e, drain(queue)
    for line in log:
        context_print(line)
    raise error


def _scan(func: Callable, points: Sequence) -> list:
    """Evaluate func over the points on THREADS workers; results and logs are merged in input order."""
    with ThreadPoolExecutor(max_workers=max(THREADS, 1)) as executor:
        results = list(executor.map(lambda point: _logged(func, point), points))

    values = []
    for value, log in results:
        for line in log:
            context_print(line)
        values.append(value)
    return values


def _model_context(config: RunConfig) -> ModelContext:
    if config.g is not None and config.h is not None:
        return ModelContext(n=config.n, alpha=config.alpha, g=config.g, h=config.h, u=config.u)
    if config.rho is not None:
        if config.alpha != 1:
            raise DomainError(f'The critical line is parametrized at alpha = 1, got {config.alpha!r}')
        return ModelContext.on_critical_line(config.n, config.rho, config.u)
    raise DomainError('Model weights need either --g and --h or --rho')


def _spec(config: RunConfig) -> BoundarySpec:
    if config.spec is None:
        return BoundarySpec.all_large(config.boundaries, config.marked)
    spec = BoundarySpec.from_string(config.spec, config.marked)
    if spec.n_boundaries != config.boundaries:
        raise DomainError(f'Spec {config.spec!r} describes {spec.n_boundaries} boundaries, not {config.boundaries}')
    return spec


@trace
def cmd_phase(config: RunConfig) -> Report:
    if config.alpha != 1:
        raise DomainError(f'The critical line is parametrized at alpha = 1, got {config.alpha!r}')
    n = config.n
    bounds = rho_bounds(n)
    if config.scan:
        rhos = np.linspace(bounds.rho_min, bounds.rho_max, config.scan).tolist()
    elif config.rho is not None:
        rhos = [config.rho]
    else:
        raise DomainError('phase needs --rho or --scan')

    def row(rho: float) -> tuple:
        point = critical_line(n, rho)
        if math.isclose(rho, bounds.rho_min, rel_tol=0, abs_tol=1e-12):
            phase, q_star = 'dilute', q_star_dilute(n)
        else:
            phase, q_star = 'dense', delta_closed_form(n, rho)
        return rho, point.g_over_h, point.h_squared, phase, phase_constants(n, phase).c, q_star

    report = Report('phase', _scan(row, rhos))
    values = [value for r in report.rows for value in (r[1], r[2], r[4], r[5])]
    report.checks.append(Check('finite', all(math.isfinite(v) for v in values)))
    if config.scan:
        report.checks.append(Check('ordered', all(a[0] < b[0] for a, b in pairwise(report.rows))))
        last = report.rows[-1][1]
        report.checks.append(Check('fully-packed', abs(last) < _FULLY_PACKED_TOL, f'g/h at rho_max = {last!r}'))
    return report


@trace
def cmd_endpoints(config: RunConfig) -> Report:
    solution = solve_endpoints_full(_model_context(config))
    frame = solution.frame
    report = Report('endpoints')
    report.rows.append((solution.bp.gm, solution.bp.gp, frame.T, frame.q, solution.residual, solution.iterations))
    report.checks.append(Check('residual', solution.residual < _RESIDUAL_TOL, f'{solution.residual:.3e}'))
    return report


def _legs(key) -> str:
    return ' '.join(f'{leg.l}:{leg.eps:g}' for leg in key)


@trace
def cmd_toprec(config: RunConfig) -> Report:
    ctx = _model_context(config)
    frame = solve_endpoints_full(ctx).frame
    recursion = TopologicalRecursion(ctx, frame, config.flavor)
    table = recursion.table(config.genus, config.boundaries)
    graph_sum = recursion.graph_sum_C(config.genus, config.boundaries)

    report = Report('toprec')
    for key in sorted(set(table.entries) | set(graph_sum.entries)):
        left = table.entries.get(key, 0j)
        right = graph_sum.entries.get(key, 0j)
        report.rows.append((_legs(key), left.real, left.imag, right.real, right.imag))

    deviation = max_relative_deviation(table.entries, graph_sum.entries)
    defect = table.symmetry_defect()
    context_print(f'📐 Recursion vs graph sum: max deviation {deviation:.3e}')
    report.checks.append(Check('graph-sum', deviation < _ORACLE_TOL, f'{deviation:.3e}'))
    report.checks.append(Check('symmetry', defect < _SYMMETRY_TOL, f'{defect:.3e}'))
    return report


@trace
def cmd_nesting(config: RunConfig) -> Report:
    spec = _spec(config)
    graphs = enumerate_nesting_graphs(config.genus, config.boundaries, config.marked)
    stable = 2 * config.genus - 2 + spec.k > 0
    report = Report('nesting')
    for i, graph in enumerate(graphs):
        counts = graph.counts(spec)
        kappa = kappa_exponent(graph, spec, config.n, config.phase) if stable else None
        volume = volume_exponent(graph, spec, config.n, config.phase) if stable else None
        jmath = ' '.join(f'{e}:{j}' for e, j in arm_jmath(graph, spec).items())
        report.rows.append((i, graph.describe(), counts.k_half_leaves, kappa, volume, jmath))
    context_print(f'🕸️ {len(graphs)} nesting graphs for g={config.genus}, k={config.boundaries}, spec={spec}')
    report.checks.append(Check('nonempty', bool(graphs)))
    return report


@trace
def cmd_deviation(config: RunConfig) -> Report:
    n, phase = config.n, config.phase
    c = phase_constants(n, phase).c
    variances = gaussian_variance(1, n, phase), gaussian_variance(2, n, phase)

    def row(p: float) -> tuple:
        rate = J(p, n)
        return p, rate, J_prime(p, n), J_second(p, n), c * rate / math.pi, c * rate / (2 * math.pi), *variances

    report = Report('deviation', _scan(row, list(config.p)))
    typical = J(p_opt(n), n)
    report.checks.append(Check('typical-length', abs(typical) < 1e-12, f'J(p_opt)={typical!r}'))
    report.checks.append(Check('nonnegative', all(r[1] >= -1e-12 for r in report.rows)))
    return report


def _inject(value: MultiSeries) -> MultiSeries:
    """Perturb the lowest-order coefficient by one."""
    ring = value.ring
    monomial = min(value.terms, key=lambda m: (ring.degree(m), sum(m), m))
    return MultiSeries(ring, {**value.terms, monomial: value.terms[monomial] + 1})


@trace
def cmd_series_check(config: RunConfig) -> Report:
    ring = SeriesRing.loop_model(config.caps, refined=True)
    nested = renormalized_weights(ring, config.perimeter)
    tasks = [(quantity, p) for quantity in ('disk', 'pointed-disk') for p in range(1, config.perimeter + 1)]

    def compare(task: tuple[str, int]) -> tuple[str, int, list]:
        quantity, perimeter = task
        pointed = quantity == 'pointed-disk'
        value = nested.refined_pointed_disk(perimeter) if pointed else nested.on_disk(perimeter)
        if config.inject and task == tasks[0]:
            value = _inject(value)
        oracle = brute_force_enumerate(ring, perimeter, config.caps, pointed=pointed)
        return quantity, perimeter, value.compare(oracle)

    report = Report('series-check')
    for quantity, perimeter, diffs in _scan(compare, tasks):
        for diff in diffs:
            report.rows.append((quantity, perimeter, diff.monomial, str(diff.left), str(diff.right), str(diff.delta)))
        detail = '; '.join(f'{d.monomial}: {d.delta}' for d in diffs[:3])
        report.checks.append(Check(f'{quantity}-{perimeter}', not diffs, detail))
    return report


COMMANDS: dict[str, Callable[[RunConfig], Report]] = {
    'phase': cmd_phase,
    'endpoints': cmd_endpoints,
    'toprec': cmd_toprec,
    'nesting': cmd_nesting,
    'deviation': cmd_deviation,
    'series-check': cmd_series_check,
}


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(report: Report) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(column.name for column in report.columns)
    writer.writerows([_cell(value) for value in row] for row in report.rows)
    return buffer.getvalue()


def _json_value(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(report: Report) -> str:
    names = [column.name for column in report.columns]
    data = {
        'command': report.command,
        'version': VERSION,
        'columns': names,
        'rows': [dict(zip(names, map(_json_value, row), strict=True)) for row in report.rows],
        'checks': [check._asdict() for check in report.checks],
        'log': report.log,
    }
    return json.dumps(data, indent=2, ensure_ascii=False) + '\n'


def schema_json() -> str:
    return json.dumps({name: [c._asdict() for c in columns] for name, columns in SCHEMAS.items()}, indent=2) + '\n'


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, 'w', encoding='utf-8') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def main_timer(func):
    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()

        try:
            exit_code = func(*args, **kwargs)
        except LoopmapsError as e:
            capture_exception(e)
            context_print(f'[⛔] {e}')
            sys.stdout.write(json.dumps(e.to_dict(), ensure_ascii=False) + '\n')
            exit_code = 2
        except Exception as e:
            capture_exception(e)
            context_print(traceback.format_exc())
            exit_code = 3

        total_time = time.perf_counter() - start_time
        context_print(f'🏁 Total time: {total_time:.1F} sec')
        return exit_code

    return wrapper


@main_timer
@trace
def main(command: str, config: RunConfig) -> int:
    if command == 'schema':
        _emit(schema_json(), config.out)
        return 0

    report, log = _logged(COMMANDS[command], config)
    for line in log:
        context_print(line)
    report.log = log

    _emit(write_json(report) if config.format == 'json' else write_csv(report), config.out)
    for check in report.checks:
        if check.passed:
            context_print(f'✅ {check.name}' + (f' ({check.detail})' if check.detail else ''))
        else:
            context_print(f'[⛔] Check failed: {check.name}' + (f' ({check.detail})' if check.detail else ''))
    return 0 if report.passed else 1


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--config', help='JSON run configuration; explicit flags take precedence')
    common.add_argument('--n', type=float, help='loop weight in (0, 2)')
    common.add_argument('--alpha', type=float, help='bending energy')
    common.add_argument('--rho', type=float, help='position on the critical line')
    common.add_argument('--scan', type=int, help='number of rho values from rho_min to rho_max')
    common.add_argument('--u', type=float, help='vertex weight')
    common.add_argument('--g', type=float, help='weight of faces without loop')
    common.add_argument('--h', type=float, help='weight of faces crossed by a loop')
    common.add_argument('--phase', choices=('dense', 'dilute'))
    common.add_argument('--genus', type=int)
    common.add_argument('--boundaries', type=int)
    common.add_argument('--marked', type=int, help='number of marked points')
    common.add_argument('--spec', help='boundary sizes, for example LLS')
    common.add_argument('--flavor', choices=('loop', 'usual'))
    common.add_argument('--caps', type=int, help='degree cap of exact series')
    common.add_argument('--perimeter', type=int, help='largest perimeter compared by series-check')
    common.add_argument('--p', type=float, nargs='+', help='grid of reduced arm lengths')
    common.add_argument('--inject', action='store_true', help='perturb one coefficient in series-check')
    common.add_argument('--out', help='output file, stdout by default')
    common.add_argument('--format', choices=('csv', 'json'))

    parser = argparse.ArgumentParser(prog='loopmaps', description='O(n) loop model on random maps')
    commands = parser.add_subparsers(dest='command', required=True)
    for name, columns in SCHEMAS.items():
        epilog = 'columns: ' + ', '.join(column.name for column in columns)
        commands.add_parser(name, parents=[common], epilog=epilog)
    commands.add_parser('schema', parents=[common], help='print the columns of every table as JSON')
    return parser


def load_config(given: dict) -> RunConfig:
    values = {}
    if path := given.pop('config', None):
        with open(path, encoding='utf-8') as f:
            values = json.load(f)
    return RunConfig.model_validate({**values, **given})


def cli(argv: Iterable[str] | None = None) -> int:
    args = vars(_parser().parse_args(None if argv is None else list(argv)))
    command = args.pop('command')
    try:
        config = load_config(args)
    except (OSError, ValueError) as e:
        context_print(f'[⛔] Invalid configuration: {e}')
        sys.stdout.write(json.dumps({'error': 'config', 'message': str(e)}) + '\n')
        return 2
    return main(command, config)


if __name__ == '__main__':
    sys.exit(cli())
