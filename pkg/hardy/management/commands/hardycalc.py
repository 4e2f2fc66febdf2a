import io
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from django.core.management import BaseCommand, CommandError

from hardy.config import VerificationConfig
from hardy.services.corridors.corridor_service import CorridorService
from hardy.services.reports.report_service import ReportService
from hardy.services.runs.run_service import RunService
from hardy.services.verification.context import CheckContext
from hardy.services.verification.registry import CHECKS, CheckOptions, build_family, check_names
from processors.exceptions import HardyCalcError
from processors.heat_kernels import free_heat_kernel, hardy_semigroup_apply, heat_envelope_shape, lm_bounds
from processors.radial_core import lp_norm, make_grid
from processors.spectral_calculus import (BandRange, decomposition_frame, fractional_power_apply, hormander_norms,
                                          imaginary_power, littlewood_paley_decomposition, riesz_mean,
                                          square_function)
from processors.special_functions import (Parameters, delta_from_coupling, free_kernel_tail_constant,
                                          lp_hardy_constant, riesz_constant)

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('constants', 'kernel', 'envelope', 'semigroup', 'lp-decompose', 'square-function',
               'hormander-norm', 'verify', 'verify-all', 'list-checks', 'certify')

# flag defaults; None means "take the configuration value"
DEFAULTS = {
    'd': 3, 'alpha': 1.0, 'a': 0.0, 's': 1.0, 'p': 2.0, 'q': None, 't': 1.0, 'r': None, 'x': 1.0, 'y': 1.0,
    'grid_min': None, 'grid_max': None, 'grid_n': None, 'bands': None, 'steps': None, 'family': 'gaussian',
    'out': None, 'fixtures': None, 'jobs': None, 'a_tilde': None, 'multiplier': 'riesz-mean', 'beta': 1.0,
    'check': None,
}

# value types of the numeric options, enforced on --config content
FIELD_TYPES = {
    'd': int, 'alpha': float, 'a': float, 's': float, 'p': float, 'q': float, 't': float, 'x': float, 'y': float,
    'grid_min': float, 'grid_max': float, 'grid_n': int, 'steps': int, 'jobs': int, 'a_tilde': float, 'beta': float,
}


def _coerce(settings: dict) -> dict:
    for name, kind in FIELD_TYPES.items():
        value = settings[name]
        if value is None and DEFAULTS[name] is None:
            continue
        try:
            settings[name] = kind(value)
        except (TypeError, ValueError):
            raise CommandError(f"--config: field {name} expects {kind.__name__}, got {value!r}",
                               returncode=2) from None
    return settings


def _parse_bands(text: str) -> BandRange:
    try:
        j_min, j_max = (int(part) for part in str(text).split(':'))
    except ValueError:
        raise CommandError(f"--bands: expected jmin:jmax, got {text!r}", returncode=2) from None
    return BandRange(j_min, j_max)


def _parse_floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(part) for part in str(text).split(',')]
    except ValueError:
        raise CommandError(f"--r: expected comma separated numbers, got {text!r}", returncode=2) from None


class Command(BaseCommand):
    help = ('Spectral calculus of the generalized Hardy operator: constants, heat kernels, '
            'Littlewood-Paley pieces and verification of the inequalities on trial families.')
    requires_system_checks: list[str] = []

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='command', required=True)
        for name in SUBCOMMANDS:
            sub = subparsers.add_parser(name)
            if name in ('verify', 'certify'):
                sub.add_argument('check', choices=sorted(CHECKS), help='Check name, see list-checks')
            self._add_common(sub)

    @staticmethod
    def _add_common(parser):
        parser.add_argument('--config', type=str, help='JSON file with option values; flags override it')
        parser.add_argument('--d', type=int, help='Dimension')
        parser.add_argument('--alpha', type=float, help='Order of the fractional Laplacian')
        parser.add_argument('--a', type=float, help='Coupling constant')
        parser.add_argument('--s', type=float, help='Power order s in (0, 2]')
        parser.add_argument('--p', type=float, help='Lebesgue exponent')
        parser.add_argument('--q', type=float, help='Target exponent of the Bernstein check')
        parser.add_argument('--t', type=float, help='Time')
        parser.add_argument('--r', type=str, help='Distance |x - y|, or a comma separated list for kernel')
        parser.add_argument('--x', type=float, help='|x| for envelope')
        parser.add_argument('--y', type=float, help='|y| for envelope')
        parser.add_argument('--grid-min', type=float, dest='grid_min')
        parser.add_argument('--grid-max', type=float, dest='grid_max')
        parser.add_argument('--grid-n', type=int, dest='grid_n')
        parser.add_argument('--bands', type=str, help='Dyadic band range jmin:jmax')
        parser.add_argument('--steps', type=int, help='Strang steps per semigroup evaluation')
        parser.add_argument('--family', type=str, help='Trial family: gaussian, plateau, power_tail, near_extremal')
        parser.add_argument('--out', type=str, help='Output directory for artifacts')
        parser.add_argument('--fixtures', type=str, help='Frozen corridor file (HARDY_CALC_FIXTURES wins)')
        parser.add_argument('--jobs', type=int, help='Checks run in parallel')
        parser.add_argument('--a-tilde', type=float, dest='a_tilde', help='Upper coupling of the sandwich check')
        parser.add_argument('--multiplier', type=str, choices=('constant', 'imaginary-power', 'riesz-mean'))
        parser.add_argument('--beta', type=float, help='Riesz mean exponent')

    def handle(self, *args: Any, **options: Any) -> None:
        command = options['command']
        settings = self._resolve(options)
        try:
            getattr(self, f"_{command.replace('-', '_')}")(settings)
        except HardyCalcError as e:
            raise CommandError(f"{command}: {e}", returncode=2) from e

    def _resolve(self, options: dict) -> dict:
        """Defaults, then the --config file, then explicit flags."""
        settings = dict(DEFAULTS)
        if options.get('config'):
            path = Path(options['config'])
            try:
                from_file = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise CommandError(f"--config: cannot read {path}: {e}", returncode=2) from e
            unknown = sorted(set(from_file) - set(DEFAULTS))
            if unknown:
                raise CommandError(f"--config: unknown field(s) {', '.join(unknown)}", returncode=2)
            settings.update(from_file)
        settings.update({key: value for key, value in options.items() if key in DEFAULTS and value is not None})
        settings['command'] = options['command']
        return _coerce(settings)

    @staticmethod
    def _params(settings: dict) -> Parameters:
        try:
            return Parameters(d=int(settings['d']), alpha=float(settings['alpha']), a=float(settings['a']),
                              s=float(settings['s']), p=float(settings['p']))
        except HardyCalcError as e:
            raise CommandError(f"parameters: {e}", returncode=2) from e

    @staticmethod
    def _context(settings: dict, d: int) -> CheckContext:
        grid = make_grid(settings['grid_min'] or VerificationConfig.GRID_MIN,
                         settings['grid_max'] or VerificationConfig.GRID_MAX,
                         settings['grid_n'] or VerificationConfig.GRID_N, d)
        overrides = {'grid': grid}
        if settings['steps']:
            overrides['n_steps'] = int(settings['steps'])
        if settings['bands']:
            overrides['band_range'] = _parse_bands(settings['bands'])
        if settings['jobs']:
            overrides['jobs'] = int(settings['jobs'])
        return CheckContext.from_config(d, **overrides)

    @staticmethod
    def _options(settings: dict) -> CheckOptions:
        return CheckOptions(family=settings['family'], q=settings['q'], a_tilde=settings['a_tilde'])

    def _emit(self, settings: dict, document: dict, filename: str) -> None:
        text = ReportService.dumps(document)
        if settings['out']:
            path = ReportService.write_document(document, Path(settings['out']) / filename)
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
        else:
            self.stdout.write(text, ending='')

    def _emit_frame(self, settings: dict, frame: pd.DataFrame, filename: str) -> None:
        if settings['out']:
            path = Path(settings['out']) / filename
            path.parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(path, index=False, float_format='%.17g')
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
        else:
            buffer = io.StringIO()
            frame.to_csv(buffer, index=False, float_format='%.17g')
            self.stdout.write(buffer.getvalue(), ending='')

    def _constants(self, settings: dict) -> None:
        params = self._params(settings)
        d, alpha, p = params.d, params.alpha, params.p
        document = {
            'a_star': params.a_star,
            'hardy_c_p2': lp_hardy_constant(d, alpha, 2.0),
            'hardy_c_p': lp_hardy_constant(d, alpha, p),
            'riesz_c': riesz_constant(d, alpha),
            'delta': delta_from_coupling(params.a, d, alpha),
            'free_kernel_tail': free_kernel_tail_constant(d, alpha),
        }
        self._emit(settings, document, 'constants.json')

    def _kernel(self, settings: dict) -> None:
        d, alpha, t = int(settings['d']), float(settings['alpha']), float(settings['t'])
        radii = _parse_floats(settings['r'] if settings['r'] is not None else 0.0)
        frame = pd.DataFrame({'t': t, 'r': radii, 'value': [free_heat_kernel(t, r, d, alpha) for r in radii]})
        self._emit_frame(settings, frame, 'kernel.csv')

    def _envelope(self, settings: dict) -> None:
        params = self._params(settings)
        t, x, y = float(settings['t']), float(settings['x']), float(settings['y'])
        dist = _parse_floats(settings['r'])[0] if settings['r'] is not None else abs(x - y)
        shape = heat_envelope_shape(t, x, y, dist, params)
        document = {'t': t, 'x': x, 'y': y, 'dist': dist, 'envelope_shape': shape}
        if params.a >= 0 and x > 0 and y > 0:
            document['L'], document['M'] = lm_bounds(t, x, y, dist, params)
        self._emit(settings, document, 'envelope.json')

    def _trial(self, settings: dict, params: Parameters, context: CheckContext):
        family = build_family(self._options(settings))
        return family.members(context.grid, params.alpha, params.p)[len(family.scale_set) // 2][1]

    def _semigroup(self, settings: dict) -> None:
        params = self._params(settings)
        context = self._context(settings, params.d)
        f = self._trial(settings, params, context)
        evolved = hardy_semigroup_apply(f, float(settings['t']), params, context.n_steps)
        self._emit_frame(settings, evolved.to_frame(), 'semigroup.csv')

    def _lp_decompose(self, settings: dict) -> None:
        params = self._params(settings)
        context = self._context(settings, params.d)
        bands = littlewood_paley_decomposition(self._trial(settings, params, context), params,
                                               context.band_range, context.n_steps, context.jobs)
        self._emit_frame(settings, decomposition_frame(bands), 'decomposition.csv')

    def _square_function(self, settings: dict) -> None:
        params = self._params(settings)
        context = self._context(settings, params.d)
        f = self._trial(settings, params, context)
        square = square_function(f, params.s, params, context.band_range, context.n_steps, context.jobs)
        power = fractional_power_apply(f, params.s, 'positive', params, context.n_steps)
        square_norm, power_norm = lp_norm(square, params.p), lp_norm(power, params.p)
        document = {
            'params': params.as_dict(),
            'square_function_norm': square_norm,
            'power_norm': power_norm,
            'ratio': square_norm / power_norm if power_norm > 0 else None,
            'tail_relative': square.metadata['tail_relative'],
            'bands': [context.band_range.j_min, context.band_range.j_max],
        }
        self._emit(settings, document, 'square_function.json')

    def _hormander_norm(self, settings: dict) -> None:
        s, beta = float(settings['s']), float(settings['beta'])
        multipliers = {
            'constant': lambda lam: np.ones_like(lam),
            'imaginary-power': imaginary_power(1.0),
            'riesz-mean': riesz_mean(beta),
        }
        norms = hormander_norms(multipliers[settings['multiplier']], s)
        document = {'multiplier': settings['multiplier'], 's': s, 'norm': float(norms.max()),
                    'variation': float(norms.max() / norms.min() - 1)}
        if settings['multiplier'] == 'riesz-mean':
            document['beta'] = beta
        self._emit(settings, document, 'hormander.json')

    def _fixtures(self, settings: dict) -> Path:
        return VerificationConfig.fixtures_path(settings['fixtures'])

    def _finish(self, settings: dict, reports) -> None:
        for report in reports:
            style = self.style.SUCCESS if report.passed else self.style.WARNING
            self.stdout.write(style(ReportService.summary_line(report)))
        if settings['out']:
            path = ReportService.write_reports(reports, Path(settings['out']), settings['command'],
                                               {key: settings[key] for key in DEFAULTS})
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
        else:
            self.stdout.write(ReportService.dumps(ReportService.document(reports)), ending='')
        if RunService.exit_status(reports):
            raise CommandError('at least one check failed', returncode=1)

    def _verify(self, settings: dict) -> None:
        params = self._params(settings)
        context = self._context(settings, params.d)
        report = RunService.run_one(settings['check'], params, context, self._fixtures(settings),
                                    self._options(settings))
        self._finish(settings, [report])

    def _verify_all(self, settings: dict) -> None:
        params = self._params(settings)
        context = self._context(settings, params.d)
        jobs = int(settings['jobs'] or VerificationConfig.JOBS)
        reports = RunService.run_all(params, context.with_(jobs=1), self._fixtures(settings),
                                     self._options(settings), jobs=jobs)
        self._finish(settings, reports)

    def _list_checks(self, settings: dict) -> None:
        for name in check_names():
            self.stdout.write(f"{name:<22} {CHECKS[name].description}")

    def _certify(self, settings: dict) -> None:
        params = self._params(settings)
        context = self._context(settings, params.d)
        path = self._fixtures(settings)
        certified = CorridorService.certify(settings['check'], params, context, path, self._options(settings))
        low, high = certified.corridor
        self.stdout.write(self.style.SUCCESS(f"Froze {certified.key}: [{low:.17g}, {high:.17g}] in {path}"))
