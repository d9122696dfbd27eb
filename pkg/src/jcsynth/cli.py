"""Scenario runner: reproduces each figure-style run as a deterministic CSV.

Configuration is a flat key-value text file plus flag overrides (flags win).
Every run is deterministic: identical configuration gives byte-identical
output (fixed metadata order, 17-significant-digit floats, fixed sector
order, no timestamps).

Exit status: 0 on success, 2 when the worst residual outside regularized
windows exceeds --max-residual, 1 on configuration or integration errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    BoseEinsteinStatistics,
    PhysicalParams,
    PoissonStatistics,
    TimeGrid,
)
from .coupling import (
    ConstantCoupling,
    SqrtTimeCoupling,
    delta_lambda,
    gipa,
    ipa,
    regularized_window_mask,
)
from .deformation import deformed_scenario
from .exceptions import ConfigError, DomainError, IntegrationError
from .propagation import run_gipa_pipeline, single_sector_scenario
from .targets import (
    CoherentSeriesTarget,
    ConstantCouplingTarget,
    CosSquaredTarget,
    DeformedCoherentSeriesTarget,
    SqrtTimeTarget,
    constant_coupling_family,
    cos_squared_family,
)

STANDARD_HEADER = ("t", "target_w", "coupling", "reproduced_w", "residual")
FIG3_HEADER = STANDARD_HEADER + ("delta_w", "delta_lambda")
SWEEP_HEADER = ("epsilon", "max_abs_delta_w", "max_abs_delta_lambda")

#: per-scenario default (t_end, n_samples); t_start defaults to 0
DEFAULT_GRIDS = {
    "fig1_sqrt_coupling": (6.0, 1201),
    "fig2_vacuum_ipa_coherent": (25.0, 2001),
    "fig3_deformed_deltas": (25.0, 2001),
    "fig4_cos_squared_fock": (6.0, 1201),
    "fig5_roundtrip_demo": (25.0, 2001),
    "fig6_thermal": (25.0, 2001),
    "sweep": (25.0, 2001),
}
SCENARIOS = tuple(DEFAULT_GRIDS)

_CONFIG_KEYS = (
    "scenario", "out", "lambda0", "zeta", "mean_n", "epsilon", "detuning",
    "t_start", "t_end", "samples", "tail_tol", "eta", "max_residual", "fock_n",
)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: PhysicalParams
    grid: TimeGrid
    out: Path
    tail_tol: float = 1e-12
    eta: float = 1e-6
    max_residual: float = 1e-4
    fock_n: int = 5


def parse_config_file(path) -> dict[str, str]:
    """Flat `key = value` file; `#` starts a comment; keys must be known."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`, got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _to_float(field: str, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field {field!r}: expected a number, got {value!r}") from None


def _to_int(field: str, value) -> int:
    try:
        return int(str(value), 10)
    except (TypeError, ValueError):
        raise ConfigError(f"field {field!r}: expected an integer, got {value!r}") from None


def build_config(file_values: dict[str, str] | None, overrides: dict | None = None) -> ScenarioConfig:
    """Merge config-file values and flag overrides (flags win) into a config."""
    merged: dict = dict(file_values or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    scenario = merged.get("scenario")
    if scenario is None:
        raise ConfigError("field 'scenario': missing (choose one of: " + ", ".join(SCENARIOS) + ")")
    if scenario not in SCENARIOS:
        raise ConfigError(f"field 'scenario': unknown scenario {scenario!r} "
                          f"(choose one of: {', '.join(SCENARIOS)})")

    try:
        params = PhysicalParams(
            lambda0=_to_float("lambda0", merged.get("lambda0", 1.0)),
            zeta=_to_float("zeta", merged.get("zeta", 1.0)),
            epsilon=_to_float("epsilon", merged.get("epsilon", 5e-4)),
            mean_n=_to_float("mean_n", merged.get("mean_n", 5.0)),
            detuning=_to_float("detuning", merged.get("detuning", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    t_end_default, samples_default = DEFAULT_GRIDS[scenario]
    try:
        grid = TimeGrid(
            t_start=_to_float("t_start", merged.get("t_start", 0.0)),
            t_end=_to_float("t_end", merged.get("t_end", t_end_default)),
            n_samples=_to_int("samples", merged.get("samples", samples_default)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    tail_tol = _to_float("tail_tol", merged.get("tail_tol", 1e-12))
    if not 0.0 < tail_tol < 1.0:
        raise ConfigError(f"field 'tail_tol': must lie in (0, 1), got {tail_tol!r}")
    eta = _to_float("eta", merged.get("eta", 1e-6))
    if eta <= 0.0:
        raise ConfigError(f"field 'eta': must be positive, got {eta!r}")
    max_residual = _to_float("max_residual", merged.get("max_residual", 1e-4))
    if max_residual <= 0.0:
        raise ConfigError(f"field 'max_residual': must be positive, got {max_residual!r}")
    fock_n = _to_int("fock_n", merged.get("fock_n", 5))
    if fock_n < 0:
        raise ConfigError(f"field 'fock_n': must be >= 0, got {fock_n!r}")

    out = Path(merged.get("out", f"{scenario}.csv"))
    return ScenarioConfig(scenario=scenario, params=params, grid=grid, out=out,
                          tail_tol=tail_tol, eta=eta, max_residual=max_residual,
                          fock_n=fock_n)


def effective_settings(config: ScenarioConfig) -> list[tuple[str, str]]:
    p, g = config.params, config.grid
    return [
        ("scenario", config.scenario),
        ("out", str(config.out)),
        ("lambda0", repr(p.lambda0)),
        ("zeta", repr(p.zeta)),
        ("mean_n", repr(p.mean_n)),
        ("epsilon", repr(p.epsilon)),
        ("detuning", repr(p.detuning)),
        ("t_start", repr(g.t_start)),
        ("t_end", repr(g.t_end)),
        ("samples", str(g.n_samples)),
        ("tail_tol", repr(config.tail_tol)),
        ("eta", repr(config.eta)),
        ("max_residual", repr(config.max_residual)),
        ("fock_n", str(config.fock_n)),
    ]


def validate(config_path, overrides: dict | None = None,
             stream=None) -> ScenarioConfig:
    """Parse and validate without running; print the effective settings."""
    stream = stream if stream is not None else sys.stdout
    file_values = parse_config_file(config_path) if config_path else None
    config = build_config(file_values, overrides)
    for key, value in effective_settings(config):
        print(f"{key} = {value}", file=stream)
    return config


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class _CsvPayload:
    path: Path
    header: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    metadata: tuple[tuple[str, str], ...]
    gated_residual: float | None  # worst |residual| outside regularized windows


def _masked_residual(result, steps: int = 3) -> float:
    mask = regularized_window_mask(result.grid.n_samples, result.regularized_indices, steps)
    outside = np.abs(result.residuals)[~mask]
    return float(np.max(outside)) if outside.size else 0.0


def _result_payload(config: ScenarioConfig, result, path: Path,
                    extra_cols: tuple = (), extra_header: tuple[str, ...] = ()) -> _CsvPayload:
    metadata = (
        ("tool", f"jcsynth {__version__}"),
        *effective_settings(config),
        ("norm_drift", _fmt(result.norm_drift)),
        ("regularized_indices", ";".join(str(i) for i in result.regularized_indices)),
    )
    columns = (result.grid.times, result.target_w, result.coupling_values,
               result.reproduced_w, result.residuals, *extra_cols)
    return _CsvPayload(
        path=path,
        header=STANDARD_HEADER + tuple(extra_header),
        columns=columns,
        metadata=metadata,
        gated_residual=_masked_residual(result),
    )


def _build_payloads(config: ScenarioConfig) -> list[_CsvPayload]:
    params, grid = config.params, config.grid
    name = config.scenario

    if name == "fig1_sqrt_coupling":
        target = SqrtTimeTarget(params)
        coupling = SqrtTimeCoupling(params.lambda0, params.zeta)
        result = single_sector_scenario(target, coupling, 0, grid)
        return [_result_payload(config, result, config.out)]

    if name == "fig2_vacuum_ipa_coherent":
        target = CoherentSeriesTarget(params, config.tail_tol)
        coupling = ipa(target, grid, eta=config.eta)
        result = single_sector_scenario(target, coupling, 0, grid)
        return [_result_payload(config, result, config.out)]

    if name == "fig3_deformed_deltas":
        comparison = deformed_scenario(params, grid, tail_tol=config.tail_tol,
                                       eta=config.eta, include_gipa=False)
        return [_result_payload(config, comparison.deformed, config.out,
                                extra_cols=(comparison.delta_w, comparison.delta_lambda),
                                extra_header=("delta_w", "delta_lambda"))]

    if name == "fig4_cos_squared_fock":
        target = CosSquaredTarget(config.fock_n, params)
        coupling = gipa(target, config.fock_n, grid, eta=config.eta)
        result = single_sector_scenario(target, coupling, config.fock_n, grid)
        return [_result_payload(config, result, config.out)]

    if name == "fig5_roundtrip_demo":
        result = run_gipa_pipeline(
            constant_coupling_family(params), PoissonStatistics(params.mean_n),
            params, grid, tail_tol=config.tail_tol, eta=config.eta,
        )
        return [_result_payload(config, result, config.out)]

    if name == "fig6_thermal":
        stats = BoseEinsteinStatistics(params.mean_n)
        gipa_run = run_gipa_pipeline(
            cos_squared_family(params), stats, params, grid,
            tail_tol=config.tail_tol, eta=config.eta,
        )
        constant_run = run_gipa_pipeline(
            constant_coupling_family(params), stats, params, grid,
            tail_tol=config.tail_tol, eta=config.eta,
            coupling_factory=lambda n, target: ConstantCoupling(params.lambda0),
        )
        companion = config.out.with_name(config.out.stem + "_constant" + config.out.suffix)
        return [
            _result_payload(config, gipa_run, config.out),
            _result_payload(config, constant_run, companion),
        ]

    if name == "sweep":
        if params.epsilon <= 0.0:
            raise ConfigError("field 'epsilon': sweep requires epsilon > 0")
        ladder = [params.epsilon / 4.0, params.epsilon / 2.0, params.epsilon]
        rows_eps, rows_dw, rows_dl = [], [], []
        undeformed = CoherentSeriesTarget(replace(params, epsilon=0.0), config.tail_tol)
        lam_undeformed = ipa(undeformed, grid, eta=config.eta)
        for eps in ladder:
            p_eps = replace(params, epsilon=eps)
            deformed = DeformedCoherentSeriesTarget(p_eps, config.tail_tol)
            lam_deformed = ipa(deformed, grid, eta=config.eta)
            rows_eps.append(eps)
            rows_dw.append(float(np.max(np.abs(
                np.asarray(deformed(grid.times)) - np.asarray(undeformed(grid.times))
            ))))
            rows_dl.append(float(np.max(np.abs(
                delta_lambda(lam_deformed, lam_undeformed, grid)
            ))))
        metadata = (("tool", f"jcsynth {__version__}"), *effective_settings(config))
        return [_CsvPayload(
            path=config.out,
            header=SWEEP_HEADER,
            columns=(np.asarray(rows_eps), np.asarray(rows_dw), np.asarray(rows_dl)),
            metadata=metadata,
            gated_residual=None,
        )]

    raise ConfigError(f"unknown scenario {name!r}")  # unreachable after build_config


def _write_payload(payload: _CsvPayload) -> None:
    lines = [f"# {key} = {value}" for key, value in payload.metadata]
    lines.append(",".join(payload.header))
    n_rows = len(payload.columns[0])
    for i in range(n_rows):
        lines.append(",".join(_fmt(col[i]) for col in payload.columns))
    payload.path.parent.mkdir(parents=True, exist_ok=True)
    with open(payload.path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run(config: ScenarioConfig) -> int:
    """Execute a scenario, write its CSV file(s), return the exit status."""
    payloads = _build_payloads(config)
    for payload in payloads:
        _write_payload(payload)
    worst = max((p.gated_residual for p in payloads if p.gated_residual is not None),
                default=0.0)
    return 2 if worst > config.max_residual else 0


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1, not argparse's 2)."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="jcsynth",
        description="Evaluate, synthesize and verify Jaynes-Cummings "
                    "population-inversion scenarios; output is CSV.",
    )
    parser.add_argument("--scenario", metavar="NAME",
                        help="scenario to run: " + ", ".join(SCENARIOS))
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--out", help="output CSV path (default: <scenario>.csv)")
    parser.add_argument("--lambda0", type=float, help="coupling amplitude (default 1)")
    parser.add_argument("--zeta", type=float, help="sqrt-time rate (default 1)")
    parser.add_argument("--mean-n", type=float, dest="mean_n",
                        help="mean photon number (default 5)")
    parser.add_argument("--epsilon", type=float, help="deformation parameter (default 5e-4)")
    parser.add_argument("--t-end", type=float, dest="t_end", help="grid end time")
    parser.add_argument("--samples", type=int, help="number of grid samples")
    parser.add_argument("--tail-tol", type=float, dest="tail_tol",
                        help="truncated tail mass of the photon sums (default 1e-12)")
    parser.add_argument("--eta", type=float, help="singularity threshold (default 1e-6)")
    parser.add_argument("--max-residual", type=float, dest="max_residual",
                        help="exit 2 when residuals outside regularized windows "
                             "exceed this (default 1e-4)")
    parser.add_argument("--fock-n", type=int, dest="fock_n",
                        help="Fock number for fig4 (default 5)")
    parser.add_argument("--validate-only", action="store_true",
                        help="validate the configuration, print effective settings, exit")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        overrides = {
            "scenario": args.scenario,
            "out": args.out,
            "lambda0": args.lambda0,
            "zeta": args.zeta,
            "mean_n": args.mean_n,
            "epsilon": args.epsilon,
            "t_end": args.t_end,
            "samples": args.samples,
            "tail_tol": args.tail_tol,
            "eta": args.eta,
            "max_residual": args.max_residual,
            "fock_n": args.fock_n,
        }
        if args.validate_only:
            validate(args.config, overrides)
            return 0
        file_values = parse_config_file(args.config) if args.config else None
        config = build_config(file_values, overrides)
        return run(config)
    except ConfigError as exc:
        print(f"jcsynth: configuration error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, IntegrationError) as exc:
        print(f"jcsynth: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"jcsynth: i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
