"""Command-line entry point: schedule inspection, sampling runs, and comparisons.

Exit codes: 0 on success, 1 for configuration problems, 2 for numerical
failures during sampling.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .config import CLIP_ORDERS, ConfigError, ExperimentConfig, load_config_mapping
from .guidance import (
    GUIDANCE_MODES,
    GuidanceConfig,
    compounding_scale,
    guide_interpolate,
    guide_negative,
)
from .importance import ImportanceCurve, compute_importance
from .metrics import (
    RunReport,
    moments_error,
    saturation_fraction,
    sliced_wasserstein,
    wasserstein_1d,
)
from .mixture import MIXTURE_PRESETS, MixtureModel, mixture_from_config, mixture_preset
from .postprocess import CLIP_METHODS, batch_clip
from .sampling import (
    CLIP_TIMING,
    NumericalError,
    SAMPLER_VARIANTS,
    SampleTrajectory,
    SamplerConfig,
    run_sampler,
)
from .schedules import SCHEDULE_KINDS, NoiseSchedule, build_schedule
from .seeding import STREAM_GROUND_TRUTH, STREAM_INITIAL_NOISE, stream
from .timesteps import TimestepSchedule, adaptive_schedule, equidistant_schedule, importance_schedule

__all__ = ["main", "run_experiment"]

TRAJECTORY_CHAIN_LIMIT = 8


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    # Defaults stay None so explicit flags can be told apart from absent ones
    # when merging with config files.
    add = parser.add_argument
    add("--config", action="append", default=None, metavar="FILE",
        help="JSON config file; explicit flags override its values")
    add("--schedule-kind", choices=SCHEDULE_KINDS, default=None)
    add("--num-train-steps", type=int, default=None, metavar="T")
    add("--beta-start", type=float, default=None)
    add("--beta-end", type=float, default=None)
    add("--importance-epsilon", type=float, default=None)
    add("--steps", type=int, default=None, metavar="N", help="inference step count")
    add("--theta", type=float, default=None, help="adaptive selection threshold in [0, 1]")
    add("--variant", choices=SAMPLER_VARIANTS, default=None)
    add("--gamma", type=float, default=None, help="re-noising proportion in [0, 1)")
    add("--cfg-mode", choices=GUIDANCE_MODES, default=None)
    add("--cfg-scale", type=float, default=None, metavar="OMEGA")
    add("--distill-omega", type=float, default=None)
    add("--condition", type=int, default=None, metavar="LABEL",
        help="mixture component used as the guidance condition")
    add("--negative-condition", type=int, default=None, metavar="LABEL",
        help="component used as the negative prediction; full mixture when absent")
    add("--clip-method", choices=CLIP_METHODS, default=None)
    add("--clip-alpha", type=float, default=None)
    add("--clip-beta", type=float, default=None)
    add("--clip-order", choices=CLIP_ORDERS, default=None)
    add("--clip-timing", choices=CLIP_TIMING, default=None)
    add("--quantile-q", type=float, default=None)
    add("--quantile-ceiling", type=float, default=None)
    add("--mixture", default=None, help="preset name or mixture JSON path")
    add("--batch", type=int, default=None)
    add("--seed", type=int, default=None)
    add("--directions", type=int, default=None, help="sliced-distance projection count")
    add("--out", default=None, help="output path (directory for schedule, file otherwise)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fewstep",
        description="Few-step diffusion sampling experiments on analytic mixture oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_schedule = sub.add_parser("schedule", help="emit importance curve and timestep schedules as CSV")
    _add_common_flags(p_schedule)

    p_sample = sub.add_parser("sample", help="run batch sampling and emit a JSON report")
    _add_common_flags(p_sample)
    p_sample.add_argument("--trajectory-out", default=None, metavar="FILE",
                          help=f"also write visited states of the first {TRAJECTORY_CHAIN_LIMIT} chains as CSV")

    p_compare = sub.add_parser("compare", help="run several configs and emit a metric matrix CSV")
    _add_common_flags(p_compare)
    p_compare.add_argument("--sweep", default=None, metavar="KEY=V1,V2,...",
                           help="sweep one config field over comma-separated values")
    return parser


def _flag_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for name in ExperimentConfig.field_names():
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return overrides


def _resolve_config(args: argparse.Namespace, file_mapping: Optional[dict] = None) -> ExperimentConfig:
    merged = dict(file_mapping or {})
    merged.update(_flag_overrides(args))
    return ExperimentConfig().with_overrides(merged)


def _resolve_mixture(cfg: ExperimentConfig) -> MixtureModel:
    if cfg.mixture in MIXTURE_PRESETS:
        return mixture_preset(cfg.mixture)
    path = Path(cfg.mixture)
    if path.exists():
        try:
            return mixture_from_config(path)
        except ValueError as exc:
            raise ConfigError(f"bad mixture file {path}: {exc}") from None
    raise ConfigError(
        f"mixture {cfg.mixture!r} is neither a preset ({sorted(MIXTURE_PRESETS)}) nor an existing file"
    )


def _check_label(label: Optional[int], model: MixtureModel, flag: str) -> None:
    if label is not None and not 0 <= label < model.num_components:
        raise ConfigError(f"{flag} {label} out of range for a {model.num_components}-component mixture")


def _build_eps_model(cfg: ExperimentConfig, model: MixtureModel, schedule: NoiseSchedule):
    """Compose oracle predictions with the configured guidance."""
    _check_label(cfg.condition, model, "--condition")
    _check_label(cfg.negative_condition, model, "--negative-condition")
    if cfg.cfg_mode == "none":
        def eps(x, t):
            return model.epsilon_prediction(schedule, x, t, condition=cfg.condition)
        return eps
    if cfg.condition is None:
        raise ConfigError(f"cfg_mode {cfg.cfg_mode!r} needs --condition")
    if cfg.cfg_mode == "interpolate":
        def eps(x, t):
            cond = model.epsilon_prediction(schedule, x, t, condition=cfg.condition)
            uncond = model.epsilon_prediction(schedule, x, t)
            return guide_interpolate(cond, uncond, cfg.cfg_scale)
        return eps

    def eps(x, t):
        cond = model.epsilon_prediction(schedule, x, t, condition=cfg.condition)
        negative = model.epsilon_prediction(schedule, x, t, condition=cfg.negative_condition)
        return guide_negative(cond, negative, cfg.cfg_scale)
    return eps


def _timestep_schedules(
    cfg: ExperimentConfig, schedule: NoiseSchedule, curve: ImportanceCurve
) -> dict[str, TimestepSchedule]:
    return {
        "equidistant": equidistant_schedule(schedule, cfg.steps),
        "importance": importance_schedule(curve, cfg.steps),
        "adaptive": adaptive_schedule(schedule, curve, cfg.steps, cfg.theta),
    }


def run_experiment(cfg: ExperimentConfig) -> tuple[RunReport, SampleTrajectory]:
    """Run one sampling experiment and score it against the analytic reference.

    Sampling always follows the adaptive schedule; ``theta=1`` reduces it to
    the equidistant baseline. The reference distribution is the conditioned
    component when a condition is set, the full mixture otherwise.
    """
    start = time.perf_counter()
    model = _resolve_mixture(cfg)
    schedule = build_schedule(cfg.schedule_kind, cfg.num_train_steps, cfg.beta_start, cfg.beta_end)
    curve = compute_importance(schedule, cfg.importance_epsilon)
    if not 2 <= cfg.steps <= schedule.num_steps:
        raise ConfigError(f"steps {cfg.steps} outside [2, {schedule.num_steps}]")
    timesteps = adaptive_schedule(schedule, curve, cfg.steps, cfg.theta)
    eps_model = _build_eps_model(cfg, model, schedule)

    guidance = GuidanceConfig(
        omega=cfg.cfg_scale, mode=cfg.cfg_mode, distill_omega=cfg.distill_omega
    )
    sampler_config = SamplerConfig(
        variant=cfg.variant,
        gamma=cfg.gamma,
        guidance=guidance,
        postprocess_enabled=cfg.clip_method != "none",
        clip=batch_clip(
            cfg.clip_method,
            alpha=cfg.clip_alpha,
            beta=cfg.clip_beta,
            q=cfg.quantile_q,
            ceiling=cfg.quantile_ceiling,
            balance_first=cfg.clip_order == "balance-first",
        ),
        clip_timing=cfg.clip_timing,
        rng_seed=cfg.seed,
    )
    initial = stream(cfg.seed, STREAM_INITIAL_NOISE).standard_normal((cfg.batch, model.dim))
    trajectory = run_sampler(sampler_config, schedule, timesteps, eps_model, initial)

    reference = model if cfg.condition is None else model.component(cfg.condition)
    truth = reference.sample_ground_truth(cfg.batch, [cfg.seed, STREAM_GROUND_TRUTH])
    mean_error, cov_error = moments_error(trajectory.final, reference)
    if model.dim == 1:
        w1 = wasserstein_1d(trajectory.final[:, 0], truth[:, 0])
    else:
        w1 = sliced_wasserstein(trajectory.final, truth, cfg.directions, rng_seed=cfg.seed)

    config_echo = cfg.to_dict()
    if cfg.distill_omega is not None:
        diag = compounding_scale(cfg.cfg_scale, cfg.distill_omega)
        config_echo["compounding"] = {"scale": diag.scale, "alpha": diag.alpha}
    report = RunReport(
        config_echo=config_echo,
        mean_error=mean_error,
        cov_error=cov_error,
        wasserstein1=w1,
        saturation_fraction=saturation_fraction(trajectory.final),
        step_count=cfg.steps,
        wall_time=time.perf_counter() - start,
    )
    return report, trajectory


def _write_text(path: Optional[str], text: str, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)


def _curve_csv(schedule: NoiseSchedule, curve: ImportanceCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "alpha_bar", "snr", "importance"])
    for t in range(schedule.num_steps):
        writer.writerow([t, repr(float(schedule.alpha_bars[t])), repr(schedule.snr(t)), repr(float(curve.values[t]))])
    return buf.getvalue()


def _schedules_csv(named: dict[str, TimestepSchedule], curve: ImportanceCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["schedule", "slot", "timestep", "importance", "provenance"])
    for name, ts in named.items():
        for slot in range(ts.n):
            t = int(ts.steps[slot])
            writer.writerow([name, slot, t, repr(float(curve.values[t])), ts.provenance[slot]])
    return buf.getvalue()


def cmd_schedule(cfg: ExperimentConfig, out: Optional[str], stdout) -> int:
    schedule = build_schedule(cfg.schedule_kind, cfg.num_train_steps, cfg.beta_start, cfg.beta_end)
    curve = compute_importance(schedule, cfg.importance_epsilon)
    if not 2 <= cfg.steps <= schedule.num_steps:
        raise ConfigError(f"steps {cfg.steps} outside [2, {schedule.num_steps}]")
    named = _timestep_schedules(cfg, schedule, curve)
    curve_text = _curve_csv(schedule, curve)
    table_text = _schedules_csv(named, curve)
    if out is None:
        stdout.write(curve_text)
        stdout.write("\n")
        stdout.write(table_text)
    else:
        directory = Path(out)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "curve.csv").write_text(curve_text)
        (directory / "schedules.csv").write_text(table_text)
    return 0


def _trajectory_csv(trajectory, dim: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "timestep", "chain"] + [f"x{i}" for i in range(dim)])
    chains = min(TRAJECTORY_CHAIN_LIMIT, trajectory.final.shape[0])
    for index, (t, state) in enumerate(trajectory.states):
        for chain in range(chains):
            writer.writerow([index, t, chain] + [repr(float(v)) for v in state[chain]])
    for chain in range(chains):
        # The terminal estimate lives on the data axis, marked with timestep -1.
        writer.writerow([len(trajectory.states), -1, chain] + [repr(float(v)) for v in trajectory.final[chain]])
    return buf.getvalue()


def cmd_sample(cfg: ExperimentConfig, out: Optional[str], trajectory_out: Optional[str], stdout) -> int:
    report, trajectory = run_experiment(cfg)
    _write_text(out, report.to_json(), stdout)
    if trajectory_out is not None:
        _write_text(trajectory_out, _trajectory_csv(trajectory, trajectory.final.shape[1]), stdout)
    return 0


COMPARE_COLUMNS = (
    "label", "steps", "theta", "variant", "gamma", "cfg_mode", "cfg_scale", "clip_method",
    "mean_error", "cov_error", "wasserstein1", "saturation_fraction", "step_count",
)


def _parse_sweep(sweep: str, base: ExperimentConfig) -> list[tuple[str, ExperimentConfig]]:
    key, _, values = sweep.partition("=")
    key = key.strip()
    if not values or key not in ExperimentConfig.field_names():
        raise ConfigError(f"--sweep expects FIELD=V1,V2,... with a known field, got {sweep!r}")
    out = []
    for raw in values.split(","):
        raw = raw.strip()
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        out.append((f"{key}={raw}", base.with_overrides({key: value})))
    return out


def cmd_compare(labeled: list[tuple[str, ExperimentConfig]], out: Optional[str], stdout) -> int:
    if len(labeled) < 2:
        raise ConfigError("compare needs at least 2 configurations (--config and/or --sweep)")
    mixtures = {cfg.mixture for _, cfg in labeled}
    seeds = {cfg.seed for _, cfg in labeled}
    if len(mixtures) > 1 or len(seeds) > 1:
        raise ConfigError(
            f"compare requires a shared mixture and seed, got mixtures {sorted(mixtures)} and seeds {sorted(seeds)}"
        )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARE_COLUMNS)
    for label, cfg in labeled:
        report, _ = run_experiment(cfg)
        writer.writerow([
            label, cfg.steps, repr(cfg.theta), cfg.variant, repr(cfg.gamma), cfg.cfg_mode,
            repr(cfg.cfg_scale), cfg.clip_method, repr(report.mean_error), repr(report.cov_error),
            repr(report.wasserstein1), repr(report.saturation_fraction), report.step_count,
        ])
    _write_text(out, buf.getvalue(), stdout)
    return 0


def main(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config_files = args.config or []
        if args.command == "compare":
            labeled = []
            if config_files:
                for path in config_files:
                    labeled.append((Path(path).stem, _resolve_config(args, load_config_mapping(path))))
            if args.sweep is not None:
                base = labeled[0][1] if labeled else _resolve_config(args)
                if len(labeled) > 1:
                    raise ConfigError("--sweep combines with at most one --config")
                labeled = _parse_sweep(args.sweep, base)
            return cmd_compare(labeled, args.out, stdout)

        if len(config_files) > 1:
            raise ConfigError(f"{args.command} accepts a single --config file")
        mapping = load_config_mapping(config_files[0]) if config_files else None
        cfg = _resolve_config(args, mapping)
        if args.command == "schedule":
            return cmd_schedule(cfg, args.out, stdout)
        return cmd_sample(cfg, args.out, args.trajectory_out, stdout)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
