"""Command-line experiment runner.

Writes one CSV (header row, one data row per cell) plus a JSON sidecar
``<output>.meta.json`` holding the full configuration, library version,
kernel backend and wall time.  Feeding the sidecar back via ``--config``
repeats the run.  Exit codes: 0 success, 1 usage/configuration error,
2 runtime error.
"""

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__, kernels
from .errors import SizeCapError
from .evaluation import complexity_profile, resolve_precoder, simulate_ber, sum_rate_sweep
from .model import check_channel, draw_channel
from .precoders import (
    BNB_MAX_ANTENNAS,
    EXHAUSTIVE_MAX_ANTENNAS,
    PRECODERS,
    TABLE_MAX_STREAMS,
    build_lookup_table,
)

EXPERIMENTS = ("ber", "sumrate", "complexity", "table")

CSV_COLUMNS = {
    "ber": ["precoder", "snr_db", "trials", "bit_errors", "ber"],
    "sumrate": ["precoder", "snr_db", "channels", "rate_bpcu", "normalization_error"],
    "complexity": ["precoder", "M", "instances", "mean_visited_branches", "mean_lp_iterations",
                   "exhaustive_candidates"],
    "table": ["precoder", "index"],  # followed by x0 .. x{2M-1}
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = None
    M: list = field(default_factory=lambda: [10])
    K: int = 2
    L: int = 1
    snr_db: str = "0:2:14"
    trials: int = 10000
    precoders: list = field(default_factory=lambda: ["bnb"])
    seed: int = 0
    n_gon: int = 64
    output_path: str = None
    channels: int = 50
    instances: int = 30
    symbols_per_channel: int = 100
    noise_convention: str = "complex"
    channel_file: str = None
    workers: int = 1

    def snr_grid(self):
        return parse_snr_grid(self.snr_db)

    def validate(self):
        errors = []
        if self.experiment not in EXPERIMENTS:
            errors.append(f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {self.experiment!r}")
        for name in ("K", "L", "trials", "channels", "symbols_per_channel", "workers"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                errors.append(f"{name}: must be a positive integer, got {value!r}")
        if not self.M or any(not isinstance(m, int) or m < 1 for m in self.M):
            errors.append(f"M: must be positive integers, got {self.M!r}")
        if not self.precoders:
            errors.append("precoders: at least one precoder is required")
        unknown = [p for p in self.precoders if p not in PRECODERS]
        if unknown:
            errors.append(f"precoders: unknown {unknown}; choose from {', '.join(PRECODERS)}")
        if self.n_gon < 8:
            errors.append(f"n_gon: must be at least 8, got {self.n_gon}")
        if self.noise_convention not in ("complex", "per_real"):
            errors.append("noise_convention: must be 'complex' or 'per_real'")
        if self.experiment in ("ber", "sumrate"):
            try:
                self.snr_grid()
            except ConfigError as exc:
                errors.append(str(exc))
        if self.experiment == "complexity" and self.instances < 10:
            errors.append(f"instances: complexity needs at least 10, got {self.instances}")
        if self.experiment != "complexity" and len(self.M) != 1:
            errors.append("M: only the complexity experiment accepts a list")
        if errors:
            raise ConfigError("; ".join(errors))
        self._check_caps()

    def _check_caps(self):
        KL = self.K * self.L
        M_max = max(self.M)
        used = ["bnb"] if self.experiment == "complexity" else self.precoders
        if "bnb" in used and M_max > BNB_MAX_ANTENNAS:
            raise SizeCapError("bnb transmit antennas M", M_max, BNB_MAX_ANTENNAS)
        if "exhaustive" in used and M_max > EXHAUSTIVE_MAX_ANTENNAS:
            raise SizeCapError("exhaustive transmit antennas M", M_max, EXHAUSTIVE_MAX_ANTENNAS)
        if self.experiment in ("table", "sumrate", "ber") and KL > TABLE_MAX_STREAMS:
            raise SizeCapError("lookup table streams K*L", KL, TABLE_MAX_STREAMS)
        if "zf" in used and M_max < KL:
            raise ConfigError(f"precoders: zf needs M >= K*L, got M={M_max}, K*L={KL}")


def parse_snr_grid(text):
    """``start:step:stop`` with both endpoints included (half-step tolerance)."""
    try:
        start, step, stop = (float(v) for v in str(text).split(":"))
    except ValueError:
        raise ConfigError(f"snr_db: expected start:step:stop, got {text!r}") from None
    if not step > 0:
        raise ConfigError(f"snr_db: step must be positive, got {step}")
    if stop < start:
        raise ConfigError(f"snr_db: stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _str_list(text):
    return [v.strip() for v in str(text).split(",") if v.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="onebit-bnb", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config file or a previous run's .meta.json")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--M", type=_int_list, help="transmit antennas; comma list for complexity")
    p.add_argument("--K", type=int, help="users")
    p.add_argument("--L", type=int, help="receive antennas per user")
    p.add_argument("--snr", dest="snr_db", help="SNR grid in dB as start:step:stop")
    p.add_argument("--trials", type=int, help="BER trials (symbol vectors) per SNR point")
    p.add_argument("--precoders", type=_str_list, help=f"comma list from {','.join(PRECODERS)}")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-gon", dest="n_gon", type=int, help="polygon sides for pop")
    p.add_argument("--output", dest="output_path", help="CSV path (default <experiment>.csv)")
    p.add_argument("--channels", type=int, help="channel draws averaged in sumrate")
    p.add_argument("--instances", type=int, help="instances per M in complexity")
    p.add_argument("--symbols-per-channel", dest="symbols_per_channel", type=int)
    p.add_argument("--noise-convention", dest="noise_convention", choices=("complex", "per_real"))
    p.add_argument("--channel-file", dest="channel_file", help="JSON channel {real, imag} for table")
    p.add_argument("--workers", type=int)
    p.add_argument("--version", action="version", version=__version__)
    return p


def load_config(argv):
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
        data = data.get("config", data)
        known = {f.name for f in fields(ExperimentConfig)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"config: unknown fields {sorted(extra)}")
        values.update(data)
    for f in fields(ExperimentConfig):
        given = getattr(args, f.name, None)
        if given is not None:
            values[f.name] = given
    if isinstance(values.get("M"), int):
        values["M"] = [values["M"]]
    config = ExperimentConfig(**values)
    if config.output_path is None:
        config.output_path = f"{config.experiment}.csv"
    config.validate()
    return config


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _load_channel(path, K, L, M):
    with open(path) as fh:
        data = json.load(fh)
    H = np.asarray(data["real"], dtype=float) + 1j * np.asarray(data["imag"], dtype=float)
    H = check_channel(H, K, L)
    if H.shape[1] != M:
        raise ConfigError(f"channel_file: has {H.shape[1]} columns, expected M={M}")
    return H


def run(config):
    """Run one experiment; returns ``(rows, extras)`` and writes the outputs."""
    t0 = time.perf_counter()
    rows, extras = [], {}
    K, L, M = config.K, config.L, config.M[0]
    if config.experiment == "ber":
        for name in config.precoders:
            for rec in simulate_ber(name, K, L, M, config.snr_grid(), config.trials, config.seed,
                                    symbols_per_channel=config.symbols_per_channel,
                                    n_gon=config.n_gon, workers=config.workers):
                rows.append([name, rec.snr_db, rec.trials, rec.bit_errors, rec.ber])
    elif config.experiment == "sumrate":
        for name in config.precoders:
            for rec in sum_rate_sweep(name, K, L, M, config.snr_grid(), config.channels, config.seed,
                                      n_gon=config.n_gon, convention=config.noise_convention):
                rows.append([name, rec.snr_db, rec.channels_averaged, rec.rate_bpcu,
                             rec.normalization_error])
    elif config.experiment == "complexity":
        report = complexity_profile(K, L, config.M, config.instances, config.seed)
        for M_i, vis, its in zip(report.antennas, report.mean_visited, report.mean_lp_iterations):
            rows.append(["bnb", M_i, report.instances, vis, its, 4 ** M_i])
        extras = {"loglog_slope": report.slope, "mean_wall_time_s": report.mean_wall_time}
    else:
        if config.channel_file:
            H = _load_channel(config.channel_file, K, L, M)
        else:
            H = draw_channel(np.random.default_rng([config.seed, 0]), K, L, M)
        extras["channel"] = {"real": H.real.tolist(), "imag": H.imag.tolist()}
        for name in config.precoders:
            table = build_lookup_table(H, resolve_precoder(name, config.n_gon)[1])
            for i, x in enumerate(table.entries):
                rows.append([name, i] + list(np.concatenate([x.real, x.imag])))
    header = list(CSV_COLUMNS[config.experiment])
    if config.experiment == "table":
        header += [f"x{j}" for j in range(2 * M)]

    with open(config.output_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    meta = {
        "config": asdict(config),
        "seed": config.seed,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "wall_time_s": time.perf_counter() - t0,
        "results": extras,
    }
    with open(config.output_path + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return rows, extras


def main(argv=None):
    try:
        config = load_config(sys.argv[1:] if argv is None else argv)
    except (ConfigError, SizeCapError) as exc:
        print(f"onebit-bnb: error: {exc}", file=sys.stderr)
        return 1
    try:
        run(config)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"onebit-bnb: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
