"""Scenario configuration, validation and experiment execution.

A scenario is a TOML document.  :func:`validate` either returns a fully
resolved :class:`Scenario` (every default filled in) or raises
:class:`ConfigError` listing every problem with its key path.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import channel as chan
from .harvester import RectennaParams
from .optimizer import Strategy, design, received_p_dc, smf
from .protocol import Frame, ProbeModel, build_codebook, perfect_csit_p_dc, run_closed_loop
from .signals import FrequencyGrid
from .swipt import ReceiverArch, energy_arch, ppm_link, rate_subbands, re_region

__all__ = [
    "ConfigError",
    "Scenario",
    "DEFAULTS",
    "BUILTIN_SCENARIOS",
    "SWEEP_VARIABLES",
    "validate",
    "load_scenario",
    "run",
    "sweep",
    "sub_seeds",
]

OUTPUT_DIR_ENV = "WPTSIM_OUTPUT_DIR"

EXPERIMENTS = ("pdc", "smf-allocation", "feedback", "re-region", "ppm")
STRATEGIES = ("smf", "ass", "uniform", "mrt-cw")
SWEEP_VARIABLES = ("M", "N", "bits", "rho", "tau", "beta", "distance")

DEFAULTS = {
    "name": "scenario",
    "experiment": "pdc",
    "realizations": 1,
    "grid": {"f0_hz": 2.4e9, "bandwidth_hz": 10e6, "n_tones": 8},
    "channel": {
        "model": "rayleigh",
        "taps": 8,
        "delay_spread_s": None,
        "file": None,
        "noise_power_w": 1e-13,
        "distance_m": None,
    },
    "transmitter": {"antennas": 1, "power_w": 1e-5, "strategy": "smf", "beta": 3.0},
    "receiver": {
        "antennas": 1,
        "combining": "dc",
        "arch": "ideal",
        "arch_param": None,
        "r_ant_ohm": 50.0,
        "v_t_v": 0.02586,
        "ideality": 1.05,
        "r_load_ohm": 10e3,
        "breakdown_power_w": None,
    },
    "protocol": {
        "codebook": "nested-random",
        "bits": 4,
        "slot_s": 1e-3,
        "wpt_s": 1.0,
        "noise_std": 0.0,
    },
    "swipt": {"grid_points": 21, "ppm_order": 4, "ppm_symbols": 20000, "ppm_noise_std_v": 1e-3, "slot_rate_hz": 10e6},
    "sweep": {"variable": None, "values": []},
    "output": {"dir": "results"},
}

_POSITIVE = {
    ("grid", "f0_hz"), ("grid", "bandwidth_hz"), ("grid", "n_tones"),
    ("channel", "taps"), ("channel", "delay_spread_s"), ("channel", "distance_m"),
    ("transmitter", "antennas"), ("transmitter", "power_w"),
    ("receiver", "antennas"), ("receiver", "r_ant_ohm"), ("receiver", "v_t_v"),
    ("receiver", "ideality"), ("receiver", "r_load_ohm"), ("receiver", "breakdown_power_w"),
    ("protocol", "bits"), ("protocol", "slot_s"),
    ("swipt", "grid_points"), ("swipt", "ppm_order"), ("swipt", "ppm_symbols"), ("swipt", "slot_rate_hz"),
}
_NON_NEGATIVE = {("channel", "noise_power_w"), ("protocol", "wpt_s"), ("protocol", "noise_std"), ("swipt", "ppm_noise_std_v")}
_INTEGER = {
    ("grid", "n_tones"), ("channel", "taps"), ("transmitter", "antennas"), ("receiver", "antennas"),
    ("protocol", "bits"), ("swipt", "grid_points"), ("swipt", "ppm_order"), ("swipt", "ppm_symbols"),
}
_CHOICES = {
    ("channel", "model"): ("flat", "rayleigh"),
    ("transmitter", "strategy"): STRATEGIES,
    ("receiver", "combining"): ("dc", "rf"),
    ("receiver", "arch"): ("ideal", "ts", "ps", "integrated"),
    ("protocol", "codebook"): ("nested-random", "dft"),
}


class ConfigError(ValueError):
    """Invalid scenario; ``errors`` holds ``(key_path, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{k}: {m}" for k, m in self.errors))


@dataclass
class Scenario:
    config: dict
    base_dir: Path = Path(".")

    def __getitem__(self, key):
        return self.config[key]

    @property
    def name(self) -> str:
        return self.config["name"]

    @property
    def seed(self) -> int:
        return self.config["seed"]

    def resolved_json(self) -> str:
        return json.dumps(self.config, indent=2, sort_keys=True) + "\n"

    def with_value(self, variable: str, value) -> "Scenario":
        cfg = copy.deepcopy(self.config)
        target = {
            "M": ("transmitter", "antennas"),
            "N": ("grid", "n_tones"),
            "bits": ("protocol", "bits"),
            "beta": ("transmitter", "beta"),
            "distance": ("channel", "distance_m"),
            "rho": ("receiver", "arch_param"),
            "tau": ("receiver", "arch_param"),
        }[variable]
        cfg[target[0]][target[1]] = value
        if variable in ("rho", "tau"):
            cfg["receiver"]["arch"] = "ps" if variable == "rho" else "ts"
        return Scenario(cfg, self.base_dir)

    # model construction

    def grid(self) -> FrequencyGrid:
        g = self.config["grid"]
        n = g["n_tones"]
        delta_f = g["bandwidth_hz"] / n
        # snap f0 onto the tone lattice so waveforms stay periodic
        f0 = round(g["f0_hz"] / delta_f) * delta_f
        return FrequencyGrid(f0, delta_f, n)

    def params(self) -> RectennaParams:
        r = self.config["receiver"]
        return RectennaParams(r["r_ant_ohm"], r["v_t_v"], r["ideality"], r["r_load_ohm"], r["breakdown_power_w"])

    def channel(self, sub_seed: int) -> chan.ChannelState:
        c = self.config["channel"]
        t = self.config["transmitter"]
        r = self.config["receiver"]
        grid = self.grid()
        if c["file"]:
            state = chan.load(self.base_dir / c["file"])
        else:
            state = chan.generate(
                sub_seed, c["model"], r["antennas"], t["antennas"], grid,
                n_taps=c["taps"], delay_spread=c["delay_spread_s"], noise_power=c["noise_power_w"],
            )
        if c["distance_m"]:
            state = state.scaled(chan.free_space_gain(c["distance_m"], state.grid.f0))
        return state

    def strategy(self) -> Strategy:
        t = self.config["transmitter"]
        return Strategy(t["strategy"], t["power_w"], t["beta"])

    def arch(self) -> ReceiverArch:
        r = self.config["receiver"]
        return ReceiverArch(r["arch"], r["arch_param"])


def _merge(defaults: dict, given: dict, path: str, errors: list) -> dict:
    out = {}
    for key, default in defaults.items():
        if isinstance(default, dict):
            sub = given.get(key, {})
            if not isinstance(sub, dict):
                errors.append((f"{path}{key}", "expected a table"))
                sub = {}
            out[key] = _merge(default, sub, f"{path}{key}.", errors)
        else:
            out[key] = given.get(key, default)
    for key in given:
        if key not in defaults and not (path == "" and key == "seed"):
            errors.append((f"{path}{key}", "unknown key"))
    return out


def validate(text: str, base_dir=".") -> Scenario:
    """Parse and resolve a TOML scenario, raising :class:`ConfigError` on any problem."""
    try:
        given = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([("<document>", str(exc))]) from None
    errors: list = []
    cfg = _merge(DEFAULTS, given, "", errors)
    base_dir = Path(base_dir)

    if "seed" not in given:
        errors.append(("seed", "missing required key"))
    elif isinstance(given["seed"], bool) or not isinstance(given["seed"], int) or given["seed"] < 0:
        errors.append(("seed", "must be a non-negative integer"))
    else:
        cfg = {"seed": given["seed"], **cfg}

    if cfg["experiment"] not in EXPERIMENTS:
        errors.append(("experiment", f"must be one of {', '.join(EXPERIMENTS)}"))
    if not isinstance(cfg["realizations"], int) or isinstance(cfg["realizations"], bool) or cfg["realizations"] < 1:
        errors.append(("realizations", "must be a positive integer"))

    for section, key in sorted(_POSITIVE | _NON_NEGATIVE):
        value = cfg[section][key]
        if value is None:
            if (section, key) in {("channel", "delay_spread_s"), ("channel", "distance_m"), ("receiver", "breakdown_power_w")}:
                continue
            errors.append((f"{section}.{key}", "missing value"))
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append((f"{section}.{key}", "must be a number"))
            continue
        if (section, key) in _INTEGER and not isinstance(value, int):
            errors.append((f"{section}.{key}", "must be an integer"))
        if (section, key) in _POSITIVE and not value > 0:
            errors.append((f"{section}.{key}", "must be positive"))
        elif (section, key) in _NON_NEGATIVE and value < 0:
            errors.append((f"{section}.{key}", "must be non-negative"))

    for (section, key), choices in _CHOICES.items():
        value = cfg[section][key]
        if isinstance(value, str):
            value = value.lower()
            cfg[section][key] = value
        if value not in choices:
            errors.append((f"{section}.{key}", f"must be one of {', '.join(choices)}"))

    beta = cfg["transmitter"]["beta"]
    if isinstance(beta, bool) or not isinstance(beta, (int, float)) or beta < 1:
        errors.append(("transmitter.beta", "must be a number >= 1"))

    rx = cfg["receiver"]
    if rx["arch"] in ("ts", "ps"):
        p = rx["arch_param"]
        if p is None and cfg["experiment"] != "re-region":
            errors.append(("receiver.arch_param", f"required for arch '{rx['arch']}'"))
        elif p is not None and (not isinstance(p, (int, float)) or not 0 <= p <= 1):
            errors.append(("receiver.arch_param", "must lie in [0, 1]"))

    ppm_order = cfg["swipt"]["ppm_order"]
    if isinstance(ppm_order, int) and ppm_order > 0 and (ppm_order < 2 or ppm_order & (ppm_order - 1)):
        errors.append(("swipt.ppm_order", "must be a power of two >= 2"))

    f = cfg["channel"]["file"]
    if f is not None:
        if not isinstance(f, str):
            errors.append(("channel.file", "must be a path string"))
        elif not (base_dir / f).is_file():
            errors.append(("channel.file", f"file not found: {f}"))

    sw = cfg["sweep"]
    if sw["variable"] is not None:
        if sw["variable"] not in SWEEP_VARIABLES:
            errors.append(("sweep.variable", f"must be one of {', '.join(SWEEP_VARIABLES)}"))
        if not isinstance(sw["values"], list) or not sw["values"]:
            errors.append(("sweep.values", "must be a non-empty list"))
    if cfg["experiment"] == "re-region" and cfg["receiver"]["arch"] not in ("ts", "ps"):
        errors.append(("receiver.arch", "re-region needs arch 'ts' or 'ps'"))

    if errors:
        raise ConfigError(errors)
    return Scenario(cfg, base_dir)


BUILTIN_SCENARIOS = {
    "fig7-smf": """
name = "fig7-smf"
seed = 7
experiment = "smf-allocation"
[grid]
n_tones = 16
[channel]
taps = 8
[transmitter]
beta = 3.0
""",
    "fig19-feedback": """
name = "fig19-feedback"
seed = 19
experiment = "feedback"
realizations = 200
[grid]
n_tones = 2
[transmitter]
antennas = 2
[protocol]
bits = 6
""",
    "fig11-antennas": """
name = "fig11-antennas"
seed = 11
experiment = "pdc"
realizations = 50
[sweep]
variable = "M"
values = [1, 2, 4, 8]
""",
    "fig23-re-region": """
name = "fig23-re-region"
seed = 23
experiment = "re-region"
[grid]
n_tones = 1
[channel]
model = "flat"
[receiver]
arch = "ps"
""",
}


def load_scenario(ref: str) -> Scenario:
    """Scenario from a file path, or a built-in name when no such file exists."""
    path = Path(ref)
    if path.is_file():
        return validate(path.read_text(encoding="utf-8"), path.parent)
    if ref in BUILTIN_SCENARIOS:
        return validate(BUILTIN_SCENARIOS[ref])
    raise ConfigError([("<file>", f"no such file or built-in scenario: {ref}")])


def sub_seeds(seed: int, count: int) -> list[int]:
    """Independent per-realization seeds derived from the scenario seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


# experiments; each returns (header, rows)


def _pdc_rows(sc: Scenario, seeds):
    params = sc.params()
    strategy = sc.strategy()
    combining = sc["receiver"]["combining"]
    arch = sc.arch()
    rows = []
    for s in seeds:
        ch = sc.channel(s)
        x = design(strategy, ch, params)
        y = ch.received(x.weights)
        p_rf_r = float(np.sum(np.abs(y) ** 2))
        full = received_p_dc(ch, x, params, combining)
        if arch.kind == "IDEAL" and ch.n_rx > 1:
            energy = full
        else:
            energy = energy_arch(ch, x, arch, params)
        rate = float("nan") if arch.kind == "INTEGRATED" else rate_subbands(ch, x, arch)
        rows.append([s, ch.n_tx, ch.grid.n_tones, strategy.kind, x.power, p_rf_r, full, energy, rate])
    header = ["seed", "M", "N", "strategy", "p_rf_t_w", "p_rf_r_w", "p_dc_w", "energy_w", "rate_bps_hz"]
    return header, rows


def _smf_rows(sc: Scenario, seeds):
    s = seeds[0]
    ch = sc.channel(s)
    t = sc["transmitter"]
    x = smf(ch, t["beta"], t["power_w"])
    norms = np.linalg.norm(ch.row(0), axis=0)
    freqs = ch.grid.frequencies
    rows = [[s, n, freqs[n], norms[n], x.tone_powers[n]] for n in range(ch.grid.n_tones)]
    return ["seed", "tone", "freq_hz", "channel_norm", "power_w"], rows


def _feedback_rows(sc: Scenario, seeds):
    params = sc.params()
    t, pr = sc["transmitter"], sc["protocol"]
    frame = Frame(pr["slot_s"], pr["wpt_s"])
    rows = []
    for s in seeds:
        ch = sc.channel(s)
        ref = perfect_csit_p_dc(ch, t["power_w"], params)
        for bits in range(1, pr["bits"] + 1):
            book = build_codebook(pr["codebook"], ch.n_tx, ch.grid.n_tones, t["power_w"], bits, seed=s, grid=ch.grid)
            report = run_closed_loop(ch, book, frame, ProbeModel(pr["noise_std"], s), params)
            rows.append([s, bits, report.selected_index, report.wpt_p_dc, report.frame_avg_p_dc, ref])
    return ["seed", "bits", "selected_index", "wpt_p_dc_w", "frame_avg_p_dc_w", "perfect_csit_p_dc_w"], rows


def _re_rows(sc: Scenario, seeds):
    s = seeds[0]
    ch = sc.channel(s)
    params = sc.params()
    x = design(sc.strategy(), ch, params)
    kind = sc["receiver"]["arch"].upper()
    points = re_region(ch, x, kind, np.linspace(0.0, 1.0, sc["swipt"]["grid_points"]), ch.noise_power, params)
    return ["arch", "param", "rate_bps_hz", "energy_w"], [[p.arch, p.param, p.rate, p.energy] for p in points]


def _ppm_rows(sc: Scenario, seeds):
    sw = sc["swipt"]
    params = sc.params()
    rows = []
    for s in seeds:
        ch = sc.channel(s)
        rx_power = float(np.sum(np.abs(ch.received(design(sc.strategy(), ch, params).weights)[0]) ** 2))
        res = ppm_link(sw["ppm_order"], sw["ppm_symbols"], sw["ppm_noise_std_v"], s, params, rx_power, sw["slot_rate_hz"])
        rows.append([s, sw["ppm_order"], res.ber, res.throughput, res.p_dc])
    return ["seed", "order", "ber", "throughput_bps", "p_dc_w"], rows


_PER_SEED = ("pdc", "feedback", "ppm")

_EXPERIMENTS = {
    "pdc": _pdc_rows,
    "smf-allocation": _smf_rows,
    "feedback": _feedback_rows,
    "re-region": _re_rows,
    "ppm": _ppm_rows,
}


def execute(sc: Scenario, seeds=None):
    """Run the scenario's experiment in-process and return ``(header, rows)``."""
    if seeds is None:
        seeds = sub_seeds(sc.seed, sc["realizations"])
    return _EXPERIMENTS[sc["experiment"]](sc, seeds)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _output_dir(sc: Scenario, override=None) -> Path:
    root = override or os.environ.get(OUTPUT_DIR_ENV) or sc["output"]["dir"]
    out = Path(root) / sc.name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _chunk_job(args):
    sc, seeds = args
    return execute(sc, seeds)


def _sweep_job(args):
    sc, variable, value, seeds = args
    header, rows = execute(sc.with_value(variable, value), seeds)
    return variable, value, header, rows


def _write_common(out: Path, sc: Scenario, seeds, started, command, extra=None):
    import time

    from . import __version__

    (out / "resolved_config.json").write_text(sc.resolved_json(), encoding="utf-8")
    (out / "seeds.csv").write_text(_csv_text(["realization", "sub_seed"], list(enumerate(seeds))), encoding="utf-8")
    manifest = {
        "command": command,
        "scenario": sc.name,
        "library_version": __version__,
        "seed": sc.seed,
        "sub_seeds": seeds,
        "wall_time_s": time.perf_counter() - started,
        **(extra or {}),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def run(sc: Scenario, jobs: int = 1, output_dir=None) -> Path:
    """Execute a scenario and write ``results.csv``, ``resolved_config.json``, ``seeds.csv`` and ``manifest.json``."""
    import time

    started = time.perf_counter()
    seeds = sub_seeds(sc.seed, sc["realizations"])
    if jobs > 1 and len(seeds) > 1 and sc["experiment"] in _PER_SEED:
        chunks = [seeds[i::jobs] for i in range(jobs) if seeds[i::jobs]]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_chunk_job, [(sc, c) for c in chunks]))
        header = parts[0][0]
        order = {s: i for i, s in enumerate(seeds)}
        # stable sort: rows of one seed keep their in-chunk order
        rows = sorted((r for _, part in parts for r in part), key=lambda r: order[r[0]])
    else:
        header, rows = execute(sc, seeds)
    out = _output_dir(sc, output_dir)
    (out / "results.csv").write_text(_csv_text(header, rows), encoding="utf-8")
    _write_common(out, sc, seeds, started, "run")
    return out


def _metric_columns(header):
    skip = {"seed", "M", "N", "strategy", "tone", "arch", "param", "bits", "selected_index", "order"}
    return [i for i, h in enumerate(header) if h not in skip]


def sweep(sc: Scenario, variable: str, values, jobs: int = 1, output_dir=None) -> Path:
    """Re-run the scenario for each value of ``variable`` and write a long-form ``sweep.csv``.

    Columns: ``seed, variable, value, metric, metric_value``.  Distance
    applies free-space path loss to the channel amplitudes.
    """
    import time

    if variable not in SWEEP_VARIABLES:
        raise ConfigError([("sweep.variable", f"must be one of {', '.join(SWEEP_VARIABLES)}")])
    if not values:
        raise ConfigError([("sweep.values", "must be a non-empty list")])
    started = time.perf_counter()
    # check every swept configuration before running any of them
    variants = []
    errors = []
    for v in values:
        variant = sc.with_value(variable, v)
        try:
            validate(_to_toml(variant.config), sc.base_dir)
        except ConfigError as exc:
            errors += [(f"sweep.values[{v!r}] -> {k}", m) for k, m in exc.errors]
        variants.append(v)
    if errors:
        raise ConfigError(errors)

    seeds = sub_seeds(sc.seed, sc["realizations"])
    tasks = [(sc, variable, v, seeds) for v in variants]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_job, tasks))
    else:
        results = [_sweep_job(t) for t in tasks]

    rows = []
    for var, value, header, part in results:
        metrics = _metric_columns(header)
        seed_col = header.index("seed") if "seed" in header else None
        for r in part:
            seed = r[seed_col] if seed_col is not None else sc.seed
            for i in metrics:
                rows.append([seed, var, value, header[i], r[i]])
    rows.sort(key=lambda r: (values.index(r[2]), r[0], r[3]))
    out = _output_dir(sc, output_dir)
    (out / "sweep.csv").write_text(
        _csv_text(["seed", "variable", "value", "metric", "metric_value"], rows), encoding="utf-8"
    )
    _write_common(out, sc, seeds, started, "sweep", {"variable": variable, "values": list(values)})
    return out


def _to_toml(cfg: dict) -> str:
    """Minimal TOML writer for resolved configs (``None`` values are omitted)."""

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return json.dumps(v)
        if isinstance(v, list):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        return repr(v)

    lines = [f"{k} = {fmt(v)}" for k, v in cfg.items() if not isinstance(v, dict) and v is not None]
    for k, v in cfg.items():
        if isinstance(v, dict):
            lines.append(f"[{k}]")
            lines += [f"{kk} = {fmt(vv)}" for kk, vv in v.items() if vv is not None]
    return "\n".join(lines) + "\n"
