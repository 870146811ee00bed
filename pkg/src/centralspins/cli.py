"""Command-line front end: configs in, figure-ready CSV/JSON out.

Exit status is 0 on success, 2 for an invalid config and 3 when a computed
object fails an invariant check (the message names the invariant).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .analysis import concurrence, discord, trace_distance
from .choikraus import choi, kraus_from_choi
from .dynmap import evolve, evolve_trajectory, local_map, local_product_evolve, map_coefficients
from .linsolve3 import amplitudes_at, boundary_weights, sector_eigensystem
from .model import DomainError, InvariantViolation, ModelParams, Sector, sector_coefficients
from .oracle import OracleReport, SmallBathModel, full_hp_deviation, sector_expm
from .states import HERMITIAN_TOL, NAMED_STATES, named_state, validate_density_matrix

SCHEMA_VERSION = 1
SCALARS = ("trace_distance", "concurrence", "discord", "gap")
OUTPUTS = SCALARS + ("rho",)
EMIT_TRACE_TOL = 1e-8

_FIG = dict(omega1=2.0, omega2=1.9, omega_a=1.1, omega_b=1.2, M=100, N=100, T=1.0)
# Figure time axes are unlabeled; t in [0, 10] with 1000 samples is a repo choice.
PRESETS = {
    "fig2a": dict(params=dict(_FIG, delta=2.5, eps1=2.6, eps2=2.5), initial_state="11", outputs=["trace_distance"]),
    "fig2b": dict(params=dict(_FIG, delta=2.5, eps1=2.6, eps2=2.5), initial_state="10", outputs=["trace_distance"]),
    "fig3a": dict(params=dict(_FIG, delta=5.0, eps1=2.6, eps2=2.5), initial_state="11", outputs=["gap"]),
    "fig3b": dict(params=dict(_FIG, delta=5.0, eps1=2.6, eps2=2.5), initial_state="10", outputs=["gap"]),
    "fig4": dict(params=dict(_FIG, delta=3.0, eps1=1.3, eps2=1.25), initial_state="bell", outputs=["concurrence", "discord"]),
}


class ConfigError(DomainError):
    pass


@dataclass
class RunConfig:
    params: ModelParams
    initial_state: object = "11"
    t_max: float = 10.0
    t_steps: int = 1000
    outputs: list = field(default_factory=lambda: ["rho"])
    output_path: str | None = None
    threads: int = 1
    channel_t: float | None = None

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.t_steps)

    def rho0(self) -> np.ndarray:
        if isinstance(self.initial_state, str):
            return named_state(self.initial_state)
        return np.array([[complex(re_, im_) for re_, im_ in row] for row in self.initial_state])

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "params": self.params.to_dict(),
            "initial_state": self.initial_state,
            "t_max": self.t_max,
            "t_steps": self.t_steps,
            "outputs": list(self.outputs),
            "output_path": self.output_path,
            "threads": self.threads,
            "channel_t": self.channel_t,
        }


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    spec = PRESETS[name]
    return RunConfig(
        params=ModelParams(**spec["params"]),
        initial_state=spec["initial_state"],
        outputs=list(spec["outputs"]),
        output_path=f"{name}.csv",
    )


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(source: str, text: str, key: str, msg: str):
    line = _line_of(text, key) if text else None
    where = f"{source}:{line}" if line else source
    raise ConfigError(f"{where}: {key}: {msg}")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be an object")
    known = {f.name for f in fields(RunConfig)} | {"schema_version"}
    for key in raw:
        if key not in known:
            _fail(source, text, key, "unknown field")
    if raw.get("schema_version") != SCHEMA_VERSION:
        _fail(source, text, "schema_version", f"expected {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")

    p = raw.get("params")
    if not isinstance(p, dict):
        _fail(source, text, "params", "missing or not an object")
    names = {f.name for f in fields(ModelParams)}
    for key in names - set(p):
        _fail(source, text, "params", f"missing {key}")
    for key in set(p) - names:
        _fail(source, text, key, "unknown parameter")
    for key, val in p.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            _fail(source, text, key, f"must be a number, got {val!r}")
    try:
        params = ModelParams(**p)
    except DomainError as exc:
        bad = next((k for k in names if str(exc).startswith(k)), "params")
        _fail(source, text, bad, str(exc))

    cfg = RunConfig(params=params)
    state = raw.get("initial_state", cfg.initial_state)
    if isinstance(state, str):
        if state not in NAMED_STATES:
            _fail(source, text, "initial_state", f"unknown state {state!r}")
    else:
        try:
            arr = np.array(state, dtype=float)
            if arr.shape != (4, 4, 2):
                raise ValueError(f"expected 4x4 [re, im] pairs, got shape {arr.shape}")
            validate_density_matrix(arr[..., 0] + 1j * arr[..., 1], "initial_state")
        except (ValueError, TypeError) as exc:
            _fail(source, text, "initial_state", str(exc))
    cfg.initial_state = state

    t_max = raw.get("t_max", cfg.t_max)
    if isinstance(t_max, bool) or not isinstance(t_max, (int, float)) or not t_max > 0:
        _fail(source, text, "t_max", f"must be > 0, got {t_max!r}")
    cfg.t_max = float(t_max)
    t_steps = raw.get("t_steps", cfg.t_steps)
    if isinstance(t_steps, bool) or not isinstance(t_steps, int) or t_steps < 2:
        _fail(source, text, "t_steps", f"must be an integer >= 2, got {t_steps!r}")
    cfg.t_steps = t_steps
    outputs = raw.get("outputs", cfg.outputs)
    if not isinstance(outputs, list) or any(o not in OUTPUTS for o in outputs):
        _fail(source, text, "outputs", f"must be a list drawn from {list(OUTPUTS)}")
    cfg.outputs = outputs
    threads = raw.get("threads", cfg.threads)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        _fail(source, text, "threads", f"must be an integer >= 1, got {threads!r}")
    cfg.threads = threads
    out = raw.get("output_path")
    if out is not None and not isinstance(out, str):
        _fail(source, text, "output_path", "must be a string")
    cfg.output_path = out
    ct = raw.get("channel_t")
    if ct is not None and (isinstance(ct, bool) or not isinstance(ct, (int, float)) or ct < 0):
        _fail(source, text, "channel_t", f"must be a number >= 0, got {ct!r}")
    cfg.channel_t = None if ct is None else float(ct)
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def _check_emitted(rho: np.ndarray, t: float):
    tr = np.trace(rho).real
    if abs(tr - 1.0) > EMIT_TRACE_TOL:
        raise InvariantViolation(f"trace preservation: trace {tr!r} at t={t!r}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > HERMITIAN_TOL:
        raise InvariantViolation(f"hermiticity: deviation {herm:.3e} at t={t!r}")


def trajectory_rows(cfg: RunConfig, outputs) -> tuple[list[str], list[list[str]]]:
    """CSV header and rows for the requested outputs."""
    scalars = [s for s in SCALARS if s in outputs]
    header = ["t"] + scalars
    if "rho" in outputs:
        header += [f"{part}_{i + 1}{j + 1}" for i in range(4) for j in range(4) for part in ("re", "im")]
    rho0 = validate_density_matrix(cfg.rho0(), "initial_state")
    rows = []
    for t, rho in evolve_trajectory(cfg.params, rho0, cfg.times(), cfg.threads):
        _check_emitted(rho, t)
        vals = {}
        if "trace_distance" in scalars:
            vals["trace_distance"] = trace_distance(rho, rho0)
        if "concurrence" in scalars:
            vals["concurrence"] = concurrence(rho)
        if "discord" in scalars:
            vals["discord"] = max(0.0, discord(rho)[0])
        if "gap" in scalars:
            local = local_product_evolve(local_map(cfg.params, 1, t), local_map(cfg.params, 2, t), rho0)
            _check_emitted(local, t)
            vals["gap"] = trace_distance(rho, local)
        row = [repr(float(t))] + [repr(float(vals[s])) for s in scalars]
        if "rho" in outputs:
            for i in range(4):
                for j in range(4):
                    row += [repr(float(rho[i, j].real)), repr(float(rho[i, j].imag))]
        rows.append(row)
    return header, rows


def _pairs(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_pairs(x) for x in a]


def channel_dump(cfg: RunConfig, kind: str) -> dict:
    t = cfg.t_max if cfg.channel_t is None else cfg.channel_t
    c = choi(map_coefficients(cfg.params, t))
    tr = np.trace(c.entries).real
    if abs(tr - 4.0) > EMIT_TRACE_TOL:
        raise InvariantViolation(f"trace preservation: Choi trace {tr!r} at t={t!r}")
    if kind == "choi":
        return {"t": t, "params": cfg.params.to_dict(), "choi": _pairs(c.entries),
                "eigenvalues": [float(x) for x in c.eigenvalues()]}
    ks = kraus_from_choi(c)
    return {"t": t, "params": cfg.params.to_dict(), "eigenvalues": ks.eigenvalues,
            "operators": [_pairs(k) for k in ks.operators]}


def oracle_check(cfg: RunConfig, out=None) -> bool:
    """Sector and map-level oracle comparisons; returns True if all pass."""
    out = sys.stdout if out is None else out
    rng = np.random.default_rng(0)
    p = cfg.params
    worst = OracleReport(0.0, "none")
    for _ in range(200):
        sector = list(Sector)[rng.integers(4)]
        m, n = int(rng.integers(p.M + 1)), int(rng.integers(p.N + 1))
        t = float(rng.uniform(0.0, cfg.t_max))
        co = sector_coefficients(p, sector, m, n)
        dev = float(np.max(np.abs(amplitudes_at(boundary_weights(sector_eigensystem(co)), t).asarray() - sector_expm(co, t).asarray())))
        if dev > worst.max_abs_deviation:
            worst = OracleReport(dev, f"sector={sector.value} m={m} n={n} t={t:g}")
    print(f"sector oracle (200 draws): {worst}", file=out)

    small = replace(p, M=min(p.M, 4), N=min(p.N, 4))
    model = SmallBathModel(small)
    states = {"11": named_state("11"), "10": named_state("10"), "bell": named_state("bell")}
    mworst = OracleReport(0.0, "none")
    for t in np.linspace(0.0, min(cfg.t_max, 5.0), 20):
        coeffs = map_coefficients(small, t)
        for name, r0 in states.items():
            diff = np.abs(evolve(coeffs, r0) - model.evolve(r0, t))
            k = np.unravel_index(np.argmax(diff), diff.shape)
            if diff[k] > mworst.max_abs_deviation:
                mworst = OracleReport(float(diff[k]), f"state={name} rho[{k[0] + 1}{k[1] + 1}] t={t:g}")
    print(f"map oracle at M={small.M} N={small.N}: {mworst}", file=out)
    diag = full_hp_deviation(small, named_state("11"), np.linspace(0.0, 5.0, 11))
    print(f"closure error vs untruncated dynamics (diagnostic): {diag}", file=out)
    return worst.max_abs_deviation <= 1e-8 and mworst.max_abs_deviation <= 1e-8


def _write_csv(header, rows, dest):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _emit(buf.getvalue(), dest)


def _emit(text: str, dest):
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


_SUBCOMMAND_OUTPUTS = {
    "witness": ["trace_distance"],
    "local-global": ["gap"],
    "correlations": ["concurrence", "discord"],
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="centralspins", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("simulate", "witness", "local-global", "correlations", "choi", "kraus", "oracle-check"):
        sp = sub.add_parser(name)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", metavar="PATH")
        src.add_argument("--preset", metavar="NAME", choices=sorted(PRESETS))
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--threads", type=int, metavar="K")
    sp = sub.add_parser("presets", help="write a figure configuration")
    sp.add_argument("name", nargs="?", choices=sorted(PRESETS))
    sp.add_argument("--out", metavar="PATH")
    return ap


def run(args) -> int:
    if args.command == "presets":
        if args.name is None:
            print("\n".join(sorted(PRESETS)))
            return 0
        _emit(json.dumps(preset_config(args.name).to_json(), indent=2) + "\n", args.out)
        return 0

    cfg = load_config(args.config) if args.config else preset_config(args.preset)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg.threads = args.threads
    dest = args.out if args.out is not None else cfg.output_path

    if args.command in ("choi", "kraus"):
        dump = channel_dump(cfg, args.command)
        # output_path in a config names the CSV; channel dumps go to --out or stdout
        _emit(json.dumps(dump, indent=1) + "\n", args.out)
        return 0
    if args.command == "oracle-check":
        return 0 if oracle_check(cfg) else 1

    if args.command == "simulate":
        outputs = list(cfg.outputs) + ([] if "rho" in cfg.outputs else ["rho"])
    else:
        outputs = _SUBCOMMAND_OUTPUTS[args.command]
    header, rows = trajectory_rows(cfg, outputs)
    _write_csv(header, rows, dest)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
