"""Scenario configuration: sectioned key-value text with inline matrices.

Matrices are written as indented continuation rows of whitespace-separated
complex literals (``a+bj``), or referenced by ``file = path`` pointing to a
file in the operator serialization format.  Sections:

    [system]      d, stats, n_max, hbar, seed, matrix_cap,
                  deterministic_reduction, strict_potentials
    [one_body]    rows = ... | file = ...
    [potential.K] rows = ... | file = ...     (one section per k-body term)
    [initial]     kind = chaos|random|file, plus kind-specific keys
    [run]         times, integrator_steps_per_unit, checks
    [tolerances]  one override per check name
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .hilbert import Statistics, read_operator

KNOWN_CHECKS = (
    "mobius_roundtrip",
    "hierarchy_residual",
    "cumulant_zero_time",
    "cumulant_free",
    "bbgky_residual",
    "definition_consistency",
    "solution_vs_integrator",
    "norm_bound",
    "symmetry_preservation",
)

DEFAULT_TOLERANCES = {
    "mobius_roundtrip": 1e-12,
    "hierarchy_residual": 1e-8,
    "cumulant_zero_time": 1e-13,
    "cumulant_free": 1e-12,
    "bbgky_residual": 1e-10,
    "definition_consistency": 1e-11,
    "solution_vs_integrator": 1e-7,
    "norm_bound": 1e-12,
    "symmetry_preservation": 1e-12,
}


@dataclass(frozen=True)
class InitialData:
    kind: str  # chaos | random | file
    g1: np.ndarray | None = None
    seed: int = 0
    positive: bool = True
    path: Path | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    d: int
    stats: Statistics
    n_max: int
    hbar: float
    one_body: np.ndarray
    potentials: dict[int, np.ndarray]
    initial: InitialData
    times: tuple[float, ...]
    integrator_steps_per_unit: int
    checks: tuple[str, ...]
    tolerances: dict[str, float]
    seed: int
    deterministic_reduction: bool
    matrix_cap: int
    strict_potentials: bool
    digest: str
    base_dir: Path = field(default=Path("."))

    def tolerance(self, check: str) -> float:
        return self.tolerances.get(check, DEFAULT_TOLERANCES[check])


def _parse_matrix(raw: str, side: int, where: str) -> np.ndarray:
    rows = [line for line in (l.strip() for l in raw.splitlines()) if line]
    if len(rows) != side:
        raise ConfigError(f"{where}: expected {side} rows, found {len(rows)}")
    out = np.zeros((side, side), dtype=np.complex128)
    for i, row in enumerate(rows):
        toks = row.split()
        if len(toks) != side:
            raise ConfigError(f"{where}: row {i + 1} has {len(toks)} entries, expected {side}")
        for j, tok in enumerate(toks):
            try:
                out[i, j] = complex(tok)
            except ValueError as exc:
                raise ConfigError(f"{where}: bad complex literal {tok!r} at row {i + 1}") from exc
    return out


def _load_matrix(section: configparser.SectionProxy, side: int, base: Path, where: str) -> np.ndarray:
    if "rows" in section and "file" in section:
        raise ConfigError(f"{where}: give either rows or file, not both")
    if "rows" in section:
        return _parse_matrix(section["rows"], side, where)
    if "file" in section:
        path = base / section["file"]
        if not path.exists():
            raise ConfigError(f"{where}: matrix file not found: {path}")
        with path.open() as fh:
            op = read_operator(fh)
        if op.mat.shape != (side, side):
            raise ConfigError(f"{where}: file {path} holds a {op.mat.shape} matrix, expected ({side}, {side})")
        return np.asarray(op.mat)
    raise ConfigError(f"{where}: missing rows or file")


def _require_hermitian(name: str, mat: np.ndarray) -> None:
    dev = float(np.abs(mat - mat.conj().T).max())
    if dev > 1e-12 * max(1.0, float(np.abs(mat).max())):
        raise ConfigError(f"{name} is not Hermitian: max deviation {dev:.6e}")


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file; every invariant is enforced here
    so downstream code can trust the config."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    text = path.read_text()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"parse error in {path}: {exc}") from exc

    base = path.parent
    if "system" not in parser:
        raise ConfigError(f"{path}: missing [system] section")
    sys_sec = parser["system"]
    try:
        d = sys_sec.getint("d", 2)
        n_max = sys_sec.getint("n_max", 3)
        hbar = sys_sec.getfloat("hbar", 1.0)
        seed = sys_sec.getint("seed", 0)
        matrix_cap = sys_sec.getint("matrix_cap", 4096)
        deterministic = sys_sec.getboolean("deterministic_reduction", True)
        strict_pots = sys_sec.getboolean("strict_potentials", True)
    except ValueError as exc:
        raise ConfigError(f"{path}: bad [system] value: {exc}") from exc
    if d < 2:
        raise ConfigError(f"{path}: d must be >= 2, got {d}")
    if not 1 <= n_max <= 8:
        raise ConfigError(f"{path}: n_max must lie in 1..8, got {n_max}")
    if hbar <= 0:
        raise ConfigError(f"{path}: hbar must be positive, got {hbar}")
    try:
        stats = Statistics(sys_sec.get("stats", "boltzmann").lower())
    except ValueError as exc:
        raise ConfigError(f"{path}: unknown statistics {sys_sec.get('stats')!r}") from exc

    if "one_body" not in parser:
        raise ConfigError(f"{path}: missing [one_body] section")
    one_body = _load_matrix(parser["one_body"], d, base, "[one_body]")
    _require_hermitian("one_body", one_body)

    potentials: dict[int, np.ndarray] = {}
    for name in parser.sections():
        if not name.startswith("potential."):
            continue
        try:
            k = int(name.split(".", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"{path}: bad potential section name [{name}]") from exc
        if k < 2:
            raise ConfigError(f"{path}: potential order must be >= 2, got [{name}]")
        mat = _load_matrix(parser[name], d**k, base, f"[{name}]")
        _require_hermitian(f"potential k={k}", mat)
        potentials[k] = mat

    init_sec = parser["initial"] if "initial" in parser else {"kind": "random"}
    kind = init_sec.get("kind", "random").lower()
    if kind == "chaos":
        g1 = _load_matrix(parser["initial"], d, base, "[initial]")
        _require_hermitian("initial g1", g1)
        initial = InitialData(kind="chaos", g1=g1, seed=seed)
    elif kind == "random":
        init_seed = int(init_sec.get("seed", seed))
        positive = str(init_sec.get("positive", "true")).lower() in ("1", "true", "yes", "on")
        initial = InitialData(kind="random", seed=init_seed, positive=positive)
    elif kind == "file":
        rel = init_sec.get("path")
        if not rel:
            raise ConfigError(f"{path}: [initial] kind=file needs a path")
        seq_path = base / rel
        if not seq_path.exists():
            raise ConfigError(f"{path}: initial sequence file not found: {seq_path}")
        initial = InitialData(kind="file", path=seq_path, seed=seed)
    else:
        raise ConfigError(f"{path}: unknown initial kind {kind!r}")

    run_sec = parser["run"] if "run" in parser else {}
    times_raw = run_sec.get("times") or "0.0 0.5 1.0"
    try:
        times = tuple(float(tok) for tok in times_raw.split())
    except ValueError as exc:
        raise ConfigError(f"{path}: bad times list {times_raw!r}") from exc
    if not all(np.isfinite(times)):
        raise ConfigError(f"{path}: times must be finite")
    steps_per_unit = int(run_sec.get("integrator_steps_per_unit") or 1000)
    if steps_per_unit < 1:
        raise ConfigError(f"{path}: integrator_steps_per_unit must be >= 1")
    checks = tuple((run_sec.get("checks") or "").split())
    for name in checks:
        if name not in KNOWN_CHECKS:
            raise ConfigError(f"{path}: unknown check name {name!r}")

    tolerances: dict[str, float] = {}
    if "tolerances" in parser:
        for key, value in parser["tolerances"].items():
            if key not in KNOWN_CHECKS:
                raise ConfigError(f"{path}: tolerance for unknown check {key!r}")
            tolerances[key] = float(value)

    digest = hashlib.sha256(text.encode()).hexdigest()[:16]
    return ScenarioConfig(
        d=d,
        stats=stats,
        n_max=n_max,
        hbar=hbar,
        one_body=one_body,
        potentials=potentials,
        initial=initial,
        times=times,
        integrator_steps_per_unit=steps_per_unit,
        checks=checks,
        tolerances=tolerances,
        seed=seed,
        deterministic_reduction=deterministic,
        matrix_cap=matrix_cap,
        strict_potentials=strict_pots,
        digest=digest,
        base_dir=base,
    )
