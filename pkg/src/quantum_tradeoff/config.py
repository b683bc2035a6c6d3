"""JSON run configuration: schema validation and construction of library objects."""
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .experiments import Sampler
from .measurements import Povm
from .quantum_objects import (
    DensityMatrix,
    Observable,
    density_from_bloch,
    maximally_mixed,
    random_state,
    spin_family_state,
    spin_operators,
)


def schema():
    text = resources.files(__package__).joinpath("config_schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True, eq=False)
class RunConfig:
    state: DensityMatrix
    x1: Observable
    x2: Observable
    raw: dict
    sampler: Sampler = field(default_factory=Sampler)
    n: int = 100_000
    seed: int = 0
    output: str = None
    q1: float = None
    povm: Povm = None
    resolution: int = 200
    estimation: dict = field(default_factory=dict)
    spin_angles: tuple = None  # (angle1, angle2) when both observables are in-plane spin

    @property
    def d(self):
        return self.state.dim


def _matrix(entries):
    rows = []
    for row in entries:
        rows.append([complex(e[0], e[1]) if isinstance(e, list) else complex(e) for e in row])
    m = np.array(rows, dtype=complex)
    if m.shape[0] != m.shape[1]:
        raise ConfigError(f"matrix must be square, got shape {m.shape}")
    return m


def _state(entry):
    if "matrix" in entry:
        return DensityMatrix.from_matrix(_matrix(entry["matrix"]))
    if "bloch" in entry:
        theta = np.asarray(entry["bloch"], dtype=float)
        d = math.isqrt(len(theta) + 1)
        if d * d - 1 != len(theta):
            raise ConfigError(f"Bloch vector length {len(theta)} is not d^2 - 1")
        return density_from_bloch(d, theta)
    family = entry["family"]
    if family == "spin":
        return spin_family_state(entry["S"], entry["r"])
    if family == "maximally_mixed":
        return maximally_mixed(entry["d"])
    return random_state(entry["d"], np.random.default_rng(entry["seed"]))


def _observable(entry):
    if "matrix" in entry:
        return Observable.from_matrix(_matrix(entry["matrix"])), None
    s = entry["spin"]
    fam = spin_operators(s["S"])
    if "angle" in s:
        return fam.in_plane(s["angle"]), s["angle"]
    return fam.along(s["direction"]), None


def parse_config(doc, base_dir=None):
    """Validate a config document and build the objects it describes."""
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
    try:
        state = _state(doc["state"])
        (x1, a1), (x2, a2) = (_observable(o) for o in doc["observables"])
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc)) from exc
    d = state.dim
    if doc.get("dim", d) != d or x1.dim != d or x2.dim != d:
        raise ConfigError(
            f"dimension mismatch: state {d}, observables {x1.dim}/{x2.dim}, dim {doc.get('dim')}"
        )
    smp = doc.get("sampler", {"kind": "all"})
    outcomes = smp.get("outcomes")
    sampler = Sampler(
        kind=smp["kind"],
        outcomes=tuple(outcomes) if isinstance(outcomes, list) else outcomes,
        rank=smp.get("rank", 1),
    )
    povm = None
    if "povm" in doc:
        povm = load_povm(_resolve(doc["povm"], base_dir))
        if povm.dim != d:
            raise ConfigError(f"POVM dimension {povm.dim} does not match state dimension {d}")
    return RunConfig(
        state=state,
        x1=x1,
        x2=x2,
        raw=doc,
        sampler=sampler,
        n=doc.get("n", 100_000),
        seed=doc.get("seed", 0),
        output=doc.get("output"),
        q1=doc.get("q1"),
        povm=povm,
        resolution=doc.get("resolution", 200),
        estimation=doc.get("estimation", {}),
        spin_angles=(a1, a2) if a1 is not None and a2 is not None else None,
    )


def load_config(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc, base_dir=path.parent)


def load_povm(path):
    try:
        return Povm.from_json(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read POVM file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid POVM file {path}: {exc}") from exc


def _resolve(p, base_dir):
    p = Path(p)
    if not p.is_absolute() and base_dir is not None and not p.exists():
        return Path(base_dir) / p
    return p
