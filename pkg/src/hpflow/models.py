"""Built-in presets and the on-disk model format.

Model files are YAML or JSON mappings::

    schema_version: 1
    dim_h: 2
    H: [[[0, 0], [0, 0]],
        [[0, 0], [0, 0]]]
    L:
      - [[[0, 0], [1, 0]],
         [[0, 0], [0, 0]]]

Every complex entry is an ``[re, im]`` pair; matrices are lists of rows.
"""
from pathlib import Path
from typing import Optional, Union

import numpy as np
import yaml

from hpflow.semigroups import HERMITIAN_TOL, ModelSpec

__all__ = [
    "MODEL_SCHEMA_VERSION",
    "PRESETS",
    "ModelError",
    "amplitude_damping",
    "dephasing",
    "random_qutrit",
    "pure_hamiltonian",
    "preset",
    "load_model",
    "model_from_dict",
    "model_to_dict",
]

MODEL_SCHEMA_VERSION = 1
DEFAULT_RANDOM_SEED = 42


class ModelError(ValueError):
    """Invalid model description; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def amplitude_damping() -> ModelSpec:
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    return ModelSpec(np.zeros((2, 2)), (lower,))


def dephasing() -> ModelSpec:
    return ModelSpec(np.zeros((2, 2)), (np.diag([1.0, -1.0]) / np.sqrt(2),))


def random_qutrit(seed: int = DEFAULT_RANDOM_SEED) -> ModelSpec:
    """Seeded model with ``dim_h = 3`` and two independent couplings."""
    rng = np.random.default_rng(seed)

    def gaussian():
        return rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))

    A = gaussian()
    H = (A + np.conj(A).T) / 4
    L = tuple(gaussian() / (2 * np.sqrt(3)) for _ in range(2))
    return ModelSpec(H, L)


def pure_hamiltonian() -> ModelSpec:
    H = np.array([[1.0, 0.5], [0.5, -1.0]], dtype=complex)
    return ModelSpec(H, ())


PRESETS = {
    "amplitude-damping": amplitude_damping,
    "dephasing": dephasing,
    "random": random_qutrit,
    "pure-hamiltonian": pure_hamiltonian,
}


def preset(name: str, seed: Optional[int] = None) -> ModelSpec:
    if name not in PRESETS:
        raise ModelError("preset", f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    if name == "random":
        return random_qutrit(DEFAULT_RANDOM_SEED if seed is None else seed)
    return PRESETS[name]()


def _matrix(value, field: str, dim: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ModelError(field, "entries must be [re, im] number pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ModelError(field, f"expected a matrix of [re, im] pairs, got array of shape {arr.shape}")
    if arr.shape[:2] != (dim, dim):
        raise ModelError(field, f"expected {dim}x{dim} entries, got {arr.shape[0]}x{arr.shape[1]}")
    return arr[..., 0] + 1j * arr[..., 1]


def model_from_dict(data: dict, where: str = "model") -> ModelSpec:
    if not isinstance(data, dict):
        raise ModelError(where, "model description must be a mapping")
    version = data.get("schema_version", MODEL_SCHEMA_VERSION)
    if version != MODEL_SCHEMA_VERSION:
        raise ModelError(f"{where}.schema_version", f"unsupported version {version!r}")
    for key in ("dim_h", "H"):
        if key not in data:
            raise ModelError(f"{where}.{key}", "missing")
    dim = data["dim_h"]
    if not isinstance(dim, int) or dim < 1:
        raise ModelError(f"{where}.dim_h", f"must be a positive integer, got {dim!r}")
    H = _matrix(data["H"], f"{where}.H", dim)
    if np.linalg.norm(H - np.conj(H).T) > HERMITIAN_TOL:
        raise ModelError(f"{where}.H", "H not self-adjoint")
    Ls = data.get("L", []) or []
    if not isinstance(Ls, list):
        raise ModelError(f"{where}.L", "must be a list of matrices")
    L = tuple(_matrix(m, f"{where}.L[{j}]", dim) for j, m in enumerate(Ls))
    return ModelSpec(H, L)


def _pairs(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a)]


def model_to_dict(model: ModelSpec) -> dict:
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "dim_h": model.dim_h,
        "H": _pairs(model.H),
        "L": [_pairs(Lj) for Lj in model.L],
    }


def load_model(source: Union[str, Path, dict], seed: Optional[int] = None) -> ModelSpec:
    """Load a model from a preset name, a YAML/JSON file, or an inline mapping."""
    if isinstance(source, dict):
        return model_from_dict(source)
    name = str(source)
    if name in PRESETS:
        return preset(name, seed)
    path = Path(name)
    if not path.exists():
        raise ModelError("model", f"no preset or file named {name!r}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ModelError(str(path), f"unparsable model file: {exc}") from None
    return model_from_dict(data, where=str(path))
