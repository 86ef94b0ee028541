"""
Configuration loading and deterministic artifact writing for the command line.
"""

import hashlib
import json
import math
from importlib import resources

import jsonschema
import numpy as np

from . import __version__
from .dynamics import IntegratorOptions
from .errors import ConfigError, ScqaError
from .phasespace import GaussianState
from .weyl import PolySymbol


def load_schema():
    return json.loads(resources.files("scqa").joinpath("config_schema.json").read_text())


def _path(error):
    return "/".join(str(p) for p in error.absolute_path) or "<root>"


def validate_config(config):
    """Schema validation; the first error (by path) becomes a ``ConfigError``."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        raise ConfigError(errors[0].message, _path(errors[0]))
    return config


def load_config(path):
    try:
        with open(path) as fh:
            config = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file {path}", "--config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "--config") from exc
    return validate_config(config)


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(config):
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def _fmt_float(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0:
        x = 0.0  # drop the sign of -0.0
    return "%.17g" % x


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()] if obj.dtype != object else [_plain(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent=2):
    """Deterministic JSON: sorted keys, floats with 17 significant digits, complex as {re, im}."""
    return _encode(_plain(obj), indent, 0) + "\n"


def write_json(path, payload, config):
    body = dict(payload)
    body["config_hash"] = config_hash(config)
    body["tool_version"] = __version__
    with open(path, "w") as fh:
        fh.write(dumps(body))
    return path


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % float(v) for v in row) + "\n")
    return path


# ---------------------------------------------------------------------------
# builders


def _guard(where, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError, SyntaxError, KeyError) as exc:
        raise ConfigError(str(exc), where) from exc
    except ScqaError as exc:
        raise ConfigError(str(exc), where) from exc


def parse_symbol(spec, n, where):
    if isinstance(spec, str):
        return _guard(where, PolySymbol.parse, spec, n)
    sym = _guard(where, PolySymbol.from_records, spec, n)
    if sym.nvars != 2 * n:
        raise ConfigError(f"symbol over {sym.nvars} variables, expected {2 * n}", where)
    return sym


def build_hamiltonian(config):
    n = config.get("modes", 1)
    H = parse_symbol(config["hamiltonian"], n, "hamiltonian")
    if not H.is_real(1e-12):
        raise ConfigError("Hamiltonian symbol must have real coefficients", "hamiltonian")
    return H


def build_state(config):
    """Initial state; family ``stationary`` returns ``None`` (resolved by the caller)."""
    n = config.get("modes", 1)
    hbar = config.get("hbar", 1.0)
    spec = config.get("state", {"family": "vacuum"})
    fam = spec["family"]
    mean = np.array(spec.get("mean", np.zeros(2 * n)), dtype=float)
    if mean.shape != (2 * n,):
        raise ConfigError(f"mean must have length {2 * n}", "state/mean")

    def build():
        if fam == "vacuum":
            return GaussianState(mean, 0.5 * hbar * np.eye(2 * n), hbar)
        if fam == "coherent":
            return GaussianState.coherent(mean, hbar)
        if fam == "squeezed":
            if n != 1:
                raise ValueError("squeezed family is single-mode")
            return GaussianState.squeezed(spec.get("r", 0.0), mean, hbar, spec.get("phi", 0.0))
        if fam == "thermal":
            return GaussianState.thermal(spec.get("nu", 0.5 * hbar), n, mean, hbar)
        if fam == "gaussian":
            if "cov" not in spec:
                raise ValueError("family 'gaussian' needs 'cov'")
            return GaussianState(mean, np.array(spec["cov"], dtype=float), hbar)
        return None

    return _guard("state", build)


def initial_covariance(config):
    """Covariance used to seed the stationary solver."""
    n = config.get("modes", 1)
    hbar = config.get("hbar", 1.0)
    spec = config.get("state", {})
    if "cov" in spec:
        return np.array(spec["cov"], dtype=float)
    if "nu" in spec:
        return spec["nu"] * np.eye(2 * n)
    return 0.5 * hbar * np.eye(2 * n)


def build_options(config):
    spec = dict(config.get("integrator", {}))
    if "invariant_orders" in spec:
        spec["invariant_orders"] = tuple(spec["invariant_orders"])
    return _guard("integrator", IntegratorOptions, **spec)


def response_times(spec):
    """Explicit list of waiting-time tuples from ``times`` and/or ``scan``."""
    N = spec["order"]
    out = [tuple(t) for t in spec.get("times", [])]
    if "scan" in spec:
        sc = spec["scan"]
        base = list(sc["base"])
        if len(base) != N + 1 or sc["index"] > N:
            raise ConfigError(f"scan base must have {N + 1} entries and index <= {N}", "response/scan")
        for v in np.linspace(sc["start"], sc["stop"], sc["num"]):
            row = list(base)
            row[sc["index"]] = float(v)
            out.append(tuple(row))
    for i, t in enumerate(out):
        if len(t) != N + 1:
            raise ConfigError(f"expected {N + 1} waiting times, got {len(t)}", f"response/times/{i}")
        if any(a < b for a, b in zip(t, t[1:])):
            raise ConfigError("waiting times must be non-increasing", f"response/times/{i}")
    if not out and "field" not in spec and "hbar_seq" not in spec:
        raise ConfigError("give 'times', 'scan', 'field' or 'hbar_seq'", "response")
    return out
