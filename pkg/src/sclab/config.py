"""Experiment configuration, deterministic randomness, report persistence.

A config is a strict JSON document: unknown keys are rejected with the
dotted path of the offender, defaults fill everything else. Reports are
written as ``{"meta": {...}, "payload": {...}}`` where the payload block is
byte-deterministic for a fixed config+seed and the meta block holds the
timestamp and anything else allowed to vary between runs.
"""

import csv
import json
import os
import time

import numpy as np

from .errors import IoError, SchemaError

VERSION = "0.1.0"

ENV_OUT_DIR = "SCLAB_OUT_DIR"
ENV_THREADS = "SCLAB_THREADS"

DEFAULTS = {
    "grid": {"n_s": 1537, "n_t": 64, "s_max": 60.0},
    "weights": {"deltas": None, "m_max": 3},   # None -> built-in sequence
    "profile": "exponential",
    "r_min": 0.26,
    "tolerances": {
        "roundtrip": 1.0e-6,
        "projection": 1.0e-8,
        "cutoff_identity": 1.0e-14,
        "sc1_final_ratio": 1.0e-3,
        "contraction": 1.0e-10,
        "newton": 1.0e-9,
        "rank_rel": 1.0e-6,
        "rank_rel_linear": 1.0e-8,
    },
    "seed": 1788,
    "out_dir": "reports",
    "threads": 1,
}


def default_deltas(m_max):
    """Strictly increasing weights 2*pi*(1 - 1/(m+2)) inside (0, 2*pi)."""
    return [2.0 * np.pi * (1.0 - 1.0 / (m + 2)) for m in range(m_max + 1)]


class ExperimentConfig:
    """Validated, immutable bundle of experiment knobs.

    Use :func:`load_config` to build one; construct directly only in tests.
    """

    __slots__ = ("n_s", "n_t", "s_max", "deltas", "m_max", "profile",
                 "r_min", "tolerances", "seed", "out_dir", "threads")

    def __init__(self, n_s, n_t, s_max, deltas, m_max, profile, r_min,
                 tolerances, seed, out_dir, threads):
        self.n_s = int(n_s)
        self.n_t = int(n_t)
        self.s_max = float(s_max)
        self.deltas = tuple(float(d) for d in deltas)
        self.m_max = int(m_max)
        self.profile = str(profile)
        self.r_min = float(r_min)
        self.tolerances = dict(tolerances)
        self.seed = int(seed)
        self.out_dir = str(out_dir)
        self.threads = int(threads)

    def rng(self, salt=0):
        """Deterministic generator; distinct salts give independent streams."""
        return np.random.default_rng((self.seed, salt))

    def snapshot(self):
        """JSON-ready copy of every knob, embedded into report payloads."""
        return {
            "grid": {"n_s": self.n_s, "n_t": self.n_t, "s_max": self.s_max},
            "weights": {"deltas": list(self.deltas), "m_max": self.m_max},
            "profile": self.profile,
            "r_min": self.r_min,
            "tolerances": dict(sorted(self.tolerances.items())),
            "seed": self.seed,
            "threads": self.threads,
            "version": VERSION,
        }


def _check_keys(given, allowed, prefix):
    for key in given:
        if key not in allowed:
            raise SchemaError("unknown key", field=f"{prefix}{key}")


def _merge(user):
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in DEFAULTS.items()}
    _check_keys(user, DEFAULTS, "")
    for key, value in user.items():
        if isinstance(DEFAULTS[key], dict):
            if not isinstance(value, dict):
                raise SchemaError("expected a table", field=key)
            _check_keys(value, DEFAULTS[key], key + ".")
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


def load_config(path=None, overrides=None):
    """Load and validate a JSON config; missing file fields get defaults.

    ``overrides`` is a flat dict of the same schema applied on top (used by
    CLI flags). Environment variables SCLAB_OUT_DIR / SCLAB_THREADS override
    the output directory and thread count only.
    """
    user = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from exc
        if text.strip():
            try:
                user = json.loads(text)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", field="<root>") from exc
            if not isinstance(user, dict):
                raise SchemaError("config root must be an object", field="<root>")
    merged = _merge(user)
    if overrides:
        merged = _merge_overrides(merged, overrides)

    if ENV_OUT_DIR in os.environ:
        merged["out_dir"] = os.environ[ENV_OUT_DIR]
    if ENV_THREADS in os.environ:
        merged["threads"] = int(os.environ[ENV_THREADS])

    return _validate(merged)


def _merge_overrides(merged, overrides):
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in merged.items()}
    for key, value in overrides.items():
        if value is None:
            continue
        if "." in key:
            top, sub = key.split(".", 1)
            if top not in DEFAULTS or not isinstance(DEFAULTS[top], dict):
                raise SchemaError("unknown key", field=key)
            if sub not in DEFAULTS[top]:
                raise SchemaError("unknown key", field=key)
            out[top][sub] = value
        else:
            if key not in DEFAULTS:
                raise SchemaError("unknown key", field=key)
            out[key] = value
    return out


def _validate(merged):
    grid = merged["grid"]
    n_s, n_t, s_max = grid["n_s"], grid["n_t"], grid["s_max"]
    if not (isinstance(n_t, int) and n_t % 2 == 0 and n_t >= 8):
        raise SchemaError("n_t must be an even integer >= 8", field="grid.n_t")
    if not (isinstance(n_s, int) and n_s >= 16):
        raise SchemaError("n_s must be an integer >= 16", field="grid.n_s")
    if not (isinstance(s_max, (int, float)) and s_max > 0):
        raise SchemaError("s_max must be positive", field="grid.s_max")

    weights = merged["weights"]
    m_max = weights["m_max"]
    if not (isinstance(m_max, int) and m_max >= 0):
        raise SchemaError("m_max must be a non-negative integer", field="weights.m_max")
    deltas = weights["deltas"]
    if deltas is None:
        deltas = default_deltas(m_max)
    deltas = [float(d) for d in deltas]
    if len(deltas) < m_max + 1:
        raise SchemaError("need at least m_max+1 deltas", field="weights.deltas")
    if any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise SchemaError("deltas must be strictly increasing", field="weights.deltas")
    if deltas[0] < 0 or any(not (0.0 < d < 2.0 * np.pi) for d in deltas[1:]) \
            or deltas[0] >= 2.0 * np.pi:
        raise SchemaError("deltas must lie in [0, 2*pi) with positive tail",
                          field="weights.deltas")
    for d in deltas:
        if d * s_max >= 600.0:
            raise SchemaError(
                f"delta*s_max = {d * s_max:.1f} >= 600 overflows the weight guard",
                field="weights.deltas")

    profile = merged["profile"]
    if profile not in ("exponential", "logarithmic"):
        raise SchemaError("profile must be 'exponential' or 'logarithmic'",
                          field="profile")

    r_min = float(merged["r_min"])
    if not (0.0 < r_min < 0.5):
        raise SchemaError("r_min must lie in (0, 1/2)", field="r_min")
    if profile == "exponential":
        neck = np.exp(1.0 / r_min) - np.e
        if neck > s_max:
            import warnings
            warnings.warn(
                f"r_min={r_min} gives neck R={neck:.3g} > s_max={s_max}; "
                "necks would not fit the truncated cylinder", stacklevel=2)
            raise SchemaError(
                f"neck R={neck:.3g} at r_min does not fit s_max={s_max}",
                field="r_min")

    tols = merged["tolerances"]
    for name, value in tols.items():
        if not (isinstance(value, (int, float)) and value > 0):
            raise SchemaError("tolerances must be positive",
                              field=f"tolerances.{name}")

    seed = merged["seed"]
    if not isinstance(seed, int):
        raise SchemaError("seed must be an integer", field="seed")
    threads = merged["threads"]
    if not (isinstance(threads, int) and threads >= 1):
        raise SchemaError("threads must be a positive integer", field="threads")

    return ExperimentConfig(n_s=n_s, n_t=n_t, s_max=s_max, deltas=deltas,
                            m_max=m_max, profile=profile, r_min=r_min,
                            tolerances=tols, seed=seed,
                            out_dir=merged["out_dir"], threads=threads)


# -- persistence -------------------------------------------------------------

def canonical_payload_bytes(payload):
    """The byte string the determinism guarantee is stated over."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"),
                      allow_nan=False).encode("utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def persist_report(payload, path, config=None):
    """Write a report: deterministic payload + config snapshot, meta aside."""
    payload = _jsonable(payload)
    if config is not None:
        payload = dict(payload)
        payload["config"] = config.snapshot()
    doc = {
        "meta": {"created_unix": time.time(), "version": VERSION},
        "payload": payload,
    }
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        body = json.dumps({"meta": doc["meta"],
                           "payload": json.loads(canonical_payload_bytes(payload))},
                          indent=2, sort_keys=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(body)
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot write report {path}: {exc}") from exc
    return path


def load_report(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read report {path}: {exc}") from exc
    return doc["payload"]


def persist_csv(rows, path, columns):
    """CSV mirror for tabular report sections."""
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                if isinstance(row, dict):
                    writer.writerow([row[c] for c in columns])
                else:
                    writer.writerow(list(row))
    except OSError as exc:
        raise IoError(f"cannot write csv {path}: {exc}") from exc
    return path
