"""Experiment configuration files.

A config is a JSON object::

    {
      "problem": {"kind": "logistic", "dim": 20, "seed": 1, "params": {"n_samples": 100}},
      "method": "otm",
      "params": {"M": null, "sigma": 0.5, "eta": null, "K": 200},
      "targets": [1e-2, 1e-4, 1e-6, 1e-8],
      "seed": 0,
      "out": "runs/otm-logistic"
    }

Only ``problem.kind`` is required. ``params.M`` and ``params.L`` default to the
problem's Hessian Lipschitz bound, ``params.R`` to ||x0 - x*|| from the
reference solution, and ``params.eta`` to the optimal value for that R.
``params.x0`` is a list of coordinates, ``"zeros"`` (default) or ``"random"``
(standard normal drawn from ``seed``). ``fit_range`` (default ``[20, 200]``)
sets the slope-fit window used by ``compare``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..errors import ConfigError
from ..oracle import PROBLEM_KINDS, ProblemSpec
from ..outer import METHODS

TOP_KEYS = {"problem", "method", "params", "targets", "seed", "out", "fit_range", "reference_tol"}
PARAM_KEYS = {"M", "sigma", "eta", "K", "L", "R", "x0", "subsolver_tol", "grad_floor_rtol",
              "inner_max_iter", "lambda0", "bisection_max_steps"}
PROBLEM_KEYS = {"kind", "dim", "seed", "params"}


@dataclass
class ExperimentConfig:
    problem: ProblemSpec
    method: str = "otm"
    params: dict[str, Any] = field(default_factory=dict)
    targets: list = field(default_factory=lambda: [1e-2, 1e-4, 1e-6, 1e-8])
    seed: int = 0
    out: str = "runs/experiment"
    fit_range: tuple = (20, 200)
    reference_tol: float = 1e-12
    source: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {"problem": self.problem.to_dict(), "method": self.method, "params": dict(self.params),
                "targets": list(self.targets), "seed": self.seed, "out": self.out,
                "fit_range": list(self.fit_range), "reference_tol": self.reference_tol}


def _locate(text: Optional[str], key: str) -> str:
    """Best-effort ``line L, column C`` of the first occurrence of a JSON key."""
    if not text:
        return ""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if m is None:
        return ""
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return f" (line {line}, column {col})"


def _fail(msg: str, text: Optional[str], key: str, where: str = "") -> ConfigError:
    prefix = f"{where}: " if where else ""
    return ConfigError(f"{prefix}{msg}{_locate(text, key)}")


def config_from_dict(data: Any, text: Optional[str] = None, where: str = "") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: config must be a JSON object")
    unknown = set(data) - TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise _fail(f"unknown field {key!r}", text, key, where)

    prob = data.get("problem")
    if not isinstance(prob, dict):
        raise _fail("field 'problem' is required and must be an object", text, "problem", where)
    bad = set(prob) - PROBLEM_KEYS
    if bad:
        key = sorted(bad)[0]
        raise _fail(f"unknown field 'problem.{key}'", text, key, where)
    kind = prob.get("kind")
    if kind not in PROBLEM_KINDS:
        raise _fail(f"field 'problem.kind' must be one of {list(PROBLEM_KINDS)}, got {kind!r}",
                    text, "kind", where)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise _fail("field 'seed' must be an integer", text, "seed", where)
    dim = prob.get("dim", 10)
    if not isinstance(dim, int) or dim < 1:
        raise _fail("field 'problem.dim' must be a positive integer", text, "dim", where)
    pparams = prob.get("params", {})
    if not isinstance(pparams, dict):
        raise _fail("field 'problem.params' must be an object", text, "params", where)
    spec = ProblemSpec(kind, dim, int(prob.get("seed", seed)), dict(pparams))

    method = data.get("method", "otm")
    if method not in METHODS:
        raise _fail(f"field 'method' must be one of {list(METHODS)}, got {method!r}", text,
                    "method", where)

    params = data.get("params", {})
    if not isinstance(params, dict):
        raise _fail("field 'params' must be an object", text, "params", where)
    unknown = set(params) - PARAM_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise _fail(f"unknown field 'params.{key}'", text, key, where)
    for key in ("M", "sigma", "eta", "L", "R", "subsolver_tol", "grad_floor_rtol", "lambda0"):
        val = params.get(key)
        if val is not None and (not isinstance(val, (int, float)) or isinstance(val, bool)):
            raise _fail(f"field 'params.{key}' must be a number or null", text, key, where)
    for key in ("K", "inner_max_iter", "bisection_max_steps"):
        val = params.get(key)
        if val is not None and (not isinstance(val, int) or isinstance(val, bool) or val < 1):
            raise _fail(f"field 'params.{key}' must be a positive integer", text, key, where)
    sigma = params.get("sigma")
    if sigma is not None and not 0 < sigma < 1:
        raise _fail("field 'params.sigma' must lie in (0, 1)", text, "sigma", where)
    x0 = params.get("x0")
    if x0 is not None and x0 not in ("zeros", "random"):
        if not isinstance(x0, list) or len(x0) != dim:
            raise _fail(f"field 'params.x0' must be 'zeros', 'random' or a list of {dim} numbers",
                        text, "x0", where)

    targets = data.get("targets", [1e-2, 1e-4, 1e-6, 1e-8])
    if not isinstance(targets, list) or not all(
            isinstance(t, (int, float)) and not isinstance(t, bool) and t > 0 for t in targets):
        raise _fail("field 'targets' must be a list of positive numbers", text, "targets", where)
    fit_range = data.get("fit_range", [20, 200])
    if (not isinstance(fit_range, list) or len(fit_range) != 2
            or not all(isinstance(v, int) for v in fit_range) or not 1 <= fit_range[0] < fit_range[1]):
        raise _fail("field 'fit_range' must be [k_lo, k_hi] with 1 <= k_lo < k_hi", text,
                    "fit_range", where)
    out = data.get("out", "runs/experiment")
    if not isinstance(out, str) or not out:
        raise _fail("field 'out' must be a non-empty string", text, "out", where)
    ref_tol = data.get("reference_tol", 1e-12)
    if not isinstance(ref_tol, (int, float)) or ref_tol <= 0:
        raise _fail("field 'reference_tol' must be positive", text, "reference_tol", where)

    return ExperimentConfig(spec, method, dict(params), [float(t) for t in targets], seed, out,
                            tuple(fit_range), float(ref_tol), where or None)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    return config_from_dict(data, text, str(path))
