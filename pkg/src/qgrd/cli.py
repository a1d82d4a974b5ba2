"""Command-line front end.

    qgrd growth --instance su_q_2 --q 0.5 --gen 1 --N 40 --out growth.csv
    qgrd summability --instance z_d --d 1 --p 2 --N 10000
    qgrd distance --instance z_d --d 1 --state1 char:1 --state2 char:-1 --k 1 --M 6

Exit codes: 0 success, 2 invalid configuration, 3 capability missing,
4 non-convergence under ``--strict``, 1 anything else.  Failures print
``{"error": code, "message": text}`` on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Any

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .elements import GroupAlgElement, random_blocks
from .errors import CapabilityError, ConvergenceError, InstanceError, LengthError, QGError, TruncationError
from .instances import build_instance
from .length import word_length
from .report import csv_text, dumps, fmt

EXPERIMENTS = ("growth", "rd-fit", "modular-contrast", "dirac", "summability", "lipnorm", "distance", "probe")

EXIT_INVALID, EXIT_CAPABILITY, EXIT_CONVERGENCE, EXIT_OTHER = 2, 3, 4, 1

# config key -> (type, default); the JSON config file uses these keys
PARAMS: dict[str, tuple[Any, Any]] = {
    "experiment": (str, None),
    "instance": (str, None),
    "q": (float, None),
    "d": (int, None),
    "rank": (int, None),
    "n_orth": (int, None),
    "gen": (list, None),
    "N": (int, None),
    "M": (float, None),
    "M_op": (float, None),
    "k": (int, 1),
    "p": (float, None),
    "s": (float, None),
    "c": (float, None),
    "n": (float, None),
    "tol": (float, 1e-6),
    "samples": (int, 100),
    "seed": (int, 0),
    "pad": (float, 2.0),
    "scale": (float, 1.0),
    "support": (float, None),
    "element": (str, None),
    "state1": (str, None),
    "state2": (str, None),
    "twisted": (bool, True),
    "strict": (bool, False),
    "threads": (int, None),
    "out": (str, None),
    "format": (str, None),
}


class ConfigError(QGError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qgrd", description="Rapid decay and quantum metric experiments on discrete quantum groups.")
    ap.add_argument("experiment", nargs="?", choices=EXPERIMENTS, default=None)
    ap.add_argument("--config", help="JSON file with the same keys as the flags (dashes as underscores)")
    ap.add_argument("--instance", choices=["z_d", "free_group", "su_q_2", "o_n_plus"])
    ap.add_argument("--q", type=float, help="deformation parameter of su_q_2")
    ap.add_argument("--d", type=int, help="rank of z_d")
    ap.add_argument("--rank", type=int, help="number of free generators of free_group")
    ap.add_argument("--n-orth", dest="n_orth", type=int, help="N of o_n_plus")
    ap.add_argument("--gen", action="append", help="generator label (repeatable or comma-separated list)")
    ap.add_argument("--N", type=int, help="number of shells / largest shell")
    ap.add_argument("--M", type=float, help="truncation level")
    ap.add_argument("--M-op", dest="M_op", type=float, help="operator-norm truncation level")
    ap.add_argument("--k", type=int)
    ap.add_argument("--p", type=float, help="summability exponent")
    ap.add_argument("--s", type=float, help="RD exponent estimate")
    ap.add_argument("--c", type=float, help="RD constant estimate")
    ap.add_argument("--n", type=float, help="split level of the probe")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--pad", type=float, help="extra truncation beyond the shell in rd-fit")
    ap.add_argument("--scale", type=float, help="truncation grows as scale*n + pad in rd-fit")
    ap.add_argument("--support", type=float, help="support radius of random elements")
    ap.add_argument("--element", help="GroupAlgElement JSON (or @file) for lipnorm")
    ap.add_argument("--state1")
    ap.add_argument("--state2")
    ap.add_argument("--untwisted", dest="twisted", action="store_const", const=False, help="use L^k instead of L^k_T")
    ap.add_argument("--strict", action="store_const", const=True, help="fail with exit 4 on non-convergence")
    ap.add_argument("--threads", type=int, help="cap on BLAS/OpenMP threads")
    ap.add_argument("--out", help="output path (stdout if omitted)")
    ap.add_argument("--format", choices=["csv", "json"])
    return ap


def _coerce(key: str, value: Any) -> Any:
    typ = PARAMS[key][0]
    if value is None:
        return None
    try:
        if typ is list:
            items = value if isinstance(value, list) else [value]
            out = []
            for item in items:
                out.extend(t for t in str(item).split(",") if t != "")
            return out
        if typ is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if typ is int and isinstance(value, float) and not value.is_integer():
            raise TypeError
        if typ is int and isinstance(value, bool):
            raise TypeError
        return typ(value)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} expects {typ.__name__}, got {value!r}") from None


def load_config(argv: list[str] | None) -> dict[str, Any]:
    """Merge the JSON config (if any) with flags; flags win."""
    args = build_parser().parse_args(argv)
    cfg: dict[str, Any] = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(data) - set(PARAMS))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg.update(data)
    for key in PARAMS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    out = {}
    for key, (_, default) in PARAMS.items():
        out[key] = _coerce(key, cfg.get(key, default))
    if out["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {list(EXPERIMENTS)}")
    if out["instance"] is None:
        raise ConfigError("--instance is required")
    return out


def _descriptor(cfg) -> dict[str, Any]:
    kind = cfg["instance"]
    desc: dict[str, Any] = {"kind": kind}
    if kind == "su_q_2":
        desc["q"] = cfg["q"] if cfg["q"] is not None else 0.5
    elif kind == "z_d":
        desc["d"] = cfg["d"] if cfg["d"] is not None else 1
    elif kind == "free_group":
        desc["k"] = cfg["rank"] if cfg["rank"] is not None else 2
    elif kind == "o_n_plus":
        desc["N"] = cfg["n_orth"] if cfg["n_orth"] is not None else 3
    else:
        raise ConfigError(f"unknown instance {kind!r}")
    return desc


def _require(cfg, *keys):
    missing = [k for k in keys if cfg[k] is None]
    if missing:
        raise ConfigError(f"experiment {cfg['experiment']} needs {', '.join('--' + m.replace('_', '-') for m in missing)}")


def _positive(cfg, *keys):
    for key in keys:
        if cfg[key] is not None and not cfg[key] > 0:
            raise ConfigError(f"{key} must be positive, got {cfg[key]}")


def validate(cfg) -> None:
    """Parameter checks that must pass before any computation."""
    exp = cfg["experiment"]
    need = {
        "growth": ("N",),
        "rd-fit": ("N",),
        "modular-contrast": ("N",),
        "dirac": ("M",),
        "summability": ("p", "N"),
        "lipnorm": ("k",),
        "distance": ("state1", "state2", "k", "M"),
        "probe": ("k", "n", "c", "s"),
    }[exp]
    _require(cfg, *need)
    _positive(cfg, "tol", "samples", "p", "k", "n", "threads", "q", "scale")
    for key in ("N", "M", "M_op", "pad", "support", "seed"):
        if cfg[key] is not None and cfg[key] < 0:
            raise ConfigError(f"{key} must be non-negative, got {cfg[key]}")
    if exp == "modular-contrast" and cfg["N"] < 8:
        raise ConfigError("modular-contrast needs N >= 8")
    if exp == "probe" and not cfg["k"] > cfg["s"]:
        raise ConfigError(f"probe needs k > s, got k={cfg['k']}, s={cfg['s']}")
    if cfg["format"] is None and cfg["out"]:
        suffix = Path(cfg["out"]).suffix.lower()
        if suffix in (".csv", ".json"):
            cfg["format"] = suffix[1:]


def _state(spec: str, instance, length, M):
    from .cqms import State

    text = spec.strip()
    if text == "haar":
        return State.haar(instance)
    if text == "counit":
        return State.counit(instance)
    if text.startswith("char:"):
        try:
            pts = [complex(t.strip().replace("i", "j")) for t in text[5:].split(",")]
        except ValueError:
            raise ConfigError(f"bad character point in {spec!r}") from None
        return State.character(instance, pts)
    if text.startswith("vec:"):
        # vec:<label> is the vector state of the normalized basis vector ê^label_00
        label = instance.parse_label(text[4:])
        from .grp_alg import GnsBasis

        basis = GnsBasis(length, M)
        xi = np.zeros(basis.size, dtype=complex)
        xi[basis.index(label, 0, 0)] = 1.0
        return State.vector_state(length, M, xi)
    raise ConfigError(f"unknown state {spec!r}; use haar, counit, char:<z>[,<z>...] or vec:<label>")


def _element(cfg, instance, length):
    text = cfg["element"]
    if text is not None:
        if text.startswith("@"):
            text = Path(text[1:]).read_text(encoding="utf-8")
        try:
            return GroupAlgElement.from_json(instance, text)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot parse element: {exc}") from None
    radius = cfg["support"] if cfg["support"] is not None else 2
    rng = np.random.default_rng(cfg["seed"])
    labels = [a for a in length.ball(radius) if a != instance.unit]
    return GroupAlgElement(instance, random_blocks(instance, labels, rng))


def _radius(cfg) -> int:
    exp = cfg["experiment"]
    if exp in ("growth", "modular-contrast", "summability"):
        return int(cfg["N"])
    if exp == "rd-fit":
        return int(math.ceil(cfg["scale"] * cfg["N"] + cfg["pad"] + 2))
    if exp == "dirac":
        return int(math.ceil(cfg["M"]))
    if exp == "lipnorm":
        base = cfg["M"] if cfg["M"] is not None else (cfg["support"] or 2)
        top = cfg["M_op"] if cfg["M_op"] is not None else base + 8
        return int(math.ceil(max(base, top)))
    if exp == "distance":
        m_op = cfg["M_op"] if cfg["M_op"] is not None else 2 * cfg["M"]
        return int(math.ceil(max(cfg["M"], m_op)))
    support = cfg["support"] if cfg["support"] is not None else cfg["n"] + 1
    m_op = cfg["M_op"] if cfg["M_op"] is not None else support + 1
    return int(math.ceil(max(support, m_op)))


def run_experiment(cfg) -> tuple[dict[str, Any], tuple[list[str], list[list[Any]]] | None, bool]:
    """Returns (JSON result, optional CSV table, converged)."""
    from . import cqms, rd, spectral

    instance = build_instance(_descriptor(cfg))
    gens = None if cfg["gen"] is None else [instance.parse_label(t) for t in cfg["gen"]]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        length = word_length(instance, gens, radius=_radius(cfg), require=instance.canonical_generators())
    exp = cfg["experiment"]

    if exp == "growth":
        table = rd.growth_table(instance, length, cfg["N"])
        phi = rd.phi_qn(instance, length, cfg["N"])
        rows = [list(r) + [phi[i]] for i, r in enumerate(table.rows())]
        header = ["n", "count", "sum_dim2", "sum_qdim2", "phi_qn"]
        result = {"rows": [dict(zip(header, r)) for r in rows]}
        return result, (header, rows), True

    if exp == "modular-contrast":
        contrast = rd.compare_modular(instance, length, cfg["N"])
        d = contrast.to_dict()
        header = ["column", "kind", "degree", "rate", "residual_poly", "residual_exp", "tail_change"]
        rows = [[name] + [d[name][h] for h in header[1:]] for name in ("classical", "quantum")]
        return d, (header, rows), True

    if exp == "rd-fit":
        report = rd.rd_test(
            instance, length, cfg["N"], cfg["samples"], cfg["seed"], pad=cfg["pad"], scale=cfg["scale"], tol=cfg["tol"]
        )
        header = ["n", "ratio", "chain_bound", "M_used", "converged", "violations"]
        rows = [[r.n, r.ratio, r.chain_bound, r.M_used, r.converged, r.violations] for r in report.rows]
        return report.to_dict(), (header, rows), report.all_converged

    if exp == "dirac":
        dt = spectral.dirac(instance, length, cfg["M"])
        mult = dt.multiplicities()
        rows = [[v, m] for v, m in sorted(mult.items())]
        return {"M": cfg["M"], "size": dt.basis.size, "spectrum": rows}, (["eigenvalue", "multiplicity"], rows), True

    if exp == "summability":
        rep = spectral.summability_partial(instance, length, cfg["p"], cfg["N"], cfg["s"])
        rows = [[int(n), t, s] for n, t, s in zip(rep.n, rep.terms, rep.partial)]
        result = {
            "p": rep.p,
            "N": cfg["N"],
            "final": rep.final,
            "tail_slope": rep.tail_slope,
            "verdict": rep.verdict,
            "threshold": rep.threshold,
            "above_threshold": rep.above_threshold,
        }
        return result, (["n", "term", "partial_sum"], rows), True

    if exp == "lipnorm":
        if not instance.has_intertwiners:
            raise CapabilityError(f"{instance.name} has no intertwiners")
        a = _element(cfg, instance, length)
        support = max((length(x) for x in a.support()), default=0.0)
        M0 = cfg["M"] if cfg["M"] is not None else max(support, 1.0)
        M_max = cfg["M_op"] if cfg["M_op"] is not None else M0 + 8
        res = spectral.lip_seminorm(a, cfg["k"], length, M0, cfg["tol"], M_max, twisted=cfg["twisted"])
        result = {
            "value": res.estimate,
            "converged": res.converged,
            "M_used": res.M_used,
            "history": list(res.history),
            "lower_bound_sq": spectral.lemma_lower_bound(a, length, cfg["k"]),
            "element": a.to_dict(),
        }
        rows = [[i, h] for i, h in enumerate(res.history)]
        return result, (["step", "estimate"], rows), res.converged

    if exp == "distance":
        mu = _state(cfg["state1"], instance, length, cfg["M"])
        nu = _state(cfg["state2"], instance, length, cfg["M"])
        res = cqms.distance(mu, nu, cfg["k"], length, cfg["M"], cfg["M_op"], twisted=cfg["twisted"])
        result = res.to_dict()
        result["states"] = [mu.describe(), nu.describe()]
        rows = [[res.value, res.seminorm, res.feasibility_residual, res.objective_check, res.M, res.M_op]]
        header = ["value", "seminorm", "feasibility_residual", "objective_check", "M", "M_op"]
        return result, (header, rows), res.converged

    if exp == "probe":
        rep = cqms.total_boundedness_probe(
            instance, cfg["k"], cfg["s"], cfg["n"], length, cfg["samples"], cfg["seed"],
            c_est=cfg["c"], support=cfg["support"], M_op=cfg["M_op"],
        )
        rows = [[i, lo, ta] for i, (lo, ta) in enumerate(zip(rep.low_margin, rep.tail_margin))]
        return rep.to_dict(), (["sample", "low_margin", "tail_margin"], rows), True

    raise ConfigError(f"unknown experiment {exp!r}")


def _provenance(cfg) -> dict[str, Any]:
    return {
        "config": {k: v for k, v in cfg.items() if v is not None},
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def render(cfg, result, table) -> str:
    prov = _provenance(cfg)
    if cfg["format"] == "csv":
        if table is None:
            raise ConfigError(f"experiment {cfg['experiment']} has no CSV form")
        comments = [
            "config: " + json.dumps(prov["config"], sort_keys=True),
            "version: " + prov["version"],
            "timestamp: " + prov["timestamp"],
        ]
        return csv_text(table[0], table[1], comments)
    return dumps({"provenance": prov, "result": result})


def _fail(code: str, message: str, status: int) -> int:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = load_config(argv)
        validate(cfg)
        limits = threadpool_limits(cfg["threads"]) if cfg["threads"] else contextlib.nullcontext()
        with limits:
            result, table, converged = run_experiment(cfg)
        if cfg["strict"] and not converged:
            raise ConvergenceError(f"{cfg['experiment']} did not converge (tol={fmt(cfg['tol'])})")
        text = render(cfg, result, table)
    except (ConfigError, InstanceError, LengthError, TruncationError) as exc:
        return _fail("invalid_config", str(exc), EXIT_INVALID)
    except CapabilityError as exc:
        return _fail("capability_missing", str(exc), EXIT_CAPABILITY)
    except ConvergenceError as exc:
        return _fail("non_convergence", str(exc), EXIT_CONVERGENCE)
    except QGError as exc:
        return _fail("invalid_config", str(exc), EXIT_INVALID)
    except Exception as exc:  # noqa: BLE001 - last-resort machine-readable failure
        return _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_OTHER)
    if cfg["out"]:
        Path(cfg["out"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
