"""Command-line interface.

Every command writes machine-readable output whose header echoes the flat
JSON configuration it was run with, so a run can be repeated with
``--config`` on the echoed object.

Exit codes: 0 success, 2 invalid configuration or unwritable output,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import KitaevError, NumericalFailure, PreconditionError, SingularInputError, StructureError
from .finite import PAIRING_RTOL, assemble_bdg, eigensolve, localization
from .infinite import BRANCHES, MODULUS_RTOL, spectrum_curve
from .model import ModelParams, periodic_lambda_array
from .polycore import Polynomial
from .skin import bistritz, no_skin_conditions, skin_sweep
from .zeromode import has_zero_mode, zero_mode_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

COMMANDS = ("periodic", "finite", "infinite", "zero-mode", "skin", "bistritz")
_PARAM_NAMES = ("m", "t1", "t2", "d1", "d2")
_CONFIG_KEYS = set(_PARAM_NAMES) | {
    "command",
    "L",
    "n_alpha",
    "n_k",
    "tol_modulus",
    "pairing_rtol",
    "out",
    "format",
    "state",
    "localize",
    "coeffs",
}
_COMPLEX_RE = re.compile(
    r"^(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?"
    r"(?:(?P<im>[+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?)i)?$"
)


class ConfigError(KitaevError, ValueError):
    """Invalid run configuration."""


def parse_complex(text) -> complex:
    """Parse ``"a+bi"``, ``"a-bi"``, ``"bi"``, ``"a"`` or a JSON number."""
    if isinstance(text, bool):
        raise ConfigError(f"not a complex literal: {text!r}")
    if isinstance(text, (int, float)):
        z = complex(text)
    else:
        s = str(text)
        mt = _COMPLEX_RE.match(s)
        if not s or mt is None or (mt.group("re") is None and mt.group("im") is None):
            raise ConfigError(f"not a complex literal: {text!r}")
        re_txt, im_txt = mt.group("re"), mt.group("im")
        if re_txt is not None and im_txt == "":
            # "3i": the regex hands the coefficient to the real group
            re_txt, im_txt = None, re_txt
        re_part = float(re_txt) if re_txt else 0.0
        if im_txt is None:
            im_part = 0.0
        elif im_txt in ("", "+"):
            im_part = 1.0
        elif im_txt == "-":
            im_part = -1.0
        else:
            im_part = float(im_txt)
        if re_txt is not None and im_txt is not None and im_txt[:1] not in ("+", "-"):
            raise ConfigError(f"not a complex literal: {text!r}")
        z = complex(re_part, im_part)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError(f"non-finite value {text!r}")
    return z


def format_complex(z: complex) -> str:
    """Lossless literal accepted by ``parse_complex``."""
    z = complex(z)
    im = repr(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{z.real!r}{im}i"


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class RunConfig:
    command: str
    params: ModelParams | None = None
    L: int | None = None
    n_alpha: int = 1000
    n_k: int = 400
    tolerances: dict = field(default_factory=lambda: {"tol_modulus": MODULUS_RTOL, "pairing_rtol": PAIRING_RTOL})
    output_path: str | None = None
    output_format: str = "csv"
    state: int | None = None
    localize: bool = False
    coeffs: tuple = ()

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command != "bistritz" and self.params is None:
            raise ConfigError("parameters m, t1, t2, d1, d2 are required")
        if self.command == "bistritz" and len(self.coeffs) < 2:
            raise ConfigError("bistritz needs at least two coefficients")
        if self.n_alpha < 8:
            raise ConfigError("n_alpha must be >= 8")
        if self.n_k < 1:
            raise ConfigError("n_k must be >= 1")
        if self.L is not None and self.L < 1:
            raise ConfigError("L must be >= 1")
        if self.command == "finite" and self.L is None:
            raise ConfigError("finite needs L")
        if self.state is not None and self.state < 1:
            raise ConfigError("state length must be >= 1")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        for k, v in self.tolerances.items():
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"tolerance {k} must be positive")

    def to_json(self) -> dict:
        out = {"command": self.command}
        if self.params is not None:
            for name in _PARAM_NAMES:
                out[name] = format_complex(getattr(self.params, name))
        out.update(
            {
                "L": self.L,
                "n_alpha": self.n_alpha,
                "n_k": self.n_k,
                "tol_modulus": self.tolerances["tol_modulus"],
                "pairing_rtol": self.tolerances["pairing_rtol"],
                "format": self.output_format,
                "state": self.state,
                "localize": self.localize,
            }
        )
        if self.coeffs:
            out["coeffs"] = [format_complex(c) for c in self.coeffs]
        return out

    def header(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _as_int(name, v):
    if v is None:
        return None
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ConfigError(f"{name} must be an integer")
    try:
        return int(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be an integer") from exc


def _as_float(name, v):
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number") from exc


def build_config(command: str, file_cfg: dict, flags: dict) -> RunConfig:
    """Merge a config-file dict with command-line flags (flags win)."""
    unknown = set(file_cfg) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(file_cfg)
    merged.update({k: v for k, v in flags.items() if v is not None})
    have = [n for n in _PARAM_NAMES if merged.get(n) is not None]
    params = None
    if have:
        missing = [n for n in _PARAM_NAMES if merged.get(n) is None]
        if missing:
            raise ConfigError(f"missing parameters: {missing}")
        params = ModelParams(*(parse_complex(merged[n]) for n in _PARAM_NAMES))
    coeffs = merged.get("coeffs") or ()
    if isinstance(coeffs, str):
        coeffs = coeffs.split(",")
    tol = {
        "tol_modulus": _as_float("tol_modulus", merged.get("tol_modulus", MODULUS_RTOL)),
        "pairing_rtol": _as_float("pairing_rtol", merged.get("pairing_rtol", PAIRING_RTOL)),
    }
    cfg = RunConfig(
        command=command,
        params=params,
        L=_as_int("L", merged.get("L")),
        n_alpha=_as_int("n_alpha", merged.get("n_alpha", 1000)),
        n_k=_as_int("n_k", merged.get("n_k", 400)),
        tolerances=tol,
        output_path=merged.get("out"),
        output_format=merged.get("format", "csv"),
        state=_as_int("state", merged.get("state")),
        localize=bool(merged.get("localize", False)),
        coeffs=tuple(parse_complex(c) for c in coeffs),
    )
    cfg.validate()
    return cfg


# --- output plumbing ---


@contextlib.contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot write output {path}: {exc.strerror}") from exc
    with fh:
        yield fh


def _write_table(cfg: RunConfig, path, columns, rows, meta=None) -> None:
    with _sink(path) as fh:
        if cfg.output_format == "json":
            doc = {"config": cfg.to_json(), "columns": list(columns), "rows": rows}
            if meta:
                doc["meta"] = meta
            json.dump(doc, fh, indent=1)
            fh.write("\n")
            return
        fh.write(f"# config: {cfg.header()}\n")
        if meta:
            fh.write(f"# meta: {json.dumps(meta, sort_keys=True)}\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(columns)
        wr.writerows(rows)


def _write_json(cfg: RunConfig, path, payload: dict) -> None:
    with _sink(path) as fh:
        json.dump({"config": cfg.to_json(), **payload}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _derived_path(path, tag: str, ext: str | None = None):
    if path is None:
        return None
    p = Path(path)
    return str(p.with_name(f"{p.stem}.{tag}{ext if ext is not None else p.suffix}"))


# --- commands ---


def cmd_periodic(cfg: RunConfig) -> None:
    k = 2 * np.pi * np.arange(cfg.n_k) / cfg.n_k
    lp, lm = periodic_lambda_array(cfg.params, k)
    rows = [[fmt(k[j]), fmt(lp[j].real), fmt(lp[j].imag), fmt(lm[j].real), fmt(lm[j].imag)] for j in range(k.size)]
    _write_table(cfg, cfg.output_path, ["k", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus", "im_lambda_minus"], rows)


def cmd_finite(cfg: RunConfig) -> None:
    L = cfg.L
    dec = eigensolve(
        assemble_bdg(cfg.params, L), want_vectors=cfg.localize, pairing_rtol=cfg.tolerances["pairing_rtol"]
    )
    order = np.lexsort((dec.values.imag, dec.values.real))
    meta = {
        "pairing_residual": dec.pairing_residual,
        "max_abs_lambda": float(np.max(np.abs(dec.values))),
        "precision_flag": dec.precision_flag,
    }
    cols = ["index", "re_lambda", "im_lambda"]
    if cfg.localize:
        cols += ["decay_fit_rate", "fit_quality", "boundary_mass_left", "boundary_mass_right", "verdict"]
    rows = []
    for i, j in enumerate(order):
        lam = dec.values[j]
        row = [str(i), fmt(lam.real), fmt(lam.imag)]
        if cfg.localize:
            rep = localization(dec.vectors[:, j], L)
            row += [
                fmt(rep.decay_fit_rate),
                fmt(rep.fit_quality),
                fmt(rep.boundary_mass_left),
                fmt(rep.boundary_mass_right),
                rep.verdict,
            ]
        rows.append(row)
    _write_table(cfg, cfg.output_path, cols, rows, meta)


def _curve_rows(pts):
    return [
        [fmt(pt.alpha), fmt(pt.lam.real), fmt(pt.lam.imag), pt.branch, fmt(abs(pt.kappa)), fmt(abs(pt.s))]
        for pt in pts
    ]


def cmd_infinite(cfg: RunConfig) -> None:
    curve = spectrum_curve(cfg.params, cfg.n_alpha, cfg.tolerances["tol_modulus"])
    cols = ["alpha", "re_lambda", "im_lambda", "branch", "abs_kappa", "abs_s"]
    meta = {"gaps": [[fmt(a), why] for a, why in curve.gaps]}
    names = BRANCHES + (("ambiguous",) if curve.branch("ambiguous") else ())
    if cfg.output_path is None:
        rows = [r for name in names for r in _curve_rows(curve.branch(name))]
        _write_table(cfg, None, cols, rows, meta)
        return
    for name in names:
        _write_table(cfg, _derived_path(cfg.output_path, name), cols, _curve_rows(curve.branch(name)), meta)


def cmd_zero_mode(cfg: RunConfig) -> None:
    verdict = has_zero_mode(cfg.params)
    payload = {"verdict": verdict.to_json()}
    if cfg.state is not None and verdict.exists:
        psi = zero_mode_state(cfg.params, cfg.state)
        rows = [[str(i), fmt(z.real), fmt(z.imag)] for i, z in enumerate(psi)]
        if cfg.output_path is None or cfg.output_format == "json":
            payload["state"] = rows
        else:
            _write_table(cfg, _derived_path(cfg.output_path, "state", ".csv"), ["component", "re_psi", "im_psi"], rows)
    _write_json(cfg, cfg.output_path, payload)


def cmd_skin(cfg: RunConfig) -> None:
    verdicts = skin_sweep(cfg.params, cfg.n_k, offset=0.0)
    conds = no_skin_conditions(cfg.params)
    rows = []
    for v in verdicts:
        rows.append(
            [
                fmt(v.k),
                fmt(v.lam.real),
                fmt(v.lam.imag),
                "" if v.on_circle_count is None else str(v.on_circle_count),
                "special" if v.special else str(v.skin).lower(),
                v.matched_condition or "",
            ]
        )
    summary = {
        "conditions": [
            {
                "label": c.label,
                "k_range": c.k_range.describe(),
                "intervals": [[fmt(a), fmt(b)] for a, b in c.k_range.intervals()],
            }
            for c in conds
        ],
        "n_skin": sum(1 for v in verdicts if v.skin is True),
        "n_no_skin": sum(1 for v in verdicts if v.skin is False),
        "n_special": sum(1 for v in verdicts if v.special),
        "n_inconsistent": sum(1 for v in verdicts if not v.consistent),
    }
    cols = ["k", "re_lambda", "im_lambda", "on_circle_count", "skin", "matched_condition"]
    if cfg.output_path is None:
        _write_table(cfg, None, cols, rows, summary)
        return
    _write_table(cfg, cfg.output_path, cols, rows)
    _write_json(cfg, _derived_path(cfg.output_path, "summary", ".json"), {"summary": summary})


def cmd_bistritz(cfg: RunConfig) -> None:
    out = bistritz(Polynomial(np.array(cfg.coeffs, dtype=complex)))
    payload = {
        "n": out.n,
        "inside": out.alpha_n,
        "on": out.beta_n,
        "outside": out.gamma_n,
        "nu_n": out.nu_n,
        "nu_s": out.nu_s,
        "singular_level": out.singular_level,
        "unit_roots": out.unit_roots,
        "ambiguous": out.ambiguous,
    }
    _write_json(cfg, cfg.output_path, payload)


_DISPATCH = {
    "periodic": cmd_periodic,
    "finite": cmd_finite,
    "infinite": cmd_infinite,
    "zero-mode": cmd_zero_mode,
    "skin": cmd_skin,
    "bistritz": cmd_bistritz,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name in _PARAM_NAMES:
        common.add_argument(f"--{name}", help="complex literal, e.g. 2+1i")
    common.add_argument("--L", type=int, help="chain length")
    common.add_argument("--n-alpha", dest="n_alpha", type=int, help="alpha grid size (default 1000)")
    common.add_argument("--n-k", dest="n_k", type=int, help="momentum grid size (default 400)")
    common.add_argument("--out", help="output path (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--tol-modulus", dest="tol_modulus", type=float, help="equal-modulus relative tolerance")
    common.add_argument("--pairing-rtol", dest="pairing_rtol", type=float, help="particle-hole pairing threshold")
    common.add_argument("--state", type=int, help="zero-mode: also emit the state for this chain length")
    common.add_argument("--localize", action="store_true", default=None, help="finite: add localisation columns")
    common.add_argument("--coeffs", help="bistritz: comma-separated ascending coefficients")
    common.add_argument("--config", help="flat JSON config file; flags override it")
    parser = argparse.ArgumentParser(prog="nhkitaev", description="Open non-hermitian Kitaev chain spectra.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _join_signed_values(argv: list[str]) -> list[str]:
    # argparse reads "-1+2i" as an option; glue it to its flag instead
    value_flags = {f"--{n}" for n in _PARAM_NAMES} | {"--coeffs"}
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in value_flags and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_signed_values(argv))
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_cfg = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    file_cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
            if not isinstance(file_cfg, dict):
                raise ConfigError("config file must hold a JSON object")
        cfg = build_config(args.command, file_cfg, flags)
        _DISPATCH[cfg.command](cfg)
    except (ConfigError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularInputError, StructureError, NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
