"""``cheb-lab`` command line: zeros, mean squares, the P_odd witness, censuses.

Every command reads a :class:`RunConfig`, either from flags or from a flat
``key=value`` file given with ``--config`` (flags win). Reports go to stdout
as JSON; ``--json`` and ``--csv`` also write them to files.

Exit codes: 0 success, 2 invalid configuration, 3 uncertified zeros,
4 a failed exact identity.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np
from filelock import FileLock

from . import explicit, frobenius, lfunc, primesets, sieve
from .characters import get_character
from .counting import c_chi_all

EXIT_OK, EXIT_CONFIG, EXIT_UNCERTIFIED, EXIT_IDENTITY = 0, 2, 3, 4
COMMANDS = ("zeros", "mean-square", "witness", "census", "dirichlet-check", "catalog")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str = ""
    set: str = "residue q=4 classes=3"
    reference: str = "pi"
    control: str = "residue q=4 classes=3"
    x_max: int = 1_000_000
    height: float = 100.0
    q: int = 4
    index: int = 1
    ext: str = "s3_x3m2"
    x: float = 0.0
    s: complex = 2 + 0j
    x_cut: float = 0.0
    out: str = ""
    csv: str = ""
    json: str = ""
    cache_dir: str = ""
    allow_uncertified: bool = False
    ratio_tol: float = 2.0
    dirichlet_tol: float = 1e-3
    y_step: float = 1e-3

    def to_text(self) -> str:
        return "".join(f"{f.name}={_fmt(getattr(self, f.name))}\n" for f in fields(self))

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key] = val
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: dict, base: RunConfig | None = None) -> RunConfig:
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        base = base or cls()
        out = {}
        for key, raw in values.items():
            out[key] = _convert(key, raw, type(getattr(base, key)))
        cfg = dataclasses.replace(base, **out)
        if cfg.command and cfg.command not in COMMANDS:
            raise ConfigError(f"unknown command {cfg.command!r}")
        return cfg

    @property
    def cache_path(self) -> Path | None:
        root = self.cache_dir or os.environ.get("CHEB_CACHE_DIR", "")
        return Path(root) if root else None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        return repr(v.real) if v.imag == 0 else str(v).strip("()")
    return str(v)


def _convert(key: str, raw, kind):
    if not isinstance(raw, str):
        return kind(raw) if kind is not complex else complex(raw)
    try:
        if kind is bool:
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError(raw)
            return int(value)
        if kind is complex:
            return complex(raw.replace("i", "j").replace(" ", ""))
        return kind(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


# -- shared plumbing -------------------------------------------------------------------


def _content_key(*parts) -> str:
    return hashlib.sha256("|".join(str(p) for p in parts).encode()).hexdigest()[:16]


def load_prime_table(x_max: int, cache: Path | None) -> sieve.PrimeTable:
    """Sieve to ``x_max``, reusing a cached prime file when a cache dir is set."""
    if cache is None:
        return sieve.build_table(x_max)
    path = cache / "primes" / f"primes_{_content_key(x_max, 'CHEBPRIMES1')}.bin"
    path.parent.mkdir(parents=True, exist_ok=True)
    with FileLock(str(path) + ".lock"):
        if path.exists():
            return sieve.load_table(path)
        table = sieve.build_table(x_max)
        tmp = path.with_suffix(".tmp")
        sieve.save_table(table, tmp)
        tmp.replace(path)
        return table


def _zero_db(cfg: RunConfig) -> explicit.ZeroDatabase:
    return explicit.ZeroDatabase(cfg.height, cfg.cache_path, allow_uncertified=cfg.allow_uncertified)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _emit(report: dict, cfg: RunConfig, rows: list[dict] | None = None) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    print(text)
    if cfg.json:
        Path(cfg.json).write_text(text + "\n")
    if cfg.csv and rows:
        with open(cfg.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)


def _fmt_num(v) -> str:
    return repr(float(v)) if v is not None else ""


def _profile_rows(ms: explicit.MeanSquare, label: str) -> list[dict]:
    rows = []
    pv = ms.predicted_values
    for i, y in enumerate(ms.ys):
        emp = complex(ms.values[i]).real
        pred = complex(pv[i]).real if pv is not None else None
        rows.append({"statistic": label, "y": repr(float(y)), "empirical": repr(emp),
                     "predicted": _fmt_num(pred),
                     "residual": _fmt_num(emp - pred if pred is not None else None)})
    return rows


def _ms_summary(ms: explicit.MeanSquare, tol: float) -> dict:
    r = ms.ratio
    return {"empirical": ms.empirical, "prediction": ms.prediction, "ratio": r,
            "within_tolerance": None if r is None else 1 / tol <= r <= tol,
            "residual": ms.residual, "Y": ms.Y, "T": ms.T, "lemma_hypothesis": ms.hypothesis_ok}


# -- commands -------------------------------------------------------------------------


def cmd_zeros(cfg: RunConfig) -> tuple[dict, int, list | None]:
    chi = get_character(cfg.q, cfg.index)
    prim = chi.inducer()
    zs = lfunc.find_zeros(prim, cfg.height)
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        lfunc.write_zero_file(zs, cfg.out)
    report = {"character": chi.descriptor, "primitive": prim.descriptor, "conductor": zs.conductor,
              "parity": zs.parity, "T": zs.height, "count": zs.count(),
              "estimate": lfunc.zero_count_estimate(zs.conductor, zs.height),
              "certified": zs.certified, "residual_bound": zs.residual_bound,
              "first": float(np.min(np.abs(zs.ordinates))) if zs.ordinates.size else None,
              "out": cfg.out or None}
    return report, EXIT_OK if zs.certified else EXIT_UNCERTIFIED, None


def _mean_square_pair(target, cfg: RunConfig, Y: float):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", explicit.LemmaHypothesisWarning)
        uns = explicit.mean_square_unsmoothed(target, Y, step=cfg.y_step)
    smo = explicit.mean_square_smoothed(target, Y, step=cfg.y_step)
    return uns, smo, [str(w.message) for w in caught]


def cmd_mean_square(cfg: RunConfig) -> tuple[dict, int, list | None]:
    spec = primesets.parse_spec(cfg.set)
    ref = explicit.parse_reference(cfg.reference)
    table = load_prime_table(cfg.x_max, cfg.cache_path)
    Y = math.log(cfg.x_max)
    report: dict = {"set": str(spec), "reference": cfg.reference, "x_max": cfg.x_max, "Y": Y}
    notes = []
    try:
        target = explicit.build_model(spec, ref, _zero_db(cfg), cfg.height, table)
    except explicit.NoExplicitFormula as exc:
        target = explicit.discrepancy(spec, ref, table)
        notes.append(f"no explicit formula ({exc}); empirical statistics only")
    uns, smo, warns = _mean_square_pair(target, cfg, Y)
    notes += warns
    if isinstance(target, explicit.DiscrepancyModel):
        report.update(_model_constants(target))
        if target.is_degenerate:
            notes.append("degenerate model: the set has full density against its reference, "
                         "every coefficient vanishes and no lower bound can be drawn")
    report["unsmoothed"] = _ms_summary(uns, cfg.ratio_tol)
    report["smoothed"] = _ms_summary(smo, cfg.ratio_tol)
    report["notes"] = notes
    for w in notes:
        print(f"warning: {w}", file=sys.stderr)
    code = EXIT_OK
    if isinstance(target, explicit.DiscrepancyModel) and not target.certified:
        code = EXIT_UNCERTIFIED
    return report, code, _profile_rows(uns, "unsmoothed") + _profile_rows(smo, "smoothed")


def _model_constants(model: explicit.DiscrepancyModel) -> dict:
    spec = model.spec
    out = {"nu": model.nu, "kappa": model.kappa, "T": model.T, "certified": model.certified,
           "zero_weights": model.char_weights, "zero_count": int(model.ordinates.size),
           "diagnostics": model.diagnostics}
    if isinstance(spec, primesets.ResidueUnion):
        out["c_chi"] = {chi.descriptor: c for chi, c in c_chi_all(spec.classes, spec.q).items()}
    return out


def cmd_witness(cfg: RunConfig) -> tuple[dict, int, list | None]:
    if cfg.x_max < 10_000:
        raise ConfigError("witness needs x_max >= 1e4")
    table = load_prime_table(cfg.x_max, cfg.cache_path)
    checked = primesets.podd_identity_sweep(table)
    Y = math.log(cfg.x_max)
    podd = explicit.discrepancy(primesets.OddIndexed(), "pi-half", table)
    p_uns, p_smo, _ = _mean_square_pair(podd, cfg, Y)
    control = primesets.parse_spec(cfg.control)
    model = explicit.build_model(control, explicit.parse_reference(cfg.reference), _zero_db(cfg),
                                 cfg.height, table)
    c_uns, c_smo, warns = _mean_square_pair(model, cfg, Y)
    report = {
        "x_max": cfg.x_max, "Y": Y,
        "podd_identity": {"primes_checked": checked, "holds": True},
        "podd": {"unsmoothed": p_uns.empirical, "smoothed": p_smo.empirical,
                 "M_at_x_max": float(podd.m_average(cfg.x_max))},
        "control": {"set": str(control), **_model_constants(model),
                    "unsmoothed": _ms_summary(c_uns, cfg.ratio_tol), "smoothed": _ms_summary(c_smo, cfg.ratio_tol)},
        "notes": warns,
    }
    rows = [{"statistic": k, "podd": repr(a), "control": repr(b)} for k, a, b in
            (("unsmoothed", p_uns.empirical, c_uns.empirical),
             ("smoothed", p_smo.empirical, c_smo.empirical))]
    return report, EXIT_OK if model.certified else EXIT_UNCERTIFIED, rows


def cmd_census(cfg: RunConfig) -> tuple[dict, int, list | None]:
    entry = frobenius.get_extension(cfg.ext)
    x = cfg.x or cfg.x_max
    table = load_prime_table(int(max(x, 2)), cfg.cache_path)
    result = frobenius.census(table, entry, x)
    rows = [{"class": cid, **{k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()}}
            for cid, r in result.items()]
    return {"ext": entry.id, "x": x, "group_order": entry.group.order, "classes": result}, EXIT_OK, rows


def cmd_dirichlet_check(cfg: RunConfig) -> tuple[dict, int, list | None]:
    spec = primesets.parse_spec(cfg.set)
    x_cut = cfg.x_cut or cfg.x_max
    table = load_prime_table(int(x_cut), cfg.cache_path)
    res = explicit.dirichlet_integral_check(spec, cfg.reference, cfg.s, x_cut, table)
    ok = res.gap <= cfg.dirichlet_tol
    report = {"set": str(spec), "s": cfg.s, "x_cut": x_cut, "lhs": res.lhs, "rhs": res.rhs,
              "gap": res.gap, "tail_bound": res.tail_bound, "tolerance": cfg.dirichlet_tol, "ok": ok}
    return report, EXIT_OK if ok else EXIT_IDENTITY, None


def cmd_catalog(cfg: RunConfig) -> tuple[dict, int, list | None]:
    out = []
    for ext_id in frobenius.catalog_ids():
        e = frobenius.get_extension(ext_id)
        out.append({"id": e.id, "description": e.description, "group_order": e.group.order,
                    "classes": {c: e.class_size(c) for c in e.class_ids},
                    "ramified": sorted(e.ramified), "abelian": e.abelian_reduction is not None})
    rows = [{k: e[k] for k in ("id", "description", "group_order", "abelian")} for e in out]
    return {"extensions": out}, EXIT_OK, rows


HANDLERS = {"zeros": cmd_zeros, "mean-square": cmd_mean_square, "witness": cmd_witness,
            "census": cmd_census, "dirichlet-check": cmd_dirichlet_check, "catalog": cmd_catalog}


# -- argument parsing --------------------------------------------------------------------

_FLAGS = {
    "set": ("--set",), "reference": ("--ref", "--reference"), "control": ("--control",),
    "x_max": ("--xmax", "--x-max"), "height": ("--height", "-T"), "q": ("--q",),
    "index": ("--index",), "ext": ("--ext",), "x": ("--x",), "s": ("--s",),
    "x_cut": ("--xcut", "--x-cut"), "out": ("--out",), "csv": ("--csv",), "json": ("--json",),
    "cache_dir": ("--cache-dir",), "ratio_tol": ("--ratio-tol",),
    "dirichlet_tol": ("--dirichlet-tol",), "y_step": ("--y-step",),
}
_USES = {
    "zeros": ("q", "index", "height", "out"),
    "mean-square": ("set", "reference", "x_max", "height", "csv", "json", "cache_dir", "y_step",
                    "ratio_tol"),
    "witness": ("control", "reference", "x_max", "height", "csv", "json", "cache_dir", "y_step",
                "ratio_tol"),
    "census": ("ext", "x", "x_max", "csv", "json", "cache_dir"),
    "dirichlet-check": ("set", "reference", "s", "x_cut", "x_max", "json", "cache_dir",
                        "dirichlet_tol"),
    "catalog": ("csv", "json"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cheb-lab", description="Chebotarev-set laboratory")
    parser.add_argument("--config", help="flat key=value config file")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        for key in _USES[name]:
            p.add_argument(*_FLAGS[key], dest=key, default=None)
        if name in ("mean-square", "witness"):
            p.add_argument("--allow-uncertified", dest="allow_uncertified", action="store_const",
                           const="true", default=None)
    return parser


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    base = RunConfig()
    if args.config:
        try:
            base = RunConfig.from_text(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    given = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    return RunConfig.from_mapping(given, base)


def run(cfg: RunConfig) -> int:
    report, code, rows = HANDLERS[cfg.command](cfg)
    report["exit_code"] = code
    _emit(report, cfg, rows)
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except (ConfigError, primesets.SpecError, frobenius.UnknownExtension,
            explicit.ReferenceMismatch, explicit.NoExplicitFormula) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except explicit.UncertifiedZeros as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except AssertionError as exc:
        print(f"identity failure: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    except (ValueError, sieve.OutOfRange) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
