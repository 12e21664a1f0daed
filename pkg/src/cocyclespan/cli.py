"""Config parsing, command dispatch, JSON reports, and attractor export.

Matrix entries arrive as decimal strings so binary-exactness detection is
well-defined: a system is flagged exact when every entry round-trips through
float without loss, which switches the 2x2 decision paths to rational
arithmetic. Reports reproduce bit-for-bit under a fixed seed and thread
count; wall time lives in the `meta` section, excluded from that guarantee.

Exit codes: 0 success, 1 hypothesis failed, 2 inconclusive, 3 input error,
4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, ResourceLimitError
from .gibbs import cylinder_weights, kappa_floor, psi_mixing_stat
from .hypotheses import check_hypotheses
from .kernels import active_backend
from .quasimult import empirical_qm
from .spannability import diagnose_failure, minimal_spannable_k
from .systems import GeneratorSystem
from .thermo import (DimensionReport, PotentialSpec, QMInput, QMInputProvider,
                     TargetSequence, affinity_dimension, beta_hat,
                     pressure_bracket, r0_interval, s0_interval, square_pressure)
from .wordspace import DEFAULT_BUDGET, parse_word, word_str

COMMANDS = ("check-hypotheses", "spannability", "qm", "pressure", "s0", "r0",
            "affinity-dim", "mixing", "export-attractor")

EXIT_OK = 0
EXIT_HYPOTHESIS_FAILED = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3
EXIT_RESOURCE = 4


@dataclass
class RunConfig:
    system: GeneratorSystem
    command: str | None
    options: dict
    generator_strings: list[list[str]]
    translation_strings: list[list[str]] | None
    seed: int = 42
    threads: int = os.cpu_count() or 1
    budget: int = DEFAULT_BUDGET
    out: str | None = None
    csv_dir: str | None = None

    def echo(self) -> dict:
        sysblock = {
            "dimension": self.system.dim,
            "generators": self.generator_strings,
            "exact": self.system.exact,
        }
        if self.translation_strings is not None:
            sysblock["translations"] = self.translation_strings
        return {"system": sysblock, "command": self.command, "options": self.options}


def _is_exact_decimal(text: str) -> bool:
    try:
        return Fraction(text) == Fraction(float(text))
    except (ValueError, ZeroDivisionError, OverflowError):
        return False


def _parse_matrix_strings(entries, d: int, where: str) -> tuple[np.ndarray, bool, list[str]]:
    if not isinstance(entries, list) or len(entries) != d * d:
        raise InputError(f"{where}: expected {d * d} row-major decimal strings")
    vals, exact, texts = [], True, []
    for pos, e in enumerate(entries):
        if not isinstance(e, str):
            raise InputError(f"{where}[{pos}]: matrix entries must be decimal strings")
        try:
            vals.append(float(e))
        except ValueError as exc:
            raise InputError(f"{where}[{pos}]: cannot parse {e!r}") from exc
        exact = exact and _is_exact_decimal(e)
        texts.append(e)
    return np.array(vals).reshape(d, d), exact, texts


def parse_config(text: str) -> RunConfig:
    """Parse a UTF-8 JSON run configuration with field-level diagnostics."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "system" not in raw:
        raise InputError("config must be an object with a 'system' block")
    sysblock = raw["system"]
    if not isinstance(sysblock, dict) or "dimension" not in sysblock \
            or "generators" not in sysblock:
        raise InputError("system block needs 'dimension' and 'generators'")
    d = sysblock["dimension"]
    if not isinstance(d, int) or d < 2:
        raise InputError("system.dimension must be an integer >= 2")
    gens_raw = sysblock["generators"]
    if not isinstance(gens_raw, list) or not gens_raw:
        raise InputError("system.generators must be a nonempty list")
    mats, all_exact, gen_strings = [], True, []
    for i, entry in enumerate(gens_raw, start=1):
        M, exact, texts = _parse_matrix_strings(entry, d, f"system.generators[{i}]")
        mats.append(M)
        gen_strings.append(texts)
        all_exact = all_exact and exact
    translations = None
    tr_strings = None
    if sysblock.get("translations") is not None:
        tr_raw = sysblock["translations"]
        if not isinstance(tr_raw, list) or len(tr_raw) != len(mats):
            raise InputError("system.translations must list one vector per generator")
        translations, tr_strings = [], []
        for i, vec in enumerate(tr_raw, start=1):
            if not isinstance(vec, list) or len(vec) != d:
                raise InputError(f"system.translations[{i}]: expected {d} entries")
            try:
                translations.append(np.array([float(x) for x in vec]))
            except (TypeError, ValueError) as exc:
                raise InputError(f"system.translations[{i}]: bad entry") from exc
            tr_strings.append([str(x) for x in vec])
    try:
        system = GeneratorSystem(tuple(mats),
                                 translations=None if translations is None
                                 else tuple(translations),
                                 exact=all_exact)
    except InputError:
        raise
    command = raw.get("command")
    if command is not None and command not in COMMANDS:
        raise InputError(f"unknown command {command!r}; choose from {COMMANDS}")
    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise InputError("options must be an object")
    cfg = RunConfig(system=system, command=command, options=options,
                    generator_strings=gen_strings, translation_strings=tr_strings)
    for key in ("seed", "threads", "budget"):
        if key in options:
            setattr(cfg, key, int(options[key]))
    # early validation of word-typed options against the alphabet
    if "targets" in options and isinstance(options["targets"], dict):
        for w in options["targets"].get("words", []):
            parse_word(str(w), system.ell)
    return cfg


def _jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return repr(obj)


def _targets_from_options(options: dict, ell: int) -> TargetSequence:
    spec = options.get("targets")
    if spec is None:
        raise InputError("this command needs an 'options.targets' block")
    tail = int(spec.get("tail_start", 1))
    if "all_ones" in spec:
        count = int(spec["all_ones"])
        words = tuple(tuple([1] * k) for k in range(1, count + 1))
        return TargetSequence(words=words, tail_start=tail)
    words = tuple(parse_word(str(w), ell) for w in spec.get("words", []))
    return TargetSequence(words=words, tail_start=tail)


def _qm_source(cfg: RunConfig):
    """Per-s QM input for the pressure command: auto, explicit, or absent."""
    mode = cfg.options.get("qm", "auto")
    if mode is None:
        return lambda s, kind: None
    if mode == "auto":
        provider = QMInputProvider(cfg.system, int(cfg.options.get("k_qm", 1)),
                                   seed=cfg.seed, budget=cfg.budget)
        return provider.qm_input
    if isinstance(mode, dict):
        fixed = QMInput(k=int(mode["k"]), C=float(mode["C"]))
        return lambda s, kind: fixed
    raise InputError("options.qm must be 'auto', null, or {'k':, 'C':}")


def export_attractor(system: GeneratorSystem, depth: int, out_path) -> int:
    """Truncated natural-projection point per word of Lambda(depth), as CSV."""
    if system.translations is None:
        raise InputError("export-attractor needs translations")
    if depth < 0:
        raise InputError("depth must be >= 0")
    from .wordspace import check_budget, enumerate_words
    check_budget(system.ell**depth, DEFAULT_BUDGET)
    d = system.dim
    pts = np.zeros((1, d))
    for _ in range(depth):
        layers = [t[None, :] + pts @ A.T for A, t in
                  zip(system.generators, system.translations)]
        pts = np.stack(layers, axis=0).reshape(-1, d)
    header = ["x", "y"] if d == 2 else [f"x{i + 1}" for i in range(d)]
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header + ["word"])
        for word, p in zip(enumerate_words(system.ell, depth), pts):
            writer.writerow([repr(float(x)) for x in p] + [word_str(word, system.ell)])
    return pts.shape[0]


def _run_check_hypotheses(cfg: RunConfig):
    mode = cfg.options.get("mode", "theorem_1_1")
    rep = check_hypotheses(cfg.system, mode, seed=cfg.seed, budget=cfg.budget)
    code = {"Pass": EXIT_OK, "Fail": EXIT_HYPOTHESIS_FAILED,
            "Inconclusive": EXIT_INCONCLUSIVE}[rep.overall]
    return _jsonable(rep), code, list(rep.warnings)


def _run_spannability(cfg: RunConfig):
    k_max = int(cfg.options.get("k_max", 8))
    search = minimal_spannable_k(cfg.system, k_max, seed=cfg.seed, budget=cfg.budget)
    result = _jsonable(search)
    warnings = []
    code = EXIT_OK
    if search.not_found:
        if search.inconclusive_ks:
            warnings.append(f"inconclusive at k in {list(search.inconclusive_ks)}")
            code = EXIT_INCONCLUSIVE
        else:
            diag = diagnose_failure(cfg.system, k_max, seed=cfg.seed, budget=cfg.budget)
            result["diagnosis"] = _jsonable(diag)
    return result, code, warnings


def _run_qm(cfg: RunConfig):
    k = int(cfg.options.get("k", 1))
    n_max = int(cfg.options.get("n_max", 4))
    rep = empirical_qm(cfg.system, k, n_max, seed=cfg.seed, budget=cfg.budget)
    out = _jsonable(rep)
    out["empirical_c"] = {str(n): v for n, v in rep.empirical_c.items()}
    out["witnesses"] = {
        str(n): [word_str(w, cfg.system.ell) for w in ws]
        for n, ws in rep.witnesses.items()}
    warnings = [] if rep.gamma.certified else ["gamma bound is uncertified (d >= 3)"]
    return out, EXIT_OK, warnings


def _run_pressure(cfg: RunConfig):
    kind = cfg.options.get("potential", "sv_s")
    n = int(cfg.options.get("n", 8))
    svals = cfg.options.get("s_grid", [cfg.options.get("s", 1.0)])
    qm_for = _qm_source(cfg)
    out = {"potential": kind, "n": n, "brackets": []}
    warnings = []
    for s in svals:
        s = float(s)
        qm = qm_for(s, "norm_s" if kind == "norm_s" else "sv_s")
        if kind == "sv_s_squared":
            br = square_pressure(cfg.system, s, n, qm, threads=cfg.threads,
                                 budget=cfg.budget)
        else:
            br = pressure_bracket(cfg.system, PotentialSpec(kind, s), n, qm,
                                  threads=cfg.threads, budget=cfg.budget)
        if not br.lower_valid:
            warnings.append(f"s={s}: no positive QM constant, upper bound only")
        out["brackets"].append(_jsonable(br))
    return out, EXIT_OK, warnings


def _dimension_result(rep: DimensionReport):
    return _jsonable(rep), EXIT_OK, list(rep.warnings)


def _run_s0(cfg: RunConfig):
    targets = _targets_from_options(cfg.options, cfg.system.ell)
    n = int(cfg.options.get("n", 10))
    k_qm = int(cfg.options.get("k_qm", 1))
    rep = s0_interval(cfg.system, targets, n, k_qm, seed=cfg.seed,
                      threads=cfg.threads, budget=cfg.budget)
    return _dimension_result(rep)


def _run_r0(cfg: RunConfig):
    n = int(cfg.options.get("n", 10))
    k_qm = int(cfg.options.get("k_qm", 1))
    if "beta" in cfg.options:
        beta = beta_hat(beta=float(cfg.options["beta"]))
    else:
        table = cfg.options.get("psi_table")
        beta = beta_hat(psi_table=table, tail_start=cfg.options.get("tail_start"))
    if beta.value >= 1:
        raise InputError("recurrence dimension needs beta < 1")
    rep = r0_interval(cfg.system, beta.value, n, k_qm, seed=cfg.seed,
                      threads=cfg.threads, budget=cfg.budget)
    out, code, warnings = _dimension_result(rep)
    out["beta"] = _jsonable(beta)
    return out, code, warnings + list(beta.warnings)


def _run_affinity(cfg: RunConfig):
    n = int(cfg.options.get("n", 10))
    k_qm = int(cfg.options.get("k_qm", 1))
    rep = affinity_dimension(cfg.system, n, k_qm, seed=cfg.seed,
                             threads=cfg.threads, budget=cfg.budget)
    return _dimension_result(rep)


def _run_mixing(cfg: RunConfig):
    s = float(cfg.options.get("s", 1.0))
    L = int(cfg.options.get("L", 3))
    gap = int(cfg.options.get("gap", 4))
    k = int(cfg.options.get("connector_k", 1))
    rep = psi_mixing_stat(cfg.system, s, L, gap, connector_k=k,
                          threads=cfg.threads, budget=cfg.budget)
    out = _jsonable(rep)
    warnings = list(rep.warnings)
    code = EXIT_OK
    if cfg.system.dim == 2:
        kf = kappa_floor(cfg.system, s, k, L, seed=cfg.seed, threads=cfg.threads,
                         budget=cfg.budget)
        out["kappa_certificate"] = _jsonable(kf)
        if not kf.certified:
            warnings.append("no kappa certificate: gamma lower bound is zero")
            code = EXIT_INCONCLUSIVE
    weights = cylinder_weights(cfg.system, s, min(L, 4), threads=cfg.threads,
                               budget=cfg.budget)
    out["level_weights_sum"] = float(weights.probs.sum())
    return out, code, warnings


def _run_export(cfg: RunConfig):
    depth = int(cfg.options.get("depth", 6))
    csv_dir = Path(cfg.csv_dir) if cfg.csv_dir else Path(".")
    csv_dir.mkdir(parents=True, exist_ok=True)
    out_path = csv_dir / cfg.options.get("csv_name", "attractor.csv")
    count = export_attractor(cfg.system, depth, out_path)
    return {"points": count, "path": str(out_path), "depth": depth}, EXIT_OK, []


_RUNNERS = {
    "check-hypotheses": _run_check_hypotheses,
    "spannability": _run_spannability,
    "qm": _run_qm,
    "pressure": _run_pressure,
    "s0": _run_s0,
    "r0": _run_r0,
    "affinity-dim": _run_affinity,
    "mixing": _run_mixing,
    "export-attractor": _run_export,
}


def run_command(cfg: RunConfig) -> tuple[dict, int]:
    """Dispatch a parsed config; returns (report, exit code)."""
    if cfg.command not in _RUNNERS:
        raise InputError(f"no command selected; choose from {COMMANDS}")
    start = time.perf_counter()
    result, code, warnings = _RUNNERS[cfg.command](cfg)
    report = {
        "artifact": {"name": "cocyclespan", "version": __version__,
                     "backend": active_backend()},
        "command": cfg.command,
        "config": cfg.echo(),
        "seed": cfg.seed,
        "threads": cfg.threads,
        "budget": cfg.budget,
        "result": result,
        "warnings": warnings,
        "exit_code": code,
        "meta": {"wall_time_s": time.perf_counter() - start},
    }
    return report, code


def report_canonical_json(report: dict) -> str:
    """Deterministic serialization; `meta` (wall time) is excluded."""
    trimmed = {k: v for k, v in report.items() if k != "meta"}
    return json.dumps(trimmed, sort_keys=True, indent=2)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cocyclespan", description=__doc__)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--command", choices=COMMANDS, help="override the config command")
    ap.add_argument("--out", help="write the JSON report here (default stdout)")
    ap.add_argument("--csv-dir", help="directory for CSV outputs")
    ap.add_argument("--seed", type=int, help="random seed (default 42)")
    ap.add_argument("--threads", type=int, help="worker threads (default 1)")
    ap.add_argument("--budget", type=int, help="word enumeration cap (default 2e7)")
    ap.add_argument("--k-max", type=int, dest="k_max")
    ap.add_argument("--k", type=int)
    ap.add_argument("--k-qm", type=int, dest="k_qm")
    ap.add_argument("--n", type=int)
    ap.add_argument("--n-max", type=int, dest="n_max")
    ap.add_argument("--s", type=float)
    ap.add_argument("--L", type=int)
    ap.add_argument("--gap", type=int)
    ap.add_argument("--depth", type=int)
    ap.add_argument("--beta", type=float)
    ap.add_argument("--mode", choices=("theorem_1_1", "corollary_4_3"))
    args = ap.parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text())
        for key in ("k_max", "k", "k_qm", "n", "n_max", "s", "L", "gap", "depth",
                    "beta", "mode"):
            val = getattr(args, key, None)
            if val is not None:
                cfg.options[key] = val
        if args.command:
            cfg.command = args.command
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads is not None:
            cfg.threads = args.threads
        if args.budget is not None:
            cfg.budget = args.budget
        if args.csv_dir:
            cfg.csv_dir = args.csv_dir
        report, code = run_command(cfg)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    text = report_canonical_json(report)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
