"""``mmicp`` command-line front end.

Every command reads a flat typed config (``--config``) overridden by
flags, validates it, and writes UTF-8 CSV/JSON whose first line carries
the sha256 of the resolved config. Outputs depend only on (config, seed).

Exit codes: 0 success, 1 a check failed, 2 bad input (missing file,
malformed CSV, invalid config).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import checks, seeding
from .config import (
    COMMANDS,
    AblateNcalConfig,
    AblateScoresConfig,
    ActiveConfigFile,
    ArcConfig,
    CalibrateConfig,
    ConfigError,
    CoverageConfig,
    MmiConfig,
    OracleCheckConfig,
    PredictSetConfig,
    add_arguments,
    resolve,
)
from .imprecise import UncertaintyReport, csv_header, mmi_pi_rows, mmi_tv_rows
from .scores import ScoreSpec, score_matrix, true_label_scores
from .transducer import CalibrationSet, calibrate, consonant_rows, pvalue_matrix, set_sizes

# ---------------------------------------------------------------- output helpers


def _csv_text(cfg, header, rows) -> str:
    buf = io.StringIO()
    buf.write(cfg.header())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: str | Path | None) -> None:
    if not path:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    return repr(float(v))


def _out_dir(cfg) -> Path:
    if not cfg.out:
        raise ConfigError(f"{cfg.COMMAND} writes several files; pass --out DIR")
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _mean_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
    return float(v.mean()), se


def _need(path: str, what: str) -> str:
    if not path:
        raise ConfigError(f"missing --{what}")
    return path


def _write_significance(cfg, out: Path, stem: str, per_seed: dict) -> None:
    """Per-seed table, mean/SE table and the pairwise Wilcoxon matrix."""
    from .wilcoxon import pvalue_matrix as wilcoxon_matrix

    names = list(per_seed)
    rows = [[s, *(_fmt(per_seed[n][i]) for n in names)] for i, s in enumerate(cfg.seeds)]
    _emit(_csv_text(cfg, ["seed", *names], rows), out / f"{stem}_per_seed.csv")
    rows = [[n, *(_fmt(v) for v in _mean_se(per_seed[n]))] for n in names]
    _emit(_csv_text(cfg, ["strategy", "mean", "se"], rows), out / f"{stem}_mean_se.csv")
    names, M = wilcoxon_matrix(per_seed)
    rows = [[n, *(_fmt(v) for v in row)] for n, row in zip(names, M)]
    _emit(_csv_text(cfg, ["better_than", *names], rows), out / f"{stem}_wilcoxon.csv")


# ---------------------------------------------------------------- calibration I/O


def _load_calibration(path) -> tuple[CalibrationSet, ScoreSpec]:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        cal = CalibrationSet.from_json(json.dumps(d["calibration"]))
        return cal, ScoreSpec.from_dict(d["score"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: not a calibration file ({exc})") from None


def _test_pvalues(cfg) -> np.ndarray:
    from .models import load_proba_matrix

    cal, spec = _load_calibration(_need(cfg.calibration, "calibration"))
    if spec != cfg.score_spec():
        raise ConfigError(f"calibration used {spec.to_dict()}, config asks for {cfg.score_spec().to_dict()}")
    P, _ = load_proba_matrix(_need(cfg.proba, "proba"))
    # test-time randomisation draws from its own stream, distinct from calibration's
    S = score_matrix(P, spec, seeding.rng_for(cfg.seed, seeding.STREAM_SCORE, 1))
    return pvalue_matrix(cal, S)


# ---------------------------------------------------------------- commands


def cmd_calibrate(cfg: CalibrateConfig) -> int:
    from .models import load_proba_matrix

    P, y = load_proba_matrix(_need(cfg.proba, "proba"), _need(cfg.labels, "labels"))
    spec = cfg.score_spec()
    raw = true_label_scores(P, y, spec, seeding.rng_for(cfg.seed, seeding.STREAM_SCORE, 0))
    cal = calibrate(raw, cfg.jitter_eps, seeding.seed_for(cfg.seed, seeding.STREAM_JITTER))
    doc = {
        "config_sha256": cfg.digest(),
        "score": spec.to_dict(),
        "calibration": json.loads(cal.to_json()),
    }
    _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", cfg.out)
    return 0


def cmd_mmi(cfg: MmiConfig) -> int:
    Pc = consonant_rows(_test_pvalues(cfg))
    tv, pi = mmi_tv_rows(Pc), mmi_pi_rows(Pc)
    sizes = [set_sizes(Pc, a) for a in cfg.alphas]
    reports = [
        UncertaintyReport(float(tv[i]), float(pi[i]), {float(a): int(s[i]) for a, s in zip(cfg.alphas, sizes)})
        for i in range(Pc.shape[0])
    ]
    if cfg.format == "json":
        lines = [json.dumps({"config_sha256": cfg.digest()})]
        lines += [json.dumps({"instance_id": i, **r.to_dict()}, sort_keys=True) for i, r in enumerate(reports)]
        _emit("\n".join(lines) + "\n", cfg.out)
    else:
        _emit(_csv_text(cfg, csv_header(cfg.alphas), [r.csv_row(i) for i, r in enumerate(reports)]), cfg.out)
    return 0


def cmd_predict_set(cfg: PredictSetConfig) -> int:
    P = _test_pvalues(cfg)
    if cfg.consonant:
        P = consonant_rows(P)
    rows = []
    for i in range(P.shape[0]):
        for a in cfg.alphas:
            labels = np.flatnonzero(P[i] > a)
            rows.append([i, repr(float(a)), labels.size, " ".join(str(int(v)) for v in labels)])
    _emit(_csv_text(cfg, ["instance_id", "alpha", "size", "labels"], rows), cfg.out)
    return 0


def cmd_coverage(cfg: CoverageConfig) -> int:
    from . import coverage
    from .models import load_proba_matrix

    spec = cfg.score_spec()
    rows = []
    for n_cal in cfg.n_cals:
        seed = seeding.seed_for(cfg.seed, n_cal)
        if cfg.proba:
            P, y = load_proba_matrix(cfg.proba, cfg.labels)
            raw, cons = coverage.proba_true_label_pvalues(P, y, n_cal, cfg.trials, spec, seed, cfg.jitter_eps)
        else:
            model = coverage.BlobModel.random(cfg.blob_k, cfg.blob_d, cfg.blob_spread, cfg.seed)
            model = coverage.BlobModel(model.centers, cfg.blob_noise)
            raw, cons = coverage.true_label_pvalues(model, n_cal, cfg.trials, spec, seed, cfg.jitter_eps)
        rows += coverage.coverage_table(raw, cons, n_cal, cfg.alphas)
    header = ["n_cal", "alpha", "trials", "coverage_raw", "coverage_consonant", "invalid_freq", "sigma",
              "coverage_ok", "validity_ok"]
    body = [
        [r.n_cal, repr(r.alpha), r.trials, repr(r.coverage_raw), repr(r.coverage_consonant), repr(r.invalid_freq),
         repr(r.sigma), str(r.coverage_ok).lower(), str(r.validity_ok).lower()]
        for r in rows
    ]
    _emit(_csv_text(cfg, header, body), cfg.out)
    return 0


def cmd_oracle_check(cfg: OracleCheckConfig) -> int:
    results = checks.run_all(cfg.seed, cfg.profiles, cfg.k_max, cfg.n_cal, cfg.inject_fault)
    text = cfg.header() + "".join(r.line() + "\n" for r in results)
    _emit(text, cfg.out)
    if cfg.out:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in results) else 1


def _synthetic_dataset(cfg, seed: int, n: int):
    from .models import make_blobs

    return make_blobs(n, cfg.blob_k, cfg.blob_d, cfg.blob_spread, seeding.seed_for(cfg.seed, seed, seeding.STREAM_DATA))


def cmd_active(cfg: ActiveConfigFile) -> int:
    from .active import ActiveConfig, run_active
    from .models import load_dataset_csv
    from .strategy import parse_strategies

    out = _out_dir(cfg)
    strategies = parse_strategies(cfg.strategies)
    acfg = ActiveConfig(cfg.n_initial, cfg.n_pool, cfg.n_test, cfg.rounds, cfg.train_fraction, cfg.score_spec(),
                        cfg.jitter_eps)
    learner = cfg.learner_spec()
    fixed = load_dataset_csv(cfg.data) if cfg.data else None
    final = {s.name: [] for s in strategies}
    curve_rows, runs = [], []
    for seed in cfg.seeds:
        data = fixed if fixed is not None else _synthetic_dataset(cfg, seed, cfg.blob_n)
        run_seed = seeding.seed_for(cfg.seed, seed)
        for s in strategies:
            run = run_active(data, s, learner, acfg, run_seed)
            final[s.name].append(run.accuracies[-1])
            curve_rows += [[seed, s.name, r, repr(a)] for r, a in enumerate(run.accuracies)]
            runs.append({"seed": seed, "strategy": s.name, "accuracies": run.accuracies, "acquired": run.acquired})
    _emit(_csv_text(cfg, ["seed", "strategy", "round", "accuracy"], curve_rows), out / "active_curves.csv")
    doc = {"config_sha256": cfg.digest(), "runs": runs}
    _emit(json.dumps(doc, sort_keys=True) + "\n", out / "active_runs.json")
    _write_significance(cfg, out, "active_final_accuracy", final)
    _emit(cfg.header() + cfg.render(), out / "config.txt")
    return 0


def _arc_inputs(cfg, seed: int):
    """(proba, labels, split) for one experiment seed."""
    from .models import fit, load_proba_matrix
    from .selective import SelectiveConfig, split_cal_test

    scfg = SelectiveConfig(cfg.n_cal, cfg.n_test, cfg.score_spec(), cfg.jitter_eps, cfg.grid_points, cfg.max_rejection)
    run_seed = seeding.seed_for(cfg.seed, seed)
    if cfg.proba:
        P, y = load_proba_matrix(cfg.proba, cfg.labels)
        return P, y, split_cal_test(P.shape[0], scfg, run_seed), run_seed
    data = _synthetic_dataset(cfg, seed, cfg.n_train + cfg.n_cal + cfg.n_test)
    model = fit(cfg.learner_spec(), data.subset(np.arange(cfg.n_train)))
    rest = np.arange(cfg.n_train, len(data))
    P = model.predict_proba(data.features[rest])
    y = data.labels[rest]
    return P, y, split_cal_test(P.shape[0], scfg, run_seed), run_seed


def _arc_sweep(cfg, strategies):
    """Per-strategy lists of (seed, ArcCurve), same split for every strategy."""
    from .selective import SelectiveConfig, run_selective

    scfg = SelectiveConfig(cfg.n_cal, cfg.n_test, cfg.score_spec(), cfg.jitter_eps, cfg.grid_points, cfg.max_rejection)
    curves = {s.name: [] for s in strategies}
    for seed in cfg.seeds:
        P, y, split, run_seed = _arc_inputs(cfg, seed)
        for s in strategies:
            curves[s.name].append((seed, run_selective(P, y, s, scfg, run_seed, split=split).curve))
    return curves


def _safe(name: str) -> str:
    return name.replace("@", "_")


def cmd_arc(cfg: ArcConfig) -> int:
    from .strategy import parse_strategies

    out = _out_dir(cfg)
    curves = _arc_sweep(cfg, parse_strategies(cfg.strategies))
    long_rows, summary = [], []
    for name, runs in curves.items():
        for seed, c in runs:
            long_rows += [[name, seed, repr(float(r)), repr(float(a))] for r, a in zip(c.rejection_rates, c.accuracies)]
            summary.append([name, seed, repr(c.auarc)])
        grid = runs[0][1].rejection_rates
        mean_acc = np.mean([c.accuracies for _, c in runs], axis=0)
        rows = [[repr(float(r)), repr(float(a))] for r, a in zip(grid, mean_acc)]
        _emit(_csv_text(cfg, ["rejection_rate", "accuracy"], rows), out / f"arc_curve_{_safe(name)}.csv")
    _emit(_csv_text(cfg, ["strategy", "seed", "rejection_rate", "accuracy"], long_rows), out / "arc_curves.csv")
    _emit(_csv_text(cfg, ["strategy", "seed", "auarc"], summary), out / "arc_summary.csv")
    _write_significance(cfg, out, "arc_auarc", {n: [c.auarc for _, c in runs] for n, runs in curves.items()})
    _emit(cfg.header() + cfg.render(), out / "config.txt")
    return 0


def _ablation(cfg, variants, label: str, stem: str) -> int:
    """Shared loop for the score and calibration-size ablations."""
    from .strategy import parse_strategies

    out = _out_dir(cfg)
    strategies = parse_strategies(cfg.strategies)
    long_rows, summary = [], []
    for value, sub in variants:
        curves = _arc_sweep(sub, strategies)
        for name, runs in curves.items():
            vals = [c.auarc for _, c in runs]
            long_rows += [[value, name, seed, repr(c.auarc)] for seed, c in runs]
            summary.append([value, name, *(_fmt(v) for v in _mean_se(vals))])
    _emit(_csv_text(cfg, [label, "strategy", "seed", "auarc"], long_rows), out / f"{stem}.csv")
    _emit(_csv_text(cfg, [label, "strategy", "mean", "se"], summary), out / f"{stem}_mean_se.csv")
    _emit(cfg.header() + cfg.render(), out / "config.txt")
    return 0


def cmd_ablate_scores(cfg: AblateScoresConfig) -> int:
    from dataclasses import replace

    return _ablation(cfg, [(s, replace(cfg, score=s)) for s in cfg.scores], "score", "ablate_scores")


def cmd_ablate_ncal(cfg: AblateNcalConfig) -> int:
    from dataclasses import replace

    return _ablation(cfg, [(n, replace(cfg, n_cal=n)) for n in cfg.n_cals], "n_cal", "ablate_ncal")


HANDLERS = {
    "calibrate": cmd_calibrate,
    "mmi": cmd_mmi,
    "predict-set": cmd_predict_set,
    "coverage": cmd_coverage,
    "oracle-check": cmd_oracle_check,
    "active": cmd_active,
    "arc": cmd_arc,
    "ablate-scores": cmd_ablate_scores,
    "ablate-ncal": cmd_ablate_ncal,
}

_HELP = {
    "calibrate": "score a labelled probability matrix and freeze the calibration set",
    "mmi": "per-instance MMI-TV, MMI-pi and set sizes",
    "predict-set": "conformal prediction sets at each alpha",
    "coverage": "Monte Carlo marginal coverage and uniform validity",
    "oracle-check": "closed forms against subset-enumeration oracles",
    "active": "active-learning comparison of acquisition strategies",
    "arc": "accuracy-rejection curves and AUARC comparison",
    "ablate-scores": "AUARC across nonconformity scores",
    "ablate-ncal": "AUARC across calibration-set sizes",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmicp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, cls in COMMANDS.items():
        add_arguments(sub.add_parser(name, help=_HELP[name]), cls)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(COMMANDS[args.command], args)
        return HANDLERS[args.command](cfg)
    except (OSError, ValueError) as exc:
        # ConfigError, OracleSizeError and malformed-input errors are ValueErrors
        msg = f"{exc.strerror}: {exc.filename}" if isinstance(exc, OSError) and exc.filename else str(exc)
        print(f"mmicp {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
