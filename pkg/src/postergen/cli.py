"""Command-line entry point: ``postergen train | generate | eval | synth``."""

import argparse
import json
import logging
from pathlib import Path
import sys

from .config import CONFIG_ENV, RunConfig
from .corpus import parse_paper
from .metrics import evaluate
from .pipeline import ModelBundle, load_corpus, train, generate
from .render import Theme, build_poster_layout, to_latex, to_svg
from .synthetic import generate_corpus, write_corpus

log = logging.getLogger("postergen")


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage name
        raise StageError(name, exc) from exc


def _config(args, **extra):
    overrides = {
        "seed": args.seed,
        "alpha": getattr(args, "alpha", None),
        "lambda1": getattr(args, "lambda1", None),
        "lambda2": getattr(args, "lambda2", None),
        "beta": getattr(args, "beta", None),
        "rho": getattr(args, "rho", None),
        "n_samples": getattr(args, "n_samples", None),
        "extraction_ratio": getattr(args, "extraction_ratio", None),
        "element_inference": getattr(args, "element_inference", None),
    }
    overrides.update(extra)
    if isinstance(overrides.get("beta"), str) and overrides["beta"] != "auto":
        overrides["beta"] = float(overrides["beta"])
    return RunConfig.load(args.config, **overrides)


def cmd_train(args):
    config = _config(args)
    samples = _stage("load corpus", load_corpus, args.corpus_dir)
    bundle, diag = _stage("fit", train, samples, config)
    out = Path(args.model_out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _stage("write model", bundle.save, out)
    print(f"trained on {len(samples)} posters, {diag['n_panels']} panels, {diag['n_elements']} elements")
    print(f"panel CPD residual variance: s_p={diag['panel_residual_variance']['s_p']:.3g} "
          f"r_p={diag['panel_residual_variance']['r_p']:.3g}")
    print(f"size CPD residual variance: {diag['size_residual_variance']:.3g}; "
          f"IRLS iterations: {diag['irls_iterations']}; beta: {diag['beta']:.4g}")
    for stage in ("extract_seconds", "panel_learn_seconds", "compose_learn_seconds"):
        print(f"time {stage[:-8]}: {diag[stage]:.4f}s")
    print(f"wrote {out}")
    return 0


def cmd_generate(args):
    config = _config(args)
    bundle = _stage("load model", ModelBundle.load, args.model)
    paper_path = Path(args.paper)
    doc = _stage("parse paper", lambda: parse_paper(paper_path.read_bytes()))
    theme = Theme.load(config.theme_path) if config.theme_path else Theme()
    poster = _stage("generate", generate, doc, bundle, config)
    layout = _stage(
        "render", build_poster_layout, poster, config.page_width, config.page_height, config.header_fraction, theme
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    layout_doc = poster.layout.to_dict()
    layout_doc["panels"] = [
        {
            "section_id": spec.section_id,
            "s_p": spec.s_p,
            "r_p": spec.r_p,
            "placements": [
                {"element_id": p.element_id, "hpos": p.hpos, "u_g": p.u_g} for p in comp.placements
            ],
        }
        for spec, comp in zip(poster.specs, poster.compositions)
    ]
    (out / "layout.json").write_text(json.dumps(layout_doc, indent=2) + "\n", encoding="utf-8")
    (out / "poster.svg").write_bytes(to_svg(layout))
    (out / "poster.tex").write_text(to_latex(layout), encoding="utf-8")
    for stage, seconds in poster.timings.items():
        print(f"time {stage}: {seconds:.4f}s")
    for panel in layout.panels:
        if panel.overflow > 0:
            print(f"overflow in panel {panel.panel_id}: {panel.overflow:.2f}", file=sys.stderr)
    print(f"wrote {out / 'layout.json'}, {out / 'poster.svg'}, {out / 'poster.tex'}")
    return 0


def cmd_eval(args):
    config = _config(args)
    bundle = _stage("load model", ModelBundle.load, args.model)
    test = _stage("load corpus", load_corpus, args.corpus_dir)
    train_samples = _stage("load training corpus", load_corpus, args.train_dir) if args.train_dir else None
    report = _stage("evaluate", evaluate, bundle, test, config, train_samples)
    path = Path(args.report)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json() + "\n", encoding="utf-8")
    path.with_suffix(".md").write_text(report.to_markdown(), encoding="utf-8")
    print(report.to_markdown())
    return 0


def cmd_synth(args):
    samples = generate_corpus(
        args.n,
        seed=args.seed if args.seed is not None else 0,
        sigma_s=args.noise,
        sigma_r=args.noise * 10,
        sigma_u=args.noise,
        stochastic_hpos=args.noise > 0,
    )
    write_corpus(samples, args.out)
    print(f"wrote {len(samples)} paper/poster pairs to {args.out}")
    return 0


def build_parser():
    def global_flags(default):
        # sub-commands suppress their defaults so flags given before the command survive
        flags = argparse.ArgumentParser(add_help=False)
        flags.add_argument("--config", default=default, help=f"JSON run config (default: ${CONFIG_ENV})")
        flags.add_argument("--seed", type=int, default=default)
        flags.add_argument("--verbose", "-v", action="store_true", default=default or False)
        return flags

    common = global_flags(argparse.SUPPRESS)

    tuning = argparse.ArgumentParser(add_help=False)
    tuning.add_argument("--alpha", type=float, help="weight of the split symmetry loss")
    tuning.add_argument("--lambda1", type=float)
    tuning.add_argument("--lambda2", type=float)
    tuning.add_argument("--beta", help="area per unit text ratio, or 'auto'")
    tuning.add_argument("--rho", type=float)
    tuning.add_argument("--n-samples", type=int, dest="n_samples")
    tuning.add_argument("--extraction-ratio", type=float, dest="extraction_ratio")
    tuning.add_argument("--element-inference", choices=("map", "mode"), dest="element_inference")

    defaults = json.dumps(RunConfig().to_dict(), indent=2)
    parser = argparse.ArgumentParser(
        prog="postergen",
        parents=[global_flags(None)],
        description="Generate scientific poster layouts from structured paper XML.",
        epilog="Default config:\n" + defaults,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common, tuning], help="fit both networks on a corpus")
    p.add_argument("corpus_dir")
    p.add_argument("model_out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", parents=[common, tuning], help="lay out one paper")
    p.add_argument("paper")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", parents=[common, tuning], help="score a model on annotated posters")
    p.add_argument("corpus_dir")
    p.add_argument("--model", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--train-dir", dest="train_dir", help="training corpus for the ridge baseline")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic corpus")
    p.add_argument("out")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error in stage {exc}", file=sys.stderr)
        log.debug("stage failure", exc_info=True)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
