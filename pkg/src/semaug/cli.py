"""Command-line pipeline driver with file-based handoffs between stages.

Exit codes: 0 success, 1 validation/usage error, 2 I/O error. All randomness
flows from --seed; reruns with the same inputs and seeds produce
byte-identical outputs. Existing output files are never overwritten unless
--force is given.

A --config file (TOML or JSON) supplies option defaults; explicit flags win.
Keys may be flat ({"epochs": 20}) or grouped per subcommand
({"train": {"epochs": 20}}), the grouped form taking precedence.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluation, pipeline, prompt_assembler, synth
from .contrastive_trainer import TrainConfig, TrainingDiverged, train
from .dataset import (
    ManifestError,
    SplitSpec,
    load_manifest,
    load_transcripts,
    read_embedding_table,
    read_splits,
    split_dataset,
    write_embedding_table,
    write_manifest,
    write_splits,
    write_transcripts,
)
from .diversity_batcher import (
    build_diverse_batches,
    build_random_batches,
    kmeans_fit,
    mean_pairwise_distance,
    write_batch_plan,
)
from .frame_sampler import middle_frame_indices, uniform_sample_indices
from .resampler_head import (
    FrozenMeanParams,
    HeadConfig,
    load_head_checkpoint,
    save_head_checkpoint,
)

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here is usage text + exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _load_config(path):
    if path is None:
        return {}
    text = Path(path).read_bytes()
    if str(path).endswith(".json"):
        return json.loads(text.decode("utf-8"))
    try:
        import tomllib
    except ImportError:  # python < 3.11
        import tomli as tomllib
    return tomllib.loads(text.decode("utf-8"))


def _resolve(args, config, subcommand, name, default):
    """Explicit flag > config[subcommand][name] > config[name] > default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    section = config.get(subcommand, {})
    if isinstance(section, dict) and name in section:
        return section[name]
    if name in config and not isinstance(config[name], dict):
        return config[name]
    return default


def _check_outputs(paths, force):
    for p in paths:
        if p is not None and Path(p).exists() and not force:
            raise UsageError(f"output {p} exists; pass --force to overwrite")


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def build_parser():
    parser = _Parser(prog="semaug", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None, help="TOML or JSON defaults file")
        p.add_argument("--force", action="store_true")
        p.add_argument("--log-level", dest="sub_log_level", default=None,
                       choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    p = sub.add_parser("split", help="video-level train/val/test split")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--train-frac", type=float, default=None)
    p.add_argument("--val-frac", type=float, default=None)
    p.add_argument("--test-frac", type=float, default=None)

    p = sub.add_parser("gen-synth", help="generate a synthetic concept corpus")
    common(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--concepts", type=int, default=None)
    p.add_argument("--segments-per-concept", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--concept-scale", type=float, default=None)
    p.add_argument("--frame-count", type=int, default=None)
    p.add_argument("--segments-per-video", type=int, default=None)

    p = sub.add_parser("sample-frames", help="emit frame indices per segment")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["middle", "uniform"], default="middle")
    p.add_argument("--k", type=int, default=None, help="sample count for uniform mode")

    p = sub.add_parser("batch-plan", help="build a diversity or random batch plan")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["kmeans", "random"], default="kmeans")
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--splits", default=None)
    p.add_argument("--split", default="train", choices=["train", "val", "test"])

    p = sub.add_parser("train", help="train embedding heads contrastively")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--frames", required=True)
    p.add_argument("--texts", required=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--head", choices=["perceiver", "learnable_pool", "frozen_mean"],
                   default=None)
    p.add_argument("--latents", type=int, default=None)
    p.add_argument("--attn-dim", type=int, default=None)
    p.add_argument("--embed-dim", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--temp-init", type=float, default=None)
    p.add_argument("--temp-fixed", action="store_true")
    p.add_argument("--batching", choices=["kmeans", "random"], default=None)
    p.add_argument("--clusters", type=int, default=None)

    p = sub.add_parser("eval-retrieval", help="Top-1/Top-3 concept retrieval accuracy")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--frames", required=True)
    p.add_argument("--texts", required=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--img-ckpt", default=None)
    p.add_argument("--txt-ckpt", default=None)
    p.add_argument("--frozen-mean", action="store_true",
                   help="evaluate the no-training mean-pool baseline")
    p.add_argument("--out", required=True)
    p.add_argument("--predictions", default=None,
                   help="also write per-segment predicted concepts (JSONL)")

    p = sub.add_parser("prompts", help="assemble summarizer inputs per video")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--transcripts", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-concepts", action="store_true",
                   help="emit bare transcripts (no-augmentation baseline)")
    p.add_argument("--gold-summaries-out", default=None,
                   help="write gold annotation summaries for the same videos")
    p.add_argument("--concept-summaries-out", default=None,
                   help="write predicted-concept summaries for scoring")

    p = sub.add_parser("score", help="ROUGE-1/2/L corpus scores for summaries")
    common(p)
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--label", default="corpus")

    p = sub.add_parser("report", help="render saved JSON artifacts as text tables")
    common(p)
    p.add_argument("--train-report", default=None)
    p.add_argument("--retrieval", default=None)
    p.add_argument("--scores", default=None)
    return parser


def _cmd_split(args, config):
    seed = _resolve(args, config, "split", "seed", 0)
    spec = SplitSpec(
        train_frac=_resolve(args, config, "split", "train_frac", 0.67),
        val_frac=_resolve(args, config, "split", "val_frac", 0.08),
        test_frac=_resolve(args, config, "split", "test_frac", 0.25),
        seed=seed,
    )
    records = load_manifest(args.manifest)
    _check_outputs([args.out], args.force)
    splits = split_dataset(records, spec)
    write_splits(splits, args.out, seed=seed)
    print(f"split {len({r.video_id for r in records})} videos -> "
          f"{len(splits.train)}/{len(splits.val)}/{len(splits.test)}")


def _cmd_gen_synth(args, config):
    spec = synth.SynthSpec(
        concepts=_resolve(args, config, "gen-synth", "concepts", 10),
        segments_per_concept=_resolve(args, config, "gen-synth", "segments_per_concept", 40),
        dim=_resolve(args, config, "gen-synth", "dim", 32),
        noise_sigma=_resolve(args, config, "gen-synth", "noise", 0.3),
        concept_scale=_resolve(args, config, "gen-synth", "concept_scale", 1.5),
        frame_count=_resolve(args, config, "gen-synth", "frame_count", 9),
        segments_per_video=_resolve(args, config, "gen-synth", "segments_per_video", 10),
        seed=_resolve(args, config, "gen-synth", "seed", 0),
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "manifest": out / "manifest.jsonl",
        "transcripts": out / "transcripts.jsonl",
        "frames": out / "frames.semb",
        "texts": out / "texts.semb",
    }
    _check_outputs(paths.values(), args.force)
    corpus = synth.generate_corpus(spec)
    write_manifest(corpus.records, paths["manifest"])
    write_transcripts(corpus.transcripts, paths["transcripts"])
    write_embedding_table(corpus.frame_table, paths["frames"])
    write_embedding_table(corpus.text_table, paths["texts"])
    print(f"wrote {len(corpus.records)} segments over "
          f"{len(corpus.transcripts)} videos to {out}")


def _cmd_sample_frames(args, config):
    records = load_manifest(args.manifest)
    _check_outputs([args.out], args.force)
    k = _resolve(args, config, "sample-frames", "k", 3)
    with open(args.out, "w", encoding="utf-8") as f:
        for rec in records:
            if args.mode == "middle":
                indices = middle_frame_indices(rec.frame_count)
            else:
                indices = uniform_sample_indices(rec.frame_count, k)
            f.write(json.dumps(
                {"video_id": rec.video_id, "segment_id": rec.segment_id,
                 "indices": list(indices)},
                sort_keys=True) + "\n")
    print(f"wrote {args.mode} frame indices for {len(records)} segments")


def _cmd_batch_plan(args, config):
    records = load_manifest(args.manifest)
    if args.splits:
        splits = read_splits(args.splits)
        records = pipeline.subset_records(records, splits.of(args.split))
        if not records:
            raise UsageError(f"split {args.split!r} selects no segments")
    frame_table = read_embedding_table(args.frames)
    _check_outputs([args.out], args.force)
    feats = pipeline.clustering_features(records, frame_table)
    seed = _resolve(args, config, "batch-plan", "seed", 0)
    batch_size = _resolve(args, config, "batch-plan", "batch_size", 16)
    if args.mode == "kmeans":
        k = _resolve(args, config, "batch-plan", "clusters", min(batch_size, len(records)))
        model = kmeans_fit(feats, k=k, seed=seed)
        plan = build_diverse_batches(model, batch_size, seed=[seed, 1])
    else:
        plan = build_random_batches(len(records), batch_size, seed=[seed, 1])
    write_batch_plan(plan, args.out)
    full = [b for b in plan.batches if len(b) >= 2]
    mpd = float(np.mean([mean_pairwise_distance(feats, b) for b in full])) if full else 0.0
    print(f"{len(plan.batches)} batches ({args.mode}); mean pairwise distance {mpd:.4f}")


def _cmd_train(args, config):
    records = load_manifest(args.manifest)
    frame_table = read_embedding_table(args.frames)
    text_table = read_embedding_table(args.texts)
    splits = read_splits(args.splits)
    mode = _resolve(args, config, "train", "head", "perceiver")
    head_config = HeadConfig(
        d=frame_table.dim,
        latent_count=_resolve(args, config, "train", "latents", 8),
        attn_dim=_resolve(args, config, "train", "attn_dim", None),
        embed_dim=_resolve(args, config, "train", "embed_dim", None),
        mode=mode,
    )
    train_config = TrainConfig(
        epochs=_resolve(args, config, "train", "epochs", 50),
        learning_rate=_resolve(args, config, "train", "lr", 0.05),
        batch_size=_resolve(args, config, "train", "batch_size", 16),
        temperature_init=_resolve(args, config, "train", "temp_init", 0.07),
        temperature_learnable=not args.temp_fixed,
        seed=_resolve(args, config, "train", "seed", 0),
        batching_mode=_resolve(args, config, "train", "batching", "kmeans"),
        cluster_count=_resolve(args, config, "train", "clusters", None),
    )
    prefix = args.out_prefix
    out_paths = [f"{prefix}.img.ckpt", f"{prefix}.txt.ckpt", f"{prefix}.report.json"]
    _check_outputs(out_paths, args.force)

    report = train(frame_table, text_table, records, splits, head_config, train_config)
    save_head_checkpoint(out_paths[0], head_config, train_config.seed, report.steps,
                         report.img_params)
    save_head_checkpoint(out_paths[1], head_config, train_config.seed, report.steps,
                         report.txt_params)
    report.checkpoints = {"img": out_paths[0], "txt": out_paths[1]}
    _write_json(report.to_json_dict(), out_paths[2])
    last = report.epoch_losses[-1]
    val = f", val top1 {report.val_top1[-1]:.4f}" if report.val_top1 else ""
    print(f"trained {report.steps} steps; final epoch loss {last:.4f}{val}")


def _cmd_eval_retrieval(args, config):
    records = load_manifest(args.manifest)
    frame_table = read_embedding_table(args.frames)
    text_table = read_embedding_table(args.texts)
    splits = read_splits(args.splits)
    eval_records = pipeline.subset_records(records, splits.of(args.split))
    if not eval_records:
        raise UsageError(f"split {args.split!r} selects no segments")

    if args.frozen_mean:
        img_params, txt_params = FrozenMeanParams(), FrozenMeanParams()
    else:
        if not args.img_ckpt or not args.txt_ckpt:
            raise UsageError("pass --img-ckpt and --txt-ckpt, or --frozen-mean")
        _, _, _, img_params = load_head_checkpoint(args.img_ckpt)
        _, _, _, txt_params = load_head_checkpoint(args.txt_ckpt)

    _check_outputs([args.out, args.predictions], args.force)
    q, c, truth, texts = pipeline.retrieval_task(
        eval_records, frame_table, text_table, img_params, txt_params
    )
    result = evaluation.evaluate_retrieval(q, c, truth)
    _write_json(
        {
            "split": args.split,
            "n_queries": len(eval_records),
            "candidate_count": result.candidate_count,
            "top1": result.top1,
            "top3": result.top3,
        },
        args.out,
    )
    if args.predictions:
        predicted = pipeline.predict_concepts(q, c, texts)
        with open(args.predictions, "w", encoding="utf-8") as f:
            for rec, concept in zip(eval_records, predicted):
                f.write(json.dumps(
                    {"video_id": rec.video_id, "segment_id": rec.segment_id,
                     "concept": concept},
                    sort_keys=True) + "\n")
    print(f"top1 {result.top1:.4f}, top3 {result.top3:.4f} "
          f"on {len(eval_records)} queries / {result.candidate_count} candidates")


def _cmd_prompts(args, config):
    records = load_manifest(args.manifest)
    transcripts = {t.video_id: t.transcript for t in load_transcripts(args.transcripts)}
    predicted = {}
    with open(args.predictions, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            predicted[(obj["video_id"], obj["segment_id"])] = obj["concept"]

    _check_outputs(
        [args.out, args.gold_summaries_out, args.concept_summaries_out], args.force
    )
    by_video = {}
    for rec in records:
        if (rec.video_id, rec.segment_id) in predicted:
            by_video.setdefault(rec.video_id, []).append(rec)

    inputs, gold, concept_sums = [], [], []
    for video_id in sorted(by_video):
        segs = sorted(by_video[video_id], key=lambda r: r.start_sec)
        concepts = [predicted[(r.video_id, r.segment_id)] for r in segs]
        if video_id not in transcripts or not transcripts[video_id]:
            raise UsageError(f"video {video_id!r} has no transcript")
        inputs.append(
            prompt_assembler.assemble_augmented_input(
                video_id, concepts, transcripts[video_id],
                include_concepts=not args.no_concepts,
            )
        )
        gold.append((video_id, ". ".join(r.annotation for r in segs)))
        concept_sums.append((video_id, ". ".join(concepts)))

    prompt_assembler.write_prompts(inputs, args.out)
    if args.gold_summaries_out:
        prompt_assembler.write_summaries(gold, args.gold_summaries_out)
    if args.concept_summaries_out:
        prompt_assembler.write_summaries(concept_sums, args.concept_summaries_out)
    print(f"assembled prompts for {len(inputs)} videos")


def _cmd_score(args, config):
    pred = prompt_assembler.read_summaries(args.pred)
    ref = prompt_assembler.read_summaries(args.ref)
    if set(pred) != set(ref):
        missing = sorted(set(pred) ^ set(ref))
        raise UsageError(f"pred/ref video ids differ, e.g. {missing[:5]}")
    if not pred:
        raise UsageError("no summary pairs to score")
    pairs = [(pred[v], ref[v]) for v in sorted(pred)]
    scores = evaluation.score_summary_corpus(pairs)
    if args.out:
        _check_outputs([args.out], args.force)
        _write_json(evaluation.rouge_report_dict(scores), args.out)
    print(evaluation.format_rouge_table(scores, label=args.label))


def _cmd_report(args, config):
    shown = False
    if args.train_report:
        with open(args.train_report, "r", encoding="utf-8") as f:
            rep = json.load(f)
        print(f"{'epoch':>6} {'loss':>10} {'val_top1':>9} {'val_top3':>9}")
        top1, top3 = rep.get("val_top1", []), rep.get("val_top3", [])
        for i, loss in enumerate(rep["epoch_losses"]):
            t1 = f"{top1[i]:.4f}" if i < len(top1) else "-"
            t3 = f"{top3[i]:.4f}" if i < len(top3) else "-"
            print(f"{i:>6} {loss:>10.4f} {t1:>9} {t3:>9}")
        shown = True
    if args.retrieval:
        with open(args.retrieval, "r", encoding="utf-8") as f:
            res = json.load(f)
        print(f"split {res['split']}: top1 {100 * res['top1']:.1f}% / "
              f"top3 {100 * res['top3']:.1f}% "
              f"({res['n_queries']} queries, {res['candidate_count']} candidates)")
        shown = True
    if args.scores:
        with open(args.scores, "r", encoding="utf-8") as f:
            raw = json.load(f)
        scores = {
            v: evaluation.RougeScore(
                variant=v, precision=raw[v]["p"], recall=raw[v]["r"], f1=raw[v]["f"]
            )
            for v in evaluation.ROUGE_VARIANTS
        }
        print(evaluation.format_rouge_table(scores))
        shown = True
    if not shown:
        raise UsageError("nothing to report; pass --train-report, --retrieval or --scores")


_COMMANDS = {
    "split": _cmd_split,
    "gen-synth": _cmd_gen_synth,
    "sample-frames": _cmd_sample_frames,
    "batch-plan": _cmd_batch_plan,
    "train": _cmd_train,
    "eval-retrieval": _cmd_eval_retrieval,
    "prompts": _cmd_prompts,
    "score": _cmd_score,
    "report": _cmd_report,
}


def run(argv):
    """Execute one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        level = getattr(args, "sub_log_level", None) or args.log_level
        logging.basicConfig(level=getattr(logging, level))
        config = _load_config(getattr(args, "config", None))
        _COMMANDS[args.subcommand](args, config)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ManifestError, ValueError, TrainingDiverged) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
