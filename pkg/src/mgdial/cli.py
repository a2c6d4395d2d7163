"""Command line front end.

Pipeline commands (gen-db, gen-goals, gen-corpus) write artifacts into
--out; report commands (eval, sweep-data, sweep-manuals, lodo) read
them back and drop a report.json next to delimited point tables and
rendered figures. --config points at one JSON document with a section
per module; a section's "seed" overrides the global --seed for that
command.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click
import matplotlib

matplotlib.use("Agg")  # file output only, no display server
import matplotlib.pyplot as plt

from .dbgen import build_database, database_stats
from .goals import sample_goals
from .harness import (
    EvalCorpus,
    leave_one_domain_out,
    run_subtask_eval,
    sweep_data_size,
    sweep_manual_count,
)
from .model import (
    load_corpus,
    load_database,
    load_goals,
    load_json_doc,
    load_manuals,
    save_corpus,
    save_database,
    save_goals,
    save_json_doc,
    save_manuals,
)
from .nlu import annotate_dialogue
from .seedpack import build_manual_pack, gate_report
from .service import CollectionService, make_server
from .simulator import SimConfig, generate_corpus


@dataclass
class CliEnv:
    seed: int
    out: Path
    config: dict[str, Any] = field(default_factory=dict)

    def section(self, name: str) -> dict[str, Any]:
        part = self.config.get(name, {})
        if not isinstance(part, dict):
            raise click.ClickException(f"config section {name!r} must be an object")
        return part

    def seed_for(self, name: str) -> int:
        return int(self.section(name).get("seed", self.seed))


@click.group()
@click.option("--seed", type=int, default=0, show_default=True,
              help="Master seed; config sections may override it.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON config document with one section per module.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out",
              show_default=True, help="Artifact directory.")
@click.pass_context
def main(ctx: click.Context, seed: int, config_path: str | None, out_dir: str) -> None:
    """Manual-guided dialogue toolkit."""
    config: dict[str, Any] = {}
    if config_path:
        with open(config_path, "r", encoding="utf-8") as f:
            try:
                config = json.load(f)
            except json.JSONDecodeError as e:
                raise click.ClickException(f"bad config file: {e}") from e
        if not isinstance(config, dict):
            raise click.ClickException("config root must be an object")
    ctx.obj = CliEnv(seed=seed, out=Path(out_dir), config=config)


def _need(path: Path, hint: str) -> Path:
    if not path.exists():
        raise click.ClickException(f"{path} not found; run `{hint}` first")
    return path


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _load_eval_corpus(env: CliEnv) -> EvalCorpus:
    db = load_database(_need(env.out / "db.json", "mgdial gen-db"))
    manuals = load_manuals(_need(env.out / "manuals.json", "mgdial gen-corpus"))
    dialogues = load_corpus(_need(env.out / "corpus.jsonl", "mgdial gen-corpus"))
    manifest = load_json_doc(_need(env.out / "manifest.json", "mgdial gen-corpus"),
                             "corpus_manifest")
    return EvalCorpus.build(db, manuals, dialogues, manifest)


# ---------------------------------------------------------------------------
# generation pipeline


@main.command("gen-db")
@click.pass_obj
def gen_db(env: CliEnv) -> None:
    """Synthesize the entity database."""
    env.out.mkdir(parents=True, exist_ok=True)
    db = build_database(env.seed_for("database"))
    save_database(db, env.out / "db.json")
    for domain, stats in database_stats(db).items():
        click.echo(f"{domain:<12} {stats['entities']:>5} entities "
                   f"{stats['attributes']:>3} attributes")
    click.echo(f"wrote {env.out / 'db.json'}")


@main.command("gen-goals")
@click.option("--count", type=int, default=None, help="Number of goals (default 1100).")
@click.pass_obj
def gen_goals(env: CliEnv, count: int | None) -> None:
    """Sample user goals against the database."""
    section = env.section("goals")
    if count is None:
        count = int(section.get("count", 1100))
    db = load_database(_need(env.out / "db.json", "mgdial gen-db"))
    goals = sample_goals(db, count, seed=env.seed_for("goals"))
    save_goals(goals, env.out / "goals.json")
    click.echo(f"wrote {len(goals)} goals to {env.out / 'goals.json'}")


@main.command("gen-corpus")
@click.option("--splits", default=None,
              help="Comma separated train,dev,test sizes (default 900,100,100).")
@click.pass_obj
def gen_corpus(env: CliEnv, splits: str | None) -> None:
    """Self-play the goals into an annotated dialogue corpus."""
    section = env.section("corpus")
    if splits is None:
        sizes = tuple(int(x) for x in section.get("split_sizes", (900, 100, 100)))
    else:
        try:
            sizes = tuple(int(x) for x in splits.split(","))
        except ValueError as e:
            raise click.ClickException(f"bad --splits: {splits!r}") from e
    if len(sizes) != 3:
        raise click.ClickException("--splits needs exactly three sizes")

    db = load_database(_need(env.out / "db.json", "mgdial gen-db"))
    goals = load_goals(_need(env.out / "goals.json", "mgdial gen-goals"))
    manuals = build_manual_pack()
    sim_keys = set(SimConfig().to_dict())
    overrides = {k: v for k, v in section.get("simulator", {}).items() if k in sim_keys}
    config = SimConfig(**overrides)
    bundle = generate_corpus(
        db, manuals, goals,
        seed=env.seed_for("corpus"),
        config=config,
        train_manuals=int(section.get("train_manuals", 10)),
        split_sizes=sizes,
    )
    save_corpus(bundle.dialogues, env.out / "corpus.jsonl")
    save_manuals(manuals, env.out / "manuals.json")
    save_json_doc(env.out / "manifest.json", "corpus_manifest", bundle.manifest)
    stats = bundle.manifest["stats"]["overall"]
    click.echo(f"{len(bundle.dialogues)} dialogues, "
               f"{stats['mean_turns']:.2f} turns each, "
               f"{stats['mean_instructions_per_turn']:.2f} instructions per turn")
    click.echo(f"wrote {env.out / 'corpus.jsonl'}")


@main.command("check-paraphrases")
@click.option("--threshold", type=float, default=0.8, show_default=True)
@click.pass_obj
def check_paraphrases(env: CliEnv, threshold: float) -> None:
    """Gate the manual paraphrase sets on self-BLEU."""
    report = gate_report(threshold)
    for family in sorted(report.scores):
        score = report.scores[family]
        mark = "ok" if score < threshold else "FAIL"
        click.echo(f"{mark:<5} {family:<28} self-bleu {score:.3f}")
    click.echo(f"worst: {report.worst} ({report.scores[report.worst]:.3f}), "
               f"threshold {threshold}")
    if not report.passed:
        raise click.ClickException("paraphrase sets too similar")


# ---------------------------------------------------------------------------
# reports


@main.command("eval")
@click.pass_obj
def eval_cmd(env: CliEnv) -> None:
    """Fit the baselines and score all three subtasks."""
    corpus = _load_eval_corpus(env)
    report = run_subtask_eval(corpus, seed=env.seed_for("harness"), collect_turns=True)
    records = report.pop("turns")["matching"]
    report_dir = env.out / "eval"
    report_dir.mkdir(parents=True, exist_ok=True)

    (report_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with (report_dir / "matching_turns.jsonl").open("w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")

    rows = []
    for subtask in ("matching", "tagging", "generation"):
        for name, row in report[subtask]["rows"].items():
            metrics = {k: v for k, v in row.items() if isinstance(v, float)}
            for metric, value in sorted(metrics.items()):
                rows.append([subtask, name, metric, f"{value:.6f}"])
    _write_csv(report_dir / "rows.csv", ["subtask", "row", "metric", "value"], rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    labels, values = [], []
    for subtask in ("matching", "tagging"):
        for name, row in report[subtask]["rows"].items():
            labels.append(f"{subtask}\n{name}")
            values.append(row["f1"])
    ax.bar(labels, values, color="#4878a8")
    ax.set_ylabel("F1")
    ax.set_ylim(0, 1)
    ax.set_title("held-out subtask scores")
    fig.tight_layout()
    fig.savefig(report_dir / "subtask_scores.png", dpi=120)
    plt.close(fig)

    for subtask in ("matching", "tagging", "generation"):
        for name, row in report[subtask]["rows"].items():
            shown = {k: round(v, 4) for k, v in row.items() if isinstance(v, float)}
            click.echo(f"{subtask:<11} {name:<12} {shown}")
    click.echo(f"wrote {report_dir}/report.json, rows.csv, "
               "matching_turns.jsonl, subtask_scores.png")


def _sweep_outputs(report_dir: Path, report: dict[str, Any], x_key: str,
                   x_label: str) -> None:
    report_dir.mkdir(parents=True, exist_ok=True)
    (report_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    points = report["points"]
    header = [x_key, "train_dialogues", "matching_accuracy", "matching_f1", "tagging_f1"]
    _write_csv(report_dir / "points.csv", header,
               [[p[k] for k in header] for p in points])

    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [p[x_key] for p in points]
    ax.plot(xs, [p["matching_f1"] for p in points], marker="o", label="matching F1")
    ax.plot(xs, [p["matching_accuracy"] for p in points], marker="s",
            label="matching accuracy")
    ax.set_xlabel(x_label)
    ax.set_ylabel("score")
    ax.set_ylim(0, 1)
    ax.legend()
    fig.tight_layout()
    fig.savefig(report_dir / "curve.png", dpi=120)
    plt.close(fig)


@main.command("sweep-data")
@click.option("--fractions", default="0.2,0.4,0.6,0.8,1.0", show_default=True)
@click.pass_obj
def sweep_data(env: CliEnv, fractions: str) -> None:
    """Refit on growing slices of the train split."""
    try:
        fracs = tuple(float(x) for x in fractions.split(","))
    except ValueError as e:
        raise click.ClickException(f"bad --fractions: {fractions!r}") from e
    corpus = _load_eval_corpus(env)
    report = sweep_data_size(corpus, fractions=fracs, seed=env.seed_for("harness"))
    _sweep_outputs(env.out / "sweep_data", report, "fraction", "train fraction")
    for p in report["points"]:
        click.echo(f"fraction {p['fraction']:.2f}  n={p['train_dialogues']}  "
                   f"matching F1 {p['matching_f1']:.4f}")
    click.echo(f"wrote {env.out / 'sweep_data'}/report.json, points.csv, curve.png")


@main.command("sweep-manuals")
@click.option("--counts", default="2,4,6,8", show_default=True)
@click.pass_obj
def sweep_manuals(env: CliEnv, counts: str) -> None:
    """Refit on train dialogues from k manuals."""
    try:
        ks = tuple(int(x) for x in counts.split(","))
    except ValueError as e:
        raise click.ClickException(f"bad --counts: {counts!r}") from e
    corpus = _load_eval_corpus(env)
    report = sweep_manual_count(corpus, counts=ks, seed=env.seed_for("harness"))
    _sweep_outputs(env.out / "sweep_manuals", report, "manual_count",
                   "train manuals")
    for p in report["points"]:
        click.echo(f"manuals {p['manual_count']}  n={p['train_dialogues']}  "
                   f"matching F1 {p['matching_f1']:.4f}  {','.join(p['manuals'])}")
    click.echo(f"wrote {env.out / 'sweep_manuals'}/report.json, points.csv, curve.png")


@main.command("lodo")
@click.pass_obj
def lodo_cmd(env: CliEnv) -> None:
    """Leave one domain out of training, score every domain."""
    corpus = _load_eval_corpus(env)
    report = leave_one_domain_out(corpus, seed=env.seed_for("harness"))
    report_dir = env.out / "lodo"
    report_dir.mkdir(parents=True, exist_ok=True)
    (report_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    domains = list(corpus.db.domains())
    rows = []
    for row in report["rows"]:
        cells = [row["per_domain_f1"][d] for d in domains]
        rows.append([row["excluded"], row["train_dialogues"],
                     f"{row['overall_f1']:.6f}"]
                    + [("" if c is None else f"{c:.6f}") for c in cells])
    _write_csv(report_dir / "matrix.csv",
               ["excluded", "train_dialogues", "overall_f1"] + domains, rows)

    grid = [[(row["per_domain_f1"][d] if row["per_domain_f1"][d] is not None else 0.0)
             for d in domains] for row in report["rows"]]
    fig, ax = plt.subplots(figsize=(7, 5))
    image = ax.imshow(grid, vmin=0, vmax=1, cmap="viridis")
    ax.set_xticks(range(len(domains)), domains, rotation=45, ha="right")
    ax.set_yticks(range(len(report["rows"])),
                  [r["excluded"] for r in report["rows"]])
    ax.set_xlabel("evaluated domain")
    ax.set_ylabel("excluded from training")
    fig.colorbar(image, ax=ax, label="matching F1")
    fig.tight_layout()
    fig.savefig(report_dir / "matrix.png", dpi=120)
    plt.close(fig)

    for row in report["rows"]:
        cells = " ".join(
            f"{d}={row['per_domain_f1'][d]:.3f}" if row["per_domain_f1"][d] is not None
            else f"{d}=-" for d in domains)
        click.echo(f"excluded {row['excluded']:<11} {cells}")
    click.echo(f"wrote {report_dir}/report.json, matrix.csv, matrix.png")


# ---------------------------------------------------------------------------
# operations


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8321, show_default=True)
@click.pass_obj
def serve(env: CliEnv, host: str, port: int) -> None:
    """Run the collection service on a local socket."""
    section = env.section("service")
    host = str(section.get("host", host))
    port = int(section.get("port", port))
    db = load_database(_need(env.out / "db.json", "mgdial gen-db"))
    manuals = build_manual_pack()
    goals_path = env.out / "goals.json"
    goals = load_goals(goals_path) if goals_path.exists() else []
    service = CollectionService(db, manuals, goals=goals, seed=env.seed_for("service"))
    server = make_server(service, host=host, port=port)
    bound = server.server_address
    click.echo(f"collection service on http://{bound[0]}:{bound[1]} "
               f"({len(goals)} pooled goals)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        click.echo("shutting down")
    finally:
        server.server_close()


@main.command("annotate")
@click.argument("corpus_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def annotate(env: CliEnv, corpus_file: str) -> None:
    """Recover argument spans for an unannotated corpus file."""
    dialogues = load_corpus(corpus_file)
    env.out.mkdir(parents=True, exist_ok=True)
    out_path = env.out / "annotated.jsonl"
    misses_path = env.out / "unmatched.jsonl"
    total_args = 0
    annotated_all = []
    misses = []
    for dlg in dialogues:
        annotated, unmatched = annotate_dialogue(dlg)
        annotated_all.append(annotated)
        misses.extend(unmatched)
        total_args += sum(len(c.args) for t in annotated.turns for c in t.api_calls)
    save_corpus(annotated_all, out_path)
    with misses_path.open("w", encoding="utf-8") as f:
        for miss in misses:
            f.write(json.dumps(miss, sort_keys=True) + "\n")
    click.echo(f"{len(dialogues)} dialogues, {total_args} arguments, "
               f"{len(misses)} unmatched")
    click.echo(f"wrote {out_path} and {misses_path}")
    if misses:
        raise click.ClickException("some argument values were never said")


if __name__ == "__main__":
    main()
