"""Command-line interface: one subcommand per pipeline stage plus `run`
for the whole thing and `serve` for the annotation service."""

import json
import os
import sys

import click

from . import pipeline as pl


def _cfg(workdir, **overrides):
    return pl.load_config(None, workdir=workdir, **overrides)


@click.group()
def main():
    """Detect bullying and aggressive accounts in a tweet corpus."""


workdir_opt = click.option(
    "--workdir", "-w", default=".", show_default=True,
    help="directory holding the pipeline artifacts",
)
seed_opt = click.option("--seed", default=7, show_default=True, type=int)
workers_opt = click.option(
    "--workers", "-N", default=1, show_default=True, type=int,
    help="parallel workers; never changes results",
)


@main.command()
@workdir_opt
@click.option("--tweets", required=True, type=click.Path(exists=True))
@click.option("--accounts", required=True, type=click.Path(exists=True))
@click.option("--edges", type=click.Path(exists=True))
def ingest(workdir, tweets, accounts, edges):
    """Load and canonicalize tweets.jsonl / accounts.jsonl (+ edges.txt)."""
    cfg = _cfg(workdir, tweets_path=tweets, accounts_path=accounts, edges_path=edges)
    os.makedirs(workdir, exist_ok=True)
    out = pl.stage_ingest(cfg)
    click.echo(json.dumps(out))


@main.command()
@workdir_opt
@seed_opt
@click.option("--users", default=1000, show_default=True, type=int)
def synth(workdir, seed, users):
    """Generate a deterministic synthetic corpus with planted labels."""
    cfg = _cfg(workdir, seed=seed, synth_users=users)
    os.makedirs(workdir, exist_ok=True)
    out = pl.stage_ingest(cfg)
    click.echo(json.dumps(out))


@main.command("spamfilter")
@workdir_opt
@workers_opt
@click.option("--hashtag-cutoff", default=5.0, show_default=True, type=float)
@click.option("--sim-cutoff", default=0.8, show_default=True, type=float)
@click.option("--max-pairwise-tweets", default=500, show_default=True, type=int)
def spamfilter_cmd(workdir, workers, hashtag_cutoff, sim_cutoff, max_pairwise_tweets):
    """Remove spam accounts by hashtag and near-duplicate heuristics."""
    cfg = _cfg(
        workdir, workers=workers, hashtag_cutoff=hashtag_cutoff,
        sim_cutoff=sim_cutoff, max_pairwise_tweets=max_pairwise_tweets,
    )
    click.echo(json.dumps(pl.stage_spamfilter(cfg)))


@main.command()
@workdir_opt
@workers_opt
@click.option("--gap-hours", default=8.0, show_default=True, type=float)
@click.option("--min-tweets", default=5, show_default=True, type=int)
def sessionize(workdir, workers, gap_hours, min_tweets):
    """Group each user's tweets into time-gap sessions."""
    cfg = _cfg(workdir, workers=workers, gap_hours=gap_hours, min_tweets=min_tweets)
    click.echo(json.dumps(pl.stage_sessionize(cfg)))


@main.command()
@workdir_opt
@seed_opt
@click.option("--min", "batch_min", default=5, show_default=True, type=int)
@click.option("--max", "batch_max", default=10, show_default=True, type=int)
def batch(workdir, seed, batch_min, batch_max):
    """Split sessions into 5-10 tweet annotation batches."""
    cfg = _cfg(workdir, seed=seed, batch_min=batch_min, batch_max=batch_max)
    click.echo(json.dumps(pl.stage_batch(cfg)))


@main.command()
@workdir_opt
@seed_opt
@click.option("--simulate/--no-simulate", default=True, show_default=True,
              help="simulate the rater panel from planted labels")
@click.option("--noise", default=0.1, show_default=True, type=float)
@click.option("--panel", default=5, show_default=True, type=int)
def annotate(workdir, seed, simulate, noise, panel):
    """Produce groundtruth.jsonl from a simulated rater panel."""
    if not simulate:
        raise click.UsageError(
            "only --simulate is supported offline; use `meanbirds serve` to "
            "collect real annotations and GET /export/groundtruth"
        )
    cfg = _cfg(workdir, seed=seed, noise=noise, panel=panel)
    click.echo(json.dumps(pl.stage_annotate(cfg)))


@main.command("graph")
@workdir_opt
@workers_opt
@seed_opt
@click.option("--edges", type=click.Path(exists=True),
              help="edge list; defaults to <workdir>/edges.txt")
@click.option("--out", type=click.Path(), help="defaults to <workdir>/metrics.jsonl")
def graph_cmd(workdir, workers, seed, edges, out):
    """Compute per-node network metrics from the follower graph."""
    cfg = _cfg(workdir, workers=workers, seed=seed)
    if edges:
        cfg.edges_path = edges  # not used by stage_graph; copy convention
        import shutil

        if os.path.abspath(edges) != os.path.abspath(cfg.path("edges.txt")):
            shutil.copyfile(edges, cfg.path("edges.txt"))
    summary = pl.stage_graph(cfg)
    if out and os.path.abspath(out) != os.path.abspath(cfg.path("metrics.jsonl")):
        import shutil

        shutil.copyfile(cfg.path("metrics.jsonl"), out)
    click.echo(json.dumps(summary))


@main.command()
@workdir_opt
@workers_opt
@click.option("--mask", type=click.Choice(["model18", "all"]), default="all",
              show_default=True,
              help="'model18' also writes features_model18.csv with the 18 model columns")
def extract(workdir, workers, mask):
    """Assemble the 30-attribute feature vectors into features.csv."""
    cfg = _cfg(workdir, workers=workers, feature_mask=mask)
    click.echo(json.dumps(pl.stage_extract(cfg)))


@main.command()
@workdir_opt
@workers_opt
@seed_opt
@click.option("--trees", default=10, show_default=True, type=int)
@click.option("--folds", default=10, show_default=True, type=int)
@click.option("--repeats", default=10, show_default=True, type=int)
@click.option("--classes", default=3, show_default=True, type=click.Choice(["3", "4"]))
@click.option("--balance", type=click.Choice(["on", "off"]), default="off",
              show_default=True)
@click.option("--targets", default=None,
              help="balanced per-class targets, e.g. 'bully=349,aggressive=386,normal=340'")
def train(workdir, workers, seed, trees, folds, repeats, classes, balance, targets):
    """Random-Forest training with repeated stratified cross-validation."""
    parsed_targets = None
    if targets:
        parsed_targets = {}
        for part in targets.split(","):
            name, value = part.split("=")
            parsed_targets[name.strip()] = int(value)
    cfg = _cfg(
        workdir, workers=workers, seed=seed, trees=trees, folds=folds,
        repeats=repeats, classes=int(classes), balance=balance == "on",
        balance_targets=parsed_targets,
    )
    click.echo(json.dumps(pl.stage_train(cfg)))


@main.command("report")
@workdir_opt
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.option("--classes", default=3, show_default=True, type=click.Choice(["3", "4"]))
def report_cmd(workdir, figures, classes):
    """Write ECDF data, the info-gain ranking, and the figures."""
    cfg = _cfg(workdir, render_figures=figures, classes=int(classes))
    click.echo(json.dumps(pl.stage_report(cfg)))


@main.command()
@workdir_opt
@seed_opt
@workers_opt
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="pipeline.toml with config keys")
@click.option("--stages", default=None, help="comma-separated stage subset")
@click.option("--users", default=None, type=int, help="synthetic corpus size")
@click.option("--noise", default=None, type=float)
@click.option("--classes", default=None, type=click.Choice(["3", "4"]))
@click.option("--figures/--no-figures", "render_figures", default=None)
def run(workdir, seed, workers, config_path, stages, users, noise, classes,
        render_figures):
    """Run the full pipeline (or a stage subset) end to end."""
    overrides = {
        "workdir": workdir,
        "seed": seed,
        "workers": workers,
        "stages": stages,
        "synth_users": users,
        "noise": noise,
        "classes": int(classes) if classes else None,
        "render_figures": render_figures,
    }
    cfg = pl.load_config(config_path, **{k: v for k, v in overrides.items() if v is not None})
    try:
        summaries = pl.run_pipeline(cfg, log=lambda msg: click.echo(msg, err=True))
    except pl.PipelineError as e:
        raise click.ClickException(str(e))
    click.echo(json.dumps(summaries, default=str))


@main.command()
@workdir_opt
@seed_opt
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--gold", required=True, type=click.Path(exists=True),
              help="gold.jsonl with {'batch_id','label'} control cases")
@click.option("--batches", "batches_path", type=click.Path(exists=True),
              help="defaults to <workdir>/batches.jsonl")
@click.option("--log", "log_path", type=click.Path(),
              help="append-only record log; defaults to <workdir>/annotation_log.jsonl")
@click.option("--ttl", default=3600, show_default=True, type=int,
              help="seconds before an abandoned assignment returns to the pool")
def serve(workdir, seed, port, host, gold, batches_path, log_path, ttl):
    """Run the annotation HTTP service for the labeling UI."""
    from . import corpus as corpus_mod
    from . import service as service_mod
    from . import sessionizer

    batches = sessionizer.load_batches(batches_path or os.path.join(workdir, "batches.jsonl"))
    gold_labels = {}
    with open(gold, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                gold_labels[obj["batch_id"]] = obj["label"]
    accounts = {}
    accounts_file = os.path.join(workdir, "kept_accounts.jsonl")
    if not os.path.exists(accounts_file):
        accounts_file = os.path.join(workdir, "accounts.jsonl")
    if os.path.exists(accounts_file):
        with open(accounts_file, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    acct = corpus_mod.parse_account_record(line)
                    accounts[acct.user_id] = acct
    store = service_mod.AnnotationStore(
        batches,
        gold_labels,
        log_path=log_path or os.path.join(workdir, "annotation_log.jsonl"),
        seed=seed,
        accounts=accounts,
        ttl=ttl,
    )
    click.echo(
        f"serving {len(store.batches)} batches (+{len(store.controls)} controls) "
        f"on http://{host}:{port}",
        err=True,
    )
    service_mod.serve(store, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
