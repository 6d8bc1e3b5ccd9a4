"""Command-line surface: extract, train, iterate, evaluate, search, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import FULL_LAYOUT, DescriptorConfig
from .extract import extract_features
from .iterative import (
    AnnotatorOracle,
    ExportAnnotator,
    IterationSetup,
    OracleAnnotator,
    cluster_experiment,
    export_weight_plot_data,
    make_sparse_oracle,
    make_synthetic_features,
    render_matrix,
    run_until_converged,
    simulate_triplets,
    subsample_experiment,
)
from .mesh_io import load_model, load_type_profiles
from .metric import TrainConfig, cv_accuracy, train
from .storage import (
    Catalog,
    check_compatible,
    read_features,
    read_weights,
    search_ranking,
    write_features,
    write_weights,
)
from .triplets import build_control_pool, read_triplets, write_triplets


@click.group()
def main():
    """Style-similarity metrics for textured 3D models."""


def _load_corpus(corpus: Path) -> list[tuple[Path, str, str]]:
    """(path, object_type, cluster) triples; layout is <type>/<model>.obj,
    with an optional corpus.json overriding types/clusters."""
    manifest = corpus / "corpus.json"
    if manifest.exists():
        entries = json.loads(manifest.read_text())
        return [
            (corpus / e["path"], e["object_type"], e.get("cluster", e["object_type"]))
            for e in entries["models"]
        ]
    out = []
    for obj in sorted(corpus.glob("*/*.obj")):
        out.append((obj, obj.parent.name, obj.parent.name))
    return out


@main.command()
@click.option("--corpus", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--type-profile", type=click.Path(exists=True, path_type=Path))
@click.option("--resolution", type=int, default=None, help="Voxel resolution override.")
@click.option("--catalog", "catalog_dir", type=click.Path(path_type=Path), help="Also register models + thumbnails in a catalog directory.")
def extract(corpus, out_path, config_path, type_profile, resolution, catalog_dir):
    """Extract feature vectors for every model in an OBJ corpus."""
    if config_path:
        cfg = DescriptorConfig.from_dict(json.loads(config_path.read_text()))
    else:
        cfg = DescriptorConfig()
    if resolution:
        cfg = DescriptorConfig.from_dict({**cfg.to_dict(), "voxel_resolution": resolution})
    profiles = load_type_profiles(type_profile) if type_profile else None

    features = {}
    meta = {}
    entries = _load_corpus(corpus)
    if not entries:
        raise click.ClickException(f"no models found under {corpus}")
    for path, otype, cluster in entries:
        model = load_model(path, object_type=otype, cluster=cluster)
        fv, m = extract_features(model, cfg, profiles)
        features[model.id] = fv
        meta[model.id] = {k: v for k, v in m.items() if k != "layout"}
        click.echo(f"extracted {model.id} ({otype}): {len(fv.values)} dims")
    write_features(out_path, features, cfg, meta, FULL_LAYOUT)
    click.echo(f"wrote {len(features)} vectors to {out_path} (config {cfg.config_hash()})")

    if catalog_dir:
        from .rasterize import render_thumbnail
        from PIL import Image

        cat = Catalog(catalog_dir)
        for path, otype, cluster in entries:
            model = load_model(path, object_type=otype, cluster=cluster)
            if cat.model(model.id) is None:
                cat.add_model(model.id, otype, cluster, str(path))
            thumb = cat.thumbnail_path(model.id)
            thumb.parent.mkdir(parents=True, exist_ok=True)
            Image.fromarray(render_thumbnail(model)).save(thumb)
        cat.save_manifest()
        feat_path = cat.feature_path("default")
        feat_path.parent.mkdir(parents=True, exist_ok=True)
        write_features(feat_path, features, cfg, meta, FULL_LAYOUT)
        click.echo(f"catalog updated at {catalog_dir}")


@main.command("train")
@click.option("--triplets", "triplet_paths", type=click.Path(exists=True, path_type=Path), multiple=True, required=True)
@click.option("--features", "features_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--shape", type=click.Choice(["diagonal", "full"]), default="diagonal")
@click.option("--seed", type=int, default=0)
@click.option("--lam", type=float, default=1e-3)
@click.option("--max-epochs", type=int, default=200)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def train_cmd(triplet_paths, features_path, shape, seed, lam, max_epochs, out_path):
    """Learn a weight matrix from triplet files."""
    features, meta = read_features(features_path)
    triplets = []
    for p in triplet_paths:
        triplets.extend(read_triplets(p))
    layout = tuple((b[0], int(b[1])) for b in meta.get("layout") or []) or None
    cfg = TrainConfig(shape=shape, seed=seed, lam=lam, max_epochs=max_epochs)
    w = train(triplets, features, cfg, layout=layout)
    write_weights(out_path, w)
    click.echo(
        f"trained {shape} metric on {len(triplets)} triplets "
        f"(final loss {w.provenance['final_loss']:.4f}) -> {out_path}"
    )


def _parse_annotator(spec: str):
    """sim:WSTAR_FILE[:eps[:seed]] or export:DIR[:timeout]."""
    parts = spec.split(":")
    if parts[0] == "sim":
        if len(parts) < 2:
            raise click.ClickException("sim annotator needs a hidden-metric weights file")
        w_star = read_weights(Path(parts[1]))
        eps = float(parts[2]) if len(parts) > 2 else 0.0
        seed = int(parts[3]) if len(parts) > 3 else 0
        return OracleAnnotator(AnnotatorOracle(w_star=w_star, noise=eps, seed=seed))
    if parts[0] == "export":
        if len(parts) < 2:
            raise click.ClickException("export annotator needs a directory")
        timeout = float(parts[2]) if len(parts) > 2 else 3600.0
        return ExportAnnotator(directory=parts[1], timeout=timeout)
    raise click.ClickException(f"unknown annotator {spec!r} (use sim:... or export:...)")


@main.command()
@click.option("--pair", required=True, help="X,Y object types.")
@click.option("--features", "features_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--annotator", "annotator_spec", required=True, help="sim:WSTAR[:eps[:seed]] or export:DIR[:timeout]")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--hits-per-iter", type=int, default=10)
@click.option("--max-iters", type=int, default=10)
@click.option("--seed", type=int, default=0)
@click.option("--init", type=click.Choice(["identity", "random"]), default="identity")
@click.option("--control-pool", "control_pool_path", type=click.Path(exists=True, path_type=Path), help="Curated control-task file; derived from the annotator when omitted.")
@click.option("--history-out", type=click.Path(path_type=Path))
def iterate(pair, features_path, annotator_spec, out_path, hits_per_iter, max_iters, seed, init, control_pool_path, history_out):
    """Run the iterative metric-learning loop for one type pair."""
    x_type, y_type = (p.strip() for p in pair.split(","))
    features, meta = read_features(features_path)
    type_of = {mid: rec.get("object_type", "") for mid, rec in meta["model_meta"].items()}
    x_ids = sorted(m for m, t in type_of.items() if t == x_type)
    y_ids = sorted(m for m, t in type_of.items() if t == y_type)
    if not x_ids or len(y_ids) < 7:
        raise click.ClickException(f"corpus needs models of type {x_type} and >=7 of {y_type}")

    annotator = _parse_annotator(annotator_spec)
    if control_pool_path:
        from .triplets import read_control_pool

        control_pool = read_control_pool(control_pool_path)
    else:
        if isinstance(annotator, OracleAnnotator):
            control_ref = annotator.oracle.w_star
        else:
            # exported runs still need controls with known answers: use identity
            from .iterative import identity_weights

            some = next(iter(features.values()))
            control_ref = identity_weights(len(some.values), some.config_hash)
        control_pool = build_control_pool(
            (x_type, y_type), x_ids, y_ids, features, control_ref, count=20, seed=seed
        )
    setup = IterationSetup(
        pair=(x_type, y_type),
        features=features,
        x_ids=x_ids,
        y_ids=y_ids,
        control_pool=control_pool,
        cv_seed=seed,
    )
    w, state = run_until_converged(
        setup, annotator, init=init, init_seed=seed, max_iters=max_iters,
        hits_per_iter=hits_per_iter, seed=seed,
    )
    write_weights(out_path, w)
    click.echo(
        f"converged after {state.iteration} iterations; accuracy history: "
        + ", ".join(f"{a:.2f}" for a in state.accuracy_history)
    )
    click.echo(f"pool: {len(state.triplet_pool)} triplets; HITs accepted {state.hits_accepted}, rejected {state.hits_rejected}")
    if history_out:
        history_out.write_text(json.dumps({
            "accuracy_history": state.accuracy_history,
            "iterations": state.iteration,
            "pool_size": len(state.triplet_pool),
            "hits_accepted": state.hits_accepted,
            "hits_rejected": state.hits_rejected,
        }, indent=2))


@main.command()
@click.option("--mode", type=click.Choice(["cv", "cluster", "subsample", "weights"]), required=True)
@click.option("--triplets", "triplet_path", type=click.Path(exists=True, path_type=Path))
@click.option("--features", "features_path", type=click.Path(exists=True, path_type=Path))
@click.option("--weights", "weights_path", type=click.Path(exists=True, path_type=Path))
@click.option("--set", "pair_sets", multiple=True, help="cluster mode: X,Y=TRIPLET_FILE")
@click.option("--cluster", "cluster_defs", multiple=True, help="cluster mode: NAME=type1+type2")
@click.option("--fraction", type=float, default=0.5)
@click.option("--folds", type=int, default=5)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(path_type=Path))
def evaluate(mode, triplet_path, features_path, weights_path, pair_sets, cluster_defs, fraction, folds, seed, out_path):
    """Cross-validation, clustering/subsampling reports, or weight plot data."""
    if mode == "cv":
        if not (triplet_path and features_path):
            raise click.ClickException("cv mode needs --triplets and --features")
        features, _ = read_features(features_path)
        triplets = read_triplets(triplet_path)
        acc = cv_accuracy(triplets, features, folds=folds, seed=seed)
        click.echo(f"{folds}-fold CV accuracy on {len(triplets)} triplets: {acc:.2f}%")
    elif mode == "cluster":
        if not (pair_sets and features_path):
            raise click.ClickException("cluster mode needs --set pairs and --features")
        features, _ = read_features(features_path)
        triplet_sets = {}
        for spec in pair_sets:
            pair_txt, file_txt = spec.split("=", 1)
            x, y = (p.strip() for p in pair_txt.split(","))
            triplet_sets[(x, y)] = read_triplets(Path(file_txt))
        clusters = {}
        for spec in cluster_defs:
            name, members = spec.split("=", 1)
            clusters[name] = [m.strip() for m in members.split("+")]
        if not clusters:
            clusters = {t: [t] for pair in triplet_sets for t in pair}
        report = cluster_experiment(list(triplet_sets), clusters, triplet_sets, features, folds=folds, seed=seed)
        click.echo(render_matrix(report["types"], "object types (CV %)"))
        click.echo("")
        click.echo(render_matrix(report["clusters"], "clusters (CV %)"))
        if out_path:
            out_path.write_text(json.dumps(report, indent=2, sort_keys=True))
    elif mode == "subsample":
        if not (triplet_path and features_path):
            raise click.ClickException("subsample mode needs --triplets and --features")
        features, _ = read_features(features_path)
        triplets = read_triplets(triplet_path)
        full_acc, sub_acc = subsample_experiment(triplets, features, fraction, seed, folds=folds)
        click.echo(f"full set   ({len(triplets)} triplets): {full_acc:.2f}%")
        click.echo(f"subsampled ({fraction:.0%}):           {sub_acc:.2f}%")
    elif mode == "weights":
        if not weights_path:
            raise click.ClickException("weights mode needs --weights")
        w = read_weights(weights_path)
        rows = export_weight_plot_data(w)
        lines = ["block\tgroup\tindex\tglobal_index\tlog10_weight"]
        lines += [
            f"{r['block']}\t{r['group']}\t{r['index']}\t{r['global_index']}\t{r['log10_weight']:.6f}"
            for r in rows
        ]
        text = "\n".join(lines)
        if out_path:
            out_path.write_text(text + "\n")
            click.echo(f"wrote {len(rows)} rows to {out_path}")
        else:
            click.echo(text)


@main.command()
@click.option("--metric", "weights_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--features", "features_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--query", "query_id", required=True)
@click.option("--type", "target_type", required=True)
@click.option("--k", type=int, default=5)
def search(weights_path, features_path, query_id, target_type, k):
    """Style-based nearest neighbors of a query model."""
    features, meta = read_features(features_path)
    w = read_weights(weights_path)
    check_compatible(next(iter(features.values())).config_hash, w)
    type_of = {mid: rec.get("object_type", "") for mid, rec in meta["model_meta"].items()}
    result = search_ranking(features, type_of, w, query_id, target_type, weights_path.stem)
    click.echo(f"query {query_id} -> top {k} of {len(result.ranked)} {target_type} models:")
    for rank, (mid, dist) in enumerate(result.top(k), 1):
        click.echo(f"  {rank}. {mid}  d={dist:.6f}")


@main.command("demo-corpus")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--per-type", type=int, default=8)
@click.option("--seed", type=int, default=0)
def demo_corpus(out_dir, per_type, seed):
    """Write the small synthetic OBJ+MTL corpus used by tests and demos."""
    from .primitives import build_demo_corpus

    build_demo_corpus(out_dir, per_type=per_type, seed=seed)
    click.echo(f"demo corpus written to {out_dir}")


@main.command()
@click.option("--out-features", type=click.Path(path_type=Path), required=True)
@click.option("--out-oracle", type=click.Path(path_type=Path), required=True)
@click.option("--out-triplets", type=click.Path(path_type=Path))
@click.option("--types", default="x,y")
@click.option("--per-type", type=int, default=60)
@click.option("--dim", type=int, default=200)
@click.option("--informative", type=int, default=20)
@click.option("--noise", type=float, default=0.0)
@click.option("--tasks", type=int, default=250)
@click.option("--seed", type=int, default=1)
def synth(out_features, out_oracle, out_triplets, types, per_type, dim, informative, noise, tasks, seed):
    """Generate a synthetic feature corpus + hidden oracle (+ triplets)."""
    type_list = [t.strip() for t in types.split(",")]
    feats, type_of = make_synthetic_features(type_list, per_type, dim, seed=seed)
    oracle = make_sparse_oracle(dim, informative, noise=noise, seed=seed)
    meta = {mid: {"object_type": t, "cluster": t} for mid, t in type_of.items()}
    write_features(out_features, feats, None, meta, [("features", dim)])
    write_weights(out_oracle, oracle.w_star)
    click.echo(f"synthetic corpus: {len(feats)} vectors ({dim} dims) -> {out_features}")
    if out_triplets:
        x_ids = sorted(m for m, t in type_of.items() if t == type_list[0])
        y_ids = sorted(m for m, t in type_of.items() if t == type_list[-1])
        trips = simulate_triplets(
            oracle, feats, x_ids, y_ids, (type_list[0], type_list[-1]), n_tasks=tasks, seed=seed
        )
        write_triplets(out_triplets, trips)
        click.echo(f"simulated {len(trips)} triplets -> {out_triplets}")


@main.command()
@click.option("--port", type=int, default=8008)
@click.option("--host", default="127.0.0.1")
@click.option("--catalog", "catalog_dir", type=click.Path(exists=True, path_type=Path), required=True)
def serve(port, host, catalog_dir):
    """Serve the search + labeling HTTP API for a catalog directory."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(catalog_dir), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
