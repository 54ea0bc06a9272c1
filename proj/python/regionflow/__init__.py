"""Community detection on spatial interaction networks."""

from ._core import (
    NumericalError,
    SpatialNetwork,
    ValidationError,
    __version__,
    adjusted_rand_index,
    assemble_network,
    constrained_agglomerative,
    cosine_within,
    designate,
    evaluate,
    inequality_raw,
    intra_flow_ratio,
    join_count_ratio,
    kmeans,
    load_network,
    louvain,
    modularity,
    render,
    save_network,
    synth,
    train,
    walk_embedding,
)


def detect(network, k=14, linkage="ward", **train_options):
    """Train, cluster and score in one call. Returns (labels, metrics)."""
    embeddings, _ = train(network, **train_options)
    labels = constrained_agglomerative(embeddings, network.adjacency, k, linkage)
    return labels, evaluate(network, [labels])[0]
