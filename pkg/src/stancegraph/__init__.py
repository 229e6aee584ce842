"""Knowledge-graph-augmented perspective detection toolkit.

Pipeline: political knowledge graph -> translational entity embeddings ->
heterogeneous news graphs -> gated relational GCN classifier, plus an
ablation harness for knowledge/edge/embedding studies.
"""

__version__ = "0.1.0"
