"""Entity alignment toolkit for highly heterogeneous knowledge graphs."""

from .analysis import (
    DegreeHistogram,
    HeterogeneityReport,
    analyze_pair,
    degree_distribution,
    density,
    overlapping_ratio,
    structure_similarity,
)
from .embeddings import EmbeddingSet, read_embedding_file, trigram_name_embeddings, write_embedding_file
from .encoders import (
    RandomWalkConfig,
    SkipGramConfig,
    Time2VecParams,
    UnifiedGraph,
    WhiteningTransform,
    apply_whitening,
    entity_time_embedding,
    fit_whitening,
    generate_walks,
    merge_graphs,
    split_unified,
    time2vec,
    time2vec_table,
    train_skipgram,
)
from .harness import mask_names, mask_structure, run_grid, run_pipeline
from .kg import (
    AnchorSet,
    CalendarConfig,
    Fact,
    KnowledgeGraph,
    TimeSpan,
    entity_time_vector,
    entity_time_vectors,
    load_anchors,
    load_kg,
    save_kg,
    split_anchors,
    time_index,
)
from .matching import RankingReport, SimilarityMatrix, cosine_matrix, csls_matrix, rank_and_score
from .sampling import IdsConfig, ids_sample, js_divergence
from .training import (
    AlignmentModel,
    ModelParams,
    SideInputs,
    TrainConfig,
    sample_negatives,
    train,
)

__version__ = "0.1.0"
