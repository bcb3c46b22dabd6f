"""Video-segment concept learning on frozen embeddings.

Phase one trains small resampler heads with a symmetric contrastive loss
over diversity batches of (middle-frame features, annotation embedding)
pairs and evaluates Top-k concept retrieval. Phase two assembles
concept-augmented summarizer prompts and scores externally generated
summaries with ROUGE-1/2/L.
"""

__version__ = "0.1.0"

from .contrastive_trainer import (
    TrainConfig,
    TrainReport,
    backward_gradients,
    clip_contrastive_loss,
    finite_difference_check,
    similarity_matrix,
    train,
)
from .dataset import (
    EmbeddingTable,
    RowRef,
    SegmentRecord,
    Splits,
    SplitSpec,
    VideoTranscript,
    load_manifest,
    load_transcripts,
    read_embedding_table,
    split_dataset,
    write_embedding_table,
)
from .diversity_batcher import (
    BatchPlan,
    KMeansModel,
    build_diverse_batches,
    build_random_batches,
    kmeans_fit,
    mean_pairwise_distance,
)
from .evaluation import (
    RetrievalResult,
    RougeScore,
    evaluate_retrieval,
    rouge_l,
    rouge_n,
    score_summary_corpus,
    topk_retrieval_accuracy,
)
from .frame_sampler import (
    middle_frame_indices,
    temporal_concat,
    uniform_sample_indices,
)
from .prompt_assembler import AugmentedInput, assemble_augmented_input
from .resampler_head import (
    HeadConfig,
    LearnablePoolParams,
    ResamplerParams,
    init_head,
    learnable_pool_forward,
    load_head_checkpoint,
    mean_pool,
    resampler_forward,
    save_head_checkpoint,
)
from .synth import SynthSpec, generate_corpus
