"""Cross-lingual word embedding alignment with meet-in-the-middle fine-tuning."""

__version__ = "0.1.0"

from .alignment import LinearMap, align_bilingual, apply_map, load_map, procrustes, save_map
from .dictionaries import (
    PairedMatrices, TranslationDictionary, build_pairs, join_on_pivot, load_dictionary,
    split, subsample,
)
from .embeddings import EmbeddingSpace, load_embeddings, load_frequencies, normalize, save_embeddings
from .errors import DataError, NumericError
from .evaluation import (
    EvalReport, eval_dict_induction, eval_hypernym, eval_word_similarity, knn, train_hypernym_map,
)
from .meemi import MultiSpace, build_multispace, least_squares_map, meemi_bilingual, meemi_multilingual
