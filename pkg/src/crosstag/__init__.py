"""Cross-lingual sequence-labeling transfer toolkit.

Three pillars, each usable on its own:

- :mod:`crosstag.projection` carries labeled spans across parallel
  sentences via word alignments;
- :mod:`crosstag.candidates` / :mod:`crosstag.selection` project labels by
  generating candidate target ranges and ranking them with translation
  probabilities (:mod:`crosstag.scoring`);
- :mod:`crosstag.fsa` / :mod:`crosstag.engine` decode tagging output from
  an autoregressive model under an automaton that makes hallucination,
  word splitting, and broken markup impossible.

:mod:`crosstag.diagnostics` and :mod:`crosstag.evaluation` measure output
quality; :mod:`crosstag.cli` wires everything into batch pipelines.
"""

from .candidates import (
    Candidate,
    CandidateSet,
    CandidateSource,
    external_candidates,
    filter_candidates,
    generate_ngram_candidates,
)
from .core import (
    LabeledSentence,
    MarkupError,
    MarkupErrorKind,
    Span,
    TagCodecError,
    TagScheme,
    parse_tagged_text,
    spans_to_tags,
    tags_to_spans,
    to_tagged_text,
)
from .diagnostics import CorpusRates, OutputDiagnosis, corpus_rates, diagnose, to_iob2_lenient
from .engine import (
    DecodeResult,
    constrained_beam,
    constrained_greedy,
    sequence_logprob,
    unconstrained_beam,
    unconstrained_greedy,
)
from .evaluation import CategoryScore, EntityF1Report, entity_f1, f1_from_tag_files
from .fsa import (
    Action,
    ActionKind,
    DecodeState,
    InvalidActionError,
    apply_action,
    valid_actions,
)
from .models import (
    PROMPT_SEPARATOR,
    CharChunkSplitter,
    MockTokenizer,
    ModelInterface,
    SeededRandomModel,
    TableModel,
    TokenizerInterface,
    UniformModel,
    Vocabulary,
    WholeWordSplitter,
)
from .projection import (
    AlignmentSet,
    ProjectionReport,
    project,
    translate_test_backproject,
    translate_train_assemble,
)
from .scoring import (
    CharOverlapScorer,
    ScoreCache,
    ScorerContractError,
    SeededRandomScorer,
    TableScorer,
    TranslationScore,
    TranslationScorer,
    conditional_probability,
    translation_similarity,
)
from .selection import (
    candidate_sweep,
    oracle_upper_bound,
    select_candidates,
    select_most_probable,
)

__version__ = "0.1.0"
