from riskgraph.data_model.types import (
    CohortDataset,
    Lexicon,
    PostRecord,
    SocialEdge,
    StressPeriod,
    UserRecord,
)
from riskgraph.data_model.io import load_cohort, save_cohort
from riskgraph.data_model.degrees import post_degree, user_degree
from riskgraph.data_model.pseudo_embed import pseudo_embed
from riskgraph.data_model.synth import (
    ClassProfile,
    SynthConfig,
    generate_synthetic_cohort,
    planted_config,
    reddit_config,
    weibo_config,
)

__all__ = [
    "CohortDataset", "Lexicon", "PostRecord", "SocialEdge", "StressPeriod",
    "UserRecord", "load_cohort", "save_cohort", "post_degree", "user_degree",
    "pseudo_embed", "ClassProfile", "SynthConfig", "generate_synthetic_cohort",
    "planted_config", "reddit_config", "weibo_config",
]
