from .base import EpisodeOutcome, ScriptedAgent
from .ckbg import (
    CkbgCondition,
    CkbgKeeperAgent,
    CkbgBurglarAgent,
    CkbgSetting,
    DatasetSummary,
    ckbg_generate_dataset,
    ckbg_run_episode,
    ckbg_world_events,
)
from .mutual_friends import (
    MfPlayerAgent,
    MfScenario,
    mf_generate_scenarios,
    mf_judge,
    mf_run_episode,
    mf_world_events,
)
from .casino import (
    CasinoNegotiatorAgent,
    CasinoScenario,
    PREFERENCE_PERMUTATIONS,
    casino_generate_scenarios,
    casino_reward,
    casino_run_episode,
    casino_world_set,
)

__all__ = [name for name in dir() if not name.startswith("_")]
