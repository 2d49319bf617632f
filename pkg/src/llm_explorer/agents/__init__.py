from .checkpoint import load_agent, save_agent
from .ddpg import ActorCriticConfig, DdpgAgent, Td3Agent, ddpg_update, td3_update
from .dqn import DqnAgent, DqnConfig, dqn_update
from .exploration import epsilon_greedy, gaussian_explore
from .replay import Batch, ReplayBuffer
from .schedule import EpsilonSchedule, epsilon_at
from .tabular import TabularQAgent, tabular_q_update

__all__ = [
    "ActorCriticConfig", "Batch", "DdpgAgent", "DqnAgent", "DqnConfig", "EpsilonSchedule",
    "ReplayBuffer", "TabularQAgent", "Td3Agent", "ddpg_update", "dqn_update", "epsilon_at",
    "epsilon_greedy", "gaussian_explore", "load_agent", "save_agent", "tabular_q_update", "td3_update",
]
