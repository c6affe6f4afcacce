import numpy as np


class RandomStreams:
    """Independent substreams of one master seed for a single run.

    The optimizer stream and the per-point realization streams never share
    state, and the problem is generated from its own seed, so switching
    strategy leaves both the problem and the sampled populations of a
    paired run untouched until estimates diverge.
    """

    OPTIMIZER = 0
    REALIZATIONS = 1

    def __init__(self, master_seed: int, run_id: int) -> None:
        self.master_seed = master_seed
        self.run_id = run_id

    def optimizer_seed(self) -> int:
        sequence = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.run_id, self.OPTIMIZER)
        )
        return int(sequence.generate_state(1)[0])

    def realization_rng(self, generation: int, index: int) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(
                self.master_seed,
                spawn_key=(self.run_id, self.REALIZATIONS, generation, index),
            )
        )
