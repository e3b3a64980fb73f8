from experiments.management.base import ExperimentCommand
from experiments.services import cmd_sweep_setups


class Command(ExperimentCommand):
    help = (
        "Run the {centered, uncentered} Fisher x {normal, sboffset} initialization "
        "grid over every (N, D) cell"
    )

    def run(self, config):
        return cmd_sweep_setups(config)
