from experiments.management.base import ExperimentCommand
from experiments.services import cmd_solve


class Command(ExperimentCommand):
    help = "Run seeded VQE replicas over every (N, D) cell and summarize the best energies"

    def run(self, config):
        return cmd_solve(config)
