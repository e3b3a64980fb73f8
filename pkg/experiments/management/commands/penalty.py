from experiments.management.base import ExperimentCommand
from experiments.services import cmd_penalty


class Command(ExperimentCommand):
    help = "Minimize H + a1 P1 + a2 P2 on the open cluster model to select a parity sector"

    extra_options = ("alpha", "alpha_scan", "eta_scan")

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--alpha", help="a1,a2 (one value applies to both)")
        parser.add_argument("--alpha-scan", help="penalty weights to scan, a1 = a2")
        parser.add_argument("--eta-scan", help="learning rates to scan")

    def run(self, config):
        return cmd_penalty(config)
