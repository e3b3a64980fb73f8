from experiments.management.base import ExperimentCommand
from experiments.services import cmd_transfer


class Command(ExperimentCommand):
    help = "Insert a block into a converged checkpoint and retrain the deeper circuit"

    extra_options = (
        "source",
        "perturb",
        "chain",
        "insert_position",
        "new_block",
        "new_block_sigma",
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--source",
            help="checkpoint file, or a directory searched for the best checkpoint",
        )
        parser.add_argument("--perturb", help="sigma of the noise added to every parameter")
        parser.add_argument("--chain", help="number of successive insertions")
        parser.add_argument("--insert-position", help="floor or ceil")
        parser.add_argument("--new-block", help="normal or zero")
        parser.add_argument("--new-block-sigma")

    def run(self, config):
        return cmd_transfer(config)
