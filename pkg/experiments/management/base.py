from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from experiments.config import load_experiment_config

MODEL_OPTIONS = ("config", "model", "n", "h", "method")
RUN_OPTIONS = (
    "depth",
    "ansatz",
    "init",
    "fisher",
    "eta",
    "lambda0",
    "lambda_decay",
    "lambda_floor",
    "epochs",
    "stop_window",
    "stop_tol",
    "replicas",
    "seed",
    "jobs",
    "out",
)


class ExperimentCommand(BaseCommand):
    """
    Shared flags and error handling for the experiment commands. Subclasses
    implement ``run(config)`` returning a ``SweepOutcome``.
    """

    extra_options = ()

    def add_arguments(self, parser):
        parser.add_argument("--config", help="INI file with experiment settings")
        parser.add_argument("--model", help="tfi, tfc or cluster")
        parser.add_argument("--n", help="system size(s), comma separated")
        parser.add_argument("--h", help="transverse field strength")
        parser.add_argument("--method", help="exact solver: auto, dense or lanczos")
        parser.add_argument("--depth", help="circuit depth(s), comma separated")
        parser.add_argument("--ansatz", help="qaoa, bare or sb")
        parser.add_argument("--init", help="normal:SIGMA or sboffset:SIGMA")
        parser.add_argument("--fisher", help="centered or uncentered")
        parser.add_argument("--eta", help="learning rate")
        parser.add_argument("--lambda0")
        parser.add_argument("--lambda-decay")
        parser.add_argument("--lambda-floor")
        parser.add_argument("--epochs", help="maximum number of epochs")
        parser.add_argument("--stop-window")
        parser.add_argument("--stop-tol")
        parser.add_argument("--replicas", help="independent runs per (N, D) cell")
        parser.add_argument("--seed", help="base seed; replica k uses seed + k")
        parser.add_argument("--jobs", help="replicas run concurrently")
        parser.add_argument("--out", help="output directory")
        parser.add_argument(
            "--gnuplot-hints",
            action="store_true",
            help="write columns.txt describing the CSV columns",
        )

    def overrides(self, options):
        names = MODEL_OPTIONS + RUN_OPTIONS + tuple(self.extra_options)
        overrides = {
            name: str(options[name])
            for name in names
            if name != "config" and options.get(name) is not None
        }
        if options.get("gnuplot_hints"):
            overrides["gnuplot_hints"] = "true"
        return overrides

    def load_config(self, options):
        try:
            return load_experiment_config(options.get("config"), self.overrides(options))
        except ValidationError as exc:
            raise CommandError("Invalid configuration: " + "; ".join(exc.messages))

    def handle(self, *args, **options):
        config = self.load_config(options)
        try:
            outcome = self.run(config)
        except ValidationError as exc:
            raise CommandError("; ".join(exc.messages))

        for row in outcome.rows:
            self.stdout.write(
                f"n={row['n']} depth={row['depth']} best_normalized={row['best_normalized']} "
                f"completed={row['completed']}/{row['replicas']}"
            )
        if outcome.failed:
            raise CommandError(
                f"{outcome.failed} run(s) failed; see {outcome.out_dir / 'summary.json'}"
            )
        self.stdout.write(self.style.SUCCESS(f"Results written to {outcome.out_dir}"))

    def run(self, config):
        raise NotImplementedError
