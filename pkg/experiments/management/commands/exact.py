import json

from django.core.exceptions import ValidationError
from django.core.management.base import CommandError

from core.exceptions import NotConvergedError
from experiments.management.base import ExperimentCommand
from experiments.services import cmd_exact


class Command(ExperimentCommand):
    help = "Print the exact ground energy (and degeneracy on the dense path) as JSON"

    def handle(self, *args, **options):
        config = self.load_config(options)
        try:
            results = cmd_exact(config)
        except ValidationError as exc:
            raise CommandError("; ".join(exc.messages))
        except NotConvergedError as exc:
            raise CommandError(str(exc))
        for entry in results:
            self.stdout.write(json.dumps(entry))
