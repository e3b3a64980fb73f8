from django import forms
from django.utils.translation import gettext_lazy as _

from ansatz.circuits import (
    CircuitChoice,
    InitStrategy,
    InsertPosition,
    NewBlock,
    family_for,
)
from derivatives.fisher import FisherVariant
from exact.solvers import SolverMethod
from hamiltonians.builders import ModelKind
from optimizer.qng import OptimizerConfig


def _split(value):
    return [part.strip() for part in str(value or "").split(",") if part.strip()]


def _parse_ints(value, name, minimum=1):
    try:
        numbers = [int(part) for part in _split(value)]
    except ValueError:
        raise forms.ValidationError(
            _("%(name)s must be a comma separated list of integers."),
            params={"name": name},
        )
    if any(number < minimum for number in numbers):
        raise forms.ValidationError(
            _("Every %(name)s value must be at least %(min)d."),
            params={"name": name, "min": minimum},
        )
    return tuple(numbers)


def _parse_floats(value, name):
    try:
        return tuple(float(part) for part in _split(value))
    except ValueError:
        raise forms.ValidationError(
            _("%(name)s must be a comma separated list of numbers."),
            params={"name": name},
        )


class ExperimentForm(forms.Form):
    """Validates raw experiment settings from the config file and CLI flags."""

    # [model]
    model = forms.ChoiceField(choices=ModelKind.choices)
    n = forms.CharField()
    h = forms.FloatField()
    method = forms.ChoiceField(choices=SolverMethod.choices)

    # [ansatz]
    ansatz = forms.ChoiceField(choices=CircuitChoice.choices)
    depth = forms.CharField()
    init = forms.CharField()

    # [optimizer]
    fisher = forms.ChoiceField(choices=FisherVariant.choices)
    eta = forms.FloatField()
    lambda0 = forms.FloatField(min_value=0)
    lambda_decay = forms.FloatField()
    lambda_floor = forms.FloatField()
    epochs = forms.IntegerField(min_value=1)
    stop_window = forms.IntegerField(min_value=1)
    stop_tol = forms.FloatField(min_value=0)

    # [run]
    replicas = forms.IntegerField(min_value=1)
    seed = forms.IntegerField(min_value=0)
    jobs = forms.IntegerField(min_value=1)
    out = forms.CharField()
    gnuplot_hints = forms.BooleanField(required=False)

    # [penalty]
    alpha = forms.CharField(required=False)
    alpha_scan = forms.CharField(required=False)
    eta_scan = forms.CharField(required=False)

    # [transfer]
    source = forms.CharField(required=False)
    perturb = forms.FloatField(min_value=0)
    chain = forms.IntegerField(min_value=1)
    insert_position = forms.ChoiceField(choices=InsertPosition.choices)
    new_block = forms.ChoiceField(choices=NewBlock.choices)
    new_block_sigma = forms.FloatField(min_value=0)

    def clean_n(self):
        sizes = _parse_ints(self.cleaned_data.get("n"), "n")
        if not sizes:
            raise forms.ValidationError(_("At least one system size is required."))
        return sizes

    def clean_depth(self):
        depths = _parse_ints(self.cleaned_data.get("depth"), "depth")
        if not depths:
            raise forms.ValidationError(_("At least one circuit depth is required."))
        return depths

    def clean_init(self):
        try:
            return InitStrategy.parse(self.cleaned_data.get("init"))
        except forms.ValidationError as exc:
            raise forms.ValidationError(exc.messages)

    def clean_alpha(self):
        return _parse_floats(self.cleaned_data.get("alpha"), "alpha")

    def clean_alpha_scan(self):
        return _parse_floats(self.cleaned_data.get("alpha_scan"), "alpha_scan")

    def clean_eta_scan(self):
        etas = _parse_floats(self.cleaned_data.get("eta_scan"), "eta_scan")
        if any(eta <= 0 for eta in etas):
            raise forms.ValidationError(_("Learning rates must be positive."))
        return etas

    def clean(self):
        cleaned_data = super().clean()
        model = cleaned_data.get("model")
        ansatz = cleaned_data.get("ansatz")
        if model and ansatz:
            try:
                family_for(model, ansatz)
            except forms.ValidationError as exc:
                self.add_error("ansatz", exc.messages)

        optimizer_fields = [
            "eta",
            "lambda0",
            "lambda_decay",
            "lambda_floor",
            "epochs",
            "stop_window",
            "stop_tol",
            "fisher",
        ]
        if all(field in cleaned_data for field in optimizer_fields):
            try:
                cleaned_data["optimizer"] = OptimizerConfig(
                    eta=cleaned_data["eta"],
                    lambda0=cleaned_data["lambda0"],
                    lambda_decay=cleaned_data["lambda_decay"],
                    lambda_floor=cleaned_data["lambda_floor"],
                    max_epochs=cleaned_data["epochs"],
                    stop_window=cleaned_data["stop_window"],
                    stop_tol=cleaned_data["stop_tol"],
                    fisher_variant=cleaned_data["fisher"],
                )
            except forms.ValidationError as exc:
                raise forms.ValidationError(exc.messages)
        return cleaned_data
