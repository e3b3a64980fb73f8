from django.apps import AppConfig


class OptimizerAppConfig(AppConfig):
    name = "optimizer"
