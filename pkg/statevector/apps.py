from django.apps import AppConfig


class StatevectorConfig(AppConfig):
    name = "statevector"
