from django.apps import AppConfig


class AnsatzConfig(AppConfig):
    name = "ansatz"
