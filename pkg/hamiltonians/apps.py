from django.apps import AppConfig


class HamiltoniansConfig(AppConfig):
    name = "hamiltonians"
