from django.apps import AppConfig


class ChartsimConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "chartsim"
