from django.apps import AppConfig


class NcycleConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "ncycle"
