from django.apps import AppConfig


class ReductionConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "reduction"
