from django.apps import AppConfig


class CvchainConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "cvchain"
