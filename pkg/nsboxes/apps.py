from django.apps import AppConfig


class NsboxesConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "nsboxes"
