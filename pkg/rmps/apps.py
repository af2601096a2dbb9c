"""App configuration."""

from django.apps import AppConfig


class RmpsConfig(AppConfig):
    """Configuration for the RMPS optimization app."""

    default_auto_field = "django.db.models.BigAutoField"
    name = "rmps"
    verbose_name = "Recursive Modified Pattern Search"
