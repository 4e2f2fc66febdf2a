from django.apps import AppConfig


class HardyConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'hardy'
    verbose_name = 'Hardy operator spectral calculus'
