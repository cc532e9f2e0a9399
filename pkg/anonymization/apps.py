from django.apps import AppConfig


class AnonymizationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'anonymization'
    verbose_name = 'Event log anonymization'
