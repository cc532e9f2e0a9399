from django.apps import AppConfig


class EventlogsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'eventlogs'
    verbose_name = 'Event logs'
