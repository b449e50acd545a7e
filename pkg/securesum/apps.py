from django.apps import AppConfig


class SecuresumConfig(AppConfig):
    name = 'securesum'
    verbose_name = 'Secure sum protocol lab'
