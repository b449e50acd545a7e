import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "secureSumLab.settings")
django.setup()
