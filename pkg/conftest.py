"""Pytest wiring: configure Django before test collection."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'svbackend.settings')
django.setup()
