from django.conf import settings


def get_setting(name):
    """Return a toolkit default from settings.VERIFICATION."""
    return settings.VERIFICATION[name]
